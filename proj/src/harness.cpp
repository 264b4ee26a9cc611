#include "efe/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "efe/dp.hpp"
#include "efe/envs.hpp"
#include "efe/error.hpp"
#include "efe/pomdp.hpp"
#include "efe/rng.hpp"
#include "efe/sophisticated.hpp"

namespace efe {

using nlohmann::json;

namespace {

constexpr const char* kCompareHeader = "# efe-planner comparison v1";
constexpr const char* kSummaryHeader = "# efe-planner simulation summary v1";

template <typename T>
T field(const json& j, const char* key) {
  require(j.contains(key), ErrorKind::OutOfRange, std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

RandomSpec random_spec(const json& j, std::uint64_t seed) {
  RandomSpec spec;
  spec.seed = seed;
  spec.n_states = field_or<std::size_t>(j, "n_states", spec.n_states);
  spec.n_actions = field_or<std::size_t>(j, "n_actions", spec.n_actions);
  spec.horizon = field_or<std::size_t>(j, "horizon", spec.horizon);
  if (j.contains("n_obs") && !j.at("n_obs").is_null()) spec.n_obs = j.at("n_obs").get<std::size_t>();
  spec.sparsity = field_or<double>(j, "sparsity", spec.sparsity);
  spec.deterministic = field_or<bool>(j, "deterministic", spec.deterministic);
  spec.reward_ties = field_or<bool>(j, "reward_ties", spec.reward_ties);
  return spec;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

const FiniteMdp& as_mdp(const AnyModel& m) {
  if (const auto* p = std::get_if<FinitePomdp>(&m)) return p->mdp();
  return std::get<FiniteMdp>(m);
}

Preferences preferences_for(const FiniteMdp& mdp, const SchemeSetting& setting) {
  if (setting.beta) return build_preferences(mdp.reward(), Beta{*setting.beta});
  return build_preferences(mdp.reward(), ZeroTemperature{});
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "standard") return Scheme::Standard;
  if (name == "sophisticated") return Scheme::Sophisticated;
  if (name == "backward") return Scheme::Backward;
  fail(ErrorKind::OutOfRange, "unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Standard: return "standard";
    case Scheme::Sophisticated: return "sophisticated";
    default: return "backward";
  }
}

std::string SchemeSetting::beta_label() const {
  if (scheme == Scheme::Backward) return "-";
  return beta ? format_double(*beta) : "limit";
}

AnyModel make_env(const json& spec) {
  const auto kind = field<std::string>(spec, "kind");
  if (kind == "gridworld") {
    const auto w = field<std::size_t>(spec, "width");
    const auto h = field<std::size_t>(spec, "height");
    return gen_gridworld(w, h, field_or<std::size_t>(spec, "reward_cell", w * h - 1), field_or<double>(spec, "slip", 0.0),
                         field<std::size_t>(spec, "horizon"), field_or<std::size_t>(spec, "start", 0));
  }
  if (kind == "tmaze")
    return gen_tmaze(field<double>(spec, "reliability"), field_or<std::size_t>(spec, "horizon", 3),
                     field_or<bool>(spec, "identity", false));
  if (kind == "random") return gen_random(random_spec(spec, field<std::uint64_t>(spec, "seed")));
  fail(ErrorKind::OutOfRange, "unknown environment kind '" + kind + "'");
}

std::vector<SchemeSetting> ExperimentConfig::settings() const {
  std::vector<SchemeSetting> out;
  for (Scheme s : schemes) {
    if (s == Scheme::Backward) {
      out.push_back({s, std::nullopt});
      continue;
    }
    for (double b : betas) out.push_back({s, b});
    if (limit) out.push_back({s, std::nullopt});
  }
  return out;
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  ExperimentConfig c;
  if (j.contains("models")) {
    std::size_t index = 0;
    for (const auto& m : j.at("models")) {
      if (m.is_string()) {
        const std::string path = resolve(m.get<std::string>(), base_dir);
        c.models.push_back({std::filesystem::path(path).stem().string(), load_model(path)});
      } else {
        const std::string name =
            field_or<std::string>(m, "name", field<std::string>(m, "kind") + "-" + std::to_string(index));
        c.models.push_back({name, make_env(m)});
      }
      ++index;
    }
  }
  if (j.contains("suite")) {
    const json& s = j.at("suite");
    require(field<std::string>(s, "kind") == "random", ErrorKind::OutOfRange, "only random suites are supported");
    const auto first = field_or<std::uint64_t>(s, "first_seed", 0);
    const auto count = field<std::size_t>(s, "count");
    for (std::uint64_t seed = first; seed < first + count; ++seed)
      c.models.push_back({"random-" + std::to_string(seed), gen_random(random_spec(s, seed))});
  }
  require(!c.models.empty(), ErrorKind::OutOfRange, "config names no models");

  for (const auto& s : field<std::vector<std::string>>(j, "schemes")) c.schemes.push_back(parse_scheme(s));
  require(!c.schemes.empty(), ErrorKind::OutOfRange, "config needs at least one scheme");
  c.betas = field_or<std::vector<double>>(j, "betas", {});
  for (double b : c.betas) require(b > 0.0 && std::isfinite(b), ErrorKind::NonPositiveBeta, "betas must be positive");
  c.limit = field_or<bool>(j, "limit", c.betas.empty());
  const auto efe = field_or<std::string>(j, "efe", "exact");
  require(efe == "exact" || efe == "meanfield", ErrorKind::OutOfRange, "efe must be exact or meanfield");
  c.efe = efe == "exact" ? EfeMode::Exact : EfeMode::MeanField;
  if (j.contains("prune") && !j.at("prune").is_null()) c.prune = j.at("prune").get<double>();
  c.seed = field_or<std::uint64_t>(j, "seed", 0);
  c.episodes = field_or<std::size_t>(j, "episodes", c.episodes);
  if (j.contains("guards")) {
    const json& g = j.at("guards");
    c.guards.sequences = field_or<double>(g, "sequences", c.guards.sequences);
    c.guards.trajectories = field_or<double>(g, "trajectories", c.guards.trajectories);
    c.guards.tree = field_or<double>(g, "tree", c.guards.tree);
  }
  require(c.guards.sequences > 0 && c.guards.trajectories > 0 && c.guards.tree > 0, ErrorKind::OutOfRange,
          "guards must be positive");
  c.timing = field_or<bool>(j, "timing", false);
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (o.contains("csv")) c.csv_path = resolve(o.at("csv").get<std::string>(), base_dir);
    if (o.contains("json")) c.json_path = resolve(o.at("json").get<std::string>(), base_dir);
    if (o.contains("episodes")) c.episodes_path = resolve(o.at("episodes").get<std::string>(), base_dir);
  }
  return c;
}

InducedPolicy induced_policy(const FiniteMdp& mdp, const SchemeSetting& setting, const StandardOptions& options) {
  const std::size_t S = mdp.n_states();
  const std::size_t T = mdp.horizon();
  InducedPolicy out;
  out.choice.resize(T * S);
  out.tie_sizes.resize(T * S);
  if (setting.scheme == Scheme::Backward) {
    const auto bi = backward_induction(mdp, kTieTolerance, options.exec);
    out.choice = bi.canonical;
    for (std::size_t i = 0; i < T * S; ++i) out.tie_sizes[i] = bi.argmax_sets[i].size();
    return out;
  }
  const Preferences prefs = preferences_for(mdp, setting);
  if (setting.scheme == Scheme::Sophisticated) {
    const EfeTable table = sophisticated_table(mdp, prefs, 0, options.exec);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t s = 0; s < S; ++s) {
        out.choice[t * S + s] = table.chosen(t, s);
        out.tie_sizes[t * S + s] = table.argmin(t, s).size();
      }
    return out;
  }
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      const StandardPlan plan = standard_plan(mdp, prefs, s, t, options);
      out.choice[t * S + s] = plan.chosen;
      out.tie_sizes[t * S + s] = plan.winning_set.size();
    }
  return out;
}

ComparisonRow compare_scheme(const std::string& name, const FiniteMdp& mdp, const SchemeSetting& setting,
                             const StandardOptions& options) {
  const std::size_t S = mdp.n_states();
  const std::size_t T = mdp.horizon();
  const auto bi = backward_induction(mdp, kTieTolerance, options.exec);

  const auto start = std::chrono::steady_clock::now();
  const InducedPolicy policy = induced_policy(mdp, setting, options);
  const auto stop = std::chrono::steady_clock::now();

  std::vector<double> values((T + 1) * S, 0.0);
  kernels::evaluate_deterministic(mdp, policy.choice, values);

  ComparisonRow row;
  row.model = name;
  row.scheme = to_string(setting.scheme);
  row.beta = setting.beta_label();
  row.n_states = S;
  row.n_actions = mdp.n_actions();
  row.horizon = T;
  std::size_t agree = 0;
  double gap_sum = 0.0;
  double tie_sum = 0.0;
  row.value_gap_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < T * S; ++i) {
    const auto& best = bi.argmax_sets[i];
    if (std::find(best.begin(), best.end(), policy.choice[i]) != best.end()) ++agree;
    const double gap = bi.values.data()[i] - values[i];
    gap_sum += gap;
    row.value_gap_max = std::max(row.value_gap_max, gap);
    tie_sum += static_cast<double>(policy.tie_sizes[i]);
    row.tie_size_max = std::max(row.tie_size_max, policy.tie_sizes[i]);
  }
  const double n = static_cast<double>(T * S);
  row.agreement = static_cast<double>(agree) / n;
  row.value_gap_mean = gap_sum / n;
  row.tie_size_mean = tie_sum / n;
  row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  row.choice = policy.choice;
  return row;
}

namespace {

StandardOptions standard_options(const ExperimentConfig& config, Exec exec) {
  StandardOptions o;
  o.efe = config.efe;
  o.prune = config.prune;
  o.guards = config.guards;
  o.exec = exec;
  return o;
}

}  // namespace

ComparisonReport run_compare(const ExperimentConfig& config, Exec exec) {
  const auto settings = config.settings();
  const std::size_t jobs = config.models.size() * settings.size();
  const Exec inner = jobs > 1 ? Exec::Serial : exec;
  const Exec outer = jobs > 1 ? exec : Exec::Serial;
  ComparisonReport report;
  report.rows.resize(jobs);
  parallel_for(jobs, outer, [&](std::size_t i) {
    const NamedModel& m = config.models[i / settings.size()];
    report.rows[i] = compare_scheme(m.name, as_mdp(m.model), settings[i % settings.size()],
                                    standard_options(config, inner));
    if (!config.timing) report.rows[i].runtime_ms.reset();
  });
  return report;
}

std::string report_csv(const ComparisonReport& report) {
  std::string out = std::string(kCompareHeader) +
                    "\nmodel,scheme,beta,n_states,n_actions,horizon,agreement,value_gap_max,value_gap_mean,"
                    "tie_size_mean,tie_size_max,runtime_ms\n";
  for (const auto& r : report.rows) {
    out += r.model + "," + r.scheme + "," + r.beta + "," + std::to_string(r.n_states) + "," +
           std::to_string(r.n_actions) + "," + std::to_string(r.horizon) + "," + format_double(r.agreement) + "," +
           format_double(r.value_gap_max) + "," + format_double(r.value_gap_mean) + "," +
           format_double(r.tie_size_mean) + "," + std::to_string(r.tie_size_max) + "," +
           (r.runtime_ms ? format_double(*r.runtime_ms) : std::string()) + "\n";
  }
  return out;
}

json report_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"model", r.model},
                {"scheme", r.scheme},
                {"beta", r.beta},
                {"n_states", r.n_states},
                {"n_actions", r.n_actions},
                {"horizon", r.horizon},
                {"agreement", r.agreement},
                {"value_gap_max", r.value_gap_max},
                {"value_gap_mean", r.value_gap_mean},
                {"tie_size_mean", r.tie_size_mean},
                {"tie_size_max", r.tie_size_max},
                {"choice", r.choice}};
    if (r.runtime_ms) row["runtime_ms"] = *r.runtime_ms;
    rows.push_back(std::move(row));
  }
  return {{"version", 1}, {"rows", rows}};
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

namespace {

// Planner for partially observed models, memoized on the history.
class PomdpPlanner {
 public:
  PomdpPlanner(const FinitePomdp& pomdp, const SchemeSetting& setting, StandardOptions options)
      : pomdp_(pomdp), setting_(setting), options_(options), prefs_(preferences_for(pomdp.mdp(), setting)) {
    require(setting.scheme != Scheme::Backward, ErrorKind::OutOfRange,
            "backward induction needs a fully observed model");
  }

  std::size_t operator()(std::size_t time, std::span<const std::size_t> obs, std::span<const std::size_t> acts) {
    auto key = std::make_pair(std::vector<std::size_t>(obs.begin(), obs.end()),
                              std::vector<std::size_t>(acts.begin(), acts.end()));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::size_t choice = 0;
    if (setting_.scheme == Scheme::Standard) {
      choice = standard_plan_pomdp(pomdp_, prefs_, obs, acts, options_).chosen;
    } else {
      const PosteriorBundle post = exact_posterior(pomdp_, acts, obs);
      choice = sophisticated_plan_pomdp(pomdp_, prefs_, {post.current().dist, time}, options_.guards.tree,
                                        options_.exec)
                   .chosen;
    }
    cache_.emplace(std::move(key), choice);
    return choice;
  }

 private:
  const FinitePomdp& pomdp_;
  SchemeSetting setting_;
  StandardOptions options_;
  Preferences prefs_;
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::size_t> cache_;
};

}  // namespace

SimulationResult run_simulate(const ExperimentConfig& config, Exec exec) {
  const auto settings = config.settings();
  const std::size_t jobs = config.models.size() * settings.size();
  const Exec inner = jobs > 1 ? Exec::Serial : exec;
  const Exec outer = jobs > 1 ? exec : Exec::Serial;
  std::vector<SimulationSummary> summary(jobs);
  std::vector<std::vector<std::string>> lines(jobs);

  parallel_for(jobs, outer, [&](std::size_t i) {
    const NamedModel& m = config.models[i / settings.size()];
    const SchemeSetting& setting = settings[i % settings.size()];
    const StandardOptions options = standard_options(config, inner);
    std::vector<double> returns;
    const auto record = [&](std::size_t k, const Episode& ep) {
      returns.push_back(ep.total_return());
      json j = to_json(ep);
      j["model"] = m.name;
      j["scheme"] = to_string(setting.scheme);
      j["beta"] = setting.beta_label();
      j["episode"] = k;
      lines[i].push_back(j.dump());
    };
    if (const auto* pomdp = std::get_if<FinitePomdp>(&m.model)) {
      PomdpPlanner planner(*pomdp, setting, options);
      const PomdpAgent agent = [&](std::size_t t, std::span<const std::size_t> o, std::span<const std::size_t> a) {
        return planner(t, o, a);
      };
      for (std::size_t k = 0; k < config.episodes; ++k) record(k, rollout(*pomdp, agent, mix_seed(config.seed, k)));
    } else {
      const FiniteMdp& mdp = std::get<FiniteMdp>(m.model);
      const InducedPolicy policy = induced_policy(mdp, setting, options);
      const MdpAgent agent = [&](std::size_t t, std::size_t s) { return policy.choice[t * mdp.n_states() + s]; };
      for (std::size_t k = 0; k < config.episodes; ++k) record(k, rollout(mdp, agent, mix_seed(config.seed, k)));
    }
    const auto [mean, sd] = mean_std(returns);
    summary[i] = {m.name, to_string(setting.scheme), setting.beta_label(), mean, sd, config.episodes};
  });

  SimulationResult result;
  result.summary = std::move(summary);
  for (auto& l : lines)
    for (auto& line : l) result.episode_lines.push_back(std::move(line));
  return result;
}

std::string summary_csv(const std::vector<SimulationSummary>& rows) {
  std::string out = std::string(kSummaryHeader) + "\nmodel,scheme,beta,mean,std,episodes\n";
  for (const auto& r : rows)
    out += r.model + "," + r.scheme + "," + r.beta + "," + format_double(r.mean) + "," + format_double(r.std) + "," +
           std::to_string(r.episodes) + "\n";
  return out;
}

}  // namespace efe
