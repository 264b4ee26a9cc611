// efe-planner: command-line front end for the planning library.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "efe/dp.hpp"
#include "efe/envs.hpp"
#include "efe/error.hpp"
#include "efe/harness.hpp"
#include "efe/learning.hpp"
#include "efe/model_io.hpp"
#include "efe/pomdp.hpp"
#include "efe/sophisticated.hpp"
#include "efe/standard.hpp"

using nlohmann::json;
using namespace efe;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  double guard_sequences = 1e6;
  double guard_tree = 1e7;
  bool timing = false;
};

struct PlannerFlags {
  std::string model;
  std::string scheme = "sophisticated";
  std::optional<double> beta;
  bool limit = false;
  std::string efe = "exact";
  std::optional<double> prune;
  std::string out;

  void add(CLI::App* cmd) {
    cmd->add_option("--model", model, "model JSON")->required();
    cmd->add_option("--scheme", scheme, "standard or sophisticated")
        ->check(CLI::IsMember({"standard", "sophisticated"}));
    auto* b = cmd->add_option("--beta", beta, "inverse temperature");
    auto* l = cmd->add_flag("--limit", limit, "zero-temperature limit");
    b->excludes(l);
    cmd->add_option("--efe", efe, "exact or meanfield")->check(CLI::IsMember({"exact", "meanfield"}));
    cmd->add_option("--prune", prune, "Occam window for mean-field scores");
    cmd->add_option("--out", out, "output JSON")->required();
  }

  PreferenceMode mode() const {
    require(beta.has_value() != limit, ErrorKind::NonPositiveBeta, "give exactly one of --beta or --limit");
    if (limit) return ZeroTemperature{};
    return Beta{*beta};
  }

  StandardOptions options(const Globals& g) const {
    StandardOptions o;
    o.efe = efe == "exact" ? EfeMode::Exact : EfeMode::MeanField;
    o.prune = prune;
    o.guards.sequences = g.guard_sequences;
    o.guards.tree = g.guard_tree;
    return o;
  }
};

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    require(pos == item.size(), ErrorKind::OutOfRange, "bad index '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

json score_json(const EfeScore& s) {
  if (s.is_pruned()) return {{"pruned", true}};
  json j = {{"expected_reward", s.expected_reward}, {"residual", s.residual}};
  if (s.kind == EfeScore::Kind::Finite) j["g"] = s.g;
  return j;
}

json standard_json(const StandardPlan& plan) {
  json per = json::array();
  for (const auto& s : plan.per_sequence) per.push_back({{"actions", s.actions}, {"score", score_json(s.score)}});
  json lw = json::array();
  for (double w : plan.log_weight) lw.push_back(std::isfinite(w) ? json(w) : json(nullptr));
  return {{"chosen", plan.chosen},
          {"winning_set", plan.winning_set},
          {"action_posterior", plan.action_posterior},
          {"log_weight", lw},
          {"per_sequence", per}};
}

json policy_json(const FiniteMdp& mdp, const BackwardInductionResult& bi) {
  const std::size_t S = mdp.n_states();
  json table = json::array();
  json sets = json::array();
  json canonical = json::array();
  json values = json::array();
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    json rows = json::array();
    json set_rows = json::array();
    json canon_row = json::array();
    for (std::size_t s = 0; s < S; ++s) {
      const auto slice = bi.policy.slice(t, s);
      rows.push_back(std::vector<double>(slice.begin(), slice.end()));
      set_rows.push_back(bi.argmax_sets[t * S + s]);
      canon_row.push_back(bi.canonical[t * S + s]);
    }
    table.push_back(rows);
    sets.push_back(set_rows);
    canonical.push_back(canon_row);
  }
  for (std::size_t t = 0; t <= mdp.horizon(); ++t) {
    const auto v = bi.values.at(t);
    values.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return {{"horizon", mdp.horizon()}, {"n_states", S},          {"n_actions", mdp.n_actions()},
          {"policy", table},          {"argmax_sets", sets},     {"canonical", canonical},
          {"values", values}};
}

int run_gen(const json& flags, const std::string& out) {
  save_model(out, std::visit([](const auto& m) { return to_raw(m); }, make_env(flags)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact finite-horizon planning with backward induction and expected free energy"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--guard-sequences", g.guard_sequences, "max action sequences enumerated");
  app.add_option("--guard-tree", g.guard_tree, "max belief-tree size");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a benchmark model");
  std::string kind;
  std::string gen_out;
  std::size_t width = 3, height = 3, horizon = 3, start = 0, n_states = 3, n_actions = 2;
  std::optional<std::size_t> reward_cell, n_obs;
  double slip = 0.0, reliability = 1.0, sparsity = 0.0;
  bool identity = false, deterministic = false, reward_ties = false;
  gen->add_option("--kind", kind, "gridworld, tmaze or random")
      ->required()
      ->check(CLI::IsMember({"gridworld", "tmaze", "random"}));
  gen->add_option("--width", width);
  gen->add_option("--height", height);
  gen->add_option("--reward-cell", reward_cell);
  gen->add_option("--slip", slip);
  gen->add_option("--start", start);
  gen->add_option("--horizon", horizon);
  gen->add_option("--reliability", reliability, "T-maze cue reliability");
  gen->add_flag("--identity", identity, "T-maze with fully observed states");
  gen->add_option("--n-states", n_states);
  gen->add_option("--n-actions", n_actions);
  gen->add_option("--n-obs", n_obs, "random POMDP when set");
  gen->add_option("--sparsity", sparsity);
  gen->add_flag("--deterministic", deterministic);
  gen->add_flag("--reward-ties", reward_ties);
  gen->add_option("--out", gen_out)->required();

  // solve
  auto* solve = app.add_subcommand("solve", "backward induction");
  std::string solve_model, solve_out;
  double tie_tol = kTieTolerance;
  solve->add_option("--model", solve_model)->required();
  solve->add_option("--out", solve_out)->required();
  solve->add_option("--tie-tol", tie_tol);

  // plan
  auto* plan = app.add_subcommand("plan", "plan one step in a fully observed model");
  PlannerFlags plan_flags;
  plan_flags.add(plan);
  std::size_t plan_state = 0, plan_time = 0;
  plan->add_option("--state", plan_state)->required();
  plan->add_option("--time", plan_time);

  // plan-pomdp
  auto* plan_pomdp = app.add_subcommand("plan-pomdp", "plan one step from an observation history");
  PlannerFlags pp_flags;
  pp_flags.add(plan_pomdp);
  std::string obs_text, acts_text;
  bool record_tree = false;
  plan_pomdp->add_option("--obs", obs_text, "o_0,...,o_t")->required();
  plan_pomdp->add_option("--actions", acts_text, "a_0,...,a_{t-1}");
  plan_pomdp->add_flag("--tree", record_tree, "include the belief tree (sophisticated)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "seeded rollouts");
  std::string sim_config, sim_out, sim_summary;
  PlannerFlags sim_flags;
  std::size_t sim_episodes = 100;
  simulate->add_option("--config", sim_config, "experiment config JSON");
  simulate->add_option("--model", sim_flags.model);
  simulate->add_option("--scheme", sim_flags.scheme)
      ->check(CLI::IsMember({"standard", "sophisticated", "backward"}));
  simulate->add_option("--beta", sim_flags.beta);
  simulate->add_flag("--limit", sim_flags.limit);
  simulate->add_option("--efe", sim_flags.efe)->check(CLI::IsMember({"exact", "meanfield"}));
  simulate->add_option("--episodes", sim_episodes);
  simulate->add_option("--out", sim_out, "episodes (JSON lines)");
  simulate->add_option("--summary", sim_summary, "summary CSV");

  // learn
  auto* learn = app.add_subcommand("learn", "Dirichlet likelihood learning");
  std::string learn_model, learn_out, learn_metrics;
  LearningOptions learn_opts;
  learn->add_option("--model", learn_model)->required();
  learn->add_option("--prior-concentration", learn_opts.prior_concentration);
  learn->add_option("--episodes", learn_opts.episodes);
  learn->add_option("--out", learn_out)->required();
  learn->add_option("--metrics", learn_metrics);

  // compare
  auto* compare = app.add_subcommand("compare", "compare schemes against backward induction");
  std::string cmp_config, cmp_csv, cmp_json;
  compare->add_option("--config", cmp_config)->required();
  compare->add_option("--csv", cmp_csv);
  compare->add_option("--json", cmp_json);
  compare->add_flag("--timing", g.timing, "include planner runtime");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_threads(g.threads);

    if (*gen) {
      json spec = {{"kind", kind}, {"horizon", horizon}};
      if (kind == "gridworld") {
        spec.update({{"width", width}, {"height", height}, {"slip", slip}, {"start", start}});
        if (reward_cell) spec["reward_cell"] = *reward_cell;
      } else if (kind == "tmaze") {
        spec.update({{"reliability", reliability}, {"identity", identity}});
      } else {
        spec.update({{"seed", g.seed},
                     {"n_states", n_states},
                     {"n_actions", n_actions},
                     {"sparsity", sparsity},
                     {"deterministic", deterministic},
                     {"reward_ties", reward_ties}});
        if (n_obs) spec["n_obs"] = *n_obs;
      }
      return run_gen(spec, gen_out);
    }

    if (*solve) {
      const FiniteMdp mdp = load_mdp(solve_model);
      const auto bi = backward_induction(mdp, tie_tol);
      write_text_file(solve_out, dump(policy_json(mdp, bi)));
      return 0;
    }

    if (*plan) {
      const FiniteMdp mdp = load_mdp(plan_flags.model);
      const Preferences prefs = build_preferences(mdp.reward(), plan_flags.mode());
      json out = {{"scheme", plan_flags.scheme}, {"state", plan_state}, {"time", plan_time}, {"limit", prefs.is_limit()}};
      if (!prefs.is_limit()) out["beta"] = prefs.beta();
      if (plan_flags.scheme == "standard") {
        out.update(standard_json(standard_plan(mdp, prefs, plan_state, plan_time, plan_flags.options(g))));
      } else {
        require(plan_state < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
        const auto p = sophisticated_plan(mdp, prefs, plan_time, plan_state);
        json table = json::array();
        for (std::size_t t = plan_time; t < mdp.horizon(); ++t) {
          json rows = json::array();
          for (std::size_t s = 0; s < mdp.n_states(); ++s) {
            json scores = json::array();
            for (const auto& sc : p.table.scores(t, s)) scores.push_back(score_json(sc));
            rows.push_back({{"scores", scores}, {"argmin", p.table.argmin(t, s)}});
          }
          table.push_back({{"time", t}, {"states", rows}});
        }
        out["chosen"] = p.chosen;
        out["argmin"] = p.table.argmin(plan_time, plan_state);
        out["table"] = table;
      }
      const auto bi = backward_induction(mdp);
      out["backward_argmax"] = bi.argmax_sets[plan_time * mdp.n_states() + plan_state];
      write_text_file(plan_flags.out, dump(out));
      return 0;
    }

    if (*plan_pomdp) {
      const FinitePomdp pomdp = load_pomdp(pp_flags.model);
      const Preferences prefs = build_preferences(pomdp.mdp().reward(), pp_flags.mode());
      const auto obs = parse_indices(obs_text);
      const auto acts = parse_indices(acts_text);
      json out = {{"scheme", pp_flags.scheme}, {"observations", obs}, {"actions", acts}, {"limit", prefs.is_limit()}};
      if (!prefs.is_limit()) out["beta"] = prefs.beta();
      const PosteriorBundle post = exact_posterior(pomdp, acts, obs);
      out["belief"] = post.current().dist;
      out["log_evidence"] = post.log_evidence;
      if (pp_flags.scheme == "standard") {
        out.update(standard_json(standard_plan_pomdp(pomdp, prefs, obs, acts, pp_flags.options(g))));
      } else {
        const auto p = sophisticated_plan_pomdp(pomdp, prefs, {post.current().dist, acts.size()}, g.guard_tree,
                                                Exec::Parallel, record_tree);
        json scores = json::array();
        for (const auto& s : p.root_scores) scores.push_back(score_json(s));
        out.update({{"chosen", p.chosen}, {"argmin", p.argmin}, {"scores", scores}});
        if (record_tree) {
          json nodes = json::array();
          for (const auto& n : p.tree) {
            json node = {{"id", n.id}, {"time", n.time}, {"belief", n.belief}, {"argmin", n.argmin},
                         {"obs_probability", n.obs_probability}};
            if (n.parent) node.update({{"parent", *n.parent}, {"action", *n.via_action}, {"obs", *n.via_obs}});
            json sc = json::array();
            for (const auto& s : n.scores) sc.push_back(score_json(s));
            node["scores"] = sc;
            nodes.push_back(node);
          }
          out["tree"] = nodes;
        }
      }
      write_text_file(pp_flags.out, dump(out));
      return 0;
    }

    if (*simulate) {
      ExperimentConfig config;
      if (!sim_config.empty()) {
        config = parse_config(read_json_file(sim_config), std::filesystem::path(sim_config).parent_path().string());
      } else {
        require(!sim_flags.model.empty(), ErrorKind::OutOfRange, "give --config or --model");
        config.models.push_back({std::filesystem::path(sim_flags.model).stem().string(), load_model(sim_flags.model)});
        config.schemes = {parse_scheme(sim_flags.scheme)};
        if (config.schemes[0] != Scheme::Backward) {
          require(sim_flags.beta.has_value() != sim_flags.limit, ErrorKind::NonPositiveBeta,
                  "give exactly one of --beta or --limit");
          if (sim_flags.beta) {
            require(*sim_flags.beta > 0.0, ErrorKind::NonPositiveBeta, "beta must be positive");
            config.betas = {*sim_flags.beta};
          }
          config.limit = sim_flags.limit;
        }
        config.efe = sim_flags.efe == "exact" ? EfeMode::Exact : EfeMode::MeanField;
        config.episodes = sim_episodes;
        config.seed = g.seed;
      }
      if (app.count("--guard-sequences")) config.guards.sequences = g.guard_sequences;
      if (app.count("--guard-tree")) config.guards.tree = g.guard_tree;
      if (!sim_out.empty()) config.episodes_path = sim_out;
      if (!sim_summary.empty()) config.csv_path = sim_summary;
      const auto result = run_simulate(config);
      const std::string csv = summary_csv(result.summary);
      if (config.csv_path) write_text_file(*config.csv_path, csv);
      else std::cout << csv;
      if (config.episodes_path) {
        std::string text;
        for (const auto& l : result.episode_lines) text += l + "\n";
        write_text_file(*config.episodes_path, text);
      }
      return 0;
    }

    if (*learn) {
      const FinitePomdp truth = load_pomdp(learn_model);
      learn_opts.seed = g.seed;
      const auto result = run_learning(truth, learn_opts);
      const auto estimate = expected_likelihood(result.prior);
      json a = json::array();
      for (std::size_t o = 0; o < result.prior.a.n_obs; ++o) {
        json row = json::array();
        for (std::size_t s = 0; s < result.prior.a.n_states; ++s) row.push_back(result.prior.a(o, s));
        a.push_back(row);
      }
      const auto& last = result.metrics.back();
      write_text_file(learn_out, dump({{"episodes", learn_opts.episodes},
                                       {"prior_concentration", learn_opts.prior_concentration},
                                       {"seed", g.seed},
                                       {"dirichlet", a},
                                       {"likelihood", estimate},
                                       {"tv_median", last.tv_median},
                                       {"tv_max", last.tv_max}}));
      if (!learn_metrics.empty()) write_text_file(learn_metrics, metrics_csv(result.metrics));
      return 0;
    }

    if (*compare) {
      ExperimentConfig config =
          parse_config(read_json_file(cmp_config), std::filesystem::path(cmp_config).parent_path().string());
      if (app.count("--guard-sequences")) config.guards.sequences = g.guard_sequences;
      if (app.count("--guard-tree")) config.guards.tree = g.guard_tree;
      config.timing = config.timing || g.timing;
      if (!cmp_csv.empty()) config.csv_path = cmp_csv;
      if (!cmp_json.empty()) config.json_path = cmp_json;
      const auto report = run_compare(config);
      const std::string csv = report_csv(report);
      if (config.csv_path) write_text_file(*config.csv_path, csv);
      else std::cout << csv;
      if (config.json_path) write_text_file(*config.json_path, dump(report_json(report)));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    if (e.kind() == ErrorKind::TooLarge) return 3;
    if (e.kind() == ErrorKind::Io) return 1;
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error (json): " << e.what() << "\n";
    return 2;
  }
  return 0;
}
