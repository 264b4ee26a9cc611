#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../helpers.hpp"
#include "efe/dp.hpp"
#include "efe/harness.hpp"
#include "efe/pomdp.hpp"

using namespace efe;
using nlohmann::json;
using testing::error_kind;

namespace {

json suite_config(std::size_t count, std::size_t horizon, std::vector<std::string> schemes, std::uint64_t first = 0) {
  return {{"suite", {{"kind", "random"}, {"first_seed", first}, {"count", count}, {"n_states", 4}, {"n_actions", 3},
                     {"horizon", horizon}}},
          {"schemes", schemes}};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Expected return of the sophisticated POMDP planner, by exact expansion.
double planner_value(const FinitePomdp& pomdp, const Preferences& prefs, const BeliefState& b) {
  if (b.time == pomdp.horizon()) return 0.0;
  const std::size_t a = sophisticated_plan_pomdp(pomdp, prefs, b).chosen;
  const auto predicted = predict_belief(pomdp.mdp(), b.dist, a);
  const auto p_obs = observation_predictive(pomdp, predicted);
  double v = 0.0;
  for (std::size_t s = 0; s < pomdp.n_states(); ++s) v += predicted[s] * pomdp.mdp().reward(s);
  for (std::size_t o = 0; o < pomdp.n_obs(); ++o)
    if (p_obs[o] > 0.0) v += p_obs[o] * planner_value(pomdp, prefs, belief_update(pomdp, b, a, o));
  return v;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
  const json j = {{"models", json::array({json{{"kind", "gridworld"}, {"width", 2}, {"height", 2}, {"horizon", 3}},
                                          json{{"kind", "tmaze"}, {"reliability", 0.9}, {"name", "maze"}}})},
                  {"schemes", {"standard", "backward"}},
                  {"betas", {1.0, 10.0}},
                  {"limit", true},
                  {"efe", "meanfield"},
                  {"prune", 2.5},
                  {"seed", 7},
                  {"episodes", 12},
                  {"guards", {{"sequences", 100}}},
                  {"output", {{"csv", "out/a.csv"}}}};
  const ExperimentConfig c = parse_config(j, "/tmp/base");
  REQUIRE(c.models.size() == 2);
  CHECK(c.models[0].name == "gridworld-0");
  CHECK(c.models[1].name == "maze");
  CHECK(std::holds_alternative<FinitePomdp>(c.models[1].model));
  CHECK(std::get<FiniteMdp>(c.models[0].model).reward(3) == 1.0);
  CHECK(c.efe == EfeMode::MeanField);
  CHECK(c.prune == 2.5);
  CHECK(c.seed == 7);
  CHECK(c.episodes == 12);
  CHECK(c.guards.sequences == 100);
  CHECK(c.guards.tree == 1e7);
  CHECK(*c.csv_path == "/tmp/base/out/a.csv");
  const auto settings = c.settings();
  REQUIRE(settings.size() == 4);
  CHECK(settings[0].beta == 1.0);
  CHECK(settings[2].beta_label() == "limit");
  CHECK(settings[3].scheme == Scheme::Backward);
  CHECK(settings[3].beta_label() == "-");
  CHECK(settings[1].beta_label() == "10");

  const ExperimentConfig d = parse_config(suite_config(3, 2, {"sophisticated"}, 5));
  CHECK(d.limit);
  CHECK(d.models.size() == 3);
  CHECK(d.models[2].name == "random-7");
  CHECK(std::get<FiniteMdp>(d.models[0].model) == gen_random_mdp([] {
          RandomSpec s;
          s.seed = 5;
          s.n_states = 4;
          s.n_actions = 3;
          s.horizon = 2;
          return s;
        }()));
}

TEST_CASE("config errors") {
  json j = suite_config(1, 2, {});
  CHECK(error_kind([&] { parse_config(j); }) == ErrorKind::OutOfRange);
  j = suite_config(1, 2, {"greedy"});
  CHECK(error_kind([&] { parse_config(j); }) == ErrorKind::OutOfRange);
  j = suite_config(1, 2, {"standard"});
  j["betas"] = {-1.0};
  CHECK(error_kind([&] { parse_config(j); }) == ErrorKind::NonPositiveBeta);
  j = suite_config(1, 2, {"standard"});
  j["guards"] = {{"tree", 0}};
  CHECK(error_kind([&] { parse_config(j); }) == ErrorKind::OutOfRange);
  j = suite_config(1, 2, {"standard"});
  j["efe"] = "approximate";
  CHECK(error_kind([&] { parse_config(j); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([] { parse_config(json{{"schemes", {"standard"}}}); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([] { parse_config(json{{"models", {"/no/such/model.json"}}, {"schemes", {"standard"}}}); }) ==
        ErrorKind::Io);
  CHECK(error_kind([] { make_env(json{{"kind", "maze"}}); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([] { make_env(json{{"kind", "random"}}); }) == ErrorKind::OutOfRange);
}

TEST_CASE("sophisticated limit over a random suite is Bellman optimal") {
  const ComparisonReport r = run_compare(parse_config(suite_config(30, 4, {"sophisticated"})));
  REQUIRE(r.rows.size() == 30);
  for (const auto& row : r.rows) {
    CHECK(row.agreement == 1.0);
    CHECK(row.value_gap_max <= 1e-9);
    CHECK(row.beta == "limit");
    CHECK_FALSE(row.runtime_ms.has_value());
  }
}

TEST_CASE("standard limit is optimal at T = 1 and not beyond") {
  const ComparisonReport one = run_compare(parse_config(suite_config(30, 1, {"standard"})));
  for (const auto& row : one.rows) CHECK(row.agreement == 1.0);

  json longer = suite_config(300, 2, {"standard"});
  longer["suite"]["n_states"] = 3;
  longer["suite"]["n_actions"] = 2;
  const ComparisonReport two = run_compare(parse_config(longer));
  bool witness = false;
  for (const auto& row : two.rows) {
    CHECK(row.agreement >= 0.0);
    CHECK(row.agreement <= 1.0);
    CHECK(row.value_gap_max >= -1e-9);
    witness = witness || (row.agreement < 1.0 && row.value_gap_max > 0.0);
  }
  CHECK(witness);
}

TEST_CASE("reports are reproducible and CSV rows follow from the JSON") {
  json j = suite_config(8, 3, {"standard", "sophisticated", "backward"});
  j["betas"] = {0.5, 4.0};
  j["limit"] = true;
  const ExperimentConfig c = parse_config(j);
  const ComparisonReport a = run_compare(c);
  const ComparisonReport b = run_compare(c, Exec::Serial);
  CHECK(report_csv(a) == report_csv(b));
  CHECK(dump(report_json(a)) == dump(report_json(run_compare(c))));
  CHECK(a.rows.size() == 8 * 7);

  const std::string csv = report_csv(a);
  const json doc = report_json(a);
  CHECK(doc["version"] == 1);
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "# efe-planner comparison v1");
  std::getline(ss, line);
  const auto header = split(line, ',');
  std::size_t i = 0;
  while (std::getline(ss, line)) {
    const auto cells = split(line, ',');
    REQUIRE(cells.size() == header.size());
    const json& row = doc["rows"][i++];
    for (std::size_t k = 0; k < header.size(); ++k) {
      const json& v = row.contains(header[k]) ? row[header[k]] : json();
      std::string expected;
      if (v.is_string()) expected = v.get<std::string>();
      else if (v.is_number_float()) expected = format_double(v.get<double>());
      else if (v.is_number()) expected = std::to_string(v.get<std::size_t>());
      CHECK(cells[k] == expected);
    }
  }
  CHECK(i == a.rows.size());

  ExperimentConfig timed = c;
  timed.timing = true;
  for (const auto& row : run_compare(timed).rows) CHECK(row.runtime_ms.has_value());
}

TEST_CASE("induced policies") {
  const FiniteMdp mdp = gen_random_mdp(testing::spec(3, 4, 3, 3));
  StandardOptions o;
  const BackwardInductionResult bi = backward_induction(mdp);
  const InducedPolicy back = induced_policy(mdp, {Scheme::Backward, std::nullopt}, o);
  CHECK(back.choice == bi.canonical);
  const InducedPolicy soph = induced_policy(mdp, {Scheme::Sophisticated, std::nullopt}, o);
  CHECK(soph.choice == bi.canonical);
  const InducedPolicy stand = induced_policy(mdp, {Scheme::Standard, 2.0}, o);
  const Preferences p = build_preferences(mdp.reward(), Beta{2.0});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t s = 0; s < 4; ++s) CHECK(stand.choice[t * 4 + s] == standard_plan(mdp, p, s, t).chosen);
}

TEST_CASE("deterministic gridworld simulation returns v* exactly") {
  json j = {{"models", json::array({json{{"kind", "gridworld"}, {"width", 3}, {"height", 3}, {"horizon", 6}}})},
            {"schemes", {"sophisticated"}},
            {"episodes", 20}};
  const ExperimentConfig c = parse_config(j);
  const SimulationResult r = run_simulate(c);
  const FiniteMdp& grid = std::get<FiniteMdp>(c.models[0].model);
  REQUIRE(r.summary.size() == 1);
  CHECK(r.summary[0].mean == backward_induction(grid).values(0, 0));
  CHECK(r.summary[0].mean == 3.0);
  CHECK(r.summary[0].std == 0.0);
  CHECK(r.episode_lines.size() == 20);
  const json first = json::parse(r.episode_lines[0]);
  CHECK(first["scheme"] == "sophisticated");
  CHECK(first["episode"] == 0);
}

TEST_CASE("stochastic gridworld simulation matches v*") {
  json j = {{"models", json::array({json{{"kind", "gridworld"}, {"width", 3}, {"height", 3}, {"slip", 0.2}, {"horizon", 6}}})},
            {"schemes", {"sophisticated", "backward"}},
            {"episodes", 10000},
            {"seed", 3}};
  const ExperimentConfig c = parse_config(j);
  const SimulationResult r = run_simulate(c);
  const double v = backward_induction(std::get<FiniteMdp>(c.models[0].model)).values(0, 0);
  for (const auto& row : r.summary) CHECK(std::abs(row.mean - v) <= 3 * row.std / std::sqrt(10000.0));
  CHECK(summary_csv(r.summary) == summary_csv(run_simulate(c, Exec::Serial).summary));
}

TEST_CASE("T-maze reliability sweep") {
  double previous = -1.0;
  for (double rel : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    json j = {{"models", json::array({json{{"kind", "tmaze"}, {"reliability", rel}}})},
              {"schemes", {"sophisticated"}},
              {"episodes", 2000},
              {"seed", 11}};
    const ExperimentConfig c = parse_config(j);
    const SimulationResult r = run_simulate(c);
    const FinitePomdp& maze = std::get<FinitePomdp>(c.models[0].model);
    const Preferences p = build_preferences(maze.mdp().reward(), ZeroTemperature{});
    const std::vector<std::size_t> o{kSeeStart};
    const double exact = planner_value(maze, p, exact_posterior(maze, {}, o).current());
    CHECK(exact >= previous);
    previous = exact;
    const double sd = std::sqrt(exact * (1 - exact) / 2000.0);
    CHECK(std::abs(r.summary[0].mean - exact) <= 3 * sd + 1e-12);
  }
  CHECK(previous == doctest::Approx(1.0));
}

TEST_CASE("backward scheme needs a fully observed model") {
  json j = {{"models", json::array({json{{"kind", "tmaze"}, {"reliability", 0.9}}})},
            {"schemes", {"backward"}},
            {"episodes", 2}};
  CHECK(error_kind([&] { run_simulate(parse_config(j)); }) == ErrorKind::OutOfRange);
}

TEST_CASE("summary helpers") {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(s == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std({2.0}).second == 0.0);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  const std::string csv = summary_csv({{"m", "standard", "limit", 1.5, 0.5, 10}});
  CHECK(csv == "# efe-planner simulation summary v1\nmodel,scheme,beta,mean,std,episodes\nm,standard,limit,1.5,0.5,10\n");
}

}  // TEST_SUITE
