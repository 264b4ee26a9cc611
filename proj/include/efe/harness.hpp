#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "efe/kernels.hpp"
#include "efe/model.hpp"
#include "efe/model_io.hpp"
#include "efe/preferences.hpp"
#include "efe/standard.hpp"

namespace efe {

enum class Scheme { Standard, Sophisticated, Backward };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct NamedModel {
  std::string name;
  AnyModel model;
};

/// Builds a model from an inline environment description, e.g.
/// {"kind": "gridworld", "width": 3, "height": 3, "reward_cell": 8, "slip": 0.1, "horizon": 4}.
AnyModel make_env(const nlohmann::json& spec);

/// One planner configuration; beta unset means the zero-temperature limit.
struct SchemeSetting {
  Scheme scheme = Scheme::Sophisticated;
  std::optional<double> beta;

  std::string beta_label() const;
};

struct ExperimentConfig {
  std::vector<NamedModel> models;
  std::vector<Scheme> schemes;
  std::vector<double> betas;
  bool limit = false;
  EfeMode efe = EfeMode::Exact;
  std::optional<double> prune;
  std::uint64_t seed = 0;
  std::size_t episodes = 100;
  PlanGuards guards;
  bool timing = false;
  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;
  std::optional<std::string> episodes_path;

  /// Cross product of schemes and preference modes (backward ignores beta).
  std::vector<SchemeSetting> settings() const;
};

/// Accepted keys: models (paths or inline env specs), suite ({"kind": "random",
/// "first_seed", "count", plus random-model fields}), schemes, betas, limit,
/// efe, prune, seed, episodes, guards {sequences, trajectories, tree},
/// output {csv, json, episodes}. Relative paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");

/// A scheme's decision rule materialized at every (s, t): choice[t * S + s].
struct InducedPolicy {
  std::vector<std::size_t> choice;
  std::vector<std::size_t> tie_sizes;
};

InducedPolicy induced_policy(const FiniteMdp& mdp, const SchemeSetting& setting, const StandardOptions& options);

struct ComparisonRow {
  std::string model;
  std::string scheme;
  std::string beta;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t horizon = 0;
  double agreement = 0.0;      // fraction of (s, t) with the choice in the backward-induction argmax set
  double value_gap_max = 0.0;  // max over (s, t) of v* - v_scheme
  double value_gap_mean = 0.0;
  double tie_size_mean = 0.0;
  std::size_t tie_size_max = 0;
  std::optional<double> runtime_ms;
  std::vector<std::size_t> choice;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

ComparisonRow compare_scheme(const std::string& name, const FiniteMdp& mdp, const SchemeSetting& setting,
                             const StandardOptions& options);

/// Models run in parallel (planners inside run serially); rows are ordered by
/// model, then setting. Throws TooLarge when a guard trips.
ComparisonReport run_compare(const ExperimentConfig& config, Exec exec = Exec::Parallel);

std::string report_csv(const ComparisonReport& report);
nlohmann::json report_json(const ComparisonReport& report);

struct SimulationSummary {
  std::string model;
  std::string scheme;
  std::string beta;
  double mean = 0.0;
  double std = 0.0;
  std::size_t episodes = 0;
};

struct SimulationResult {
  std::vector<SimulationSummary> summary;
  std::vector<std::string> episode_lines;  // JSON lines
};

/// Seeded rollouts of every setting on every model; episode k of every
/// setting uses seed mix_seed(config.seed, k).
SimulationResult run_simulate(const ExperimentConfig& config, Exec exec = Exec::Parallel);

std::string summary_csv(const std::vector<SimulationSummary>& rows);

/// Mean and sample standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

std::string format_double(double x);

}  // namespace efe
