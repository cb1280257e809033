#pragma once

// Monte Carlo harness behind the figure data: depth sweep, consistency, CLT,
// fit snapshots, theta-star/theta-bar table and asymptotic variances. Every
// run writes CSV files whose first line is a comment carrying the config hash.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ganlab/problem.hpp"
#include "ganlab/solvers.hpp"

namespace ganlab {

enum class ExperimentKind { DepthSweep, Consistency, Clt, Fit, ThetaStar, Variance };
enum class Scale { Desk, Paper };

std::string_view to_string(ExperimentKind k);
/// depth-sweep | consistency | clt | fit | theta-star | variance. Throws ConfigError.
ExperimentKind parse_experiment_kind(std::string_view name);
Scale parse_scale(std::string_view name);

/// Optional overrides of the model's default TrainConfig.
struct TrainOverrides {
  std::optional<std::size_t> discriminator_steps, generator_steps, rounds;
  std::optional<double> lr_discriminator, lr_generator, convergence_tol;
  std::optional<Optimizer> optimizer;
  std::optional<bool> use_log_trick, random_init;
  std::optional<Vector> init_theta, init_alpha;

  void apply(TrainConfig& cfg) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Consistency;
  /// Model names: closed-form triplets, gaussian-gaussian, or mlp-g<k>-d<m>.
  std::vector<std::string> models;
  std::vector<std::size_t> gen_depths, disc_depths;  // depth sweep
  std::vector<std::size_t> sample_sizes;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 20240501;
  TrainOverrides train;
  std::size_t mc_n = 100000;    // draws for clt_variance
  std::size_t js_draws = 100000;  // generator draws behind the neural JS estimate
  bool synthetic = false;       // clt: draw theta-hat from the limit law instead of training
  std::string output_dir = "out";
  std::size_t workers = 0;  // 0: hardware concurrency; never affects output

  /// Throws ConfigError.
  void validate() const;
  static ExperimentConfig defaults(ExperimentKind kind, Scale scale = Scale::Desk);
  /// Parses a JSON object on top of defaults(kind, scale). The kind comes from
  /// `expected` or the object's "kind" (a mismatch is an error); the scale from
  /// `scale`, else the object's "scale", else desk. Unknown keys and wrong
  /// types are rejected with ConfigError.
  static ExperimentConfig from_json(std::string_view text, std::optional<ExperimentKind> expected = {},
                                    std::optional<Scale> scale = {});
  std::string to_json() const;
  /// FNV-1a of the canonical JSON without output_dir and workers.
  std::string hash() const;
};

/// Problem for a model name; mlp-g<k>-d<m> gives the logistic neural problem.
AdversarialProblem experiment_problem(std::string_view model);
/// Default training configuration for a problem (MLP or closed form).
TrainConfig default_train_config(const AdversarialProblem& p);

/// Seed of repetition `rep`: mix(base_seed, rep).
std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep);

/// One training on fresh data of size n drawn from the repetition seed.
FitResult fit_once(const AdversarialProblem& p, std::size_t n, std::uint64_t seed, const TrainOverrides& overrides);

struct RunRecord {
  std::string experiment;
  std::string model;
  std::size_t rep = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Vector theta_hat;
  Vector alpha_hat;
  double js = std::numeric_limits<double>::quiet_NaN();  // NaN when not applicable
  bool converged = false;
  bool failed = false;
  std::string failure;
  double wall_seconds = 0.0;
  // depth sweep
  std::size_t gen_depth = 0, disc_depth = 0;
};

/// Written files plus the records, for callers and tests.
struct ExperimentOutput {
  std::vector<std::filesystem::path> files;
  std::vector<RunRecord> records;
  /// JSON summary (also written to <kind>_summary.json).
  std::string summary_json;
};

ExperimentOutput run_depth_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_consistency(const ExperimentConfig& cfg);
ExperimentOutput run_clt(const ExperimentConfig& cfg);
ExperimentOutput run_fit_snapshot(const ExperimentConfig& cfg);
ExperimentOutput run_theta_star(const ExperimentConfig& cfg);
ExperimentOutput run_variance(const ExperimentConfig& cfg);
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace ganlab
