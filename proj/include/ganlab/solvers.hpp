#pragma once

// Empirical alternated-gradient GAN training and the population solvers for
// alpha(theta), theta-bar and theta-star.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ganlab/criterion.hpp"
#include "ganlab/numerics.hpp"
#include "ganlab/problem.hpp"

namespace ganlab {

enum class Optimizer { Gradient, Adam };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainConfig {
  std::size_t discriminator_steps = 10;
  std::size_t generator_steps = 1;
  std::size_t rounds = 300;
  double lr_discriminator = 0.5;
  double lr_generator = 0.2;
  /// Unset: the family default, or a random point of the box when random_init.
  std::optional<Vector> init_theta;
  std::optional<Vector> init_alpha;
  bool random_init = false;
  std::uint64_t seed = 0;
  bool use_log_trick = true;
  Optimizer optimizer = Optimizer::Gradient;
  /// Converged when no coordinate (in optimizer coordinates) moved more than
  /// this over the last 10% of rounds.
  double convergence_tol = 1e-4;

  /// Throws InvalidParams.
  void validate() const;

  static TrainConfig table1_defaults();
  static TrainConfig mlp_defaults();
};

struct TraceRecord {
  std::size_t round = 0;
  double criterion = 0.0;  // empirical criterion (sum form) after the round
  Vector theta;
  Vector alpha;
};

struct FitResult {
  Vector theta_hat;
  Vector alpha_hat;
  Vector theta_init;
  Vector alpha_init;
  std::vector<TraceRecord> trace;
  TrainConfig config;
  std::uint64_t seed = 0;
  bool converged = false;
};

/// Alternated gradient scheme on a fixed sample: per round, discriminator
/// ascent steps on the mean-normalized criterion, then generator descent
/// steps (on -mean ln D(G) with the log trick). `zs` are raw U[0,1] draws.
/// Positive boxes are stepped in log coordinates; every step is projected.
/// Throws DivergenceDetected.
FitResult train_gan(const AdversarialProblem& p, std::span<const double> xs, std::span<const double> zs,
                    const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Population solvers (closed-form pushforwards only)
// ---------------------------------------------------------------------------

/// The problem with its discriminators replaced by their regular chart (or a
/// copy when the native chart is already regular).
AdversarialProblem regular_problem(const AdversarialProblem& p);

struct InnerMaxOptions {
  std::size_t starts = 8;
  double grad_tol = 1e-8;
  std::size_t max_iterations = 500;
  /// When set, only this start is used (falls back to multi-start on failure).
  std::optional<Vector> warm_start;
  std::uint64_t seed = 0x5eed;
  double rel_tol = 1e-11;
};

struct InnerMaxResult {
  Vector alpha;
  double value = 0.0;
  double grad_norm = kInf;  // sup norm of the native gradient (projected at active bounds)
  std::size_t iterations = 0;
  /// Criterion after each accepted ascent step of the winning start.
  std::vector<double> path;
};

InnerMaxResult inner_max_alpha_detailed(const AdversarialProblem& p, std::span<const double> theta,
                                        const InnerMaxOptions& opts = {});
/// argmax_alpha L(theta, alpha). Throws NonConvergence when no start meets
/// the gradient tolerance.
Vector inner_max_alpha(const AdversarialProblem& p, std::span<const double> theta, const InnerMaxOptions& opts = {});

struct ThetaBarResult {
  Vector theta_bar;
  Vector alpha_bar;
  double value = 0.0;           // V(theta_bar) = L(theta_bar, alpha_bar)
  double alpha_grad_norm = 0.0;  // sup norm of grad_alpha L at the solution
  double envelope_grad = 0.0;    // grad_theta L(theta, alpha(theta)) at the solution
};

/// Minimizes V(theta) = max_alpha L(theta, alpha): 33-point log grid, golden
/// section, then a root polish of the envelope gradient. Scalar theta only.
ThetaBarResult solve_theta_bar(const AdversarialProblem& p);

/// Minimizes theta -> JS(p* || p_theta) with the same grid and golden scheme.
Vector solve_theta_star(const AdversarialProblem& p);

/// V(theta) with a warm-startable inner solve.
double outer_value(const AdversarialProblem& p, std::span<const double> theta,
                   const std::optional<Vector>& warm = std::nullopt, double rel_tol = 1e-11);

}  // namespace ganlab
