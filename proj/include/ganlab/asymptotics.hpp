#pragma once

// Second-order objects at the equilibrium (theta-bar, alpha-bar), the
// asymptotic variance of sqrt(n)(theta-hat - theta-bar) and normality
// diagnostics for replicated estimates.

#include <span>
#include <vector>

#include "ganlab/numerics.hpp"
#include "ganlab/problem.hpp"

namespace ganlab {

/// All discriminator-side blocks are expressed in the discriminator's regular
/// chart (beta); for families without one, beta is alpha itself.
struct AsymptoticReport {
  Vector theta_bar;
  Vector alpha_bar;
  Vector beta_bar;
  Matrix H1L;      // d2 L / dtheta2
  Matrix H2L;      // d2 L / dbeta2
  Matrix cross12;  // d/dbeta of grad_theta L   (p x q)
  Matrix cross21;  // d/dtheta of grad_beta L   (q x p)
  Matrix J_alpha;  // d beta(theta) / dtheta    (q x p)
  Matrix HV;       // Hessian of V(theta) = max_beta L(theta, beta)
  Vector h2l_eigenvalues;
  Vector hv_eigenvalues;
  double hv_condition = 0.0;
  double stationarity = 0.0;  // sup norm of grad_beta L at the input pair

  // Filled by clt_variance.
  Matrix V;
  Matrix V_se;  // Monte Carlo standard error of V, from the spread of per-block estimates
  std::size_t mc_samples_used = 0;
  Vector grad1_mean, grad1_se;  // per-sample grad_theta l
  Vector grad2_mean, grad2_se;  // per-sample grad_beta l
};

/// Throws StationarityViolated when |grad_beta L|_inf > 1e-6 at the input,
/// Singular when H2L cannot be inverted.
AsymptoticReport build_asymptotics(const AdversarialProblem& p, std::span<const double> theta_bar,
                                   std::span<const double> alpha_bar);

/// Hessian of theta -> max_alpha L(theta, alpha) by central differences of
/// the inner maximum (scalar theta).
Matrix direct_hv(const AdversarialProblem& p, std::span<const double> theta_bar, std::span<const double> alpha_bar);

/// Mean and covariance accumulator with the pairwise merge update.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t dim = 0);

  void add(std::span<const double> v);
  void merge(const CovarianceAccumulator& other);

  std::size_t count() const { return n_; }
  const Vector& mean() const { return mean_; }
  /// Unbiased sample covariance.
  Matrix covariance() const;

 private:
  std::size_t n_ = 0;
  Vector mean_;
  Matrix m2_;
};

/// Covariance of the influence vector
///   -HV^-1 grad_theta l + HV^-1 cross12 H2L^-1 grad_beta l
/// over mc_n fresh (X, Z) pairs. Samples come in fixed blocks of 10^4 drawn
/// from substreams of one seed taken from `rng`, so the result does not depend
/// on `workers`. Fills report.V and the mean diagnostics. Throws MeanNotZero
/// when a mean per-sample gradient is more than 4 standard errors from zero,
/// InvalidParams when mc_n < 10^4.
Matrix clt_variance(const AdversarialProblem& p, AsymptoticReport& report, std::size_t mc_n, SeededRng& rng,
                    std::size_t workers = 1);

struct NormalityReport {
  Vector standardized;  // s_i = sqrt(n)(theta_i - theta_bar)/sqrt(V)
  KsResult ks;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// 30 bins of width 8/30 covering [-4, 4].
  std::vector<std::size_t> histogram;
  Vector bin_edges;
  bool degenerate = false;  // every s_i identical; KS and moments left at defaults
};

/// Throws EmptySample for no estimates, InvalidParams for fewer than 100
/// replications or a nonpositive V.
NormalityReport normality_check(std::span<const double> theta_hats, double theta_bar, std::size_t n, double V);

}  // namespace ganlab
