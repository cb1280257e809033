#pragma once

// Empirical and population adversarial criteria, KL and JS divergences, and
// the optimal discriminator.

#include <functional>
#include <span>

#include "ganlab/densities.hpp"
#include "ganlab/numerics.hpp"
#include "ganlab/problem.hpp"

namespace ganlab {

using DiscriminatorFn = std::function<double(double)>;

/// sum_i ln D(x_i) + sum_j ln(1 - D(G_theta(z_j))), with clamped D.
/// `zs` are raw U[0,1] noise draws.
double empirical_criterion(const AdversarialProblem& p, std::span<const double> theta, std::span<const double> alpha,
                           std::span<const double> xs, std::span<const double> zs);

/// Returned by population_criterion when the discriminator is not
/// theta-admissible (an integral diverges below -1e15).
inline constexpr double kNotAdmissible = -kInf;

/// int ln(D) p* + int ln(1 - D) p_theta, D clamped to [1e-12, 1 - 1e-12].
double population_criterion(const AdversarialProblem& p, std::span<const double> theta, const DiscriminatorFn& d,
                            double rel_tol = 1e-9);
/// Same criterion for D = D_alpha, evaluated through the family's stable logs.
double population_criterion(const AdversarialProblem& p, std::span<const double> theta,
                            std::span<const double> alpha, double rel_tol = 1e-9);

/// Analytic gradient of alpha -> L(theta, alpha).
Vector population_grad_alpha(const AdversarialProblem& p, std::span<const double> theta,
                             std::span<const double> alpha, double rel_tol = 1e-10);
/// Analytic gradient of theta -> L(theta, alpha), taken as an expectation over
/// the encoded noise.
Vector population_grad_theta(const AdversarialProblem& p, std::span<const double> theta,
                             std::span<const double> alpha, double rel_tol = 1e-10);

/// x -> p*(x) / (p*(x) + p_theta(x)); 1/2 where both vanish.
DiscriminatorFn optimal_discriminator(DensityPtr pstar, DensityPtr ptheta);

/// +infinity when p charges a region where q vanishes.
double kl_divergence(const Density& p, const Density& q, double rel_tol = 1e-9);
/// Fused single-quadrature JS divergence, clamped to [0, ln 2].
double js_divergence(const Density& p, const Density& q, double rel_tol = 1e-9);

struct JsIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

/// lhs = L(theta, D*_theta), rhs = 2 JS(p* || p_theta) - ln 4.
JsIdentity js_identity_check(const AdversarialProblem& p, std::span<const double> theta);

// Per-sample derivative pieces shared by the trainer and the CLT machinery.

/// grad_alpha ln D_alpha(x), accumulated with `weight` into `out`.
void accumulate_real_grad_alpha(const DiscriminatorFamily& disc, std::span<const double> alpha, double x,
                                double weight, std::span<double> out);
/// grad_alpha ln(1 - D_alpha(g)), accumulated with `weight` into `out`.
void accumulate_fake_grad_alpha(const DiscriminatorFamily& disc, std::span<const double> alpha, double g,
                                double weight, std::span<double> out);
/// d/dg ln(1 - D_alpha(g)).
double fake_term_dx(const DiscriminatorFamily& disc, std::span<const double> alpha, double g);
/// d/dg [-ln D_alpha(g)] (the log trick generator loss).
double log_trick_dx(const DiscriminatorFamily& disc, std::span<const double> alpha, double g);

}  // namespace ganlab
