#include "ganlab/criterion.hpp"

#include <algorithm>
#include <cmath>

#include "ganlab/error.hpp"

namespace ganlab {

namespace {

std::vector<double> merged_breakpoints(const Density& a, const Density& b) {
  auto bps = a.breakpoints();
  auto more = b.breakpoints();
  bps.insert(bps.end(), more.begin(), more.end());
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  return bps;
}

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

double quad(const ScalarFn& f, Interval domain, double rel_tol, const std::vector<double>& bps) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.breakpoints = bps;
  return integrate_detailed(f, domain, opts).value;
}

DensityPtr pushforward_or_throw(const AdversarialProblem& p, std::span<const double> theta) {
  if (theta.size() != p.generators->dim()) throw Error(ErrorCode::ShapeMismatch, "theta size");
  DensityPtr pt = p.generators->pushforward(theta);
  if (!pt) throw Error(ErrorCode::InvalidParams, p.generators->name() + " has no closed-form pushforward");
  return pt;
}

double clamp_d(double d) { return std::clamp(d, kDiscriminatorClamp, 1.0 - kDiscriminatorClamp); }

double finish(double value) { return value < -1e15 ? kNotAdmissible : value; }

}  // namespace

double empirical_criterion(const AdversarialProblem& p, std::span<const double> theta, std::span<const double> alpha,
                           std::span<const double> xs, std::span<const double> zs) {
  if (xs.empty() || zs.empty()) throw Error(ErrorCode::EmptySample, "empirical criterion needs data and noise");
  const auto& disc = *p.discriminators;
  const auto& gen = *p.generators;
  double real = 0.0, fake = 0.0;
  for (double x : xs) real += disc.log_d(alpha, x);
  for (double z : zs) fake += disc.log_1m_d(alpha, gen.apply(theta, z));
  return real + fake;
}

double population_criterion(const AdversarialProblem& p, std::span<const double> theta, const DiscriminatorFn& d,
                            double rel_tol) {
  const DensityPtr pt = pushforward_or_throw(p, theta);
  const Density& ps = *p.target;
  const auto real = quad([&](double x) {
                           const double w = ps.pdf(x);
                           return w > 0.0 ? w * std::log(clamp_d(d(x))) : 0.0;
                         },
                         ps.support(), rel_tol, ps.breakpoints());
  const auto fake = quad([&](double x) {
                           const double w = pt->pdf(x);
                           return w > 0.0 ? w * std::log1p(-clamp_d(d(x))) : 0.0;
                         },
                         pt->support(), rel_tol, pt->breakpoints());
  return finish(real + fake);
}

double population_criterion(const AdversarialProblem& p, std::span<const double> theta,
                            std::span<const double> alpha, double rel_tol) {
  const DensityPtr pt = pushforward_or_throw(p, theta);
  const Density& ps = *p.target;
  const auto& disc = *p.discriminators;
  const auto real = quad([&](double x) {
                           const double w = ps.pdf(x);
                           return w > 0.0 ? w * disc.log_d(alpha, x) : 0.0;
                         },
                         ps.support(), rel_tol, ps.breakpoints());
  const auto fake = quad([&](double x) {
                           const double w = pt->pdf(x);
                           return w > 0.0 ? w * disc.log_1m_d(alpha, x) : 0.0;
                         },
                         pt->support(), rel_tol, pt->breakpoints());
  return finish(real + fake);
}

Vector population_grad_alpha(const AdversarialProblem& p, std::span<const double> theta,
                             std::span<const double> alpha, double rel_tol) {
  const DensityPtr pt = pushforward_or_throw(p, theta);
  const Density& ps = *p.target;
  const auto& disc = *p.discriminators;
  const std::size_t q = disc.dim();
  Vector grad(q, 0.0);
  Vector buf(q);
  for (std::size_t k = 0; k < q; ++k) {
    const double real = quad(
        [&](double x) {
          const double w = ps.pdf(x);
          if (w <= 0.0) return 0.0;
          std::fill(buf.begin(), buf.end(), 0.0);
          accumulate_real_grad_alpha(disc, alpha, x, w, buf);
          return buf[k];
        },
        ps.support(), rel_tol, ps.breakpoints());
    const double fake = quad(
        [&](double x) {
          const double w = pt->pdf(x);
          if (w <= 0.0) return 0.0;
          std::fill(buf.begin(), buf.end(), 0.0);
          accumulate_fake_grad_alpha(disc, alpha, x, w, buf);
          return buf[k];
        },
        pt->support(), rel_tol, pt->breakpoints());
    grad[k] = real + fake;
  }
  return grad;
}

Vector population_grad_theta(const AdversarialProblem& p, std::span<const double> theta,
                             std::span<const double> alpha, double rel_tol) {
  const auto& gen = *p.generators;
  const auto& disc = *p.discriminators;
  if (theta.size() != gen.dim()) throw Error(ErrorCode::ShapeMismatch, "theta size");
  const DensityPtr noise = gen.encoded_noise_density();
  const std::size_t dim = gen.dim();
  Vector grad(dim, 0.0);
  Vector buf(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    grad[k] = quad(
        [&](double e) {
          const double w = noise->pdf(e);
          if (w <= 0.0) return 0.0;
          const double g = gen.apply_encoded(theta, e);
          const double upstream = fake_term_dx(disc, alpha, g);
          if (upstream == 0.0) return 0.0;
          gen.grad_encoded(theta, e, buf);
          return w * upstream * buf[k];
        },
        noise->support(), rel_tol, noise->breakpoints());
  }
  return grad;
}

DiscriminatorFn optimal_discriminator(DensityPtr pstar, DensityPtr ptheta) {
  return [pstar = std::move(pstar), ptheta = std::move(ptheta)](double x) {
    const double a = pstar->pdf(x);
    const double b = ptheta->pdf(x);
    if (a + b <= 0.0) return 0.5;
    return a / (a + b);
  };
}

double kl_divergence(const Density& p, const Density& q, double rel_tol) {
  bool infinite = false;
  const auto bps = merged_breakpoints(p, q);
  const double value = quad(
      [&](double x) {
        const double px = p.pdf(x);
        if (px <= 0.0) return 0.0;
        const double lq = q.log_pdf(x);
        if (!std::isfinite(lq)) {
          infinite = true;
          return 0.0;
        }
        return px * (p.log_pdf(x) - lq);
      },
      p.support(), rel_tol, bps);
  if (infinite) return kInf;
  if (value < 0.0) {
    if (value >= -1e-9) return 0.0;
    throw Error(ErrorCode::NonConvergence, "KL quadrature returned a negative value");
  }
  return value;
}

double js_divergence(const Density& p, const Density& q, double rel_tol) {
  const auto bps = merged_breakpoints(p, q);
  // a ln(2a/(a+b)) with 0 ln 0 = 0.
  auto term = [](double a, double b) {
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return a * kLn2;
    const double r = b / a;
    return a * (kLn2 - (r < 1e300 ? std::log1p(r) : std::log(b) - std::log(a)));
  };
  const double value = quad(
      [&](double x) {
        const double a = p.pdf(x);
        const double b = q.pdf(x);
        return term(a, b) + term(b, a);
      },
      hull(p.support(), q.support()), rel_tol, bps);
  return std::clamp(0.5 * value, 0.0, kLn2);
}

JsIdentity js_identity_check(const AdversarialProblem& p, std::span<const double> theta) {
  const DensityPtr pt = pushforward_or_throw(p, theta);
  JsIdentity r;
  r.lhs = population_criterion(p, theta, optimal_discriminator(p.target, pt), 1e-11);
  r.rhs = 2.0 * js_divergence(*p.target, *pt, 1e-11) - kLn4;
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

// ---------------------------------------------------------------------------
// Per-sample pieces
// ---------------------------------------------------------------------------

void accumulate_real_grad_alpha(const DiscriminatorFamily& disc, std::span<const double> alpha, double x,
                                double weight, std::span<double> out) {
  thread_local Vector g;
  g.assign(disc.dim(), 0.0);
  const double s = disc.logit_grad(alpha, x, g);
  if (std::abs(s) >= discriminator_logit_bound()) return;
  const double coef = weight * sigmoid(-s);  // 1 - D
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += coef * g[i];
}

void accumulate_fake_grad_alpha(const DiscriminatorFamily& disc, std::span<const double> alpha, double g_value,
                                double weight, std::span<double> out) {
  thread_local Vector g;
  g.assign(disc.dim(), 0.0);
  const double s = disc.logit_grad(alpha, g_value, g);
  if (std::abs(s) >= discriminator_logit_bound()) return;
  const double coef = -weight * sigmoid(s);  // -D
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += coef * g[i];
}

double fake_term_dx(const DiscriminatorFamily& disc, std::span<const double> alpha, double g) {
  const double s = disc.logit(alpha, g);
  if (std::abs(s) >= discriminator_logit_bound()) return 0.0;
  return -sigmoid(s) * disc.logit_dx(alpha, g);
}

double log_trick_dx(const DiscriminatorFamily& disc, std::span<const double> alpha, double g) {
  const double s = disc.logit(alpha, g);
  if (std::abs(s) >= discriminator_logit_bound()) return 0.0;
  return -sigmoid(-s) * disc.logit_dx(alpha, g);
}

}  // namespace ganlab
