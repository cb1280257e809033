#include "ganlab/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "ganlab/error.hpp"

namespace ganlab {

std::string_view to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "gradient"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "gradient") return Optimizer::Gradient;
  if (name == "adam") return Optimizer::Adam;
  throw Error(ErrorCode::InvalidParams, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (discriminator_steps < 1 || generator_steps < 1)
    throw Error(ErrorCode::InvalidParams, "step counts per round must be >= 1");
  if (!(lr_discriminator > 0.0) || !(lr_generator > 0.0))
    throw Error(ErrorCode::InvalidParams, "learning rates must be > 0");
  if (!(convergence_tol > 0.0)) throw Error(ErrorCode::InvalidParams, "convergence_tol must be > 0");
}

TrainConfig TrainConfig::table1_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::mlp_defaults() {
  TrainConfig c;
  c.optimizer = Optimizer::Adam;
  c.lr_discriminator = 0.01;
  c.lr_generator = 0.005;
  return c;
}

namespace {

// ---------------------------------------------------------------------------
// Optimizer coordinates: log for positive boxes, identity otherwise.
// ---------------------------------------------------------------------------

struct Coords {
  Box box;
  bool log = false;

  explicit Coords(Box b) : box(std::move(b)), log(log_space_box(box)) {}

  Vector to_u(std::span<const double> p) const {
    Vector u(p.begin(), p.end());
    if (log)
      for (double& v : u) v = std::log(v);
    return u;
  }
  Vector from_u(std::span<const double> u) const {
    Vector p(u.begin(), u.end());
    if (log)
      for (double& v : p) v = std::exp(v);
    project_to_box(p, box);
    return p;
  }
  // Chain rule from native to optimizer coordinates, in place.
  void grad_to_u(std::span<const double> p, std::span<double> g) const {
    if (log)
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= p[i];
  }
};

Vector random_in_box(const Box& box, SeededRng& rng) {
  Vector v(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Interval& iv = box[i];
    if (iv.lo > 0.0 && iv.finite()) {
      v[i] = std::exp(rng.uniform(std::log(iv.lo), std::log(iv.hi)));
    } else if (iv.finite()) {
      v[i] = rng.uniform(iv.lo, iv.hi);
    } else {
      v[i] = std::clamp(rng.normal(), iv.lo, iv.hi);
    }
  }
  return v;
}

class Stepper {
 public:
  Stepper(Optimizer kind, double lr, std::size_t dim) : kind_(kind), lr_(lr), m_(dim, 0.0), v_(dim, 0.0) {}

  // Step for the given gradient (sign applied by the caller).
  Vector delta(std::span<const double> g) {
    Vector d(g.size());
    if (kind_ == Optimizer::Gradient) {
      for (std::size_t i = 0; i < g.size(); ++i) d[i] = lr_ * g[i];
      return d;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < g.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * g[i] * g[i];
      d[i] = lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
    return d;
  }

 private:
  Optimizer kind_;
  double lr_;
  Vector m_, v_;
  std::size_t t_ = 0;
};

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector initial_params(const std::optional<Vector>& given, bool random, const Box& box, std::size_t dim,
                      SeededRng& rng, const std::function<Vector(SeededRng&)>& family_default,
                      const char* what) {
  Vector v;
  if (given) {
    v = *given;
    if (v.size() != dim) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " init has wrong size");
  } else if (random) {
    v = random_in_box(box, rng);
  } else {
    v = family_default(rng);
  }
  project_to_box(v, box);
  return v;
}

}  // namespace

FitResult train_gan(const AdversarialProblem& p, std::span<const double> xs, std::span<const double> zs,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (xs.empty() || zs.empty()) throw Error(ErrorCode::EmptySample, "training needs data and noise");
  const auto& gen = *p.generators;
  const auto& disc = *p.discriminators;
  SeededRng rng(cfg.seed);

  FitResult out;
  out.config = cfg;
  out.seed = cfg.seed;
  Vector theta = initial_params(cfg.init_theta, cfg.random_init, p.theta_box, gen.dim(), rng,
                                [&](SeededRng& r) { return gen.default_init(r); }, "theta");
  Vector alpha = initial_params(cfg.init_alpha, cfg.random_init, p.alpha_box, disc.dim(), rng,
                                [&](SeededRng& r) { return disc.default_init(r); }, "alpha");

  out.theta_init = theta;
  out.alpha_init = alpha;
  out.theta_hat = theta;
  out.alpha_hat = alpha;

  const Coords tc(p.theta_box), ac(p.alpha_box);
  Stepper dstep(cfg.optimizer, cfg.lr_discriminator, alpha.size());
  Stepper gstep(cfg.optimizer, cfg.lr_generator, theta.size());

  Vector encoded(zs.size());
  for (std::size_t j = 0; j < zs.size(); ++j) encoded[j] = gen.encode_noise(zs[j]);
  Vector fake(zs.size()), upstream(zs.size());
  auto regenerate = [&] {
    for (std::size_t j = 0; j < encoded.size(); ++j) fake[j] = gen.apply_encoded(theta, encoded[j]);
  };

  const double wx = 1.0 / static_cast<double>(xs.size());
  const double wz = 1.0 / static_cast<double>(zs.size());
  Vector ga(alpha.size()), gt(theta.size());
  out.trace.reserve(cfg.rounds);

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    regenerate();
    for (std::size_t k = 0; k < cfg.discriminator_steps; ++k) {
      std::fill(ga.begin(), ga.end(), 0.0);
      disc.accumulate_log_grad(alpha, xs, wx, true, ga);
      disc.accumulate_log_grad(alpha, fake, wz, false, ga);
      ac.grad_to_u(alpha, ga);
      Vector u = ac.to_u(alpha);
      const Vector d = dstep.delta(ga);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += d[i];
      alpha = ac.from_u(u);
    }
    for (std::size_t k = 0; k < cfg.generator_steps; ++k) {
      std::fill(gt.begin(), gt.end(), 0.0);
      disc.log_term_dx(alpha, fake, cfg.use_log_trick, upstream);
      for (std::size_t j = 0; j < fake.size(); ++j)
        if (upstream[j] != 0.0) gen.accumulate_grad_encoded(theta, encoded[j], wz * upstream[j], gt);
      tc.grad_to_u(theta, gt);
      Vector u = tc.to_u(theta);
      const Vector d = gstep.delta(gt);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] -= d[i];
      theta = tc.from_u(u);
      regenerate();
    }

    const double crit = disc.sum_log_terms(alpha, xs, true) + disc.sum_log_terms(alpha, fake, false);
    if (!std::isfinite(crit) || std::abs(crit) > 1e12 || !all_finite(theta) || !all_finite(alpha)) {
      throw Error(ErrorCode::DivergenceDetected, "training diverged at round " + std::to_string(round));
    }
    out.trace.push_back({round, crit, theta, alpha});
  }

  out.theta_hat = theta;
  out.alpha_hat = alpha;
  if (cfg.rounds > 0) {
    const std::size_t window = std::max<std::size_t>(1, cfg.rounds / 10);
    const std::size_t ref = cfg.rounds > window ? cfg.rounds - 1 - window : 0;
    const Vector t0 = tc.to_u(out.trace[ref].theta), t1 = tc.to_u(theta);
    const Vector a0 = ac.to_u(out.trace[ref].alpha), a1 = ac.to_u(alpha);
    double move = 0.0;
    for (std::size_t i = 0; i < t0.size(); ++i) move = std::max(move, std::abs(t1[i] - t0[i]));
    for (std::size_t i = 0; i < a0.size(); ++i) move = std::max(move, std::abs(a1[i] - a0[i]));
    out.converged = move <= cfg.convergence_tol;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Population inner maximization
// ---------------------------------------------------------------------------

AdversarialProblem regular_problem(const AdversarialProblem& p) {
  AdversarialProblem pc = p;
  if (auto chart = p.discriminators->regular_chart()) {
    pc.discriminators = chart;
    pc.alpha_box = chart->param_box();
  }
  return pc;
}

namespace {

double projected_norm(std::span<const double> alpha, std::span<const double> g, const Box& box) {
  double n = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (alpha[i] <= box[i].lo && g[i] < 0.0) continue;
    if (alpha[i] >= box[i].hi && g[i] > 0.0) continue;
    n = std::max(n, std::abs(g[i]));
  }
  return n;
}

std::vector<Vector> start_points(const Box& box, const InnerMaxOptions& opts) {
  std::vector<Vector> starts;
  const std::size_t q = box.size();
  auto center = [&] {
    Vector c(q);
    for (std::size_t i = 0; i < q; ++i) {
      const Interval& iv = box[i];
      if (iv.lo > 0.0 && iv.finite()) c[i] = std::sqrt(iv.lo * iv.hi);
      else if (iv.finite()) c[i] = 0.5 * (iv.lo + iv.hi);
      else c[i] = std::clamp(0.0, iv.lo, iv.hi);
    }
    return c;
  };
  const bool finite = std::all_of(box.begin(), box.end(), [](const Interval& iv) { return iv.finite(); });
  if (finite && q <= 3) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << q) && starts.size() + 1 < opts.starts; ++mask) {
      Vector c(q);
      for (std::size_t i = 0; i < q; ++i) c[i] = (mask >> i) & 1 ? box[i].hi : box[i].lo;
      starts.push_back(c);
    }
  }
  if (starts.size() < opts.starts) starts.push_back(center());
  SeededRng rng(opts.seed);
  while (starts.size() < opts.starts) starts.push_back(random_in_box(box, rng));
  return starts;
}

struct Attempt {
  Vector alpha;
  double value = -kInf;
  double grad_norm = kInf;
  std::size_t iterations = 0;
  std::vector<double> path;
};

// Phase 1: quasi-Newton ascent with Armijo backtracking in optimizer coordinates.
Attempt ascend(const AdversarialProblem& p, std::span<const double> theta, Vector alpha,
               const InnerMaxOptions& opts) {
  const Coords c(p.alpha_box);
  const std::size_t q = alpha.size();
  Attempt a;
  project_to_box(alpha, p.alpha_box);
  Vector u = c.to_u(alpha);
  double f = population_criterion(p, theta, alpha, opts.rel_tol);
  Vector g = population_grad_alpha(p, theta, alpha, opts.rel_tol);
  Vector gu = g;
  c.grad_to_u(alpha, gu);
  Matrix h = Matrix::identity(q);
  a.path.push_back(f);
  for (; a.iterations < opts.max_iterations; ++a.iterations) {
    if (projected_norm(alpha, g, p.alpha_box) <= std::max(opts.grad_tol, 1e-6)) break;
    Vector d = h * gu;
    double slope = 0.0;
    for (std::size_t i = 0; i < q; ++i) slope += gu[i] * d[i];
    if (!(slope > 0.0)) {
      h = Matrix::identity(q);
      d = gu;
    }
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, std::abs(v));
    if (dmax > 2.0)
      for (double& v : d) v *= 2.0 / dmax;

    bool accepted = false;
    Vector u_new, alpha_new;
    double f_new = 0.0;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      u_new = u;
      for (std::size_t i = 0; i < q; ++i) u_new[i] += t * d[i];
      alpha_new = c.from_u(u_new);
      u_new = c.to_u(alpha_new);
      double gain = 0.0;
      for (std::size_t i = 0; i < q; ++i) gain += gu[i] * (u_new[i] - u[i]);
      if (gain <= 0.0) continue;
      f_new = population_criterion(p, theta, alpha_new, opts.rel_tol);
      if (f_new >= f + 1e-4 * gain) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    Vector g_new = population_grad_alpha(p, theta, alpha_new, opts.rel_tol);
    Vector gu_new = g_new;
    c.grad_to_u(alpha_new, gu_new);
    // BFGS on -f: s = du, y = -(gu_new - gu).
    Vector s(q), y(q);
    double sy = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      s[i] = u_new[i] - u[i];
      y[i] = gu[i] - gu_new[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-14) {
      const Vector hy = h * y;
      double yhy = 0.0;
      for (std::size_t i = 0; i < q; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
          h(i, j) += (1.0 + yhy / sy) * s[i] * s[j] / sy - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    }
    u = std::move(u_new);
    alpha = std::move(alpha_new);
    g = std::move(g_new);
    gu = std::move(gu_new);
    f = f_new;
    a.path.push_back(f);
  }
  a.alpha = alpha;
  a.value = f;
  a.grad_norm = projected_norm(alpha, g, p.alpha_box);
  return a;
}

double sup_norm(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

// Phase 2: Newton on the gradient in the regular chart, where the problem is
// well conditioned even when the native chart degenerates. Function values
// are not used, so quadrature noise in L does not stall the polish.
void polish(const AdversarialProblem& p, std::span<const double> theta, Attempt& a, const InnerMaxOptions& opts) {
  const auto& native = *p.discriminators;
  const AdversarialProblem pc = regular_problem(p);
  const bool charted = native.regular_chart() != nullptr;
  Vector w = native.to_regular_chart(a.alpha);
  auto grad = [&](std::span<const double> v) { return population_grad_alpha(pc, theta, v, opts.rel_tol); };
  Vector g = grad(w);
  for (int it = 0; it < 50 && sup_norm(g) > 1e-3 * opts.grad_tol; ++it) {
    const Matrix h = jacobian_fd(grad, w).symmetrized();
    Vector step;
    bool newton = false;
    try {
      if (symmetric_eigenvalues(h).back() < 0.0) {
        step = invert(h) * g;
        for (double& v : step) v = -v;
        newton = true;
      }
    } catch (const Error&) {
    }
    if (!newton) step = g;
    bool improved = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      Vector wt = w;
      for (std::size_t i = 0; i < w.size(); ++i) wt[i] += t * step[i];
      const Vector gt = grad(wt);
      if (sup_norm(gt) < sup_norm(g)) {
        w = std::move(wt);
        g = gt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  std::optional<Vector> back = native.from_regular_chart(w);
  Vector candidate;
  if (back && inside_box(*back, p.alpha_box)) {
    candidate = *back;
  } else if (charted && sup_norm(w) <= 1e-6) {
    // Chart origin: every point of the native degenerate set is a maximizer;
    // stay on it at the geometric mean of the phase-1 coordinates.
    double logmean = 0.0;
    for (double v : a.alpha) logmean += std::log(v);
    candidate.assign(a.alpha.size(), std::exp(logmean / static_cast<double>(a.alpha.size())));
    project_to_box(candidate, p.alpha_box);
  } else {
    return;
  }
  const Vector gn = population_grad_alpha(p, theta, candidate, opts.rel_tol);
  const double gnorm = projected_norm(candidate, gn, p.alpha_box);
  if (gnorm < a.grad_norm) {
    a.alpha = candidate;
    a.grad_norm = gnorm;
    a.value = population_criterion(p, theta, candidate, opts.rel_tol);
  }
}

// Highest criterion wins; near-ties (quadrature noise) go to the smaller
// gradient. A tiny native gradient alone is not trusted: far out in the box the
// Gaussian-ratio gradient scales like alpha^-3 even on the flat diagonal.
bool better(const Attempt& x, const Attempt& best) {
  if (x.value > best.value + 1e-9) return true;
  if (x.value < best.value - 1e-9) return false;
  return x.grad_norm < best.grad_norm;
}

}  // namespace

InnerMaxResult inner_max_alpha_detailed(const AdversarialProblem& p, std::span<const double> theta,
                                        const InnerMaxOptions& opts) {
  if (theta.size() != p.generators->dim()) throw Error(ErrorCode::ShapeMismatch, "theta size");
  std::vector<Vector> starts;
  if (opts.warm_start) starts.push_back(*opts.warm_start);
  else starts = start_points(p.alpha_box, opts);

  Attempt best;
  for (const Vector& s : starts) {
    Attempt a = ascend(p, theta, s, opts);
    polish(p, theta, a, opts);
    if (best.alpha.empty() || better(a, best)) best = std::move(a);
  }
  if (opts.warm_start && best.grad_norm > opts.grad_tol) {
    InnerMaxOptions cold = opts;
    cold.warm_start.reset();
    return inner_max_alpha_detailed(p, theta, cold);
  }
  InnerMaxResult r;
  r.alpha = best.alpha;
  r.value = best.value;
  r.grad_norm = best.grad_norm;
  r.iterations = best.iterations;
  r.path = std::move(best.path);
  return r;
}

Vector inner_max_alpha(const AdversarialProblem& p, std::span<const double> theta, const InnerMaxOptions& opts) {
  InnerMaxResult r = inner_max_alpha_detailed(p, theta, opts);
  if (r.grad_norm > opts.grad_tol) {
    throw Error(ErrorCode::NonConvergence,
                "inner maximization: best gradient norm " + std::to_string(r.grad_norm) + " above tolerance");
  }
  return r.alpha;
}

double outer_value(const AdversarialProblem& p, std::span<const double> theta, const std::optional<Vector>& warm,
                   double rel_tol) {
  InnerMaxOptions o;
  o.warm_start = warm;
  o.rel_tol = rel_tol;
  return inner_max_alpha_detailed(p, theta, o).value;
}

// ---------------------------------------------------------------------------
// Outer solvers
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kGridPoints = 33;

struct ScalarMin {
  double x;
  double f;
};

// Coarse grid (log-spaced on positive boxes) followed by golden section in
// the grid coordinate around the best grid point.
ScalarMin grid_golden(const std::function<double(double)>& f, const Interval& box, double x_tol) {
  const bool logscale = box.lo > 0.0;
  auto to_s = [&](double x) { return logscale ? std::log(x) : x; };
  auto from_s = [&](double s) { return std::clamp(logscale ? std::exp(s) : s, box.lo, box.hi); };
  const double s_lo = to_s(box.lo), s_hi = to_s(box.hi);

  std::vector<double> grid(kGridPoints), vals(kGridPoints);
  std::size_t best = 0;
  for (std::size_t k = 0; k < kGridPoints; ++k) {
    grid[k] = s_lo + (s_hi - s_lo) * static_cast<double>(k) / static_cast<double>(kGridPoints - 1);
    vals[k] = f(from_s(grid[k]));
    if (vals[k] < vals[best]) best = k;
  }
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, kGridPoints - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(from_s(c)), fd = f(from_s(d));
  for (int it = 0; it < 200 && std::abs(from_s(b) - from_s(a)) > x_tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(from_s(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(from_s(d));
    }
  }
  ScalarMin m{fc < fd ? from_s(c) : from_s(d), std::min(fc, fd)};
  if (vals[best] < m.f) m = {from_s(grid[best]), vals[best]};
  return m;
}

void require_scalar(const AdversarialProblem& p) {
  if (p.generators->dim() != 1) throw Error(ErrorCode::InvalidParams, "population outer solvers need scalar theta");
  if (!p.generators->pushforward(Vector{p.generators->param_box()[0].lo}))
    throw Error(ErrorCode::InvalidParams, "population solvers need a closed-form pushforward");
}

}  // namespace

ThetaBarResult solve_theta_bar(const AdversarialProblem& p) {
  require_scalar(p);
  const Interval box = p.theta_box[0];
  std::optional<Vector> warm;
  auto value = [&](double t, bool use_warm) {
    InnerMaxOptions o;
    if (use_warm) o.warm_start = warm;
    const InnerMaxResult r = inner_max_alpha_detailed(p, std::vector<double>{t}, o);
    warm = r.alpha;
    return r.value;
  };
  // Grid points are far apart: cold starts there, warm starts in the refinement.
  bool in_grid = true;
  std::size_t calls = 0;
  const ScalarMin m = grid_golden(
      [&](double t) {
        in_grid = ++calls <= kGridPoints;
        return value(t, !in_grid);
      },
      box, 1e-6);

  // Envelope gradient g(theta) = d/dtheta L(theta, alpha(theta)).
  InnerMaxOptions wo;
  wo.warm_start = inner_max_alpha(p, std::vector<double>{m.x});
  auto envelope = [&](double t) {
    const Vector th{t};
    InnerMaxResult r = inner_max_alpha_detailed(p, th, wo);
    wo.warm_start = r.alpha;
    return population_grad_theta(p, th, r.alpha)[0];
  };
  double x = m.x;
  const double delta = 1e-4 * std::max(1.0, m.x);
  double a = std::max(box.lo, m.x - delta), b = std::min(box.hi, m.x + delta);
  double ga = envelope(a), gb = envelope(b);
  if (ga < 0.0 && gb > 0.0) {
    // Illinois regula falsi.
    int side = 0;
    for (int it = 0; it < 100 && b - a > 1e-12 * std::max(1.0, x); ++it) {
      x = (a * gb - b * ga) / (gb - ga);
      const double gx = envelope(x);
      if (gx == 0.0) break;
      if (gx < 0.0) {
        a = x;
        ga = gx;
        if (side == -1) gb *= 0.5;
        side = -1;
      } else {
        b = x;
        gb = gx;
        if (side == 1) ga *= 0.5;
        side = 1;
      }
    }
  }

  ThetaBarResult r;
  r.theta_bar = {x};
  InnerMaxOptions fin;
  fin.warm_start = wo.warm_start;
  const InnerMaxResult im = inner_max_alpha_detailed(p, r.theta_bar, fin);
  if (im.grad_norm > fin.grad_tol)
    throw Error(ErrorCode::NonConvergence, "inner maximization failed at theta-bar");
  r.alpha_bar = im.alpha;
  r.value = im.value;
  r.alpha_grad_norm = im.grad_norm;

  // At the chart origin the native maximizer is not unique; report the limit
  // of alpha(theta) along the equilibrium curve instead.
  const auto& disc = *p.discriminators;
  if (disc.regular_chart() && sup_norm(disc.to_regular_chart(im.alpha)) <= 1e-6) {
    const double h = 1e-3 * std::max(1.0, x);
    InnerMaxOptions side;
    side.warm_start = im.alpha;
    const Vector bp = disc.to_regular_chart(inner_max_alpha(p, std::vector<double>{x + h}, side));
    const Vector bm = disc.to_regular_chart(inner_max_alpha(p, std::vector<double>{x - h}, side));
    Vector tangent(bp.size());
    for (std::size_t i = 0; i < bp.size(); ++i) tangent[i] = bp[i] - bm[i];
    const double scale = 1e-10 / std::max(sup_norm(tangent), 1e-300);
    for (double& v : tangent) v *= scale;
    if (auto lim = disc.from_regular_chart(tangent); lim && inside_box(*lim, p.alpha_box)) {
      const double gl = projected_norm(*lim, population_grad_alpha(p, r.theta_bar, *lim), p.alpha_box);
      if (gl <= fin.grad_tol) {
        r.alpha_bar = *lim;
        r.value = population_criterion(p, r.theta_bar, *lim, fin.rel_tol);
        r.alpha_grad_norm = gl;
      }
    }
  }
  r.envelope_grad = population_grad_theta(p, r.theta_bar, im.alpha)[0];
  return r;
}

Vector solve_theta_star(const AdversarialProblem& p) {
  require_scalar(p);
  const ScalarMin m = grid_golden(
      [&](double t) { return js_divergence(*p.target, *p.generators->pushforward(std::vector<double>{t}), 1e-12); },
      p.theta_box[0], 1e-7);
  return {m.x};
}

}  // namespace ganlab
