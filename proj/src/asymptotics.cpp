#include "ganlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ganlab/criterion.hpp"
#include "ganlab/error.hpp"
#include "ganlab/solvers.hpp"

namespace ganlab {

namespace {

// Quadrature tolerance inside finite-difference derivative evaluations.
constexpr double kHessTol = 1e-12;
constexpr std::size_t kBlock = 10000;
constexpr double kMeanFloor = 1e-8;

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Matrix negate(const Matrix& m) { return -1.0 * m; }

double condition(const Vector& eig) {
  double lo = kInf, hi = 0.0;
  for (double e : eig) lo = std::min(lo, std::abs(e)), hi = std::max(hi, std::abs(e));
  return lo > 0.0 ? hi / lo : kInf;
}

}  // namespace

AsymptoticReport build_asymptotics(const AdversarialProblem& p, std::span<const double> theta_bar,
                                   std::span<const double> alpha_bar) {
  const AdversarialProblem pc = regular_problem(p);
  AsymptoticReport r;
  r.theta_bar.assign(theta_bar.begin(), theta_bar.end());
  r.alpha_bar.assign(alpha_bar.begin(), alpha_bar.end());
  r.beta_bar = p.discriminators->to_regular_chart(alpha_bar);
  const Vector& th = r.theta_bar;
  const Vector& b = r.beta_bar;

  r.stationarity = sup_norm(population_grad_alpha(pc, th, b, kHessTol));
  if (r.stationarity > 1e-6)
    throw Error(ErrorCode::StationarityViolated,
                "grad_alpha L = " + std::to_string(r.stationarity) + " at the input pair");

  auto g1_theta = [&](std::span<const double> t) { return population_grad_theta(pc, t, b, kHessTol); };
  auto g2_theta = [&](std::span<const double> t) { return population_grad_alpha(pc, t, b, kHessTol); };
  auto g1_beta = [&](std::span<const double> v) { return population_grad_theta(pc, th, v, kHessTol); };
  auto g2_beta = [&](std::span<const double> v) { return population_grad_alpha(pc, th, v, kHessTol); };

  r.H1L = jacobian_fd(g1_theta, th).symmetrized();
  r.H2L = jacobian_fd(g2_beta, b).symmetrized();
  r.cross12 = jacobian_fd(g1_beta, b);
  r.cross21 = jacobian_fd(g2_theta, th);
  r.h2l_eigenvalues = symmetric_eigenvalues(r.H2L);
  r.J_alpha = negate(invert(r.H2L) * r.cross21);
  r.HV = (r.H1L + r.cross12 * r.J_alpha).symmetrized();
  r.hv_eigenvalues = symmetric_eigenvalues(r.HV);
  r.hv_condition = condition(r.hv_eigenvalues);
  return r;
}

Matrix direct_hv(const AdversarialProblem& p, std::span<const double> theta_bar, std::span<const double> alpha_bar) {
  if (theta_bar.size() != 1) throw Error(ErrorCode::ShapeMismatch, "direct_hv handles scalar theta");
  const std::optional<Vector> warm = Vector(alpha_bar.begin(), alpha_bar.end());
  const double h = 1e-3 * std::max(1e-3, std::abs(theta_bar[0]));
  return hessian_fd([&](std::span<const double> t) { return outer_value(p, t, warm, kHessTol); }, theta_bar, h);
}

CovarianceAccumulator::CovarianceAccumulator(std::size_t dim) : mean_(dim, 0.0), m2_(dim, dim) {}

void CovarianceAccumulator::add(std::span<const double> v) {
  if (v.size() != mean_.size()) throw Error(ErrorCode::ShapeMismatch, "covariance accumulator dimension");
  ++n_;
  const std::size_t d = mean_.size();
  Vector delta(d);
  for (std::size_t i = 0; i < d; ++i) {
    delta[i] = v[i] - mean_[i];
    mean_[i] += delta[i] / static_cast<double>(n_);
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m2_(i, j) += delta[i] * (v[j] - mean_[j]);
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& o) {
  if (o.mean_.size() != mean_.size()) throw Error(ErrorCode::ShapeMismatch, "covariance accumulator dimension");
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_), nt = na + nb;
  const std::size_t d = mean_.size();
  Vector delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = o.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m2_(i, j) += o.m2_(i, j) + delta[i] * delta[j] * na * nb / nt;
  for (std::size_t i = 0; i < d; ++i) mean_[i] += delta[i] * nb / nt;
  n_ += o.n_;
}

Matrix CovarianceAccumulator::covariance() const {
  if (n_ < 2) throw Error(ErrorCode::EmptySample, "covariance needs two observations");
  return (1.0 / static_cast<double>(n_ - 1)) * m2_;
}

Matrix clt_variance(const AdversarialProblem& p, AsymptoticReport& report, std::size_t mc_n, SeededRng& rng,
                    std::size_t workers) {
  if (mc_n < 10000) throw Error(ErrorCode::InvalidParams, "clt_variance needs mc_n >= 1e4");
  const AdversarialProblem pc = regular_problem(p);
  const auto& disc = *pc.discriminators;
  const auto& gen = *pc.generators;
  const std::size_t dp = report.theta_bar.size(), dq = report.beta_bar.size();
  const Matrix hv_inv = invert(report.HV);
  const Matrix a = negate(hv_inv);                                  // on grad_theta l
  const Matrix bmat = hv_inv * report.cross12 * invert(report.H2L);  // on grad_beta l
  const Vector& th = report.theta_bar;
  const Vector& beta = report.beta_bar;

  const std::uint64_t seed = rng.next_u64();
  const std::size_t blocks = (mc_n + kBlock - 1) / kBlock;
  struct Partial {
    CovarianceAccumulator psi, g1, g2;
  };
  std::vector<Partial> parts(blocks, Partial{CovarianceAccumulator(dp), CovarianceAccumulator(dp),
                                             CovarianceAccumulator(dq)});

  auto run_block = [&](std::size_t blk) {
    SeededRng sub(mix_seed(seed, blk));
    const std::size_t m = std::min(kBlock, mc_n - blk * kBlock);
    const Vector xs = pc.target->sample(sub, m);
    Vector g1(dp), g2(dq), psi(dp);
    for (std::size_t i = 0; i < m; ++i) {
      const double z = sub.uniform();
      const double g = gen.apply(th, z);
      const Vector dg = gen.grad_theta(th, z);
      const double dfake = fake_term_dx(disc, beta, g);
      for (std::size_t k = 0; k < dp; ++k) g1[k] = dfake * dg[k];
      std::fill(g2.begin(), g2.end(), 0.0);
      accumulate_real_grad_alpha(disc, beta, xs[i], 1.0, g2);
      accumulate_fake_grad_alpha(disc, beta, g, 1.0, g2);
      const Vector u = a * g1, w = bmat * g2;
      for (std::size_t k = 0; k < dp; ++k) psi[k] = u[k] + w[k];
      parts[blk].psi.add(psi);
      parts[blk].g1.add(g1);
      parts[blk].g2.add(g2);
    }
  };

  const std::size_t nw = std::max<std::size_t>(1, std::min(workers, blocks));
  if (nw == 1) {
    for (std::size_t blk = 0; blk < blocks; ++blk) run_block(blk);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nw; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t blk = w; blk < blocks; blk += nw) run_block(blk);
      });
    for (auto& t : pool) t.join();
  }

  Partial total{CovarianceAccumulator(dp), CovarianceAccumulator(dp), CovarianceAccumulator(dq)};
  for (const auto& part : parts) {
    total.psi.merge(part.psi);
    total.g1.merge(part.g1);
    total.g2.merge(part.g2);
  }

  auto se_of = [&](const CovarianceAccumulator& acc) {
    const Matrix c = acc.covariance();
    Vector se(c.rows());
    for (std::size_t i = 0; i < c.rows(); ++i) se[i] = std::sqrt(std::max(0.0, c(i, i)) / acc.count());
    return se;
  };
  report.grad1_mean = total.g1.mean();
  report.grad1_se = se_of(total.g1);
  report.grad2_mean = total.g2.mean();
  report.grad2_se = se_of(total.g2);
  report.V = total.psi.covariance().symmetrized();
  report.mc_samples_used = mc_n;
  report.V_se = Matrix(dp, dp, kInf);
  if (blocks >= 2) {
    for (std::size_t i = 0; i < dp; ++i)
      for (std::size_t j = 0; j < dp; ++j) {
        Vector est(blocks);
        for (std::size_t blk = 0; blk < blocks; ++blk) est[blk] = parts[blk].psi.covariance()(i, j);
        report.V_se(i, j) = std::sqrt(sample_moments(est).variance / static_cast<double>(blocks));
      }
  }

  // The floor absorbs the deterministic bias of an equilibrium solved to
  // finite accuracy, which no sample size can average away.
  auto check_mean = [](const Vector& mean, const Vector& se, const char* what) {
    for (std::size_t i = 0; i < mean.size(); ++i)
      if (std::abs(mean[i]) > 4.0 * se[i] + kMeanFloor)
        throw Error(ErrorCode::MeanNotZero, std::string(what) + " component " + std::to_string(i) + " has mean " +
                                                std::to_string(mean[i]) + " (se " + std::to_string(se[i]) + ")");
  };
  check_mean(report.grad1_mean, report.grad1_se, "grad_theta l");
  check_mean(report.grad2_mean, report.grad2_se, "grad_alpha l");
  return report.V;
}

NormalityReport normality_check(std::span<const double> theta_hats, double theta_bar, std::size_t n, double V) {
  if (theta_hats.empty()) throw Error(ErrorCode::EmptySample, "no estimates");
  if (theta_hats.size() < 100) throw Error(ErrorCode::InvalidParams, "normality check needs >= 100 replications");
  if (!(V > 0.0)) throw Error(ErrorCode::InvalidParams, "variance must be positive");
  NormalityReport r;
  const double scale = std::sqrt(static_cast<double>(n) / V);
  r.standardized.reserve(theta_hats.size());
  for (double t : theta_hats) r.standardized.push_back(scale * (t - theta_bar));

  constexpr std::size_t kBins = 30;
  r.histogram.assign(kBins, 0);
  for (std::size_t i = 0; i <= kBins; ++i) r.bin_edges.push_back(-4.0 + 8.0 * i / kBins);
  for (double s : r.standardized) {
    if (s < -4.0 || s > 4.0) continue;
    const auto k = std::min<std::size_t>(kBins - 1, static_cast<std::size_t>((s + 4.0) / (8.0 / kBins)));
    ++r.histogram[k];
  }

  const auto [lo, hi] = std::minmax_element(r.standardized.begin(), r.standardized.end());
  if (*lo == *hi) {
    r.degenerate = true;
    return r;
  }
  Vector sorted = r.standardized;
  std::sort(sorted.begin(), sorted.end());
  r.ks = ks_test(sorted, normal_cdf);
  const Moments m = sample_moments(r.standardized);
  r.skewness = m.skewness;
  r.excess_kurtosis = m.excess_kurtosis;
  return r;
}

}  // namespace ganlab
