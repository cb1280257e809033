#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ganlab/asymptotics.hpp"
#include "ganlab/error.hpp"
#include "ganlab/solvers.hpp"

using namespace ganlab;

namespace {

struct Equilibrium {
  AdversarialProblem p;
  ThetaBarResult tb;
  AsymptoticReport report;
};

const Equilibrium& laplace_gaussian() {
  static const Equilibrium e = [] {
    Equilibrium x{table1_triplet("laplace-gaussian"), {}, {}};
    x.tb = solve_theta_bar(x.p);
    x.report = build_asymptotics(x.p, x.tb.theta_bar, x.tb.alpha_bar);
    return x;
  }();
  return e;
}

}  // namespace

TEST_CASE("well-specified model: HV is positive") {
  const auto gg = well_specified_gaussian(1.0);
  const ThetaBarResult tb = solve_theta_bar(gg);
  const AsymptoticReport r = build_asymptotics(gg, tb.theta_bar, tb.alpha_bar);
  REQUIRE(r.HV.rows() == 1);
  CHECK(r.HV(0, 0) > 0.0);
}

TEST_CASE("laplace-gaussian sign structure and envelope identity") {
  const auto& e = laplace_gaussian();
  for (double ev : e.report.h2l_eigenvalues) CHECK(ev < -1e-10);
  CHECK(e.report.HV(0, 0) > 0.0);
  const Matrix direct = direct_hv(e.p, e.tb.theta_bar, e.tb.alpha_bar);
  CHECK(std::abs(direct(0, 0) - e.report.HV(0, 0)) <= 1e-2 * std::abs(direct(0, 0)));
}

TEST_CASE("stationarity precondition") {
  const auto& e = laplace_gaussian();
  const std::vector<double> off{e.tb.theta_bar[0] * 1.2};
  CHECK_THROWS_AS(build_asymptotics(e.p, off, e.tb.alpha_bar), Error);
  try {
    build_asymptotics(e.p, off, e.tb.alpha_bar);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::StationarityViolated);
  }
}

TEST_CASE("clt variance: PSD, mean conditions, Monte Carlo stability") {
  const auto& e = laplace_gaussian();
  AsymptoticReport r1 = e.report, r2 = e.report;
  SeededRng a(1), b(2);
  const Matrix v1 = clt_variance(e.p, r1, 100000, a);
  const Matrix v2 = clt_variance(e.p, r2, 200000, b);
  CHECK(symmetric_eigenvalues(v1).front() >= -1e-10);
  CHECK(v1(0, 0) == doctest::Approx(v1.transpose()(0, 0)));
  CHECK(r1.mc_samples_used == 100000);
  for (std::size_t i = 0; i < r1.grad2_mean.size(); ++i)
    CHECK(std::abs(r1.grad2_mean[i]) <= 4 * r1.grad2_se[i] + 1e-8);
  // Doubling the draws moves the estimate by at most 3 standard errors.
  const double se = std::sqrt(r1.V_se(0, 0) * r1.V_se(0, 0) + r2.V_se(0, 0) * r2.V_se(0, 0));
  CHECK(std::abs(v1(0, 0) - v2(0, 0)) <= 3 * se);
  // Closed-form oracle for this model: n Var(theta-hat) -> 7.875.
  CHECK(std::abs(v2(0, 0) - 7.875) <= 4 * r2.V_se(0, 0));
  CHECK_THROWS_AS(clt_variance(e.p, r1, 5000, a), Error);
}

TEST_CASE("clt variance does not depend on the worker count") {
  const auto& e = laplace_gaussian();
  AsymptoticReport r1 = e.report, r3 = e.report;
  SeededRng a(7), b(7);
  const double v1 = clt_variance(e.p, r1, 50000, a, 1)(0, 0);
  const double v3 = clt_variance(e.p, r3, 50000, b, 3)(0, 0);
  CHECK(v1 == v3);
}

TEST_CASE("wrong equilibrium is flagged by the mean conditions") {
  const auto& e = laplace_gaussian();
  AsymptoticReport r = e.report;
  r.theta_bar[0] *= 1.1;  // blocks kept, per-sample gradients now off-center
  SeededRng rng(3);
  try {
    clt_variance(e.p, r, 100000, rng);
    FAIL("expected MeanNotZero");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::MeanNotZero);
  }
}

TEST_CASE("shard merge matches a single stream") {
  SeededRng rng(11);
  std::vector<Vector> xs(5003);
  for (auto& x : xs) x = {rng.normal() * 3 + 1, rng.uniform(), rng.normal() * 1e-3};
  CovarianceAccumulator single(3);
  for (const auto& x : xs) single.add(x);
  for (std::size_t shards : {2u, 7u, 64u}) {
    std::vector<CovarianceAccumulator> parts(shards, CovarianceAccumulator(3));
    for (std::size_t i = 0; i < xs.size(); ++i) parts[(i * 31) % shards].add(xs[i]);
    // Merge in reverse order: the result must not depend on it.
    CovarianceAccumulator merged(3);
    for (std::size_t s = shards; s-- > 0;) merged.merge(parts[s]);
    const Matrix a = single.covariance(), b = merged.covariance();
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-10 * std::abs(a(i, j)) + 1e-300);
    CHECK(merged.count() == xs.size());
  }
  CHECK_THROWS_AS(CovarianceAccumulator(2).covariance(), Error);
}

TEST_CASE("normality check") {
  CHECK_THROWS_AS(normality_check(Vector{}, 0.0, 10, 1.0), Error);
  CHECK_THROWS_AS(normality_check(Vector(50, 1.0), 0.0, 10, 1.0), Error);

  const NormalityReport deg = normality_check(Vector(150, 2.0), 2.0, 100, 1.0);
  CHECK(deg.degenerate);

  // Null calibration: draws from the limit law pass KS at the 1% level in
  // at least 95 of 100 trials.
  int passes = 0;
  const std::size_t n = 400;
  const double V = 2.5, theta_bar = 1.3;
  for (int t = 0; t < 100; ++t) {
    SeededRng rng(mix_seed(5, t));
    Vector th(200);
    for (double& x : th) x = theta_bar + std::sqrt(V / n) * rng.normal();
    const NormalityReport r = normality_check(th, theta_bar, n, V);
    passes += r.ks.p_value > 0.01;
    std::size_t total = 0;
    for (auto c : r.histogram) total += c;
    CHECK(total <= 200);
    CHECK(r.histogram.size() == 30);
  }
  CHECK(passes >= 95);
}
