#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ganlab/densities.hpp"
#include "ganlab/error.hpp"

using namespace ganlab;

namespace {

std::vector<std::pair<std::string, DensityPtr>> catalog() {
  return {
      {"gaussian", make_density(DensityKind::Gaussian, std::vector<double>{0.5, 2.0})},
      {"laplace", make_density(DensityKind::Laplace, std::vector<double>{1.5})},
      {"logistic", make_density(DensityKind::Logistic, std::vector<double>{0.33})},
      {"exponential", make_density(DensityKind::Exponential, std::vector<double>{1.0})},
      {"uniform", make_density(DensityKind::Uniform, std::vector<double>{2.0})},
      {"claw", make_density(DensityKind::Claw)},
      {"mixture", make_mixture({0.3, 0.7}, {make_density(DensityKind::Laplace, std::vector<double>{1.0}),
                                            make_density(DensityKind::Gaussian, std::vector<double>{2.0, 0.5})})},
  };
}

// Upper chi-square tail for k = 19 degrees of freedom at the 0.1% level.
constexpr double kChi2_19_999 = 43.82;

}  // namespace

TEST_CASE("catalog point values") {
  CHECK(make_density(DensityKind::Laplace, std::vector<double>{1.5})->pdf(0) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(make_density(DensityKind::Claw)->pdf(0) - 0.598417) <= 1e-5);
  CHECK(make_density(DensityKind::Exponential, std::vector<double>{1.0})->cdf(std::log(2.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));
  const auto u = make_density(DensityKind::Uniform, std::vector<double>{2.0});
  CHECK(u->pdf(1.0) == 0.5);
  CHECK(u->pdf(2.5) == 0.0);
  CHECK(u->pdf(-0.1) == 0.0);
}

TEST_CASE("invalid parameters") {
  for (auto kind : {DensityKind::Gaussian, DensityKind::Laplace, DensityKind::Logistic, DensityKind::Exponential,
                    DensityKind::Uniform}) {
    CHECK_THROWS_AS(make_density(kind, std::vector<double>{-1.0}), Error);
  }
  CHECK_THROWS_AS(make_mixture({0.5, 0.6}, {make_density(DensityKind::Claw), make_density(DensityKind::Claw)}), Error);
  CHECK_THROWS_AS(parse_density_kind("cauchy"), Error);
  CHECK(parse_density_kind("laplace") == DensityKind::Laplace);
}

TEST_CASE("catalog normalization, cdf derivative, sampler mean") {
  for (const auto& [name, d] : catalog()) {
    CAPTURE(name);
    CHECK(std::abs(total_mass(*d) - 1.0) <= 1e-8);
    if (d->has_cdf()) {
      const Interval s = d->support();
      const double lo = s.finite() ? s.lo : -4.0, hi = s.finite() ? s.hi : 4.0;
      for (int i = 1; i <= 100; ++i) {
        const double x = (s.lo > -kInf ? s.lo : lo) + (hi - (s.lo > -kInf ? s.lo : lo)) * (i - 0.5) / 100.0;
        const double h = 1e-5;
        const double deriv = (d->cdf(x + h) - d->cdf(x - h)) / (2 * h);
        // skip the Laplace kink at 0
        if (std::abs(x) < 2 * h) continue;
        CHECK(std::abs(deriv - d->pdf(x)) <= 1e-5);
      }
    }
    SeededRng rng(17);
    const auto xs = d->sample(rng, 100000);
    REQUIRE(xs.size() == 100000);
    const Moments m = sample_moments(xs);
    const double mu = density_mean(*d);
    CHECK(std::abs(m.mean - mu) <= 5 * std::sqrt(m.variance / xs.size()));
  }
}

TEST_CASE("sampler/pdf chi-square agreement") {
  for (const auto& [name, d] : catalog()) {
    CAPTURE(name);
    // Equal-probability bins from quadrature of the pdf.
    const Interval s = d->support();
    const double lo = s.lo > -kInf ? s.lo : -60.0, hi = s.hi < kInf ? s.hi : 60.0;
    std::vector<double> edges{lo};
    // bisection on the quadrature cdf
    auto qcdf = [&](double x) {
      return integrate([&](double t) { return d->pdf(t); }, Interval(lo, x), 1e-10, d->breakpoints());
    };
    for (int k = 1; k < 20; ++k) {
      double a = edges.back(), b = hi;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        (qcdf(mid) < k / 20.0 ? a : b) = mid;
      }
      edges.push_back(0.5 * (a + b));
    }
    edges.push_back(hi);
    int passes = 0;
    for (int seed = 0; seed < 10; ++seed) {
      SeededRng rng(mix_seed(1234, seed));
      const auto xs = d->sample(rng, 100000);
      std::vector<double> counts(20, 0.0);
      for (double x : xs) {
        const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, x);
        counts[it - edges.begin() - 1] += 1;
      }
      double chi2 = 0.0;
      for (double c : counts) chi2 += (c - 5000.0) * (c - 5000.0) / 5000.0;
      passes += chi2 < kChi2_19_999;
    }
    CHECK(passes >= 9);
  }
}

TEST_CASE("sampling is deterministic and in support") {
  const auto u = make_density(DensityKind::Uniform, std::vector<double>{2.0});
  SeededRng a(5), b(5);
  const auto xs = u->sample(a, 3), ys = u->sample(b, 3);
  CHECK(xs == ys);
  for (double x : xs) CHECK((x >= 0.0 && x <= 2.0));

  SeededRng rng(8);
  const auto e = make_density(DensityKind::Exponential, std::vector<double>{1.0})->sample(rng, 100000);
  CHECK(std::abs(sample_moments(e).mean - 1.0) <= 0.02);

  const auto claw = make_density(DensityKind::Claw);
  SeededRng r2(9);
  const auto cs = claw->sample(r2, 100000);
  const double frac =
      std::count_if(cs.begin(), cs.end(), [](double x) { return x >= -0.6 && x <= -0.4; }) / 100000.0;
  const double p = integrate([&](double x) { return claw->pdf(x); }, Interval(-0.6, -0.4), 1e-10);
  CHECK(std::abs(frac - p) <= 3 * std::sqrt(p * (1 - p) / 100000.0));
}

TEST_CASE("truncated densities") {
  const auto t = make_truncated(make_density(DensityKind::Gaussian, std::vector<double>{1.0}), Interval(-1, 2));
  CHECK(std::abs(total_mass(*t) - 1.0) <= 1e-9);
  CHECK(t->pdf(2.5) == 0.0);
  SeededRng rng(3);
  for (double x : t->sample(rng, 1000)) CHECK((x >= -1 && x <= 2));
}

TEST_CASE("kde") {
  const std::vector<double> sym{-2, -1, -0.3, 0.3, 1, 2};
  const auto k = kde(sym);
  for (double x : {0.1, 0.7, 1.9, 3.3}) CHECK(std::abs(k->pdf(x) - k->pdf(-x)) <= 1e-12);

  const auto two = kde(std::vector<double>{-1, 1}, 0.1);
  CHECK(two->pdf(-1) == doctest::Approx(two->pdf(1)));
  CHECK(std::abs(total_mass(*two) - 1.0) <= 1e-6);

  CHECK_THROWS_AS(kde(std::vector<double>{3, 3, 3}), Error);
  CHECK_THROWS_AS(kde(std::vector<double>{3}), Error);

  SeededRng rng(77);
  std::vector<double> xs(100000);
  for (double& x : xs) x = rng.normal();
  const auto kn = kde(xs);
  CHECK(std::abs(total_mass(*kn) - 1.0) <= 1e-6);
  double sup = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double x = -3.0 + 6.0 * i / 600.0;
    sup = std::max(sup, std::abs(kn->pdf(x) - normal_pdf(x)));
  }
  CHECK(sup <= 0.02);
  // Silverman rule by hand
  const Moments m = sample_moments(xs);
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sample_quantile(sorted, 0.75) - sample_quantile(sorted, 0.25);
  CHECK(kn->bandwidth() ==
        doctest::Approx(0.9 * std::min(std::sqrt(m.variance), iqr / 1.34) * std::pow(1e5, -0.2)).epsilon(1e-12));
}
