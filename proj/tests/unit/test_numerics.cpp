#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ganlab/densities.hpp"
#include "ganlab/error.hpp"
#include "ganlab/numerics.hpp"

using namespace ganlab;

TEST_CASE("integrate: analytic integrals") {
  CHECK(integrate([](double x) { return x * x; }, Interval(0, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(integrate(normal_pdf, Interval()) - 1.0) <= 1e-9);
  const auto claw = make_density(DensityKind::Claw);
  CHECK(std::abs(integrate([&](double x) { return claw->pdf(x); }, Interval(), 1e-10, claw->breakpoints()) - 1.0) <=
        1e-8);
  // half-infinite
  CHECK(std::abs(integrate([](double x) { return std::exp(-x); }, Interval(0, kInf)) - 1.0) <= 1e-9);
}

TEST_CASE("integrate: errors") {
  CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, Interval(0, 1)), Error);
  try {
    integrate([](double) { return std::nan(""); }, Interval(0, 1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFunction);
  }
  CHECK_THROWS_AS(integrate([](double x) { return x; }, Interval(0, 1), 0.5), Error);
  CHECK_THROWS_AS(Interval(1, 1), Error);

  QuadratureOptions opts;
  opts.max_panels = 4;
  opts.rel_tol = 1e-14;
  try {
    integrate_detailed([](double x) { return std::sin(200 * x) + std::sqrt(x); }, Interval(0, 1), opts);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
  }
}

TEST_CASE("integrate is linear over catalog pdfs") {
  SeededRng rng(11);
  std::vector<DensityPtr> cat{make_density(DensityKind::Gaussian, std::vector<double>{0.3, 1.2}),
                              make_density(DensityKind::Laplace, std::vector<double>{1.5}),
                              make_density(DensityKind::Logistic, std::vector<double>{0.33}),
                              make_density(DensityKind::Exponential, std::vector<double>{2.0}),
                              make_density(DensityKind::Uniform, std::vector<double>{3.0}),
                              make_density(DensityKind::Claw)};
  for (int t = 0; t < 50; ++t) {
    const auto& f = cat[rng.next_u64() % cat.size()];
    const auto& g = cat[rng.next_u64() % cat.size()];
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    std::vector<double> bps = f->breakpoints();
    for (double v : g->breakpoints()) bps.push_back(v);
    for (double v : {0.0, 3.0}) bps.push_back(v);  // uniform/exponential jumps
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    const double combined = integrate([&](double x) { return a * f->pdf(x) + b * g->pdf(x); }, Interval(), 1e-10, bps);
    const double sep = a * integrate([&](double x) { return f->pdf(x); }, Interval(), 1e-10, bps) +
                       b * integrate([&](double x) { return g->pdf(x); }, Interval(), 1e-10, bps);
    CHECK(std::abs(combined - sep) <= 1e-8);
  }
}

TEST_CASE("finite differences") {
  auto sq = [](std::span<const double> x) { return x[0] * x[0]; };
  CHECK(grad_fd(sq, std::vector<double>{3.0})[0] == doctest::Approx(6.0).epsilon(1e-7));
  auto xy = [](std::span<const double> x) { return x[0] * x[1]; };
  const auto g = grad_fd(xy, std::vector<double>{2.0, 5.0});
  CHECK(std::abs(g[0] - 5.0) <= 1e-6);
  CHECK(std::abs(g[1] - 2.0) <= 1e-6);

  const Matrix h0 = hessian_fd(sq, std::vector<double>{0.0});
  CHECK(std::abs(h0(0, 0) - 2.0) <= 1e-4);
  auto q = [](std::span<const double> x) { return x[0] * x[0] + 3 * x[1] * x[1] + x[0] * x[1]; };
  const Matrix h = hessian_fd(q, std::vector<double>{0.4, -1.3});
  CHECK(std::abs(h(0, 0) - 2) <= 1e-4);
  CHECK(std::abs(h(0, 1) - 1) <= 1e-4);
  CHECK(std::abs(h(1, 0) - 1) <= 1e-4);
  CHECK(std::abs(h(1, 1) - 6) <= 1e-4);
}

TEST_CASE("finite differences on quartic polynomials") {
  SeededRng rng(5);
  for (int t = 0; t < 20; ++t) {
    double c[5];
    for (double& v : c) v = rng.uniform(-1, 1);
    const double x0 = rng.uniform(-2, 2), y0 = rng.uniform(-2, 2);
    // p(x, y) = c0 x^4 + c1 x^2 y^2 + c2 y^3 + c3 x y + c4 x
    auto p = [&](std::span<const double> v) {
      const double x = v[0], y = v[1];
      return c[0] * x * x * x * x + c[1] * x * x * y * y + c[2] * y * y * y + c[3] * x * y + c[4] * x;
    };
    const double gx = 4 * c[0] * x0 * x0 * x0 + 2 * c[1] * x0 * y0 * y0 + c[3] * y0 + c[4];
    const double gy = 2 * c[1] * x0 * x0 * y0 + 3 * c[2] * y0 * y0 + c[3] * x0;
    const double hxx = 12 * c[0] * x0 * x0 + 2 * c[1] * y0 * y0;
    const double hxy = 4 * c[1] * x0 * y0 + c[3];
    const double hyy = 2 * c[1] * x0 * x0 + 6 * c[2] * y0;
    const std::vector<double> at{x0, y0};
    const auto g = grad_fd(p, at);
    const Matrix h = hessian_fd(p, at);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)); };
    CHECK(close(g[0], gx));
    CHECK(close(g[1], gy));
    CHECK(close(h(0, 0), hxx));
    CHECK(close(h(0, 1), hxy));
    CHECK(close(h(1, 1), hyy));
  }
}

TEST_CASE("invert") {
  CHECK(invert(Matrix(1, 1, std::vector<double>{2.0}))(0, 0) == doctest::Approx(0.5));
  const Matrix id = invert(Matrix::identity(3));
  CHECK((id - Matrix::identity(3)).max_abs() == 0.0);
  const Matrix inv = invert(Matrix(2, 2, std::vector<double>{4, 2, 2, 3}));
  CHECK(inv(0, 0) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(inv(0, 1) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(inv(1, 0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(inv(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

  try {
    invert(Matrix(2, 2, std::vector<double>{1, 2, 2, 4}));
    FAIL("expected Singular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }

  SeededRng rng(3);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int t = 0; t < 5; ++t) {
      Matrix m(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(-1, 1) + (i == j ? n : 0.0);
      CHECK((invert(m) * m - Matrix::identity(n)).max_abs() <= 1e-8);
    }
  }
}

TEST_CASE("symmetric eigenvalues") {
  const Vector ev = symmetric_eigenvalues(Matrix(2, 2, std::vector<double>{2, 1, 1, 2}));
  CHECK(ev[0] == doctest::Approx(1.0));
  CHECK(ev[1] == doctest::Approx(3.0));
}

TEST_CASE("SeededRng determinism and range") {
  SeededRng a(42), b(42), c(43);
  bool differ = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differ |= (x != c.next_u64());
  }
  CHECK(differ);
  SeededRng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  CHECK(mix_seed(7, 0) != mix_seed(7, 1));
  CHECK(SeededRng(7).substream(3).next_u64() == SeededRng(mix_seed(7, 3)).next_u64());
}

TEST_CASE("normal_quantile") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) <= 1e-6);
  CHECK(normal_quantile(0.2) == doctest::Approx(-normal_quantile(0.8)).epsilon(1e-15));
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
  CHECK_THROWS_AS(normal_quantile(1.0), Error);
  for (int i = 1; i <= 1000; ++i) {
    const double u = i / 1001.0;
    CHECK(std::abs(normal_cdf(normal_quantile(u)) - u) <= 1e-12);
    const double x = -6.0 + 12.0 * i / 1001.0;
    CHECK(std::abs(normal_quantile(normal_cdf(x)) - x) <= 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("softplus and sigmoid are stable") {
  CHECK(softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(softplus(-1000.0) >= 0.0);
  CHECK(sigmoid(-1000.0) >= 0.0);
  CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("ks_test") {
  const std::vector<double> one{0.5};
  auto ucdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_test(one, ucdf).statistic == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_test(std::vector<double>{}, ucdf), Error);

  int accepted = 0;
  for (int t = 0; t < 100; ++t) {
    SeededRng rng(mix_seed(99, t));
    std::vector<double> xs(1000);
    for (double& x : xs) x = rng.uniform();
    std::sort(xs.begin(), xs.end());
    accepted += ks_test(xs, ucdf).p_value > 0.01;
  }
  CHECK(accepted >= 95);

  SeededRng rng(2024);
  std::vector<double> xs(1000);
  for (double& x : xs) x = rng.normal();
  std::sort(xs.begin(), xs.end());
  CHECK(ks_test(xs, ucdf).p_value < 1e-6);
}

TEST_CASE("sample moments and quantiles") {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const Moments m = sample_moments(xs);
  CHECK(m.mean == doctest::Approx(3.0));
  CHECK(m.variance == doctest::Approx(2.5));
  CHECK(m.skewness == doctest::Approx(0.0));
  CHECK(sample_quantile(xs, 0.5) == doctest::Approx(3.0));
  CHECK(sample_quantile(xs, 0.25) == doctest::Approx(2.0));
}
