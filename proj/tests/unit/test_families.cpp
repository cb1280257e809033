#include <cmath>

#include "doctest.h"
#include "ganlab/error.hpp"
#include "ganlab/families.hpp"
#include "ganlab/problem.hpp"

using namespace ganlab;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("table1 triplets: boxes and generators") {
  const auto lg = table1_triplet("laplace-gaussian");
  CHECK(lg.theta_box[0].lo == 0.1);
  CHECK(lg.theta_box[0].hi == 1000.0);
  REQUIRE(lg.alpha_box.size() == 2);
  CHECK(lg.alpha_box[1].lo == 0.1);
  const std::vector<double> two{2.0};
  CHECK(lg.generators->apply(two, 0.5) == 0.0);

  const auto eu = table1_triplet("exponential-uniform");
  CHECK(eu.theta_box[0].lo == 0.001);
  CHECK(eu.alpha_box[0].lo == 0.001);
  const std::vector<double> theta{2.5};
  const auto pt = eu.generators->pushforward(theta);
  for (int i = 0; i < 100; ++i) {
    const double x = -0.5 + 3.5 * i / 99.0;
    const double expected = (x >= 0 && x <= 2.5) ? 1 / 2.5 : 0.0;
    CHECK(std::abs(pt->pdf(x) - expected) <= 1e-10);
  }
  CHECK_THROWS_AS(table1_triplet("cauchy-gaussian"), Error);
  CHECK(make_model("gaussian-gaussian").name == "gaussian-gaussian");
}

TEST_CASE("gaussian pushforward matches formula and sampling") {
  const auto lg = table1_triplet("laplace-gaussian");
  const std::vector<double> theta{1.7};
  const auto pt = lg.generators->pushforward(theta);
  for (int i = 0; i < 100; ++i) {
    const double x = -6 + 12 * i / 99.0;
    CHECK(std::abs(pt->pdf(x) - normal_pdf(x / 1.7) / 1.7) <= 1e-10);
  }
  // G(Z) has the pushforward law: KS against its cdf.
  SeededRng rng(4);
  std::vector<double> xs(20000);
  for (double& x : xs) x = lg.generators->apply(theta, rng.uniform());
  std::sort(xs.begin(), xs.end());
  CHECK(ks_test(xs, [&](double x) { return pt->cdf(x); }).p_value > 0.001);
}

TEST_CASE("discriminator with equal alphas is one half") {
  const auto lg = table1_triplet("laplace-gaussian");
  const std::vector<double> alpha{1.3, 1.3};
  for (double x : {-5.0, 0.0, 0.2, 40.0}) CHECK(lg.discriminators->apply(alpha, x) == doctest::Approx(0.5));
}

TEST_CASE("discriminator outputs stay inside (0,1)") {
  const auto lg = table1_triplet("laplace-gaussian");
  SeededRng rng(10);
  for (int t = 0; t < 100000; ++t) {
    const std::vector<double> alpha{std::exp(rng.uniform(std::log(0.1), std::log(1000.0))),
                                    std::exp(rng.uniform(std::log(0.1), std::log(1000.0)))};
    const double x = rng.uniform(-100, 100);
    const double d = lg.discriminators->apply(alpha, x);
    CHECK_MESSAGE((d > 0.0 && d < 1.0), "alpha=", alpha[0], ",", alpha[1], " x=", x);
    CHECK(std::isfinite(lg.discriminators->log_d(alpha, x)));
    CHECK(std::isfinite(lg.discriminators->log_1m_d(alpha, x)));
  }
}

TEST_CASE("table1 gradients match finite differences") {
  SeededRng rng(21);
  for (const auto& name : table1_names()) {
    CAPTURE(name);
    const auto p = table1_triplet(name);
    for (int t = 0; t < 50; ++t) {
      const std::vector<double> theta{rng.uniform(0.3, 4.0)};
      const double z = rng.uniform();
      const auto g = p.generators->grad_theta(theta, z);
      const auto gfd = grad_fd([&](std::span<const double> th) { return p.generators->apply(th, z); }, theta);
      CHECK(rel_err(g[0], gfd[0]) <= 1e-5);

      // Keep D away from the clamp so the derivative is not identically zero.
      const std::vector<double> alpha{rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)};
      const double x = rng.uniform(-3, 3);
      const auto ga = p.discriminators->grad_alpha(alpha, x);
      const auto gafd = grad_fd([&](std::span<const double> a) { return p.discriminators->apply(a, x); }, alpha);
      CHECK(rel_err(ga[0], gafd[0]) <= 1e-5);
      CHECK(rel_err(ga[1], gafd[1]) <= 1e-5);

      Vector lg(2);
      double dx = 0.0;
      p.discriminators->logit_grad(alpha, x, lg, &dx);
      const auto dxfd =
          grad_fd([&](std::span<const double> v) { return p.discriminators->logit(alpha, v[0]); }, std::vector{x});
      CHECK(rel_err(dx, dxfd[0]) <= 1e-5);
    }
  }
}

TEST_CASE("regular chart reproduces the discriminator") {
  const GaussianRatioDiscriminator d(Interval(0.1, 1000));
  const auto chart = d.regular_chart();
  REQUIRE(chart);
  const std::vector<double> alpha{0.8, 2.1};
  const Vector beta = d.to_regular_chart(alpha);
  for (double x : {-2.0, 0.0, 0.5, 3.0}) CHECK(chart->apply(beta, x) == doctest::Approx(d.apply(alpha, x)));
}

TEST_CASE("mlp shapes and zero network") {
  const Mlp g(3, 10, OutputActivation::Identity);
  CHECK(g.param_count() == (1 * 10 + 10) + (10 * 10 + 10) + (10 * 1 + 1));
  const Vector zeros(g.param_count(), 0.0);
  CHECK(mlp_forward(g, zeros, 0.7) == 0.0);
  const Mlp d(2, 10, OutputActivation::Sigmoid);
  CHECK(mlp_forward(d, Vector(d.param_count(), 0.0), -3.0) == 0.5);
  CHECK_THROWS_AS(mlp_forward(d, Vector(3, 0.0), 0.0), Error);
  CHECK_THROWS_AS(mlp_backward(d, Vector(3, 0.0), 0.0, 1.0), Error);
}

TEST_CASE("mlp single linear layer gradient") {
  const Mlp lin(1, 10, OutputActivation::Identity);
  REQUIRE(lin.param_count() == 2);
  const std::vector<double> wb{1.5, -0.25};
  CHECK(mlp_forward(lin, wb, 2.0) == doctest::Approx(2.75));
  const Vector g = mlp_backward(lin, wb, 2.0, 1.0);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(1.0));
  const Vector g0 = mlp_backward(lin, wb, 2.0, 0.0);
  CHECK(g0 == Vector(2, 0.0));
}

TEST_CASE("mlp backprop matches finite differences") {
  SeededRng rng(8);
  for (auto act : {OutputActivation::Identity, OutputActivation::Sigmoid}) {
    for (std::size_t depth = 2; depth <= 5; ++depth) {
      const Mlp net(depth, 10, act);
      for (int t = 0; t < 20; ++t) {
        Vector params = net.glorot_init(rng);
        for (double& v : params) v += rng.uniform(-0.2, 0.2);  // nonzero biases
        const double x = rng.uniform(-2, 2);
        const Vector g = mlp_backward(net, params, x, 1.0);
        const Vector gfd = grad_fd([&](std::span<const double> p) { return mlp_forward(net, p, x); }, params);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, rel_err(g[i], gfd[i]));
        CHECK(worst <= 1e-5);
      }
    }
  }
}

TEST_CASE("mlp discriminator input derivative matches finite differences") {
  SeededRng rng(13);
  const MlpDiscriminator d(3, 10);
  for (int t = 0; t < 20; ++t) {
    const Vector a = d.default_init(rng);
    const double x = rng.uniform(-2, 2);
    const auto fd = grad_fd([&](std::span<const double> v) { return d.logit(a, v[0]); }, std::vector{x});
    CHECK(rel_err(d.logit_dx(a, x), fd[0]) <= 1e-5);
  }
}

TEST_CASE("mlp forward is finite under fuzzing") {
  SeededRng rng(31);
  const Mlp net(4, 10, OutputActivation::Sigmoid);
  for (int t = 0; t < 10000; ++t) {
    Vector p(net.param_count());
    for (double& v : p) v = rng.uniform(-50, 50);
    const double y = mlp_forward(net, p, rng.uniform(-100, 100));
    CHECK((std::isfinite(y) && y > 0.0 && y < 1.0));
  }
}

TEST_CASE("neural pushforward density") {
  const MlpGenerator lin(1, 10);
  SeededRng rng(1);
  const auto k = neural_pushforward_density(lin, std::vector<double>{1.0, 0.0}, rng, 100000);
  CHECK(k->pdf(0.5) >= 0.8);
  CHECK(k->pdf(0.5) <= 1.2);
  CHECK_THROWS_AS(neural_pushforward_density(lin, std::vector<double>{0.0, 0.3}, rng, 20000), Error);
  CHECK_THROWS_AS(neural_pushforward_density(lin, std::vector<double>{1.0, 0.0}, rng, 100), Error);
  const auto k2 = neural_pushforward_density(lin, std::vector<double>{2.0, 0.0}, rng, 100000);
  CHECK(std::abs(density_mean(*k2, 1e-8) - 1.0) <= 0.02);
}

TEST_CASE("box helpers") {
  Vector v{-3.0, 0.5, 2000.0};
  const Box b(3, Interval(0.1, 1000));
  project_to_box(v, b);
  CHECK(v == Vector{0.1, 0.5, 1000.0});
  CHECK(inside_box(v, b));
  CHECK(log_space_box(b));
  CHECK_FALSE(log_space_box(Box(1, Interval(-1, 1))));
}
