#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ganlab/error.hpp"
#include "ganlab/experiments.hpp"
#include "json.hpp"

using namespace ganlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ganlab_unit_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::NonConvergence;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = ExperimentConfig::from_json(R"({"kind":"consistency","models":["laplace-gaussian"],
    "sample_sizes":[10,100],"repetitions":3,"base_seed":7,"train":{"rounds":20,"lr_generator":0.1}})");
  CHECK(c.kind == ExperimentKind::Consistency);
  CHECK(c.sample_sizes == std::vector<std::size_t>{10, 100});
  CHECK(*c.train.rounds == 20);

  CHECK(code_of([] { ExperimentConfig::from_json(R"({"kind":"clt","colour":1})"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"kind":"clt","train":{"speed":1}})"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"kind":"fit","repetitions":"many"})"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json("{not json"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"kind":"fit"})", ExperimentKind::Clt); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"sample_sizes":[100,10]})", ExperimentKind::Fit); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"models":["cauchy-gaussian"]})", ExperimentKind::Fit); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"repetitions":0})", ExperimentKind::Consistency); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"train":{"lr_generator":-1}})", ExperimentKind::Fit); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { ExperimentConfig::from_json(R"({"models":["mlp-g3-d2"]})", ExperimentKind::Consistency); }) ==
        ErrorCode::ConfigError);

  // Scale: explicit argument beats the file, the file beats the default.
  CHECK(ExperimentConfig::from_json(R"({"scale":"paper"})", ExperimentKind::DepthSweep).repetitions == 30);
  CHECK(ExperimentConfig::from_json(R"({"scale":"paper"})", ExperimentKind::DepthSweep, Scale::Desk).repetitions ==
        10);
  for (auto k : {ExperimentKind::DepthSweep, ExperimentKind::Consistency, ExperimentKind::Clt, ExperimentKind::Fit,
                 ExperimentKind::ThetaStar, ExperimentKind::Variance}) {
    CHECK_NOTHROW(ExperimentConfig::defaults(k).validate());
    CHECK_NOTHROW(ExperimentConfig::defaults(k, Scale::Paper).validate());
    CHECK(parse_experiment_kind(to_string(k)) == k);
  }
}

TEST_CASE("config hash ignores output location") {
  auto a = ExperimentConfig::defaults(ExperimentKind::Consistency);
  auto b = a;
  b.output_dir = "elsewhere";
  b.workers = 5;
  CHECK(a.hash() == b.hash());
  b.base_seed += 1;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 16);
  const auto round_trip = ExperimentConfig::from_json(a.to_json());
  CHECK(round_trip.hash() == a.hash());
}

TEST_CASE("model names") {
  CHECK(experiment_problem("mlp-g3-d5").name == "logistic-mlp-g3-d5");
  CHECK(code_of([] { experiment_problem("mlp-g3"); }) == ErrorCode::UnknownModel);
  CHECK(code_of([] { experiment_problem("mlp-g3-d5x"); }) == ErrorCode::UnknownModel);
  CHECK(default_train_config(experiment_problem("mlp-g2-d2")).optimizer == Optimizer::Adam);
  CHECK(default_train_config(experiment_problem("exponential-uniform")).optimizer == Optimizer::Gradient);
  CHECK(repetition_seed(1, 0) != repetition_seed(1, 1));
}

TEST_CASE("consistency csv: schema, determinism, scheduling independence") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::Consistency);
  cfg.models = {"exponential-uniform"};
  cfg.sample_sizes = {10, 100};
  cfg.repetitions = 6;
  cfg.output_dir = scratch_dir("cons_a").string();
  cfg.workers = 1;
  const auto a = run_consistency(cfg);
  cfg.output_dir = scratch_dir("cons_b").string();
  cfg.workers = 3;
  const auto b = run_consistency(cfg);

  const auto la = lines(a.files.front());
  REQUIRE(la.size() == 2 + 12);
  CHECK(la[0] == "# ganlab consistency config_hash=" + cfg.hash());
  CHECK(la[1] == "model,n,rep,seed,theta_hat,converged");
  CHECK(split(la[2])[0] == "exponential-uniform");
  CHECK(split(la[2])[1] == "10");
  CHECK(split(la.back())[1] == "100");
  CHECK(slurp(a.files.front()) == slurp(b.files.front()));

  const auto summary = nlohmann::json::parse(a.summary_json);
  const auto& m = summary["models"]["exponential-uniform"];
  CHECK(std::abs(m["theta_bar_population"].get<double>() - std::sqrt(6.0)) <= 1e-5);
  CHECK(m["per_n"].size() == 2);
}

TEST_CASE("depth sweep csv") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::DepthSweep);
  cfg.gen_depths = {2};
  cfg.disc_depths = {2, 3};
  cfg.sample_sizes = {200};
  cfg.repetitions = 2;
  cfg.js_draws = 10000;
  cfg.train.rounds = 10;
  cfg.output_dir = scratch_dir("sweep").string();
  const auto out = run_depth_sweep(cfg);
  const auto rows = lines(out.files[0]);
  REQUIRE(rows.size() == 2 + 4);
  CHECK(rows[1] == "gen_depth,disc_depth,rep,seed,js_estimate,converged");
  // Same data seed across depths for a given repetition.
  CHECK(split(rows[2])[3] == split(rows[4])[3]);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const double js = std::stod(split(rows[i])[4]);
    CHECK(js > 0.0);
    CHECK(js < std::log(2.0));
  }
  const auto summary = lines(out.files[1]);
  REQUIRE(summary.size() == 2 + 2);
  CHECK(summary[1] == "gen_depth,disc_depth,reps_ok,mean_js,sd_js");
}

TEST_CASE("fit snapshot grids") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::Fit);
  cfg.models = {"gaussian-gaussian", "exponential-uniform"};
  cfg.output_dir = scratch_dir("fit").string();
  const auto out = run_fit_snapshot(cfg);
  const auto summary = nlohmann::json::parse(out.summary_json);

  // gaussian-gaussian: densities integrate to one, D is flat at 1/2.
  const auto rows = lines(out.files[0]);
  REQUIRE(rows.size() == 2 + 512);
  CHECK(rows[1] == "x,p_star,p_theta_hat,d_alpha_hat,p_theta_init,d_alpha_init");
  double mass = 0.0, prev_x = 0.0, prev_p = 0.0, worst_d = 0.0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto c = split(rows[i]);
    const double x = std::stod(c[0]), pstar = std::stod(c[1]), ph = std::stod(c[2]), d = std::stod(c[3]);
    CHECK(pstar >= 0.0);
    CHECK(ph >= 0.0);
    CHECK(std::stod(c[4]) >= 0.0);
    if (i > 2) mass += 0.5 * (x - prev_x) * (ph + prev_p);
    prev_x = x;
    prev_p = ph;
    if (std::abs(x) <= 2.5758) worst_d = std::max(worst_d, std::abs(d - 0.5));
  }
  CHECK(std::abs(mass - 1.0) <= 0.01);
  CHECK(worst_d <= 0.05);

  // exponential-uniform: fitted and equilibrium uniforms agree on their common support.
  const double th = summary["models"]["exponential-uniform"]["theta_hat"][0].get<double>();
  CHECK(std::abs(1.0 / th - 1.0 / std::sqrt(6.0)) <= 0.1);
  const auto samples = lines(out.files[1]);
  CHECK(samples[1] == "bin_lo,bin_hi,count,hist_density,kde");
}

TEST_CASE("clt synthetic mode") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::Clt);
  cfg.models = {"gaussian-gaussian"};
  cfg.sample_sizes = {1000};
  cfg.repetitions = 150;
  cfg.synthetic = true;
  cfg.mc_n = 20000;
  cfg.output_dir = scratch_dir("clt").string();
  const auto out = run_clt(cfg);
  const auto rows = lines(out.files[0]);
  REQUIRE(rows.size() == 2 + 150);
  CHECK(rows[1] == "model,n,rep,seed,theta_hat,s_standardized");
  const auto summary = nlohmann::json::parse(out.summary_json);
  const auto& per_n = summary["models"]["gaussian-gaussian"]["per_n"][0];
  CHECK(per_n["ks_p_value"].get<double>() > 0.001);
  const auto hist = lines(out.files[1]);
  CHECK(hist.size() == 2 + 30);
  CHECK(code_of([&] {
          auto c = cfg;
          c.repetitions = 50;
          run_clt(c);
        }) == ErrorCode::ConfigError);
}
