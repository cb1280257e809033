#include "ganlab/problem.hpp"

#include "ganlab/error.hpp"

namespace ganlab {

namespace {

DensityPtr unit_noise() {
  static const DensityPtr u = make_density(DensityKind::Uniform, std::vector<double>{0.0, 1.0});
  return u;
}

AdversarialProblem scale_problem(std::string name, DensityPtr target, bool gaussian_generator, Interval box) {
  AdversarialProblem p;
  p.name = std::move(name);
  p.target = std::move(target);
  if (gaussian_generator) {
    p.generators = std::make_shared<GaussianScaleGenerator>(box);
  } else {
    p.generators = std::make_shared<UniformScaleGenerator>(box);
  }
  p.discriminators = std::make_shared<GaussianRatioDiscriminator>(box);
  p.theta_box = p.generators->param_box();
  p.alpha_box = p.discriminators->param_box();
  p.noise = unit_noise();
  return p;
}

}  // namespace

const std::vector<std::string>& table1_names() {
  static const std::vector<std::string> names{"laplace-gaussian", "claw-gaussian", "exponential-uniform"};
  return names;
}

AdversarialProblem table1_triplet(std::string_view name) {
  const Interval gaussian_box(0.1, 1000.0);
  if (name == "laplace-gaussian") {
    return scale_problem("laplace-gaussian", make_density(DensityKind::Laplace, std::vector<double>{1.5}), true,
                         gaussian_box);
  }
  if (name == "claw-gaussian") {
    return scale_problem("claw-gaussian", make_density(DensityKind::Claw), true, gaussian_box);
  }
  if (name == "exponential-uniform") {
    return scale_problem("exponential-uniform", make_density(DensityKind::Exponential, std::vector<double>{1.0}),
                         false, Interval(0.001, 1000.0));
  }
  throw Error(ErrorCode::UnknownModel, "unknown model '" + std::string(name) + "'");
}

AdversarialProblem well_specified_gaussian(double sigma) {
  return scale_problem("gaussian-gaussian", make_density(DensityKind::Gaussian, std::vector<double>{0.0, sigma}),
                       true, Interval(0.1, 1000.0));
}

AdversarialProblem make_model(std::string_view name) {
  if (name == "gaussian-gaussian") return well_specified_gaussian(1.0);
  return table1_triplet(name);
}

AdversarialProblem neural_problem(std::size_t gen_depth, std::size_t disc_depth, std::size_t hidden_width,
                                  double logistic_scale) {
  AdversarialProblem p;
  p.name = "logistic-mlp-g" + std::to_string(gen_depth) + "-d" + std::to_string(disc_depth);
  p.target = make_density(DensityKind::Logistic, std::vector<double>{logistic_scale});
  p.generators = std::make_shared<MlpGenerator>(gen_depth, hidden_width);
  p.discriminators = std::make_shared<MlpDiscriminator>(disc_depth, hidden_width);
  p.theta_box = p.generators->param_box();
  p.alpha_box = p.discriminators->param_box();
  p.noise = unit_noise();
  return p;
}

}  // namespace ganlab
