#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ganlab/densities.hpp"
#include "ganlab/families.hpp"

namespace ganlab {

/// Target density bound to a generator family, a discriminator family and
/// their parameter boxes. Noise is U[0,1].
struct AdversarialProblem {
  std::string name;
  DensityPtr target;
  GeneratorPtr generators;
  DiscriminatorPtr discriminators;
  Box theta_box;
  Box alpha_box;
  DensityPtr noise;
};

/// laplace-gaussian | claw-gaussian | exponential-uniform. Throws UnknownModel.
AdversarialProblem table1_triplet(std::string_view name);
const std::vector<std::string>& table1_names();

/// Well-specified control: target N(0, sigma^2) with the Gaussian scale
/// generator and the Gaussian-ratio discriminator.
AdversarialProblem well_specified_gaussian(double sigma = 1.0);

/// The three closed-form triplets plus "gaussian-gaussian" (the well-specified control).
AdversarialProblem make_model(std::string_view name);

/// Centered logistic target with MLP generator and discriminator.
AdversarialProblem neural_problem(std::size_t gen_depth, std::size_t disc_depth, std::size_t hidden_width = 10,
                                  double logistic_scale = 0.33);

}  // namespace ganlab
