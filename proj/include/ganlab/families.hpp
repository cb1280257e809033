#pragma once

// Parametric generator and discriminator families: the closed-form scale
// families with Gaussian-ratio discriminators, and small tanh MLPs with
// hand-written backpropagation.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ganlab/densities.hpp"
#include "ganlab/numerics.hpp"

namespace ganlab {

/// Per-coordinate parameter box.
using Box = std::vector<Interval>;

/// Clips `params` into `box` in place.
void project_to_box(std::span<double> params, const Box& box);
bool inside_box(std::span<const double> params, const Box& box);
/// Positive boxes are optimized in log coordinates.
bool log_space_box(const Box& box);

inline constexpr double kDiscriminatorClamp = 1e-12;
/// logit(1 - 1e-12); discriminator logits are clamped to +-this value.
double discriminator_logit_bound();

class GeneratorFamily {
 public:
  virtual ~GeneratorFamily() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Box param_box() const = 0;

  /// Maps raw noise z ~ U[0,1] to the feature the generator consumes
  /// (Phi^-1(z) for the Gaussian scale family, z itself otherwise). Training
  /// encodes the fixed noise sample once.
  virtual double encode_noise(double z) const { return z; }
  virtual double apply_encoded(std::span<const double> theta, double e) const = 0;
  virtual void grad_encoded(std::span<const double> theta, double e, std::span<double> out) const = 0;
  /// Back-propagates `upstream` (dLoss/dG) into `out` (accumulated, not overwritten).
  virtual void accumulate_grad_encoded(std::span<const double> theta, double e, double upstream,
                                       std::span<double> out) const;

  /// Distribution of encode_noise(Z); population expectations over the noise
  /// are taken against it.
  virtual DensityPtr encoded_noise_density() const;

  double apply(std::span<const double> theta, double z) const { return apply_encoded(theta, encode_noise(z)); }
  Vector grad_theta(std::span<const double> theta, double z) const;

  /// Closed-form density of G_theta(Z); nullptr when the family is sample-only.
  virtual DensityPtr pushforward(std::span<const double> /*theta*/) const { return nullptr; }

  /// Default initial parameters when a run does not supply any.
  virtual Vector default_init(SeededRng& rng) const = 0;
};

/// D_alpha(x) = sigmoid(logit_alpha(x)), clamped to [1e-12, 1 - 1e-12].
class DiscriminatorFamily {
 public:
  virtual ~DiscriminatorFamily() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Box param_box() const = 0;

  virtual double logit(std::span<const double> alpha, double x) const = 0;
  /// Writes d logit / d alpha into `out` (and d logit / dx into `dx` when
  /// non-null); returns the logit.
  virtual double logit_grad(std::span<const double> alpha, double x, std::span<double> out,
                            double* dx = nullptr) const = 0;
  virtual double logit_dx(std::span<const double> alpha, double x) const = 0;

  // Batched forms for the trainer. Clamped points contribute no gradient.
  /// out += weight * sum_i grad_alpha ln D(x_i) (real) or ln(1 - D(x_i)) (fake).
  virtual void accumulate_log_grad(std::span<const double> alpha, std::span<const double> xs, double weight,
                                   bool real, std::span<double> out) const;
  /// out_i = d/dx ln(1 - D(x_i)), or d/dx [-ln D(x_i)] with the log trick.
  virtual void log_term_dx(std::span<const double> alpha, std::span<const double> xs, bool log_trick,
                           std::span<double> out) const;
  /// sum_i ln D(x_i) (real) or sum_i ln(1 - D(x_i)).
  virtual double sum_log_terms(std::span<const double> alpha, std::span<const double> xs, bool real) const;

  double apply(std::span<const double> alpha, double x) const;
  double log_d(std::span<const double> alpha, double x) const;
  double log_1m_d(std::span<const double> alpha, double x) const;
  Vector grad_alpha(std::span<const double> alpha, double x) const;

  /// Identifiable reparametrization used for second-order asymptotics, when the
  /// native parameters are locally degenerate. nullptr means the native chart
  /// is already regular.
  virtual std::shared_ptr<const DiscriminatorFamily> regular_chart() const { return nullptr; }
  virtual Vector to_regular_chart(std::span<const double> alpha) const {
    return Vector(alpha.begin(), alpha.end());
  }
  /// Inverse of to_regular_chart; nullopt when the chart point has no
  /// (unique) native preimage.
  virtual std::optional<Vector> from_regular_chart(std::span<const double> beta) const {
    return Vector(beta.begin(), beta.end());
  }

  virtual Vector default_init(SeededRng& rng) const = 0;
};

using GeneratorPtr = std::shared_ptr<const GeneratorFamily>;
using DiscriminatorPtr = std::shared_ptr<const DiscriminatorFamily>;

// ---------------------------------------------------------------------------
// Closed-form families
// ---------------------------------------------------------------------------

/// G_theta(z) = theta * Phi^-1(z); pushforward N(0, theta^2).
class GaussianScaleGenerator final : public GeneratorFamily {
 public:
  explicit GaussianScaleGenerator(Interval box) : box_(box) {}
  std::string name() const override { return "gaussian-scale"; }
  std::size_t dim() const override { return 1; }
  Box param_box() const override { return {box_}; }
  double encode_noise(double z) const override { return normal_quantile(z); }
  DensityPtr encoded_noise_density() const override;
  double apply_encoded(std::span<const double> theta, double e) const override { return theta[0] * e; }
  void grad_encoded(std::span<const double>, double e, std::span<double> out) const override { out[0] = e; }
  DensityPtr pushforward(std::span<const double> theta) const override;
  Vector default_init(SeededRng&) const override { return {1.0}; }

 private:
  Interval box_;
};

/// G_theta(z) = theta * z; pushforward U[0, theta].
class UniformScaleGenerator final : public GeneratorFamily {
 public:
  explicit UniformScaleGenerator(Interval box) : box_(box) {}
  std::string name() const override { return "uniform-scale"; }
  std::size_t dim() const override { return 1; }
  Box param_box() const override { return {box_}; }
  double apply_encoded(std::span<const double> theta, double e) const override { return theta[0] * e; }
  void grad_encoded(std::span<const double>, double e, std::span<double> out) const override { out[0] = e; }
  DensityPtr pushforward(std::span<const double> theta) const override;
  Vector default_init(SeededRng&) const override { return {1.0}; }

 private:
  Interval box_;
};

/// D_alpha(x) = 1 / (1 + (a1/a0) exp(x^2/2 (a1^-2 - a0^-2))), i.e. the ratio
/// p_{a1} / (p_{a1} + p_{a0}) of centered Gaussian densities.
class GaussianRatioDiscriminator final : public DiscriminatorFamily {
 public:
  explicit GaussianRatioDiscriminator(Interval per_coordinate_box) : box_(per_coordinate_box) {}
  std::string name() const override { return "gaussian-ratio"; }
  std::size_t dim() const override { return 2; }
  Box param_box() const override { return {box_, box_}; }
  double logit(std::span<const double> alpha, double x) const override;
  double logit_grad(std::span<const double> alpha, double x, std::span<double> out,
                    double* dx = nullptr) const override;
  double logit_dx(std::span<const double> alpha, double x) const override;
  std::shared_ptr<const DiscriminatorFamily> regular_chart() const override;
  /// (ln(a1/a0), (a1^-2 - a0^-2)/2).
  Vector to_regular_chart(std::span<const double> alpha) const override;
  std::optional<Vector> from_regular_chart(std::span<const double> beta) const override;
  void accumulate_log_grad(std::span<const double> alpha, std::span<const double> xs, double weight, bool real,
                           std::span<double> out) const override;
  void log_term_dx(std::span<const double> alpha, std::span<const double> xs, bool log_trick,
                   std::span<double> out) const override;
  double sum_log_terms(std::span<const double> alpha, std::span<const double> xs, bool real) const override;
  Vector default_init(SeededRng&) const override { return {1.0, 2.0}; }

 private:
  Interval box_;
};

/// D_beta(x) = sigmoid(-beta0 - beta1 x^2): the identifiable chart of the
/// Gaussian-ratio family (logistic regression on (1, x^2)).
class QuadraticLogisticDiscriminator final : public DiscriminatorFamily {
 public:
  std::string name() const override { return "quadratic-logistic"; }
  std::size_t dim() const override { return 2; }
  Box param_box() const override { return {Interval(), Interval()}; }
  double logit(std::span<const double> beta, double x) const override { return -beta[0] - beta[1] * x * x; }
  double logit_grad(std::span<const double> beta, double x, std::span<double> out,
                    double* dx = nullptr) const override;
  double logit_dx(std::span<const double> beta, double x) const override { return -2.0 * beta[1] * x; }
  Vector default_init(SeededRng&) const override { return {0.0, 0.0}; }
};

// ---------------------------------------------------------------------------
// Multilayer perceptrons
// ---------------------------------------------------------------------------

enum class OutputActivation { Identity, Sigmoid };

/// Fully connected scalar-to-scalar network with tanh hidden layers. Parameters
/// are flattened layer by layer as W (out x in, row-major) followed by b.
class Mlp {
 public:
  /// `depth` affine layers; depth 1 is a single linear map.
  Mlp(std::size_t depth, std::size_t hidden_width, OutputActivation output);
  explicit Mlp(std::vector<std::size_t> widths, OutputActivation output);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t depth() const { return widths_.size() - 1; }
  OutputActivation output_activation() const { return output_; }
  std::size_t param_count() const { return param_count_; }

  /// Output before the output activation.
  double pre_output(std::span<const double> params, double input) const;

  /// Accumulates the gradient of upstream * pre_output with respect to params
  /// (and input); returns pre_output.
  double backward_pre_output(std::span<const double> params, double input, double upstream,
                           std::span<double> param_grad_accum, double* input_grad) const;

  /// Glorot-uniform weights, zero biases.
  Vector glorot_init(SeededRng& rng) const;

 private:
  void check(std::span<const double> params) const;

  std::vector<std::size_t> widths_;
  OutputActivation output_;
  std::size_t param_count_ = 0;
  std::size_t max_width_ = 1;
  std::size_t total_units_ = 0;
  std::vector<std::size_t> act_offset_;
  std::vector<std::size_t> param_offset_;
};

/// Network output after the output activation; sigmoid outputs are clamped to
/// [1e-12, 1 - 1e-12].
double mlp_forward(const Mlp& net, std::span<const double> params, double input);
/// Exact gradient of upstream * mlp_forward with respect to params.
Vector mlp_backward(const Mlp& net, std::span<const double> params, double input, double upstream);

class MlpGenerator final : public GeneratorFamily {
 public:
  MlpGenerator(std::size_t depth, std::size_t hidden_width, double weight_bound = 50.0);
  std::string name() const override;
  std::size_t dim() const override { return net_.param_count(); }
  Box param_box() const override;
  double apply_encoded(std::span<const double> theta, double e) const override {
    return net_.pre_output(theta, e);
  }
  void grad_encoded(std::span<const double> theta, double e, std::span<double> out) const override;
  void accumulate_grad_encoded(std::span<const double> theta, double e, double upstream,
                               std::span<double> out) const override;
  Vector default_init(SeededRng& rng) const override { return net_.glorot_init(rng); }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
  double bound_;
};

class MlpDiscriminator final : public DiscriminatorFamily {
 public:
  MlpDiscriminator(std::size_t depth, std::size_t hidden_width, double weight_bound = 50.0);
  std::string name() const override;
  std::size_t dim() const override { return net_.param_count(); }
  Box param_box() const override;
  double logit(std::span<const double> alpha, double x) const override { return net_.pre_output(alpha, x); }
  double logit_grad(std::span<const double> alpha, double x, std::span<double> out,
                    double* dx = nullptr) const override;
  double logit_dx(std::span<const double> alpha, double x) const override;
  Vector default_init(SeededRng& rng) const override { return net_.glorot_init(rng); }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
  double bound_;
};

/// KDE (Silverman) of m draws of G_theta(Z), Z ~ U[0,1]. Requires m >= 1e4.
std::shared_ptr<const KernelDensity> neural_pushforward_density(const GeneratorFamily& gen,
                                                                std::span<const double> params, SeededRng& rng,
                                                                std::size_t m);

}  // namespace ganlab
