#include "ganlab/families.hpp"

#include <algorithm>
#include <cmath>

#include "ganlab/error.hpp"

namespace ganlab {

void project_to_box(std::span<double> params, const Box& box) {
  if (params.size() != box.size()) throw Error(ErrorCode::ShapeMismatch, "parameter/box size");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = std::clamp(params[i], box[i].lo, box[i].hi);
}

bool inside_box(std::span<const double> params, const Box& box) {
  if (params.size() != box.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!box[i].contains(params[i])) return false;
  return true;
}

bool log_space_box(const Box& box) {
  return !box.empty() && std::all_of(box.begin(), box.end(), [](const Interval& iv) { return iv.lo > 0.0; });
}

double discriminator_logit_bound() {
  static const double bound = std::log1p(-kDiscriminatorClamp) - std::log(kDiscriminatorClamp);
  return bound;
}

// ---------------------------------------------------------------------------
// Interfaces
// ---------------------------------------------------------------------------

void GeneratorFamily::accumulate_grad_encoded(std::span<const double> theta, double e, double upstream,
                                              std::span<double> out) const {
  Vector g(dim());
  grad_encoded(theta, e, g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += upstream * g[i];
}

DensityPtr GeneratorFamily::encoded_noise_density() const {
  static const DensityPtr unit = make_density(DensityKind::Uniform, std::vector<double>{0.0, 1.0});
  return unit;
}

Vector GeneratorFamily::grad_theta(std::span<const double> theta, double z) const {
  if (theta.size() != dim()) throw Error(ErrorCode::ShapeMismatch, "generator parameter size");
  Vector g(dim());
  grad_encoded(theta, encode_noise(z), g);
  return g;
}

double DiscriminatorFamily::apply(std::span<const double> alpha, double x) const {
  const double b = discriminator_logit_bound();
  return sigmoid(std::clamp(logit(alpha, x), -b, b));
}

double DiscriminatorFamily::log_d(std::span<const double> alpha, double x) const {
  const double b = discriminator_logit_bound();
  return -softplus(-std::clamp(logit(alpha, x), -b, b));
}

double DiscriminatorFamily::log_1m_d(std::span<const double> alpha, double x) const {
  const double b = discriminator_logit_bound();
  return -softplus(std::clamp(logit(alpha, x), -b, b));
}

Vector DiscriminatorFamily::grad_alpha(std::span<const double> alpha, double x) const {
  if (alpha.size() != dim()) throw Error(ErrorCode::ShapeMismatch, "discriminator parameter size");
  Vector g(dim());
  const double s = logit_grad(alpha, x, g);
  const double b = discriminator_logit_bound();
  if (std::abs(s) >= b) return Vector(dim(), 0.0);
  const double d = sigmoid(s);
  for (double& v : g) v *= d * (1.0 - d);
  return g;
}

void DiscriminatorFamily::accumulate_log_grad(std::span<const double> alpha, std::span<const double> xs,
                                              double weight, bool real, std::span<double> out) const {
  const double b = discriminator_logit_bound();
  Vector g(dim());
  for (double x : xs) {
    const double s = logit_grad(alpha, x, g);
    if (std::abs(s) >= b) continue;
    const double coef = real ? weight * sigmoid(-s) : -weight * sigmoid(s);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += coef * g[i];
  }
}

void DiscriminatorFamily::log_term_dx(std::span<const double> alpha, std::span<const double> xs, bool log_trick,
                                      std::span<double> out) const {
  const double b = discriminator_logit_bound();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double s = logit(alpha, xs[i]);
    if (std::abs(s) >= b) {
      out[i] = 0.0;
      continue;
    }
    out[i] = -(log_trick ? sigmoid(-s) : sigmoid(s)) * logit_dx(alpha, xs[i]);
  }
}

double DiscriminatorFamily::sum_log_terms(std::span<const double> alpha, std::span<const double> xs,
                                          bool real) const {
  double acc = 0.0;
  for (double x : xs) acc += real ? log_d(alpha, x) : log_1m_d(alpha, x);
  return acc;
}

// ---------------------------------------------------------------------------
// Closed-form families
// ---------------------------------------------------------------------------

DensityPtr GaussianScaleGenerator::pushforward(std::span<const double> theta) const {
  const double sigma[] = {theta[0]};
  return make_density(DensityKind::Gaussian, sigma);
}

DensityPtr GaussianScaleGenerator::encoded_noise_density() const {
  static const DensityPtr standard = make_density(DensityKind::Gaussian, std::vector<double>{0.0, 1.0});
  return standard;
}

DensityPtr UniformScaleGenerator::pushforward(std::span<const double> theta) const {
  const double width[] = {theta[0]};
  return make_density(DensityKind::Uniform, width);
}

double GaussianRatioDiscriminator::logit(std::span<const double> alpha, double x) const {
  const double a0 = alpha[0], a1 = alpha[1];
  return -std::log(a1 / a0) - 0.5 * x * x * (1.0 / (a1 * a1) - 1.0 / (a0 * a0));
}

double GaussianRatioDiscriminator::logit_grad(std::span<const double> alpha, double x, std::span<double> out,
                                              double* dx) const {
  const double a0 = alpha[0], a1 = alpha[1];
  const double x2 = x * x;
  out[0] = 1.0 / a0 - x2 / (a0 * a0 * a0);
  out[1] = -1.0 / a1 + x2 / (a1 * a1 * a1);
  if (dx) *dx = logit_dx(alpha, x);
  return logit(alpha, x);
}

double GaussianRatioDiscriminator::logit_dx(std::span<const double> alpha, double x) const {
  const double a0 = alpha[0], a1 = alpha[1];
  return -x * (1.0 / (a1 * a1) - 1.0 / (a0 * a0));
}

std::shared_ptr<const DiscriminatorFamily> GaussianRatioDiscriminator::regular_chart() const {
  return std::make_shared<QuadraticLogisticDiscriminator>();
}

Vector GaussianRatioDiscriminator::to_regular_chart(std::span<const double> alpha) const {
  const double a0 = alpha[0], a1 = alpha[1];
  return {std::log(a1 / a0), 0.5 * (1.0 / (a1 * a1) - 1.0 / (a0 * a0))};
}

std::optional<Vector> GaussianRatioDiscriminator::from_regular_chart(std::span<const double> beta) const {
  // a1 = a0 e^b0 and b1 = (e^(-2 b0) - 1) / (2 a0^2).
  const double b0 = beta[0], b1 = beta[1];
  if (b1 == 0.0) return std::nullopt;
  const double a0_sq = std::expm1(-2.0 * b0) / (2.0 * b1);
  if (!(a0_sq > 0.0) || !std::isfinite(a0_sq)) return std::nullopt;
  const double a0 = std::sqrt(a0_sq);
  return Vector{a0, a0 * std::exp(b0)};
}

// logit = c0 + c1 x^2 and d logit / d alpha = (1/a0 - x^2/a0^3, -1/a1 + x^2/a1^3), so
// the batched gradient only needs sum w and sum w x^2.
void GaussianRatioDiscriminator::accumulate_log_grad(std::span<const double> alpha, std::span<const double> xs,
                                                     double weight, bool real, std::span<double> out) const {
  const double a0 = alpha[0], a1 = alpha[1];
  const double c0 = -std::log(a1 / a0), c1 = -0.5 * (1.0 / (a1 * a1) - 1.0 / (a0 * a0));
  const double b = discriminator_logit_bound();
  double s0 = 0.0, s2 = 0.0;
  for (double x : xs) {
    const double x2 = x * x;
    const double s = c0 + c1 * x2;
    if (std::abs(s) >= b) continue;
    const double w = real ? sigmoid(-s) : -sigmoid(s);
    s0 += w;
    s2 += w * x2;
  }
  out[0] += weight * (s0 / a0 - s2 / (a0 * a0 * a0));
  out[1] += weight * (-s0 / a1 + s2 / (a1 * a1 * a1));
}

void GaussianRatioDiscriminator::log_term_dx(std::span<const double> alpha, std::span<const double> xs,
                                             bool log_trick, std::span<double> out) const {
  const double a0 = alpha[0], a1 = alpha[1];
  const double c0 = -std::log(a1 / a0), c1 = -0.5 * (1.0 / (a1 * a1) - 1.0 / (a0 * a0));
  const double b = discriminator_logit_bound();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double s = c0 + c1 * x * x;
    if (std::abs(s) >= b) {
      out[i] = 0.0;
      continue;
    }
    out[i] = -(log_trick ? sigmoid(-s) : sigmoid(s)) * 2.0 * c1 * x;
  }
}

double GaussianRatioDiscriminator::sum_log_terms(std::span<const double> alpha, std::span<const double> xs,
                                                 bool real) const {
  const double a0 = alpha[0], a1 = alpha[1];
  const double c0 = -std::log(a1 / a0), c1 = -0.5 * (1.0 / (a1 * a1) - 1.0 / (a0 * a0));
  const double b = discriminator_logit_bound();
  double acc = 0.0;
  for (double x : xs) {
    const double s = std::clamp(c0 + c1 * x * x, -b, b);
    acc -= softplus(real ? -s : s);
  }
  return acc;
}

double QuadraticLogisticDiscriminator::logit_grad(std::span<const double> beta, double x, std::span<double> out,
                                                  double* dx) const {
  out[0] = -1.0;
  out[1] = -x * x;
  if (dx) *dx = logit_dx(beta, x);
  return logit(beta, x);
}

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

namespace {
std::vector<std::size_t> widths_for(std::size_t depth, std::size_t hidden) {
  if (depth == 0) throw Error(ErrorCode::InvalidParams, "mlp depth must be >= 1");
  if (hidden == 0) throw Error(ErrorCode::InvalidParams, "mlp hidden width must be >= 1");
  std::vector<std::size_t> w{1};
  for (std::size_t i = 1; i < depth; ++i) w.push_back(hidden);
  w.push_back(1);
  return w;
}

// Scratch space reused across calls on the same thread.
std::vector<double>& scratch(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}
}  // namespace

Mlp::Mlp(std::size_t depth, std::size_t hidden_width, OutputActivation output)
    : Mlp(widths_for(depth, hidden_width), output) {}

Mlp::Mlp(std::vector<std::size_t> widths, OutputActivation output) : widths_(std::move(widths)), output_(output) {
  if (widths_.size() < 2 || widths_.front() != 1 || widths_.back() != 1) {
    throw Error(ErrorCode::InvalidParams, "mlp maps scalars to scalars: widths must start and end with 1");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l + 1] == 0) throw Error(ErrorCode::InvalidParams, "mlp layer width must be >= 1");
    param_offset_.push_back(param_count_);
    param_count_ += widths_[l] * widths_[l + 1] + widths_[l + 1];
  }
  max_width_ = *std::max_element(widths_.begin(), widths_.end());
  for (std::size_t w : widths_) {
    act_offset_.push_back(total_units_);
    total_units_ += w;
  }
}

void Mlp::check(std::span<const double> params) const {
  if (params.size() != param_count_) {
    throw Error(ErrorCode::ShapeMismatch, "mlp expects " + std::to_string(param_count_) + " parameters, got " +
                                              std::to_string(params.size()));
  }
}

double Mlp::pre_output(std::span<const double> params, double input) const {
  check(params);
  auto& buf = scratch(2 * max_width_);
  double* cur = buf.data();
  double* next = buf.data() + max_width_;
  cur[0] = input;
  std::size_t offset = 0;
  const std::size_t layers = depth();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * cur[i];
      next[o] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
    offset += in * out + out;
    std::swap(cur, next);
  }
  return cur[0];
}

double Mlp::backward_pre_output(std::span<const double> params, double input, double upstream,
                                std::span<double> param_grad_accum, double* input_grad) const {
  check(params);
  if (param_grad_accum.size() != param_count_) throw Error(ErrorCode::ShapeMismatch, "mlp gradient buffer size");
  const std::size_t layers = depth();
  auto& buf = scratch(total_units_ + 2 * max_width_);
  // Activations of every layer, packed.
  double* acts = buf.data();
  double* delta = acts + total_units_;
  double* delta_prev = delta + max_width_;
  const auto& act_offset = act_offset_;
  const auto& param_offset = param_offset_;
  acts[0] = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params.data() + param_offset[l];
    const double* b = w + in * out;
    const double* cur = acts + act_offset[l];
    double* next = acts + act_offset[l + 1];
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * cur[i];
      next[o] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
  }
  const double output = acts[act_offset[layers]];
  delta[0] = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params.data() + param_offset[l];
    double* gw = param_grad_accum.data() + param_offset[l];
    double* gb = gw + in * out;
    const double* prev = acts + act_offset[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += d * prev[i];
    }
    for (std::size_t i = 0; i < in; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) acc += w[o * in + i] * delta[o];
      // Layer 0 feeds the raw input; hidden activations are tanh.
      delta_prev[i] = (l > 0) ? acc * (1.0 - prev[i] * prev[i]) : acc;
    }
    std::swap(delta, delta_prev);
  }
  if (input_grad) *input_grad = delta[0];
  return output;
}

Vector Mlp::glorot_init(SeededRng& rng) const {
  Vector params(param_count_, 0.0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t k = 0; k < in * out; ++k) params[offset + k] = rng.uniform(-limit, limit);
    offset += in * out + out;
  }
  return params;
}

double mlp_forward(const Mlp& net, std::span<const double> params, double input) {
  const double pre = net.pre_output(params, input);
  if (net.output_activation() == OutputActivation::Identity) return pre;
  return std::clamp(sigmoid(pre), kDiscriminatorClamp, 1.0 - kDiscriminatorClamp);
}

Vector mlp_backward(const Mlp& net, std::span<const double> params, double input, double upstream) {
  Vector grad(net.param_count(), 0.0);
  double scale = upstream;
  if (net.output_activation() == OutputActivation::Sigmoid) {
    const double pre = net.pre_output(params, input);
    const double s = sigmoid(pre);
    const bool clamped = s <= kDiscriminatorClamp || s >= 1.0 - kDiscriminatorClamp;
    scale = clamped ? 0.0 : upstream * s * (1.0 - s);
  }
  net.backward_pre_output(params, input, scale, grad, nullptr);
  return grad;
}

namespace {
Box uniform_box(std::size_t n, double bound) { return Box(n, Interval(-bound, bound)); }
}  // namespace

MlpGenerator::MlpGenerator(std::size_t depth, std::size_t hidden_width, double weight_bound)
    : net_(depth, hidden_width, OutputActivation::Identity), bound_(weight_bound) {}

std::string MlpGenerator::name() const { return "mlp-generator-depth" + std::to_string(net_.depth()); }

Box MlpGenerator::param_box() const { return uniform_box(net_.param_count(), bound_); }

void MlpGenerator::grad_encoded(std::span<const double> theta, double e, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  net_.backward_pre_output(theta, e, 1.0, out, nullptr);
}

void MlpGenerator::accumulate_grad_encoded(std::span<const double> theta, double e, double upstream,
                                           std::span<double> out) const {
  net_.backward_pre_output(theta, e, upstream, out, nullptr);
}

MlpDiscriminator::MlpDiscriminator(std::size_t depth, std::size_t hidden_width, double weight_bound)
    : net_(depth, hidden_width, OutputActivation::Identity), bound_(weight_bound) {}

std::string MlpDiscriminator::name() const { return "mlp-discriminator-depth" + std::to_string(net_.depth()); }

Box MlpDiscriminator::param_box() const { return uniform_box(net_.param_count(), bound_); }

double MlpDiscriminator::logit_grad(std::span<const double> alpha, double x, std::span<double> out,
                                    double* dx) const {
  std::fill(out.begin(), out.end(), 0.0);
  return net_.backward_pre_output(alpha, x, 1.0, out, dx);
}

double MlpDiscriminator::logit_dx(std::span<const double> alpha, double x) const {
  thread_local Vector sink;
  sink.assign(net_.param_count(), 0.0);
  double dx = 0.0;
  net_.backward_pre_output(alpha, x, 1.0, sink, &dx);
  return dx;
}

std::shared_ptr<const KernelDensity> neural_pushforward_density(const GeneratorFamily& gen,
                                                                std::span<const double> params, SeededRng& rng,
                                                                std::size_t m) {
  if (m < 10000) throw Error(ErrorCode::InvalidParams, "neural pushforward needs m >= 1e4 draws");
  if (params.size() != gen.dim()) throw Error(ErrorCode::ShapeMismatch, "generator parameter size");
  Vector draws(m);
  for (auto& x : draws) x = gen.apply(params, rng.uniform());
  return kde(draws, Silverman{});
}

}  // namespace ganlab
