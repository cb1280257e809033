#include "ganlab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ganlab/error.hpp"

namespace ganlab {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& field) {
  if (!ok) throw Error(ErrorCode::InvalidParams, field);
}

class Gaussian final : public Density {
 public:
  Gaussian(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    require(std::isfinite(mu), "gaussian mean must be finite");
    require(sigma > 0.0 && std::isfinite(sigma), "gaussian sigma must be > 0");
  }
  double pdf(double x) const override {
    const double z = (x - mu_) / sigma_;
    return std::exp(-0.5 * z * z) / (kSqrt2Pi * sigma_);
  }
  double log_pdf(double x) const override {
    const double z = (x - mu_) / sigma_;
    return -0.5 * z * z - std::log(kSqrt2Pi * sigma_);
  }
  Interval support() const override { return {}; }
  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return normal_cdf((x - mu_) / sigma_); }
  bool has_quantile() const override { return true; }
  double quantile(double u) const override { return mu_ + sigma_ * normal_quantile(u); }
  std::vector<double> breakpoints() const override { return {mu_}; }
  std::string describe() const override { return "gaussian(" + fmt_num(mu_) + "," + fmt_num(sigma_) + ")"; }

 private:
  double mu_, sigma_;
};

class Laplace final : public Density {
 public:
  explicit Laplace(double b) : b_(b) { require(b > 0.0 && std::isfinite(b), "laplace scale b must be > 0"); }
  double pdf(double x) const override { return std::exp(-std::abs(x) / b_) / (2.0 * b_); }
  double log_pdf(double x) const override { return -std::abs(x) / b_ - std::log(2.0 * b_); }
  Interval support() const override { return {}; }
  bool has_cdf() const override { return true; }
  double cdf(double x) const override {
    return x < 0.0 ? 0.5 * std::exp(x / b_) : 1.0 - 0.5 * std::exp(-x / b_);
  }
  bool has_quantile() const override { return true; }
  double quantile(double u) const override {
    return u < 0.5 ? b_ * std::log(2.0 * u) : -b_ * std::log(2.0 * (1.0 - u));
  }
  std::vector<double> breakpoints() const override { return {0.0}; }
  std::string describe() const override { return "laplace(" + fmt_num(b_) + ")"; }

 private:
  double b_;
};

class Logistic final : public Density {
 public:
  explicit Logistic(double s) : s_(s) { require(s > 0.0 && std::isfinite(s), "logistic scale s must be > 0"); }
  double pdf(double x) const override {
    const double e = std::exp(-std::abs(x) / s_);
    return e / (s_ * (1.0 + e) * (1.0 + e));
  }
  Interval support() const override { return {}; }
  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return sigmoid(x / s_); }
  bool has_quantile() const override { return true; }
  double quantile(double u) const override { return s_ * (std::log(u) - std::log1p(-u)); }
  std::vector<double> breakpoints() const override { return {0.0}; }
  std::string describe() const override { return "logistic(" + fmt_num(s_) + ")"; }

 private:
  double s_;
};

class Exponential final : public Density {
 public:
  explicit Exponential(double rate) : rate_(rate) {
    require(rate > 0.0 && std::isfinite(rate), "exponential rate lambda must be > 0");
  }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
  double log_pdf(double x) const override { return x < 0.0 ? -kInf : std::log(rate_) - rate_ * x; }
  Interval support() const override { return {0.0, kInf}; }
  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return x < 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
  bool has_quantile() const override { return true; }
  double quantile(double u) const override { return -std::log1p(-u) / rate_; }
  std::vector<double> breakpoints() const override { return {0.0}; }
  std::string describe() const override { return "exponential(" + fmt_num(rate_) + ")"; }

 private:
  double rate_;
};

class Uniform final : public Density {
 public:
  Uniform(double lo, double hi) : lo_(lo), hi_(hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "uniform requires finite lo < hi");
  }
  double pdf(double x) const override { return (x >= lo_ && x <= hi_) ? 1.0 / (hi_ - lo_) : 0.0; }
  double log_pdf(double x) const override { return (x >= lo_ && x <= hi_) ? -std::log(hi_ - lo_) : -kInf; }
  Interval support() const override { return {lo_, hi_}; }
  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0); }
  bool has_quantile() const override { return true; }
  double quantile(double u) const override { return lo_ + u * (hi_ - lo_); }
  std::vector<double> breakpoints() const override { return {lo_, hi_}; }
  std::string describe() const override { return "uniform(" + fmt_num(lo_) + "," + fmt_num(hi_) + ")"; }

 private:
  double lo_, hi_;
};

class Mixture final : public Density {
 public:
  Mixture(std::vector<double> weights, std::vector<DensityPtr> components, std::string label)
      : weights_(std::move(weights)), components_(std::move(components)), label_(std::move(label)) {
    require(!weights_.empty() && weights_.size() == components_.size(), "mixture weights/components size");
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      require(weights_[i] >= 0.0 && std::isfinite(weights_[i]), "mixture weights must be nonnegative");
      require(components_[i] != nullptr, "mixture component is null");
      total += weights_[i];
    }
    require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  }
  double pdf(double x) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) v += weights_[i] * components_[i]->pdf(x);
    return v;
  }
  Interval support() const override {
    double lo = kInf, hi = -kInf;
    for (const auto& c : components_) {
      lo = std::min(lo, c->support().lo);
      hi = std::max(hi, c->support().hi);
    }
    return {lo, hi};
  }
  bool has_cdf() const override {
    return std::all_of(components_.begin(), components_.end(), [](const DensityPtr& c) { return c->has_cdf(); });
  }
  double cdf(double x) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) v += weights_[i] * components_[i]->cdf(x);
    return v;
  }
  Vector sample(SeededRng& rng, std::size_t n) const override {
    Vector out(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform() * cumulative_.back();
      std::size_t idx = static_cast<std::size_t>(
          std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
      idx = std::min(idx, components_.size() - 1);
      const auto& c = components_[idx];
      out[k] = c->has_quantile() ? c->quantile(rng.uniform()) : c->sample(rng, 1)[0];
    }
    return out;
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> bps;
    for (const auto& c : components_) {
      auto b = c->breakpoints();
      bps.insert(bps.end(), b.begin(), b.end());
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
  }
  std::string describe() const override { return label_; }

 private:
  std::vector<double> weights_;
  std::vector<DensityPtr> components_;
  std::vector<double> cumulative_;
  std::string label_;
};

class Truncated final : public Density {
 public:
  Truncated(DensityPtr base, Interval window) : base_(std::move(base)), window_(window) {
    require(base_ != nullptr, "truncated base is null");
    require(window_.finite(), "truncation window must be finite");
    if (base_->has_cdf()) {
      mass_ = base_->cdf(window_.hi) - base_->cdf(window_.lo);
    } else {
      auto bps = breakpoints();
      mass_ = integrate([this](double x) { return base_->pdf(x); }, window_, 1e-12, bps);
    }
    require(mass_ > 0.0, "truncation window carries no mass");
  }
  double pdf(double x) const override { return window_.contains(x) ? base_->pdf(x) / mass_ : 0.0; }
  Interval support() const override { return window_; }
  bool has_cdf() const override { return base_->has_cdf(); }
  double cdf(double x) const override {
    if (x <= window_.lo) return 0.0;
    if (x >= window_.hi) return 1.0;
    return (base_->cdf(x) - base_->cdf(window_.lo)) / mass_;
  }
  Vector sample(SeededRng& rng, std::size_t n) const override {
    // Rejection from the base; windows used here hold a sizeable share of the mass.
    Vector out;
    out.reserve(n);
    while (out.size() < n) {
      for (double x : base_->sample(rng, n - out.size()))
        if (window_.contains(x)) out.push_back(x);
    }
    return out;
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> bps{window_.lo, window_.hi};
    for (double b : base_->breakpoints())
      if (window_.contains(b)) bps.push_back(b);
    return bps;
  }
  std::string describe() const override {
    return "truncated(" + base_->describe() + ",[" + fmt_num(window_.lo) + "," + fmt_num(window_.hi) + "])";
  }

 private:
  DensityPtr base_;
  Interval window_;
  double mass_ = 1.0;
};

}  // namespace

double Density::log_pdf(double x) const {
  const double p = pdf(x);
  return p > 0.0 ? std::log(p) : -kInf;
}

double Density::cdf(double) const { throw Error(ErrorCode::InvalidParams, describe() + " has no cdf"); }

double Density::quantile(double) const { throw Error(ErrorCode::InvalidParams, describe() + " has no quantile"); }

Vector Density::sample(SeededRng& rng, std::size_t n) const {
  if (!has_quantile()) throw Error(ErrorCode::InvalidParams, describe() + " cannot be sampled by inversion");
  Vector out(n);
  for (auto& x : out) x = quantile(rng.uniform());
  return out;
}

DensityKind parse_density_kind(std::string_view name) {
  if (name == "gaussian" || name == "normal") return DensityKind::Gaussian;
  if (name == "laplace") return DensityKind::Laplace;
  if (name == "logistic") return DensityKind::Logistic;
  if (name == "exponential") return DensityKind::Exponential;
  if (name == "uniform") return DensityKind::Uniform;
  if (name == "claw") return DensityKind::Claw;
  if (name == "mixture") return DensityKind::FiniteMixture;
  throw Error(ErrorCode::InvalidParams, "unknown density kind '" + std::string(name) + "'");
}

DensityPtr make_density(DensityKind kind, std::span<const double> params) {
  auto want = [&](std::size_t n, const char* what) {
    if (params.size() != n) throw Error(ErrorCode::InvalidParams, what);
  };
  switch (kind) {
    case DensityKind::Gaussian:
      if (params.size() == 1) return std::make_shared<Gaussian>(0.0, params[0]);
      want(2, "gaussian expects {mu, sigma} or {sigma}");
      return std::make_shared<Gaussian>(params[0], params[1]);
    case DensityKind::Laplace:
      want(1, "laplace expects {b}");
      return std::make_shared<Laplace>(params[0]);
    case DensityKind::Logistic:
      want(1, "logistic expects {s}");
      return std::make_shared<Logistic>(params[0]);
    case DensityKind::Exponential:
      want(1, "exponential expects {lambda}");
      return std::make_shared<Exponential>(params[0]);
    case DensityKind::Uniform:
      if (params.size() == 1) {
        require(params[0] > 0.0, "uniform theta must be > 0");
        return std::make_shared<Uniform>(0.0, params[0]);
      }
      want(2, "uniform expects {theta} or {lo, hi}");
      return std::make_shared<Uniform>(params[0], params[1]);
    case DensityKind::Claw: {
      want(0, "claw takes no parameters");
      std::vector<DensityPtr> comps{std::make_shared<Gaussian>(0.0, 1.0)};
      std::vector<double> weights{0.5};
      for (double mu : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        comps.push_back(std::make_shared<Gaussian>(mu, 0.1));
        weights.push_back(0.1);
      }
      return std::make_shared<Mixture>(std::move(weights), std::move(comps), "claw");
    }
    case DensityKind::FiniteMixture:
      throw Error(ErrorCode::InvalidParams, "mixtures are built with make_mixture");
  }
  throw Error(ErrorCode::InvalidParams, "unhandled density kind");
}

DensityPtr make_mixture(std::vector<double> weights, std::vector<DensityPtr> components) {
  std::string label = "mixture(";
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) label += ",";
    label += (i < weights.size() ? fmt_num(weights[i]) : "?") + "*" + (components[i] ? components[i]->describe() : "null");
  }
  label += ")";
  return std::make_shared<Mixture>(std::move(weights), std::move(components), std::move(label));
}

DensityPtr make_truncated(DensityPtr base, Interval window) {
  return std::make_shared<Truncated>(std::move(base), window);
}

double total_mass(const Density& d, double rel_tol) {
  const auto bps = d.breakpoints();
  return integrate([&d](double x) { return d.pdf(x); }, d.support(), rel_tol, bps);
}

double density_mean(const Density& d, double rel_tol) {
  const auto bps = d.breakpoints();
  return integrate([&d](double x) { return x * d.pdf(x); }, d.support(), rel_tol, bps);
}

// ---------------------------------------------------------------------------
// Kernel density estimation
// ---------------------------------------------------------------------------

namespace {
constexpr double kKernelReach = 9.0;  // exp(-40.5) is far below quadrature relevance

// Exact test; the summed variance of identical values can round to ~1e-34.
bool no_spread(std::span<const double> xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *lo == *hi;
}
}

double silverman_bandwidth(std::span<const double> sample) {
  if (sample.size() < 2) throw Error(ErrorCode::DegenerateSample, "kde needs at least two points");
  if (no_spread(sample)) throw Error(ErrorCode::DegenerateSample, "sample has zero standard deviation");
  const double sd = std::sqrt(sample_moments(sample).variance);
  std::vector<double> v(sample.begin(), sample.end());
  const double iqr = sample_quantile(v, 0.75) - sample_quantile(v, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

KernelDensity::KernelDensity(std::vector<double> sample, double bandwidth)
    : points_(std::move(sample)), h_(bandwidth) {
  if (points_.size() < 2) throw Error(ErrorCode::DegenerateSample, "kde needs at least two points");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error(ErrorCode::InvalidParams, "kde bandwidth must be > 0");
  for (double x : points_)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidParams, "kde sample contains non-finite values");
  std::sort(points_.begin(), points_.end());
}

double KernelDensity::pdf(double x) const {
  const auto first = std::lower_bound(points_.begin(), points_.end(), x - kKernelReach * h_);
  const auto last = std::upper_bound(first, points_.end(), x + kKernelReach * h_);
  double acc = 0.0;
  for (auto it = first; it != last; ++it) {
    const double z = (x - *it) / h_;
    acc += std::exp(-0.5 * z * z);
  }
  return acc / (static_cast<double>(points_.size()) * h_ * kSqrt2Pi);
}

double KernelDensity::cdf(double x) const {
  const auto first = std::lower_bound(points_.begin(), points_.end(), x - kKernelReach * h_);
  const auto last = std::upper_bound(first, points_.end(), x + kKernelReach * h_);
  double acc = static_cast<double>(first - points_.begin());
  for (auto it = first; it != last; ++it) acc += normal_cdf((x - *it) / h_);
  return acc / static_cast<double>(points_.size());
}

Interval KernelDensity::support() const {
  return {points_.front() - (kKernelReach + 1.0) * h_, points_.back() + (kKernelReach + 1.0) * h_};
}

Vector KernelDensity::sample(SeededRng& rng, std::size_t n) const {
  Vector out(n);
  for (auto& x : out) {
    auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(points_.size()));
    idx = std::min(idx, points_.size() - 1);
    x = points_[idx] + h_ * rng.normal();
  }
  return out;
}

std::string KernelDensity::describe() const {
  return "kde(n=" + std::to_string(points_.size()) + ",h=" + fmt_num(h_) + ")";
}

std::shared_ptr<const KernelDensity> kde(std::span<const double> sample, Bandwidth bandwidth) {
  if (sample.size() < 2) throw Error(ErrorCode::DegenerateSample, "kde needs at least two points");
  double h;
  if (std::holds_alternative<Silverman>(bandwidth)) {
    h = silverman_bandwidth(sample);
  } else {
    h = std::get<double>(bandwidth);
    if (no_spread(sample)) throw Error(ErrorCode::DegenerateSample, "sample has zero standard deviation");
  }
  return std::make_shared<KernelDensity>(std::vector<double>(sample.begin(), sample.end()), h);
}

}  // namespace ganlab
