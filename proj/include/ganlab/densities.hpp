#pragma once

// Catalog of one-dimensional densities used as targets and as generator
// pushforwards, plus Gaussian kernel density estimation.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ganlab/numerics.hpp"

namespace ganlab {

class Density {
 public:
  virtual ~Density() = default;

  virtual double pdf(double x) const = 0;
  virtual double log_pdf(double x) const;
  virtual Interval support() const = 0;

  virtual bool has_cdf() const { return false; }
  /// Throws InvalidParams when the density has no cdf.
  virtual double cdf(double x) const;
  virtual bool has_quantile() const { return false; }
  virtual double quantile(double u) const;

  /// Inverse-cdf draws where a quantile exists; subclasses override otherwise.
  virtual Vector sample(SeededRng& rng, std::size_t n) const;

  /// Kinks, jumps and mode locations; quadrature splits and anchors its tail
  /// scan there.
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual std::string describe() const = 0;
};

using DensityPtr = std::shared_ptr<const Density>;

enum class DensityKind { Gaussian, Laplace, Logistic, Exponential, Uniform, Claw, FiniteMixture };

DensityKind parse_density_kind(std::string_view name);

/// Parameter conventions: Gaussian {mu, sigma} or {sigma}; Laplace {b};
/// Logistic {s}; Exponential {lambda}; Uniform {theta} for U[0, theta] or
/// {lo, hi}; Claw {}. FiniteMixture must go through make_mixture.
DensityPtr make_density(DensityKind kind, std::span<const double> params = {});
DensityPtr make_mixture(std::vector<double> weights, std::vector<DensityPtr> components);

/// Restriction of `base` to `window`, renormalized.
DensityPtr make_truncated(DensityPtr base, Interval window);

inline Vector sample(const Density& d, SeededRng& rng, std::size_t n) { return d.sample(rng, n); }

/// Integral of the pdf over its support, using the density's breakpoints.
double total_mass(const Density& d, double rel_tol = 1e-10);
double density_mean(const Density& d, double rel_tol = 1e-10);

struct Silverman {};
using Bandwidth = std::variant<double, Silverman>;

double silverman_bandwidth(std::span<const double> sample);

class KernelDensity final : public Density {
 public:
  KernelDensity(std::vector<double> sample, double bandwidth);

  double pdf(double x) const override;
  Interval support() const override;
  bool has_cdf() const override { return true; }
  double cdf(double x) const override;
  Vector sample(SeededRng& rng, std::size_t n) const override;
  std::string describe() const override;

  double bandwidth() const { return h_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;  // sorted
  double h_;
};

/// Gaussian-kernel density estimate. Throws DegenerateSample on zero spread.
std::shared_ptr<const KernelDensity> kde(std::span<const double> sample, Bandwidth bandwidth = Silverman{});

}  // namespace ganlab
