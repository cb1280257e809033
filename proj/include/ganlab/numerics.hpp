#pragma once

// Shared numerical kernel: quadrature, finite differences, small dense
// matrices, the seedable RNG, normal special functions and the one-sample
// Kolmogorov-Smirnov test.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ganlab {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kLn4 = 1.38629436111989061883;

/// Closed or half/fully infinite interval of the real line.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  Interval() = default;
  Interval(double lo_, double hi_);

  bool finite() const { return lo > -kInf && hi < kInf; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state);

/// Derives the seed of substream `index` from `base_seed`. Used for
/// per-repetition and per-worker streams.
std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t index);

/// xoshiro256++ seeded through splitmix64. Single owner; derive substreams
/// with `mix_seed` instead of sharing an instance.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal by inversion.
  double normal();

  SeededRng substream(std::uint64_t index) const { return SeededRng(mix_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// ---------------------------------------------------------------------------
// Dense matrices
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;
  Matrix symmetrized() const;
  /// Max-row-sum norm.
  double norm_inf() const;
  double max_abs() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend Vector operator*(const Matrix& a, std::span<const double> v);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Gauss-Jordan inversion with partial pivoting. Throws Singular when a pivot
/// falls below 1e-13 * ||m||.
Matrix invert(const Matrix& m);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
Vector symmetric_eigenvalues(const Matrix& m);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(double)>;

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  /// Interior points where the integrand has kinks or jumps; also anchors for
  /// the tail scan on infinite domains.
  std::vector<double> breakpoints;
  std::size_t max_panels = std::size_t{1} << 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
  Interval truncated;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature; the error target is
/// rel_tol * int |f|. Infinite endpoints are replaced by
/// the first point of a geometric outward scan where |f| < 1e-14.
QuadratureResult integrate_detailed(const ScalarFn& f, Interval domain,
                                    const QuadratureOptions& opts = {});

double integrate(const ScalarFn& f, Interval domain, double rel_tol = 1e-9,
                 std::span<const double> breakpoints = {});

/// Finite truncation of `domain` used by the integrator.
Interval truncate_domain(const ScalarFn& f, Interval domain,
                         std::span<const double> breakpoints = {});

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

using VectorFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient. Default step cbrt(eps) * max(1, |x_i|); an
/// explicit `h` is used as-is for every coordinate.
Vector grad_fd(const VectorFn& f, std::span<const double> x, std::optional<double> h = {});

/// Second-order central Hessian, symmetrized. Default step eps^(1/4) * max(1, |x_i|).
Matrix hessian_fd(const VectorFn& f, std::span<const double> x, std::optional<double> h = {});

/// Central-difference Jacobian of a vector-valued map (rows = outputs).
Matrix jacobian_fd(const std::function<Vector(std::span<const double>)>& f,
                   std::span<const double> x, std::optional<double> h = {});

// ---------------------------------------------------------------------------
// Special functions and tests
// ---------------------------------------------------------------------------

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of the standard normal cdf; |Phi(result) - u| <= 1e-12.
double normal_quantile(double u);

/// log(1 + exp(x)) without overflow.
double softplus(double x);
double sigmoid(double x);

/// Survival function of the Kolmogorov distribution, series truncated at 100 terms.
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of a sorted sample against `cdf`.
KsResult ks_test(std::span<const double> sorted_sample, const ScalarFn& cdf);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments sample_moments(std::span<const double> xs);
double sample_quantile(std::vector<double> xs, double q);

}  // namespace ganlab
