#include "ganlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "ganlab/error.hpp"

namespace ganlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidFunction: return "InvalidFunction";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::StationarityViolated: return "StationarityViolated";
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw Error(ErrorCode::DomainError, "interval requires lo < hi");
  }
}

// ---------------------------------------------------------------------------
// RNG
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t index) {
  std::uint64_t s = index;
  std::uint64_t h = splitmix64(s);
  std::uint64_t t = base_seed ^ h;
  return splitmix64(t);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SeededRng::uniform() {
  // 53 random bits, shifted by half a ulp so 0 is never produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() { return normal_quantile(uniform()); }

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) throw Error(ErrorCode::ShapeMismatch, "matrix data size");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::symmetrized() const {
  if (!square()) throw Error(ErrorCode::ShapeMismatch, "symmetrize needs a square matrix");
  Matrix s(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

double Matrix::max_abs() const {
  double best = 0.0;
  for (double v : data_) best = std::max(best, std::abs(v));
  return best;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::ShapeMismatch, "matrix product dimensions");
  Matrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::ShapeMismatch, "matrix sum");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> v) {
  if (a.cols_ != v.size()) throw Error(ErrorCode::ShapeMismatch, "matrix-vector dimensions");
  Vector out(a.rows_, 0.0);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
  return out;
}

Matrix invert(const Matrix& m) {
  if (!m.square()) throw Error(ErrorCode::ShapeMismatch, "invert needs a square matrix");
  const std::size_t n = m.rows();
  const double scale = m.norm_inf();
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::Singular, "zero or non-finite matrix");
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-13 * scale) {
      throw Error(ErrorCode::Singular, "pivot below 1e-13 * ||m|| in column " + std::to_string(col));
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= factor * a(col, j);
        inv(r, j) -= factor * inv(col, j);
      }
    }
  }
  return inv;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (!m.square()) throw Error(ErrorCode::ShapeMismatch, "eigenvalues need a square matrix");
  Matrix a = m.symmetrized();
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, a.max_abs() * a.max_abs())) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kTailThreshold = 1e-14;

struct Panel {
  double a, b, value, error, abs_value;
  bool operator<(const Panel& o) const { return error < o.error; }
};

double checked(const ScalarFn& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidFunction, "integrand not finite at x=" + std::to_string(x));
  return v;
}

Panel gauss_kronrod(const ScalarFn& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked(f, center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = checked(f, center - dx);
    fv2[j] = checked(f, center + dx);
    const double sum = fv1[j] + fv2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, result, err, resabs};
}

double scan_tail(const ScalarFn& f, double anchor, double direction) {
  for (double step = 1.0; step < 1e300; step *= 2.0) {
    const double x = anchor + direction * step;
    const double x2 = anchor + direction * 1.5 * step;
    if (std::abs(checked(f, x)) < kTailThreshold && std::abs(checked(f, x2)) < kTailThreshold) return x2;
  }
  throw Error(ErrorCode::InvalidFunction, "integrand does not decay on an infinite domain");
}

}  // namespace

Interval truncate_domain(const ScalarFn& f, Interval domain, std::span<const double> breakpoints) {
  double lo = domain.lo, hi = domain.hi;
  double left_anchor = std::isfinite(hi) ? hi : 0.0;
  double right_anchor = std::isfinite(lo) ? lo : 0.0;
  for (double bp : breakpoints) {
    if (!domain.contains(bp)) continue;
    left_anchor = std::min(left_anchor, bp);
    right_anchor = std::max(right_anchor, bp);
  }
  if (!std::isfinite(lo)) lo = scan_tail(f, left_anchor, -1.0);
  if (!std::isfinite(hi)) hi = scan_tail(f, right_anchor, +1.0);
  return Interval(lo, hi);
}

QuadratureResult integrate_detailed(const ScalarFn& f, Interval domain, const QuadratureOptions& opts) {
  if (!(opts.rel_tol > 0.0)) throw Error(ErrorCode::DomainError, "rel_tol must be positive");
  const Interval dom = truncate_domain(f, domain, opts.breakpoints);

  std::vector<double> cuts{dom.lo};
  for (double bp : opts.breakpoints)
    if (bp > dom.lo && bp < dom.hi) cuts.push_back(bp);
  cuts.push_back(dom.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel> active;
  double total = 0.0, total_abs = 0.0, total_err = 0.0, frozen_err = 0.0, frozen_value = 0.0;
  std::size_t panels = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = gauss_kronrod(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_abs += p.abs_value;
    total_err += p.error;
    active.push(p);
    ++panels;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  while (!active.empty()) {
    // Relative to int |f| so that integrals which cancel to ~0 still terminate.
    const double tol = std::max(opts.rel_tol * std::max(std::abs(total), total_abs), opts.abs_tol);
    if (total_err <= tol) break;
    // Roundoff-limited: only frozen panels carry the remaining error.
    if (total_err - frozen_err <= 0.1 * tol) break;
    if (panels >= opts.max_panels) {
      throw Error(ErrorCode::NonConvergence, "quadrature panel limit reached");
    }
    Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.b - worst.a <= 256.0 * eps * std::max(1.0, std::abs(mid))) {
      frozen_err += worst.error;
      frozen_value += worst.value;
      continue;
    }
    Panel left = gauss_kronrod(f, worst.a, mid);
    Panel right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_abs += left.abs_value + right.abs_value - worst.abs_value;
    total_err += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    ++panels;
  }
  // Recompute the sum to shed accumulated cancellation from the running update.
  double sum = 0.0, err = frozen_err;
  std::vector<Panel> rest;
  while (!active.empty()) {
    rest.push_back(active.top());
    active.pop();
  }
  std::sort(rest.begin(), rest.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const Panel& p : rest) {
    sum += p.value;
    err += p.error;
  }
  return {sum + frozen_value, err, panels, dom};
}

double integrate(const ScalarFn& f, Interval domain, double rel_tol, std::span<const double> breakpoints) {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw Error(ErrorCode::DomainError, "rel_tol must lie in (0, 1e-2]");
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.breakpoints.assign(breakpoints.begin(), breakpoints.end());
  return integrate_detailed(f, domain, opts).value;
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

namespace {
double fd_step(double xi, double base, std::optional<double> h) {
  if (h) {
    if (!(*h > 0.0)) throw Error(ErrorCode::DomainError, "finite-difference step must be positive");
    return *h;
  }
  return base * std::max(1.0, std::abs(xi));
}
}  // namespace

Vector grad_fd(const VectorFn& f, std::span<const double> x, std::optional<double> h) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector work(x.begin(), x.end());
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = fd_step(x[i], base, h);
    work[i] = x[i] + step;
    const double fp = f(work);
    work[i] = x[i] - step;
    const double fm = f(work);
    work[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Matrix hessian_fd(const VectorFn& f, std::span<const double> x, std::optional<double> h) {
  const double base = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  const std::size_t n = x.size();
  Vector work(x.begin(), x.end());
  Vector steps(n);
  for (std::size_t i = 0; i < n; ++i) steps[i] = fd_step(x[i], base, h);
  const double f0 = f(work);
  Matrix hess(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    work[i] = x[i] + steps[i];
    const double fp = f(work);
    work[i] = x[i] - steps[i];
    const double fm = f(work);
    work[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto eval = [&](double si, double sj) {
        work[i] = x[i] + si * steps[i];
        work[j] = x[j] + sj * steps[j];
        const double v = f(work);
        work[i] = x[i];
        work[j] = x[j];
        return v;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * steps[i] * steps[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess.symmetrized();
}

Matrix jacobian_fd(const std::function<Vector(std::span<const double>)>& f, std::span<const double> x,
                   std::optional<double> h) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector work(x.begin(), x.end());
  Matrix jac;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double step = fd_step(x[j], base, h);
    work[j] = x[j] + step;
    const Vector fp = f(work);
    work[j] = x[j] - step;
    const Vector fm = f(work);
    work[j] = x[j];
    if (j == 0) jac = Matrix(fp.size(), x.size());
    if (fp.size() != jac.rows() || fm.size() != jac.rows()) throw Error(ErrorCode::ShapeMismatch, "jacobian output size");
    for (std::size_t i = 0; i < fp.size(); ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * step);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::DomainError, "normal_quantile needs u in (0,1)");
  if (u > 0.5) return -normal_quantile(1.0 - u);
  // Acklam's rational approximation on the lower half, then one Newton step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  double x;
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // Halley refinement on Phi(x) - u; a second pass costs little and settles the last bits.
  for (int it = 0; it < 2; ++it) {
    const double e = normal_cdf(x) - u;
    const double g = e / normal_pdf(x);
    x -= g / (1.0 + 0.5 * x * g);
  }
  return x;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> sorted_sample, const ScalarFn& cdf) {
  if (sorted_sample.empty()) throw Error(ErrorCode::EmptySample, "ks_test needs at least one point");
  const double n = static_cast<double>(sorted_sample.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double f = cdf(sorted_sample[i]);
    stat = std::max({stat, (i + 1) / n - f, f - i / n});
  }
  return {stat, kolmogorov_sf(std::sqrt(n) * stat)};
}

Moments sample_moments(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "sample_moments on empty sample");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments m;
  m.mean = mean;
  m.variance = xs.size() > 1 ? m2 * n / (n - 1.0) : 0.0;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

double sample_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "sample_quantile on empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace ganlab
