#pragma once

// Dense univariate polynomials with real coefficients and real-root
// extraction through eigenvalues of the balanced companion matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "p4pfr/error.hpp"

namespace p4pfr {

/// Real polynomial, coefficients in ascending degree: coeffs()[i] multiplies x^i.
class Poly {
 public:
  Poly() : c_{0.0} {}
  Poly(std::initializer_list<double> c) : c_(c) {
    if (c_.empty()) c_.push_back(0.0);
  }
  explicit Poly(std::vector<double> c) : c_(std::move(c)) {
    if (c_.empty()) c_.push_back(0.0);
  }

  std::span<const double> coeffs() const { return c_; }
  std::size_t size() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  // Degree after dropping trailing coefficients with |c| <= trim_tol * max|c|.
  int degree(double trim_tol = 1e-12) const {
    const double cut = trim_tol * max_abs();
    int d = static_cast<int>(c_.size()) - 1;
    while (d > 0 && std::abs(c_[d]) <= cut) --d;
    return d;
  }

  Poly trimmed(double trim_tol = 1e-12) const {
    const int d = degree(trim_tol);
    return Poly(std::vector<double>(c_.begin(), c_.begin() + d + 1));
  }

  Poly operator*(double s) const {
    Poly out = *this;
    for (double& v : out.c_) v *= s;
    return out;
  }

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  std::vector<double> c_;
};

inline double poly_eval(const Poly& p, double x) {
  const auto c = p.coeffs();
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

inline double poly_eval_derivative(const Poly& p, double x) {
  const auto c = p.coeffs();
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
  return acc;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return Poly(std::move(out));
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return Poly(std::move(out));
}

inline Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, b * -1.0); }

struct Deflation {
  Poly quotient;
  double remainder = 0.0;
};

/// Synthetic division by (d1*x + d0): p = quotient*(d1*x + d0) + remainder.
inline Deflation poly_deflate_linear(const Poly& p, double d0, double d1,
                                     double eps_divisor = 1e-300) {
  if (std::abs(d0) <= eps_divisor && std::abs(d1) <= eps_divisor)
    throw Error(ErrorKind::DegenerateDivisor, "deflation divisor is zero");

  const auto c = p.coeffs();
  const std::size_t n = c.size();
  if (std::abs(d1) <= eps_divisor) {
    std::vector<double> q(c.begin(), c.end());
    for (double& v : q) v /= d0;
    return {Poly(std::move(q)), 0.0};
  }
  if (n == 1) return {Poly{0.0}, c[0]};

  // Divide by the monic factor (x - root), then rescale the quotient by 1/d1.
  const double root = -d0 / d1;
  std::vector<double> q(n - 1, 0.0);
  double carry = c[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    q[i] = carry;
    carry = c[i] + carry * root;
  }
  for (double& v : q) v /= d1;
  return {Poly(std::move(q)), carry};
}

/// Division by (d1*x + d0) arranged so the recurrence never multiplies by a
/// factor larger than one: forward when |d0| <= |d1|, otherwise on the
/// reversed coefficient sequence. The remainder is the residual left at the
/// constant term (forward) or at the leading term (reversed); both vanish
/// exactly when the divisor is a factor.
inline Deflation poly_deflate_linear_stable(const Poly& p, double d0, double d1,
                                            double eps_divisor = 1e-300) {
  if (std::abs(d0) <= std::abs(d1)) return poly_deflate_linear(p, d0, d1, eps_divisor);
  const auto c = p.coeffs();
  std::vector<double> rev(c.rbegin(), c.rend());
  Deflation r = poly_deflate_linear(Poly(std::move(rev)), d1, d0, eps_divisor);
  const auto q = r.quotient.coeffs();
  return {Poly(std::vector<double>(q.rbegin(), q.rend())), r.remainder};
}

namespace detail {

// Parlett-Reinsch balancing with radix-2 scaling, applied in place.
inline void balance(Eigen::MatrixXd& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace detail

/// Eigenvalues of the balanced companion matrix of p. p must have degree >= 1
/// with a non-negligible leading coefficient.
inline std::vector<std::complex<double>> companion_eigenvalues(const Poly& p) {
  const auto c = p.coeffs();
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) throw Error(ErrorKind::InvalidInput, "companion matrix needs degree >= 1");
  const double lead = c[n];
  if (lead == 0.0) throw Error(ErrorKind::InvalidInput, "zero leading coefficient");

  if (n == 1) return {std::complex<double>(-c[0] / lead, 0.0)};

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) comp(0, j) = -c[n - 1 - j] / lead;
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  detail::balance(comp);

  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::EigenFailure, "companion QR iteration did not converge");
  const auto& ev = es.eigenvalues();
  return std::vector<std::complex<double>>(ev.data(), ev.data() + ev.size());
}

struct RootOptions {
  double im_tol = 1e-6;
  int polish_iters = 2;
  double trim_tol = 1e-12;
  double root_merge_tol = 1e-8;
  double residual_tol = 1e-6;
};

/// Result of real_roots. real_roots.size() + complex_count + merged_count
/// equals the trimmed degree of the input. Near-real eigenvalues whose
/// polished residual is still too large are counted as complex.
struct RootSet {
  std::vector<double> real_roots;
  int complex_count = 0;
  int merged_count = 0;
};

inline double newton_polish(const Poly& p, double x, int iters) {
  double fx = std::abs(poly_eval(p, x));
  for (int it = 0; it < iters && fx > 0.0; ++it) {
    const double d = poly_eval_derivative(p, x);
    if (d == 0.0) break;
    const double cand = x - poly_eval(p, x) / d;
    const double fc = std::abs(poly_eval(p, cand));
    if (!(fc <= fx)) break;
    x = cand;
    fx = fc;
  }
  return x;
}

inline RootSet real_roots(const Poly& input, const RootOptions& opt = {}) {
  const Poly p = input.trimmed(opt.trim_tol);
  const int deg = p.degree(0.0);
  RootSet out;
  if (deg < 1) return out;

  const double scale = p.max_abs();
  std::vector<double> accepted;
  accepted.reserve(deg);
  for (const auto& z : companion_eigenvalues(p)) {
    if (std::abs(z.imag()) > opt.im_tol * (1.0 + std::abs(z.real()))) {
      ++out.complex_count;
      continue;
    }
    const double r = newton_polish(p, z.real(), opt.polish_iters);
    const double bound = opt.residual_tol * scale * std::pow(1.0 + std::abs(r), deg);
    if (std::abs(poly_eval(p, r)) > bound) {
      ++out.complex_count;
      continue;
    }
    accepted.push_back(r);
  }

  std::sort(accepted.begin(), accepted.end());
  for (double r : accepted) {
    if (!out.real_roots.empty() &&
        std::abs(r - out.real_roots.back()) <=
            opt.root_merge_tol * (1.0 + std::abs(r))) {
      ++out.merged_count;
      continue;
    }
    out.real_roots.push_back(r);
  }
  return out;
}

}  // namespace p4pfr
