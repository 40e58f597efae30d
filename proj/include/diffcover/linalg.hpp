#pragma once

// Small fixed-capacity dense vectors and matrices for state dimensions <= 8.
// Everything lives inline so Monte-Carlo path loops never touch the heap.

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>

#include "diffcover/errors.hpp"

namespace diffcover {

inline constexpr int kMaxDim = 8;

class Vec {
 public:
  Vec() = default;
  Vec(std::initializer_list<double> vals) : n_(static_cast<int>(vals.size())) {
    assert(n_ <= kMaxDim);
    int i = 0;
    for (double v : vals) a_[i++] = v;
  }
  static Vec zero(int n) {
    assert(n >= 0 && n <= kMaxDim);
    Vec v;
    v.n_ = n;
    v.a_.fill(0.0);
    return v;
  }
  static Vec filled(int n, double value) {
    Vec v = zero(n);
    for (int i = 0; i < n; ++i) v.a_[i] = value;
    return v;
  }
  static Vec unit(int n, int axis) {
    Vec v = zero(n);
    v.a_[axis] = 1.0;
    return v;
  }

  int size() const { return n_; }
  double operator[](int i) const { return a_[i]; }
  double& operator[](int i) { return a_[i]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) a_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += a_[i] * o.a_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(a_[i]));
    return m;
  }
  bool all_finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(a_[i])) return false;
    return true;
  }
  Vec normalized(int fallback_axis = 0) const {
    double r = norm();
    if (r == 0.0) return unit(n_, fallback_axis);
    return *this * (1.0 / r);
  }

 private:
  std::array<double, kMaxDim> a_{};
  int n_ = 0;
};

class Mat {
 public:
  Mat() = default;
  static Mat zero(int rows, int cols) {
    assert(rows <= kMaxDim && cols <= kMaxDim);
    Mat m;
    m.r_ = rows;
    m.c_ = cols;
    m.a_.fill(0.0);
    return m;
  }
  static Mat identity(int n) {
    Mat m = zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat scaled_identity(int n, double s) {
    Mat m = zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = s;
    return m;
  }
  static Mat diag(const Vec& d) {
    Mat m = zero(d.size(), d.size());
    for (int i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }
  double& operator()(int i, int j) { return a_[i * kMaxDim + j]; }

  Vec col(int j) const {
    Vec v = Vec::zero(r_);
    for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  Vec apply(const Vec& x) const {
    assert(x.size() == c_);
    Vec y = Vec::zero(r_);
    for (int i = 0; i < r_; ++i) {
      double s = 0.0;
      for (int j = 0; j < c_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  Mat mul(const Mat& o) const {
    assert(c_ == o.r_);
    Mat y = zero(r_, o.c_);
    for (int i = 0; i < r_; ++i)
      for (int k = 0; k < c_; ++k) {
        double v = (*this)(i, k);
        if (v == 0.0) continue;
        for (int j = 0; j < o.c_; ++j) y(i, j) += v * o(k, j);
      }
    return y;
  }
  Mat transpose() const {
    Mat y = zero(c_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) y(j, i) = (*this)(i, j);
    return y;
  }
  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  Mat& operator*=(double s) {
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) (*this)(i, j) *= s;
    return *this;
  }
  friend Mat operator*(Mat a, double s) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }
  bool all_finite() const {
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j)
        if (!std::isfinite((*this)(i, j))) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim * kMaxDim> a_{};
  int r_ = 0, c_ = 0;
};

struct EigenDecomposition {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors
};

// Cyclic Jacobi rotations for a symmetric matrix. Plenty for n <= 8.
inline EigenDecomposition jacobi_eigen(const Mat& sym, int max_sweeps = 64) {
  const int n = sym.rows();
  assert(n == sym.cols());
  Mat a = sym;
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenDecomposition out;
  out.values = Vec::zero(n);
  for (int i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = v;
  // insertion sort ascending, permuting columns alongside
  for (int i = 1; i < n; ++i) {
    double key = out.values[i];
    Vec colv = out.vectors.col(i);
    int j = i - 1;
    while (j >= 0 && out.values[j] > key) {
      out.values[j + 1] = out.values[j];
      for (int k = 0; k < n; ++k) out.vectors(k, j + 1) = out.vectors(k, j);
      --j;
    }
    out.values[j + 1] = key;
    for (int k = 0; k < n; ++k) out.vectors(k, j + 1) = colv[k];
  }
  return out;
}

// Largest singular value, via the symmetric eigenproblem of M^T M.
inline double spectral_norm(const Mat& m) {
  Mat g = m.transpose().mul(m);
  EigenDecomposition e = jacobi_eigen(g);
  double lam = e.values[g.rows() - 1];
  return std::sqrt(std::max(lam, 0.0));
}

// Symmetric PSD square root. Eigenvalues below -tol_neg raise; small negatives
// are clamped to zero.
inline Mat sym_psd_sqrt(const Mat& a, double tol_neg = 1e-10) {
  const int n = a.rows();
  double scale = std::max(a.max_abs(), 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale)
        throw NotPositiveSemidefiniteError("matrix is not symmetric at (" +
                                           std::to_string(i) + "," +
                                           std::to_string(j) + ")");
  EigenDecomposition e = jacobi_eigen(a);
  Mat d = Mat::zero(n, n);
  for (int i = 0; i < n; ++i) {
    double lam = e.values[i];
    if (lam < -tol_neg)
      throw NotPositiveSemidefiniteError("eigenvalue " + std::to_string(lam) +
                                         " below tolerance");
    d(i, i) = std::sqrt(std::max(lam, 0.0));
  }
  return e.vectors.mul(d).mul(e.vectors.transpose());
}

}  // namespace diffcover
