#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

namespace mmpde {

// Small fixed-capacity vector for spatial dimension d in {1,2,3}.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int d) : d_(d) { assert(d >= 1 && d <= 3); }
  Vec(double x, double y) : d_(2) { c_[0] = x; c_[1] = y; }
  Vec(double x, double y, double z) : d_(3) { c_[0] = x; c_[1] = y; c_[2] = z; }

  static Vec zero(int d) { return Vec(d); }

  int dim() const { return d_; }
  double& operator[](int i) { assert(i >= 0 && i < d_); return c_[i]; }
  double operator[](int i) const { assert(i >= 0 && i < d_); return c_[i]; }

  Vec& operator+=(const Vec& o) {
    assert(d_ == o.d_);
    for (int i = 0; i < d_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(d_ == o.d_);
    for (int i = 0; i < d_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < d_; ++i) c_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }

  double dot(const Vec& o) const {
    assert(d_ == o.d_);
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double inf_norm() const {
    double m = 0.0;
    for (int i = 0; i < d_; ++i) m = std::max(m, std::fabs(c_[i]));
    return m;
  }

 private:
  int d_ = 0;
  double c_[3] = {0.0, 0.0, 0.0};
};

// Small fixed-capacity d-by-d matrix, row-major.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int d) : d_(d) { assert(d >= 1 && d <= 3); }

  static Mat zero(int d) { return Mat(d); }
  static Mat identity(int d) {
    Mat m(d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(double a, double b) {
    Mat m(2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
  }
  static Mat diag(double a, double b, double c) {
    Mat m(3);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
  }

  int dim() const { return d_; }
  double& operator()(int i, int j) { assert(i >= 0 && i < d_ && j >= 0 && j < d_); return a_[3 * i + j]; }
  double operator()(int i, int j) const { assert(i >= 0 && i < d_ && j >= 0 && j < d_); return a_[3 * i + j]; }

  Vec row(int i) const {
    Vec r(d_);
    for (int j = 0; j < d_; ++j) r[j] = (*this)(i, j);
    return r;
  }
  Vec col(int j) const {
    Vec c(d_);
    for (int i = 0; i < d_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_row(int i, const Vec& r) {
    assert(r.dim() == d_);
    for (int j = 0; j < d_; ++j) (*this)(i, j) = r[j];
  }
  void set_col(int j, const Vec& c) {
    assert(c.dim() == d_);
    for (int i = 0; i < d_; ++i) (*this)(i, j) = c[i];
  }

  Mat& operator+=(const Mat& o) {
    assert(d_ == o.d_);
    for (int i = 0; i < 9; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    assert(d_ == o.d_);
    for (int i = 0; i < 9; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (int i = 0; i < 9; ++i) a_[i] *= s;
    return *this;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator-(Mat a) { return a *= -1.0; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    assert(a.d_ == b.d_);
    Mat r(a.d_);
    for (int i = 0; i < a.d_; ++i)
      for (int k = 0; k < a.d_; ++k) {
        const double aik = a(i, k);
        for (int j = 0; j < a.d_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  friend Vec operator*(const Mat& a, const Vec& x) {
    assert(a.d_ == x.dim());
    Vec r(a.d_);
    for (int i = 0; i < a.d_; ++i)
      for (int j = 0; j < a.d_; ++j) r[i] += a(i, j) * x[j];
    return r;
  }

  Mat transpose() const {
    Mat r(d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < d_; ++i) t += (*this)(i, i);
    return t;
  }

  double det() const {
    const Mat& m = *this;
    switch (d_) {
      case 1:
        return m(0, 0);
      case 2:
        return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      case 3:
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
      default:
        assert(false);
        return 0.0;
    }
  }

  // Cofactor inverse; caller has to guard det() against zero.
  Mat inverse() const {
    const Mat& m = *this;
    const double dt = det();
    Mat r(d_);
    switch (d_) {
      case 1:
        r(0, 0) = 1.0 / dt;
        break;
      case 2:
        r(0, 0) = m(1, 1) / dt;
        r(0, 1) = -m(0, 1) / dt;
        r(1, 0) = -m(1, 0) / dt;
        r(1, 1) = m(0, 0) / dt;
        break;
      case 3: {
        r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / dt;
        r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / dt;
        r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / dt;
        r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / dt;
        r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / dt;
        r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / dt;
        r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / dt;
        r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / dt;
        r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / dt;
        break;
      }
      default:
        assert(false);
    }
    return r;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) m = std::max(m, std::fabs((*this)(i, j)));
    return m;
  }

  bool is_symmetric(double rel_tol = 1e-12) const {
    const double scale = max_abs();
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j)
        if (std::fabs((*this)(i, j) - (*this)(j, i)) > rel_tol * std::max(scale, 1e-300)) return false;
    return true;
  }

  // Sylvester criterion on leading principal minors.
  bool is_spd() const {
    if ((*this)(0, 0) <= 0.0) return false;
    if (d_ >= 2 && (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0) <= 0.0) return false;
    if (d_ >= 3 && det() <= 0.0) return false;
    return true;
  }

 private:
  int d_ = 0;
  double a_[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
};

inline Mat outer(const Vec& a, const Vec& b) {
  assert(a.dim() == b.dim());
  Mat r(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j) r(i, j) = a[i] * b[j];
  return r;
}

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors, same order
};

// Cyclic Jacobi for symmetric 2x2 / 3x3; plenty accurate for diagnostics use.
inline SymEigen eigen_sym(const Mat& m_in) {
  const int d = m_in.dim();
  Mat a = m_in;
  Mat v = Mat::identity(d);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-300) break;
    const double scale = a.max_abs();
    if (std::sqrt(off) <= 1e-16 * std::max(scale, 1e-300)) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat r = Mat::identity(d);
        r(p, p) = c;
        r(q, q) = c;
        r(p, q) = s;
        r(q, p) = -s;
        a = r.transpose() * a * r;
        a(p, q) = a(q, p) = 0.0;
        v = v * r;
      }
  }
  SymEigen e;
  e.values = Vec(d);
  e.vectors = Mat(d);
  // sort ascending
  std::array<int, 3> order = {0, 1, 2};
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (a(order[j], order[j]) < a(order[i], order[i])) std::swap(order[i], order[j]);
  for (int i = 0; i < d; ++i) {
    e.values[i] = a(order[i], order[i]);
    e.vectors.set_col(i, v.col(order[i]));
  }
  return e;
}

// Spectral (2-)norm of a symmetric matrix.
inline double spectral_norm_sym(const Mat& m) {
  const SymEigen e = eigen_sym(m);
  double mx = 0.0;
  for (int i = 0; i < m.dim(); ++i) mx = std::max(mx, std::fabs(e.values[i]));
  return mx;
}

inline Vec cross(const Vec& a, const Vec& b) {
  assert(a.dim() == 3 && b.dim() == 3);
  return Vec(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace mmpde
