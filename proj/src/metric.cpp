#include "mmpde/metric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mmpde {

MetricField MetricField::identity(int d) {
  MetricField f;
  f.kind_ = Kind::Identity;
  f.dim_ = d;
  return f;
}

MetricField MetricField::analytic(int d, std::function<Mat(const Vec&)> fn) {
  MetricField f;
  f.kind_ = Kind::Analytic;
  f.dim_ = d;
  f.fn_ = std::move(fn);
  return f;
}

MetricField MetricField::nodal(int d, std::vector<Mat> vertex_values) {
  MetricField f;
  f.kind_ = Kind::Nodal;
  f.dim_ = d;
  f.nodal_ = std::move(vertex_values);
  return f;
}

Mat MetricField::at_point(const Vec& x) const {
  switch (kind_) {
    case Kind::Identity:
      return scale_ * Mat::identity(dim_);
    case Kind::Analytic:
      return scale_ * fn_(x);
    case Kind::Nodal:
      throw MeshError("nodal metric fields are sampled at vertices, not at arbitrary points");
  }
  return Mat(dim_);
}

Mat MetricField::at_vertex(const SimplicialMesh& mesh, int i) const {
  if (kind_ == Kind::Nodal) return scale_ * nodal_[i];
  return at_point(mesh.vertices[i]);
}

Mat MetricField::at_centroid(const SimplicialMesh& mesh, int k) const {
  const int d = mesh.dim;
  if (kind_ == Kind::Nodal) {
    Mat m(d);
    for (int j = 0; j <= d; ++j) m += nodal_[mesh.elements[k][j]];
    return scale_ * (1.0 / (d + 1)) * m;
  }
  Vec c(d);
  for (int j = 0; j <= d; ++j) c += mesh.vertices[mesh.elements[k][j]];
  c *= 1.0 / (d + 1);
  return at_point(c);
}

MetricField MetricField::scaled(double c) const {
  MetricField f = *this;
  f.scale_ *= c;
  return f;
}

Mat element_metric(const MetricField& field, const SimplicialMesh& mesh, int k) {
  const int d = mesh.dim;
  Mat m(d);
  for (int j = 0; j <= d; ++j) m += field.at_vertex(mesh, mesh.elements[k][j]);
  m *= 1.0 / (d + 1);
  if (!m.is_spd()) throw NonSPDMetric("element metric M_K is not SPD on element " + std::to_string(k));
  return m;
}

namespace {

// Householder QR least squares, m x n with n <= 10. Returns false when R has
// a collapsed pivot, which recover_hessian maps to patch widening.
bool solve_least_squares(std::vector<double>& a, std::vector<double>& b, int m, int n, double* coef) {
  if (m < n) return false;
  for (int k = 0; k < n; ++k) {
    double norm = 0.0;
    for (int i = k; i < m; ++i) norm += a[i * n + k] * a[i * n + k];
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    const double alpha = a[k * n + k] > 0.0 ? -norm : norm;
    const double v0 = a[k * n + k] - alpha;
    double vtv = v0 * v0;
    for (int i = k + 1; i < m; ++i) vtv += a[i * n + k] * a[i * n + k];
    a[k * n + k] = alpha;
    for (int j = k + 1; j < n; ++j) {
      double dot = v0 * a[k * n + j];
      for (int i = k + 1; i < m; ++i) dot += a[i * n + k] * a[i * n + j];
      const double f = 2.0 * dot / vtv;
      a[k * n + j] -= f * v0;
      for (int i = k + 1; i < m; ++i) a[i * n + j] -= f * a[i * n + k];
    }
    double dot = v0 * b[k];
    for (int i = k + 1; i < m; ++i) dot += a[i * n + k] * b[i];
    const double f = 2.0 * dot / vtv;
    b[k] -= f * v0;
    for (int i = k + 1; i < m; ++i) b[i] -= f * a[i * n + k];
  }
  double r_max = 0.0;
  for (int k = 0; k < n; ++k) r_max = std::max(r_max, std::fabs(a[k * n + k]));
  for (int k = 0; k < n; ++k)
    if (std::fabs(a[k * n + k]) <= 1e-10 * r_max) return false;
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * coef[j];
    coef[i] = s / a[i * n + i];
  }
  return true;
}

std::vector<std::vector<int>> vertex_adjacency(const SimplicialMesh& mesh) {
  std::vector<std::set<int>> adj(mesh.n_vertices());
  for (int k = 0; k < mesh.n_elements(); ++k)
    for (int i = 0; i <= mesh.dim; ++i)
      for (int j = 0; j <= mesh.dim; ++j)
        if (i != j) adj[mesh.elements[k][i]].insert(mesh.elements[k][j]);
  std::vector<std::vector<int>> out(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

std::vector<int> patch_nodes(const std::vector<std::vector<int>>& adj, int center, int distance) {
  std::set<int> nodes = {center};
  std::vector<int> frontier = {center};
  for (int level = 0; level < distance; ++level) {
    std::vector<int> next;
    for (int v : frontier)
      for (int w : adj[v])
        if (nodes.insert(w).second) next.push_back(w);
    frontier = std::move(next);
  }
  return {nodes.begin(), nodes.end()};
}

// Quadratic monomial basis at scaled offset dx: [1, dx_i, dx_i dx_j (i<=j)].
int quadratic_basis(const Vec& dx, double* row) {
  const int d = dx.dim();
  int n = 0;
  row[n++] = 1.0;
  for (int i = 0; i < d; ++i) row[n++] = dx[i];
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) row[n++] = dx[i] * dx[j];
  return n;
}

}  // namespace

NodalHessianField recover_hessian(const SimplicialMesh& mesh, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != mesh.n_vertices())
    throw MeshError("recover_hessian: field has " + std::to_string(u.size()) + " values for " +
                    std::to_string(mesh.n_vertices()) + " vertices");
  const int d = mesh.dim;
  const int ncoef = (d + 1) * (d + 2) / 2;
  const auto adj = vertex_adjacency(mesh);

  NodalHessianField out;
  out.dim = d;
  out.values.assign(mesh.n_vertices(), Mat(d));

  double row[10], coef[10];

  for (int i = 0; i < mesh.n_vertices(); ++i) {
    bool solved = false;
    for (int distance = 1; distance <= 3 && !solved; ++distance) {
      const std::vector<int> nodes = patch_nodes(adj, i, distance);
      const int m = static_cast<int>(nodes.size());
      if (m < ncoef) continue;

      double radius = 0.0;
      for (int v : nodes) radius = std::max(radius, (mesh.vertices[v] - mesh.vertices[i]).norm());
      if (radius <= 0.0) continue;

      std::vector<double> a(m * ncoef);
      std::vector<double> b(m);
      for (int r = 0; r < m; ++r) {
        const Vec dx = (1.0 / radius) * (mesh.vertices[nodes[r]] - mesh.vertices[i]);
        quadratic_basis(dx, row);
        for (int c = 0; c < ncoef; ++c) a[r * ncoef + c] = row[c];
        b[r] = u[nodes[r]];
      }
      if (!solve_least_squares(a, b, m, ncoef, coef)) continue;

      // coefficients of dx_i dx_j map to Hessian entries (x2 on the diagonal)
      Mat h(d);
      int n = 1 + d;
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          const double c = coef[n++] / (radius * radius);
          if (a == b) {
            h(a, a) = 2.0 * c;
          } else {
            h(a, b) = c;
            h(b, a) = c;
          }
        }
      out.values[i] = h;
      solved = true;
    }
    if (!solved)
      throw SingularPatch("hessian recovery patch around vertex " + std::to_string(i) +
                          " is rank-deficient after widening twice");
  }
  return out;
}

Mat absolute_spd(const Mat& h) {
  const SymEigen e = eigen_sym(h);
  Mat out(h.dim());
  for (int i = 0; i < h.dim(); ++i) {
    const Vec v = e.vectors.col(i);
    out += std::fabs(e.values[i]) * outer(v, v);
  }
  return out;
}

namespace {

double vertex_averaged_integral(const SimplicialMesh& mesh, const std::vector<double>& vertex_values) {
  double total = 0.0;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    double avg = 0.0;
    for (int j = 0; j <= mesh.dim; ++j) avg += vertex_values[mesh.elements[k][j]];
    avg /= (mesh.dim + 1);
    total += avg * element_volume(mesh, k);
  }
  return total;
}

Mat regularized_metric_value(const Mat& abs_h, double alpha) {
  const int d = abs_h.dim();
  const Mat a = alpha * Mat::identity(d) + abs_h;
  return std::pow(a.det(), -1.0 / 6.0) * a;
}

}  // namespace

double regularization_lhs(const SimplicialMesh& mesh, const NodalHessianField& hessians, double alpha) {
  std::vector<double> density(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const Mat m = regularized_metric_value(absolute_spd(hessians.values[i]), alpha);
    density[i] = std::sqrt(m.det());
  }
  return vertex_averaged_integral(mesh, density);
}

double regularization_rhs(const SimplicialMesh& mesh, const NodalHessianField& hessians) {
  std::vector<double> density(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i)
    density[i] = std::pow(absolute_spd(hessians.values[i]).det(), 1.0 / 3.0);
  return 2.0 * vertex_averaged_integral(mesh, density);
}

RegularizationAlpha solve_regularization_alpha(const SimplicialMesh& mesh, const NodalHessianField& hessians) {
  RegularizationAlpha result;
  const double rhs = regularization_rhs(mesh, hessians);
  const double rhs_floor = 1e-13 * domain_volume(mesh);
  if (rhs <= rhs_floor) {
    result.value = 1.0;
    result.degenerate_target = true;
    return result;
  }

  double lo = 1e-8, hi = 1e8;
  const double lhs_lo = regularization_lhs(mesh, hessians, lo);
  const double lhs_hi = regularization_lhs(mesh, hessians, hi);
  if (lhs_lo >= rhs) {
    result.value = lo;
    result.clamped = true;
    return result;
  }
  if (lhs_hi <= rhs) {
    result.value = hi;
    result.clamped = true;
    return result;
  }

  double log_lo = std::log(lo), log_hi = std::log(hi);
  double alpha = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double log_mid = 0.5 * (log_lo + log_hi);
    alpha = std::exp(log_mid);
    const double lhs = regularization_lhs(mesh, hessians, alpha);
    if (std::fabs(lhs - rhs) <= 1e-8 * rhs) break;
    if (lhs < rhs)
      log_lo = log_mid;
    else
      log_hi = log_mid;
  }
  result.value = alpha;
  return result;
}

MetricField build_adaptation_metric(const SimplicialMesh& mesh, const NodalHessianField& hessians, double alpha) {
  if (!(alpha > 0.0)) throw MeshError("build_adaptation_metric: alpha must be positive");
  std::vector<Mat> values(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i)
    values[i] = regularized_metric_value(absolute_spd(hessians.values[i]), alpha);
  return MetricField::nodal(mesh.dim, std::move(values));
}

std::pair<double, double> estimate_bounds(const MetricField& field, const SimplicialMesh& mesh) {
  double m_lo = 0.0, m_hi = 0.0;
  bool first = true;
  auto account = [&](const Mat& m) {
    const SymEigen e = eigen_sym(m);
    const double lo = e.values[0];
    const double hi = e.values[m.dim() - 1];
    if (first) {
      m_lo = lo;
      m_hi = hi;
      first = false;
    } else {
      m_lo = std::min(m_lo, lo);
      m_hi = std::max(m_hi, hi);
    }
  };
  for (int i = 0; i < mesh.n_vertices(); ++i) account(field.at_vertex(mesh, i));
  for (int k = 0; k < mesh.n_elements(); ++k) account(field.at_centroid(mesh, k));
  if (m_lo <= 0.0) throw NonSPDMetric("sampled metric has nonpositive eigenvalue " + std::to_string(m_lo));
  return {m_lo, m_hi};
}

}  // namespace mmpde
