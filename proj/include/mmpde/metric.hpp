#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mmpde/mesh.hpp"

namespace mmpde {

// SPD metric tensor field M(x). Analytic fields are functions of position;
// nodal fields attach one SPD matrix to each vertex index (all discrete uses
// sample at vertices, so nodal values travel with their vertex).
class MetricField {
 public:
  enum class Kind { Identity, Analytic, Nodal };

  static MetricField identity(int d);
  static MetricField analytic(int d, std::function<Mat(const Vec&)> fn);
  static MetricField nodal(int d, std::vector<Mat> vertex_values);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  // True when M is a function of position. Nodal values are attached to
  // vertex indices and travel with them, so they carry no spatial dependence.
  bool spatial() const { return kind_ != Kind::Nodal; }

  Mat at_vertex(const SimplicialMesh& mesh, int i) const;
  // Identity/Analytic only; nodal fields are sampled at vertices.
  Mat at_point(const Vec& x) const;
  // Value at the centroid of element k (vertex average for nodal fields).
  Mat at_centroid(const SimplicialMesh& mesh, int k) const;

  // Convenience: the field scaled by a positive constant c.
  MetricField scaled(double c) const;

 private:
  Kind kind_ = Kind::Identity;
  int dim_ = 0;
  std::function<Mat(const Vec&)> fn_;
  std::vector<Mat> nodal_;
  double scale_ = 1.0;
};

// Element metric M_K = (1/(d+1)) sum_i M(x_i^K). Throws NonSPDMetric when the
// average fails the SPD check.
Mat element_metric(const MetricField& field, const SimplicialMesh& mesh, int k);

struct NodalHessianField {
  int dim = 0;
  std::vector<Mat> values;  // one symmetric d x d matrix per vertex
};

// Least-squares quadratic fit over the vertex's distance-1 patch, widened up
// to distance 3 on rank deficiency; exact for globally quadratic u.
// Throws SingularPatch if still rank-deficient after widening twice.
NodalHessianField recover_hessian(const SimplicialMesh& mesh, const std::vector<double>& u);

// Eigen-decomposition with eigenvalues replaced by their absolute values.
Mat absolute_spd(const Mat& h);

struct RegularizationAlpha {
  double value = 1.0;
  bool clamped = false;
  bool degenerate_target = false;  // right side of the matching condition ~ 0
};

// Solves for alpha in: integral sqrt(det M) dx = 2 integral det(|H|)^{1/3} dx
// with M built from alpha and |H|; bisection on log(alpha) in [1e-8, 1e8].
RegularizationAlpha solve_regularization_alpha(const SimplicialMesh& mesh, const NodalHessianField& hessians);

// Left side of the matching condition as a function of alpha (strictly
// increasing in alpha); exposed for the bracket property check.
double regularization_lhs(const SimplicialMesh& mesh, const NodalHessianField& hessians, double alpha);
double regularization_rhs(const SimplicialMesh& mesh, const NodalHessianField& hessians);

// Interpolation-error-optimal metric: per vertex,
// M = det(alpha I + |H|)^{-1/6} (alpha I + |H|).
MetricField build_adaptation_metric(const SimplicialMesh& mesh, const NodalHessianField& hessians, double alpha);

// Sampled eigenvalue bounds (m_lo, m_hi) over vertices and element centroids.
// Throws NonSPDMetric if m_lo <= 0.
std::pair<double, double> estimate_bounds(const MetricField& field, const SimplicialMesh& mesh);

}  // namespace mmpde
