#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mmpde/errors.hpp"
#include "mmpde/linalg.hpp"

namespace mmpde {

// Elements below this |det E_K| are treated as degenerate by the geometry
// layer. Deliberately tiny: flow-level positivity floors are enforced by the
// integrator, not here.
inline constexpr double kDegenerateDetFloor = 1e-300;

enum class ConstraintKind { Free, Fixed, OnSurface, OnCurve };

// Movement constraint of a single vertex. OnSurface vertices slide on a
// surface phi(x)=0 with gradient `surface_gradient`; OnCurve vertices slide
// along the intersection of two such surfaces (3D box edges).
struct BoundaryConstraint {
  ConstraintKind kind = ConstraintKind::Free;
  std::function<Vec(const Vec&)> surface_gradient;
  std::function<Vec(const Vec&)> surface_gradient2;

  static BoundaryConstraint free() { return {}; }
  static BoundaryConstraint fixed() { return {ConstraintKind::Fixed, {}, {}}; }
  static BoundaryConstraint on_surface(std::function<Vec(const Vec&)> grad) {
    return {ConstraintKind::OnSurface, std::move(grad), {}};
  }
  static BoundaryConstraint on_curve(std::function<Vec(const Vec&)> grad_a,
                                     std::function<Vec(const Vec&)> grad_b) {
    return {ConstraintKind::OnCurve, std::move(grad_a), std::move(grad_b)};
  }
};

struct SimplicialMesh {
  int dim = 0;
  std::vector<Vec> vertices;
  std::vector<std::array<int, 4>> elements;  // first dim+1 entries used
  std::vector<BoundaryConstraint> constraints;  // empty means all Free
  std::vector<int> markers;                     // per-vertex file markers, may be empty

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }

  const BoundaryConstraint& constraint(int i) const {
    static const BoundaryConstraint free_constraint{};
    return constraints.empty() ? free_constraint : constraints[i];
  }

  // Throws MeshError on out-of-range indices or nonpositive signed volumes.
  void validate() const;
};

Mat edge_matrix(const SimplicialMesh& mesh, int k);
double signed_element_volume(const SimplicialMesh& mesh, int k);
double element_volume(const SimplicialMesh& mesh, int k);

// Gradients of the linear basis functions on element k; rows()[j] is the
// gradient associated with local vertex j. Throws DegenerateElement.
struct BasisGradients {
  std::array<Vec, 4> grad;
  int count = 0;
};
BasisGradients basis_gradients(const SimplicialMesh& mesh, int k);

// Minimum altitude of element k measured in the constant metric M_K.
double metric_min_altitude(const SimplicialMesh& mesh, int k, const Mat& metric);
// Diameter of element k in the metric M_K (max metric edge length).
double metric_diameter(const SimplicialMesh& mesh, int k, const Mat& metric);

struct ReferenceSimplex {
  int dim = 0;
  std::array<Vec, 4> vertices;  // centroid at origin, first edge along axis 1
  Mat edge_mat;
  double altitude = 0.0;      // a-hat
  double diameter = 1.0;      // h-hat
  double in_diameter = 0.0;   // rho-hat
  double volume = 0.0;
};
// The unitary equilateral simplex K-hat. Throws UnsupportedDimension.
ReferenceSimplex reference_equilateral(int d);

// Computational mesh: either N implicit copies of the scaled master element
// or an explicit simplicial mesh with matching element count.
class ComputationalMesh {
 public:
  static ComputationalMesh master_copies(int n_elements, int d);
  static ComputationalMesh explicit_mesh(SimplicialMesh mesh);

  bool is_master_copies() const { return master_mode_; }
  int n_elements() const { return n_; }
  int dim() const { return dim_; }

  const Mat& edge_mat(int k) const { return is_master_copies() ? master_edge_ : explicit_edges_[k]; }
  double edge_det(int k) const { return is_master_copies() ? master_det_ : explicit_dets_[k]; }

  // Regularity constants of the family {K_c}: rho_lo = N^{1/d} min rho_{K_c},
  // rho_hi = N^{1/d} max h_{K_c}. Exact constants of K-hat in master mode.
  double rho_lower() const { return rho_lower_; }
  double rho_upper() const { return rho_upper_; }

 private:
  bool master_mode_ = false;
  int n_ = 0;
  int dim_ = 0;
  Mat master_edge_;
  double master_det_ = 0.0;
  SimplicialMesh explicit_mesh_;
  std::vector<Mat> explicit_edges_;
  std::vector<double> explicit_dets_;
  double rho_lower_ = 0.0;
  double rho_upper_ = 0.0;
};

// Euclidean in-diameter (diameter of the largest inscribed ball) of element k.
double in_diameter(const SimplicialMesh& mesh, int k);
// Euclidean diameter (longest edge).
double diameter(const SimplicialMesh& mesh, int k);

// The six interior dihedral angles of tetrahedron k, in degrees.
std::array<double, 6> dihedral_angles(const SimplicialMesh& mesh, int k);

// Random displacement of Free vertices, uniform per coordinate in
// [-amplitude, amplitude]; deterministic for a fixed seed.
SimplicialMesh perturb_mesh(const SimplicialMesh& mesh, double amplitude, unsigned long seed);

// True for vertices lying on a facet shared by exactly one element.
std::vector<char> boundary_vertex_flags(const SimplicialMesh& mesh);

// Element indices incident to each vertex.
std::vector<std::vector<int>> vertex_patches(const SimplicialMesh& mesh);

// Mesh-wide helpers.
double domain_volume(const SimplicialMesh& mesh);
double min_incident_edge_length(const SimplicialMesh& mesh, int vertex,
                                const std::vector<std::vector<int>>& patches);

}  // namespace mmpde
