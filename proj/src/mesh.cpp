#include "mmpde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace mmpde {

void SimplicialMesh::validate() const {
  if (dim < 2 || dim > 3) throw UnsupportedDimension("mesh dimension must be 2 or 3, got " + std::to_string(dim));
  const int nv = n_vertices();
  for (int k = 0; k < n_elements(); ++k) {
    for (int j = 0; j <= dim; ++j) {
      const int v = elements[k][j];
      if (v < 0 || v >= nv)
        throw MeshError("element " + std::to_string(k) + " references vertex " + std::to_string(v) +
                        " out of range [0," + std::to_string(nv) + ")");
    }
    if (signed_element_volume(*this, k) <= 0.0)
      throw MeshError("element " + std::to_string(k) + " has nonpositive signed volume");
  }
  if (!constraints.empty() && static_cast<int>(constraints.size()) != nv)
    throw MeshError("constraint list size does not match vertex count");
}

Mat edge_matrix(const SimplicialMesh& mesh, int k) {
  const auto& e = mesh.elements[k];
  const Vec& x0 = mesh.vertices[e[0]];
  Mat m(mesh.dim);
  for (int j = 1; j <= mesh.dim; ++j) m.set_col(j - 1, mesh.vertices[e[j]] - x0);
  return m;
}

double signed_element_volume(const SimplicialMesh& mesh, int k) {
  return edge_matrix(mesh, k).det() / factorial(mesh.dim);
}

double element_volume(const SimplicialMesh& mesh, int k) {
  return std::fabs(signed_element_volume(mesh, k));
}

BasisGradients basis_gradients(const SimplicialMesh& mesh, int k) {
  const Mat e = edge_matrix(mesh, k);
  const double det = e.det();
  if (std::fabs(det) <= kDegenerateDetFloor)
    throw DegenerateElement("element " + std::to_string(k) + " is degenerate (|det E_K| <= 1e-300)", k);
  const Mat einv = e.inverse();
  BasisGradients g;
  g.count = mesh.dim + 1;
  Vec sum(mesh.dim);
  for (int j = 1; j <= mesh.dim; ++j) {
    g.grad[j] = einv.row(j - 1);
    sum += g.grad[j];
  }
  g.grad[0] = -sum;
  return g;
}

double metric_min_altitude(const SimplicialMesh& mesh, int k, const Mat& metric) {
  if (!metric.is_spd()) throw NonSPDMetric("metric_min_altitude: M_K is not SPD");
  const BasisGradients g = basis_gradients(mesh, k);
  const Mat minv = metric.inverse();
  double min_alt = 0.0;
  for (int j = 0; j < g.count; ++j) {
    const double q = g.grad[j].dot(minv * g.grad[j]);
    const double a = 1.0 / std::sqrt(q);
    if (j == 0 || a < min_alt) min_alt = a;
  }
  return min_alt;
}

double metric_diameter(const SimplicialMesh& mesh, int k, const Mat& metric) {
  if (!metric.is_spd()) throw NonSPDMetric("metric_diameter: M_K is not SPD");
  const auto& e = mesh.elements[k];
  double h2 = 0.0;
  for (int i = 0; i <= mesh.dim; ++i)
    for (int j = i + 1; j <= mesh.dim; ++j) {
      const Vec edge = mesh.vertices[e[j]] - mesh.vertices[e[i]];
      h2 = std::max(h2, edge.dot(metric * edge));
    }
  return std::sqrt(h2);
}

ReferenceSimplex reference_equilateral(int d) {
  if (d != 2 && d != 3) throw UnsupportedDimension("reference simplex defined for d in {2,3}, got " + std::to_string(d));
  ReferenceSimplex r;
  r.dim = d;
  if (d == 2) {
    r.vertices[0] = Vec(0.0, 0.0);
    r.vertices[1] = Vec(1.0, 0.0);
    r.vertices[2] = Vec(0.5, std::sqrt(3.0) / 2.0);
  } else {
    r.vertices[0] = Vec(0.0, 0.0, 0.0);
    r.vertices[1] = Vec(1.0, 0.0, 0.0);
    r.vertices[2] = Vec(0.5, std::sqrt(3.0) / 2.0, 0.0);
    r.vertices[3] = Vec(0.5, std::sqrt(3.0) / 6.0, std::sqrt(2.0 / 3.0));
  }
  Vec centroid(d);
  for (int j = 0; j <= d; ++j) centroid += r.vertices[j];
  centroid *= 1.0 / (d + 1);
  for (int j = 0; j <= d; ++j) r.vertices[j] -= centroid;

  r.edge_mat = Mat(d);
  for (int j = 1; j <= d; ++j) r.edge_mat.set_col(j - 1, r.vertices[j] - r.vertices[0]);
  r.volume = r.edge_mat.det() / factorial(d);
  r.diameter = 1.0;
  r.altitude = (d == 2) ? std::sqrt(3.0) / 2.0 : std::sqrt(2.0 / 3.0);
  r.in_diameter = (d == 2) ? 1.0 / std::sqrt(3.0) : 1.0 / std::sqrt(6.0);
  return r;
}

namespace {

double facet_measure(const SimplicialMesh& mesh, const std::vector<int>& facet) {
  if (mesh.dim == 2) {
    return (mesh.vertices[facet[1]] - mesh.vertices[facet[0]]).norm();
  }
  const Vec a = mesh.vertices[facet[1]] - mesh.vertices[facet[0]];
  const Vec b = mesh.vertices[facet[2]] - mesh.vertices[facet[0]];
  return 0.5 * cross(a, b).norm();
}

}  // namespace

double in_diameter(const SimplicialMesh& mesh, int k) {
  const int d = mesh.dim;
  const double vol = element_volume(mesh, k);
  double facet_sum = 0.0;
  for (int skip = 0; skip <= d; ++skip) {
    std::vector<int> facet;
    for (int j = 0; j <= d; ++j)
      if (j != skip) facet.push_back(mesh.elements[k][j]);
    facet_sum += facet_measure(mesh, facet);
  }
  // inradius = d * |K| / sum of facet measures; in-diameter doubles it
  return 2.0 * d * vol / facet_sum;
}

double diameter(const SimplicialMesh& mesh, int k) {
  return metric_diameter(mesh, k, Mat::identity(mesh.dim));
}

std::array<double, 6> dihedral_angles(const SimplicialMesh& mesh, int k) {
  if (mesh.dim != 3) throw UnsupportedDimension("dihedral angles are defined for d=3 only");
  const auto& el = mesh.elements[k];
  std::array<double, 6> out{};
  int idx = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      // edge (i,j); opposite vertices are the other two
      int o1 = -1, o2 = -1;
      for (int m = 0; m < 4; ++m)
        if (m != i && m != j) (o1 < 0 ? o1 : o2) = m;
      const Vec a = mesh.vertices[el[i]];
      Vec e = mesh.vertices[el[j]] - a;
      const double elen = e.norm();
      e *= 1.0 / elen;
      Vec u = mesh.vertices[el[o1]] - a;
      Vec w = mesh.vertices[el[o2]] - a;
      u -= u.dot(e) * e;
      w -= w.dot(e) * e;
      const double angle = std::atan2(cross(u, w).norm(), u.dot(w));
      out[idx++] = angle * 180.0 / std::numbers::pi;
    }
  return out;
}

SimplicialMesh perturb_mesh(const SimplicialMesh& mesh, double amplitude, unsigned long seed) {
  SimplicialMesh out = mesh;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (int i = 0; i < out.n_vertices(); ++i) {
    if (out.constraint(i).kind != ConstraintKind::Free) continue;
    for (int c = 0; c < out.dim; ++c) out.vertices[i][c] += dist(rng);
  }
  return out;
}

std::vector<char> boundary_vertex_flags(const SimplicialMesh& mesh) {
  std::map<std::vector<int>, int> facet_count;
  const int d = mesh.dim;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    for (int skip = 0; skip <= d; ++skip) {
      std::vector<int> facet;
      for (int j = 0; j <= d; ++j)
        if (j != skip) facet.push_back(mesh.elements[k][j]);
      std::sort(facet.begin(), facet.end());
      ++facet_count[facet];
    }
  }
  std::vector<char> flags(mesh.n_vertices(), 0);
  for (const auto& [facet, count] : facet_count)
    if (count == 1)
      for (int v : facet) flags[v] = 1;
  return flags;
}

std::vector<std::vector<int>> vertex_patches(const SimplicialMesh& mesh) {
  std::vector<std::vector<int>> patches(mesh.n_vertices());
  for (int k = 0; k < mesh.n_elements(); ++k)
    for (int j = 0; j <= mesh.dim; ++j) patches[mesh.elements[k][j]].push_back(k);
  return patches;
}

double domain_volume(const SimplicialMesh& mesh) {
  double v = 0.0;
  for (int k = 0; k < mesh.n_elements(); ++k) v += element_volume(mesh, k);
  return v;
}

double min_incident_edge_length(const SimplicialMesh& mesh, int vertex,
                                const std::vector<std::vector<int>>& patches) {
  double min_len = 0.0;
  bool first = true;
  for (int k : patches[vertex]) {
    for (int j = 0; j <= mesh.dim; ++j) {
      const int other = mesh.elements[k][j];
      if (other == vertex) continue;
      const double len = (mesh.vertices[other] - mesh.vertices[vertex]).norm();
      if (first || len < min_len) {
        min_len = len;
        first = false;
      }
    }
  }
  return min_len;
}

ComputationalMesh ComputationalMesh::master_copies(int n_elements, int d) {
  const ReferenceSimplex ref = reference_equilateral(d);
  ComputationalMesh c;
  c.master_mode_ = true;
  c.n_ = n_elements;
  c.dim_ = d;
  const double scale = std::pow(static_cast<double>(n_elements), -1.0 / d);
  c.master_edge_ = scale * ref.edge_mat;
  c.master_det_ = c.master_edge_.det();
  c.rho_lower_ = ref.in_diameter;
  c.rho_upper_ = ref.diameter;
  return c;
}

ComputationalMesh ComputationalMesh::explicit_mesh(SimplicialMesh mesh) {
  mesh.validate();
  ComputationalMesh c;
  c.n_ = mesh.n_elements();
  c.dim_ = mesh.dim;
  c.explicit_edges_.reserve(c.n_);
  c.explicit_dets_.reserve(c.n_);
  double min_rho = 0.0, max_h = 0.0;
  for (int k = 0; k < c.n_; ++k) {
    Mat e = edge_matrix(mesh, k);
    c.explicit_dets_.push_back(e.det());
    c.explicit_edges_.push_back(std::move(e));
    const double rho = in_diameter(mesh, k);
    const double h = diameter(mesh, k);
    if (k == 0 || rho < min_rho) min_rho = rho;
    if (k == 0 || h > max_h) max_h = h;
  }
  const double nroot = std::pow(static_cast<double>(c.n_), 1.0 / c.dim_);
  c.rho_lower_ = nroot * min_rho;
  c.rho_upper_ = nroot * max_h;
  c.explicit_mesh_ = std::move(mesh);
  return c;
}

}  // namespace mmpde
