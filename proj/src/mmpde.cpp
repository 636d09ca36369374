#include "mmpde/mmpde.hpp"

#include <cmath>

namespace mmpde {

MmpdeProblem::MmpdeProblem(SimplicialMesh mesh_, ComputationalMesh comp_, MetricField metric_,
                           FunctionalSpec spec_, double tau_)
    : mesh(std::move(mesh_)), comp(std::move(comp_)), metric(std::move(metric_)),
      spec(spec_), tau(tau_) {
  if (!(tau > 0.0)) throw MeshError("tau must be positive");
  if (comp.n_elements() != mesh.n_elements())
    throw MeshError("computational mesh has " + std::to_string(comp.n_elements()) +
                    " elements, physical mesh has " + std::to_string(mesh.n_elements()));
  if (comp.dim() != mesh.dim) throw MeshError("computational/physical mesh dimensions differ");
  if (metric.dim() != mesh.dim) throw MeshError("metric field dimension does not match mesh");
}

std::vector<Mat> vertex_metric_values(const MmpdeProblem& problem) {
  std::vector<Mat> values(problem.mesh.n_vertices());
  for (int i = 0; i < problem.mesh.n_vertices(); ++i)
    values[i] = problem.metric.at_vertex(problem.mesh, i);
  return values;
}

namespace {

struct ElementEval {
  Mat edge;       // E_K
  Mat edge_inv;   // E_K^{-1}
  double det_e;   // det(E_K), positive on validated meshes
  double volume;  // |K|
  Mat jac;        // E-hat_K E_K^{-1}
  double det_jac;
  Mat metric_avg;  // M_K
  Vec centroid;    // x_K
};

ElementEval element_eval(const MmpdeProblem& problem, int k, const std::vector<Mat>& vm) {
  const SimplicialMesh& mesh = problem.mesh;
  const int d = mesh.dim;
  ElementEval ev;
  ev.edge = edge_matrix(mesh, k);
  ev.det_e = ev.edge.det();
  if (std::fabs(ev.det_e) <= kDegenerateDetFloor)
    throw DegenerateElement("element " + std::to_string(k) + " is degenerate", k);
  ev.edge_inv = ev.edge.inverse();
  ev.volume = std::fabs(ev.det_e) / factorial(d);
  ev.jac = problem.comp.edge_mat(k) * ev.edge_inv;
  ev.det_jac = problem.comp.edge_det(k) / ev.det_e;

  ev.metric_avg = Mat(d);
  ev.centroid = Vec(d);
  for (int j = 0; j <= d; ++j) {
    const int v = mesh.elements[k][j];
    ev.metric_avg += vm[v];
    ev.centroid += mesh.vertices[v];
  }
  ev.metric_avg *= 1.0 / (d + 1);
  ev.centroid *= 1.0 / (d + 1);
  return ev;
}

}  // namespace

double discrete_functional(const MmpdeProblem& problem, const std::vector<Mat>& vertex_metrics) {
  double total = 0.0;
  for (int k = 0; k < problem.mesh.n_elements(); ++k) {
    const ElementEval ev = element_eval(problem, k, vertex_metrics);
    total += ev.volume * eval_g_value(problem.spec, ev.jac, ev.det_jac, ev.metric_avg);
  }
  return total;
}

double discrete_functional(const MmpdeProblem& problem) {
  return discrete_functional(problem, vertex_metric_values(problem));
}

std::array<Vec, 4> local_velocities(const MmpdeProblem& problem, int k,
                                    const std::vector<Mat>& vertex_metrics) {
  const SimplicialMesh& mesh = problem.mesh;
  const int d = mesh.dim;
  const ElementEval ev = element_eval(problem, k, vertex_metrics);
  const GDerivatives gd = eval_g(problem.spec, ev.jac, ev.det_jac, ev.metric_avg, ev.centroid);

  // rows 1..d of the stacked local velocity matrix
  Mat rows = -gd.g * ev.edge_inv + ev.edge_inv * gd.dg_dj * problem.comp.edge_mat(k) * ev.edge_inv +
             (gd.dg_ddet * ev.det_jac) * ev.edge_inv;

  // basis gradients: row j of E_K^{-1} for j = 1..d, row 0 is minus their sum
  std::array<Vec, 4> grad_phi;
  Vec grad_sum(d);
  for (int j = 1; j <= d; ++j) {
    grad_phi[j] = ev.edge_inv.row(j - 1);
    grad_sum += grad_phi[j];
  }
  grad_phi[0] = -grad_sum;

  // d(M_K)/dx through the field's spatial dependence, with the gradient of M
  // approximated by the element's linear interpolant of the vertex samples.
  // Nodal fields ride with the vertices and contribute nothing here.
  Vec metric_term(d);
  if (problem.metric.spatial()) {
    for (int j = 0; j <= d; ++j) {
      const double weight = (gd.dg_dm * vertex_metrics[mesh.elements[k][j]]).trace();
      metric_term += weight * grad_phi[j];
    }
  }

  const Vec shared = (1.0 / (d + 1)) * (metric_term + gd.dg_dx);

  std::array<Vec, 4> v;
  Vec v0(d);
  for (int j = 1; j <= d; ++j) {
    v[j] = rows.row(j - 1) - shared;
    v0 -= v[j];
  }
  v[0] = v0 - metric_term - gd.dg_dx;
  return v;
}

VelocityField assemble_velocities_unconstrained(const MmpdeProblem& problem) {
  const SimplicialMesh& mesh = problem.mesh;
  const int d = mesh.dim;
  const std::vector<Mat> vm = vertex_metric_values(problem);

  VelocityField field;
  field.v.assign(mesh.n_vertices(), Vec(d));
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const double vol = element_volume(mesh, k);
    const std::array<Vec, 4> local = local_velocities(problem, k, vm);
    for (int j = 0; j <= d; ++j) field.v[mesh.elements[k][j]] += vol * local[j];
  }
  for (int i = 0; i < mesh.n_vertices(); ++i)
    field.v[i] *= balance_p(problem.spec, vm[i]) / problem.tau;
  return field;
}

VelocityField assemble_velocities(const MmpdeProblem& problem) {
  return apply_constraints(assemble_velocities_unconstrained(problem), problem.mesh);
}

namespace {

Vec project_out(const Vec& v, const Vec& normal) {
  return v - v.dot(normal) * normal;
}

Vec unit_surface_normal(const std::function<Vec(const Vec&)>& gradient, const Vec& x) {
  if (!gradient) throw ZeroSurfaceGradient("sliding vertex has no surface gradient provider");
  Vec n = gradient(x);
  const double norm = n.norm();
  if (norm <= 1e-12) throw ZeroSurfaceGradient("surface gradient norm " + std::to_string(norm) + " at a sliding vertex");
  return (1.0 / norm) * n;
}

}  // namespace

VelocityField apply_constraints(VelocityField field, const SimplicialMesh& mesh) {
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const BoundaryConstraint& bc = mesh.constraint(i);
    switch (bc.kind) {
      case ConstraintKind::Free:
        break;
      case ConstraintKind::Fixed:
        field.v[i] = Vec::zero(mesh.dim);
        break;
      case ConstraintKind::OnSurface:
        field.v[i] = project_out(field.v[i], unit_surface_normal(bc.surface_gradient, mesh.vertices[i]));
        break;
      case ConstraintKind::OnCurve: {
        const Vec n1 = unit_surface_normal(bc.surface_gradient, mesh.vertices[i]);
        const Vec n2 = unit_surface_normal(bc.surface_gradient2, mesh.vertices[i]);
        Vec t = cross(n1, n2);
        const double tn = t.norm();
        if (tn <= 1e-12) throw ZeroSurfaceGradient("curve constraint surfaces are parallel at a sliding vertex");
        t *= 1.0 / tn;
        field.v[i] = field.v[i].dot(t) * t;
        break;
      }
    }
  }
  return field;
}

std::vector<Vec> fd_gradient(const MmpdeProblem& problem, double h) {
  const SimplicialMesh& mesh = problem.mesh;
  const int d = mesh.dim;
  const auto patches = vertex_patches(mesh);

  MmpdeProblem probe = problem;
  std::vector<Mat> vm = vertex_metric_values(problem);

  // Sum of |K| G over one vertex patch; only these terms move with the vertex.
  // The metric sample of the moved vertex is refreshed so analytic fields are
  // re-evaluated at probed positions.
  auto patch_energy = [&](int i) {
    vm[i] = probe.metric.at_vertex(probe.mesh, i);
    double total = 0.0;
    for (int k : patches[i]) {
      const ElementEval ev = element_eval(probe, k, vm);
      total += ev.volume * eval_g_value(probe.spec, ev.jac, ev.det_jac, ev.metric_avg);
    }
    return total;
  };

  std::vector<Vec> grad(mesh.n_vertices(), Vec(d));
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const Mat vm_rest = vm[i];
    double hi = h > 0.0 ? h : 1e-6 * min_incident_edge_length(mesh, i, patches);
    for (int c = 0; c < d; ++c) {
      const double original = mesh.vertices[i][c];
      double step = hi;
      for (int attempt = 0;; ++attempt) {
        try {
          probe.mesh.vertices[i][c] = original + step;
          const double plus = patch_energy(i);
          probe.mesh.vertices[i][c] = original - step;
          const double minus = patch_energy(i);
          grad[i][c] = (plus - minus) / (2.0 * step);
          break;
        } catch (const DegenerateElement&) {
          if (attempt >= 3) {
            probe.mesh.vertices[i][c] = original;
            vm[i] = vm_rest;
            throw;
          }
          step /= 10.0;
        }
      }
      probe.mesh.vertices[i][c] = original;
      vm[i] = vm_rest;
    }
  }
  return grad;
}

}  // namespace mmpde
