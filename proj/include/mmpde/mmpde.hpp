#pragma once

#include "mmpde/functionals.hpp"
#include "mmpde/mesh.hpp"
#include "mmpde/metric.hpp"

namespace mmpde {

// The semi-discrete MMPDE problem: physical mesh, computational mesh (same
// element count), metric field, functional, and the time-scale constant tau.
struct MmpdeProblem {
  SimplicialMesh mesh;
  ComputationalMesh comp;
  MetricField metric;
  FunctionalSpec spec;
  double tau = 1.0;

  MmpdeProblem(SimplicialMesh mesh_, ComputationalMesh comp_, MetricField metric_,
               FunctionalSpec spec_, double tau_ = 1.0);
};

// Per-vertex dx/dt.
struct VelocityField {
  std::vector<Vec> v;
  double inf_norm() const {
    double m = 0.0;
    for (const Vec& x : v) m = std::max(m, x.inf_norm());
    return m;
  }
};

// Metric sampled at every vertex of the current mesh; rebuilt per evaluation
// so analytic fields see moved positions.
std::vector<Mat> vertex_metric_values(const MmpdeProblem& problem);

// Riemann-sum functional I_h = sum_K |K| G(E-hat_K E_K^{-1}, ..., M_K, x_K).
double discrete_functional(const MmpdeProblem& problem);
double discrete_functional(const MmpdeProblem& problem, const std::vector<Mat>& vertex_metrics);

// Local velocity vectors v_0^K .. v_d^K of element k.
std::array<Vec, 4> local_velocities(const MmpdeProblem& problem, int k,
                                    const std::vector<Mat>& vertex_metrics);

// Nodal velocities dx_i/dt = (P(x_i)/tau) sum_{K in patch(i)} |K| v_{i_K}^K,
// with boundary constraints applied.
VelocityField assemble_velocities(const MmpdeProblem& problem);
// Same, without the trailing constraint projection.
VelocityField assemble_velocities_unconstrained(const MmpdeProblem& problem);

// Fixed vertices get zero velocity; sliding vertices lose the component(s)
// normal to their surface/curve. Throws ZeroSurfaceGradient.
VelocityField apply_constraints(VelocityField field, const SimplicialMesh& mesh);

// Central-difference gradient of the discrete functional, one d-vector per
// vertex (constraints are not applied). h <= 0 selects 1e-6 times the local
// minimum incident edge length per vertex.
std::vector<Vec> fd_gradient(const MmpdeProblem& problem, double h);

}  // namespace mmpde
