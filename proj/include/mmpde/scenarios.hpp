#pragma once

#include "mmpde/mmpde.hpp"

namespace mmpde {

// Uniform right-triangle mesh of [0,1]^2 with n x n cells (2 n^2 elements).
SimplicialMesh make_uniform_grid_2d(int n);
// Kuhn (six tetrahedra per cube) mesh of the box with n^3 cells.
SimplicialMesh make_uniform_grid_3d(int n, double lo = 0.0, double hi = 1.0);

// Box boundary policy: corners always fixed; with slide=true the remaining
// boundary vertices move along their face (and, in 3D, box edges along their
// edge line); with slide=false the whole boundary is fixed.
void apply_box_constraints(SimplicialMesh& mesh, const Vec& lo, const Vec& hi, bool slide);

// Mark every topological boundary vertex Fixed.
void fix_all_boundary(SimplicialMesh& mesh);

// Analytic solution fields of the builtin adaptation scenarios.
double sine_wave_u(double x, double y);
double nine_spheres_u(double x, double y, double z);
std::vector<double> sample_vertex_field(const SimplicialMesh& mesh,
                                        const std::function<double(const Vec&)>& u);

struct MetricPipelineResult {
  MetricField field;
  double alpha = 1.0;
  bool alpha_clamped = false;
  bool alpha_degenerate = false;
};

// Full adaptation metric pipeline: nodal u -> recovered Hessian -> |H| ->
// regularization alpha -> metric field.
MetricPipelineResult build_metric_from_field(const SimplicialMesh& mesh, const std::vector<double>& u);

struct ScenarioConfig {
  std::string name;            // smooth2d | sinewave | smooth3d | ninespheres
  int cells = 0;               // 0 selects the scenario default (24 in 2D, 16 in 3D)
  FunctionalSpec spec = FunctionalSpec::huang(1.5, 1.0 / 3.0);
  double tau = 0.0;            // <= 0 selects the scenario default
  bool slide_boundary = true;
  double perturb_amplitude = -1.0;  // < 0 selects the smoothing default 0.3/cells
  unsigned long seed = 1;
};

struct ScenarioSetup {
  MmpdeProblem problem;
  MetricPipelineResult metric_info;  // identity for smoothing scenarios
};

ScenarioSetup make_scenario(const ScenarioConfig& config);

}  // namespace mmpde
