#include "mmpde/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace mmpde {

SimplicialMesh make_uniform_grid_2d(int n) {
  if (n < 1) throw MeshError("grid size must be at least 1");
  SimplicialMesh mesh;
  mesh.dim = 2;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.vertices.push_back(Vec(i * h, j * h));
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.elements.push_back({v00, v10, v11, 0});
      mesh.elements.push_back({v00, v11, v01, 0});
    }
  return mesh;
}

SimplicialMesh make_uniform_grid_3d(int n, double lo, double hi) {
  if (n < 1) throw MeshError("grid size must be at least 1");
  SimplicialMesh mesh;
  mesh.dim = 3;
  const double h = (hi - lo) / n;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) mesh.vertices.push_back(Vec(lo + i * h, lo + j * h, lo + k * h));
  auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };

  // Kuhn subdivision: six tetrahedra around the main diagonal of each cube,
  // one per permutation of the axis steps. Faces match across cubes.
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        for (const auto& perm : perms) {
          int steps[3] = {0, 0, 0};
          std::array<int, 4> tet{};
          tet[0] = vid(i, j, k);
          for (int s = 0; s < 3; ++s) {
            steps[perm[s]] = 1;
            tet[s + 1] = vid(i + steps[0], j + steps[1], k + steps[2]);
          }
          SimplicialMesh probe;
          probe.dim = 3;
          probe.vertices = {mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]],
                            mesh.vertices[tet[3]]};
          probe.elements = {{0, 1, 2, 3}};
          if (signed_element_volume(probe, 0) < 0.0) std::swap(tet[2], tet[3]);
          mesh.elements.push_back(tet);
        }
      }
  return mesh;
}

namespace {

// Sliding constraint along an axis-aligned face: phi(x) = x_c - value.
BoundaryConstraint face_constraint(int d, int axis) {
  return BoundaryConstraint::on_surface([d, axis](const Vec&) {
    Vec g(d);
    g[axis] = 1.0;
    return g;
  });
}

}  // namespace

void apply_box_constraints(SimplicialMesh& mesh, const Vec& lo, const Vec& hi, bool slide) {
  const int d = mesh.dim;
  const std::vector<char> on_boundary = boundary_vertex_flags(mesh);
  mesh.constraints.assign(mesh.n_vertices(), BoundaryConstraint::free());
  const double tol = 1e-9 * (hi[0] - lo[0] + 1.0);
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (!on_boundary[i]) continue;
    std::vector<int> touched;
    for (int c = 0; c < d; ++c)
      if (std::fabs(mesh.vertices[i][c] - lo[c]) < tol || std::fabs(mesh.vertices[i][c] - hi[c]) < tol)
        touched.push_back(c);
    if (touched.empty())
      throw MeshError("boundary vertex " + std::to_string(i) + " lies on no box face");
    if (!slide || static_cast<int>(touched.size()) >= d) {
      mesh.constraints[i] = BoundaryConstraint::fixed();
    } else if (touched.size() == 1) {
      mesh.constraints[i] = face_constraint(d, touched[0]);
    } else {
      mesh.constraints[i] =
          BoundaryConstraint::on_curve(face_constraint(d, touched[0]).surface_gradient,
                                       face_constraint(d, touched[1]).surface_gradient);
    }
  }
}

void fix_all_boundary(SimplicialMesh& mesh) {
  const std::vector<char> on_boundary = boundary_vertex_flags(mesh);
  mesh.constraints.assign(mesh.n_vertices(), BoundaryConstraint::free());
  for (int i = 0; i < mesh.n_vertices(); ++i)
    if (on_boundary[i]) mesh.constraints[i] = BoundaryConstraint::fixed();
}

double sine_wave_u(double x, double y) {
  return std::tanh(-20.0 * (y - 0.5 - 0.25 * std::sin(2.0 * std::numbers::pi * x)));
}

double nine_spheres_u(double x, double y, double z) {
  double u = 0.0;
  const double centers[9][3] = {{0.0, 0.0, 0.0},   {0.5, 0.5, 0.5},   {0.5, -0.5, 0.5},
                                {-0.5, 0.5, 0.5},  {-0.5, -0.5, 0.5}, {0.5, 0.5, -0.5},
                                {0.5, -0.5, -0.5}, {-0.5, 0.5, -0.5}, {-0.5, -0.5, -0.5}};
  for (const auto& c : centers) {
    const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]);
    u += std::tanh(30.0 * (r2 - 0.1875));
  }
  return u;
}

std::vector<double> sample_vertex_field(const SimplicialMesh& mesh,
                                        const std::function<double(const Vec&)>& u) {
  std::vector<double> values(mesh.n_vertices());
  for (int i = 0; i < mesh.n_vertices(); ++i) values[i] = u(mesh.vertices[i]);
  return values;
}

MetricPipelineResult build_metric_from_field(const SimplicialMesh& mesh, const std::vector<double>& u) {
  const NodalHessianField hessians = recover_hessian(mesh, u);
  const RegularizationAlpha alpha = solve_regularization_alpha(mesh, hessians);
  MetricPipelineResult result{build_adaptation_metric(mesh, hessians, alpha.value), alpha.value,
                              alpha.clamped, alpha.degenerate_target};
  return result;
}

ScenarioSetup make_scenario(const ScenarioConfig& config) {
  const bool is_3d = config.name == "smooth3d" || config.name == "ninespheres";
  const bool is_adaptation = config.name == "sinewave" || config.name == "ninespheres";
  if (!is_3d && config.name != "smooth2d" && config.name != "sinewave")
    throw MeshError("unknown scenario '" + config.name + "'");

  const int cells = config.cells > 0 ? config.cells : (is_3d ? 16 : 24);
  const double tau = config.tau > 0.0 ? config.tau : (is_adaptation ? 0.01 : 1.0);

  SimplicialMesh mesh;
  Vec lo, hi;
  if (config.name == "ninespheres") {
    mesh = make_uniform_grid_3d(cells, -1.0, 1.0);
    lo = Vec(-1.0, -1.0, -1.0);
    hi = Vec(1.0, 1.0, 1.0);
  } else if (is_3d) {
    mesh = make_uniform_grid_3d(cells);
    lo = Vec(0.0, 0.0, 0.0);
    hi = Vec(1.0, 1.0, 1.0);
  } else {
    mesh = make_uniform_grid_2d(cells);
    lo = Vec(0.0, 0.0);
    hi = Vec(1.0, 1.0);
  }
  apply_box_constraints(mesh, lo, hi, config.slide_boundary);

  MetricPipelineResult metric_info{MetricField::identity(mesh.dim), 1.0, false, false};
  if (is_adaptation) {
    std::vector<double> u;
    if (config.name == "sinewave")
      u = sample_vertex_field(mesh, [](const Vec& x) { return sine_wave_u(x[0], x[1]); });
    else
      u = sample_vertex_field(mesh, [](const Vec& x) { return nine_spheres_u(x[0], x[1], x[2]); });
    metric_info = build_metric_from_field(mesh, u);
  } else {
    const double cell_h = (hi[0] - lo[0]) / cells;
    double amplitude = config.perturb_amplitude >= 0.0 ? config.perturb_amplitude : 0.3 * cell_h;
    // smoothing needs a nonsingular start; halve the amplitude until the
    // perturbed mesh validates (deterministic for a fixed seed)
    SimplicialMesh perturbed;
    for (int attempt = 0;; ++attempt) {
      perturbed = perturb_mesh(mesh, amplitude, config.seed);
      try {
        perturbed.validate();
        break;
      } catch (const MeshError&) {
        if (attempt >= 8) throw;
        amplitude *= 0.5;
      }
    }
    mesh = std::move(perturbed);
  }

  const int n = mesh.n_elements();
  MmpdeProblem problem(std::move(mesh), ComputationalMesh::master_copies(n, is_3d ? 3 : 2),
                       metric_info.field, config.spec, tau);
  return {std::move(problem), std::move(metric_info)};
}

}  // namespace mmpde
