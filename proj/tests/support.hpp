#pragma once

#include <random>

#include "mmpde/integrate.hpp"
#include "mmpde/scenarios.hpp"

namespace testsup {

using namespace mmpde;

inline Mat random_spd(std::mt19937_64& rng, int d, double shift = 1e-1) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  return a.transpose() * a + shift * Mat::identity(d);
}

inline Mat random_symmetric(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a(i, j) = a(j, i) = normal(rng);
  return a;
}

inline Mat random_nonsingular(std::mt19937_64& rng, int d, double min_det = 0.1) {
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    Mat a(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    if (std::fabs(a.det()) >= min_det) return a;
  }
}

// SPD metric field, affine in position. Piecewise-linear interpolation is
// exact for affine fields, so the analytic velocity formulas are the exact
// gradient of I_h for these.
inline MetricField affine_metric_2d() {
  return MetricField::analytic(2, [](const Vec& x) {
    Mat m(2);
    m(0, 0) = 1.0 + 0.22 * x[0] + 0.08 * x[1];
    m(1, 1) = 1.3 - 0.12 * x[0] + 0.18 * x[1];
    m(0, 1) = m(1, 0) = 0.07 * x[0] - 0.04 * x[1];
    return m;
  });
}

inline MetricField affine_metric_3d() {
  return MetricField::analytic(3, [](const Vec& x) {
    Mat m = Mat::identity(3);
    m(0, 0) = 1.0 + 0.15 * x[0] + 0.05 * x[2];
    m(1, 1) = 1.2 - 0.08 * x[1] + 0.06 * x[0];
    m(2, 2) = 0.9 + 0.10 * x[2] + 0.04 * x[1];
    m(0, 1) = m(1, 0) = 0.05 * x[0] - 0.03 * x[2];
    m(0, 2) = m(2, 0) = 0.02 * x[1];
    m(1, 2) = m(2, 1) = 0.04 * x[2] + 0.02 * x[0];
    return m;
  });
}

inline MetricField affine_metric(int d) { return d == 2 ? affine_metric_2d() : affine_metric_3d(); }

// Perturbed uniform grid on the unit box with box constraints; a generic
// "random nondegenerate mesh" for oracle runs.
inline SimplicialMesh perturbed_grid(int d, int cells, double amplitude_frac, unsigned long seed,
                                     bool slide = true) {
  SimplicialMesh mesh = d == 2 ? make_uniform_grid_2d(cells) : make_uniform_grid_3d(cells);
  const Vec lo = d == 2 ? Vec(0.0, 0.0) : Vec(0.0, 0.0, 0.0);
  const Vec hi = d == 2 ? Vec(1.0, 1.0) : Vec(1.0, 1.0, 1.0);
  apply_box_constraints(mesh, lo, hi, slide);
  double amplitude = amplitude_frac / cells;
  while (true) {
    SimplicialMesh p = perturb_mesh(mesh, amplitude, seed);
    try {
      p.validate();
      return p;
    } catch (const MeshError&) {
      amplitude *= 0.5;
    }
  }
}

inline MmpdeProblem grid_problem(int d, int cells, const FunctionalSpec& spec, MetricField metric,
                                 unsigned long seed, double tau = 1.0, double amplitude_frac = 0.25) {
  SimplicialMesh mesh = perturbed_grid(d, cells, amplitude_frac, seed);
  const int n = mesh.n_elements();
  return MmpdeProblem(std::move(mesh), ComputationalMesh::master_copies(n, d), std::move(metric), spec, tau);
}

}  // namespace testsup
