#pragma once

#include <string>

#include "mmpde/integrate.hpp"
#include "mmpde/mmpde.hpp"

namespace mmpde {

struct BoundSampleReport {
  int samples = 0;
  int violations = 0;
  // smallest slack seen on each inequality, relative; negative means violated
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
};

// Altitude bounds: a-tilde^2/a_{K,M}^2 <= ||(F')^{-1} M^{-1} (F')^{-T}|| <= d^2 a-tilde^2/a_{K,M}^2
// with F' mapping the unitary equilateral simplex onto a random simplex.
BoundSampleReport check_altitude_norm_bounds(int samples, unsigned long seed, int d, double rel_slack = 1e-9);
// Diameter bounds: h_{K,M}^2/h-tilde^2 <= ||F'^T M F'|| <= h_{K,M}^2/rho-tilde^2
// with a random reference simplex.
BoundSampleReport check_diameter_norm_bounds(int samples, unsigned long seed, int d, double rel_slack = 1e-9);

struct NonsingularityFloors {
  double c1 = 0.0;
  double c2 = 0.0;
  double altitude_floor = 0.0;
  double volume_floor = 0.0;
  // inputs, recorded for reporting
  double q = 0.0, alpha = 0.0, beta = 0.0;
  double m_hi = 0.0, rho_lo = 0.0;
  int n_elements = 0;
  double omega_volume = 0.0, i_h_initial = 0.0;
  double a_hat = 0.0, h_hat = 0.0;
  int dim = 0;

  std::string to_text() const;
};

// Floors from raw ingredients (exposed so scaling behaviour in N is testable).
NonsingularityFloors nonsingularity_floors_from(int d, double q, double alpha, double beta,
                                                double m_hi, double rho_lo, int n_elements,
                                                double omega_volume, double i_h_initial);
// Floors of the given problem, evaluated at its current (initial) state.
// Throws NotCoercive for functionals with q <= d/2.
NonsingularityFloors nonsingularity_floors(const MmpdeProblem& problem, double initial_i_h);

struct QualityReport {
  double min_volume = 0.0;
  double max_volume = 0.0;
  double min_metric_altitude = 0.0;
  double sigma_h = 0.0;  // sum |K| sqrt(det M_K)
  double equi_min = 0.0;  // extremes of r_K = |K| sqrt(det M_K) N / sigma_h
  double equi_max = 0.0;
  std::vector<long> dihedral_histogram;  // 3D only; counts over [0,180] degrees
  double dihedral_bin_width = 10.0;
  int n_elements = 0;

  long dihedral_count_below(double degrees) const;
  long dihedral_count_above(double degrees) const;
  std::string to_text() const;
};

QualityReport quality_report(const SimplicialMesh& mesh, const MetricField& metric, int dihedral_bins = 18);

struct StudyRow {
  int n_elements = 0;
  double k_min = 0.0;
  double i_h_final = 0.0;
  double volume_floor = 0.0;
  double slope_running = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double slope = 0.0;  // least-squares slope of log K_min vs log N
  std::string to_csv() const;
};

// Runs the factory-provided problem per size and fits log|K|_min against
// log N across the final meshes.
StudyResult scaling_study(const std::function<MmpdeProblem(int n_cells)>& make_problem,
                          const std::vector<int>& cell_sizes, const IntegratorConfig& config);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mmpde
