#include "mmpde/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace mmpde {

namespace {

// Vertices i.i.d. uniform in the unit cube, rejected until |det E_K| clears
// a floor that keeps bound margins out of the roundoff regime.
SimplicialMesh random_simplex(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SimplicialMesh mesh;
  mesh.dim = d;
  mesh.vertices.assign(d + 1, Vec(d));
  mesh.elements = {{0, 1, 2, d == 3 ? 3 : 0}};
  const double det_floor = 1e-3 / factorial(d);
  while (true) {
    for (int j = 0; j <= d; ++j)
      for (int c = 0; c < d; ++c) mesh.vertices[j][c] = unit(rng);
    if (std::fabs(edge_matrix(mesh, 0).det()) >= det_floor) return mesh;
  }
}

Mat random_spd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  return a.transpose() * a + 1e-3 * Mat::identity(d);
}

}  // namespace

BoundSampleReport check_altitude_norm_bounds(int samples, unsigned long seed, int d, double rel_slack) {
  const ReferenceSimplex ref = reference_equilateral(d);
  std::mt19937_64 rng(seed);

  BoundSampleReport report;
  report.samples = samples;
  report.worst_lower_margin = std::numeric_limits<double>::infinity();
  report.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const SimplicialMesh k = random_simplex(rng, d);
    const Mat metric = random_spd(rng, d);

    const Mat f_inv = ref.edge_mat * edge_matrix(k, 0).inverse();  // (F_K')^{-1}
    const Mat mid_mat = f_inv * metric.inverse() * f_inv.transpose();
    const double mid = spectral_norm_sym(mid_mat);

    const double a = metric_min_altitude(k, 0, metric);
    const double lower = ref.altitude * ref.altitude / (a * a);
    const double upper = d * d * lower;

    const double lower_margin = (mid - lower) / lower;
    const double upper_margin = (upper - mid) / upper;
    report.worst_lower_margin = std::min(report.worst_lower_margin, lower_margin);
    report.worst_upper_margin = std::min(report.worst_upper_margin, upper_margin);
    if (lower_margin < -rel_slack || upper_margin < -rel_slack) ++report.violations;
  }
  return report;
}

BoundSampleReport check_diameter_norm_bounds(int samples, unsigned long seed, int d, double rel_slack) {
  std::mt19937_64 rng(seed);

  BoundSampleReport report;
  report.samples = samples;
  report.worst_lower_margin = std::numeric_limits<double>::infinity();
  report.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const SimplicialMesh ref = random_simplex(rng, d);  // arbitrary K-tilde
    const SimplicialMesh k = random_simplex(rng, d);
    const Mat metric = random_spd(rng, d);

    const Mat f = edge_matrix(k, 0) * edge_matrix(ref, 0).inverse();  // F_K': K-tilde -> K
    const double mid = spectral_norm_sym(f.transpose() * metric * f);

    const double h_km = metric_diameter(k, 0, metric);
    const double h_ref = diameter(ref, 0);
    const double rho_ref = in_diameter(ref, 0);
    const double lower = h_km * h_km / (h_ref * h_ref);
    const double upper = h_km * h_km / (rho_ref * rho_ref);

    const double lower_margin = (mid - lower) / lower;
    const double upper_margin = (upper - mid) / upper;
    report.worst_lower_margin = std::min(report.worst_lower_margin, lower_margin);
    report.worst_upper_margin = std::min(report.worst_upper_margin, upper_margin);
    if (lower_margin < -rel_slack || upper_margin < -rel_slack) ++report.violations;
  }
  return report;
}

NonsingularityFloors nonsingularity_floors_from(int d, double q, double alpha, double beta,
                                                double m_hi, double rho_lo, int n_elements,
                                                double omega_volume, double i_h_initial) {
  const ReferenceSimplex ref = reference_equilateral(d);
  NonsingularityFloors b;
  b.dim = d;
  b.q = q;
  b.alpha = alpha;
  b.beta = beta;
  b.m_hi = m_hi;
  b.rho_lo = rho_lo;
  b.n_elements = n_elements;
  b.omega_volume = omega_volume;
  b.i_h_initial = i_h_initial;
  b.a_hat = ref.altitude;
  b.h_hat = ref.diameter;

  const double two_q = 2.0 * q;
  const double denom = two_q - d;
  b.c1 = std::pow(alpha * std::pow(b.a_hat, two_q) /
                      (factorial(d) * std::pow(b.h_hat, two_q) * (beta * omega_volume + i_h_initial)),
                  1.0 / denom);
  b.c2 = std::pow(b.c1, d) / factorial(d);

  const double n = static_cast<double>(n_elements);
  b.altitude_floor = b.c1 * std::pow(rho_lo, two_q / denom) * std::pow(m_hi, -d / (2.0 * denom)) *
                     std::pow(n, -two_q / (d * denom));
  b.volume_floor = b.c2 * std::pow(rho_lo, two_q * d / denom) *
                   std::pow(m_hi, -d * d / (2.0 * denom) - d / 2.0) * std::pow(n, -two_q / denom);
  return b;
}

NonsingularityFloors nonsingularity_floors(const MmpdeProblem& problem, double initial_i_h) {
  const int d = problem.mesh.dim;
  if (!problem.spec.coercive(d))
    throw NotCoercive("nonsingularity floors need a coercive functional (Huang with p > 1, theta > 0)");
  const auto [m_lo, m_hi] = estimate_bounds(problem.metric, problem.mesh);

  double sup_det_ratio = 0.0;
  if (problem.spec.theta > 0.5) {
    for (int k = 0; k < problem.mesh.n_elements(); ++k) {
      const Mat m_k = element_metric(problem.metric, problem.mesh, k);
      const double det_jac = problem.comp.edge_det(k) / edge_matrix(problem.mesh, k).det();
      sup_det_ratio = std::max(sup_det_ratio, std::fabs(det_jac) / std::sqrt(m_k.det()));
    }
  }
  const auto constants = coercivity_constants(problem.spec, d, m_lo, m_hi, sup_det_ratio);
  return nonsingularity_floors_from(d, constants->q, constants->alpha, constants->beta, m_hi,
                                    problem.comp.rho_lower(), problem.mesh.n_elements(),
                                    domain_volume(problem.mesh), initial_i_h);
}

std::string NonsingularityFloors::to_text() const {
  std::ostringstream out;
  out << "nonsingularity_floors:\n";
  out << "  q=" << q << " alpha=" << alpha << " beta=" << beta << "\n";
  out << "  m_hi=" << m_hi << " rho_lo=" << rho_lo << " N=" << n_elements << "\n";
  out << "  omega=" << omega_volume << " I_h0=" << i_h_initial << " a_hat=" << a_hat << " h_hat=" << h_hat << "\n";
  out << "  C1=" << c1 << " C2=" << c2 << "\n";
  out << "  altitude_floor=" << altitude_floor << "\n";
  out << "  volume_floor=" << volume_floor << "\n";
  return out.str();
}

QualityReport quality_report(const SimplicialMesh& mesh, const MetricField& metric, int dihedral_bins) {
  QualityReport rep;
  rep.n_elements = mesh.n_elements();
  if (mesh.n_elements() == 0) return rep;

  std::vector<double> metric_volume(mesh.n_elements());
  rep.min_volume = std::numeric_limits<double>::infinity();
  rep.min_metric_altitude = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const double vol = element_volume(mesh, k);
    rep.min_volume = std::min(rep.min_volume, vol);
    rep.max_volume = std::max(rep.max_volume, vol);
    const Mat m_k = element_metric(metric, mesh, k);
    rep.min_metric_altitude = std::min(rep.min_metric_altitude, metric_min_altitude(mesh, k, m_k));
    metric_volume[k] = vol * std::sqrt(m_k.det());
    rep.sigma_h += metric_volume[k];
  }

  rep.equi_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const double r = metric_volume[k] * mesh.n_elements() / rep.sigma_h;
    rep.equi_min = std::min(rep.equi_min, r);
    rep.equi_max = std::max(rep.equi_max, r);
  }

  if (mesh.dim == 3) {
    rep.dihedral_histogram.assign(dihedral_bins, 0);
    rep.dihedral_bin_width = 180.0 / dihedral_bins;
    for (int k = 0; k < mesh.n_elements(); ++k) {
      for (double angle : dihedral_angles(mesh, k)) {
        int bin = static_cast<int>(angle / rep.dihedral_bin_width);
        bin = std::min(std::max(bin, 0), dihedral_bins - 1);
        ++rep.dihedral_histogram[bin];
      }
    }
  }
  return rep;
}

long QualityReport::dihedral_count_below(double degrees) const {
  long count = 0;
  for (size_t b = 0; b < dihedral_histogram.size(); ++b)
    if ((b + 1) * dihedral_bin_width <= degrees + 1e-12) count += dihedral_histogram[b];
  return count;
}

long QualityReport::dihedral_count_above(double degrees) const {
  long count = 0;
  for (size_t b = 0; b < dihedral_histogram.size(); ++b)
    if (b * dihedral_bin_width >= degrees - 1e-12) count += dihedral_histogram[b];
  return count;
}

std::string QualityReport::to_text() const {
  std::ostringstream out;
  out << "quality_report:\n";
  out << "  elements=" << n_elements << "\n";
  out << "  volume_min=" << min_volume << "\n";
  out << "  volume_max=" << max_volume << "\n";
  out << "  volume_ratio=" << (min_volume > 0 ? max_volume / min_volume : 0.0) << "\n";
  out << "  metric_altitude_min=" << min_metric_altitude << "\n";
  out << "  sigma_h=" << sigma_h << "\n";
  out << "  equidistribution_min=" << equi_min << "\n";
  out << "  equidistribution_max=" << equi_max << "\n";
  if (!dihedral_histogram.empty()) {
    out << "  dihedral_histogram (deg:count):";
    for (size_t b = 0; b < dihedral_histogram.size(); ++b)
      out << " " << b * dihedral_bin_width << "-" << (b + 1) * dihedral_bin_width << ":"
          << dihedral_histogram[b];
    out << "\n";
  }
  return out.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StudyResult scaling_study(const std::function<MmpdeProblem(int n_cells)>& make_problem,
                          const std::vector<int>& cell_sizes, const IntegratorConfig& config) {
  StudyResult result;
  std::vector<double> ns, kmins;
  for (int cells : cell_sizes) {
    MmpdeProblem problem = make_problem(cells);
    const double i_h0 = discrete_functional(problem);
    double volume_floor = 0.0;
    if (problem.spec.coercive(problem.mesh.dim))
      volume_floor = nonsingularity_floors(problem, i_h0).volume_floor;

    const IntegrateResult run = integrate(std::move(problem), config);

    double k_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < run.mesh.n_elements(); ++k)
      k_min = std::min(k_min, element_volume(run.mesh, k));

    ns.push_back(static_cast<double>(run.mesh.n_elements()));
    kmins.push_back(k_min);
    const double running = ns.size() >= 2 ? loglog_slope(ns, kmins) : 0.0;
    result.rows.push_back({run.mesh.n_elements(), k_min, run.final_i_h, volume_floor, running});
  }
  result.slope = loglog_slope(ns, kmins);
  return result;
}

std::string StudyResult::to_csv() const {
  std::string out = "N,K_min,I_h_final,volume_floor,slope_running\n";
  char buf[200];
  for (const StudyRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.n_elements, r.k_min, r.i_h_final,
                  r.volume_floor, r.slope_running);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "# slope=%.17g\n", slope);
  out += buf;
  return out;
}

}  // namespace mmpde
