#include "mmpde/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mmpde {

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::Converged: return "converged";
    case TerminationReason::TimeLimit: return "time_limit";
    case TerminationReason::DtUnderflow: return "dt_underflow";
  }
  return "unknown";
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::EnergyIncrease: return "energy_increase";
    case RejectReason::ElementInversion: return "element_inversion";
    case RejectReason::ExcessiveDisplacement: return "excessive_displacement";
  }
  return "unknown";
}

std::string EnergyTrace::to_csv() const {
  std::string out = "t,I_h,K_min,grad_inf,dt\n";
  char buf[160];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.i_h, r.k_min, r.grad_inf, r.dt);
    out += buf;
  }
  out += "# termination=" + to_string(termination) + "\n";
  return out;
}

namespace {

// Minimum Euclidean altitude over each vertex's element patch; the per-step
// displacement cap.
std::vector<double> displacement_guards(const SimplicialMesh& mesh) {
  std::vector<double> element_alt(mesh.n_elements());
  const Mat eye = Mat::identity(mesh.dim);
  for (int k = 0; k < mesh.n_elements(); ++k) element_alt[k] = metric_min_altitude(mesh, k, eye);
  std::vector<double> guard(mesh.n_vertices(), std::numeric_limits<double>::infinity());
  for (int k = 0; k < mesh.n_elements(); ++k)
    for (int j = 0; j <= mesh.dim; ++j) {
      const int v = mesh.elements[k][j];
      guard[v] = std::min(guard[v], element_alt[k]);
    }
  return guard;
}

bool all_volumes_positive(const SimplicialMesh& mesh) {
  for (int k = 0; k < mesh.n_elements(); ++k)
    if (signed_element_volume(mesh, k) <= 0.0) return false;
  return true;
}

double min_volume(const SimplicialMesh& mesh) {
  double v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.n_elements(); ++k) v = std::min(v, element_volume(mesh, k));
  return v;
}

}  // namespace

StepOutcome step(const MmpdeProblem& problem, const VelocityField& velocity, double current_i_h,
                 double dt, const std::vector<double>& displacement_guard, Scheme scheme,
                 double displacement_fraction) {
  const SimplicialMesh& mesh = problem.mesh;
  StepOutcome out;

  std::vector<Vec> candidate(mesh.n_vertices());
  if (scheme == Scheme::ForwardEuler) {
    for (int i = 0; i < mesh.n_vertices(); ++i)
      candidate[i] = mesh.vertices[i] + dt * velocity.v[i];
  } else {
    // explicit midpoint; rejection gates below provide the adaptivity
    MmpdeProblem half = problem;
    for (int i = 0; i < mesh.n_vertices(); ++i)
      half.mesh.vertices[i] = mesh.vertices[i] + 0.5 * dt * velocity.v[i];
    if (!all_volumes_positive(half.mesh)) {
      out.reject_reason = RejectReason::ElementInversion;
      return out;
    }
    const VelocityField mid = assemble_velocities(half);
    for (int i = 0; i < mesh.n_vertices(); ++i)
      candidate[i] = mesh.vertices[i] + dt * mid.v[i];
  }

  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const double moved = (candidate[i] - mesh.vertices[i]).norm();
    if (moved > displacement_fraction * displacement_guard[i]) {
      out.reject_reason = RejectReason::ExcessiveDisplacement;
      return out;
    }
  }

  MmpdeProblem trial = problem;
  trial.mesh.vertices = candidate;
  if (!all_volumes_positive(trial.mesh)) {
    out.reject_reason = RejectReason::ElementInversion;
    return out;
  }

  const double new_i_h = discrete_functional(trial);
  if (!(new_i_h <= current_i_h)) {
    out.reject_reason = RejectReason::EnergyIncrease;
    return out;
  }

  out.accepted = true;
  out.new_positions = std::move(candidate);
  out.new_i_h = new_i_h;
  return out;
}

StepOutcome step(const MmpdeProblem& problem, double dt, Scheme scheme, double displacement_fraction) {
  const VelocityField velocity = assemble_velocities(problem);
  const double i_h = discrete_functional(problem);
  return step(problem, velocity, i_h, dt, displacement_guards(problem.mesh), scheme, displacement_fraction);
}

IntegrateResult integrate(MmpdeProblem problem, const IntegratorConfig& config,
                          const StepObserver& observer) {
  if (!(config.dt_min <= config.dt_max)) throw MeshError("integrator config: dt_min > dt_max");
  if (!(config.stop_rel_tol > 0.0)) throw MeshError("integrator config: stop_rel_tol must be positive");
  if (!(config.energy_backtrack_factor > 0.0 && config.energy_backtrack_factor < 1.0))
    throw MeshError("integrator config: backtrack factor must lie in (0,1)");
  if (!all_volumes_positive(problem.mesh)) throw MeshError("initial mesh has nonpositive element volumes");

  IntegrateResult result;
  double t = 0.0;
  double i_h = discrete_functional(problem);
  VelocityField velocity = assemble_velocities(problem);
  std::vector<double> guards = displacement_guards(problem.mesh);

  double dt = config.dt_init;
  if (dt <= 0.0) {
    const double vmax = velocity.inf_norm();
    double gmin = std::numeric_limits<double>::infinity();
    for (double g : guards) gmin = std::min(gmin, g);
    dt = vmax > 0.0 ? 0.5 * config.displacement_fraction * gmin / vmax : config.dt_max;
  }
  dt = std::clamp(dt, config.dt_min, config.dt_max);

  result.trace.rows.push_back({t, i_h, min_volume(problem.mesh), velocity.inf_norm(), 0.0});

  // I_h at the accepted steps of the trailing stop window
  std::vector<double> window;
  window.push_back(i_h);

  int consecutive_accepts = 0;
  TerminationReason reason = TerminationReason::TimeLimit;

  while (config.t_end - t > config.dt_min) {
    double try_dt = std::min(dt, config.t_end - t);
    StepOutcome outcome;
    bool underflow = false;
    while (true) {
      outcome = step(problem, velocity, i_h, try_dt, guards, config.scheme, config.displacement_fraction);
      if (outcome.accepted) break;
      try_dt *= config.energy_backtrack_factor;
      consecutive_accepts = 0;
      if (try_dt < config.dt_min) {
        underflow = true;
        break;
      }
    }
    if (underflow) {
      reason = TerminationReason::DtUnderflow;
      break;
    }

    problem.mesh.vertices = std::move(outcome.new_positions);
    t += try_dt;
    i_h = outcome.new_i_h;
    velocity = assemble_velocities(problem);
    guards = displacement_guards(problem.mesh);
    result.trace.rows.push_back({t, i_h, min_volume(problem.mesh), velocity.inf_norm(), try_dt});
    if (observer) observer(t, problem, i_h, try_dt);

    dt = try_dt;
    if (++consecutive_accepts >= config.grow_after) {
      dt = std::min(dt * config.grow_factor, config.dt_max);
      consecutive_accepts = 0;
    }

    window.push_back(i_h);
    if (static_cast<int>(window.size()) > config.stop_window + 1) window.erase(window.begin());
    if (static_cast<int>(window.size()) == config.stop_window + 1) {
      const double drop = window.front() - window.back();
      if (drop <= config.stop_rel_tol * std::fabs(window.back())) {
        reason = TerminationReason::Converged;
        break;
      }
    }
  }

  result.mesh = std::move(problem.mesh);
  result.trace.termination = reason;
  result.reason = reason;
  result.final_i_h = i_h;
  result.final_velocity = std::move(velocity);
  result.t_final = t;
  return result;
}

}  // namespace mmpde
