#pragma once

#include <functional>
#include <string>

#include "mmpde/mmpde.hpp"

namespace mmpde {

enum class Scheme { ForwardEuler, Rk2Adaptive };

struct IntegratorConfig {
  Scheme scheme = Scheme::ForwardEuler;
  double dt_init = 0.0;  // <= 0 selects an automatic first step from the initial velocities
  double dt_min = 1e-14;
  double dt_max = 1e3;
  double energy_backtrack_factor = 0.5;
  double t_end = 1e30;
  double stop_rel_tol = 1e-8;
  int stop_window = 10;
  // Accepted steps may move a vertex at most this fraction of the minimum
  // altitude over its element patch.
  double displacement_fraction = 0.4;
  int grow_after = 5;
  double grow_factor = 1.2;
};

struct TraceRow {
  double t = 0.0;
  double i_h = 0.0;
  double k_min = 0.0;
  double grad_inf = 0.0;
  double dt = 0.0;
};

enum class TerminationReason { Converged, TimeLimit, DtUnderflow };
std::string to_string(TerminationReason reason);

struct EnergyTrace {
  std::vector<TraceRow> rows;
  TerminationReason termination = TerminationReason::TimeLimit;
  // CSV with header t,I_h,K_min,grad_inf,dt and a trailing termination comment.
  std::string to_csv() const;
};

enum class RejectReason { EnergyIncrease, ElementInversion, ExcessiveDisplacement };
std::string to_string(RejectReason reason);

struct StepOutcome {
  bool accepted = false;
  RejectReason reject_reason = RejectReason::EnergyIncrease;
  std::vector<Vec> new_positions;
  double new_i_h = 0.0;
};

// One candidate step of size dt from the current state. Accepted only when
// the new mesh has positive volumes, the energy does not increase, and no
// vertex moves more than displacement_fraction of its local minimum altitude.
StepOutcome step(const MmpdeProblem& problem, const VelocityField& velocity, double current_i_h,
                 double dt, const std::vector<double>& displacement_guard, Scheme scheme,
                 double displacement_fraction);
StepOutcome step(const MmpdeProblem& problem, double dt, Scheme scheme = Scheme::ForwardEuler,
                 double displacement_fraction = 0.4);

struct IntegrateResult {
  SimplicialMesh mesh;
  EnergyTrace trace;
  TerminationReason reason = TerminationReason::TimeLimit;
  double final_i_h = 0.0;
  VelocityField final_velocity;
  double t_final = 0.0;
};

// Called after each accepted step with the updated problem state.
using StepObserver = std::function<void(double t, const MmpdeProblem&, double i_h, double dt)>;

IntegrateResult integrate(MmpdeProblem problem, const IntegratorConfig& config,
                          const StepObserver& observer = {});

}  // namespace mmpde
