#pragma once

#include <optional>

#include "mmpde/errors.hpp"
#include "mmpde/linalg.hpp"

namespace mmpde {

enum class FunctionalKind { Winslow, Huang };

// Meshing functional selector. Huang requires p >= 1 (theta != 1/2 makes the
// det(J)^{p-1} factor live) or theta == 1/2 exactly, where that term has a
// zero coefficient and any p > 0 is admissible.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::Winslow;
  double p = 1.0;
  double theta = 0.0;

  static FunctionalSpec winslow() { return {FunctionalKind::Winslow, 1.0, 0.0}; }
  static FunctionalSpec huang(double p, double theta);

  // Coercivity exponent q: d*p/2 for Huang, 1 for Winslow.
  double exponent_q(int d) const;
  // Coercive in the sense needed by the altitude/volume floors (q > d/2).
  bool coercive(int d) const;
};

// The integrand value and its scalar-by-matrix derivative bundle. Matrix
// entries follow (dG/dJ)_{ij} = dG/dJ_{ji}, so the chain rule reads
// dG/dt = tr(dG_dj * dJ/dt).
struct GDerivatives {
  double g = 0.0;
  Mat dg_dj;
  double dg_ddet = 0.0;
  Mat dg_dm;
  Vec dg_dx;
};

GDerivatives eval_g(const FunctionalSpec& spec, const Mat& jac, double det_jac,
                    const Mat& metric, const Vec& x);
// Value-only fast path for functional sums.
double eval_g_value(const FunctionalSpec& spec, const Mat& jac, double det_jac, const Mat& metric);

// Balance function P(M) making the MMPDE invariant under M -> c*M.
double balance_p(const FunctionalSpec& spec, const Mat& metric);

struct CoercivityConstants {
  double q = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// Constants of the lower bound G >= alpha * tr(J M^{-1} J^T)^q - beta.
// Conservative: alpha = theta * m_lo^{d/2}; beta = 0 for theta <= 1/2, else
// |1-2theta| d^{dp/2} m_hi^{d/2} sup_det_ratio^p with the sup estimated by
// the caller from the current mesh. Empty when the functional is not
// coercive with q > d/2 (Winslow, Huang with p <= 1 or theta = 0).
std::optional<CoercivityConstants> coercivity_constants(const FunctionalSpec& spec, int d,
                                                        double m_lo, double m_hi,
                                                        double sup_det_ratio = 0.0);

}  // namespace mmpde
