#include "mmpde/functionals.hpp"

#include <cmath>
#include <stdexcept>

namespace mmpde {

FunctionalSpec FunctionalSpec::huang(double p, double theta) {
  if (!(p > 0.0)) throw std::invalid_argument("Huang functional requires p > 0");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("Huang functional requires theta in [0,1]");
  if (p < 1.0 && theta != 0.5)
    throw std::invalid_argument("Huang functional requires p >= 1 unless theta = 1/2 (det(J)^{p-1} term)");
  return {FunctionalKind::Huang, p, theta};
}

double FunctionalSpec::exponent_q(int d) const {
  return kind == FunctionalKind::Huang ? d * p / 2.0 : 1.0;
}

bool FunctionalSpec::coercive(int d) const {
  return kind == FunctionalKind::Huang && p > 1.0 && theta > 0.0 && exponent_q(d) > d / 2.0;
}

namespace {

void require_spd(const Mat& metric, const char* where) {
  if (!metric.is_spd()) throw NonSPDMetric(std::string(where) + ": metric is not SPD");
}

}  // namespace

double eval_g_value(const FunctionalSpec& spec, const Mat& jac, double det_jac, const Mat& metric) {
  require_spd(metric, "eval_g_value");
  const int d = jac.dim();
  const Mat minv = metric.inverse();
  const double t = (jac * minv * jac.transpose()).trace();
  if (spec.kind == FunctionalKind::Winslow) return t;

  const double det_m = metric.det();
  const double s = std::sqrt(det_m);
  const double e = d * spec.p / 2.0;
  double g = spec.theta * s * std::pow(t, e);
  const double c2 = 1.0 - 2.0 * spec.theta;
  if (c2 != 0.0) {
    if (det_jac < 0.0)
      throw DegenerateElement("Huang functional evaluated with det(J) < 0");
    g += c2 * std::pow(static_cast<double>(d), e) * s * std::pow(det_jac / s, spec.p);
  }
  return g;
}

GDerivatives eval_g(const FunctionalSpec& spec, const Mat& jac, double det_jac,
                    const Mat& metric, const Vec& x) {
  require_spd(metric, "eval_g");
  const int d = jac.dim();
  GDerivatives out;
  out.dg_dx = Vec::zero(d);
  (void)x;  // dG/dx = 0 for both implemented functionals

  const Mat minv = metric.inverse();
  const Mat jt = jac.transpose();
  const Mat minv_jt = minv * jt;
  const double t = (jac * minv_jt).trace();

  if (spec.kind == FunctionalKind::Winslow) {
    out.g = t;
    out.dg_dj = 2.0 * minv_jt;
    out.dg_ddet = 0.0;
    out.dg_dm = -(minv_jt * jac * minv);
    return out;
  }

  const double p = spec.p;
  const double theta = spec.theta;
  const double det_m = metric.det();
  const double s = std::sqrt(det_m);
  const double e = d * p / 2.0;
  const double de = std::pow(static_cast<double>(d), e);
  const double t_pow = std::pow(t, e);
  const double t_pow1 = std::pow(t, e - 1.0);

  out.g = theta * s * t_pow;
  out.dg_dj = (d * p * theta * s * t_pow1) * minv_jt;
  out.dg_dm = -(theta * d * p / 2.0 * s * t_pow1) * (minv_jt * jac * minv) +
              (theta / 2.0 * s * t_pow) * minv;
  out.dg_ddet = 0.0;

  const double c2 = 1.0 - 2.0 * theta;
  if (c2 != 0.0) {
    if (det_jac < 0.0)
      throw DegenerateElement("Huang functional evaluated with det(J) < 0");
    const double ratio_pow = std::pow(det_jac / s, p);
    out.g += c2 * de * s * ratio_pow;
    out.dg_ddet = p * c2 * de * std::pow(det_m, (1.0 - p) / 2.0) * std::pow(det_jac, p - 1.0);
    out.dg_dm += (c2 * (1.0 - p) * de / 2.0 * s * ratio_pow) * minv;
  }
  return out;
}

double balance_p(const FunctionalSpec& spec, const Mat& metric) {
  require_spd(metric, "balance_p");
  const int d = metric.dim();
  const double det_m = metric.det();
  if (spec.kind == FunctionalKind::Winslow) return std::pow(det_m, 1.0 / d);
  return std::pow(det_m, (spec.p - 1.0) / 2.0);
}

std::optional<CoercivityConstants> coercivity_constants(const FunctionalSpec& spec, int d,
                                                        double m_lo, double m_hi,
                                                        double sup_det_ratio) {
  if (!spec.coercive(d)) return std::nullopt;
  CoercivityConstants c;
  c.q = spec.exponent_q(d);
  c.alpha = spec.theta * std::pow(m_lo, d / 2.0);
  if (spec.theta <= 0.5) {
    c.beta = 0.0;
  } else {
    c.beta = std::fabs(1.0 - 2.0 * spec.theta) * std::pow(static_cast<double>(d), d * spec.p / 2.0) *
             std::pow(m_hi, d / 2.0) * std::pow(sup_det_ratio, spec.p);
  }
  return c;
}

}  // namespace mmpde
