#include "hidden/timechange.hpp"

#include <cmath>
#include <numeric>

namespace hidden {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_quantile(double p) {
  // Acklam's rational approximation, refined with one Halley step.
  if (p <= 0.0 || p >= 1.0) throw std::domain_error("normal_quantile: p in (0,1) required");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = normal_cdf(x) - p;
  const double u = e / normal_pdf(x);
  x = x - u / (1 + x * u / 2);
  return x;
}

double TimeChangedDistribution::cdf(double u) const {
  if (u < 0) throw std::domain_error("cdf: u >= 0 required");
  if (kind == DistKind::UnitExponential) return -std::expm1(-u);
  if (u == 0) return 0.0;
  return normal_cdf(std::log(u) / sigma);
}

double TimeChangedDistribution::sf(double u) const {
  if (u < 0) throw std::domain_error("sf: u >= 0 required");
  if (kind == DistKind::UnitExponential) return std::exp(-u);
  if (u == 0) return 1.0;
  return 0.5 * std::erfc(std::log(u) / (sigma * kSqrt2));
}

double TimeChangedDistribution::pdf(double u) const {
  if (u < 0) throw std::domain_error("pdf: u >= 0 required");
  if (kind == DistKind::UnitExponential) return std::exp(-u);
  if (u == 0) return 0.0;
  const double z = std::log(u) / sigma;
  return normal_pdf(z) / (u * sigma);
}

double TimeChangedDistribution::pdf_derivative(double u) const {
  if (u < 0) throw std::domain_error("pdf_derivative: u >= 0 required");
  if (kind == DistKind::UnitExponential) return -std::exp(-u);
  if (u == 0) return 0.0;
  const double z = std::log(u) / sigma;
  return -pdf(u) / u * (1.0 + z / sigma);
}

double TimeChangedDistribution::cdf_dtheta(double u) const {
  if (kind == DistKind::UnitExponential || u <= 0) return 0.0;
  const double z = std::log(u) / sigma;
  return -z * normal_pdf(z);
}

double TimeChangedDistribution::pdf_dtheta(double u) const {
  if (kind == DistKind::UnitExponential || u <= 0) return 0.0;
  const double z = std::log(u) / sigma;
  return (z * z - 1.0) * pdf(u);
}

double TimeChangedDistribution::cdf_dtheta2(double u) const {
  if (kind == DistKind::UnitExponential || u <= 0) return 0.0;
  const double z = std::log(u) / sigma;
  return z * normal_pdf(z) * (1.0 - z * z);
}

double TimeChangedDistribution::quantile(double p) const {
  if (p < 0 || p >= 1) throw std::domain_error("quantile: p in [0,1) required");
  if (p == 0) return 0.0;
  if (kind == DistKind::UnitExponential) return -std::log1p(-p);
  return std::exp(sigma * normal_quantile(p));
}

double exposure(const ExposureModel& model, DateIndex t, DateIndex s, const Calendar& cal) {
  if (s < t) throw std::invalid_argument("exposure: observation before occurrence");
  if (static_cast<int>(model.gamma.size()) != model.spec.columns()) {
    throw std::invalid_argument("exposure: gamma length does not match spec columns");
  }
  thread_local std::vector<int> cols;
  active_columns(model.spec, cal, t, s, cols);
  double lp = 0.0;
  for (int c : cols) lp += model.gamma[c];
  return std::exp(lp);
}

double ExposureSchedule::phi(int d) const {
  if (d < 0 || d >= static_cast<int>(cum.size())) {
    throw std::out_of_range("phi: delay beyond schedule horizon");
  }
  return cum[d];
}

ExposureSchedule make_schedule(const ExposureModel& model, DateIndex t, const Calendar& cal,
                               int days) {
  ExposureSchedule sched;
  sched.t = t;
  sched.alpha.reserve(days);
  sched.cum.reserve(days + 1);
  sched.cum.push_back(0.0);
  for (int d = 0; d < days; ++d) {
    const double a = exposure(model, t, t + d, cal);
    sched.alpha.push_back(a);
    sched.cum.push_back(sched.cum.back() + a);
  }
  return sched;
}

ExposureSchedule make_schedule_to_tail(const ExposureModel& model, DateIndex t,
                                       const Calendar& cal, const TimeChangedDistribution& dist,
                                       double tail_mass, int max_days) {
  const double target = dist.quantile(1.0 - tail_mass);
  ExposureSchedule sched;
  sched.t = t;
  sched.cum.push_back(0.0);
  while (sched.horizon() < max_days && sched.cum.back() <= target) {
    const double a = exposure(model, t, t + sched.horizon(), cal);
    sched.alpha.push_back(a);
    sched.cum.push_back(sched.cum.back() + a);
  }
  return sched;
}

double cell_probability(DateIndex t, DateIndex s, const ExposureSchedule& sched,
                        const TimeChangedDistribution& dist) {
  if (s < t) throw std::invalid_argument("cell_probability: observation before occurrence");
  if (sched.t != t) throw std::invalid_argument("cell_probability: schedule for wrong date");
  const int d = s - t;
  // Survival differences stay accurate in the far tail where both cdf values
  // round to 1.
  return dist.sf(sched.phi(d)) - dist.sf(sched.phi(d + 1));
}

double observed_probability(DateIndex t, DateIndex tau, const ExposureSchedule& sched,
                            const TimeChangedDistribution& dist) {
  if (tau < t) throw std::invalid_argument("observed_probability: tau before occurrence");
  if (sched.t != t) throw std::invalid_argument("observed_probability: schedule for wrong date");
  return dist.cdf(sched.phi(tau - t + 1));
}

}  // namespace hidden
