#pragma once

#include <vector>

#include "hidden/calendar.hpp"

namespace hidden {

enum class DistKind { UnitExponential, Lognormal };

/// Law of the time-changed delay: unit exponential (no free parameters) or
/// lognormal with mu fixed at 0 and free sigma. Fixing the scale removes the
/// degeneracy between the exposure level and the scale of the distribution.
struct TimeChangedDistribution {
  DistKind kind = DistKind::UnitExponential;
  double sigma = 1.0;  // lognormal only

  double cdf(double u) const;
  /// Survival function 1 - F(u), accurate deep in the tail where cdf rounds
  /// to 1 and differences of cdf values cancel catastrophically.
  double sf(double u) const;
  double pdf(double u) const;
  double pdf_derivative(double u) const;

  // Derivatives with respect to theta = log(sigma); zero for the exponential.
  double cdf_dtheta(double u) const;
  double pdf_dtheta(double u) const;
  double cdf_dtheta2(double u) const;

  double quantile(double p) const;
};

/// Standard-normal helpers shared with the confidence-interval code.
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

/// Covariate specification plus coefficients; alpha_{t,s} = exp(x'_{t,s} gamma).
struct ExposureModel {
  CovariateSpec spec;
  std::vector<double> gamma;
};

double exposure(const ExposureModel& model, DateIndex t, DateIndex s, const Calendar& cal);

/// Observation exposures for a fixed occurrence date t, with cumulative sums
/// cum[d] = phi_t(d).
struct ExposureSchedule {
  DateIndex t;
  std::vector<double> alpha;  // alpha[d] = alpha_{t, t+d}
  std::vector<double> cum;    // cum[0] = 0, cum[d] = sum of alpha[0..d-1]

  int horizon() const { return static_cast<int>(alpha.size()); }
  double phi(int d) const;
};

ExposureSchedule make_schedule(const ExposureModel& model, DateIndex t, const Calendar& cal,
                               int days);

/// Extends the schedule until the tail mass 1 - F(phi_t(H)) drops below
/// `tail_mass`, capped at `max_days`.
ExposureSchedule make_schedule_to_tail(const ExposureModel& model, DateIndex t,
                                       const Calendar& cal, const TimeChangedDistribution& dist,
                                       double tail_mass = 1e-6, int max_days = 3650);

/// p_{t,s} = F(phi_t(s-t+1)) - F(phi_t(s-t)); requires sched.t == t.
double cell_probability(DateIndex t, DateIndex s, const ExposureSchedule& sched,
                        const TimeChangedDistribution& dist);

/// p_t^Obs(tau) = F(phi_t(tau-t+1)).
double observed_probability(DateIndex t, DateIndex tau, const ExposureSchedule& sched,
                            const TimeChangedDistribution& dist);

}  // namespace hidden
