#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hidden/counts.hpp"
#include "hidden/timechange.hpp"

namespace hidden {

struct FitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;  // infinity norm of the score
  double step_tolerance = 1e-8;
  double ridge_floor = 1e-8;  // starting ridge when -H is not positive definite
  int step_halving_max = 20;
  double boundary_bound = 30.0;  // |gamma_i| beyond this is flagged as boundary drift
};

struct IterationRecord {
  int iteration = 0;
  double loglik = 0.0;
  double score_norm = 0.0;
  int halvings = 0;
  double ridge = 0.0;
};

struct FitResult {
  ExposureModel model;
  std::optional<double> sigma;  // lognormal only
  double loglik = 0.0;
  double score_norm = 0.0;
  Eigen::MatrixXd hessian;  // at the returned parameters, including the sigma row
  int iterations = 0;
  bool converged = false;
  bool boundary_drift = false;
  std::vector<int> collinear_columns;  // non-empty when the spec is not identifiable
  std::vector<int> pinned_columns;     // columns without observed events, fixed at gamma = -20
  std::vector<IterationRecord> trace;
  std::string message;
};

struct ConfidenceIntervals {
  double level = 0.95;
  bool valid = false;  // false when -H is not positive definite
  std::vector<double> estimate;  // exp(gamma)
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> std_error;  // on the gamma scale
  std::optional<double> sigma_lower, sigma_upper;
  std::string message;
};

/// Right-truncated delay loglikelihood for any smooth distribution:
/// sum N_{t,s} log p_{t,s} - sum N_t^Obs log p_t^Obs.
double loglik_generic(const ExposureModel& model, std::optional<double> sigma,
                      const CountTriangle& tri, DistKind kind, const Calendar& cal);

/// Fast form for the unit exponential; agrees with loglik_generic.
double loglik_exponential(const ExposureModel& model, const CountTriangle& tri,
                          const Calendar& cal);

/// Analytic score. For the lognormal the last component is the derivative with
/// respect to theta = log(sigma).
Eigen::VectorXd score(const ExposureModel& model, std::optional<double> sigma,
                      const CountTriangle& tri, DistKind kind, const Calendar& cal);

Eigen::MatrixXd hessian(const ExposureModel& model, std::optional<double> sigma,
                        const CountTriangle& tri, DistKind kind, const Calendar& cal);

FitResult fit(const CountTriangle& tri, const CovariateSpec& spec, DistKind kind,
              const std::vector<double>* init, const FitOptions& opts, const Calendar& cal);

ConfidenceIntervals confidence_intervals(const FitResult& fit, double level = 0.95);

/// Initial delay-bin coefficients from the per-delay hazard exposures.
std::vector<double> initial_parameters(const CountTriangle& tri, const CovariateSpec& spec);

}  // namespace hidden
