#include <doctest.h>

#include <cmath>
#include <random>

#include "hidden/likelihood.hpp"

using namespace hidden;

namespace {

Calendar default_cal() { return Calendar({2002, 1, 1}, dutch_holidays(2001, 2010)); }

// Small random triangle with truncation binding on the late rows.
CountTriangle random_triangle(std::mt19937& rng, int n_dates = 30) {
  CountTriangle tri;
  tri.eval_date = DateIndex{n_dates + 5};
  std::poisson_distribution<int> pois(3.0);
  std::geometric_distribution<int> delay(0.3);
  for (int t = 1; t <= n_dates; ++t) {
    auto& row = tri.rows[t];
    const int n = 1 + pois(rng);
    for (int k = 0; k < n; ++k) {
      const int d = std::min(delay(rng), tri.eval_date.day - t);
      ++row.by_delay[d];
      ++row.total;
    }
  }
  return tri;
}

CovariateSpec random_spec(std::mt19937& rng) {
  CovariateSpec spec;
  spec.effects.push_back({EffectKind::Intercept, {}, {}});
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(rng)) {
    case 0: spec.effects.push_back({EffectKind::ReportingDow, {}, {}}); break;
    case 1: spec.effects.push_back({EffectKind::DelayBins, {0, 1, 3, 7}, {}}); break;
    default:
      spec.effects.push_back({EffectKind::ReportingHoliday, {}, {}});
      spec.effects.push_back({EffectKind::DelayBins, {0, 2}, {}});
      break;
  }
  return spec;
}

std::vector<double> random_gamma(std::mt19937& rng, int p, double log_base = -2.0) {
  std::normal_distribution<double> normal(0.0, 0.3);
  std::vector<double> gamma(p);
  for (int i = 0; i < p; ++i) gamma[i] = normal(rng);
  gamma[0] += log_base;  // keep exposures around exp(log_base) per day
  return gamma;
}

}  // namespace

TEST_CASE("hand-computed loglikelihood, gamma = 0, unit exponential") {
  Calendar cal = default_cal();
  CountTriangle tri;
  tri.eval_date = DateIndex{2};
  tri.rows[1].by_delay = {{0, 1}, {1, 1}};
  tri.rows[1].total = 2;
  ExposureModel model;
  model.spec.effects = {{EffectKind::Intercept, {}, {}}};
  model.gamma = {0.0};
  const double p00 = 1.0 - std::exp(-1.0);
  const double p01 = std::exp(-1.0) * (1.0 - std::exp(-1.0));
  const double pobs = 1.0 - std::exp(-2.0);
  const double expected = std::log(p00) + std::log(p01) - 2.0 * std::log(pobs);
  CHECK(loglik_generic(model, std::nullopt, tri, DistKind::UnitExponential, cal) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(loglik_exponential(model, tri, cal) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("full truncation cancellation: single forced cell gives zero loglik") {
  Calendar cal = default_cal();
  CountTriangle tri;
  tri.eval_date = DateIndex{1};
  tri.rows[1].by_delay = {{0, 3}};
  tri.rows[1].total = 3;
  ExposureModel model;
  model.spec.effects = {{EffectKind::Intercept, {}, {}}};
  model.gamma = {0.7};
  for (DistKind kind : {DistKind::UnitExponential, DistKind::Lognormal}) {
    CHECK(std::abs(loglik_generic(model, 1.2, tri, kind, cal)) < 1e-12);
  }
  CHECK(std::abs(loglik_exponential(model, tri, cal)) < 1e-12);
}

TEST_CASE("exponential fast path equals the generic evaluator") {
  std::mt19937 rng(7);
  Calendar cal = default_cal();
  for (int rep = 0; rep < 10; ++rep) {
    const CountTriangle tri = random_triangle(rng);
    ExposureModel model;
    model.spec = random_spec(rng);
    model.gamma = random_gamma(rng, model.spec.columns());
    const double fast = loglik_exponential(model, tri, cal);
    const double generic = loglik_generic(model, std::nullopt, tri, DistKind::UnitExponential, cal);
    CHECK(std::abs(fast - generic) < 1e-8);
  }
}

TEST_CASE("analytic score matches central finite differences") {
  std::mt19937 rng(11);
  Calendar cal = default_cal();
  for (DistKind kind : {DistKind::UnitExponential, DistKind::Lognormal}) {
    const CountTriangle tri = random_triangle(rng);
    ExposureModel model;
    model.spec = random_spec(rng);
    model.gamma = random_gamma(rng, model.spec.columns());
    const double sigma = 0.9;
    const std::optional<double> sig =
        kind == DistKind::Lognormal ? std::optional<double>(sigma) : std::nullopt;
    const Eigen::VectorXd s = score(model, sig, tri, kind, cal);
    const int p = model.spec.columns();
    for (int i = 0; i < p; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(model.gamma[i]));
      ExposureModel up = model, dn = model;
      up.gamma[i] += h;
      dn.gamma[i] -= h;
      const double fd = (loglik_generic(up, sig, tri, kind, cal) -
                         loglik_generic(dn, sig, tri, kind, cal)) /
                        (2 * h);
      CHECK(s[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    if (kind == DistKind::Lognormal) {
      const double h = 1e-6;
      const double fd = (loglik_generic(model, std::exp(std::log(sigma) + h), tri, kind, cal) -
                         loglik_generic(model, std::exp(std::log(sigma) - h), tri, kind, cal)) /
                        (2 * h);
      CHECK(s[p] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("analytic Hessian matches finite-differenced score and is symmetric") {
  std::mt19937 rng(23);
  Calendar cal = default_cal();
  for (DistKind kind : {DistKind::UnitExponential, DistKind::Lognormal}) {
    const CountTriangle tri = random_triangle(rng, 20);
    ExposureModel model;
    model.spec = random_spec(rng);
    model.gamma = random_gamma(rng, model.spec.columns());
    const double sigma = 1.1;
    const std::optional<double> sig =
        kind == DistKind::Lognormal ? std::optional<double>(sigma) : std::nullopt;
    const Eigen::MatrixXd H = hessian(model, sig, tri, kind, cal);
    CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    const int p = model.spec.columns();
    for (int i = 0; i < p; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(model.gamma[i]));
      ExposureModel up = model, dn = model;
      up.gamma[i] += h;
      dn.gamma[i] -= h;
      const Eigen::VectorXd fd =
          (score(up, sig, tri, kind, cal) - score(dn, sig, tri, kind, cal)) / (2 * h);
      for (int j = 0; j < fd.size(); ++j) {
        CHECK(H(j, i) == doctest::Approx(fd[j]).epsilon(1e-4).scale(1.0));
      }
    }
  }
}

TEST_CASE("doubling all counts doubles score and Hessian") {
  std::mt19937 rng(31);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng);
  CountTriangle doubled = tri;
  for (auto& [t, row] : doubled.rows) {
    for (auto& [d, n] : row.by_delay) n *= 2;
    row.total *= 2;
  }
  ExposureModel model;
  model.spec = random_spec(rng);
  model.gamma = random_gamma(rng, model.spec.columns());
  const Eigen::VectorXd s1 = score(model, std::nullopt, tri, DistKind::UnitExponential, cal);
  const Eigen::VectorXd s2 = score(model, std::nullopt, doubled, DistKind::UnitExponential, cal);
  CHECK((s2 - 2.0 * s1).lpNorm<Eigen::Infinity>() < 1e-9 * (1.0 + s1.lpNorm<Eigen::Infinity>()));
  const Eigen::MatrixXd h1 = hessian(model, std::nullopt, tri, DistKind::UnitExponential, cal);
  const Eigen::MatrixXd h2 = hessian(model, std::nullopt, doubled, DistKind::UnitExponential, cal);
  CHECK((h2 - 2.0 * h1).lpNorm<Eigen::Infinity>() < 1e-9 * (1.0 + h1.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("fit converges, ascends monotonically, and refits in two iterations") {
  std::mt19937 rng(43);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng, 40);
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}}, {EffectKind::DelayBins, {0, 1, 3, 7}, {}}};
  const FitResult result = fit(tri, spec, DistKind::UnitExponential, nullptr, {}, cal);
  REQUIRE(result.converged);
  CHECK(result.score_norm < 1e-6);
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    CHECK(result.trace[i].loglik >= result.trace[i - 1].loglik - 1e-9);
  }
  // Negative semi-definite Hessian at the interior optimum.
  const Eigen::VectorXd eig = result.hessian.selfadjointView<Eigen::Lower>().eigenvalues();
  CHECK(eig.maxCoeff() < 1e-6);

  const FitResult again =
      fit(tri, spec, DistKind::UnitExponential, &result.model.gamma, {}, cal);
  CHECK(again.converged);
  CHECK(again.iterations <= 2);
  CHECK(std::abs(again.loglik - result.loglik) < 1e-10);
}

TEST_CASE("lognormal fit estimates sigma") {
  std::mt19937 rng(47);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng, 40);
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}}, {EffectKind::ReportingDow, {}, {}}};
  const FitResult result = fit(tri, spec, DistKind::Lognormal, nullptr, {}, cal);
  REQUIRE(result.converged);
  REQUIRE(result.sigma.has_value());
  CHECK(*result.sigma > 0.0);
  CHECK(result.hessian.rows() == spec.columns() + 1);
}

TEST_CASE("collinear columns are detected, not silently fitted") {
  std::mt19937 rng(53);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng);
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}},
                  {EffectKind::ReportingDow, {}, {}},
                  {EffectKind::ReportingDow, {}, {}}};  // duplicated block
  const FitResult result = fit(tri, spec, DistKind::UnitExponential, nullptr, {}, cal);
  CHECK(!result.converged);
  CHECK(!result.collinear_columns.empty());
}

TEST_CASE("boundary drift on all-delay-zero data") {
  Calendar cal = default_cal();
  CountTriangle tri;
  tri.eval_date = DateIndex{30};
  for (int t = 1; t <= 25; ++t) {
    tri.rows[t].by_delay = {{0, 4}};
    tri.rows[t].total = 4;
  }
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}}};
  const FitResult result = fit(tri, spec, DistKind::UnitExponential, nullptr, {}, cal);
  CHECK(!result.converged);
  CHECK(result.boundary_drift);
}

TEST_CASE("confidence intervals shrink like one over root information") {
  std::mt19937 rng(61);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng, 40);
  CountTriangle inflated = tri;
  for (auto& [t, row] : inflated.rows) {
    for (auto& [d, n] : row.by_delay) n *= 10;
    row.total *= 10;
  }
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}}, {EffectKind::DelayBins, {0, 1, 3}, {}}};
  const FitResult f1 = fit(tri, spec, DistKind::UnitExponential, nullptr, {}, cal);
  const FitResult f2 = fit(inflated, spec, DistKind::UnitExponential, nullptr, {}, cal);
  REQUIRE(f1.converged);
  REQUIRE(f2.converged);
  const ConfidenceIntervals c1 = confidence_intervals(f1);
  const ConfidenceIntervals c2 = confidence_intervals(f2);
  REQUIRE(c1.valid);
  REQUIRE(c2.valid);
  for (std::size_t i = 0; i < c1.std_error.size(); ++i) {
    CHECK(c1.lower[i] < c1.estimate[i]);
    CHECK(c1.estimate[i] < c1.upper[i]);
    CHECK(c2.std_error[i] ==
          doctest::Approx(c1.std_error[i] / std::sqrt(10.0)).epsilon(1e-6));
    CHECK(c1.estimate[i] == doctest::Approx(std::exp(f1.model.gamma[i])).epsilon(1e-12));
  }
}

TEST_CASE("initial parameters seed the delay bins from the hazard table") {
  std::mt19937 rng(71);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng, 40);
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}}, {EffectKind::DelayBins, {0, 1, 3, 7}, {}}};
  const std::vector<double> init = initial_parameters(tri, spec);
  REQUIRE(init.size() == static_cast<std::size_t>(spec.columns()));
  CHECK(std::isfinite(init[0]));
  CHECK(init[0] != 0.0);  // intercept absorbs the first-bin hazard level
  // Starting from the hazard-table seed must be feasible.
  ExposureModel model{spec, init};
  CHECK(std::isfinite(loglik_exponential(model, tri, cal)));
}

TEST_CASE("effect order permutation leaves the fitted exposures unchanged") {
  std::mt19937 rng(83);
  Calendar cal = default_cal();
  const CountTriangle tri = random_triangle(rng, 40);
  CovariateSpec a, b;
  a.effects = {{EffectKind::Intercept, {}, {}},
               {EffectKind::ReportingDow, {}, {}},
               {EffectKind::DelayBins, {0, 1, 3}, {}}};
  b.effects = {{EffectKind::DelayBins, {0, 1, 3}, {}},
               {EffectKind::ReportingDow, {}, {}},
               {EffectKind::Intercept, {}, {}}};
  const FitResult fa = fit(tri, a, DistKind::UnitExponential, nullptr, {}, cal);
  const FitResult fb = fit(tri, b, DistKind::UnitExponential, nullptr, {}, cal);
  REQUIRE(fa.converged);
  REQUIRE(fb.converged);
  CHECK(fa.loglik == doctest::Approx(fb.loglik).epsilon(1e-9));
  for (int t = 1; t <= 40; t += 7) {
    for (int d = 0; d < 10; ++d) {
      const double ea = exposure(fa.model, DateIndex{t}, DateIndex{t + d}, cal);
      const double eb = exposure(fb.model, DateIndex{t}, DateIndex{t + d}, cal);
      CHECK(ea == doctest::Approx(eb).epsilon(1e-6));
    }
  }
}
