#include "hidden/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hidden/binning.hpp"

namespace hidden {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Preprocessed triangle: per occurrence date, the design signature of every
/// day up to the evaluation date plus the observed cells. Signatures group
/// (t, s) pairs sharing a design vector so exposures are evaluated once per
/// distinct signature rather than once per cell.
struct Workspace {
  int p = 0;  // gamma dimension
  struct Row {
    int span = 0;                            // tau - t + 1
    std::vector<int> sig;                    // signature id per delay 0..span-1
    std::vector<std::pair<int, long>> cells; // (delay, count), ascending
    long n_obs = 0;
  };
  std::vector<Row> rows;
  std::vector<std::vector<int>> sig_cols;  // active columns per signature
};

Workspace build_workspace(const CountTriangle& tri, const CovariateSpec& spec,
                          const Calendar& cal) {
  if (tri.empty()) throw std::invalid_argument("likelihood: empty triangle");
  Workspace ws;
  ws.p = spec.columns();
  std::map<std::vector<int>, int> sig_ids;
  std::vector<int> cols;
  for (const auto& [tday, row] : tri.rows) {
    const DateIndex t{tday};
    Workspace::Row wrow;
    wrow.span = tri.eval_date - t + 1;
    wrow.sig.reserve(wrow.span);
    for (int u = 0; u < wrow.span; ++u) {
      active_columns(spec, cal, t, t + u, cols);
      auto [it, inserted] = sig_ids.try_emplace(cols, static_cast<int>(sig_ids.size()));
      wrow.sig.push_back(it->second);
    }
    wrow.cells.assign(row.by_delay.begin(), row.by_delay.end());
    wrow.n_obs = row.total;
    ws.rows.push_back(std::move(wrow));
  }
  ws.sig_cols.resize(sig_ids.size());
  for (auto& [c, id] : sig_ids) ws.sig_cols[id] = c;
  return ws;
}

struct EvalResult {
  double loglik = kNegInf;
  Eigen::VectorXd score;
  Eigen::MatrixXd hess;
};

/// Evaluates loglikelihood and, when requested, the analytic score and
/// Hessian in one pass. Parameters are packed as [gamma; log(sigma)] for the
/// lognormal kind. The first-derivative sums over the time-change prefix are
/// accumulated through per-day suffix weights; the rank-one Hessian terms use
/// snapshots of dphi at the observed cell boundaries.
EvalResult evaluate(const Workspace& ws, const Eigen::VectorXd& params, DistKind kind,
                    bool derivatives) {
  const int p = ws.p;
  const bool has_theta = kind == DistKind::Lognormal;
  const int dim = p + (has_theta ? 1 : 0);
  if (params.size() != dim) throw std::invalid_argument("evaluate: parameter length mismatch");

  TimeChangedDistribution dist;
  dist.kind = kind;
  if (has_theta) dist.sigma = std::exp(params[p]);

  std::vector<double> alpha(ws.sig_cols.size());
  for (std::size_t i = 0; i < ws.sig_cols.size(); ++i) {
    double lp = 0.0;
    for (int c : ws.sig_cols[i]) lp += params[c];
    alpha[i] = std::exp(lp);
  }

  EvalResult out;
  out.loglik = 0.0;
  if (derivatives) {
    out.score = Eigen::VectorXd::Zero(dim);
    out.hess = Eigen::MatrixXd::Zero(dim, dim);
  }

  Eigen::VectorXd dphi, dphi_b, vecA;
  std::vector<double> coef;  // boundary coefficient per prefix length

  for (const auto& row : ws.rows) {
    const int span = row.span;
    double phi = 0.0;
    if (derivatives) {
      dphi.setZero(p);
      coef.assign(span + 1, 0.0);
    }
    auto cell = row.cells.begin();
    for (int u = 0; u < span; ++u) {
      const int sig = row.sig[u];
      const double a_u = alpha[sig];
      const auto& cols = ws.sig_cols[sig];
      if (cell != row.cells.end() && cell->first == u) {
        const long n = cell->second;
        const double lo = phi;
        const double hi = phi + a_u;
        // Survival differences stay accurate in the far tail where both cdf
        // values round to 1 and their difference cancels to zero.
        const double prob = dist.sf(lo) - dist.sf(hi);
        if (!(prob > 0.0)) {
          out.loglik = kNegInf;  // infeasible parameters for an observed cell
          return out;
        }
        out.loglik += n * std::log(prob);
        if (derivatives) {
          const double fa = dist.pdf(lo);
          const double fb = dist.pdf(hi);
          coef[u + 1] += n * fb / prob;
          coef[u] -= n * fa / prob;

          dphi_b = dphi;
          for (int c : cols) dphi_b[c] += a_u;
          vecA = fb * dphi_b - fa * dphi;
          auto H = out.hess.topLeftCorner(p, p).selfadjointView<Eigen::Lower>();
          const double dfa = dist.pdf_derivative(lo);
          const double dfb = dist.pdf_derivative(hi);
          H.rankUpdate(dphi_b, n / prob * dfb);
          H.rankUpdate(dphi, -n / prob * dfa);
          H.rankUpdate(vecA, -n / (prob * prob));
          if (has_theta) {
            const double Ba = dist.cdf_dtheta(lo);
            const double Bb = dist.cdf_dtheta(hi);
            const double B = Bb - Ba;
            out.score[p] += n * B / prob;
            out.hess(p, p) += n * ((dist.cdf_dtheta2(hi) - dist.cdf_dtheta2(lo)) / prob -
                                   B * B / (prob * prob));
            out.hess.row(p).head(p) +=
                (n / prob) * (dist.pdf_dtheta(hi) * dphi_b - dist.pdf_dtheta(lo) * dphi) -
                (n * B / (prob * prob)) * vecA;
          }
        }
        ++cell;
      }
      phi += a_u;
      if (derivatives) {
        for (int c : cols) dphi[c] += a_u;
      }
    }

    // Truncation term: - N_t^Obs * log F(phi_t(tau - t + 1)).
    const double Fc = dist.cdf(phi);
    if (!(Fc > 0.0)) {
      out.loglik = kNegInf;
      return out;
    }
    out.loglik -= row.n_obs * std::log(Fc);
    if (derivatives) {
      const double fc = dist.pdf(phi);
      coef[span] -= row.n_obs * fc / Fc;
      auto H = out.hess.topLeftCorner(p, p).selfadjointView<Eigen::Lower>();
      H.rankUpdate(dphi, -row.n_obs / Fc * dist.pdf_derivative(phi));
      H.rankUpdate(dphi, row.n_obs * fc * fc / (Fc * Fc));
      if (has_theta) {
        const double Bc = dist.cdf_dtheta(phi);
        out.score[p] -= row.n_obs * Bc / Fc;
        out.hess(p, p) -= row.n_obs * (dist.cdf_dtheta2(phi) / Fc - Bc * Bc / (Fc * Fc));
        out.hess.row(p).head(p) -= (row.n_obs / Fc) * dist.pdf_dtheta(phi) * dphi -
                                   (row.n_obs * fc * Bc / (Fc * Fc)) * dphi;
      }

      // Suffix weights turn the sums over prefixes into per-day updates:
      // day u contributes to every boundary with prefix length > u. These
      // weights feed both the score and the d2phi/dgamma2 Hessian term.
      double w = 0.0;
      for (int u = span - 1; u >= 0; --u) {
        w += coef[u + 1];
        if (w == 0.0) continue;
        const int sig = row.sig[u];
        const double g = w * alpha[sig];
        const auto& cols = ws.sig_cols[sig];
        for (std::size_t i = 0; i < cols.size(); ++i) {
          out.score[cols[i]] += g;
          for (std::size_t j = 0; j <= i; ++j) {
            out.hess(cols[i], cols[j]) += g;  // lower triangle; x entries are indicators
          }
        }
      }
    }
  }

  if (derivatives) {
    out.hess.triangularView<Eigen::StrictlyUpper>() =
        out.hess.triangularView<Eigen::StrictlyLower>().transpose();
  }
  return out;
}

Eigen::VectorXd pack_params(const std::vector<double>& gamma, std::optional<double> sigma,
                            DistKind kind, int p) {
  const bool has_theta = kind == DistKind::Lognormal;
  Eigen::VectorXd params(p + (has_theta ? 1 : 0));
  if (static_cast<int>(gamma.size()) != p) {
    throw std::invalid_argument("gamma length does not match spec columns");
  }
  for (int i = 0; i < p; ++i) params[i] = gamma[i];
  if (has_theta) {
    const double s = sigma.value_or(1.0);
    if (!(s > 0)) throw std::invalid_argument("sigma must be positive");
    params[p] = std::log(s);
  }
  return params;
}

std::vector<int> find_collinear_columns(const Workspace& ws) {
  const int p = ws.p;
  const int n_sig = static_cast<int>(ws.sig_cols.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n_sig, p);
  for (int i = 0; i < n_sig; ++i) {
    for (int c : ws.sig_cols[i]) design(i, c) = 1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> offenders;
  if (rank < p) {
    const auto perm = qr.colsPermutation().indices();
    for (int i = rank; i < p; ++i) offenders.push_back(perm[i]);
    std::sort(offenders.begin(), offenders.end());
  }
  return offenders;
}

}  // namespace

double loglik_generic(const ExposureModel& model, std::optional<double> sigma,
                      const CountTriangle& tri, DistKind kind, const Calendar& cal) {
  const Workspace ws = build_workspace(tri, model.spec, cal);
  return evaluate(ws, pack_params(model.gamma, sigma, kind, ws.p), kind, false).loglik;
}

double loglik_exponential(const ExposureModel& model, const CountTriangle& tri,
                          const Calendar& cal) {
  const Workspace ws = build_workspace(tri, model.spec, cal);
  const Eigen::VectorXd params = pack_params(model.gamma, std::nullopt, DistKind::UnitExponential, ws.p);
  std::vector<double> alpha(ws.sig_cols.size());
  for (std::size_t i = 0; i < ws.sig_cols.size(); ++i) {
    double lp = 0.0;
    for (int c : ws.sig_cols[i]) lp += params[c];
    alpha[i] = std::exp(lp);
  }
  double ll = 0.0;
  for (const auto& row : ws.rows) {
    double phi = 0.0;
    auto cell = row.cells.begin();
    for (int u = 0; u < row.span; ++u) {
      const double a_u = alpha[row.sig[u]];
      if (cell != row.cells.end() && cell->first == u) {
        const double log_cell = std::log(-std::expm1(-a_u));
        if (!std::isfinite(log_cell)) return kNegInf;
        ll -= cell->second * (phi - log_cell);
        ++cell;
      }
      phi += a_u;
    }
    ll -= row.n_obs * std::log(-std::expm1(-phi));
  }
  return ll;
}

Eigen::VectorXd score(const ExposureModel& model, std::optional<double> sigma,
                      const CountTriangle& tri, DistKind kind, const Calendar& cal) {
  const Workspace ws = build_workspace(tri, model.spec, cal);
  return evaluate(ws, pack_params(model.gamma, sigma, kind, ws.p), kind, true).score;
}

Eigen::MatrixXd hessian(const ExposureModel& model, std::optional<double> sigma,
                        const CountTriangle& tri, DistKind kind, const Calendar& cal) {
  const Workspace ws = build_workspace(tri, model.spec, cal);
  return evaluate(ws, pack_params(model.gamma, sigma, kind, ws.p), kind, true).hess;
}

std::vector<double> initial_parameters(const CountTriangle& tri, const CovariateSpec& spec) {
  std::vector<double> init(spec.columns(), 0.0);
  const HazardTable table = hazard_table(tri);

  auto mean_bin_exposure = [&](int lo, int hi) {  // [lo, hi), hi < 0 means open
    double sum = 0.0;
    int n = 0;
    for (const auto& row : table.rows) {
      if (row.delay < lo || (hi >= 0 && row.delay >= hi)) continue;
      if (!std::isfinite(row.hazard_exposure) || row.hazard_exposure <= 0) continue;
      sum += row.hazard_exposure;
      ++n;
    }
    return n > 0 ? sum / n : 0.0;
  };

  // The closed-form per-delay exposures seed the delay-bin coefficients; a
  // plain intercept, when present, absorbs the level of the first bin.
  double log_base = 0.0;
  bool have_base = false;
  int offset = 0;
  std::vector<std::pair<int, const Effect*>> delay_effects;
  int intercept_col = -1;
  for (const auto& e : spec.effects) {
    if (e.kind == EffectKind::DelayBins) delay_effects.emplace_back(offset, &e);
    if (e.kind == EffectKind::Intercept && !e.breakpoint && intercept_col < 0) {
      intercept_col = offset;
    }
    offset += effect_width(e);
  }
  for (auto& [off, e] : delay_effects) {
    const auto& starts = e->bin_starts;
    const double base = mean_bin_exposure(starts[0], starts.size() > 1 ? starts[1] : -1);
    if (base > 0 && !have_base) {
      log_base = std::log(base);
      have_base = true;
    }
    const int nb = static_cast<int>(starts.size());
    const int block = nb - 1;
    for (int b = 1; b < nb; ++b) {
      const int hi = b + 1 < nb ? starts[b + 1] : -1;
      const double m = mean_bin_exposure(starts[b], hi);
      if (m > 0 && base > 0) {
        const double v = std::log(m) - std::log(base);
        init[off + b - 1] = v;
        if (e->breakpoint) init[off + block + b - 1] = v;
      }
    }
  }
  if (intercept_col >= 0 && !have_base) {
    const double m = mean_bin_exposure(0, -1);
    if (m > 0) {
      log_base = std::log(m);
      have_base = true;
    }
  }
  if (intercept_col >= 0 && have_base) init[intercept_col] = log_base;
  return init;
}

FitResult fit(const CountTriangle& tri, const CovariateSpec& spec, DistKind kind,
              const std::vector<double>* init, const FitOptions& opts, const Calendar& cal) {
  const Workspace ws = build_workspace(tri, spec, cal);
  const int p = ws.p;
  const bool has_theta = kind == DistKind::Lognormal;
  const int dim = p + (has_theta ? 1 : 0);

  FitResult result;
  result.model.spec = spec;
  result.model.gamma.assign(p, 0.0);

  result.collinear_columns = find_collinear_columns(ws);
  if (!result.collinear_columns.empty()) {
    result.message = "covariate spec is not identifiable; collinear or inactive columns";
    return result;
  }

  // Indicator columns that are never active at an observed event have their
  // supremum at gamma -> -inf: shrinking their exposure reallocates reporting
  // mass onto observed days and only improves the likelihood. Pin them at -20
  // (exposure factor ~ 2e-9) and optimize the remaining parameters.
  {
    std::vector<long> col_count(p, 0);
    std::vector<int> cols;
    for (const auto& [tday, row] : tri.rows) {
      for (const auto& [d, n] : row.by_delay) {
        active_columns(spec, cal, DateIndex{tday}, DateIndex{tday + d}, cols);
        for (int j : cols) col_count[j] += n;
      }
    }
    for (int j = 0; j < p; ++j) {
      if (col_count[j] == 0) result.pinned_columns.push_back(j);
    }
  }
  std::vector<int> free_idx;
  {
    std::vector<char> pinned(dim, 0);
    for (int j : result.pinned_columns) pinned[j] = 1;
    for (int j = 0; j < dim; ++j) {
      if (!pinned[j]) free_idx.push_back(j);
    }
  }
  const int nf = static_cast<int>(free_idx.size());
  auto reduced_vec = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(nf);
    for (int i = 0; i < nf; ++i) r[i] = v[free_idx[i]];
    return r;
  };
  auto grad_norm_of = [&](const Eigen::VectorXd& v) {
    return nf == 0 ? 0.0 : reduced_vec(v).lpNorm<Eigen::Infinity>();
  };
  auto reduced_mat = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r(nf, nf);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) r(i, j) = m(free_idx[i], free_idx[j]);
    }
    return r;
  };

  Eigen::VectorXd x(dim);
  {
    const std::vector<double> start = init ? *init : initial_parameters(tri, spec);
    if (static_cast<int>(start.size()) != p) {
      throw std::invalid_argument("fit: initial gamma length mismatch");
    }
    for (int i = 0; i < p; ++i) x[i] = start[i];
    if (has_theta) x[p] = 0.0;  // sigma = 1
    for (int j : result.pinned_columns) x[j] = -20.0;
  }

  EvalResult cur = evaluate(ws, x, kind, true);
  if (!std::isfinite(cur.loglik)) {
    result.message = "initial parameters are infeasible";
    return result;
  }

  auto record = [&](int it, int halvings, double ridge) {
    result.trace.push_back(
        {it, cur.loglik, grad_norm_of(cur.score), halvings, ridge});
  };

  int iter = 0;
  double last_step = 0.0;
  record(0, 0, 0.0);
  for (iter = 1; nf > 0 && iter <= opts.max_iterations; ++iter) {
    const double grad_norm = grad_norm_of(cur.score);
    if (grad_norm < opts.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (x.head(p).lpNorm<Eigen::Infinity>() > opts.boundary_bound) {
      result.boundary_drift = true;
      result.message = "parameter drifting to the boundary; likelihood has no interior optimum";
      break;
    }

    // Newton direction on the free block of -H, with an escalating ridge when
    // not positive definite.
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (;;) {
      Eigen::MatrixXd A = reduced_mat(-cur.hess);
      if (ridge > 0) A.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0) {
        step = ldlt.solve(reduced_vec(cur.score));
        if (step.allFinite()) break;
      }
      ridge = ridge == 0 ? opts.ridge_floor : ridge * 10;
      if (ridge > 1e12) {
        result.message = "singular Hessian beyond ridge repair";
        result.iterations = iter;
        result.score_norm = grad_norm;
        result.loglik = cur.loglik;
        result.hessian = cur.hess;
        for (int i = 0; i < p; ++i) result.model.gamma[i] = x[i];
        if (has_theta) result.sigma = std::exp(x[p]);
        return result;
      }
    }

    // Step halving until the loglikelihood does not decrease.
    double lambda = 1.0;
    int halvings = 0;
    Eigen::VectorXd x_new;
    double ll_new = kNegInf;
    for (; halvings <= opts.step_halving_max; ++halvings) {
      x_new = x;
      for (int i = 0; i < nf; ++i) x_new[free_idx[i]] += lambda * step[i];
      ll_new = evaluate(ws, x_new, kind, false).loglik;
      if (std::isfinite(ll_new) && ll_new >= cur.loglik - 1e-12 * (1 + std::abs(cur.loglik))) {
        break;
      }
      lambda *= 0.5;
    }
    if (!(std::isfinite(ll_new) && ll_new >= cur.loglik - 1e-12 * (1 + std::abs(cur.loglik)))) {
      result.message = "step halving failed to improve the loglikelihood";
      break;
    }
    const double step_size = (lambda * step).lpNorm<Eigen::Infinity>();
    last_step = step_size;
    x = x_new;
    cur = evaluate(ws, x, kind, true);
    record(iter, halvings, ridge);
    if (step_size < opts.step_tolerance) {
      // A full, unhalved Newton step this small with a positive definite
      // Hessian places the optimum within step_tolerance of the iterate.
      if ((halvings == 0 && ridge == 0.0) ||
          grad_norm_of(cur.score) < opts.gradient_tolerance) {
        result.converged = true;
      }
      ++iter;
      break;
    }
  }
  if (nf == 0) result.converged = true;  // nothing left to optimize
  if (iter > opts.max_iterations) {
    iter = opts.max_iterations;
    if (grad_norm_of(cur.score) < opts.gradient_tolerance) result.converged = true;
    if (!result.converged && result.message.empty()) {
      result.message = "maximum iterations reached";
    }
  }

  // Interior optima are reached with quadratically shrinking steps (the last
  // accepted step is tiny). When the gradient vanishes while the iteration is
  // still travelling, the curvature collapsed along the step direction: the
  // supremum sits at the parameter boundary, not at an interior optimum.
  if (result.converged && last_step > 0.02) {
    result.converged = false;
    result.boundary_drift = true;
    result.message = "gradient vanished while still drifting; supremum at the parameter boundary";
  }

  result.iterations = iter;
  result.loglik = cur.loglik;
  result.score_norm = grad_norm_of(cur.score);
  if (!result.pinned_columns.empty() && result.message.empty()) {
    result.message = std::to_string(result.pinned_columns.size()) +
                     " column(s) without observed events pinned at gamma = -20";
  }
  result.hessian = cur.hess;
  for (int i = 0; i < p; ++i) result.model.gamma[i] = x[i];
  if (has_theta) result.sigma = std::exp(x[p]);
  return result;
}

ConfidenceIntervals confidence_intervals(const FitResult& fit, double level) {
  ConfidenceIntervals ci;
  ci.level = level;
  const int p = static_cast<int>(fit.model.gamma.size());
  if (fit.hessian.rows() < p) {
    ci.message = "fit carries no Hessian";
    return ci;
  }
  // Pinned columns carry no curvature; intervals come from the free block.
  const int dim = static_cast<int>(fit.hessian.rows());
  std::vector<char> pinned(dim, 0);
  for (int j : fit.pinned_columns) pinned[j] = 1;
  std::vector<int> free_idx;
  for (int j = 0; j < dim; ++j) {
    if (!pinned[j]) free_idx.push_back(j);
  }
  const int nf = static_cast<int>(free_idx.size());
  Eigen::MatrixXd info(nf, nf);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) info(i, j) = -fit.hessian(free_idx[i], free_idx[j]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (nf > 0 && (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0)) {
    ci.message = "observed information is not positive definite; intervals withheld";
    return ci;
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  if (nf > 0) {
    const Eigen::MatrixXd cov_free = ldlt.solve(Eigen::MatrixXd::Identity(nf, nf));
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) cov(free_idx[i], free_idx[j]) = cov_free(i, j);
    }
  }
  const double z = normal_quantile(0.5 + level / 2);
  ci.valid = true;
  for (int i = 0; i < p; ++i) {
    const double est = std::exp(fit.model.gamma[i]);
    ci.estimate.push_back(est);
    if (pinned[i]) {
      // Degenerate category: the estimate is an upper bound at zero exposure.
      ci.std_error.push_back(0.0);
      ci.lower.push_back(0.0);
      ci.upper.push_back(est);
      continue;
    }
    const double se = std::sqrt(cov(i, i));
    ci.std_error.push_back(se);
    ci.lower.push_back(std::exp(fit.model.gamma[i] - z * se));
    ci.upper.push_back(std::exp(fit.model.gamma[i] + z * se));
  }
  if (fit.sigma && fit.hessian.rows() == p + 1) {
    const double se = std::sqrt(cov(p, p));
    const double theta = std::log(*fit.sigma);
    ci.sigma_lower = std::exp(theta - z * se);
    ci.sigma_upper = std::exp(theta + z * se);
  }
  if (!fit.pinned_columns.empty()) {
    ci.message = "pinned columns reported with degenerate intervals";
  }
  return ci;
}

}  // namespace hidden
