#include "wpath/central_path.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <optional>

namespace wpath {

namespace {

void check_iterate(const Polytope& p, const WeightedIterate& it) {
  if (it.x.size() != p.cols() || it.s.size() != p.rows() || it.w.size() != p.rows())
    fail(ErrorCode::DimensionMismatch, "iterate does not match the polytope");
  if (!(it.s.minCoeff() > 0.0)) fail(ErrorCode::NonInterior, "iterate has a nonpositive slack");
  if (!(it.w.minCoeff() > 0.0)) fail(ErrorCode::NonInterior, "iterate has a nonpositive weight");
}

Vector hessian_scaling(const WeightedIterate& it) { return it.w.array() / it.s.array().square(); }

/// t c - A^T S^{-1} w.
Vector path_gradient(const Polytope& p, const WeightedIterate& it, const Vector& c) {
  if (c.size() != p.cols()) fail(ErrorCode::DimensionMismatch, "cost length differs from column count");
  const Vector ratio = it.w.array() / it.s.array();
  return it.t * c - p.A.entries().transpose() * ratio;
}

struct NewtonData {
  Vector h;
  double delta = 0.0;
};

NewtonData newton(const Polytope& p, const WeightedIterate& it, const Vector& c, const SolveTolerance& tol) {
  check_iterate(p, it);
  NormalFactorization f(p.A, hessian_scaling(it), tol);
  const Vector grad = path_gradient(p, it, c);
  NewtonData out;
  out.h = f.solve(grad);
  out.delta = std::sqrt(std::max(0.0, out.h.dot(grad)));
  return out;
}

WeightedIterate apply_r_step(const Polytope& p, const WeightedIterate& it, const Vector& h, double r) {
  WeightedIterate next;
  next.t = it.t;
  const double share = 1.0 / (1.0 + r);
  const Vector ah = p.A.entries() * h;
  next.x = it.x - share * h;
  next.s = p.slacks(next.x);
  if (!next.s.allFinite() || !(next.s.minCoeff() > 0.0))
    fail(ErrorCode::NonInterior, "r-step left the interior");
  next.w = it.w.array() * (1.0 + (r * share) * ah.array() / it.s.array());
  if (!next.w.allFinite() || !(next.w.minCoeff() > 0.0))
    fail(ErrorCode::NonInterior, "r-step produced a nonpositive weight");
  return next;
}

}  // namespace

namespace {

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string audit_summary(const CentralityReport& rep) {
  return "audit failed: delta " + std::to_string(rep.delta_t) + ", tracking error " +
         std::to_string(rep.w_tracking_error) + ", potential " + std::to_string(rep.phi);
}

}  // namespace

WeightedIterate make_iterate(const Polytope& p, Vector x, Vector w, double t) {
  WeightedIterate it;
  it.x = std::move(x);
  it.w = std::move(w);
  it.t = t;
  if (it.x.size() != p.cols()) fail(ErrorCode::DimensionMismatch, "point length differs from column count");
  require_finite(it.x, "point");
  require_finite(it.w, "weights");
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::InvalidArgument, "path parameter must be positive");
  it.s = p.slacks(it.x);
  check_iterate(p, it);
  return it;
}

CenteringConfig CenteringConfig::make(const WeightConfig& wcfg, Index m, bool strict) {
  const double md = static_cast<double>(m);
  const double cr = wcfg.c_r;
  const double cg = wcfg.c_gamma;
  CenteringConfig cfg;
  cfg.K = wcfg.K;
  cfg.phi_budget = 960.0 * cr * cg * std::pow(md, 1.5);
  const double log_budget = std::log(cfg.phi_budget);
  cfg.eps_game = 1.0 / (5.0 * cr);
  cfg.gamma_bound = cg * std::exp(wcfg.K);
  cfg.ball_factor = (cr + 0.14) / (cr + 1.0);
  cfg.box_factor = 4.0 * cg;
  const double paper_delta = wcfg.K / (240.0 * cr * cg * log_budget);
  if (strict) {
    cfg.R = wcfg.K / (60.0 * cr * log_budget);
    cfg.delta_target = paper_delta;
  } else {
    cfg.R = wcfg.K;
    // Audits accept anything the r-step precondition still admits.
    cfg.delta_target = 0.125 / cfg.gamma_bound;
    cfg.full_weight_move = true;
  }
  cfg.mu = cfg.eps_game / (12.0 * cfg.R);
  return cfg;
}

PotentialConfig CenteringConfig::potential() const {
  PotentialConfig p;
  p.mu = mu;
  p.R = R;
  p.eps_game = eps_game;
  return p;
}

double penalized_objective(const WeightedIterate& it, const Vector& c) {
  if (it.s.size() == 0 || !(it.s.minCoeff() > 0.0)) fail(ErrorCode::NonInterior, "slack must be positive");
  return it.t * c.dot(it.x) - it.w.dot(it.s.array().log().matrix());
}

Vector newton_step(const Polytope& p, const WeightedIterate& it, const Vector& c, const SolveTolerance& tol) {
  return newton(p, it, c, tol).h;
}

double centrality(const Polytope& p, const WeightedIterate& it, const Vector& c, const SolveTolerance& tol) {
  return newton(p, it, c, tol).delta;
}

WeightedIterate r_step(const Polytope& p, const WeightedIterate& it, const Vector& c, double r, double gamma_bound,
                       const SolveTolerance& tol) {
  if (!(r >= 0.0)) fail(ErrorCode::InvalidArgument, "r must be nonnegative");
  const NewtonData nd = newton(p, it, c, tol);
  const double gamma = gamma_bound > 0.0
                           ? gamma_bound
                           : slack_sensitivity(p.A, DiagonalVector(it.s), DiagonalVector(it.w));
  if (nd.delta * gamma > 0.125) fail(ErrorCode::StepTooLarge, "centrality times slack sensitivity exceeds 1/8");
  return apply_r_step(p, it, nd.h, r);
}

WeightedIterate centering_exact(const Polytope& p, const WeightedIterate& it, const Vector& c,
                                const WeightConfig& cfg) {
  const NewtonData nd = newton(p, it, c, cfg.solve);
  WeightedIterate next;
  next.t = it.t;
  next.x = it.x - nd.h / (1.0 + cfg.c_r);
  next.s = p.slacks(next.x);
  if (!next.s.allFinite() || !(next.s.minCoeff() > 0.0))
    fail(ErrorCode::NonInterior, "exact centering left the interior");
  next.w = exact_weight(p.A, DiagonalVector(next.s), WeightVector(it.w), cfg).values();
#ifndef NDEBUG
  if (nd.delta > 0.0 && centrality(p, next, c, cfg.solve) > nd.delta)
    fail(ErrorCode::ContractFailure, "exact centering did not reduce centrality");
#endif
  return next;
}

WeightOracle sketched_weight_oracle(const WeightConfig& cfg) {
  return [cfg](const ConstraintMatrix& a, const Vector& s, const Vector& w, double R, RandomSource& rng) {
    return compute_weight(a, DiagonalVector(s), WeightVector(w), R, cfg, rng).values();
  };
}

WeightedIterate centering_inexact(const Polytope& p, const WeightedIterate& it, const Vector& c,
                                  const WeightConfig& wcfg, const CenteringConfig& ccfg, RandomSource& rng,
                                  const WeightOracle& oracle, CenteringDiagnostics* diag) {
  const NewtonData nd = newton(p, it, c, wcfg.solve);
  if (nd.delta * ccfg.gamma_bound > 0.125)
    fail(ErrorCode::StepTooLarge, "centrality times slack sensitivity exceeds 1/8");
  WeightedIterate next = apply_r_step(p, it, nd.h, wcfg.c_r);

  const Vector z = oracle ? oracle(p.A, next.s, next.w, ccfg.R, rng)
                          : compute_weight(p.A, DiagonalVector(next.s), WeightVector(next.w), ccfg.R, wcfg, rng)
                                .values();
  if (z.size() != next.w.size() || !z.allFinite() || !(z.minCoeff() > 0.0))
    fail(ErrorCode::NonFinite, "weight oracle returned an invalid estimate");
  const Vector observed = (z.array().log() - next.w.array().log()).matrix();
  const PotentialConfig pot = ccfg.potential();
  if (diag) {
    diag->delta = nd.delta;
    diag->phi = potential(observed, pot.mu);
  }
  if (ccfg.full_weight_move) {
    next.w = z;
  } else if (nd.delta > 0.0) {
    MoveSet moves;
    moves.w = next.w;
    moves.weight_norm_bound = ccfg.ball_factor * nd.delta;
    moves.inf_norm_bound = ccfg.box_factor * nd.delta;
    // The game point is log g - log w, so the player's move enters log w negated.
    const Vector move = chasing_zero_move(observed, moves, pot);
    next.w = (next.w.array().log() - move.array()).exp();
  }
  return next;
}

CentralityReport audit_iterate(const Polytope& p, const WeightedIterate& it, const Vector& c,
                               const WeightConfig& wcfg, const CenteringConfig& ccfg) {
  CentralityReport rep;
  rep.delta_t = centrality(p, it, c, wcfg.solve);
  const Vector g =
      exact_weight(p.A, DiagonalVector(it.s), WeightVector(it.w), wcfg, std::max(1e-10, 1e-3 * ccfg.R)).values();
  const Vector psi = (g.array().log() - it.w.array().log()).matrix();
  rep.w_tracking_error = psi.cwiseAbs().maxCoeff();
  rep.phi = potential(psi, ccfg.mu);
  rep.gamma = slack_sensitivity(p.A, DiagonalVector(it.s), DiagonalVector(it.w));
  return rep;
}

PathConfig PathConfig::strict(const WeightConfig& wcfg, Index m) {
  PathConfig cfg;
  const double cr = wcfg.c_r;
  cfg.theta = 1.0 / (1e10 * cr * cr * cr * std::log(cr * static_cast<double>(m)));
  return cfg;
}

PathConfig PathConfig::practical() {
  PathConfig cfg;
  cfg.theta = 0.005;
  cfg.audit_period = 50;
  return cfg;
}

int PathConfig::resolved_audit_period(const WeightConfig& wcfg, Index m) const {
  if (audit_period > 0) return audit_period;
  const double md = static_cast<double>(m);
  const double period = std::ceil(md / (100.0 * wcfg.c_r * std::log(wcfg.c_r * md)));
  return static_cast<int>(std::max(1.0, period));
}

PathResult path_following(const Polytope& p, const WeightedIterate& start, const Vector& c, double t_end,
                          const WeightConfig& wcfg, const CenteringConfig& ccfg, const PathConfig& pcfg,
                          RandomSource& rng, const WeightOracle& oracle, const TraceSink& trace,
                          const StopRule& stop) {
  check_iterate(p, start);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) fail(ErrorCode::InvalidArgument, "t_end must be positive");
  const auto clock_start = std::chrono::steady_clock::now();
  const double n = static_cast<double>(p.cols());
  const bool increasing = t_end >= start.t;
  const int period = pcfg.resolved_audit_period(wcfg, p.rows());

  PathResult out;
  WeightedIterate it = start;
  WeightedIterate snapshot = start;
  RandomSource snapshot_rng = rng;
  int consecutive = 0;
  double slowdown = 1.0;
  long since_audit = 0;

  std::string audit_error;
  auto audit = [&]() -> bool {
    ++out.audits;
    audit_error.clear();
    try {
      const CentralityReport rep = audit_iterate(p, it, c, wcfg, ccfg);
      out.last_audit = rep;
      return rep.delta_t <= ccfg.delta_target && rep.phi <= ccfg.phi_budget &&
             rep.w_tracking_error <= ccfg.K;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::Overflow) throw;
      audit_error = e.what();
      return false;
    }
  };
  auto why_failed = [&]() { return audit_error.empty() ? audit_summary(out.last_audit) : "audit: " + audit_error; };

  auto roll_back = [&](const std::string& why) {
    ++out.rollbacks;
    if (++consecutive >= pcfg.max_rollbacks)
      fail(ErrorCode::RollbackLoop, "repeated rollbacks at t = " + format_g(snapshot.t) + ": " + why);
    it = snapshot;
    rng = snapshot_rng;
    rng.engine().discard(static_cast<unsigned long long>(out.rollbacks) * 7919ULL);
    slowdown *= 0.5;
    since_audit = 0;
  };

  auto finished = [&]() { return increasing ? it.t >= t_end : it.t <= t_end; };

  for (;;) {
    if (finished()) {
      if (audit()) break;
      roll_back("final " + why_failed());
      continue;
    }
    if (out.iterations >= pcfg.max_iterations)
      fail(ErrorCode::IterationLimit, "path following exceeded " + std::to_string(pcfg.max_iterations) + " iterations");
    ++out.iterations;
    CenteringDiagnostics diag;
    try {
      it = centering_inexact(p, it, c, wcfg, ccfg, rng, oracle, &diag);
    } catch (const Error& e) {
      const ErrorCode code = e.code();
      if (code != ErrorCode::StepTooLarge && code != ErrorCode::Overflow && code != ErrorCode::NonInterior &&
          code != ErrorCode::RankDeficient && code != ErrorCode::NonFinite)
        throw;
      roll_back(e.what());
      continue;
    }
    const double growth = 1.0 + slowdown * pcfg.theta / std::sqrt(n);
    it.t = increasing ? std::min(it.t * growth, t_end) : std::max(it.t / growth, t_end);
    if (trace) {
      TraceRecord rec;
      rec.iter = out.iterations;
      rec.t = it.t;
      rec.delta = diag.delta;
      rec.phi = diag.phi;
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      trace(rec);
    }
    if (++since_audit >= period && !finished()) {
      since_audit = 0;
      if (audit()) {
        if (stop && stop(it)) {
          out.stopped = true;
          break;
        }
        snapshot = it;
        snapshot_rng = rng;
        consecutive = 0;
        slowdown = std::min(1.0, 2.0 * slowdown);
      } else {
        roll_back(why_failed());
      }
    }
  }
  out.iterate = it;
  return out;
}

}  // namespace wpath
