#pragma once

#include <functional>

#include "wpath/core_linalg.hpp"
#include "wpath/smoothing.hpp"
#include "wpath/weight_fn.hpp"

namespace wpath {

/// The region { x : A x >= b }.
struct Polytope {
  ConstraintMatrix A;
  Vector b;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  Vector slacks(const Vector& x) const { return A.entries() * x - b; }
};

struct WeightedIterate {
  Vector x;
  Vector w;
  double t = 1.0;
  /// Cached A x - b.
  Vector s;
};

/// Builds an iterate and its slacks; NonInterior unless every slack is positive.
WeightedIterate make_iterate(const Polytope& p, Vector x, Vector w, double t);

struct CenteringConfig {
  double K = 0.0;
  double R = 0.0;
  double eps_game = 0.0;
  double mu = 0.0;
  double delta_target = 0.0;
  double phi_budget = 0.0;
  /// Configured bound on gamma(s, w) used by r-step preconditions.
  double gamma_bound = 0.0;
  /// Radius multipliers of the move set in the W norm and in l_inf.
  double ball_factor = 0.0;
  double box_factor = 0.0;
  /// Replace the chasing-0 move by w <- z, the oracle's estimate of g(s).
  bool full_weight_move = false;

  static CenteringConfig make(const WeightConfig& wcfg, Index m, bool strict);
  PotentialConfig potential() const;
};

struct CentralityReport {
  double delta_t = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double w_tracking_error = 0.0;
};

double penalized_objective(const WeightedIterate& it, const Vector& c);

Vector newton_step(const Polytope& p, const WeightedIterate& it, const Vector& c,
                   const SolveTolerance& tol = {});

double centrality(const Polytope& p, const WeightedIterate& it, const Vector& c, const SolveTolerance& tol = {});

/// gamma_bound <= 0 recomputes gamma(s, w) exactly for the precondition.
WeightedIterate r_step(const Polytope& p, const WeightedIterate& it, const Vector& c, double r,
                       double gamma_bound = 0.0, const SolveTolerance& tol = {});

WeightedIterate centering_exact(const Polytope& p, const WeightedIterate& it, const Vector& c,
                                const WeightConfig& cfg);

/// Supplies an estimate of g(s) to accuracy R given the current weights.
using WeightOracle =
    std::function<Vector(const ConstraintMatrix& a, const Vector& s, const Vector& w, double R, RandomSource& rng)>;

WeightOracle sketched_weight_oracle(const WeightConfig& cfg);

struct CenteringDiagnostics {
  double delta = 0.0;
  /// Potential of the observed log z - log w.
  double phi = 0.0;
};

WeightedIterate centering_inexact(const Polytope& p, const WeightedIterate& it, const Vector& c,
                                  const WeightConfig& wcfg, const CenteringConfig& ccfg, RandomSource& rng,
                                  const WeightOracle& oracle = {}, CenteringDiagnostics* diag = nullptr);

/// Exact recomputation of the tracked invariants.
CentralityReport audit_iterate(const Polytope& p, const WeightedIterate& it, const Vector& c,
                               const WeightConfig& wcfg, const CenteringConfig& ccfg);

struct PathConfig {
  double theta = 0.02;
  /// Iterations between exact audits; zero derives it from m and c_r.
  int audit_period = 0;
  long max_iterations = 1000000;
  int max_rollbacks = 3;

  static PathConfig strict(const WeightConfig& wcfg, Index m);
  /// theta = 0.005 and an audit every 50 iterations.
  static PathConfig practical();
  int resolved_audit_period(const WeightConfig& wcfg, Index m) const;
};

struct TraceRecord {
  long iter = 0;
  double t = 0.0;
  double delta = 0.0;
  double phi = 0.0;
  double wall_time = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Checked after each passed audit; true ends path following early.
using StopRule = std::function<bool(const WeightedIterate&)>;

struct PathResult {
  WeightedIterate iterate;
  /// The stop rule fired before t_end was reached.
  bool stopped = false;
  long iterations = 0;
  long audits = 0;
  long rollbacks = 0;
  CentralityReport last_audit;
};

PathResult path_following(const Polytope& p, const WeightedIterate& start, const Vector& c, double t_end,
                          const WeightConfig& wcfg, const CenteringConfig& ccfg, const PathConfig& pcfg,
                          RandomSource& rng, const WeightOracle& oracle = {}, const TraceSink& trace = {},
                          const StopRule& stop = {});

}  // namespace wpath
