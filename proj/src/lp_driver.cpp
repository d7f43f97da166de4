#include "wpath/lp_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace wpath {

std::string_view to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::Tolerance: return "tolerance";
    case SolveMode::Integral: return "integral";
  }
  return "tolerance";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

namespace {

bool all_integer(const Eigen::Ref<const Matrix>& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (std::floor(v) != v || std::abs(v) > 9007199254740992.0) return false;
    }
  return true;
}

bool integer_data(const RawLP& lp) { return all_integer(lp.A) && all_integer(lp.b) && all_integer(lp.c); }

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// log2(1 + 2^x) without overflow.
double log2_one_plus_exp2(double x) { return x > 60.0 ? x : std::log2(1.0 + std::exp2(x)); }

double integral_penalty_log2(double L, Index n) { return std::log2(static_cast<double>(n)) + 3.0 * L + 4.0; }

}  // namespace

void RawLP::validate() const {
  if (A.rows() == 0 || A.cols() == 0) fail(ErrorCode::DimensionMismatch, "constraint matrix is empty");
  if (b.size() != A.rows()) fail(ErrorCode::DimensionMismatch, "b length differs from the row count of A");
  if (c.size() != A.cols()) fail(ErrorCode::DimensionMismatch, "c length differs from the column count of A");
  if (!A.allFinite() || !b.allFinite() || !c.allFinite()) fail(ErrorCode::NonFinite, "LP data has a non-finite entry");
  if (integrality && !integer_data(*this)) fail(ErrorCode::InvalidArgument, "integrality set but data is not integer");
}

double bit_complexity(const RawLP& lp) {
  lp.validate();
  double hadamard = 0.0;
  for (Index j = 0; j < lp.cols(); ++j) hadamard += std::log2(std::max(1.0, lp.A.col(j).norm()));
  const double data = std::max(inf_norm(lp.b), inf_norm(lp.c));
  const double L = std::log2(static_cast<double>(lp.rows())) + log2_one_plus_exp2(hadamard) + std::log2(1.0 + data);
  return std::max(1.0, std::ceil(L));
}

PreprocessedLP preprocess(const RawLP& lp, const PreprocessOptions& opts) {
  lp.validate();
  const Index m = lp.rows();
  const Index n = lp.cols();
  PreprocessedLP out;
  out.mode = opts.mode;
  out.L = bit_complexity(lp);
  out.original_rows = m;
  out.original_cols = n;
  const double b_norm = inf_norm(lp.b);

  if (opts.mode == SolveMode::Integral) {
    if (!integer_data(lp)) fail(ErrorCode::InvalidArgument, "integral mode needs integer data");
    const double log2_penalty = integral_penalty_log2(out.L, n);
    if (log2_penalty > opts.log2_cap)
      fail(ErrorCode::Overflow, "penalty 2^" + std::to_string(log2_penalty) + " exceeds the float-safe cap");
    out.box = std::exp2(out.L + 1.0);
    out.penalty = std::exp2(log2_penalty);
  } else {
    const double box = opts.box_bound > 0.0 ? opts.box_bound : 1e3 * (1.0 + b_norm);
    out.box = std::max(box, 2.0 * (1.0 + b_norm));
    out.penalty = opts.penalty > 0.0 ? opts.penalty : 1e3 * (1.0 + inf_norm(lp.c));
  }
  if (!std::isfinite(out.box) || !std::isfinite(out.penalty)) fail(ErrorCode::Overflow, "box or penalty overflowed");

  const Index rows = m + 2 * n + 2;
  Matrix a = Matrix::Zero(rows, n + 1);
  Vector b = Vector::Zero(rows);
  out.provenance.resize(static_cast<std::size_t>(rows));
  a.topLeftCorner(m, n) = lp.A;
  a.col(n).head(m).setOnes();
  b.head(m) = lp.b;
  for (Index i = 0; i < m; ++i) out.provenance[static_cast<std::size_t>(i)] = {RowKind::Original, i};
  for (Index j = 0; j < n; ++j) {
    a(m + j, j) = 1.0;
    b[m + j] = -out.box;
    out.provenance[static_cast<std::size_t>(m + j)] = {RowKind::LowerBound, j};
    a(m + n + j, j) = -1.0;
    b[m + n + j] = -out.box;
    out.provenance[static_cast<std::size_t>(m + n + j)] = {RowKind::UpperBound, j};
  }
  a(m + 2 * n, n) = 1.0;
  b[m + 2 * n] = 0.0;
  out.provenance[static_cast<std::size_t>(m + 2 * n)] = {RowKind::AuxLower, n};
  a(m + 2 * n + 1, n) = -1.0;
  b[m + 2 * n + 1] = -out.box;
  out.provenance[static_cast<std::size_t>(m + 2 * n + 1)] = {RowKind::AuxUpper, n};

  out.program = Polytope{ConstraintMatrix(std::move(a)), std::move(b)};
  out.c.resize(n + 1);
  out.c.head(n) = lp.c;
  out.c[n] = out.penalty;
  out.interior_point = Vector::Zero(n + 1);
  out.interior_point[n] = 0.5 * out.box + 1.0;
  const Vector s = out.program.slacks(out.interior_point);
  if (!(s.minCoeff() > 0.0)) fail(ErrorCode::NonInterior, "constructed point is not interior");
  return out;
}

PreprocessedLP perturb_cost(const PreprocessedLP& lp, RandomSource& rng, bool zero_perturbation) {
  PreprocessedLP out = lp;
  const Index n = lp.original_cols;
  const double nd = static_cast<double>(n);
  const double scale = std::exp2(2.0 * lp.L + 3.0) * nd;
  const double range = std::exp2(lp.L + 1.0) * nd;
  out.cost_scale = lp.cost_scale * scale;
  out.c = lp.c * scale;
  if (!zero_perturbation) {
    for (Index j = 0; j < n; ++j) {
      double r;
      if (range < 4e18) {
        const auto bound = static_cast<std::int64_t>(range);
        r = static_cast<double>(rng.uniform_int(-bound, bound));
      } else {
        r = std::floor(rng.uniform(-range, range + 1.0));
      }
      out.c[j] += r;
    }
  }
  if (!out.c.allFinite()) fail(ErrorCode::Overflow, "perturbed cost overflowed");
  return out;
}

SolverConfig SolverConfig::practical(Index m, Index n) {
  SolverConfig cfg;
  cfg.weight = WeightConfig::for_dimensions(m, n);
  cfg.centering = CenteringConfig::make(cfg.weight, m, false);
  cfg.path = PathConfig::practical();
  return cfg;
}

SolverConfig SolverConfig::strict(Index m, Index n) {
  SolverConfig cfg;
  cfg.weight = WeightConfig::strict_for_dimensions(m, n);
  cfg.centering = CenteringConfig::make(cfg.weight, m, true);
  cfg.path = PathConfig::strict(cfg.weight, m);
  return cfg;
}

WeightedIterate initialize(const PreprocessedLP& lp, const SolverConfig& cfg, RandomSource& rng,
                           InitializationStats* stats, const TraceSink& trace) {
  const Polytope& p = lp.program;
  const Vector s0 = p.slacks(lp.interior_point);
  if (!(s0.minCoeff() > 0.0)) fail(ErrorCode::NonInterior, "interior point is not interior");
  const Vector w0 = compute_initial_weight(p.A, DiagonalVector(s0), cfg.weight.K, cfg.weight, rng).values();
  const Vector c_mod = p.A.entries().transpose() * (w0.array() / s0.array()).matrix();
  WeightedIterate it = make_iterate(p, lp.interior_point, w0, 1.0);

  const NormalFactorization h0(p.A, (w0.array() / s0.array().square()).matrix(), cfg.weight.solve);
  const double cost_norm = std::sqrt(std::max(0.0, h0.inverse_form(lp.c)));
  double t_small = std::min(1.0, 0.25 * cfg.centering.delta_target / std::max(cost_norm, 1e-300));

  InitializationStats local;
  PathConfig pcfg = cfg.path;
  constexpr int kMaxHalvings = 6;
  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    if (t_small < it.t) {
      pcfg.max_iterations = cfg.path.max_iterations - local.iterations;
      const PathResult res =
          path_following(p, it, c_mod, t_small, cfg.weight, cfg.centering, pcfg, rng, {}, trace);
      local.iterations += res.iterations;
      local.audits += res.audits;
      local.rollbacks += res.rollbacks;
      it = res.iterate;
    }
    local.t_small = it.t;
    local.swap_delta = centrality(p, it, lp.c, cfg.weight.solve);
    local.halvings = halving;
    if (local.swap_delta <= cfg.centering.delta_target) {
      if (stats) *stats = local;
      return it;
    }
    t_small *= 0.5;
  }
  if (stats) *stats = local;
  fail(ErrorCode::InitializationFailure,
       "cost swap left centrality " + std::to_string(local.swap_delta) + " above target after halvings");
}

ActiveSetResult round_to_active_set(const PreprocessedLP& lp, const Vector& x_near, double threshold) {
  const Polytope& p = lp.program;
  if (x_near.size() != p.cols()) fail(ErrorCode::DimensionMismatch, "point length differs from column count");
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidArgument, "activity threshold must be positive");
  ActiveSetResult out;
  out.x = x_near;
  const Vector s = p.slacks(x_near);
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] >= threshold) continue;
    out.rows.push_back(i);
    const RowOrigin& o = lp.provenance[static_cast<std::size_t>(i)];
    if (o.kind == RowKind::Original) out.constraints.push_back(o.index);
  }
  const Index k = static_cast<Index>(out.rows.size());
  if (k < p.cols()) {
    out.ambiguous = true;
    return out;
  }
  Matrix sub(k, p.cols());
  Vector rhs(k);
  for (Index r = 0; r < k; ++r) {
    sub.row(r) = p.A.entries().row(out.rows[static_cast<std::size_t>(r)]);
    rhs[r] = p.b[out.rows[static_cast<std::size_t>(r)]];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  qr.setThreshold(1e-10);
  if (qr.rank() < p.cols()) {
    out.ambiguous = true;
    return out;
  }
  const Vector x = qr.solve(rhs);
  const double resid = (sub * x - rhs).cwiseAbs().maxCoeff();
  const Vector s_new = p.slacks(x);
  const double feas = 1e-9 * (1.0 + p.b.cwiseAbs().maxCoeff());
  if (!x.allFinite() || resid > threshold || s_new.minCoeff() < -feas) {
    out.ambiguous = true;
    return out;
  }
  out.x = x;
  return out;
}

namespace {

struct Attempt {
  Vector x;
  Vector w;
  double t = 0.0;
  long iterations = 0;
  long audits = 0;
  long rollbacks = 0;
  /// No point of the box with z = 0 can match the path's lower bound.
  bool certified_infeasible = false;
};

/// True when c'^T (x, z) minus twice the gap bound exceeds every value of c' over
/// the box with z = 0, so the original constraints have no point in the box.
bool infeasibility_certified(const PreprocessedLP& pre, const WeightedIterate& it) {
  const Index n = pre.original_cols;
  if (!(it.x[n] > 0.0)) return false;
  const double lower = pre.c.dot(it.x) - 2.0 * it.w.sum() / it.t;
  return lower > pre.c.head(n).lpNorm<1>() * pre.box;
}

Attempt run_attempt(const PreprocessedLP& pre, const SolveOptions& opts, long budget, long iteration_offset,
                    RandomSource& rng) {
  const Index mp = pre.program.rows();
  const Index np = pre.program.cols();
  SolverConfig cfg = opts.strict_constants ? SolverConfig::strict(mp, np) : SolverConfig::practical(mp, np);
  cfg.path.max_iterations = budget;

  long offset = iteration_offset;
  TraceSink sink;
  if (opts.trace) {
    sink = [&](const TraceRecord& r) {
      TraceRecord shifted = r;
      shifted.iter += offset;
      opts.trace(shifted);
    };
  }

  Attempt out;
  InitializationStats st;
  WeightedIterate it = initialize(pre, cfg, rng, &st, sink);
  out.iterations += st.iterations;
  out.audits += st.audits;
  out.rollbacks += st.rollbacks;
  offset += st.iterations;

  const double size = static_cast<double>(np) + cfg.weight.beta * static_cast<double>(mp);
  const double t_end = std::max(it.t, 1.1 * size / (opts.tolerance * pre.cost_scale));
  cfg.path.max_iterations = budget - out.iterations;
  if (cfg.path.max_iterations <= 0) fail(ErrorCode::IterationLimit, "iteration budget spent during initialization");
  const PathResult res = path_following(pre.program, it, pre.c, t_end, cfg.weight, cfg.centering, cfg.path, rng, {},
                                        sink, [&pre](const WeightedIterate& w) { return infeasibility_certified(pre, w); });
  out.iterations += res.iterations;
  out.audits += res.audits;
  out.rollbacks += res.rollbacks;
  out.x = res.iterate.x;
  out.w = res.iterate.w;
  out.t = res.iterate.t;
  out.certified_infeasible = res.stopped;
  return out;
}

}  // namespace

SolveReport solve(const RawLP& lp, const SolveOptions& opts, RandomSource& rng) {
  const auto clock_start = std::chrono::steady_clock::now();
  const std::uint64_t solves_start = thread_work_counters().factorizations;
  SolveReport rep;
  rep.mode = opts.mode;
  auto finish = [&]() -> SolveReport {
    rep.linear_solves = static_cast<long>(thread_work_counters().factorizations - solves_start);
    rep.wall_time =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - clock_start).count();
    return rep;
  };

  if (!(opts.tolerance > 0.0 && opts.tolerance < 1.0))
    fail(ErrorCode::InvalidArgument, "tolerance must lie in (0, 1)");
  if (opts.max_iterations <= 0) fail(ErrorCode::InvalidArgument, "max_iterations must be positive");
  lp.validate();
  rep.bit_complexity = bit_complexity(lp);

  PreprocessOptions popt = opts.preprocess;
  popt.mode = opts.mode;
  if (popt.mode == SolveMode::Integral && !integer_data(lp)) {
    rep.notes.push_back("data is not integer; solved in tolerance mode");
    popt.mode = SolveMode::Tolerance;
  }
  PreprocessedLP pre;
  try {
    pre = preprocess(lp, popt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Overflow || popt.mode != SolveMode::Integral) throw;
    rep.notes.push_back("integral penalty exceeds the float-safe cap; solved in tolerance mode");
    popt.mode = SolveMode::Tolerance;
    pre = preprocess(lp, popt);
  }
  rep.mode = popt.mode;
  if (popt.mode == SolveMode::Integral) pre = perturb_cost(pre, rng, opts.zero_perturbation);

  const Index n = lp.cols();
  const double threshold = std::sqrt(opts.tolerance) * (1.0 + inf_norm(lp.b));
  const double hadamard_box = std::exp2(rep.bit_complexity + 1.0);
  const double penalty_cap =
      std::exp2(std::min(integral_penalty_log2(rep.bit_complexity, n), popt.log2_cap));
  int escalations = 0;

  for (;;) {
    Attempt at;
    try {
      at = run_attempt(pre, opts, opts.max_iterations - rep.iterations, rep.iterations, rng);
    } catch (const Error& e) {
      rep.status = e.code() == ErrorCode::IterationLimit ? SolveStatus::IterationLimit : SolveStatus::NumericalFailure;
      rep.notes.push_back(std::string(to_string(e.code())) + ": " + e.what());
      if (rep.status == SolveStatus::IterationLimit) rep.iterations = opts.max_iterations;
      return finish();
    }
    rep.iterations += at.iterations;
    rep.audits += at.audits;
    rep.rollbacks += at.rollbacks;
    rep.duality_gap_bound = at.w.sum() / (at.t * pre.cost_scale);
    if (at.certified_infeasible) {
      rep.status = SolveStatus::Infeasible;
      rep.notes.push_back("infeasibility certified by the path lower bound");
      if (pre.mode == SolveMode::Tolerance && pre.box < hadamard_box)
        rep.notes.push_back("infeasibility is relative to box " + std::to_string(pre.box));
      rep.objective = std::numeric_limits<double>::quiet_NaN();
      return finish();
    }

    const ActiveSetResult act = round_to_active_set(pre, at.x, threshold);
    const double z = act.x[n];
    const double reach = act.x.head(n).cwiseAbs().maxCoeff();
    const bool tolerance = pre.mode == SolveMode::Tolerance;
    const bool can_escalate = tolerance && escalations < opts.max_escalations;

    if (z > threshold) {
      if (can_escalate && pre.penalty < penalty_cap) {
        ++escalations;
        popt.penalty = std::min(pre.penalty * 1e4, penalty_cap);
        popt.box_bound = pre.box;
        pre = preprocess(lp, popt);
        rep.notes.push_back("auxiliary variable stayed positive; penalty raised to " + std::to_string(pre.penalty));
        continue;
      }
      rep.status = SolveStatus::Infeasible;
      if (tolerance && pre.penalty < penalty_cap)
        rep.notes.push_back("infeasibility is relative to penalty " + std::to_string(pre.penalty));
    } else if (reach > 0.5 * pre.box) {
      if (can_escalate && pre.box < hadamard_box) {
        ++escalations;
        popt.box_bound = std::min(pre.box * 1e4, hadamard_box);
        popt.penalty = pre.penalty;
        pre = preprocess(lp, popt);
        rep.notes.push_back("solution reached the box; box raised to " + std::to_string(pre.box));
        continue;
      }
      rep.status = SolveStatus::Unbounded;
      if (tolerance && pre.box < hadamard_box)
        rep.notes.push_back("unboundedness is relative to box " + std::to_string(pre.box));
    } else {
      rep.status = SolveStatus::Optimal;
      rep.x_star = act.x.head(n);
      rep.objective = lp.c.dot(rep.x_star);
      rep.active_set = act.constraints;
      if (act.ambiguous) rep.notes.push_back("active set is ambiguous; returning the path point");
    }
    if (rep.status != SolveStatus::Optimal) rep.objective = std::numeric_limits<double>::quiet_NaN();
    return finish();
  }
}

}  // namespace wpath
