#include "wpath/weight_fn.hpp"

#include <algorithm>
#include <cmath>

namespace wpath {

namespace {

double log2_ratio(Index m, Index n) {
  // Near-square systems would give alpha <= 0; below 2 the log is pinned.
  return std::max(2.0, std::log2(2.0 * static_cast<double>(m) / static_cast<double>(n)));
}

void check_shapes(const ConstraintMatrix& a, const Vector& s, const Vector& w) {
  if (s.size() != a.rows() || w.size() != a.rows())
    fail(ErrorCode::DimensionMismatch, "slack or weight length differs from row count");
}

bool use_exact(const WeightConfig& cfg, Index m, double eps) {
  switch (cfg.leverage) {
    case LeverageMode::Exact: return true;
    case LeverageMode::Sketched: return false;
    case LeverageMode::Auto: return cfg.sketch.vector_count(m, eps) >= m;
  }
  return true;
}

Vector scores(const ConstraintMatrix& a, const Vector& s, const Vector& w, const WeightConfig& cfg, bool exact,
              double eps, RandomSource& rng) {
  const Vector d = w.array().pow(cfg.alpha) / s.array().square();
  NormalFactorization f(a, d, cfg.solve);
  if (exact) return f.leverage_scores();
  return f.sketched_leverage_scores(eps, rng, cfg.sketch);
}

/// Upper bound on ||W^{-1}(g - w)||_inf from the fixed-point residual, using
/// strong convexity of the weight objective in the W^{-1} norm.
double distance_bound(const Vector& w, const Vector& residual, double alpha) {
  const double strong = 2.0 * (1.0 - alpha) / 3.0;
  const double norm = std::sqrt((w.array() * residual.array().square()).sum());
  return norm / (strong * std::sqrt(w.minCoeff()));
}

}  // namespace

WeightConfig WeightConfig::for_dimensions(Index m, Index n) {
  if (n <= 0 || m < n) fail(ErrorCode::DimensionMismatch, "weight config needs m >= n >= 1");
  const double l2 = log2_ratio(m, n);
  WeightConfig cfg;
  cfg.alpha = 1.0 - 1.0 / l2;
  cfg.beta = static_cast<double>(n) / (2.0 * static_cast<double>(m));
  cfg.c_r = 2.0 * l2;
  cfg.c_gamma = 2.0;
  cfg.c_1 = 2.0 * static_cast<double>(n);
  cfg.K = 1.0 / (24.0 * cfg.c_r);
  cfg.leverage = LeverageMode::Auto;
  cfg.early_exit = true;
  cfg.box_scale = 8.0;
  cfg.homotopy_constant = 10.0;
  cfg.verify_homotopy = true;
  return cfg;
}

WeightConfig WeightConfig::strict_for_dimensions(Index m, Index n) {
  WeightConfig cfg = for_dimensions(m, n);
  cfg.early_exit = false;
  cfg.box_scale = 1.0;
  cfg.homotopy_constant = 1000.0;
  cfg.verify_homotopy = false;
  return cfg;
}

void WeightConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
  if (std::pow(beta, 1.0 - alpha) < 0.5 - 1e-12)
    fail(ErrorCode::InvalidArgument, "beta^(1 - alpha) must be at least 1/2");
  if (!(c_r >= 1.0) || !(c_gamma >= 1.0)) fail(ErrorCode::InvalidArgument, "c_r and c_gamma must be >= 1");
  if (!(K > 0.0)) fail(ErrorCode::InvalidArgument, "K must be positive");
  if (!(box_scale > 0.0)) fail(ErrorCode::InvalidArgument, "box_scale must be positive");
  if (!(step_multiplier > 0.0)) fail(ErrorCode::InvalidArgument, "step_multiplier must be positive");
  if (!(homotopy_constant > 0.0)) fail(ErrorCode::InvalidArgument, "homotopy_constant must be positive");
  solve.validate();
}

Vector weighted_slack_leverage(const ConstraintMatrix& a, const Vector& s, const Vector& w, const WeightConfig& cfg) {
  check_shapes(a, s, w);
  RandomSource unused;
  return scores(a, s, w, cfg, true, 0.5, unused);
}

double weight_objective(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                        const WeightConfig& cfg) {
  check_shapes(a, s.values(), w.values());
  const Vector d = w.values().array().pow(cfg.alpha) / s.values().array().square();
  NormalFactorization f(a, d, cfg.solve);
  return w.values().sum() - f.log_det() / cfg.alpha - cfg.beta * w.values().array().log().sum();
}

Vector weight_gradient(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                       const WeightConfig& cfg, bool exact, RandomSource& rng) {
  check_shapes(a, s.values(), w.values());
  const Index m = a.rows();
  const double eps = cfg.K / (48.0 * cfg.c_r * std::log(2.0 * m / cfg.K));
  const bool go_exact = exact || use_exact(cfg, m, eps);
  const Vector sigma = scores(a, s.values(), w.values(), cfg, go_exact, eps, rng);
  return (1.0 - (sigma.array() + cfg.beta) / w.values().array()).matrix();
}

WeightVector exact_weight(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w0,
                          const WeightConfig& cfg, double target_accuracy, int max_iterations) {
  check_shapes(a, s.values(), w0.values());
  if (!(target_accuracy > 0.0)) fail(ErrorCode::InvalidArgument, "target_accuracy must be positive");
  const double radius = std::min(0.9, cfg.basin_radius());
  if (max_iterations <= 0) max_iterations = 64 * static_cast<int>(std::ceil(12.0 / (1.0 - cfg.alpha)));
  const Vector lo = w0.values() * (1.0 - radius);
  const Vector hi = w0.values() * (1.0 + radius);
  RandomSource unused;
  Vector w = w0.values();
  for (int it = 0; it < max_iterations; ++it) {
    const Vector sigma = scores(a, s.values(), w, cfg, true, 0.5, unused);
    const Vector proposal = 0.5 * (w.array() + sigma.array() + cfg.beta);
    const Vector next = proposal.cwiseMax(lo).cwiseMin(hi);
    const double step = ((next - w).array() / w.array()).abs().maxCoeff();
    w = next;
    if (step < target_accuracy) {
      const double clipped = ((proposal - next).array() / next.array()).abs().maxCoeff();
      if (clipped > std::max(4.0 * target_accuracy, 1e-13))
        fail(ErrorCode::NoConvergence, "fixed point lies outside the trust box around w0");
      return WeightVector(w);
    }
  }
  fail(ErrorCode::NoConvergence, "exact weight iteration hit its cap");
}

WeightVector weight_function(const ConstraintMatrix& a, const DiagonalVector& s, const WeightConfig& cfg,
                             double target_accuracy) {
  WeightConfig exact_cfg = cfg;
  exact_cfg.leverage = LeverageMode::Exact;
  exact_cfg.early_exit = true;
  exact_cfg.verify_homotopy = true;
  RandomSource unused;
  const WeightVector start = compute_initial_weight(a, s, cfg.basin_radius() / 4.0, exact_cfg, unused);
  return exact_weight(a, s, start, cfg, target_accuracy);
}

namespace {

/// Lambda = Sigma - P o P for S^{-1}A under weights w^alpha.
Matrix leverage_laplacian(const ConstraintMatrix& a, const Vector& s, const Vector& w, const WeightConfig& cfg,
                          Vector& sigma) {
  const Vector d = w.array().pow(cfg.alpha) / s.array().square();
  NormalFactorization f(a, d, cfg.solve);
  const Matrix b = f.whitened_rows();
  const Matrix p = b.transpose() * b;
  sigma = p.diagonal();
  Matrix lambda = -p.cwiseProduct(p);
  lambda.diagonal() += sigma;
  return lambda;
}

}  // namespace

Matrix weight_jacobian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightConfig& cfg) {
  return weight_jacobian(a, s, weight_function(a, s, cfg), cfg);
}

Matrix weight_jacobian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& g,
                       const WeightConfig& cfg) {
  check_shapes(a, s.values(), g.values());
  Vector sigma;
  const Matrix lambda = leverage_laplacian(a, s.values(), g.values(), cfg, sigma);
  Matrix inner = -cfg.alpha * lambda;
  inner.diagonal() += g.values();
  const Matrix solved = inner.partialPivLu().solve(lambda * s.values().cwiseInverse().asDiagonal());
  return -2.0 * g.values().asDiagonal() * solved;
}

Matrix weight_hessian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                      const WeightConfig& cfg) {
  check_shapes(a, s.values(), w.values());
  Vector sigma;
  Matrix h = -cfg.alpha * leverage_laplacian(a, s.values(), w.values(), cfg, sigma);
  h.diagonal() += sigma + Vector::Constant(sigma.size(), cfg.beta);
  const Vector winv = w.values().cwiseInverse();
  return winv.asDiagonal() * h * winv.asDiagonal();
}

WeightVector compute_weight(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w0, double K,
                            const WeightConfig& cfg, RandomSource& rng) {
  check_shapes(a, s.values(), w0.values());
  if (!(K > 0.0)) fail(ErrorCode::InvalidArgument, "K must be positive");
  const Index m = a.rows();
  const double md = static_cast<double>(m);
  const double eps = std::min(0.5, K / (48.0 * cfg.c_r * std::log(2.0 * md / K)));
  const double steps = std::ceil(cfg.step_multiplier * 12.0 * cfg.c_r * std::log(4.0 * md / K));
  const Index k = std::max<Index>(1, static_cast<Index>(steps));
  const double radius = std::min(0.9, cfg.box_scale / (12.0 * cfg.c_r));
  const Vector lo = w0.values() * (1.0 - radius);
  const Vector hi = w0.values() * (1.0 + radius);
  const bool exact = use_exact(cfg, m, eps);
  Vector w = w0.values();
  for (Index j = 0; j < k; ++j) {
    const Vector sigma = scores(a, s.values(), w, cfg, exact, eps, rng);
    const Vector target = sigma.array() + cfg.beta;
    if (cfg.early_exit) {
      const Vector residual = 1.0 - target.array() / w.array();
      if (distance_bound(w, residual, cfg.alpha) <= 0.5 * K) break;
    }
    w = (0.5 * (w + target)).cwiseMax(lo).cwiseMin(hi);
  }
  return WeightVector(w);
}

WeightVector compute_initial_weight(const ConstraintMatrix& a, const DiagonalVector& s, double K,
                                    const WeightConfig& cfg, RandomSource& rng) {
  if (s.size() != a.rows()) fail(ErrorCode::DimensionMismatch, "slack length differs from row count");
  const Index m = a.rows();
  const double n = static_cast<double>(a.cols());
  const double beta_final = cfg.beta;
  const double base_decay =
      std::pow(1.0 - cfg.alpha, 1.5) / (cfg.homotopy_constant * cfg.c_r * cfg.c_r * std::sqrt(n));
  const double inner_k = 1.0 / (50.0 * cfg.c_r);

  WeightConfig hat = cfg;
  hat.beta = 12.0 * cfg.c_r;
  Vector w = Vector::Constant(m, hat.beta);
  if (!cfg.verify_homotopy) {
    for (;;) {
      w = compute_weight(a, s, WeightVector(w), inner_k, hat, rng).values();
      if (hat.beta <= beta_final) break;
      hat.beta = std::max(hat.beta * (1.0 - base_decay), beta_final);
    }
    return compute_weight(a, s, WeightVector(w), K, cfg, rng);
  }

  // Verified continuation: every accepted beta carries its exact fixed point.
  const double cap = 0.5 * hat.basin_radius();
  const double accuracy = std::min(1e-6, 0.1 * K);
  RandomSource unused;
  w = (w.array() + scores(a, s.values(), w, hat, true, 0.5, unused).array()).matrix();
  w = exact_weight(a, s, WeightVector(w), hat, accuracy).values();
  double decay = std::min(base_decay, cap);
  int failures = 0;
  while (hat.beta > beta_final) {
    WeightConfig trial = hat;
    trial.beta = std::max(hat.beta * (1.0 - decay), beta_final);
    try {
      w = exact_weight(a, s, WeightVector(w), trial, accuracy).values();
      hat.beta = trial.beta;
      decay = std::min(2.0 * decay, cap);
      failures = 0;
      continue;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence) throw;
    }
    decay *= 0.5;
    if (++failures > 60) fail(ErrorCode::NoConvergence, "homotopy decay collapsed");
  }
  return compute_weight(a, s, WeightVector(w), K, cfg, rng);
}

}  // namespace wpath
