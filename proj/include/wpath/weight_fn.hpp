#pragma once

#include "wpath/core_linalg.hpp"

namespace wpath {

enum class LeverageMode {
  Exact,
  Sketched,
  /// Exact scores whenever the sketch would need at least m vectors.
  Auto,
};

struct WeightConfig {
  double alpha = 0.5;
  double beta = 0.25;
  double c_r = 2.0;
  double c_gamma = 2.0;
  double c_1 = 2.0;
  double K = 1.0 / 48.0;

  LeverageMode leverage = LeverageMode::Auto;
  SketchOptions sketch;
  SolveTolerance solve;
  /// Multiplies the relative radius of the trust boxes of compute_weight and
  /// exact_weight. Values above 1 let the iteration follow larger slack moves.
  double box_scale = 1.0;
  /// Scales the proximal step count of compute_weight; 1 keeps the formula.
  double step_multiplier = 1.0;
  /// Stop compute_weight once the relative step is small enough to certify
  /// the requested accuracy. Off means the step count is always exhausted.
  bool early_exit = false;
  /// Denominator constant of the homotopy decay in compute_initial_weight.
  double homotopy_constant = 10.0;
  /// Follow the homotopy with exact fixed-point solves and an adaptive decay.
  bool verify_homotopy = true;

  static WeightConfig for_dimensions(Index m, Index n);
  /// Paper constants everywhere: fixed step counts and decay constant 1000.
  static WeightConfig strict_for_dimensions(Index m, Index n);

  void validate() const;

  /// Relative radius of the exact_weight trust box.
  double basin_radius() const { return box_scale * (1.0 - alpha) / 24.0; }
};

/// Leverage scores of S^{-1}A under weights w^alpha, the sigma of the weight function.
Vector weighted_slack_leverage(const ConstraintMatrix& a, const Vector& s, const Vector& w, const WeightConfig& cfg);

double weight_objective(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                        const WeightConfig& cfg);

Vector weight_gradient(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                       const WeightConfig& cfg, bool exact, RandomSource& rng);

/// Fixed-point iteration of the weight function started from w0. Stops when the
/// relative step falls below target_accuracy. max_iterations = 0 uses the default cap.
WeightVector exact_weight(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w0,
                          const WeightConfig& cfg, double target_accuracy = 1e-12, int max_iterations = 0);

/// g(s) from scratch: homotopy start followed by exact polishing.
WeightVector weight_function(const ConstraintMatrix& a, const DiagonalVector& s, const WeightConfig& cfg,
                             double target_accuracy = 1e-12);

/// Dense m x m Jacobian of g at s. Desk scale only.
Matrix weight_jacobian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightConfig& cfg);
Matrix weight_jacobian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& g,
                       const WeightConfig& cfg);

/// Dense Hessian of the weight objective in w. Desk scale only.
Matrix weight_hessian(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w,
                      const WeightConfig& cfg);

/// Box-constrained proximal steps toward g(s) using approximate leverage scores.
WeightVector compute_weight(const ConstraintMatrix& a, const DiagonalVector& s, const WeightVector& w0, double K,
                            const WeightConfig& cfg, RandomSource& rng);

/// Homotopy in beta from 12 c_r down to n/(2m), then compute_weight at accuracy K.
WeightVector compute_initial_weight(const ConstraintMatrix& a, const DiagonalVector& s, double K,
                                    const WeightConfig& cfg, RandomSource& rng);

}  // namespace wpath
