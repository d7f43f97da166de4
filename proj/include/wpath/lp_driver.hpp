#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wpath/central_path.hpp"

namespace wpath {

enum class SolveMode { Tolerance, Integral };
enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string_view to_string(SolveMode mode);
std::string_view to_string(SolveStatus status);

/// min c^T x subject to A x >= b. A may have any shape.
struct RawLP {
  Matrix A;
  Vector b;
  Vector c;
  bool integrality = false;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  /// DimensionMismatch on inconsistent sizes, NonFinite on NaN or Inf,
  /// InvalidArgument for non-integer data when integrality is set.
  void validate() const;
};

enum class RowKind { Original, LowerBound, UpperBound, AuxLower, AuxUpper };

struct RowOrigin {
  RowKind kind = RowKind::Original;
  /// Source constraint for Original rows, variable index for bound rows.
  Index index = 0;
};

struct PreprocessOptions {
  SolveMode mode = SolveMode::Tolerance;
  /// Tolerance mode box half-width; zero picks 1e3 (1 + ||b||_inf).
  double box_bound = 0.0;
  /// Tolerance mode penalty on z; zero picks 1e3 (1 + ||c||_inf).
  double penalty = 0.0;
  /// Integral mode refuses penalties above 2^log2_cap.
  double log2_cap = 200.0;
};

/// Rows [A 1; I 0; -I 0; 0 1; 0 -1] over the variables (x, z).
struct PreprocessedLP {
  Polytope program;
  Vector c;
  /// Bit-complexity estimate of the raw program.
  double L = 0.0;
  /// Half-width of the box on x and upper bound on z.
  double box = 0.0;
  double penalty = 0.0;
  /// Factor applied to the raw cost by perturb_cost.
  double cost_scale = 1.0;
  Vector interior_point;
  std::vector<RowOrigin> provenance;
  Index original_rows = 0;
  Index original_cols = 0;
  SolveMode mode = SolveMode::Tolerance;

  Index aux_index() const { return original_cols; }
};

/// log2 m + log2(1 + Hadamard bound on subdeterminants) + log2(1 + max(||b||_inf, ||c||_inf)), rounded up.
double bit_complexity(const RawLP& lp);

/// Overflow in integral mode when the penalty exceeds 2^log2_cap.
PreprocessedLP preprocess(const RawLP& lp, const PreprocessOptions& opts = {});

/// Scales the cost by 2^{2L+3} n and adds an integer perturbation to the x part.
/// zero_perturbation keeps only the scaling.
PreprocessedLP perturb_cost(const PreprocessedLP& lp, RandomSource& rng, bool zero_perturbation = false);

struct SolverConfig {
  WeightConfig weight;
  CenteringConfig centering;
  PathConfig path;

  static SolverConfig practical(Index m, Index n);
  static SolverConfig strict(Index m, Index n);
};

struct InitializationStats {
  double t_small = 0.0;
  double swap_delta = 0.0;
  int halvings = 0;
  long iterations = 0;
  long audits = 0;
  long rollbacks = 0;
};

/// Starts on the path of the modified cost A^T S^{-1} w0 at t = 1, follows it
/// down to t_small and swaps in the true cost.
WeightedIterate initialize(const PreprocessedLP& lp, const SolverConfig& cfg, RandomSource& rng,
                           InitializationStats* stats = nullptr, const TraceSink& trace = {});

struct ActiveSetResult {
  /// Rows of the preprocessed program with slack below the threshold.
  std::vector<Index> rows;
  /// Original constraints among them.
  std::vector<Index> constraints;
  Vector x;
  bool ambiguous = false;
};

/// Marks rows with slack below threshold and refines x by least squares on them.
/// A rank-deficient active system returns x_near unchanged with ambiguous set.
ActiveSetResult round_to_active_set(const PreprocessedLP& lp, const Vector& x_near, double threshold);

struct SolveOptions {
  SolveMode mode = SolveMode::Tolerance;
  double tolerance = 1e-8;
  bool strict_constants = false;
  /// Total path-following iterations over all phases.
  long max_iterations = 1000000;
  PreprocessOptions preprocess;
  bool zero_perturbation = false;
  /// Tolerance mode retries with a 1e4 times larger penalty or box.
  int max_escalations = 3;
  TraceSink trace;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x_star;
  double objective = 0.0;
  std::vector<Index> active_set;
  long iterations = 0;
  long linear_solves = 0;
  long audits = 0;
  long rollbacks = 0;
  double duality_gap_bound = 0.0;
  double wall_time = 0.0;
  SolveMode mode = SolveMode::Tolerance;
  double bit_complexity = 0.0;
  std::vector<std::string> notes;
};

SolveReport solve(const RawLP& lp, const SolveOptions& opts, RandomSource& rng);

}  // namespace wpath
