#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "wpath/error.hpp"
#include "wpath/random.hpp"

namespace wpath {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense m x n constraint matrix with m >= n and no zero rows or columns.
/// Full column rank is checked when a normal matrix is factorized.
class ConstraintMatrix {
 public:
  ConstraintMatrix() = default;
  explicit ConstraintMatrix(Matrix entries);

  const Matrix& entries() const { return a_; }
  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }

 private:
  Matrix a_;
};

/// Strictly positive, finite vector read as a diagonal matrix.
class DiagonalVector {
 public:
  DiagonalVector() = default;
  explicit DiagonalVector(Vector values);

  static DiagonalVector constant(Index size, double value);

  const Vector& values() const { return v_; }
  Index size() const { return v_.size(); }
  double operator[](Index i) const { return v_[i]; }

 private:
  Vector v_;
};

using WeightVector = DiagonalVector;

struct SolveTolerance {
  double relative_accuracy = 1e-10;
  int max_refinement_steps = 2;
  /// Squared Cholesky pivots of the unit-diagonal scaled matrix below this
  /// switch to the QR factor of D^{1/2} A.
  double qr_switch = 1e-6;
  /// Squared QR pivots below the square of this mean rank loss.
  double pivot_floor = 1e-12;

  void validate() const;
};

struct SketchOptions {
  /// k = ceil(log_constant * ln(m) / eps^2).
  double log_constant = 24.0;
  /// Upper bound on k; zero means no cap.
  Index max_vectors = 0;

  Index vector_count(Index m, double eps) const;
};

/// Number of normal-equation solves and factorizations done on this thread.
struct WorkCounters {
  std::uint64_t factorizations = 0;
  std::uint64_t solves = 0;
};

WorkCounters& thread_work_counters();

/// Cholesky factorization of A^T D A after symmetric diagonal scaling to a
/// unit diagonal. Falls back to a QR of D^{1/2} A when a Cholesky pivot drops
/// below the floor. Holds a reference to A, which must outlive the factorization.
class NormalFactorization {
 public:
  NormalFactorization(const ConstraintMatrix& a, const Vector& d, const SolveTolerance& tol = {});

  const ConstraintMatrix& matrix() const { return *a_; }
  const Vector& scaling() const { return d_; }

  /// (A^T D A)^{-1} rhs with iterative refinement.
  Vector solve(const Vector& rhs) const;

  /// Diagonal of D^{1/2} A (A^T D A)^{-1} A^T D^{1/2}.
  Vector leverage_scores() const;

  /// JL estimate of leverage_scores() using Rademacher vectors.
  Vector sketched_leverage_scores(double eps, RandomSource& rng, const SketchOptions& opts = {}) const;

  /// Columns of L^{-1} A^T D^{1/2} for a Cholesky factor L: column i has squared norm sigma_i.
  Matrix whitened_rows() const;

  /// v^T (A^T D A)^{-1} v.
  double inverse_form(const Vector& v) const;

  double log_det() const;

  /// A^T D A v without forming anything new.
  Vector apply(const Vector& v) const;

 private:
  /// (L L^T)^{-1} rhs for the scaled matrix.
  Matrix factor_solve(const Matrix& rhs) const;

  const ConstraintMatrix* a_;
  Vector d_;
  Matrix normal_;
  /// diag(A^T D A)^{-1/2}; lower_ factors the scaled matrix.
  Vector unit_;
  Matrix lower_;
  SolveTolerance tol_;
};

Vector solve_normal_equations(const ConstraintMatrix& a, const DiagonalVector& d, const Vector& rhs,
                              const SolveTolerance& tol = {});

Vector exact_leverage_scores(const ConstraintMatrix& a, const DiagonalVector& x);

Vector approx_leverage_scores(const ConstraintMatrix& a, const DiagonalVector& x, double eps,
                              RandomSource& rng, const SketchOptions& opts = {});

/// gamma(s, w) = max_i sqrt(e_i^T S^{-1} A (A^T S^{-1} W S^{-1} A)^{-1} A^T S^{-1} e_i).
/// The sketched variant takes a relative accuracy eps for the JL estimate.
double slack_sensitivity(const ConstraintMatrix& a, const DiagonalVector& s, const DiagonalVector& w);
double slack_sensitivity_sketched(const ConstraintMatrix& a, const DiagonalVector& s,
                                  const DiagonalVector& w, double eps, RandomSource& rng);

void require_finite(const Vector& v, const char* what);

}  // namespace wpath
