#include "wpath/core_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wpath {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonInterior: return "NonInterior";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::ContractFailure: return "ContractFailure";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::RollbackLoop: return "RollbackLoop";
    case ErrorCode::InitializationFailure: return "InitializationFailure";
    case ErrorCode::AmbiguousActiveSet: return "AmbiguousActiveSet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry");
}

ConstraintMatrix::ConstraintMatrix(Matrix entries) : a_(std::move(entries)) {
  if (a_.rows() == 0 || a_.cols() == 0) fail(ErrorCode::DimensionMismatch, "constraint matrix is empty");
  if (a_.rows() < a_.cols())
    fail(ErrorCode::DimensionMismatch, "constraint matrix needs at least as many rows as columns");
  if (!a_.allFinite()) fail(ErrorCode::NonFinite, "constraint matrix has a non-finite entry");
  for (Index i = 0; i < a_.rows(); ++i)
    if ((a_.row(i).array() == 0.0).all())
      fail(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " of the constraint matrix is zero");
  for (Index j = 0; j < a_.cols(); ++j)
    if ((a_.col(j).array() == 0.0).all())
      fail(ErrorCode::DimensionMismatch, "column " + std::to_string(j) + " of the constraint matrix is zero");
}

DiagonalVector::DiagonalVector(Vector values) : v_(std::move(values)) {
  require_finite(v_, "diagonal vector");
  if (v_.size() > 0 && v_.minCoeff() <= 0.0) fail(ErrorCode::NonInterior, "diagonal vector must be positive");
}

DiagonalVector DiagonalVector::constant(Index size, double value) {
  return DiagonalVector(Vector::Constant(size, value));
}

void SolveTolerance::validate() const {
  if (!(relative_accuracy > 0.0 && relative_accuracy < 1.0))
    fail(ErrorCode::InvalidArgument, "relative_accuracy must lie in (0, 1)");
  if (max_refinement_steps < 0) fail(ErrorCode::InvalidArgument, "max_refinement_steps must be >= 0");
  if (!(qr_switch > 0.0 && qr_switch <= 1.0)) fail(ErrorCode::InvalidArgument, "qr_switch must lie in (0, 1]");
}

Index SketchOptions::vector_count(Index m, double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::InvalidArgument, "sketch accuracy must lie in (0, 1)");
  double k = std::ceil(log_constant * std::log(static_cast<double>(std::max<Index>(m, 2))) / (eps * eps));
  k = std::max(k, 1.0);
  if (max_vectors > 0) k = std::min(k, static_cast<double>(max_vectors));
  // Saturate instead of overflowing the index type for tiny eps.
  return static_cast<Index>(std::min(k, 1e15));
}

WorkCounters& thread_work_counters() {
  thread_local WorkCounters counters;
  return counters;
}

NormalFactorization::NormalFactorization(const ConstraintMatrix& a, const Vector& d, const SolveTolerance& tol)
    : a_(&a), d_(d), tol_(tol) {
  if (d.size() != a.rows()) fail(ErrorCode::DimensionMismatch, "scaling length differs from row count");
  require_finite(d, "scaling");
  if (d.minCoeff() <= 0.0) fail(ErrorCode::NonInterior, "scaling must be positive");
  const Matrix& A = a.entries();
  normal_ = A.transpose() * d.asDiagonal() * A;
  if (!normal_.allFinite()) fail(ErrorCode::NonFinite, "normal matrix overflowed");
  const Vector diag = normal_.diagonal();
  if (!(diag.minCoeff() > 0.0)) fail(ErrorCode::RankDeficient, "normal matrix has a zero diagonal entry");
  unit_ = diag.cwiseSqrt().cwiseInverse();
  ++thread_work_counters().factorizations;
  Eigen::LLT<Matrix> llt(unit_.asDiagonal() * normal_ * unit_.asDiagonal());
  if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().array().square().minCoeff() >= tol_.qr_switch) {
    lower_ = llt.matrixL();
    return;
  }
  // Square-root form: R from a QR of D^{1/2} A U has half the condition number in digits.
  const Matrix rows = d.cwiseSqrt().asDiagonal() * A * unit_.asDiagonal();
  Eigen::HouseholderQR<Matrix> qr(rows);
  const Index n = A.cols();
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) r.row(i) *= -1.0;
  lower_ = r.transpose();
  const Vector pivots = lower_.diagonal().array().square();
  if (!lower_.allFinite() || pivots.minCoeff() < tol_.pivot_floor * tol_.pivot_floor)
    fail(ErrorCode::RankDeficient, "Cholesky pivot below floor");
}

Vector NormalFactorization::apply(const Vector& v) const { return normal_ * v; }

Vector NormalFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != normal_.rows()) fail(ErrorCode::DimensionMismatch, "right-hand side has wrong length");
  require_finite(rhs, "right-hand side");
  ++thread_work_counters().solves;
  auto base = [this](const Vector& v) -> Vector { return unit_.cwiseProduct(factor_solve(unit_.cwiseProduct(v)).col(0)); };
  Vector y = base(rhs);
  const double scale = std::sqrt(std::max(0.0, y.dot(rhs)));
  for (int step = 0; step < tol_.max_refinement_steps; ++step) {
    const Vector r = rhs - normal_ * y;
    const Vector dy = base(r);
    const double err = std::sqrt(std::max(0.0, dy.dot(r)));
    y += dy;
    if (err <= tol_.relative_accuracy * scale) break;
  }
  if (!y.allFinite()) fail(ErrorCode::NonFinite, "solve produced a non-finite entry");
  return y;
}

Matrix NormalFactorization::whitened_rows() const {
  Matrix b = unit_.asDiagonal() * a_->entries().transpose() * d_.cwiseSqrt().asDiagonal();
  lower_.triangularView<Eigen::Lower>().solveInPlace(b);
  return b;
}

Vector NormalFactorization::leverage_scores() const {
  ++thread_work_counters().solves;
  return whitened_rows().colwise().squaredNorm().transpose();
}

Vector NormalFactorization::sketched_leverage_scores(double eps, RandomSource& rng,
                                                     const SketchOptions& opts) const {
  const Index m = a_->rows();
  const Index k = opts.vector_count(m, eps);
  if (static_cast<double>(k) * static_cast<double>(m) > 5e8)
    fail(ErrorCode::InvalidArgument, "sketch needs " + std::to_string(k) + " vectors; set a cap");
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Matrix q(m, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < m; ++i) q(i, j) = scale * rng.rademacher();
  const Vector root = d_.cwiseSqrt();
  Matrix y = unit_.asDiagonal() * (a_->entries().transpose() * (root.asDiagonal() * q));
  y = factor_solve(y);
  y = unit_.asDiagonal() * y;
  thread_work_counters().solves += static_cast<std::uint64_t>(k);
  const Matrix p = root.asDiagonal() * (a_->entries() * y);
  return p.rowwise().squaredNorm();
}

double NormalFactorization::inverse_form(const Vector& v) const {
  const Vector u = unit_.cwiseProduct(v);
  return u.dot(factor_solve(u).col(0));
}

double NormalFactorization::log_det() const {
  return 2.0 * (lower_.diagonal().array().log().sum() - unit_.array().log().sum());
}

Matrix NormalFactorization::factor_solve(const Matrix& rhs) const {
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(y);
  return y;
}

Vector solve_normal_equations(const ConstraintMatrix& a, const DiagonalVector& d, const Vector& rhs,
                              const SolveTolerance& tol) {
  tol.validate();
  return NormalFactorization(a, d.values(), tol).solve(rhs);
}

Vector exact_leverage_scores(const ConstraintMatrix& a, const DiagonalVector& x) {
  return NormalFactorization(a, x.values()).leverage_scores();
}

Vector approx_leverage_scores(const ConstraintMatrix& a, const DiagonalVector& x, double eps, RandomSource& rng,
                              const SketchOptions& opts) {
  return NormalFactorization(a, x.values()).sketched_leverage_scores(eps, rng, opts);
}

namespace {

Vector slack_scaling(const ConstraintMatrix& a, const DiagonalVector& s, const DiagonalVector& w) {
  if (s.size() != a.rows() || w.size() != a.rows())
    fail(ErrorCode::DimensionMismatch, "slack or weight length differs from row count");
  return w.values().array() / s.values().array().square();
}

}  // namespace

double slack_sensitivity(const ConstraintMatrix& a, const DiagonalVector& s, const DiagonalVector& w) {
  const Vector sigma = NormalFactorization(a, slack_scaling(a, s, w)).leverage_scores();
  return std::sqrt((sigma.array() / w.values().array()).maxCoeff());
}

double slack_sensitivity_sketched(const ConstraintMatrix& a, const DiagonalVector& s, const DiagonalVector& w,
                                  double eps, RandomSource& rng) {
  const Vector sigma =
      NormalFactorization(a, slack_scaling(a, s, w)).sketched_leverage_scores(eps, rng);
  return std::sqrt((sigma.array() / w.values().array()).maxCoeff());
}

}  // namespace wpath
