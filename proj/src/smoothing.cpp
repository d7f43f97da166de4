#include "wpath/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace wpath {

namespace {

constexpr double kExponentLimit = 700.0;

void check_exponent(const Vector& x, double mu) {
  if (!x.allFinite()) fail(ErrorCode::NonFinite, "potential argument has a non-finite entry");
  if (x.size() > 0 && mu * x.cwiseAbs().maxCoeff() > kExponentLimit)
    fail(ErrorCode::Overflow, "potential exponent exceeds the guard");
}

/// Gradient direction of Phi scaled by exp(-mu ||x||_inf), safe near the guard.
Vector scaled_gradient(const Vector& x, double mu) {
  const double top = mu * x.cwiseAbs().maxCoeff();
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double e = mu * std::abs(x[i]);
    const double mag = std::exp(e - top) - std::exp(-e - top);
    g[i] = x[i] > 0 ? mag : (x[i] < 0 ? -mag : 0.0);
  }
  return g;
}

}  // namespace

PotentialConfig PotentialConfig::for_game(double R, double eps_game) {
  PotentialConfig cfg;
  cfg.R = R;
  cfg.eps_game = eps_game;
  cfg.mu = eps_game / (12.0 * R);
  cfg.validate();
  return cfg;
}

void PotentialConfig::validate() const {
  if (!(mu > 0.0) || !(R > 0.0)) fail(ErrorCode::InvalidArgument, "mu and R must be positive");
  if (!(eps_game > 0.0 && eps_game < 0.2)) fail(ErrorCode::InvalidArgument, "eps_game must lie in (0, 1/5)");
}

void MoveSet::validate() const {
  if (!(weight_norm_bound > 0.0) || !(inf_norm_bound > 0.0))
    fail(ErrorCode::InvalidArgument, "move set bounds must be positive");
  require_finite(w, "move set weights");
  if (w.size() == 0 || w.minCoeff() <= 0.0) fail(ErrorCode::InvalidArgument, "move set weights must be positive");
}

bool MoveSet::contains(const Vector& y, double slack) const {
  const double wn = std::sqrt((w.array() * y.array().square()).sum());
  return wn <= weight_norm_bound * (1.0 + slack) && y.cwiseAbs().maxCoeff() <= inf_norm_bound * (1.0 + slack);
}

double MoveSet::inner_radius() const {
  return std::min(inf_norm_bound, weight_norm_bound / std::sqrt(w.sum()));
}

double MoveSet::outer_radius() const {
  return std::min(inf_norm_bound, weight_norm_bound / std::sqrt(w.minCoeff()));
}

double potential(const Vector& x, double mu) {
  check_exponent(x, mu);
  return ((mu * x.array()).exp() + (-mu * x.array()).exp()).sum();
}

Vector potential_gradient(const Vector& x, double mu) {
  check_exponent(x, mu);
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double e = mu * std::abs(x[i]);
    const double mag = mu * (std::exp(e) - std::exp(-e));
    g[i] = x[i] > 0 ? mag : (x[i] < 0 ? -mag : 0.0);
  }
  return g;
}

Vector project_onto_ball_box(const Vector& a_in, const Vector& l_in) {
  const Index m = a_in.size();
  if (l_in.size() != m) fail(ErrorCode::DimensionMismatch, "box bounds differ in length from direction");
  require_finite(a_in, "direction");
  if (l_in.hasNaN() || (m > 0 && l_in.minCoeff() <= 0.0))
    fail(ErrorCode::InvalidArgument, "box bounds must be positive");
  const double top = m > 0 ? a_in.cwiseAbs().maxCoeff() : 0.0;
  if (!(top > 0.0)) fail(ErrorCode::ZeroVector, "direction is zero");
  Vector a = a_in / top;
  a /= a.norm();
  // A bound above 1 never binds inside the unit ball.
  const Vector l = l_in.cwiseMin(1.0);

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return std::abs(a[i]) / l[i] > std::abs(a[j]) / l[j];
  });
  Index active = 0;
  while (active < m && a[order[static_cast<std::size_t>(active)]] != 0.0) ++active;

  double sum_l = 0.0;
  double sum_a = 0.0;
  Index prefix = 0;
  for (; prefix < active; ++prefix) {
    const Index next = order[static_cast<std::size_t>(prefix)];
    const double rest_l = 1.0 - sum_l;
    const double rest_a = std::max(0.0, 1.0 - sum_a);
    if (rest_l * a[next] * a[next] <= l[next] * l[next] * rest_a) break;
    sum_l += l[next] * l[next];
    sum_a += a[next] * a[next];
  }

  Vector x = Vector::Zero(m);
  for (Index k = 0; k < prefix; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    x[i] = a[i] > 0 ? l[i] : -l[i];
  }
  const double rest_a = std::max(0.0, 1.0 - sum_a);
  if (prefix < active && rest_a > 0.0) {
    const double scale = std::sqrt(std::max(0.0, 1.0 - sum_l) / rest_a);
    for (Index k = prefix; k < active; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      x[i] = std::clamp(scale * a[i], -l[i], l[i]);
    }
  }
  return x;
}

Vector chasing_zero_move(const Vector& z, const MoveSet& moves, const PotentialConfig& cfg) {
  moves.validate();
  if (z.size() != moves.w.size()) fail(ErrorCode::DimensionMismatch, "observation and move set differ in length");
  check_exponent(z, cfg.mu);
  const Vector g = scaled_gradient(z, cfg.mu);
  if (!(g.cwiseAbs().maxCoeff() > 0.0)) return Vector::Zero(z.size());
  const Vector root = moves.w.cwiseSqrt();
  const double b = moves.weight_norm_bound;
  const Vector direction = g.array() / root.array();
  const Vector bounds = moves.inf_norm_bound * root / b;
  const Vector x = project_onto_ball_box(direction, bounds);
  return -(1.0 + cfg.eps_game) * b * (x.array() / root.array()).matrix();
}

ChasingTrajectory play_chasing_zero(const Vector& x0, const Adversary& adversary, int rounds,
                                    const PotentialConfig& cfg) {
  cfg.validate();
  ChasingTrajectory out;
  Vector x = x0;
  try {
    out.samples.push_back({0, potential(x, cfg.mu), x.cwiseAbs().maxCoeff()});
    for (int k = 1; k <= rounds; ++k) {
      ChasingRound round = adversary(k, x);
      round.moves.validate();
      if (round.u.size() != x.size() || round.noise.size() != x.size())
        fail(ErrorCode::DimensionMismatch, "adversary move has the wrong length");
      if (round.noise.cwiseAbs().maxCoeff() > cfg.R * (1.0 + 1e-12))
        fail(ErrorCode::InvalidArgument, "observation error exceeds R");
      out.tau = std::max(out.tau, round.moves.outer_radius() / round.moves.inner_radius());
      const Vector y = x + round.u;
      const Vector z = y + round.noise;
      x = y + chasing_zero_move(z, round.moves, cfg);
      out.samples.push_back({k, potential(x, cfg.mu), x.cwiseAbs().maxCoeff()});
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Overflow) throw;
    out.overflowed = true;
  }
  out.final_x = x;
  return out;
}

void write_trajectory_csv(std::ostream& out, const ChasingTrajectory& trajectory) {
  out << "round,phi,inf_norm\n";
  for (const auto& s : trajectory.samples) out << s.round << ',' << s.phi << ',' << s.inf_norm << '\n';
}

}  // namespace wpath
