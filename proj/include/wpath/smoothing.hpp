#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "wpath/core_linalg.hpp"

namespace wpath {

struct PotentialConfig {
  double mu = 1.0;
  double R = 1.0;
  double eps_game = 0.1;

  /// mu = eps / (12 R).
  static PotentialConfig for_game(double R, double eps_game);
  void validate() const;
};

/// U = { y : ||y||_W <= b and ||y||_inf <= c }.
struct MoveSet {
  double weight_norm_bound = 1.0;
  double inf_norm_bound = 1.0;
  Vector w;

  void validate() const;
  bool contains(const Vector& y, double slack = 1e-12) const;
  /// Radius of the largest l_inf ball inside U.
  double inner_radius() const;
  /// Radius of the smallest l_inf ball containing U.
  double outer_radius() const;
};

double potential(const Vector& x, double mu);
Vector potential_gradient(const Vector& x, double mu);

/// argmax of <a, x> over ||x||_2 <= 1 and |x_i| <= l_i.
Vector project_onto_ball_box(const Vector& a, const Vector& l);

/// (1 + eps) argmin over U of <grad Phi_mu(z), u>.
Vector chasing_zero_move(const Vector& z, const MoveSet& moves, const PotentialConfig& cfg);

struct ChasingRound {
  MoveSet moves;
  Vector u;
  /// Observation error added to y = x + u; must satisfy ||noise||_inf <= R.
  Vector noise;
};

using Adversary = std::function<ChasingRound(int round, const Vector& x)>;

struct ChasingSample {
  int round = 0;
  double phi = 0.0;
  double inf_norm = 0.0;
};

struct ChasingTrajectory {
  std::vector<ChasingSample> samples;
  Vector final_x;
  /// Largest R_k / r_k seen across the rounds.
  double tau = 0.0;
  bool overflowed = false;
};

ChasingTrajectory play_chasing_zero(const Vector& x0, const Adversary& adversary, int rounds,
                                    const PotentialConfig& cfg);

void write_trajectory_csv(std::ostream& out, const ChasingTrajectory& trajectory);

}  // namespace wpath
