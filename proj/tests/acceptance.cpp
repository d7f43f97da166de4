#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "wpath/lp_driver.hpp"

using namespace wpath;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix gaussian(Index m, Index n, RandomSource& rng) {
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

Vector uniform_vector(Index m, RandomSource& rng, double lo, double hi) {
  Vector v(m);
  for (Index i = 0; i < m; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

double weighted_norm(const Vector& v, const Vector& w) { return std::sqrt((w.array() * v.array().square()).sum()); }

/// Polytope through the origin with exact weights there and a cost whose centrality is delta at t = 1.
struct CenteredCase {
  Polytope p;
  WeightedIterate it;
  Vector c;
  WeightConfig wcfg;
};

CenteredCase centered_case(Index m, Index n, double delta, bool strict, RandomSource& rng) {
  CenteredCase out;
  out.p = Polytope{ConstraintMatrix(gaussian(m, n, rng)), -uniform_vector(m, rng, 0.5, 2.0)};
  out.wcfg = strict ? WeightConfig::strict_for_dimensions(m, n) : WeightConfig::for_dimensions(m, n);
  const Vector x = Vector::Zero(n);
  const Vector s = out.p.slacks(x);
  const Vector g = weight_function(out.p.A, DiagonalVector(s), out.wcfg).values();
  out.it = make_iterate(out.p, x, g, 1.0);
  const Vector c0 = out.p.A.entries().transpose() * (g.array() / s.array()).matrix();
  Vector d(n);
  for (Index j = 0; j < n; ++j) d[j] = rng.normal();
  const NormalFactorization f(out.p.A, (g.array() / s.array().square()).matrix());
  out.c = c0 + (delta / std::sqrt(f.inverse_form(d))) * d;
  return out;
}

// 1
Outcome lp_vs_enumeration() {
  constexpr int kInstances = 100;
  constexpr double kRelTol = 1e-6;
  constexpr int kMinMatches = 90;
  constexpr double kMaxSeconds = 300.0;
  const auto start = Clock::now();
  RandomSource rng(101);
  int objective_ok = 0;
  int unique = 0;
  int matches = 0;
  for (int k = 0; k < kInstances; ++k) {
    const Index n = 2 + k % 5;
    const Index m = std::min<Index>(30, 2 * n + 4 + static_cast<Index>(rng.uniform_int(0, 12)));
    const RawLP lp = oracle::random_bounded_lp(m, n, rng);
    const oracle::VertexSolution v = oracle::enumerate_vertices(lp.A, lp.b, lp.c);
    RandomSource solver_rng(static_cast<std::uint64_t>(k));
    const SolveReport rep = solve(lp, {}, solver_rng);
    if (rep.status == SolveStatus::Optimal &&
        std::abs(rep.objective - v.objective) <= kRelTol * std::max(1.0, std::abs(v.objective)))
      ++objective_ok;
    if (v.unique) {
      ++unique;
      if (rep.status == SolveStatus::Optimal && rep.active_set == v.tight) ++matches;
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = objective_ok == kInstances && matches >= std::min(kMinMatches, unique) && matches == unique &&
           unique >= kMinMatches && secs < kMaxSeconds;
  o.detail = std::to_string(objective_ok) + "/" + std::to_string(kInstances) + " objectives within 1e-6, active sets " +
             std::to_string(matches) + "/" + std::to_string(unique) + " unique optima, " + fmt("%.1f s", secs);
  return o;
}

// 2 and 3
struct WeightCase {
  ConstraintMatrix a;
  Vector s;
  WeightConfig cfg;
  Vector g;
};

std::vector<WeightCase> weight_cases() {
  std::vector<WeightCase> out;
  RandomSource rng(202);
  for (int k = 0; k < 50; ++k) {
    const Index n = 1 + k % 8;
    const Index m = std::max<Index>(n + 1, static_cast<Index>(rng.uniform_int(n + 1, 50)));
    WeightCase c{ConstraintMatrix(gaussian(m, n, rng)), uniform_vector(m, rng, 0.1, 10.0),
                 WeightConfig::for_dimensions(m, n), {}};
    c.g = weight_function(c.a, DiagonalVector(c.s), c.cfg, 1e-13).values();
    out.push_back(std::move(c));
  }
  return out;
}

Outcome weight_size(const std::vector<WeightCase>& cases) {
  constexpr double kTol = 1e-6;
  double worst_sum = 0.0;
  double worst_range = 0.0;
  for (const WeightCase& c : cases) {
    const double target = static_cast<double>(c.a.cols()) + c.cfg.beta * static_cast<double>(c.a.rows());
    worst_sum = std::max(worst_sum, std::abs(c.g.sum() - target) / target);
    worst_range = std::max(worst_range, std::max(c.cfg.beta - c.g.minCoeff(), c.g.maxCoeff() - 1.0 - c.cfg.beta));
  }
  return {worst_sum <= kTol && worst_range <= kTol,
          fmt("worst relative size error %.2e", worst_sum) + fmt(", worst range excess %.2e", worst_range)};
}

Outcome gamma_bound(const std::vector<WeightCase>& cases) {
  constexpr double kBound = 2.0 + 1e-6;
  double worst = 0.0;
  for (const WeightCase& c : cases)
    worst = std::max(worst, slack_sensitivity(c.a, DiagonalVector(c.s), DiagonalVector(c.g)));
  return {worst <= kBound, fmt("max gamma %.6f", worst)};
}

// 4
Outcome jacobian_fd() {
  constexpr double kTol = 1e-3;
  RandomSource rng(404);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 4;
    const Index m = static_cast<Index>(rng.uniform_int(n + 1, 20));
    const ConstraintMatrix a(gaussian(m, n, rng));
    const Vector s = uniform_vector(m, rng, 0.5, 2.0);
    const WeightConfig cfg = WeightConfig::for_dimensions(m, n);
    const Vector g = weight_function(a, DiagonalVector(s), cfg, 1e-14).values();
    const Matrix j = weight_jacobian(a, DiagonalVector(s), WeightVector(g), cfg);
    const Matrix fd = oracle::central_jacobian(
        [&](const Vector& v) { return exact_weight(a, DiagonalVector(v), WeightVector(g), cfg, 1e-14).values(); }, s,
        1e-5);
    worst = std::max(worst, (j - fd).norm() / fd.norm());
  }
  return {worst <= kTol, fmt("worst relative Frobenius error %.2e", worst)};
}

// 5
Outcome sketch_band() {
  constexpr Index kM = 40;
  constexpr Index kN = 4;
  constexpr double kEps = 0.2;
  constexpr int kSeeds = 200;
  RandomSource data(505);
  const ConstraintMatrix a(gaussian(kM, kN, data));
  const DiagonalVector x(uniform_vector(kM, data, 0.5, 2.0));
  const Vector exact = exact_leverage_scores(a, x);
  int violations = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomSource rng(static_cast<std::uint64_t>(seed));
    const Vector approx = approx_leverage_scores(a, x, kEps, rng);
    const bool bad = ((approx.array() < (1.0 - kEps) * exact.array()) ||
                      (approx.array() > (1.0 + kEps) * exact.array())).any();
    violations += bad ? 1 : 0;
  }
  const double p = 1.0 / static_cast<double>(kM);
  const double limit = p + 2.0 * std::sqrt(p * (1.0 - p) / kSeeds);
  const double rate = static_cast<double>(violations) / kSeeds;
  return {rate <= limit, fmt("violation rate %.3f", rate) + fmt(" against limit %.3f", limit)};
}

// 6
Outcome exact_contraction() {
  constexpr double kSlack = 1e-12;
  RandomSource rng(606);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 3;
    const Index m = 4 * n + static_cast<Index>(rng.uniform_int(0, 8));
    const WeightConfig probe = WeightConfig::strict_for_dimensions(m, n);
    const double delta = rng.uniform(0.1, 1.0) / (100.0 * probe.c_gamma * probe.c_r);
    const CenteredCase cc = centered_case(m, n, delta, true, rng);
    const double before = centrality(cc.p, cc.it, cc.c);
    const WeightedIterate next = centering_exact(cc.p, cc.it, cc.c, cc.wcfg);
    const double after = centrality(cc.p, next, cc.c);
    const double factor = 1.0 - 1.0 / (4.0 * cc.wcfg.c_r);
    ok = ok && after <= factor * before + kSlack;
    worst = std::max(worst, after / (factor * before));
  }
  return {ok, fmt("worst ratio to the contraction bound %.4f", worst)};
}

// 7
Outcome r_step_bounds() {
  constexpr double kSlack = 1e-10;
  RandomSource rng(707);
  int checks = 0;
  int failures = 0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 4;
    const Index m = 3 * n + static_cast<Index>(rng.uniform_int(1, 10));
    CenteredCase cc = centered_case(m, n, 0.0, false, rng);
    const double gamma = slack_sensitivity(cc.p.A, DiagonalVector(cc.it.s), DiagonalVector(cc.it.w));
    const double delta = rng.uniform(0.01, 0.125) / gamma;
    cc = centered_case(m, n, delta, false, rng);
    const double g = slack_sensitivity(cc.p.A, DiagonalVector(cc.it.s), DiagonalVector(cc.it.w));
    const double d = centrality(cc.p, cc.it, cc.c);
    if (d * g > 0.125) continue;
    for (double r : {0.0, 0.3, 1.0, 4.0, 2.0 * cc.wcfg.c_r}) {
      const WeightedIterate next = r_step(cc.p, cc.it, cc.c, r);
      const Vector ds = (next.s - cc.it.s).array() / cc.it.s.array();
      const Vector dw = (next.w - cc.it.w).array() / cc.it.w.array();
      checks += 3;
      if (weighted_norm(ds, cc.it.w) > d / (1.0 + r) + kSlack) ++failures;
      if (ds.cwiseAbs().maxCoeff() > d * g / (1.0 + r) + kSlack) ++failures;
      if (dw.cwiseAbs().maxCoeff() > r / (1.0 + r) * d * g + kSlack) ++failures;
    }
  }
  return {failures == 0 && checks > 0, std::to_string(checks - failures) + "/" + std::to_string(checks) + " bounds hold"};
}

// 8
Outcome game_bound() {
  constexpr Index kM = 16;
  constexpr double kR = 0.1;
  constexpr double kEps = 0.1;
  constexpr int kRounds = 1000;
  RandomSource rng(808);
  const PotentialConfig cfg = PotentialConfig::for_game(kR, kEps);
  auto adversary = [&](int, const Vector&) {
    ChasingRound round;
    round.moves.w = uniform_vector(kM, rng, 0.2, 2.0);
    round.moves.inf_norm_bound = kR;
    round.moves.weight_norm_bound = kR * std::sqrt(round.moves.w.sum()) * rng.uniform(0.3, 1.0);
    Vector y(kM);
    for (Index i = 0; i < kM; ++i) y[i] = rng.normal();
    const double scale = std::min(round.moves.weight_norm_bound / weighted_norm(y, round.moves.w),
                                  round.moves.inf_norm_bound / y.cwiseAbs().maxCoeff());
    round.u = y * scale * rng.uniform01();
    round.noise = uniform_vector(kM, rng, -kR, kR);
    return round;
  };
  const ChasingTrajectory tr = play_chasing_zero(Vector::Zero(kM), adversary, kRounds, cfg);
  const double phi_bound = 12.0 * kM * tr.tau / kEps;
  const double inf_bound = 12.0 * kR / kEps * std::log(phi_bound);
  double max_phi = 0.0;
  double max_inf = 0.0;
  for (const ChasingSample& s : tr.samples) {
    max_phi = std::max(max_phi, s.phi);
    max_inf = std::max(max_inf, s.inf_norm);
  }
  return {!tr.overflowed && max_phi <= phi_bound && max_inf <= inf_bound,
          fmt("max potential %.2f", max_phi) + fmt(" of %.2f", phi_bound) + fmt(", max |x| %.3f", max_inf) +
              fmt(" of %.3f", inf_bound)};
}

// 9
Outcome projection_oracles() {
  constexpr double kSubsetTol = 1e-8;
  constexpr double kGradientTol = 1e-6;
  RandomSource rng(909);
  double worst_subset = 0.0;
  double worst_gradient = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Index m = 1 + k % 12;
    Vector a(m);
    for (Index i = 0; i < m; ++i) a[i] = rng.normal();
    const Vector l = uniform_vector(m, rng, 0.02, 1.2);
    const Vector x = project_onto_ball_box(a, l);
    worst_subset = std::max(worst_subset, (x - oracle::ball_box_subsets(a, l)).cwiseAbs().maxCoeff());
    worst_gradient = std::max(worst_gradient, (x - oracle::ball_box_projected_gradient(a, l)).cwiseAbs().maxCoeff());
  }
  return {worst_subset <= kSubsetTol && worst_gradient <= kGradientTol,
          fmt("max deviation %.2e from subset search", worst_subset) +
              fmt(", %.2e from projected gradient", worst_gradient)};
}

long solve_iterations(const RawLP& lp, std::uint64_t seed) {
  RandomSource rng(seed);
  const SolveReport rep = solve(lp, {}, rng);
  return rep.status == SolveStatus::Optimal ? rep.iterations : -1;
}

// 10
Outcome iteration_scaling() {
  constexpr double kLow = 0.3;
  constexpr double kHigh = 0.7;
  constexpr double kHardLow = 0.1;
  constexpr double kHardHigh = 1.0;
  RandomSource rng(1010);
  std::vector<double> xs;
  std::vector<double> ys;
  std::string means;
  bool solved = true;
  for (Index n : {2, 4, 8, 16}) {
    double sum = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
      const RawLP lp = oracle::random_bounded_lp(8 * n, n, rng);
      const long it = solve_iterations(lp, static_cast<std::uint64_t>(seed));
      if (it <= 0) {
        solved = false;
        continue;
      }
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(static_cast<double>(it)));
      sum += static_cast<double>(it);
    }
    means += " n=" + std::to_string(n) + ":" + fmt("%.0f", sum / 10.0);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const bool in_target = slope >= kLow && slope <= kHigh;
  std::string detail = fmt("slope %.3f", slope) + (in_target ? " inside [0.3, 0.7]" : " outside [0.3, 0.7]") +
                       ", mean iterations" + means;
  if (!solved) detail += ", some instances unsolved";
  return {solved && slope >= kHardLow && slope <= kHardHigh, detail};
}

// 11
Outcome duplication() {
  constexpr double kRatio = 2.0;
  constexpr int kCopies = 10;
  RandomSource rng(1111);
  double worst = 1.0;
  bool solved = true;
  for (int k = 0; k < 10; ++k) {
    const Index n = 2 + k % 3;
    const RawLP lp = oracle::random_bounded_lp(3 * n + 2, n, rng);
    RawLP dup = lp;
    dup.A = lp.A.replicate(kCopies, 1);
    dup.b = lp.b.replicate(kCopies, 1);
    const long base = solve_iterations(lp, static_cast<std::uint64_t>(k));
    const long many = solve_iterations(dup, static_cast<std::uint64_t>(k));
    if (base <= 0 || many <= 0) {
      solved = false;
      continue;
    }
    const double ratio = static_cast<double>(many) / static_cast<double>(base);
    worst = std::max(worst, std::max(ratio, 1.0 / ratio));
  }
  return {solved && worst <= kRatio, fmt("worst iteration ratio %.3f", worst) + (solved ? "" : ", some unsolved")};
}

// 12
Outcome projection_identities() {
  constexpr double kTol = 1e-10;
  RandomSource rng(1212);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Index n = 1 + k % 5;
    const Index m = static_cast<Index>(rng.uniform_int(n + 1, 20));
    const ConstraintMatrix a(gaussian(m, n, rng));
    const Vector d = uniform_vector(m, rng, 0.01, 100.0);
    const NormalFactorization f(a, d);
    const Matrix root = f.whitened_rows();
    const Matrix p = root.transpose() * root;
    const Vector sigma = f.leverage_scores();
    worst = std::max(worst, (sigma - p.diagonal()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (p.rowwise().squaredNorm() - sigma).cwiseAbs().maxCoeff());
    worst = std::max(worst, -sigma.minCoeff());
    worst = std::max(worst, sigma.maxCoeff() - 1.0);
    worst = std::max(worst, std::abs(sigma.sum() - static_cast<double>(n)));
    const Matrix bound = sigma * sigma.transpose();
    worst = std::max(worst, (p.array().square() - bound.array()).maxCoeff());
  }
  return {worst <= kTol, fmt("largest identity residual %.2e", worst)};
}

// 13
RawLP infeasible_instance(RandomSource& rng) {
  RawLP lp = oracle::random_bounded_lp(6, 2, rng, 3);
  Vector row(2);
  do {
    row << static_cast<double>(rng.uniform_int(-3, 3)), static_cast<double>(rng.uniform_int(-3, 3));
  } while ((row.array() == 0.0).all());
  const double k = static_cast<double>(rng.uniform_int(-3, 3));
  lp.A.conservativeResize(8, 2);
  lp.b.conservativeResize(8);
  lp.A.row(6) = row.transpose();
  lp.b[6] = k;
  lp.A.row(7) = -row.transpose();
  lp.b[7] = -(k - static_cast<double>(rng.uniform_int(1, 3)));
  return lp;
}

RawLP unbounded_instance(RandomSource& rng) {
  const Index m = 5;
  RawLP lp;
  lp.integrality = true;
  lp.A = Matrix::Zero(m, 2);
  lp.b = Vector::Zero(m);
  lp.c = Vector::Zero(2);
  Vector d(2);
  do {
    d << static_cast<double>(rng.uniform_int(-1, 1)), static_cast<double>(rng.uniform_int(-1, 1));
  } while ((d.array() == 0.0).all());
  Vector center(2);
  center << static_cast<double>(rng.uniform_int(-2, 2)), static_cast<double>(rng.uniform_int(-2, 2));
  for (Index i = 0; i < m; ++i) {
    Vector row(2);
    do {
      row << static_cast<double>(rng.uniform_int(-3, 3)), static_cast<double>(rng.uniform_int(-3, 3));
    } while ((row.array() == 0.0).all() || row.dot(d) < 0.0);
    lp.A.row(i) = row.transpose();
    lp.b[i] = row.dot(center) - static_cast<double>(rng.uniform_int(1, 4));
  }
  do {
    lp.c << static_cast<double>(rng.uniform_int(-3, 3)), static_cast<double>(rng.uniform_int(-3, 3));
  } while (lp.c.dot(d) >= 0.0);
  return lp;
}

Outcome trichotomy() {
  constexpr int kEach = 30;
  RandomSource rng(1313);
  SolveOptions opts;
  opts.mode = SolveMode::Integral;
  int correct[3] = {0, 0, 0};
  bool integral = true;
  const auto start = Clock::now();
  for (int k = 0; k < kEach; ++k) {
    const RawLP cases[3] = {oracle::random_bounded_lp(6, 2, rng, 3), infeasible_instance(rng),
                            unbounded_instance(rng)};
    const SolveStatus expected[3] = {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded};
    for (int kind = 0; kind < 3; ++kind) {
      RandomSource solver_rng(static_cast<std::uint64_t>(100 * k + kind));
      const SolveReport rep = solve(cases[kind], opts, solver_rng);
      integral = integral && rep.mode == SolveMode::Integral;
      bool ok = rep.status == expected[kind];
      if (ok && kind == 0) {
        const oracle::VertexSolution v = oracle::enumerate_vertices(cases[kind].A, cases[kind].b, cases[kind].c);
        ok = std::abs(rep.objective - v.objective) <= 1e-9 * std::max(1.0, std::abs(v.objective));
      }
      correct[kind] += ok ? 1 : 0;
    }
  }
  return {integral && correct[0] == kEach && correct[1] == kEach && correct[2] == kEach,
          std::to_string(correct[0]) + "/30 optimal, " + std::to_string(correct[1]) + "/30 infeasible, " +
              std::to_string(correct[2]) + "/30 unbounded, " + fmt("%.1f s", seconds_since(start))};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  report(1, "lp-vs-enumeration", lp_vs_enumeration);
  const std::vector<WeightCase> cases = weight_cases();
  report(2, "weight-size-identity", [&] { return weight_size(cases); });
  report(3, "slack-sensitivity-bound", [&] { return gamma_bound(cases); });
  report(4, "weight-jacobian-vs-fd", jacobian_fd);
  report(5, "sketch-band-rate", sketch_band);
  report(6, "exact-centering-contraction", exact_contraction);
  report(7, "r-step-stability", r_step_bounds);
  report(8, "chasing-zero-bound", game_bound);
  report(9, "ball-box-projection", projection_oracles);
  report(10, "iteration-scaling", iteration_scaling);
  report(11, "duplication-robustness", duplication);
  report(12, "projection-identities", projection_identities);
  report(13, "status-trichotomy", trichotomy);
  std::printf("%d of 13 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
