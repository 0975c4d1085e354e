// Acceptance suite: every shipped guarantee checked end to end, one
// PASS/FAIL line each. Expects the path of the sim binary as argv[1] for the
// command-line checks.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "laneless/dynamics.hpp"
#include "laneless/equilibrium.hpp"
#include "laneless/io.hpp"
#include "laneless/presets.hpp"
#include "laneless/scenario.hpp"
#include "laneless/stability.hpp"

using namespace laneless;
namespace fs = std::filesystem;

namespace {

std::string g_sim_binary;
fs::path g_work;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream oss;
  oss.precision(3);
  oss << v;
  return oss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_sim_binary + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

// The sixteen-car convoy placed exactly on its equilibrium slots, with an
// optional deterministic perturbation of the regular cars.
Scenario equilibrium_16(double scale, std::mt19937_64& rng) {
  Scenario sc = presets::steady_flow_16();
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Car& c : sc.initial.cars) {
    if (c.role == CarRole::PhantomLeader) continue;
    const int level = (c.id - 1) / 4 + 1;
    const int rank = (c.id - 1) % 4;
    c.x = -30.0 * rank;
    c.y = -50.0 * level;
    c.vx = 0.0;
    c.vy = sc.leader_v0;
    if (c.role == CarRole::Regular && scale > 0.0) {
      c.x += scale * uni(rng);
      c.y += scale * uni(rng);
      c.vy += 0.1 * scale * uni(rng);
    }
  }
  return sc;
}

LaplacianBundle forward_bundle(const Scenario& sc) {
  DerivedGraphs d = derive_influence_graphs(sc.initial, sc.geom);
  const InfluenceGraph gy = redistribute_weights(d.y, sc.gains.W);
  const AxisPartition py = axis_partition(sc.initial, Axis::Y, d.levels);
  return laplacian(gy, gy.nodes, py);
}

// ---------------------------------------------------------------------------
// Criterion 1: steady flow reaches the prescribed spacing and speed.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  const Scenario sc = presets::steady_flow_16();
  const auto t0 = std::chrono::steady_clock::now();
  const Trace trace = run(sc, {.decimation = 50});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const RunSummary s = summarize(trace, sc);

  Outcome out;
  out.pass = s.max_abs_vy_dev < 1e-4 &&
             std::abs(s.level_gap_min - 50.0) < 1e-3 &&
             std::abs(s.level_gap_max - 50.0) < 1e-3 &&
             s.same_level_y_spread < 1e-3 && seconds < 5.0;
  out.detail = "vy dev " + fmt(s.max_abs_vy_dev) + ", level gaps [" +
               fmt(s.level_gap_min) + ", " + fmt(s.level_gap_max) +
               "], spread " + fmt(s.same_level_y_spread) + ", " +
               fmt(seconds) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: lateral spacing from C = L x_f, and the local offset route
// agrees entrywise with the template route.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  const Scenario sc = presets::steady_flow_16();
  const Trace trace = run(sc, {.decimation = 50});
  const RunSummary s = summarize(trace, sc);
  const bool lateral_ok = std::abs(s.lateral_gap_min - 30.0) < 1e-3 &&
                          std::abs(s.lateral_gap_max - 30.0) < 1e-3;

  std::mt19937_64 rng(20260810);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  double worst = 0.0;
  int formations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Scenario rf;
    rf.leader_v0 = 10.0;
    rf.settings.t_end = 1.0;
    rf.initial.cars.push_back(
        {0, CarRole::PhantomLeader, -45.0 + 5.0 * jitter(rng), 0.0, 0.0, 10.0});
    const int levels = 1 + static_cast<int>(rng() % 4);
    CarId id = 1;
    for (int level = 1; level <= levels; ++level) {
      const int regulars = 1 + static_cast<int>(rng() % 2);
      rf.initial.cars.push_back({id++, CarRole::Boundary, 0.0,
                                 -50.0 * level + 4.0 * jitter(rng), 0.0, 10.0});
      for (int r = 1; r <= regulars; ++r)
        rf.initial.cars.push_back({id++, CarRole::Regular,
                                   -30.0 * r + 3.0 * jitter(rng),
                                   -50.0 * level + 4.0 * jitter(rng), 0.0,
                                   10.0});
    }
    try {
      rf = canonicalize_scenario(rf);
    } catch (const SimError&) {
      continue;
    }
    DerivedGraphs d = derive_influence_graphs(rf.initial, rf.geom);
    if (!d.x_present) continue;
    const InfluenceGraph gx = redistribute_weights(d.x, 1.0);
    const AxisPartition px = axis_partition(rf.initial, Axis::X, d.levels);
    const LaplacianBundle bx = laplacian(gx, gx.nodes, px);
    ++formations;

    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    Eigen::VectorXd xf(bx.full.rows());
    for (Eigen::Index i = 0; i < xf.size(); ++i) xf(i) = uni(rng);
    const Eigen::VectorXd c = compute_C_from_template(bx, xf);
    const double g_x = 30.0;
    for (Eigen::Index i = 0; i < xf.size(); ++i) {
      const CarId car = bx.ordering[static_cast<size_t>(i)];
      std::vector<double> nbr, w;
      for (const Edge& e : gx.in_edges(car)) {
        nbr.push_back(g_x * xf(bx.index_in_ordering(e.from)));
        w.push_back(e.weight);
      }
      if (w.empty()) continue;
      const double z = compute_z_local(g_x * xf(i), nbr, w, g_x);
      worst = std::max(worst, std::abs(z - c(i)));
    }
  }

  // Residual of the lateral equilibrium relation at the converged state:
  // every row of L x - g_x C vanishes when C comes from the slot template.
  double residual = 0.0;
  {
    const TraceSample& last = trace.samples.back();
    DerivedGraphs d = derive_influence_graphs(last.snapshot, sc.geom);
    const InfluenceGraph gx = redistribute_weights(d.x, sc.gains.W);
    const LaplacianBundle bx = laplacian(gx, gx.nodes);
    Eigen::VectorXd x(bx.full.rows()), xf(bx.full.rows());
    std::map<int, double> anchor;
    for (const Car& c : last.snapshot.cars)
      if (c.role == CarRole::Boundary) anchor[last.levels.at(c.id)] = c.x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Car& c = last.snapshot.by_id(bx.ordering[static_cast<size_t>(i)]);
      x(i) = c.x;
      const int rank = (c.id - 1) % 4;
      xf(i) = anchor.at(last.levels.at(c.id)) / sc.gains.g_x - rank;
    }
    const Eigen::VectorXd c_vec = compute_C_from_template(bx, xf);
    residual =
        (bx.full * x - sc.gains.g_x * c_vec).cwiseAbs().maxCoeff();
  }

  Outcome out;
  out.pass = lateral_ok && worst < 1e-10 && formations >= 45 &&
             residual < 1e-6;
  out.detail = "lateral gaps [" + fmt(s.lateral_gap_min) + ", " +
               fmt(s.lateral_gap_max) + "], z vs L*x_f worst " + fmt(worst) +
               " over " + std::to_string(formations) +
               " formations, equilibrium residual " + fmt(residual);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: the two lateral templates produce 30- and 15-unit spacing at
// the recorded snapshot times.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  const Scenario sc = presets::formation_change_16();
  const Trace trace = run(sc, {.decimation = 100});

  auto gaps_at = [&](double t, int level) {
    const TraceSample* best = nullptr;
    for (const TraceSample& s : trace.samples)
      if (best == nullptr || std::abs(s.t - t) < std::abs(best->t - t))
        best = &s;
    std::vector<double> xs;
    for (const Car& c : best->snapshot.cars)
      if (c.role != CarRole::PhantomLeader && best->levels.at(c.id) == level)
        xs.push_back(c.x);
    std::sort(xs.begin(), xs.end(), std::greater<>());
    std::vector<double> gaps;
    for (size_t i = 0; i + 1 < xs.size(); ++i)
      gaps.push_back(xs[i] - xs[i + 1]);
    return gaps;
  };
  auto check = [&](double t, int level, double expect, double& worst) {
    for (double g : gaps_at(t, level))
      worst = std::max(worst, std::abs(g - expect));
  };

  double worst = 0.0;
  // Before the swap (snapshot at 2000): level 3 compressed.
  for (int level : {1, 2, 4}) check(2000.0, level, 30.0, worst);
  check(2000.0, 3, 15.0, worst);
  // After the swap (snapshot at 5000): levels 2 and 4 compressed.
  for (int level : {1, 3}) check(5000.0, level, 30.0, worst);
  for (int level : {2, 4}) check(5000.0, level, 15.0, worst);

  Outcome out;
  out.pass = worst < 0.5;
  out.detail = "worst slot deviation " + fmt(worst) + " (tolerance 0.5)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 4: dense spectra match the closed-form mode roots on random
// triangular reduced Laplacians.
// ---------------------------------------------------------------------------
Outcome criterion_4() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_real_distribution<double> ub(0.2, 1.0), uk(0.0005, 0.005);
  double worst = 0.0;
  bool all_damped = true;

  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 12);
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
      l(i, i) = 0.6 + 2.2 * (i + 0.3 * uni(rng)) / static_cast<double>(m);
    for (int i = 1; i < m; ++i) {
      double budget = l(i, i);
      for (int j = 0; j < i; ++j)
        if (uni(rng) < 0.5) {
          const double w = std::min(budget, 0.4 * uni(rng));
          l(i, j) = -w;
          budget -= w;
        }
    }
    LaplacianBundle b;
    b.reduced = l;
    b.full = l;
    for (int i = 0; i < m; ++i) {
      b.ordering.push_back(i + 1);
      b.states.push_back(i + 1);
    }
    b.inputs.push_back(0);
    b.leader_cols = Eigen::MatrixXd::Zero(m, 1);

    const double bg = ub(rng), kg = uk(rng);
    const auto eigs = gamma_spectrum(b, bg, kg);
    std::vector<std::complex<double>> expected;
    for (int i = 0; i < m; ++i) {
      const auto [r1, r2] = mode_roots(l(i, i), bg, kg);
      expected.push_back(r1);
      expected.push_back(r2);
    }
    std::sort(expected.begin(), expected.end(),
              [](const std::complex<double>& a, const std::complex<double>& c) {
                if (a.real() != c.real()) return a.real() < c.real();
                return a.imag() < c.imag();
              });
    for (size_t i = 0; i < eigs.size(); ++i) {
      worst = std::max(worst, std::abs(eigs[i] - expected[i]));
      all_damped = all_damped && eigs[i].real() < 0.0;
    }
  }

  Outcome out;
  out.pass = worst < 1e-8 && all_damped;
  out.detail = "worst matched-pair error " + fmt(worst) +
               (all_damped ? ", all modes damped" : ", UNDAMPED MODE FOUND");
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 5: a common quadratic function certifies randomly switched runs.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  // Mode set: the sixteen-car convoy with lateral nudges that flip viewing
  // cone membership, giving distinct influence graphs over one state set.
  std::mt19937_64 rng(5555);
  std::vector<LaplacianBundle> modes;
  {
    const Scenario base = equilibrium_16(0.0, rng);
    auto add_mode = [&](const std::function<void(FormationSnapshot&)>& tweak) {
      Scenario sc = base;
      tweak(sc.initial);
      modes.push_back(forward_bundle(sc));
    };
    add_mode([](FormationSnapshot&) {});
    add_mode([](FormationSnapshot& s) { s.by_id(8).x = -85.0; });
    add_mode([](FormationSnapshot& s) { s.by_id(14).x = -80.0; });
    add_mode([](FormationSnapshot& s) {
      s.by_id(8).x = -85.0;
      s.by_id(16).x = -85.0;
    });
  }

  const double b = 0.4, k = 0.001;
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const LaplacianBundle& m : modes) {
    const auto cert = lyapunov_certificate(m, b, k);
    if (!cert.has_value())
      return {false, "a mode lacks the common-function certificate"};
    lambda_min = std::min(lambda_min, cert->lambda_min_sym);
  }
  const double q = 2.0 / (k * lambda_min);

  std::vector<Eigen::MatrixXd> gammas;
  for (const LaplacianBundle& m : modes)
    gammas.push_back(closed_loop_matrix(m.reduced, b, k));
  const Eigen::Index dim = gammas[0].rows();
  const Eigen::Index half = dim / 2;

  auto v_of = [&](const Eigen::VectorXd& s) {
    return s.head(half).squaredNorm() / q + s.tail(half).squaredNorm();
  };
  auto rk4 = [&](const Eigen::MatrixXd& g, Eigen::VectorXd& s, double dt) {
    const Eigen::VectorXd k1 = g * s;
    const Eigen::VectorXd k2 = g * (s + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = g * (s + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = g * (s + dt * k3);
    s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  // Small-perturbation run: the per-step growth bound of the semidefinite
  // certificate stays below 1e-8 at this amplitude.
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd state(dim);
  for (Eigen::Index i = 0; i < half; ++i) state(i) = 0.02 * uni(rng);
  for (Eigen::Index i = half; i < dim; ++i) state(i) = 0.002 * uni(rng);

  const double dt = 0.1;
  int switches = 0;
  size_t mode = 0;
  double next_switch = 5.0 + 10.0 * std::abs(uni(rng));
  double worst_dv = -std::numeric_limits<double>::infinity();
  double t = 0.0;
  while (t < 400.0 || switches < 20) {
    if (t >= next_switch) {
      mode = rng() % modes.size();
      next_switch = t + 5.0 + 10.0 * std::abs(uni(rng));
      ++switches;
    }
    const double v_before = v_of(state);
    rk4(gammas[mode], state, dt);
    worst_dv = std::max(worst_dv, v_of(state) - v_before);
    t += dt;
  }
  for (; t < 6000.0; t += dt) rk4(gammas[mode], state, dt);
  const double final_norm = state.norm();

  // Large-offset switched run: convergence only.
  Eigen::VectorXd big(dim);
  for (Eigen::Index i = 0; i < half; ++i) big(i) = 5.0 * uni(rng);
  for (Eigen::Index i = half; i < dim; ++i) big(i) = 0.5 * uni(rng);
  int big_switches = 0;
  double ts = 0.0;
  next_switch = 5.0;
  for (; ts < 7000.0; ts += dt) {
    if (ts >= next_switch && big_switches < 40) {
      mode = rng() % modes.size();
      next_switch = ts + 5.0 + 10.0 * std::abs(uni(rng));
      ++big_switches;
    }
    rk4(gammas[mode], big, dt);
  }

  Outcome out;
  out.pass = switches >= 20 && worst_dv <= 1e-8 && final_norm < 1e-6 &&
             big_switches >= 20 && big.norm() < 1e-5;
  out.detail = std::to_string(switches) + "+" + std::to_string(big_switches) +
               " switches, worst step dV " + fmt(worst_dv) +
               ", final norms " + fmt(final_norm) + " / " + fmt(big.norm());
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 6: admissible position impulses keep the certified function
// falling and the state re-converges; mirrored jumps are flagged.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  std::mt19937_64 rng(66666);
  const Scenario sc = equilibrium_16(0.0, rng);
  const LaplacianBundle bundle = forward_bundle(sc);
  const double b = 0.4, k = 0.001;
  const auto cert = lyapunov_certificate(bundle, b, k);
  if (!cert.has_value()) return {false, "certificate inapplicable"};
  const double q = cert->q;

  const Eigen::MatrixXd gamma = closed_loop_matrix(bundle.reduced, b, k);
  const Eigen::Index half = bundle.reduced.rows();
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> contraction(0.0, 0.9);

  int advisory_failed = 0;
  double worst_dv = -std::numeric_limits<double>::infinity();
  double worst_final = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    StateVector state;
    state.axis = Axis::Y;
    state.data.resize(2 * half);
    for (Eigen::Index i = 0; i < half; ++i) state.data(i) = 0.02 * uni(rng);
    for (Eigen::Index i = 0; i < half; ++i)
      state.data(half + i) = 0.002 * uni(rng);

    Eigen::VectorXd direction(half);
    for (Eigen::Index i = 0; i < half; ++i) direction(i) = uni(rng);
    direction.normalize();
    const double r = state.positions().norm();
    const double c = contraction(rng);

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(2 * half);
    delta.head(half) = c * r * direction - state.positions();
    Eigen::VectorXd mirrored = Eigen::VectorXd::Zero(2 * half);
    mirrored.head(half) = (2.0 - c) * r * direction - state.positions();

    if (!impulse_admissible(state, delta))
      return {false, "constructed admissible impulse rejected"};
    if (impulse_admissible(state, mirrored))
      return {false, "mirrored inadmissible impulse accepted"};
    ++advisory_failed;  // the mirrored jump is logged as advisory-failed

    StateVector jumped = apply_impulse(state, delta);
    const double dt = 0.2;
    auto v_of = [&](const Eigen::VectorXd& s) {
      return s.head(half).squaredNorm() / q + s.tail(half).squaredNorm();
    };
    double v_prev = v_of(jumped.data);
    for (double t = 0.0; t < 4000.0; t += dt) {
      const Eigen::VectorXd k1 = gamma * jumped.data;
      const Eigen::VectorXd k2 = gamma * (jumped.data + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = gamma * (jumped.data + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = gamma * (jumped.data + dt * k3);
      jumped.data += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double v = v_of(jumped.data);
      worst_dv = std::max(worst_dv, v - v_prev);
      v_prev = v;
    }
    worst_final = std::max(worst_final, jumped.data.norm());
  }

  Outcome out;
  out.pass = worst_dv <= 1e-8 && worst_final < 1e-5 && advisory_failed == 50;
  out.detail = "worst step dV " + fmt(worst_dv) + ", worst final norm " +
               fmt(worst_final) + ", " + std::to_string(advisory_failed) +
               "/50 mirrored jumps advisory-failed";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: obstacle pass-through bends trajectories, dips speeds, and
// everything recovers once the obstacle leaves the cones.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  const Scenario sc = presets::obstacle_16();
  const Trace trace = run(sc, {.decimation = 10});

  const double v0 = sc.leader_v0;
  double min_vy_affected = v0;
  std::map<CarId, double> x0, max_dev;
  for (const Car& c : trace.samples.front().snapshot.cars) x0[c.id] = c.x;
  for (const TraceSample& s : trace.samples)
    for (const Car& c : s.snapshot.cars) {
      if (c.role != CarRole::Regular) continue;
      if (c.id >= 9)  // levels 3 and 4 meet the obstacle
        min_vy_affected = std::min(min_vy_affected, c.vy);
      max_dev[c.id] = std::max(max_dev[c.id], std::abs(c.x - x0[c.id]));
    }
  const RunSummary s = summarize(trace, sc);

  bool obstacle_logged = false;
  for (const SwitchRecord& rec : trace.switch_log)
    for (const Edge& e : rec.removed)
      if (e.from > 16) obstacle_logged = true;  // wiring retracted

  Outcome out;
  out.pass = min_vy_affected < v0 - 0.05 && max_dev[12] > 0.3 &&
             max_dev[11] > 0.1 && s.max_abs_vy_dev < 1e-3 && obstacle_logged;
  out.detail = "min affected vy " + fmt(min_vy_affected) + ", car-12 x dev " +
               fmt(max_dev[12]) + ", car-11 x dev " + fmt(max_dev[11]) +
               ", final vy dev " + fmt(s.max_abs_vy_dev);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: the lane change completes with the spanning tree intact and
// the formation re-spaced.
// ---------------------------------------------------------------------------
Outcome criterion_8() {
  const Scenario sc = presets::lane_change_16();
  Outcome out;
  try {
    const Trace trace = run(sc, {.decimation = 20});
    const RunSummary s = summarize(trace, sc);
    out.pass = s.max_abs_vy_dev < 1e-4 &&
               std::abs(s.level_gap_min - 50.0) < 1e-3 &&
               std::abs(s.level_gap_max - 50.0) < 1e-3 &&
               s.same_level_y_spread < 1e-3 &&
               std::abs(s.lateral_gap_min - 30.0) < 1e-3 &&
               std::abs(s.lateral_gap_max - 30.0) < 1e-3;
    out.detail = "tree intact, vy dev " + fmt(s.max_abs_vy_dev) +
                 ", level gaps [" + fmt(s.level_gap_min) + ", " +
                 fmt(s.level_gap_max) + "], lateral gaps [" +
                 fmt(s.lateral_gap_min) + ", " + fmt(s.lateral_gap_max) + "]";
  } catch (const SimError& err) {
    out.pass = false;
    out.detail = std::string("run failed: ") + err.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 9: bit-identical reruns and fourth-order step refinement,
// exercised through the command line.
// ---------------------------------------------------------------------------
Outcome criterion_9() {
  const fs::path scen = g_work / "steady.json";
  write_scenario(scen, presets::steady_flow_16());
  const fs::path d1 = g_work / "run1", d2 = g_work / "run2";

  if (run_cli("run " + scen.string() + " --t-end 1500 --out " + d1.string()) !=
      0)
    return {false, "first run failed"};
  if (run_cli("run " + scen.string() + " --t-end 1500 --out " + d2.string()) !=
      0)
    return {false, "second run failed"};
  const bool identical = slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv") &&
                         !slurp(d1 / "trace.csv").empty();

  const fs::path chain = g_work / "chain.json";
  write_scenario(chain, presets::chain_3());
  const fs::path c1 = g_work / "chain1", c2 = g_work / "chain2";
  if (run_cli("run " + chain.string() + " --t-end 300 --dt 0.1 --out " +
              c1.string()) != 0)
    return {false, "chain run failed"};
  if (run_cli("run " + chain.string() + " --t-end 300 --dt 0.05 --out " +
              c2.string()) != 0)
    return {false, "refined chain run failed"};

  auto final_state = [](const fs::path& dir) {
    const Trace t = read_trace_csv(dir / "trace.csv");
    return t.samples.back();
  };
  const TraceSample a = final_state(c1), b = final_state(c2);
  double diff = 0.0;
  for (const Car& ca : a.snapshot.cars) {
    const Car& cb = b.snapshot.by_id(ca.id);
    diff = std::max({diff, std::abs(ca.y - cb.y), std::abs(ca.vy - cb.vy)});
  }

  Outcome out;
  out.pass = identical && diff < 1e-6;
  out.detail =
      std::string(identical ? "bit-identical traces" : "TRACES DIFFER") +
      ", dt-refinement final-state gap " + fmt(diff);
  return out;
}

// ---------------------------------------------------------------------------
// Supplementary: command-line contract (exit codes, atomic outputs,
// analyze and plotdata surfaces).
// ---------------------------------------------------------------------------
Outcome cli_contract() {
  std::vector<std::string> problems;

  // Malformed file: exit 1 and no outputs.
  const fs::path bad = g_work / "bad.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  const fs::path bad_out = g_work / "bad_out";
  if (run_cli("run " + bad.string() + " --out " + bad_out.string()) != 1)
    problems.push_back("malformed scenario should exit 1");
  if (fs::exists(bad_out / "trace.csv"))
    problems.push_back("no outputs expected on failure");

  // Spanning tree loss: exit 2.
  Scenario overshoot;
  overshoot.name = "overshoot";
  overshoot.leader_v0 = 0.0;
  overshoot.initial.cars.push_back(
      {0, CarRole::PhantomLeader, 0.0, 0.0, 0.0, 0.0});
  overshoot.initial.cars.push_back(
      {1, CarRole::Regular, 0.0, -5.0, 0.0, 40.0});
  overshoot.settings.t_end = 400.0;
  const fs::path tree = g_work / "tree.json";
  write_scenario(tree, overshoot);
  if (run_cli("run " + tree.string() + " --out " +
              (g_work / "t_out").string()) != 2)
    problems.push_back("spanning tree loss should exit 2");
  if (fs::exists(g_work / "t_out" / "trace.csv"))
    problems.push_back("no outputs expected after tree loss");

  // Non-finite blow-up: exit 3.
  Scenario stiff = presets::chain_3();
  stiff.gains.k = 1e3;
  stiff.initial.by_id(2).y = -1e307;
  stiff.settings.t_end = 1.0;
  const fs::path stiff_path = g_work / "stiff.json";
  write_scenario(stiff_path, stiff);
  if (run_cli("run " + stiff_path.string() + " --out " +
              (g_work / "s_out").string()) != 3)
    problems.push_back("non-finite state should exit 3");

  // Analyze writes a stability report with several modes.
  const fs::path obstacle = g_work / "obstacle.json";
  write_scenario(obstacle, presets::obstacle_16());
  const fs::path an_out = g_work / "an_out";
  if (run_cli("analyze " + obstacle.string() + " --out " + an_out.string()) !=
      0)
    problems.push_back("analyze failed");
  const std::string stability = slurp(an_out / "stability.json");
  if (stability.find("\"hurwitz\": true") == std::string::npos)
    problems.push_back("analyze should report Hurwitz modes");
  if (stability.find("mode-1") == std::string::npos)
    problems.push_back("obstacle scenario should yield several modes");

  // Undamped gains are analyzable and flagged as non-Hurwitz.
  Scenario undamped = presets::chain_3();
  undamped.gains.b = 0.0;
  undamped.gains.b_x = 0.0;
  undamped.settings.t_end = 50.0;
  const fs::path undamped_path = g_work / "undamped.json";
  write_scenario(undamped_path, undamped);
  const fs::path un_out = g_work / "un_out";
  if (run_cli("analyze " + undamped_path.string() + " --out " +
              un_out.string()) != 0)
    problems.push_back("analyze of undamped gains failed");
  else if (slurp(un_out / "stability.json").find("\"hurwitz\": false") ==
           std::string::npos)
    problems.push_back("undamped gains should report hurwitz = false");

  // Plot data: snapshot rows for every car except the phantom leader.
  const fs::path run_out = g_work / "run1";  // reuses criterion 9's run
  const fs::path snap = g_work / "snap.csv";
  if (run_cli("plotdata " + (run_out / "trace.csv").string() +
              " --kind xy-snapshot --t 1000 --out " + snap.string()) != 0)
    problems.push_back("plotdata xy-snapshot failed");
  else {
    std::istringstream in(slurp(snap));
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    if (rows != 16) problems.push_back("xy-snapshot should list 16 cars");
  }
  if (run_cli("plotdata " + (run_out / "trace.csv").string() +
              " --kind bogus") != 1)
    problems.push_back("unknown plot kind should exit 1");

  // Decimated and full traces agree at shared sample times.
  const fs::path dec_out = g_work / "run_dec";
  const fs::path scen = g_work / "steady.json";  // written by criterion 9
  if (run_cli("run " + scen.string() + " --t-end 1500 --every 10 --out " +
              dec_out.string()) != 0)
    problems.push_back("decimated run failed");
  else {
    const fs::path snap_dec = g_work / "snap_dec.csv";
    if (run_cli("plotdata " + (dec_out / "trace.csv").string() +
                " --kind xy-snapshot --t 1000 --out " + snap_dec.string()) !=
            0 ||
        slurp(snap_dec) != slurp(snap))
      problems.push_back("decimated trace disagrees at a shared sample");
  }

  // An empty trace yields a header-only plot file.
  const fs::path empty_trace = g_work / "empty.csv";
  atomic_write(empty_trace, "t,car,role,level,x,y,vx,vy\n");
  const fs::path empty_out = g_work / "empty_vel.csv";
  if (run_cli("plotdata " + empty_trace.string() + " --kind y-velocity --out " +
              empty_out.string()) != 0)
    problems.push_back("plotdata on an empty trace failed");
  else if (slurp(empty_out) != "t,car,vy\n")
    problems.push_back("empty trace should give a header-only file");

  Outcome out;
  out.pass = problems.empty();
  if (problems.empty()) {
    out.detail = "exit codes 1/2/3, atomic outputs, analyze and plotdata ok";
  } else {
    for (const std::string& p : problems) out.detail += p + "; ";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_sim_binary = argv[1];
  g_work = fs::temp_directory_path() / "laneless-acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  struct Entry {
    const char* name;
    Outcome (*fn)();
    bool needs_cli;
  };
  const Entry entries[] = {
      {"criterion 1: steady-flow spacing and speed consensus", criterion_1,
       false},
      {"criterion 2: lateral spacing via C = L x_f and local offsets",
       criterion_2, false},
      {"criterion 3: formation change between 30 and 15 unit slots",
       criterion_3, false},
      {"criterion 4: spectral oracle on random triangular modes", criterion_4,
       false},
      {"criterion 5: common-function certificate under random switching",
       criterion_5, false},
      {"criterion 6: admissible impulses decay and re-converge", criterion_6,
       false},
      {"criterion 7: obstacle deviation, speed dip and recovery", criterion_7,
       false},
      {"criterion 8: lane change keeps the tree and re-spaces", criterion_8,
       false},
      {"criterion 9: determinism and step-refinement order", criterion_9,
       true},
      {"supplementary: command-line contract", cli_contract, true},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    Outcome outcome;
    if (entry.needs_cli && g_sim_binary.empty()) {
      outcome.pass = false;
      outcome.detail = "sim binary path not supplied";
    } else {
      try {
        outcome = entry.fn();
      } catch (const std::exception& err) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + err.what();
      }
    }
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << entry.name << " - "
              << outcome.detail << "\n";
    if (!outcome.pass) ++failures;
  }
  return failures;
}
