// Shared helpers for the test suites: deterministic random formations and
// one-call graph/bundle assembly.
#pragma once

#include <random>

#include "laneless/laplacian.hpp"
#include "laneless/scenario.hpp"

namespace test_support {

using namespace laneless;

struct BuiltSystem {
  Scenario scenario;
  InfluenceGraph gy, gx;
  LevelMap levels;
  AxisPartition py, px;
  LaplacianBundle by, bx;
  bool x_present = false;
};

inline BuiltSystem build_all(const Scenario& sc) {
  BuiltSystem b;
  b.scenario = sc;
  DerivedGraphs d = derive_influence_graphs(sc.initial, sc.geom);
  b.gy = redistribute_weights(d.y, sc.gains.W);
  b.levels = d.levels;
  b.py = axis_partition(sc.initial, Axis::Y, b.levels);
  b.by = laplacian(b.gy, b.gy.nodes, b.py);
  b.x_present = d.x_present;
  if (d.x_present) {
    b.gx = redistribute_weights(d.x, sc.gains.W);
    b.px = axis_partition(sc.initial, Axis::X, b.levels);
    b.bx = laplacian(b.gx, b.gx.nodes, b.px);
  }
  return b;
}

// Random convoy with a boundary car at the right edge of every level plus
// 1..3 regular cars, canonically numbered. Deterministic for a given rng
// state.
inline Scenario random_formation(std::mt19937_64& rng, int max_cars = 12) {
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Scenario sc;
    sc.name = "random";
    sc.leader_v0 = 10.0;
    sc.settings.t_end = 100.0;

    const int levels =
        1 + static_cast<int>(rng() % std::min<int>(4, max_cars / 2));
    Scenario raw;
    raw.initial.cars.push_back(
        {0, CarRole::PhantomLeader, -45.0 + 5.0 * jitter(rng), 0.0, 0.0, 10.0});
    CarId next_id = 1;
    int total = 0;
    for (int level = 1; level <= levels; ++level) {
      // Each level gets its boundary pseudo-car plus at least one regular.
      const int budget = max_cars - total - 2 * (levels - level);
      const int regulars =
          std::max(1, std::min<int>(1 + static_cast<int>(rng() % 3),
                                    budget - 1));
      raw.initial.cars.push_back({next_id++, CarRole::Boundary, 0.0,
                                  -50.0 * level + 4.0 * jitter(rng), 0.0,
                                  10.0});
      ++total;
      for (int r = 1; r <= regulars; ++r) {
        raw.initial.cars.push_back({next_id++, CarRole::Regular,
                                    -30.0 * r + 3.0 * jitter(rng),
                                    -50.0 * level + 4.0 * jitter(rng),
                                    0.2 * jitter(rng),
                                    10.0 + 1.0 * jitter(rng)});
        ++total;
      }
    }
    raw.leader_v0 = sc.leader_v0;
    raw.settings = sc.settings;
    try {
      Scenario canon = canonicalize_scenario(raw);
      canon.validate();
      bool has_regular = false;
      for (const Car& c : canon.initial.cars)
        if (c.role == CarRole::Regular) has_regular = true;
      if (!has_regular) continue;
      return canon;
    } catch (const SimError&) {
      continue;
    }
  }
  throw std::runtime_error("random_formation failed to produce a valid convoy");
}

}  // namespace test_support
