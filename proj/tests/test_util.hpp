#pragma once

#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "mfp/datagen.hpp"
#include "mfp/planner.hpp"
#include "mfp/world.hpp"

namespace mfp::testutil {

inline TaskSpec box_task() {
  return make_task(TaskName::RodInBox, 0, Config{});
}

inline TaskSpec drawer_task() {
  return make_task(TaskName::RodInDrawer, 0, Config{});
}

/// Gripper parked, rods well apart, drawer closed.
inline WorldState base_state(const TaskSpec& task) {
  WorldState s;
  s.scene = task.scene;
  s.gripper = Pose2{30.0, 6.0, 0.0};
  s.rods[0] = Pose2{15.0, 15.0, 0.0};
  s.rods[1] = Pose2{40.0, 20.0, 1.0};
  return s;
}

inline WorldState random_state(const TaskSpec& task, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(10.0, 50.0);
  std::uniform_real_distribution<double> uy(10.0, 30.0);
  std::uniform_real_distribution<double> uyaw(-3.1, 3.1);
  WorldState s = base_state(task);
  for (auto& rod : s.rods) {
    rod = Pose2{ux(rng), uy(rng), normalize_yaw(uyaw(rng))};
  }
  return s;
}

inline bool states_close(const WorldState& a, const WorldState& b,
                         double tol = 1e-9) {
  return state_distance(a, b) <= tol;
}

/// Plain single-queue weighted A* over the same edge set as the planner,
/// written independently for the degenerate-equivalence checks.
inline double reference_wastar(const WorldState& start, const TaskSpec& task,
                               const TransitionModel& model,
                               const PlannerConfig& cfg) {
  struct Entry {
    double f, g;
    std::uint64_t seq;
    std::string key;
  };
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> open(cmp);
  std::map<std::string, double> g;
  std::map<std::string, WorldState> states;
  std::set<std::string> closed;
  std::uint64_t seq = 0;

  const std::string k0 = planner_state_key(start, cfg);
  g[k0] = 0.0;
  states[k0] = start;
  open.push({cfg.epsilon * task.heuristic(start), 0.0, seq++, k0});
  std::int64_t expansions = 0;
  while (!open.empty() && expansions < cfg.expansion_budget) {
    const Entry e = open.top();
    open.pop();
    if (closed.count(e.key) || e.g != g.at(e.key)) continue;
    const WorldState& s = states.at(e.key);
    if (task.goal(s)) return e.g;
    closed.insert(e.key);
    ++expansions;
    for (const auto& a :
         task.applicable_actions(s, planner_action_seed(cfg, e.key))) {
      const WorldState succ = model.forward(s, a);
      const double gn = e.g + edge_cost(s, a, task.dynamics);
      const std::string key = planner_state_key(succ, cfg);
      auto it = g.find(key);
      if (it == g.end()) states.emplace(key, succ);
      if (it == g.end() || gn < it->second - 1e-12) {
        g[key] = gn;
        // h is evaluated on the bin's first-seen representative state.
        open.push({gn + cfg.epsilon * task.heuristic(states.at(key)), gn,
                   seq++, key});
      }
    }
  }
  return kInfiniteCost;
}

}  // namespace mfp::testutil
