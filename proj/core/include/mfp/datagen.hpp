#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfp/mde.hpp"
#include "mfp/planner.hpp"
#include "mfp/world.hpp"

namespace mfp {

/// One executed trajectory: the plan was produced with a randomized model
/// choice per edge and replayed under the ground-truth dynamics.
struct EpisodeLog {
  std::int64_t episode_id = 0;
  TaskName task = TaskName::RodInBox;
  int target_rod = 0;
  std::uint64_t seed = 0;
  std::string planner = "random";
  bool reached_goal = false;
  std::vector<Transition> transitions;
};

/// Random start: rods placed uniformly, non-overlapping, away from the goal;
/// gripper parked at the staging pose; drawer closed.
WorldState sample_initial_state(const TaskSpec& task, std::uint64_t seed);

/// Plans from a sampled start with uniformly random model selection (no
/// preconditions) and replays the plan under ground truth, truncating at the
/// first action whose skill precondition fails in the real state.
EpisodeLog run_episode(const TaskSpec& task,
                       const std::vector<TransitionModel>& models,
                       const PlannerConfig& pcfg, std::uint64_t seed,
                       std::int64_t episode_id);

/// Runs episodes with consecutive derived seeds until `count` of them carry
/// at least one transition.
std::vector<EpisodeLog> collect_episodes(
    const TaskSpec& task, const std::vector<TransitionModel>& models,
    const PlannerConfig& pcfg, int count, std::uint64_t seed,
    std::int64_t first_id);

struct Dataset {
  std::vector<std::pair<Transition, FeatureContext>> train;
  std::vector<std::pair<Transition, FeatureContext>> test;
};

/// Episode-grouped split: whole episodes go to either side, decided before
/// any augmentation, so no trajectory leaks across the boundary.
Dataset build_dataset(const std::vector<EpisodeLog>& episodes,
                      const Config& cfg, double test_fraction,
                      std::uint64_t seed);

void save_episodes(const std::string& path,
                   const std::vector<EpisodeLog>& episodes);
std::vector<EpisodeLog> load_episodes(const std::string& path);

}  // namespace mfp
