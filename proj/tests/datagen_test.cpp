#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mfp/datagen.hpp"
#include "test_util.hpp"

using namespace mfp;
using namespace mfp::testutil;

namespace {

std::vector<EpisodeLog> small_corpus(int n_box, int n_drawer) {
  std::vector<EpisodeLog> episodes;
  {
    const TaskSpec task = box_task();
    const auto models = make_models(task.name, task.dynamics);
    PlannerConfig cfg = PlannerConfig::from_config(Config{}, task.name);
    auto logs = collect_episodes(task, models, cfg, n_box, 1, 0);
    episodes.insert(episodes.end(), logs.begin(), logs.end());
  }
  if (n_drawer > 0) {
    const TaskSpec task = drawer_task();
    const auto models = make_models(task.name, task.dynamics);
    PlannerConfig cfg = PlannerConfig::from_config(Config{}, task.name);
    auto logs =
        collect_episodes(task, models, cfg, n_drawer, 2, std::int64_t(n_box));
    episodes.insert(episodes.end(), logs.begin(), logs.end());
  }
  return episodes;
}

}  // namespace

TEST_CASE("initial states are valid and seed-deterministic") {
  const TaskSpec task = drawer_task();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const WorldState s = sample_initial_state(task, seed);
    CHECK_FALSE(task.goal(s));
    CHECK(s.drawer_open == 0.0);
    CHECK_FALSE(s.held.has_value());
    for (const auto& rod : s.rods) {
      CHECK(task.scene->workspace.contains(rod.x, rod.y));
    }
    CHECK(distance(s.rods[0], s.rods[1]) >= 3.0 * task.scene->rod_width);
    const WorldState t = sample_initial_state(task, seed);
    CHECK(state_distance(s, t) == 0.0);
    CHECK(s.rods[0].yaw == t.rods[0].yaw);
  }
}

TEST_CASE("episodes replay their plans under ground truth") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const PlannerConfig cfg = PlannerConfig::from_config(Config{}, task.name);
  const EpisodeLog log = run_episode(task, models, cfg, 3, 17);
  CHECK(log.episode_id == 17);
  CHECK(log.task == TaskName::RodInBox);
  WorldState s = sample_initial_state(task, 3);
  for (const auto& t : log.transitions) {
    CHECK(state_distance(t.s, s) == 0.0);
    CHECK(skill_precondition(t.s, t.a));
    const WorldState next = ground_truth(s, t.a, task.dynamics);
    CHECK(state_distance(t.s_next, next) == 0.0);
    s = next;
  }
  CHECK(log.reached_goal == task.goal(s));

  const EpisodeLog again = run_episode(task, models, cfg, 3, 17);
  CHECK(again.transitions.size() == log.transitions.size());
  CHECK(again.reached_goal == log.reached_goal);
}

TEST_CASE("collect_episodes returns the requested count, all non-empty") {
  const auto episodes = small_corpus(5, 3);
  CHECK(episodes.size() == 8);
  std::set<std::int64_t> ids;
  for (const auto& e : episodes) {
    CHECK_FALSE(e.transitions.empty());
    ids.insert(e.episode_id);
    for (std::size_t i = 0; i < e.transitions.size(); ++i) {
      CHECK(e.transitions[i].episode_id == e.episode_id);
      CHECK(e.transitions[i].step == int(i));
    }
  }
  CHECK(ids.size() == 8);  // ids are unique across tasks
}

TEST_CASE("episode logs round-trip through files") {
  const auto episodes = small_corpus(3, 2);
  const auto path =
      (std::filesystem::temp_directory_path() / "episodes_test.log").string();
  save_episodes(path, episodes);
  const auto back = load_episodes(path);
  REQUIRE(back.size() == episodes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].episode_id == episodes[i].episode_id);
    CHECK(back[i].task == episodes[i].task);
    CHECK(back[i].reached_goal == episodes[i].reached_goal);
    REQUIRE(back[i].transitions.size() == episodes[i].transitions.size());
    for (std::size_t j = 0; j < back[i].transitions.size(); ++j) {
      CHECK(state_distance(back[i].transitions[j].s,
                           episodes[i].transitions[j].s) < 1e-3);
      CHECK(back[i].transitions[j].a.skill ==
            episodes[i].transitions[j].a.skill);
    }
  }
  // Re-saving the loaded corpus is byte-identical (stable 6-digit text).
  const auto path2 =
      (std::filesystem::temp_directory_path() / "episodes_test2.log").string();
  save_episodes(path2, back);
  std::ifstream f1(path), f2(path2);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("dataset split groups whole episodes and never leaks") {
  const auto episodes = small_corpus(8, 5);
  const Dataset ds = build_dataset(episodes, Config{}, 0.15, 9);
  CHECK_FALSE(ds.train.empty());
  CHECK_FALSE(ds.test.empty());
  std::set<std::int64_t> train_ids, test_ids;
  for (const auto& [t, ctx] : ds.train) train_ids.insert(t.episode_id);
  for (const auto& [t, ctx] : ds.test) test_ids.insert(t.episode_id);
  for (std::int64_t id : test_ids) {
    CHECK(train_ids.count(id) == 0);
  }
  std::size_t total = 0;
  for (const auto& e : episodes) total += e.transitions.size();
  CHECK(ds.train.size() + ds.test.size() == total);

  // Same seed -> same split.
  const Dataset ds2 = build_dataset(episodes, Config{}, 0.15, 9);
  CHECK(ds2.train.size() == ds.train.size());
}

TEST_CASE("single-episode corpus keeps everything in train") {
  const auto episodes = small_corpus(1, 0);
  const Dataset ds = build_dataset(episodes, Config{}, 0.15, 1);
  CHECK(ds.test.empty());
  CHECK(ds.train.size() == episodes[0].transitions.size());
}

TEST_CASE("feature contexts carry the right task goal") {
  const auto episodes = small_corpus(2, 2);
  const Dataset ds = build_dataset(episodes, Config{}, 0.0, 4);
  const TaskSpec box = box_task();
  const TaskSpec drawer = drawer_task();
  for (const auto& [t, ctx] : ds.train) {
    if (t.s.scene->has_box) {
      CHECK(ctx.goal_center_x == doctest::Approx(box.goal_center_x));
    } else {
      CHECK(ctx.goal_center_x == doctest::Approx(drawer.goal_center_x));
      CHECK(ctx.goal_center_y == doctest::Approx(drawer.goal_center_y));
    }
  }
}
