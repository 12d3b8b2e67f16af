#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>

#include "mfp/datagen.hpp"
#include "mfp/planner.hpp"
#include "test_util.hpp"

using namespace mfp;
using namespace mfp::testutil;

namespace {

ModelPreconditions skill_table_pre(std::size_t n_models,
                                   std::map<Skill, double> d_max,
                                   std::vector<double> fixed_deviation) {
  ModelPreconditions pre;
  pre.d_max = std::move(d_max);
  for (std::size_t i = 0; i < n_models; ++i) {
    const double dev = fixed_deviation[i];
    pre.deviation.push_back(
        [dev](const WorldState&, const SkillAction&) { return dev; });
  }
  return pre;
}

PlannerConfig box_cfg(std::uint64_t seed) {
  PlannerConfig cfg;
  cfg.epsilon = 5.0;
  cfg.weights = {10.0, 1.0};
  cfg.seed = seed;
  return cfg;
}


}  // namespace

TEST_CASE("choose_queue follows the weighted min-key rule") {
  CHECK(choose_queue({5.0, 40.0}, {10.0, 1.0}) == 1);
  CHECK(choose_queue({5.0, 100.0}, {10.0, 1.0}) == 0);
  CHECK(choose_queue({10.0, 100.0, 110.0}, {10.0, 1.1, 1.0}) == 0);
}

TEST_CASE("choose_queue breaks ties toward the faster model") {
  CHECK(choose_queue({1.0, 10.0}, {10.0, 1.0}) == 1);  // 10 vs 10
  const double inf = kInfiniteCost;
  CHECK(choose_queue({inf, 7.0}, {10.0, 1.0}) == 1);
  CHECK(choose_queue({inf, inf}, {10.0, 1.0}) == -1);
}

TEST_CASE("model preconditions: strictness, defaults, and missing skills") {
  const TaskSpec task = box_task();
  const WorldState s = base_state(task);
  const SkillAction pick{Skill::Pick, {15.0, 15.0, 0.0, 0.0}};
  ModelPreconditions empty;
  CHECK(empty.in_precondition(0, s, pick));  // no estimators: always trusted

  auto pre = skill_table_pre(2, {{Skill::Pick, 3.0}}, {0.0, 3.0});
  CHECK(pre.in_precondition(0, s, pick));
  CHECK_FALSE(pre.in_precondition(1, s, pick));  // 3.0 < 3.0 is false
  const SkillAction drop{Skill::LiftAndDrop, {30.0, 10.0}};
  CHECK_FALSE(pre.in_precondition(0, s, drop));  // skill absent from d_max
}

TEST_CASE("start in goal returns an empty plan") {
  const TaskSpec task = box_task();
  WorldState s = base_state(task);
  s.rods[0] = Pose2{task.scene->box.cx(), task.scene->box.cy(), 0.0};
  const auto models = make_models(task.name, task.dynamics);
  const PlanResult r = plan(s, task, models, {}, box_cfg(1));
  CHECK(r.found());
  CHECK(r.cost == 0.0);
  CHECK(r.actions.empty());
  CHECK(r.predicted_states.size() == 1);
}

TEST_CASE("plan finds the two-step box solution from a clean start") {
  const TaskSpec task = box_task();
  const WorldState s = base_state(task);
  const auto models = make_models(task.name, task.dynamics);
  const PlanResult r = plan(s, task, models, {}, box_cfg(2));
  REQUIRE(r.found());
  REQUIRE(r.actions.size() >= 2);
  CHECK(r.actions[0].skill == Skill::Pick);
  CHECK(r.predicted_states.size() == r.actions.size() + 1);
  CHECK(task.goal(r.predicted_states.back()));
  CHECK(r.cost > 0.0);
}

TEST_CASE("degenerate single-model planning equals plain weighted A*") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const std::vector<TransitionModel> single{models[1]};  // K = 1
  int solved = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const WorldState start = sample_initial_state(task, mix_seed(123, i));
    PlannerConfig cfg = box_cfg(mix_seed(7, i));
    cfg.weights = {10.0};
    const PlanResult a = plan(start, task, single, {}, cfg);
    const PlanResult b = plan_ps_only(start, task, single, {}, cfg);
    const double ref = reference_wastar(start, task, single[0], cfg);
    if (a.found()) {
      ++solved;
      CHECK(a.cost == b.cost);
      CHECK(a.cost == ref);
    } else {
      CHECK_FALSE(b.found());
      CHECK(ref == kInfiniteCost);
    }
  }
  CHECK(solved >= 40);
}

TEST_CASE("prioritized selection skips slower models when fast is trusted") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const auto pre = skill_table_pre(
      2, {{Skill::Pick, 3.0}, {Skill::LiftAndDrop, 8.0}}, {0.0, 0.0});
  const WorldState start = base_state(task);
  const PlanResult r = plan_ps_only(start, task, models, pre, box_cfg(3));
  REQUIRE(r.found());
  CHECK(r.per_model_evals[0] == 0);
  CHECK(r.per_model_evals[1] > 0);
  CHECK(r.weighted_eval_cost ==
        doctest::Approx(double(r.per_model_evals[1]) * models[1].eval_cost));
}

TEST_CASE("edges outside every precondition do not exist") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const auto pre = skill_table_pre(
      2, {{Skill::Pick, 3.0}, {Skill::LiftAndDrop, 8.0}}, {99.0, 99.0});
  const PlanResult r = plan(base_state(task), task, models, pre, box_cfg(4));
  CHECK(r.status == PlanStatus::Exhausted);
  CHECK(r.per_model_evals[0] == 0);
  CHECK(r.per_model_evals[1] == 0);
}

TEST_CASE("partial expansion defers untrusted edges to the anchor") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  // Fast model trusted for Pick only: every LiftAndDrop edge must fall back
  // to the simulator via the anchor queue.
  ModelPreconditions pre;
  pre.d_max = {{Skill::Pick, 3.0}, {Skill::LiftAndDrop, 8.0}};
  pre.deviation.push_back(
      [](const WorldState&, const SkillAction&) { return 0.0; });
  pre.deviation.push_back([](const WorldState&, const SkillAction& a) {
    return a.skill == Skill::Pick ? 0.0 : 99.0;
  });
  const PlanResult r = plan(base_state(task), task, models, pre, box_cfg(5));
  REQUIRE(r.found());
  CHECK(r.per_model_evals[0] > 0);  // simulator used for transports
  CHECK(r.per_model_evals[1] > 0);  // fast model used for picks
  bool has_drop = false;
  for (const auto& a : r.actions) has_drop |= a.skill == Skill::LiftAndDrop;
  CHECK(has_drop);
}

TEST_CASE("planning is deterministic") {
  const TaskSpec task = drawer_task();
  const auto models = make_models(task.name, task.dynamics);
  PlannerConfig cfg;
  cfg.epsilon = 10.0;
  cfg.weights = {10.0, 1.1, 1.0};
  cfg.seed = 99;
  const WorldState start = sample_initial_state(task, 5);
  const PlanResult a = plan(start, task, models, {}, cfg);
  const PlanResult b = plan(start, task, models, {}, cfg);
  CHECK(a.cost == b.cost);
  CHECK(a.per_model_evals == b.per_model_evals);
  CHECK(a.expansions == b.expansions);
  CHECK(a.actions == b.actions);

  const PlanResult r1 = plan_baseline(start, task, models, {},
                                      BaselineMode::random(3), cfg);
  const PlanResult r2 = plan_baseline(start, task, models, {},
                                      BaselineMode::random(3), cfg);
  CHECK(r1.cost == r2.cost);
  CHECK(r1.per_model_evals == r2.per_model_evals);
}

TEST_CASE("analytical-only baseline cannot open the drawer") {
  const TaskSpec task = drawer_task();
  const auto models = make_models(task.name, task.dynamics);
  PlannerConfig cfg;
  cfg.epsilon = 10.0;
  cfg.weights = {10.0, 1.1, 1.0};
  cfg.seed = 12;
  cfg.expansion_budget = 500;
  const WorldState start = sample_initial_state(task, 8);
  const PlanResult r = plan_baseline(start, task, models, {},
                                     BaselineMode::single(2), cfg);
  CHECK_FALSE(r.found());
  const PlanResult sim = plan_baseline(start, task, models, {},
                                       BaselineMode::single(0), cfg);
  CHECK(sim.found());
  CHECK(sim.per_model_evals[1] == 0);
  CHECK(sim.per_model_evals[2] == 0);
}

TEST_CASE("optimal oracle on constructed instances") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  WorldState s = base_state(task);
  PlannerConfig cfg = box_cfg(6);

  WorldState in_goal = s;
  in_goal.rods[0] = Pose2{task.scene->box.cx(), task.scene->box.cy(), 0.0};
  CHECK(optimal_oracle(in_goal, task, models, {}, cfg) == 0.0);

  const auto pre = skill_table_pre(
      2, {{Skill::Pick, 3.0}, {Skill::LiftAndDrop, 8.0}}, {99.0, 99.0});
  CHECK(optimal_oracle(s, task, models, pre, cfg) == kInfiniteCost);

  // Cross-check against an independent enumeration of two-step plans over
  // the same seeded edge set.
  const double g_star = optimal_oracle(s, task, models, {}, cfg, 2);
  double best = kInfiniteCost;
  const std::string k0 = planner_state_key(s, cfg);
  for (const auto& a0 :
       task.applicable_actions(s, planner_action_seed(cfg, k0))) {
    const WorldState s1 = models[1].forward(s, a0);
    const double c0 = edge_cost(s, a0, task.dynamics);
    if (task.goal(s1)) best = std::min(best, c0);
    const std::string k1 = planner_state_key(s1, cfg);
    for (const auto& a1 :
         task.applicable_actions(s1, planner_action_seed(cfg, k1))) {
      const WorldState s2 = models[1].forward(s1, a1);
      if (task.goal(s2)) {
        best = std::min(best, c0 + edge_cost(s1, a1, task.dynamics));
      }
    }
  }
  CHECK(g_star == doctest::Approx(best));
}

TEST_CASE("suboptimality bounds hold on sampled instances") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  int feasible = 0;
  for (std::uint64_t i = 0; i < 40 && feasible < 20; ++i) {
    const WorldState start = sample_initial_state(task, mix_seed(31, i));
    PlannerConfig cfg = box_cfg(mix_seed(32, i));
    const double g_star = optimal_oracle(start, task, models, {}, cfg);
    if (!std::isfinite(g_star) || g_star <= 0.0) continue;
    ++feasible;
    const PlanResult ps = plan_ps_only(start, task, models, {}, cfg);
    const PlanResult pe = plan(start, task, models, {}, cfg);
    REQUIRE(ps.found());
    REQUIRE(pe.found());
    CHECK(ps.cost <= 5.0 * g_star + 1e-9);
    CHECK(pe.cost <= 50.0 * g_star + 1e-9);
  }
  CHECK(feasible == 20);
}

TEST_CASE("heuristic is admissible against oracle-optimal costs") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  int checked = 0;
  for (std::uint64_t i = 0; i < 30 && checked < 15; ++i) {
    const WorldState start = sample_initial_state(task, mix_seed(61, i));
    PlannerConfig cfg = box_cfg(mix_seed(62, i));
    const double g_star = optimal_oracle(start, task, models, {}, cfg);
    if (!std::isfinite(g_star)) continue;
    ++checked;
    CHECK(task.heuristic(start) <= g_star + 1e-9);
  }
  CHECK(checked == 15);
}

TEST_CASE("plan results serialize to records") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const PlanResult r = plan(base_state(task), task, models, {}, box_cfg(13));
  REQUIRE(r.found());
  const auto recs = plan_result_to_records(r);
  REQUIRE(recs.size() == r.actions.size() + 1);
  CHECK(recs[0].type == "plan");
  CHECK(recs[0].get("status") == "Found");
  CHECK(recs[0].get_double("cost") == doctest::Approx(r.cost));
  CHECK(recs[1].type == "plan_action");
  const SkillAction back = action_from_fields(recs[1], "a.");
  CHECK(back == r.actions[0]);
}

TEST_CASE("preconditions_from_mdes treats unknown models as untrusted") {
  const TaskSpec task = box_task();
  const auto models = make_models(task.name, task.dynamics);
  const auto pre = preconditions_from_mdes(
      models, {}, FeatureContext::from_task(task), task.d_max);
  const SkillAction pick{Skill::Pick, {15.0, 15.0, 0.0, 0.0}};
  CHECK_FALSE(pre.in_precondition(0, base_state(task), pick));
  CHECK_FALSE(pre.in_precondition(1, base_state(task), pick));
}
