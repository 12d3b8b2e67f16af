#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mfp/mde.hpp"
#include "mfp/records.hpp"
#include "mfp/state.hpp"
#include "mfp/world.hpp"

namespace mfp {

using DeviationFn =
    std::function<double(const WorldState&, const SkillAction&)>;

/// Per-model trust predicates. deviation[i] estimates the error of model i;
/// a null function (or an empty vector) means the model is always trusted.
/// An (s, a) pair is in model i's precondition iff deviation < d_max[skill].
struct ModelPreconditions {
  std::vector<DeviationFn> deviation;
  std::map<Skill, double> d_max;

  bool in_precondition(int model_index, const WorldState& s,
                       const SkillAction& a) const;
};

/// Wires trained MDEs into planner preconditions. `mdes` is keyed by
/// "<skill>|<model name>"; models without an entry are never trusted.
ModelPreconditions preconditions_from_mdes(
    const std::vector<TransitionModel>& models,
    const std::map<std::string, MdeModel>& mdes, const FeatureContext& ctx,
    const std::map<Skill, double>& d_max);

std::string mde_key(Skill skill, const std::string& model_name);

struct PlannerConfig {
  double epsilon = 5.0;
  std::vector<double> weights;  // one per model, non-increasing
  double time_budget_s = 300.0;
  std::int64_t expansion_budget = 5000;
  double pos_resolution = 0.5;     // cm
  double yaw_resolution = 0.05;    // rad
  double drawer_resolution = 0.5;  // cm
  std::uint64_t seed = 0;

  static PlannerConfig from_config(const Config& cfg, TaskName task);
};

enum class PlanStatus { Found, Timeout, Exhausted };

const char* plan_status_str(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::Exhausted;
  std::vector<SkillAction> actions;
  std::vector<WorldState> predicted_states;  // actions.size() + 1 when Found
  double cost = 0.0;
  std::vector<std::int64_t> per_model_evals;
  double weighted_eval_cost = 0.0;
  std::int64_t expansions = 0;
  double wall_time_s = 0.0;

  bool found() const { return status == PlanStatus::Found; }
};

/// Queue-selection rule over current minimum f keys; empty queues carry
/// +inf. Ties break toward the larger index (the faster model). Returns -1
/// when every queue is empty.
int choose_queue(const std::vector<double>& min_keys,
                 const std::vector<double>& weights);

/// Discretized state identity used by the closed sets (positions 0.5 cm,
/// yaw 0.05 rad, drawer 0.5 cm by default).
std::string planner_state_key(const WorldState& s, const PlannerConfig& cfg);

/// Seed for sampling a state's candidate actions; shared by the planner and
/// the oracle so both search the same edge set.
std::uint64_t planner_action_seed(const PlannerConfig& cfg,
                                  const std::string& state_key);

/// Multi-queue weighted A* with prioritized selection and prioritized
/// expansion: one anchor queue doing full expansions plus one queue per
/// faster model doing partial expansions.
PlanResult plan(const WorldState& start, const TaskSpec& task,
                const std::vector<TransitionModel>& models,
                const ModelPreconditions& pre, const PlannerConfig& cfg);

/// Ablation: anchor search only, full expansions with prioritized selection.
PlanResult plan_ps_only(const WorldState& start, const TaskSpec& task,
                        const std::vector<TransitionModel>& models,
                        const ModelPreconditions& pre,
                        const PlannerConfig& cfg);

struct BaselineMode {
  enum Kind { SingleModel, RandomModel } kind = SingleModel;
  int model_index = 0;       // SingleModel: evaluate every edge with this
  std::uint64_t seed = 0;    // RandomModel
  /// RandomModel picks uniformly among models whose precondition holds;
  /// with no preconditions supplied it picks uniformly among all models.
  static BaselineMode single(int index) { return {SingleModel, index, 0}; }
  static BaselineMode random(std::uint64_t seed) { return {RandomModel, 0, seed}; }
};

PlanResult plan_baseline(const WorldState& start, const TaskSpec& task,
                         const std::vector<TransitionModel>& models,
                         const ModelPreconditions& pre, BaselineMode mode,
                         const PlannerConfig& cfg);

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Brute-force optimum over the same edge set the planner searches
/// (prioritized selection decides whether an edge exists): exhaustive
/// enumeration of action sequences up to `max_depth`. Returns +inf when no
/// sequence reaches the goal.
double optimal_oracle(const WorldState& start, const TaskSpec& task,
                      const std::vector<TransitionModel>& models,
                      const ModelPreconditions& pre, const PlannerConfig& cfg,
                      int max_depth = 4);

/// Plan results as structured text records (replayable by the data
/// collection tooling).
std::vector<Record> plan_result_to_records(const PlanResult& r);

}  // namespace mfp
