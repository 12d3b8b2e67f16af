#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mfp/config.hpp"
#include "mfp/state.hpp"

namespace mfp {

/// Closed-form dynamics constants. Every value is overridable through the
/// world.* section of the configuration file.
struct DynamicsConstants {
  double pivot_offset = 3.0;      // |grasp_offset| above which the rod pivots
  double drop_offset = 7.0;       // |grasp_offset| above which the rod drops
  double pivot_angle = 0.6;       // rad added to the rod yaw when pivoting
  double pivot_shift_slope = 1.5; // landing shift per cm of offset overshoot
  double contact_band = 2.0;      // gripper-to-drawer-front contact depth, cm
  double grasp_end_margin = 2.0;  // end grasps sit at +-(l/2 - margin)
  double drop_target_margin = 2.0;  // goal rectangle shrink for drop samples
  double y_open_min = 14.0;
  double y_open_max = 17.0;
  double eval_cost_simulator = 200.0;
  double eval_cost_analytical_drawer = 1.1;
  double eval_cost_analytical_pick_place = 1.0;

  static DynamicsConstants from_config(const Config& cfg);
};

enum class TaskName { RodInBox, RodInDrawer };

const char* task_name_str(TaskName t);
TaskName task_from_name(const std::string& name);

Scene make_scene(TaskName task, const Config& cfg);

/// Per-skill applicability. Independent of any transition model.
bool skill_precondition(const WorldState& s, const SkillAction& a);

/// Gripper pose the OpenDrawer skill drives to before pulling: inside the
/// contact band behind the current drawer front.
Pose2 drawer_contact_pose(const WorldState& s, const DynamicsConstants& dc);

/// End-effector travel charged for executing `a` from `s`. Model-independent
/// by construction (a function of the state and parameters only).
double edge_cost(const WorldState& s, const SkillAction& a,
                 const DynamicsConstants& dc);

/// Deterministic ground-truth dynamics. Stands in for the real world; end
/// grasps drop mid-transport, off-center grasps pivot, the drawer joint
/// clamps at its limit. Throws invalid_argument on precondition violations.
WorldState ground_truth(const WorldState& s, const SkillAction& a,
                        const DynamicsConstants& dc);

/// M_2: kinematic pick-and-place, rod rigidly attached regardless of grasp
/// offset; never moves the drawer.
WorldState analytical_pick_place(const WorldState& s, const SkillAction& a,
                                 const DynamicsConstants& dc);

/// M_1: drawer articulation without joint limits; never moves the rods.
WorldState analytical_drawer(const WorldState& s, const SkillAction& a,
                             const DynamicsConstants& dc);

/// M_0: matches ground truth everywhere except the miscalibration region,
/// where a pivoted rod hitting a container wall is predicted to slide inside.
WorldState fine_simulator(const WorldState& s, const SkillAction& a,
                          const DynamicsConstants& dc);

/// Predicate for the simulator's designed inaccuracy region.
bool in_sim_miscalibration_region(const WorldState& s, const SkillAction& a,
                                  const DynamicsConstants& dc);

struct TransitionModel {
  int id = 0;  // index in the ordered list; 0 is slowest
  std::string name;
  double eval_cost = 1.0;
  std::function<WorldState(const WorldState&, const SkillAction&)> forward;
};

/// Models ordered by increasing speed (strictly decreasing eval_cost).
/// RodInBox: [simulator, analytical_pick_place].
/// RodInDrawer: [simulator, analytical_drawer, analytical_pick_place].
std::vector<TransitionModel> make_models(TaskName task,
                                         const DynamicsConstants& dc);

/// All three named models, for MDE labeling across tasks.
std::vector<TransitionModel> all_models(const DynamicsConstants& dc);

struct TaskSpec {
  TaskName name = TaskName::RodInBox;
  int target_rod = 0;
  std::shared_ptr<const Scene> scene;
  DynamicsConstants dynamics;
  int samples_per_skill = 5;
  std::map<Skill, double> d_max;
  double goal_center_x = 0.0;
  double goal_center_y = 0.0;

  bool goal(const WorldState& s) const;
  double heuristic(const WorldState& s) const;
  std::vector<Skill> skills() const;

  /// Candidate actions for one skill from `s`. Deterministic under seed.
  std::vector<SkillAction> generate_params(const WorldState& s, Skill skill,
                                           std::uint64_t rng_seed) const;
  /// All candidate actions whose skill precondition holds at `s`.
  std::vector<SkillAction> applicable_actions(const WorldState& s,
                                              std::uint64_t rng_seed) const;
};

TaskSpec make_task(TaskName name, int target_rod, const Config& cfg);

/// splitmix64; used wherever per-state or per-instance seeds are derived.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace mfp
