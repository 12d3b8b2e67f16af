#include "mfp/world.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mfp {

DynamicsConstants DynamicsConstants::from_config(const Config& cfg) {
  DynamicsConstants dc;
  dc.pivot_offset = cfg.get_double("world.pivot_offset", dc.pivot_offset);
  dc.drop_offset = cfg.get_double("world.drop_offset", dc.drop_offset);
  dc.pivot_angle = cfg.get_double("world.pivot_angle", dc.pivot_angle);
  dc.pivot_shift_slope =
      cfg.get_double("world.pivot_shift_slope", dc.pivot_shift_slope);
  dc.contact_band = cfg.get_double("world.contact_band", dc.contact_band);
  dc.grasp_end_margin =
      cfg.get_double("world.grasp_end_margin", dc.grasp_end_margin);
  dc.drop_target_margin =
      cfg.get_double("world.drop_target_margin", dc.drop_target_margin);
  dc.y_open_min = cfg.get_double("world.y_open_min", dc.y_open_min);
  dc.y_open_max = cfg.get_double("world.y_open_max", dc.y_open_max);
  dc.eval_cost_simulator =
      cfg.get_double("world.eval_cost_simulator", dc.eval_cost_simulator);
  dc.eval_cost_analytical_drawer = cfg.get_double(
      "world.eval_cost_analytical_drawer", dc.eval_cost_analytical_drawer);
  dc.eval_cost_analytical_pick_place =
      cfg.get_double("world.eval_cost_analytical_pick_place",
                     dc.eval_cost_analytical_pick_place);
  return dc;
}

const char* task_name_str(TaskName t) {
  return t == TaskName::RodInBox ? "RodInBox" : "RodInDrawer";
}

TaskName task_from_name(const std::string& name) {
  if (name == "RodInBox") return TaskName::RodInBox;
  if (name == "RodInDrawer") return TaskName::RodInDrawer;
  throw std::invalid_argument("unknown task: " + name);
}

namespace {
Rect rect_from_cfg(const Config& cfg, const std::string& key, Rect fallback) {
  const auto v = cfg.get_doubles(
      key, {fallback.xmin, fallback.ymin, fallback.xmax, fallback.ymax});
  if (v.size() != 4) throw std::runtime_error("config rect " + key);
  return Rect{v[0], v[1], v[2], v[3]};
}
}  // namespace

Scene make_scene(TaskName task, const Config& cfg) {
  Scene s;
  s.rod_length = cfg.get_double("world.rod_length", s.rod_length);
  s.rod_width = cfg.get_double("world.rod_width", s.rod_width);
  s.workspace = rect_from_cfg(cfg, "world.workspace", s.workspace);
  if (task == TaskName::RodInBox) {
    s.has_box = true;
    s.box = rect_from_cfg(cfg, "world.box", s.box);
  } else {
    s.has_drawer = true;
    s.chest = rect_from_cfg(cfg, "world.chest", s.chest);
    s.drawer_closed = rect_from_cfg(cfg, "world.drawer", s.drawer_closed);
    s.drawer_limit = cfg.get_double("world.drawer_limit", s.drawer_limit);
    s.min_open = cfg.get_double("world.min_open", s.min_open);
  }
  return s;
}

bool skill_precondition(const WorldState& s, const SkillAction& a) {
  if (int(a.theta.size()) != skill_arity(a.skill)) return false;
  for (double v : a.theta) {
    if (!std::isfinite(v)) return false;
  }
  const Scene& sc = *s.scene;
  switch (a.skill) {
    case Skill::Pick:
      return !s.held && sc.workspace.contains(a.theta[0], a.theta[1]);
    case Skill::LiftAndDrop:
      return s.held.has_value() && sc.workspace.contains(a.theta[0], a.theta[1]);
    case Skill::OpenDrawer:
      return !s.held && sc.has_drawer && a.theta[0] > 0.0 &&
             a.theta[0] <= sc.workspace.height();
  }
  return false;
}

Pose2 drawer_contact_pose(const WorldState& s, const DynamicsConstants& dc) {
  const Rect d = s.scene->drawer_at(s.drawer_open);
  return Pose2{d.cx() + 1.0, d.ymin + dc.contact_band, 0.0};
}

double edge_cost(const WorldState& s, const SkillAction& a,
                 const DynamicsConstants& dc) {
  switch (a.skill) {
    case Skill::Pick:
    case Skill::LiftAndDrop:
      return distance(s.gripper.x, s.gripper.y, a.theta[0], a.theta[1]);
    case Skill::OpenDrawer: {
      const Pose2 c = drawer_contact_pose(s, dc);
      return distance(s.gripper.x, s.gripper.y, c.x, c.y) + a.theta[0];
    }
  }
  return 0.0;
}

namespace {

void require_precondition(const WorldState& s, const SkillAction& a) {
  if (!skill_precondition(s, a)) {
    throw std::invalid_argument("skill precondition violated for " +
                                std::string(skill_name(a.skill)));
  }
}

WorldState kinematic_pick(const WorldState& s, const SkillAction& a) {
  WorldState ns = s;
  ns.gripper = Pose2{a.theta[0], a.theta[1], normalize_yaw(a.theta[2])};
  int nearest = -1;
  double best = 1e18;
  for (int i = 0; i < 2; ++i) {
    const double d = distance(ns.gripper, s.rods[i]);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  if (nearest >= 0 && best <= s.scene->rod_length / 2.0) {
    ns.held = WorldState::Grasp{nearest, a.theta[3]};
    ns.gripper_open_width = s.scene->rod_width;
  }
  return ns;
}

/// The container rectangle a drop near `s` can collide with, if any.
const Rect* container_rect(const Scene& sc) {
  if (sc.has_box) return &sc.box;
  if (sc.has_drawer) return &sc.chest;
  return nullptr;
}

bool rod_crosses_walls(const Pose2& rod, double length, const Rect& container) {
  const double ux = std::cos(rod.yaw), uy = std::sin(rod.yaw);
  const double h = length / 2.0;
  return segment_crosses_rect_boundary(rod.x - h * ux, rod.y - h * uy,
                                       rod.x + h * ux, rod.y + h * uy,
                                       container);
}

/// Landing pose of the pivoted rod before any wall interaction.
Pose2 pivoted_landing(const WorldState& s, const SkillAction& a,
                      const DynamicsConstants& dc) {
  const auto& grasp = *s.held;
  const Pose2& rod = s.rods[grasp.rod_index];
  const double sign = grasp.grasp_offset >= 0.0 ? 1.0 : -1.0;
  const double yaw = normalize_yaw(rod.yaw + sign * dc.pivot_angle);
  const double shift =
      dc.pivot_shift_slope * (std::abs(grasp.grasp_offset) - dc.pivot_offset);
  double dx = a.theta[0] - s.gripper.x;
  double dy = a.theta[1] - s.gripper.y;
  const double n = std::hypot(dx, dy);
  if (n > 1e-9) {
    dx /= n;
    dy /= n;
  } else {
    dx = 1.0;
    dy = 0.0;
  }
  const double ux = std::cos(yaw), uy = std::sin(yaw);
  Pose2 out;
  out.x = a.theta[0] - grasp.grasp_offset * ux - shift * dx;
  out.y = a.theta[1] - grasp.grasp_offset * uy - shift * dy;
  out.yaw = yaw;
  return out;
}

Pose2 settle_outside(Pose2 rod, double length, const Rect& container) {
  double dx = rod.x - container.cx();
  double dy = rod.y - container.cy();
  const double n = std::hypot(dx, dy);
  if (n > 1e-9) {
    dx /= n;
    dy /= n;
  } else {
    dx = 1.0;
    dy = 0.0;
  }
  for (int i = 0; i < 400; ++i) {
    if (!rod_crosses_walls(rod, length, container) &&
        !container.contains(rod.x, rod.y)) {
      break;
    }
    rod.x += 0.25 * dx;
    rod.y += 0.25 * dy;
  }
  return rod;
}

enum class SimMode { GroundTruth, FineSimulator };

WorldState lift_and_drop_impl(const WorldState& s, const SkillAction& a,
                              const DynamicsConstants& dc, SimMode mode) {
  const auto grasp = *s.held;
  const Pose2& rod = s.rods[grasp.rod_index];
  const double off = grasp.grasp_offset;
  WorldState ns = s;
  ns.gripper.x = a.theta[0];
  ns.gripper.y = a.theta[1];
  ns.gripper_open_width = 5.0;
  ns.held.reset();

  if (std::abs(off) > dc.drop_offset) {
    // Rod slips out halfway through the transport.
    ns.rods[grasp.rod_index].x = 0.5 * (s.gripper.x + a.theta[0]);
    ns.rods[grasp.rod_index].y = 0.5 * (s.gripper.y + a.theta[1]);
    return ns;
  }
  if (std::abs(off) > dc.pivot_offset) {
    Pose2 landing = pivoted_landing(s, a, dc);
    const Rect* container = container_rect(*s.scene);
    if (container &&
        rod_crosses_walls(landing, s.scene->rod_length, *container)) {
      if (mode == SimMode::FineSimulator) {
        // Miscalibration: the simulator lets the rod slide over the wall
        // and come to rest inside.
        const Rect inner = container->shrunk(1.0);
        landing.x = std::clamp(landing.x, inner.xmin, inner.xmax);
        landing.y = std::clamp(landing.y, inner.ymin, inner.ymax);
      } else {
        landing = settle_outside(landing, s.scene->rod_length, *container);
      }
    }
    ns.rods[grasp.rod_index] = landing;
    return ns;
  }
  // Within the pivot threshold the recorded grasp offset carries over exactly.
  const double ux = std::cos(rod.yaw), uy = std::sin(rod.yaw);
  ns.rods[grasp.rod_index].x = a.theta[0] - off * ux;
  ns.rods[grasp.rod_index].y = a.theta[1] - off * uy;
  return ns;
}

bool in_contact_band(const Pose2& gripper, const Rect& drawer,
                     const DynamicsConstants& dc) {
  return gripper.x >= drawer.xmin && gripper.x <= drawer.xmax &&
         gripper.y >= drawer.ymin - 0.5 &&
         gripper.y <= drawer.ymin + dc.contact_band + 0.5;
}

WorldState open_drawer_ground_truth(const WorldState& s, const SkillAction& a,
                                    const DynamicsConstants& dc) {
  WorldState ns = s;
  const Rect drawer = s.scene->drawer_at(s.drawer_open);
  const Pose2 contact = drawer_contact_pose(s, dc);
  ns.gripper = contact;
  if (!in_contact_band(contact, drawer, dc)) {
    return ns;
  }
  const double delta =
      std::clamp(a.theta[0], 0.0, s.scene->drawer_limit - s.drawer_open);
  ns.drawer_open = s.drawer_open + delta;
  ns.gripper.y = contact.y - delta;
  for (int i = 0; i < 2; ++i) {
    if (drawer.contains(s.rods[i].x, s.rods[i].y)) {
      ns.rods[i].y -= delta;
    }
  }
  return ns;
}

}  // namespace

WorldState ground_truth(const WorldState& s, const SkillAction& a,
                        const DynamicsConstants& dc) {
  require_precondition(s, a);
  switch (a.skill) {
    case Skill::Pick:
      return kinematic_pick(s, a);
    case Skill::LiftAndDrop:
      return lift_and_drop_impl(s, a, dc, SimMode::GroundTruth);
    case Skill::OpenDrawer:
      return open_drawer_ground_truth(s, a, dc);
  }
  throw std::logic_error("unreachable");
}

WorldState analytical_pick_place(const WorldState& s, const SkillAction& a,
                                 const DynamicsConstants& dc) {
  require_precondition(s, a);
  switch (a.skill) {
    case Skill::Pick:
      return kinematic_pick(s, a);
    case Skill::LiftAndDrop: {
      // Rigid attachment: the recorded grasp transform is applied at the goal
      // no matter how far off-center the grasp is.
      const auto grasp = *s.held;
      const Pose2& rod = s.rods[grasp.rod_index];
      WorldState ns = s;
      ns.gripper.x = a.theta[0];
      ns.gripper.y = a.theta[1];
      ns.gripper_open_width = 5.0;
      ns.held.reset();
      const double ux = std::cos(rod.yaw), uy = std::sin(rod.yaw);
      ns.rods[grasp.rod_index].x = a.theta[0] - grasp.grasp_offset * ux;
      ns.rods[grasp.rod_index].y = a.theta[1] - grasp.grasp_offset * uy;
      return ns;
    }
    case Skill::OpenDrawer: {
      // Out of scope for this model: the gripper moves, the drawer does not.
      WorldState ns = s;
      const Pose2 contact = drawer_contact_pose(s, dc);
      ns.gripper = contact;
      ns.gripper.y = contact.y - a.theta[0];
      return ns;
    }
  }
  throw std::logic_error("unreachable");
}

WorldState analytical_drawer(const WorldState& s, const SkillAction& a,
                             const DynamicsConstants& dc) {
  require_precondition(s, a);
  switch (a.skill) {
    case Skill::Pick:
      return kinematic_pick(s, a);
    case Skill::LiftAndDrop: {
      // Rod-gripper interaction is out of scope: only the gripper moves.
      WorldState ns = s;
      ns.gripper.x = a.theta[0];
      ns.gripper.y = a.theta[1];
      ns.gripper_open_width = 5.0;
      ns.held.reset();
      return ns;
    }
    case Skill::OpenDrawer: {
      WorldState ns = s;
      const Rect drawer = s.scene->drawer_at(s.drawer_open);
      const Pose2 contact = drawer_contact_pose(s, dc);
      ns.gripper = contact;
      if (in_contact_band(contact, drawer, dc)) {
        // No joint limit in this model.
        ns.drawer_open = s.drawer_open + a.theta[0];
        ns.gripper.y = contact.y - a.theta[0];
      }
      return ns;
    }
  }
  throw std::logic_error("unreachable");
}

WorldState fine_simulator(const WorldState& s, const SkillAction& a,
                          const DynamicsConstants& dc) {
  require_precondition(s, a);
  if (a.skill == Skill::LiftAndDrop) {
    return lift_and_drop_impl(s, a, dc, SimMode::FineSimulator);
  }
  return ground_truth(s, a, dc);
}

bool in_sim_miscalibration_region(const WorldState& s, const SkillAction& a,
                                  const DynamicsConstants& dc) {
  if (a.skill != Skill::LiftAndDrop || !s.held) return false;
  const double off = std::abs(s.held->grasp_offset);
  if (off <= dc.pivot_offset || off > dc.drop_offset) return false;
  const Rect* container = container_rect(*s.scene);
  if (!container) return false;
  return rod_crosses_walls(pivoted_landing(s, a, dc), s.scene->rod_length,
                           *container);
}

std::vector<TransitionModel> make_models(TaskName task,
                                         const DynamicsConstants& dc) {
  auto fwd = [dc](auto fn) {
    return [dc, fn](const WorldState& s, const SkillAction& a) {
      return fn(s, a, dc);
    };
  };
  std::vector<TransitionModel> models;
  models.push_back({0, "simulator", dc.eval_cost_simulator,
                    fwd(&fine_simulator)});
  if (task == TaskName::RodInDrawer) {
    models.push_back({1, "analytical_drawer", dc.eval_cost_analytical_drawer,
                      fwd(&analytical_drawer)});
    models.push_back({2, "analytical_pick_place",
                      dc.eval_cost_analytical_pick_place,
                      fwd(&analytical_pick_place)});
  } else {
    models.push_back({1, "analytical_pick_place",
                      dc.eval_cost_analytical_pick_place,
                      fwd(&analytical_pick_place)});
  }
  return models;
}

std::vector<TransitionModel> all_models(const DynamicsConstants& dc) {
  return make_models(TaskName::RodInDrawer, dc);
}

bool TaskSpec::goal(const WorldState& s) const {
  const Pose2& rod = s.rods[target_rod];
  if (name == TaskName::RodInBox) {
    return scene->box.contains(rod.x, rod.y);
  }
  if (s.drawer_open < scene->min_open) return false;
  const Rect exposed = scene->drawer_exposed(s.drawer_open);
  return !exposed.empty() && exposed.contains(rod.x, rod.y);
}

double TaskSpec::heuristic(const WorldState& s) const {
  if (goal(s)) return 0.0;
  const Pose2& rod = s.rods[target_rod];
  double h = distance(rod.x, rod.y, goal_center_x, goal_center_y);
  if (name == TaskName::RodInDrawer) {
    h += std::max(0.0, scene->min_open - s.drawer_open);
  }
  return h;
}

std::vector<Skill> TaskSpec::skills() const {
  if (name == TaskName::RodInBox) {
    return {Skill::Pick, Skill::LiftAndDrop};
  }
  return {Skill::Pick, Skill::LiftAndDrop, Skill::OpenDrawer};
}

std::vector<SkillAction> TaskSpec::generate_params(const WorldState& s,
                                                   Skill skill,
                                                   std::uint64_t rng_seed) const {
  std::vector<SkillAction> out;
  std::mt19937_64 rng(rng_seed);
  switch (skill) {
    case Skill::Pick: {
      const double end = scene->rod_length / 2.0 - dynamics.grasp_end_margin;
      for (int rod = 0; rod < 2; ++rod) {
        for (double off : {-end, 0.0, end}) {
          const Pose2& r = s.rods[rod];
          const double ux = std::cos(r.yaw), uy = std::sin(r.yaw);
          SkillAction a;
          a.skill = Skill::Pick;
          a.theta = {r.x + off * ux, r.y + off * uy, r.yaw, off};
          if (scene->workspace.contains(a.theta[0], a.theta[1])) {
            out.push_back(std::move(a));
          }
        }
      }
      break;
    }
    case Skill::LiftAndDrop: {
      Rect goal_rect = name == TaskName::RodInBox
                           ? scene->box
                           : scene->drawer_exposed(
                                 std::max(s.drawer_open, scene->min_open));
      goal_rect = goal_rect.shrunk(dynamics.drop_target_margin);
      if (goal_rect.empty()) break;
      std::uniform_real_distribution<double> ux(goal_rect.xmin, goal_rect.xmax);
      std::uniform_real_distribution<double> uy(goal_rect.ymin, goal_rect.ymax);
      for (int i = 0; i < samples_per_skill; ++i) {
        SkillAction a;
        a.skill = Skill::LiftAndDrop;
        const double x = ux(rng);
        const double y = uy(rng);
        a.theta = {x, y};
        out.push_back(std::move(a));
      }
      break;
    }
    case Skill::OpenDrawer: {
      if (!scene->has_drawer) break;
      std::uniform_real_distribution<double> uo(dynamics.y_open_min,
                                                dynamics.y_open_max);
      for (int i = 0; i < samples_per_skill; ++i) {
        SkillAction a;
        a.skill = Skill::OpenDrawer;
        a.theta = {uo(rng)};
        out.push_back(std::move(a));
      }
      break;
    }
  }
  return out;
}

std::vector<SkillAction> TaskSpec::applicable_actions(
    const WorldState& s, std::uint64_t rng_seed) const {
  std::vector<SkillAction> out;
  int skill_index = 0;
  for (Skill sk : skills()) {
    for (auto& a :
         generate_params(s, sk, mix_seed(rng_seed, 0x51ull + skill_index))) {
      if (skill_precondition(s, a)) {
        out.push_back(std::move(a));
      }
    }
    ++skill_index;
  }
  return out;
}

TaskSpec make_task(TaskName name, int target_rod, const Config& cfg) {
  TaskSpec task;
  task.name = name;
  task.target_rod = target_rod;
  task.scene = std::make_shared<Scene>(make_scene(name, cfg));
  task.dynamics = DynamicsConstants::from_config(cfg);
  if (name == TaskName::RodInBox) {
    task.samples_per_skill =
        int(cfg.get_int("world.samples_per_skill_box", 5));
    task.d_max = {{Skill::Pick, cfg.get_double("planner.d_max.box.pick", 3.0)},
                  {Skill::LiftAndDrop,
                   cfg.get_double("planner.d_max.box.lift_and_drop", 8.0)}};
    task.goal_center_x = task.scene->box.cx();
    task.goal_center_y = task.scene->box.cy();
  } else {
    task.samples_per_skill =
        int(cfg.get_int("world.samples_per_skill_drawer", 3));
    task.d_max = {
        {Skill::Pick, cfg.get_double("planner.d_max.drawer.pick", 3.0)},
        {Skill::LiftAndDrop,
         cfg.get_double("planner.d_max.drawer.lift_and_drop", 5.0)},
        {Skill::OpenDrawer,
         cfg.get_double("planner.d_max.drawer.open_drawer", 6.0)}};
    const Rect goal_rect = task.scene->drawer_exposed(task.scene->min_open);
    task.goal_center_x = goal_rect.cx();
    task.goal_center_y = goal_rect.cy();
  }
  return task;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace mfp
