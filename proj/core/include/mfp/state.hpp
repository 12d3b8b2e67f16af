#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfp/geometry.hpp"

namespace mfp {

/// Immutable scene constants shared by every state of an episode.
struct Scene {
  double rod_length = 18.5;
  double rod_width = 2.3;
  Rect workspace{0.0, 0.0, 60.0, 50.0};

  bool has_box = false;
  Rect box{44.0, 36.0, 52.0, 44.0};

  bool has_drawer = false;
  Rect chest{18.0, 34.0, 46.0, 50.0};
  Rect drawer_closed{20.0, 36.0, 44.0, 48.0};
  double drawer_limit = 17.0;  // prismatic joint limit, cm
  double min_open = 10.0;      // opening required to place a rod

  bool operator==(const Scene&) const = default;

  /// Drawer rectangle at the given opening (the drawer slides along -y).
  Rect drawer_at(double open) const { return drawer_closed.translated(0.0, -open); }

  /// Part of the drawer sticking out in front of the chest at this opening.
  Rect drawer_exposed(double open) const {
    Rect d = drawer_at(open);
    d.ymax = std::min(d.ymax, chest.ymin);
    return d;
  }
};

enum class Skill { Pick, LiftAndDrop, OpenDrawer };

const char* skill_name(Skill s);
Skill skill_from_name(const std::string& name);

/// Number of continuous parameters for each skill.
int skill_arity(Skill s);

/// Parameterized skill instance. Layouts:
///   Pick:        [x_d, y_d, yaw_d, grasp_offset]
///   LiftAndDrop: [x_d, y_d]
///   OpenDrawer:  [y_open]
struct SkillAction {
  Skill skill = Skill::Pick;
  std::vector<double> theta;

  bool operator==(const SkillAction&) const = default;
};

struct WorldState {
  struct Grasp {
    int rod_index = 0;         // 0 or 1
    double grasp_offset = 0.0; // cm along the rod axis from its center
    bool operator==(const Grasp&) const = default;
  };

  Pose2 gripper;
  double gripper_open_width = 5.0;
  std::optional<Grasp> held;
  std::array<Pose2, 2> rods;
  double drawer_open = 0.0;
  std::shared_ptr<const Scene> scene;

  bool same_scene(const WorldState& other) const;
};

struct Transition {
  WorldState s;
  SkillAction a;
  WorldState s_next;
  std::int64_t episode_id = 0;
  int step = 0;
};

/// Positional pseudometric between states: summed rod center distances plus
/// the drawer opening difference. Yaw does not contribute.
double state_distance(const WorldState& s1, const WorldState& s2);

}  // namespace mfp
