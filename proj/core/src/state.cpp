#include "mfp/state.hpp"

#include <stdexcept>

namespace mfp {

const char* skill_name(Skill s) {
  switch (s) {
    case Skill::Pick: return "Pick";
    case Skill::LiftAndDrop: return "LiftAndDrop";
    case Skill::OpenDrawer: return "OpenDrawer";
  }
  return "?";
}

Skill skill_from_name(const std::string& name) {
  if (name == "Pick") return Skill::Pick;
  if (name == "LiftAndDrop") return Skill::LiftAndDrop;
  if (name == "OpenDrawer") return Skill::OpenDrawer;
  throw std::invalid_argument("unknown skill name: " + name);
}

int skill_arity(Skill s) {
  switch (s) {
    case Skill::Pick: return 4;
    case Skill::LiftAndDrop: return 2;
    case Skill::OpenDrawer: return 1;
  }
  return 0;
}

bool WorldState::same_scene(const WorldState& other) const {
  if (scene == other.scene) return true;
  if (!scene || !other.scene) return false;
  return *scene == *other.scene;
}

double state_distance(const WorldState& s1, const WorldState& s2) {
  if (!s1.same_scene(s2)) {
    throw std::invalid_argument("state_distance: mismatched scene constants");
  }
  double d = 0.0;
  for (int i = 0; i < 2; ++i) {
    d += distance(s1.rods[i], s2.rods[i]);
  }
  d += std::abs(s1.drawer_open - s2.drawer_open);
  return d;
}

}  // namespace mfp
