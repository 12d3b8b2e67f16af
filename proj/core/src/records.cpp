#include "mfp/records.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace mfp {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void Record::add(const std::string& key, const std::string& value) {
  fields.emplace_back(key, value);
}

void Record::add(const std::string& key, double value) {
  fields.emplace_back(key, format_g6(value));
}

void Record::add(const std::string& key, std::int64_t value) {
  fields.emplace_back(key, std::to_string(value));
}

bool Record::has(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Record::get(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw std::invalid_argument("record '" + type + "': missing field " + key);
}

double Record::get_double(const std::string& key) const {
  return std::strtod(get(key).c_str(), nullptr);
}

std::int64_t Record::get_int(const std::string& key) const {
  return std::strtoll(get(key).c_str(), nullptr, 10);
}

std::string format_record(const Record& rec) {
  std::string out = rec.type;
  for (const auto& [k, v] : rec.fields) {
    out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

Record parse_record(const std::string& line) {
  Record rec;
  std::istringstream is(line);
  if (!(is >> rec.type)) {
    throw std::invalid_argument("empty record line");
  }
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("malformed record field: " + tok);
    }
    rec.fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return rec;
}

Record scene_to_record(const Scene& s) {
  Record rec;
  rec.type = "scene";
  rec.add("rod_length", s.rod_length);
  rec.add("rod_width", s.rod_width);
  rec.add("workspace", s.workspace.xmin);
  rec.fields.back().second = format_g6(s.workspace.xmin) + "," +
                             format_g6(s.workspace.ymin) + "," +
                             format_g6(s.workspace.xmax) + "," +
                             format_g6(s.workspace.ymax);
  rec.add("has_box", std::int64_t(s.has_box ? 1 : 0));
  rec.add("box", format_g6(s.box.xmin) + "," + format_g6(s.box.ymin) + "," +
                     format_g6(s.box.xmax) + "," + format_g6(s.box.ymax));
  rec.add("has_drawer", std::int64_t(s.has_drawer ? 1 : 0));
  rec.add("chest", format_g6(s.chest.xmin) + "," + format_g6(s.chest.ymin) +
                       "," + format_g6(s.chest.xmax) + "," +
                       format_g6(s.chest.ymax));
  rec.add("drawer_closed",
          format_g6(s.drawer_closed.xmin) + "," +
              format_g6(s.drawer_closed.ymin) + "," +
              format_g6(s.drawer_closed.xmax) + "," +
              format_g6(s.drawer_closed.ymax));
  rec.add("drawer_limit", s.drawer_limit);
  rec.add("min_open", s.min_open);
  return rec;
}

namespace {
Rect parse_rect(const std::string& v) {
  Rect r;
  if (std::sscanf(v.c_str(), "%lf,%lf,%lf,%lf", &r.xmin, &r.ymin, &r.xmax,
                  &r.ymax) != 4) {
    throw std::invalid_argument("malformed rect: " + v);
  }
  return r;
}
}  // namespace

Scene scene_from_record(const Record& rec) {
  Scene s;
  s.rod_length = rec.get_double("rod_length");
  s.rod_width = rec.get_double("rod_width");
  s.workspace = parse_rect(rec.get("workspace"));
  s.has_box = rec.get_int("has_box") != 0;
  s.box = parse_rect(rec.get("box"));
  s.has_drawer = rec.get_int("has_drawer") != 0;
  s.chest = parse_rect(rec.get("chest"));
  s.drawer_closed = parse_rect(rec.get("drawer_closed"));
  s.drawer_limit = rec.get_double("drawer_limit");
  s.min_open = rec.get_double("min_open");
  return s;
}

void append_state_fields(Record& rec, const std::string& prefix,
                         const WorldState& s) {
  rec.add(prefix + "gripper.x", s.gripper.x);
  rec.add(prefix + "gripper.y", s.gripper.y);
  rec.add(prefix + "gripper.yaw", s.gripper.yaw);
  rec.add(prefix + "gripper_open_width", s.gripper_open_width);
  rec.add(prefix + "held.rod_index",
          std::int64_t(s.held ? s.held->rod_index : -1));
  rec.add(prefix + "held.grasp_offset", s.held ? s.held->grasp_offset : 0.0);
  for (int i = 0; i < 2; ++i) {
    const std::string p = prefix + "rods." + std::to_string(i) + ".";
    rec.add(p + "x", s.rods[i].x);
    rec.add(p + "y", s.rods[i].y);
    rec.add(p + "yaw", s.rods[i].yaw);
  }
  rec.add(prefix + "drawer_open", s.drawer_open);
}

WorldState state_from_fields(const Record& rec, const std::string& prefix,
                             std::shared_ptr<const Scene> scene) {
  WorldState s;
  s.gripper.x = rec.get_double(prefix + "gripper.x");
  s.gripper.y = rec.get_double(prefix + "gripper.y");
  s.gripper.yaw = rec.get_double(prefix + "gripper.yaw");
  s.gripper_open_width = rec.get_double(prefix + "gripper_open_width");
  const auto rod_index = rec.get_int(prefix + "held.rod_index");
  if (rod_index >= 0) {
    s.held = WorldState::Grasp{int(rod_index),
                               rec.get_double(prefix + "held.grasp_offset")};
  }
  for (int i = 0; i < 2; ++i) {
    const std::string p = prefix + "rods." + std::to_string(i) + ".";
    s.rods[i].x = rec.get_double(p + "x");
    s.rods[i].y = rec.get_double(p + "y");
    s.rods[i].yaw = rec.get_double(p + "yaw");
  }
  s.drawer_open = rec.get_double(prefix + "drawer_open");
  s.scene = std::move(scene);
  return s;
}

void append_action_fields(Record& rec, const std::string& prefix,
                          const SkillAction& a) {
  rec.add(prefix + "skill", std::string(skill_name(a.skill)));
  std::string t;
  for (std::size_t i = 0; i < a.theta.size(); ++i) {
    if (i) t += ',';
    t += format_g6(a.theta[i]);
  }
  rec.add(prefix + "theta", t);
}

SkillAction action_from_fields(const Record& rec, const std::string& prefix) {
  SkillAction a;
  a.skill = skill_from_name(rec.get(prefix + "skill"));
  const std::string& t = rec.get(prefix + "theta");
  std::size_t pos = 0;
  while (pos < t.size()) {
    std::size_t next = t.find(',', pos);
    if (next == std::string::npos) next = t.size();
    a.theta.push_back(std::strtod(t.substr(pos, next - pos).c_str(), nullptr));
    pos = next + 1;
  }
  if (int(a.theta.size()) != skill_arity(a.skill)) {
    throw std::invalid_argument("action theta arity mismatch");
  }
  return a;
}

Record transition_to_record(const Transition& t) {
  Record rec;
  rec.type = "transition";
  rec.add("episode_id", t.episode_id);
  rec.add("step", std::int64_t(t.step));
  append_state_fields(rec, "s.", t.s);
  append_action_fields(rec, "a.", t.a);
  append_state_fields(rec, "s_next.", t.s_next);
  return rec;
}

Transition transition_from_record(const Record& rec,
                                  std::shared_ptr<const Scene> scene) {
  Transition t;
  t.episode_id = rec.get_int("episode_id");
  t.step = int(rec.get_int("step"));
  t.s = state_from_fields(rec, "s.", scene);
  t.a = action_from_fields(rec, "a.");
  t.s_next = state_from_fields(rec, "s_next.", scene);
  return t;
}

}  // namespace mfp
