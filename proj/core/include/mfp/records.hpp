#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mfp/state.hpp"

namespace mfp {

/// Formats a double with 6 significant digits, the precision used by every
/// text artifact (transition logs, reports). Stable under re-parsing.
std::string format_g6(double v);

/// One line of a structured text log: a type token followed by ordered
/// key=value fields. Values never contain whitespace.
struct Record {
  std::string type;
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::int64_t value);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
};

std::string format_record(const Record& rec);
Record parse_record(const std::string& line);

Record scene_to_record(const Scene& scene);
Scene scene_from_record(const Record& rec);

void append_state_fields(Record& rec, const std::string& prefix,
                         const WorldState& s);
WorldState state_from_fields(const Record& rec, const std::string& prefix,
                             std::shared_ptr<const Scene> scene);

void append_action_fields(Record& rec, const std::string& prefix,
                          const SkillAction& a);
SkillAction action_from_fields(const Record& rec, const std::string& prefix);

Record transition_to_record(const Transition& t);
Transition transition_from_record(const Record& rec,
                                  std::shared_ptr<const Scene> scene);

}  // namespace mfp
