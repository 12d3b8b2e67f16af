#include "mfp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace mfp {

bool ModelPreconditions::in_precondition(int model_index, const WorldState& s,
                                         const SkillAction& a) const {
  if (deviation.empty()) return true;
  const auto& fn = deviation.at(std::size_t(model_index));
  if (!fn) return true;
  const auto it = d_max.find(a.skill);
  if (it == d_max.end()) return false;
  return fn(s, a) < it->second;
}

std::string mde_key(Skill skill, const std::string& model_name) {
  return std::string(skill_name(skill)) + "|" + model_name;
}

ModelPreconditions preconditions_from_mdes(
    const std::vector<TransitionModel>& models,
    const std::map<std::string, MdeModel>& mdes, const FeatureContext& ctx,
    const std::map<Skill, double>& d_max) {
  ModelPreconditions pre;
  pre.d_max = d_max;
  pre.deviation.resize(models.size());
  const auto shared =
      std::make_shared<const std::map<std::string, MdeModel>>(mdes);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string name = models[i].name;
    pre.deviation[i] = [name, shared, ctx](const WorldState& s,
                                           const SkillAction& a) {
      const auto& mdes = *shared;
      const auto it = mdes.find(mde_key(a.skill, name));
      if (it == mdes.end()) {
        return std::numeric_limits<double>::infinity();
      }
      return predict_deviation(it->second, s, a, ctx);
    };
  }
  return pre;
}

PlannerConfig PlannerConfig::from_config(const Config& cfg, TaskName task) {
  PlannerConfig pc;
  const bool box = task == TaskName::RodInBox;
  pc.epsilon = cfg.get_double(
      box ? "planner.epsilon.box" : "planner.epsilon.drawer", box ? 5.0 : 10.0);
  pc.weights = cfg.get_doubles(
      box ? "planner.weights.box" : "planner.weights.drawer",
      box ? std::vector<double>{10.0, 1.0} : std::vector<double>{10.0, 1.1, 1.0});
  pc.time_budget_s = cfg.get_double("planner.time_budget_s", pc.time_budget_s);
  pc.expansion_budget =
      cfg.get_int("planner.expansion_budget", pc.expansion_budget);
  pc.pos_resolution = cfg.get_double("planner.pos_resolution", pc.pos_resolution);
  pc.yaw_resolution = cfg.get_double("planner.yaw_resolution", pc.yaw_resolution);
  pc.drawer_resolution =
      cfg.get_double("planner.drawer_resolution", pc.drawer_resolution);
  return pc;
}

const char* plan_status_str(PlanStatus s) {
  switch (s) {
    case PlanStatus::Found: return "Found";
    case PlanStatus::Timeout: return "Timeout";
    case PlanStatus::Exhausted: return "Exhausted";
  }
  return "?";
}

int choose_queue(const std::vector<double>& min_keys,
                 const std::vector<double>& weights) {
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < min_keys.size(); ++i) {
    if (!std::isfinite(min_keys[i])) continue;
    const double value = weights[i] * min_keys[i];
    if (best < 0 || value <= best_value) {
      best = int(i);
      best_value = value;
    }
  }
  return best;
}

std::string planner_state_key(const WorldState& s, const PlannerConfig& cfg) {
  auto q = [](double v, double res) {
    return std::int64_t(std::llround(v / res));
  };
  std::string key;
  key.reserve(96);
  auto push = [&key](std::int64_t v) {
    key += std::to_string(v);
    key += ',';
  };
  push(q(s.gripper.x, cfg.pos_resolution));
  push(q(s.gripper.y, cfg.pos_resolution));
  push(q(s.gripper.yaw, cfg.yaw_resolution));
  push(s.held ? s.held->rod_index : -1);
  push(s.held ? q(s.held->grasp_offset, cfg.pos_resolution) : 0);
  for (const auto& rod : s.rods) {
    push(q(rod.x, cfg.pos_resolution));
    push(q(rod.y, cfg.pos_resolution));
    push(q(rod.yaw, cfg.yaw_resolution));
  }
  push(q(s.drawer_open, cfg.drawer_resolution));
  return key;
}

std::uint64_t planner_action_seed(const PlannerConfig& cfg,
                                  const std::string& state_key) {
  return mix_seed(cfg.seed, std::hash<std::string>{}(state_key));
}

namespace {

struct Node {
  WorldState state;
  double g = kInfiniteCost;
  std::string parent_key;
  SkillAction parent_action;
  int parent_model = -1;
  bool has_parent = false;
  std::vector<SkillAction> a_inc;
  bool params_generated = false;
  std::vector<char> closed;
};

struct OpenEntry {
  double f = 0.0;
  double g = 0.0;
  std::uint64_t seq = 0;
  std::string key;
};

struct EntryOrder {
  // Min f first; f ties prefer larger g (deeper nodes), then FIFO.
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.seq > b.seq;
  }
};

using OpenQueue = std::priority_queue<OpenEntry, std::vector<OpenEntry>, EntryOrder>;

struct SearchMode {
  bool anchor_only = false;
  int single_model = -1;
  bool random_model = false;
  std::uint64_t random_seed = 0;
};

class Search {
 public:
  Search(const WorldState& start, const TaskSpec& task,
         const std::vector<TransitionModel>& models,
         const ModelPreconditions& pre, const PlannerConfig& cfg,
         SearchMode mode)
      : task_(task), models_(models), pre_(pre), cfg_(cfg), mode_(mode),
        rng_(mix_seed(mode.random_seed, 0x72616e64ull)) {
    n_queues_ = mode_.anchor_only ? 1 : int(models_.size());
    open_.resize(std::size_t(n_queues_));
    if (int(cfg_.weights.size()) < n_queues_) {
      throw std::invalid_argument("planner weights shorter than model list");
    }
    result_.per_model_evals.assign(models_.size(), 0);

    const std::string key = planner_state_key(start, cfg_);
    Node& node = get_node(key);
    node.state = start;
    node.g = 0.0;
    node.closed.assign(std::size_t(n_queues_), 0);
    push_open(key, node, -1);
  }

  PlanResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> min_keys(static_cast<std::size_t>(n_queues_), 0.0);
    while (true) {
      if (result_.expansions >= cfg_.expansion_budget ||
          elapsed_s(t0) > cfg_.time_budget_s) {
        result_.status = PlanStatus::Timeout;
        break;
      }
      for (int i = 0; i < n_queues_; ++i) {
        purge_stale(i);
        min_keys[std::size_t(i)] =
            open_[std::size_t(i)].empty()
                ? std::numeric_limits<double>::infinity()
                : open_[std::size_t(i)].top().f;
      }
      const int qi = choose_queue(min_keys, cfg_.weights);
      if (qi < 0) {
        result_.status = PlanStatus::Exhausted;
        break;
      }
      const OpenEntry entry = open_[std::size_t(qi)].top();
      open_[std::size_t(qi)].pop();
      Node& node = nodes_.at(entry.key);
      if (task_.goal(node.state)) {
        reconstruct(entry.key);
        result_.status = PlanStatus::Found;
        break;
      }
      ++result_.expansions;
      expand(entry.key, qi);
    }
    result_.wall_time_s = elapsed_s(t0);
    return std::move(result_);
  }

 private:
  static double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  Node& get_node(const std::string& key) {
    auto [it, inserted] = nodes_.try_emplace(key);
    if (inserted) {
      it->second.closed.assign(std::size_t(n_queues_), 0);
    }
    return it->second;
  }

  void push_open(const std::string& key, const Node& node, int only_queue) {
    const double f = node.g + cfg_.epsilon * task_.heuristic(node.state);
    for (int i = 0; i < n_queues_; ++i) {
      if (only_queue >= 0 && i != only_queue) continue;
      if (node.closed[std::size_t(i)]) continue;
      open_[std::size_t(i)].push(OpenEntry{f, node.g, seq_++, key});
    }
  }

  void purge_stale(int qi) {
    auto& q = open_[std::size_t(qi)];
    while (!q.empty()) {
      const OpenEntry& top = q.top();
      const Node& node = nodes_.at(top.key);
      if (node.closed[std::size_t(qi)] || top.g != node.g) {
        q.pop();
        continue;
      }
      break;
    }
  }

  /// Model chosen for an edge under the active mode, or -1 for "edge does
  /// not exist". Prioritized selection walks from the fastest model down.
  int select_model(const WorldState& s, const SkillAction& a) {
    if (mode_.single_model >= 0) return mode_.single_model;
    if (mode_.random_model) {
      std::vector<int> candidates;
      for (int i = int(models_.size()) - 1; i >= 0; --i) {
        if (pre_.in_precondition(i, s, a)) candidates.push_back(i);
      }
      if (candidates.empty()) return -1;
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      return candidates[pick(rng_)];
    }
    for (int i = int(models_.size()) - 1; i >= 0; --i) {
      if (pre_.in_precondition(i, s, a)) return i;
    }
    return -1;
  }

  WorldState evaluate(const WorldState& s, const SkillAction& a, int model) {
    ++result_.per_model_evals[std::size_t(model)];
    result_.weighted_eval_cost += models_[std::size_t(model)].eval_cost;
    return models_[std::size_t(model)].forward(s, a);
  }

  std::vector<SkillAction> actions_for(const std::string& key, Node& node) {
    if (node.params_generated) {
      return std::move(node.a_inc);
    }
    node.params_generated = true;
    return task_.applicable_actions(node.state,
                                    planner_action_seed(cfg_, key));
  }

  void expand(const std::string& key, int qi) {
    Node& node = nodes_.at(key);
    std::vector<SkillAction> actions = actions_for(key, node);
    node.a_inc.clear();
    const bool full = qi == 0;
    const WorldState parent_state = node.state;
    const double parent_g = node.g;

    std::vector<SkillAction> deferred;
    for (const auto& a : actions) {
      int model;
      if (full) {
        model = select_model(parent_state, a);
        if (model < 0) continue;  // no model is trusted: the edge is absent
      } else {
        if (!pre_.in_precondition(qi, parent_state, a)) {
          deferred.push_back(a);
          continue;
        }
        model = qi;
      }
      const WorldState succ = evaluate(parent_state, a, model);
      relax(key, parent_g, parent_state, a, model, succ);
    }

    Node& node_after = nodes_.at(key);
    if (full) {
      // Fully expanded in the anchor search: closed everywhere.
      std::fill(node_after.closed.begin(), node_after.closed.end(), 1);
    } else {
      node_after.a_inc = std::move(deferred);
      node_after.closed[std::size_t(qi)] = 1;
    }
  }

  void relax(const std::string& parent_key, double parent_g,
             const WorldState& parent_state, const SkillAction& a, int model,
             const WorldState& succ) {
    const double g_new = parent_g + edge_cost(parent_state, a, task_.dynamics);
    const std::string key = planner_state_key(succ, cfg_);
    Node& node = get_node(key);
    if (g_new < node.g - 1e-12) {
      if (node.g == kInfiniteCost) {
        node.state = succ;
      }
      node.g = g_new;
      node.parent_key = parent_key;
      node.parent_action = a;
      node.parent_model = model;
      node.has_parent = true;
      push_open(key, node, -1);
    }
  }

  void reconstruct(const std::string& goal_key) {
    std::vector<std::string> chain{goal_key};
    std::string key = goal_key;
    while (nodes_.at(key).has_parent) {
      key = nodes_.at(key).parent_key;
      chain.push_back(key);
    }
    std::reverse(chain.begin(), chain.end());
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const Node& node = nodes_.at(chain[i]);
      result_.predicted_states.push_back(node.state);
      if (i + 1 < chain.size()) {
        result_.actions.push_back(nodes_.at(chain[i + 1]).parent_action);
      }
    }
    result_.cost = nodes_.at(goal_key).g;
  }

  const TaskSpec& task_;
  const std::vector<TransitionModel>& models_;
  const ModelPreconditions& pre_;
  const PlannerConfig& cfg_;
  SearchMode mode_;
  int n_queues_ = 1;
  std::unordered_map<std::string, Node> nodes_;
  std::vector<OpenQueue> open_;
  std::uint64_t seq_ = 0;
  std::mt19937_64 rng_;
  PlanResult result_;
};

}  // namespace

PlanResult plan(const WorldState& start, const TaskSpec& task,
                const std::vector<TransitionModel>& models,
                const ModelPreconditions& pre, const PlannerConfig& cfg) {
  return Search(start, task, models, pre, cfg, SearchMode{}).run();
}

PlanResult plan_ps_only(const WorldState& start, const TaskSpec& task,
                        const std::vector<TransitionModel>& models,
                        const ModelPreconditions& pre,
                        const PlannerConfig& cfg) {
  SearchMode mode;
  mode.anchor_only = true;
  return Search(start, task, models, pre, cfg, mode).run();
}

PlanResult plan_baseline(const WorldState& start, const TaskSpec& task,
                         const std::vector<TransitionModel>& models,
                         const ModelPreconditions& pre, BaselineMode bmode,
                         const PlannerConfig& cfg) {
  SearchMode mode;
  mode.anchor_only = true;
  if (bmode.kind == BaselineMode::SingleModel) {
    if (bmode.model_index < 0 || bmode.model_index >= int(models.size())) {
      throw std::invalid_argument("plan_baseline: bad model index");
    }
    mode.single_model = bmode.model_index;
  } else {
    mode.random_model = true;
    mode.random_seed = bmode.seed;
  }
  return Search(start, task, models, pre, cfg, mode).run();
}

namespace {

void oracle_dfs(const WorldState& s, double g, int depth, int max_depth,
                const TaskSpec& task,
                const std::vector<TransitionModel>& models,
                const ModelPreconditions& pre, const PlannerConfig& cfg,
                double& best) {
  if (g >= best) return;
  if (task.goal(s)) {
    best = g;
    return;
  }
  if (depth >= max_depth) return;
  const std::string key = planner_state_key(s, cfg);
  const auto actions =
      task.applicable_actions(s, planner_action_seed(cfg, key));
  for (const auto& a : actions) {
    int model = -1;
    for (int i = int(models.size()) - 1; i >= 0; --i) {
      if (pre.in_precondition(i, s, a)) {
        model = i;
        break;
      }
    }
    if (model < 0) continue;
    const WorldState succ = models[std::size_t(model)].forward(s, a);
    oracle_dfs(succ, g + edge_cost(s, a, task.dynamics), depth + 1, max_depth,
               task, models, pre, cfg, best);
  }
}

}  // namespace

double optimal_oracle(const WorldState& start, const TaskSpec& task,
                      const std::vector<TransitionModel>& models,
                      const ModelPreconditions& pre, const PlannerConfig& cfg,
                      int max_depth) {
  double best = kInfiniteCost;
  oracle_dfs(start, 0.0, 0, max_depth, task, models, pre, cfg, best);
  return best;
}

std::vector<Record> plan_result_to_records(const PlanResult& r) {
  std::vector<Record> out;
  Record head;
  head.type = "plan";
  head.add("status", std::string(plan_status_str(r.status)));
  head.add("cost", r.cost);
  head.add("weighted_eval_cost", r.weighted_eval_cost);
  std::string evals;
  for (std::size_t i = 0; i < r.per_model_evals.size(); ++i) {
    if (i) evals += ',';
    evals += std::to_string(r.per_model_evals[i]);
  }
  head.add("per_model_evals", evals);
  head.add("expansions", r.expansions);
  head.add("wall_time_s", r.wall_time_s);
  out.push_back(std::move(head));
  for (std::size_t i = 0; i < r.actions.size(); ++i) {
    Record rec;
    rec.type = "plan_action";
    rec.add("step", std::int64_t(i));
    append_action_fields(rec, "a.", r.actions[i]);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace mfp
