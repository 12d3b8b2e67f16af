#include "mfp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace mfp {

namespace {

bool rod_in_workspace(const Scene& scene, const Pose2& rod) {
  const double hx = 0.5 * scene.rod_length * std::cos(rod.yaw);
  const double hy = 0.5 * scene.rod_length * std::sin(rod.yaw);
  return scene.workspace.contains(rod.x - hx, rod.y - hy) &&
         scene.workspace.contains(rod.x + hx, rod.y + hy);
}

}  // namespace

WorldState sample_initial_state(const TaskSpec& task, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x1d17ull));
  std::uniform_real_distribution<double> ux(8.0, 52.0);
  std::uniform_real_distribution<double> uy(8.0, 28.0);
  std::uniform_real_distribution<double> uyaw(-3.14159, 3.14159);

  WorldState s;
  s.scene = task.scene;
  s.gripper = Pose2{30.0, 6.0, 0.0};
  s.gripper_open_width = 5.0;
  s.drawer_open = 0.0;

  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (auto& rod : s.rods) {
      rod = Pose2{ux(rng), uy(rng), normalize_yaw(uyaw(rng))};
    }
    const bool ok =
        rod_in_workspace(*task.scene, s.rods[0]) &&
        rod_in_workspace(*task.scene, s.rods[1]) &&
        distance(s.rods[0], s.rods[1]) >= 3.0 * task.scene->rod_width &&
        !task.goal(s);
    if (ok) return s;
  }
  throw std::runtime_error("sample_initial_state: rejection sampling failed");
}

EpisodeLog run_episode(const TaskSpec& task,
                       const std::vector<TransitionModel>& models,
                       const PlannerConfig& pcfg, std::uint64_t seed,
                       std::int64_t episode_id) {
  EpisodeLog log;
  log.episode_id = episode_id;
  log.task = task.name;
  log.target_rod = task.target_rod;
  log.seed = seed;
  log.planner = "random";

  const WorldState start = sample_initial_state(task, seed);

  PlannerConfig cfg = pcfg;
  cfg.seed = mix_seed(seed, 0x9e11ull);
  ModelPreconditions no_pre;  // collection runs before any MDE exists
  const PlanResult plan = plan_baseline(start, task, models, no_pre,
                                        BaselineMode::random(cfg.seed), cfg);

  WorldState real = start;
  int step = 0;
  for (const auto& a : plan.actions) {
    if (!skill_precondition(real, a)) break;
    Transition t;
    t.s = real;
    t.a = a;
    t.s_next = ground_truth(real, a, task.dynamics);
    t.episode_id = episode_id;
    t.step = step++;
    real = t.s_next;
    log.transitions.push_back(std::move(t));
  }
  log.reached_goal = task.goal(real);
  return log;
}

std::vector<EpisodeLog> collect_episodes(
    const TaskSpec& task, const std::vector<TransitionModel>& models,
    const PlannerConfig& pcfg, int count, std::uint64_t seed,
    std::int64_t first_id) {
  std::vector<EpisodeLog> out;
  std::uint64_t attempt = 0;
  while (int(out.size()) < count) {
    if (attempt > std::uint64_t(count) * 50 + 200) {
      throw std::runtime_error("collect_episodes: too many empty episodes");
    }
    EpisodeLog log = run_episode(task, models, pcfg, mix_seed(seed, attempt++),
                                 first_id + std::int64_t(out.size()));
    if (!log.transitions.empty()) {
      out.push_back(std::move(log));
    }
  }
  return out;
}

Dataset build_dataset(const std::vector<EpisodeLog>& episodes,
                      const Config& cfg, double test_fraction,
                      std::uint64_t seed) {
  std::vector<std::size_t> order(episodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, 0x5e717ull));
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_test = std::size_t(
      std::llround(std::ceil(test_fraction * double(episodes.size()))));
  if (n_test >= episodes.size() && !episodes.empty() && test_fraction < 1.0) {
    // Episode-level grouping must leave at least one training episode.
    std::fprintf(stderr,
                 "warning: %zu episodes cannot honor a %.2f test fraction; "
                 "keeping everything in train\n",
                 episodes.size(), test_fraction);
    n_test = episodes.size() - 1;
  }

  Dataset ds;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const EpisodeLog& e = episodes[order[pos]];
    const TaskSpec task = make_task(e.task, e.target_rod, cfg);
    const FeatureContext ctx = FeatureContext::from_task(task);
    auto& side = pos < n_test ? ds.test : ds.train;
    for (const auto& t : e.transitions) {
      side.emplace_back(t, ctx);
    }
  }
  return ds;
}

void save_episodes(const std::string& path,
                   const std::vector<EpisodeLog>& episodes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_episodes: cannot open " + path);
  for (const auto& e : episodes) {
    Record head;
    head.type = "episode";
    head.add("id", e.episode_id);
    head.add("task", std::string(task_name_str(e.task)));
    head.add("target_rod", std::int64_t(e.target_rod));
    head.add("seed", std::int64_t(e.seed));
    head.add("planner", e.planner);
    head.add("reached_goal", std::int64_t(e.reached_goal ? 1 : 0));
    head.add("steps", std::int64_t(e.transitions.size()));
    out << format_record(head) << '\n';
    if (!e.transitions.empty()) {
      out << format_record(scene_to_record(*e.transitions.front().s.scene))
          << '\n';
    }
    for (const auto& t : e.transitions) {
      out << format_record(transition_to_record(t)) << '\n';
    }
  }
}

std::vector<EpisodeLog> load_episodes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_episodes: cannot open " + path);
  std::vector<EpisodeLog> episodes;
  std::shared_ptr<const Scene> scene;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Record rec = parse_record(line);
    if (rec.type == "episode") {
      EpisodeLog e;
      e.episode_id = rec.get_int("id");
      e.task = task_from_name(rec.get("task"));
      e.target_rod = int(rec.get_int("target_rod"));
      e.seed = std::uint64_t(rec.get_int("seed"));
      e.planner = rec.get("planner");
      e.reached_goal = rec.get_int("reached_goal") != 0;
      episodes.push_back(std::move(e));
    } else if (rec.type == "scene") {
      scene = std::make_shared<Scene>(scene_from_record(rec));
    } else if (rec.type == "transition") {
      if (episodes.empty() || !scene) {
        throw std::runtime_error("load_episodes: transition before header");
      }
      episodes.back().transitions.push_back(
          transition_from_record(rec, scene));
    } else {
      throw std::runtime_error("load_episodes: unknown record " + rec.type);
    }
  }
  return episodes;
}

}  // namespace mfp
