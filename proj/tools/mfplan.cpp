// Command-line front end: data collection, deviation-model training,
// benchmarking, and suboptimality-bound verification.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfp/datagen.hpp"
#include "mfp/mde.hpp"
#include "mfp/planner.hpp"
#include "mfp/world.hpp"

namespace fs = std::filesystem;
using namespace mfp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

Config load_config(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::from_file(path);
}

std::vector<TaskName> tasks_from_flag(const std::string& task_flag) {
  if (task_flag.empty()) {
    return {TaskName::RodInBox, TaskName::RodInDrawer};
  }
  return {task_from_name(task_flag)};
}

std::vector<Skill> all_skills() {
  return {Skill::Pick, Skill::LiftAndDrop, Skill::OpenDrawer};
}

// ---------------------------------------------------------------- collect

int cmd_collect(const std::string& config_path, const std::string& out_path,
                std::uint64_t seed) {
  const Config cfg = load_config(config_path);
  const int n_box = int(cfg.get_int("collect.episodes.box", 26));
  const int n_drawer = int(cfg.get_int("collect.episodes.drawer", 17));
  const int target_rod = int(cfg.get_int("collect.target_rod", 0));

  std::vector<EpisodeLog> episodes;
  if (n_box > 0) {
    const TaskSpec task = make_task(TaskName::RodInBox, target_rod, cfg);
    const auto models = make_models(task.name, task.dynamics);
    PlannerConfig pcfg = PlannerConfig::from_config(cfg, task.name);
    auto logs = collect_episodes(task, models, pcfg, n_box,
                                 mix_seed(seed, 0xb0ull), 0);
    episodes.insert(episodes.end(), logs.begin(), logs.end());
  }
  if (n_drawer > 0) {
    const TaskSpec task = make_task(TaskName::RodInDrawer, target_rod, cfg);
    const auto models = make_models(task.name, task.dynamics);
    PlannerConfig pcfg = PlannerConfig::from_config(cfg, task.name);
    auto logs = collect_episodes(task, models, pcfg, n_drawer,
                                 mix_seed(seed, 0xd0ull),
                                 std::int64_t(episodes.size()));
    episodes.insert(episodes.end(), logs.begin(), logs.end());
  }
  save_episodes(out_path, episodes);

  std::size_t transitions = 0;
  for (const auto& e : episodes) transitions += e.transitions.size();
  std::printf("collected %zu episodes (%d box, %d drawer), %zu transitions -> %s\n",
              episodes.size(), n_box, n_drawer, transitions, out_path.c_str());
  return kExitOk;
}

// ------------------------------------------------------------------ train

int cmd_train(const std::string& config_path, const std::string& logs_path,
              const std::string& out_dir, std::uint64_t seed) {
  const Config cfg = load_config(config_path);
  const auto episodes = load_episodes(logs_path);
  TrainConfig tc = TrainConfig::from_config(cfg);
  const Dataset ds = build_dataset(episodes, cfg, tc.test_fraction, seed);

  fs::create_directories(out_dir);
  const DynamicsConstants dc = DynamicsConstants::from_config(cfg);
  const auto models = all_models(dc);

  std::printf("%-14s %-24s %10s %10s %8s\n", "skill", "model", "rows",
              "test_rows", "MAE_cm");
  std::uint64_t pair_idx = 0;
  for (const Skill skill : all_skills()) {
    std::vector<std::pair<Transition, FeatureContext>> train_t, test_t;
    for (const auto& [t, ctx] : ds.train)
      if (t.a.skill == skill) train_t.emplace_back(t, ctx);
    for (const auto& [t, ctx] : ds.test)
      if (t.a.skill == skill) test_t.emplace_back(t, ctx);
    if (train_t.empty()) {
      std::fprintf(stderr, "warning: no %s transitions in logs; skipping\n",
                   skill_name(skill));
      pair_idx += models.size();
      continue;
    }
    for (const auto& model : models) {
      const auto rows = label_transitions(train_t, model);
      const auto augmented =
          augment(rows, tc, mix_seed(seed, 0xa06ull + pair_idx));
      TrainConfig pair_tc = tc;
      pair_tc.seed = mix_seed(seed, 0x7124ull + pair_idx);
      const MdeModel m = train_mde(augmented, pair_tc, skill, model.name);
      const auto test_rows = label_transitions(test_t, model);
      const double mae =
          test_rows.empty() ? 0.0 : mean_abs_error(m, test_rows);
      const fs::path out = fs::path(out_dir) / mde_filename(skill, model.name);
      save_mde(m, out.string());
      std::printf("%-14s %-24s %10zu %10zu %8s\n", skill_name(skill),
                  model.name.c_str(), augmented.size(), test_rows.size(),
                  format_g6(mae).c_str());
      ++pair_idx;
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------ bench

struct BenchRow {
  std::string task, method;
  int instance = 0;
  std::uint64_t seed = 0;
  PlanResult result;
  bool exec_success = false;
  double exec_steps = 0.0;
};

std::map<std::string, MdeModel> load_mdes_or_die(
    const std::string& dir, const TaskSpec& task,
    const std::vector<TransitionModel>& models) {
  std::map<std::string, MdeModel> mdes;
  for (const Skill skill : task.skills()) {
    for (const auto& model : models) {
      const fs::path p = fs::path(dir) / mde_filename(skill, model.name);
      if (!fs::exists(p)) {
        throw std::runtime_error("missing MDE weight file: " + p.string());
      }
      mdes.emplace(mde_key(skill, model.name), load_mde(p.string()));
    }
  }
  return mdes;
}

bool method_uses_mdes(const std::string& m) {
  return m == "ps_pe" || m == "ps_only" || m == "random";
}

PlanResult run_method(const std::string& method, const WorldState& start,
                      const TaskSpec& task,
                      const std::vector<TransitionModel>& models,
                      const ModelPreconditions& pre, const PlannerConfig& cfg,
                      std::uint64_t inst_seed) {
  static const ModelPreconditions no_pre;
  if (method == "ps_pe") return plan(start, task, models, pre, cfg);
  if (method == "ps_only") return plan_ps_only(start, task, models, pre, cfg);
  if (method == "random")
    return plan_baseline(start, task, models, pre,
                         BaselineMode::random(inst_seed), cfg);
  if (method == "sim_only")
    return plan_baseline(start, task, models, no_pre, BaselineMode::single(0),
                         cfg);
  if (method == "analytical_only")
    return plan_baseline(start, task, models, no_pre,
                         BaselineMode::single(int(models.size()) - 1), cfg);
  throw std::runtime_error("unknown method: " + method);
}

bool execute_plan(const PlanResult& r, const WorldState& start,
                  const TaskSpec& task, int* steps_out) {
  WorldState real = start;
  int steps = 0;
  for (const auto& a : r.actions) {
    if (!skill_precondition(real, a)) break;
    real = ground_truth(real, a, task.dynamics);
    ++steps;
  }
  *steps_out = steps;
  return task.goal(real);
}

int cmd_bench(const std::string& config_path, const std::string& out_path,
              const std::vector<std::string>& methods, int instances,
              std::uint64_t seed, const std::string& task_flag,
              const std::string& mde_dir) {
  const Config cfg = load_config(config_path);
  std::vector<BenchRow> rows;

  std::uint64_t task_idx = 0;
  for (const TaskName tname : tasks_from_flag(task_flag)) {
    const TaskSpec task = make_task(tname, 0, cfg);
    const auto models = make_models(tname, task.dynamics);
    PlannerConfig pcfg = PlannerConfig::from_config(cfg, tname);

    ModelPreconditions pre;
    bool need_mdes = false;
    for (const auto& m : methods) need_mdes |= method_uses_mdes(m);
    if (need_mdes) {
      const auto mdes = load_mdes_or_die(mde_dir, task, models);
      pre = preconditions_from_mdes(models, mdes, FeatureContext::from_task(task),
                                    task.d_max);
    }

    for (const auto& method : methods) {
      for (int i = 0; i < instances; ++i) {
        const std::uint64_t inst_seed =
            mix_seed(seed, task_idx * 100003ull + std::uint64_t(i));
        const WorldState start = sample_initial_state(task, inst_seed);
        PlannerConfig icfg = pcfg;
        icfg.seed = inst_seed;
        BenchRow row;
        row.task = task_name_str(tname);
        row.method = method;
        row.instance = i;
        row.seed = inst_seed;
        row.result =
            run_method(method, start, task, models, pre, icfg, inst_seed);
        if (row.result.found()) {
          int steps = 0;
          row.exec_success = execute_plan(row.result, start, task, &steps);
          row.exec_steps = steps;
        }
        rows.push_back(std::move(row));
      }
    }
    ++task_idx;
  }

  // Seed-deterministic report; wall-clock goes to a sidecar so the main
  // file is byte-identical across runs.
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << "task,method,instance,seed,status,plan_found,cost,weighted_eval_cost,"
         "evals_model0,evals_model1,evals_model2,expansions,"
         "execution_success\n";
  std::ofstream timing(out_path + ".timing");
  timing << "task,method,instance,wall_time_s\n";
  for (const auto& r : rows) {
    const auto& pr = r.result;
    auto evals = [&pr](std::size_t i) {
      return i < pr.per_model_evals.size() ? pr.per_model_evals[i] : 0;
    };
    out << r.task << ',' << r.method << ',' << r.instance << ',' << r.seed
        << ',' << plan_status_str(pr.status) << ',' << (pr.found() ? 1 : 0)
        << ',' << format_g6(pr.found() ? pr.cost : -1.0) << ','
        << format_g6(pr.weighted_eval_cost) << ',' << evals(0) << ','
        << evals(1) << ',' << evals(2) << ',' << pr.expansions << ','
        << (r.exec_success ? 1 : 0) << '\n';
    timing << r.task << ',' << r.method << ',' << r.instance << ','
           << format_g6(pr.wall_time_s) << '\n';
  }

  // Human summary, one line per (task, method).
  std::printf("%-12s %-16s %6s %6s %14s %10s\n", "task", "method", "found",
              "exec", "weighted_cost", "time_s");
  for (const TaskName tname : tasks_from_flag(task_flag)) {
    for (const auto& method : methods) {
      int n = 0, found = 0, exec = 0;
      double wcost = 0.0, wtime = 0.0;
      for (const auto& r : rows) {
        if (r.task != task_name_str(tname) || r.method != method) continue;
        ++n;
        found += r.result.found();
        exec += r.exec_success;
        wcost += r.result.weighted_eval_cost;
        wtime += r.result.wall_time_s;
      }
      if (n == 0) continue;
      std::printf("%-12s %-16s %6s %6s %14s %10s\n", task_name_str(tname),
                  method.c_str(), format_g6(double(found) / n).c_str(),
                  format_g6(double(exec) / n).c_str(),
                  format_g6(wcost / n).c_str(), format_g6(wtime / n).c_str());
    }
  }
  std::printf("report: %s (timing sidecar: %s.timing)\n", out_path.c_str(),
              out_path.c_str());
  return kExitOk;
}

// --------------------------------------------------------- verify-bounds

int cmd_verify_bounds(const std::string& config_path, int instances,
                      std::uint64_t seed, const std::string& task_flag) {
  const Config cfg = load_config(config_path);
  const TaskName tname =
      task_flag.empty() ? TaskName::RodInBox : task_from_name(task_flag);
  const TaskSpec task = make_task(tname, 0, cfg);
  const auto models = make_models(tname, task.dynamics);
  const PlannerConfig base = PlannerConfig::from_config(cfg, tname);
  const int max_depth = int(cfg.get_int("verify.max_depth", 4));
  const ModelPreconditions no_pre;  // every model trusted everywhere

  double w_min = base.weights[0];
  for (double w : base.weights) w_min = std::min(w_min, w);
  const double ps_bound = base.epsilon;
  const double pe_bound = base.weights[0] / w_min * base.epsilon;

  int feasible = 0, violations = 0;
  double max_ps_ratio = 0.0, max_pe_ratio = 0.0;
  for (std::uint64_t attempt = 0;
       feasible < instances && attempt < std::uint64_t(instances) * 20 + 100;
       ++attempt) {
    const std::uint64_t inst_seed = mix_seed(seed, attempt);
    const WorldState start = sample_initial_state(task, inst_seed);
    PlannerConfig icfg = base;
    icfg.seed = inst_seed;
    const double g_star =
        optimal_oracle(start, task, models, no_pre, icfg, max_depth);
    if (!std::isfinite(g_star) || g_star <= 0.0) continue;
    ++feasible;

    const PlanResult ps = plan_ps_only(start, task, models, no_pre, icfg);
    const PlanResult pe = plan(start, task, models, no_pre, icfg);
    auto check = [&](const PlanResult& r, double bound, double& max_ratio,
                     const char* label) {
      if (!r.found()) {
        std::printf("violation: %s found no plan, instance seed %llu\n", label,
                    (unsigned long long)inst_seed);
        ++violations;
        return;
      }
      const double ratio = r.cost / g_star;
      max_ratio = std::max(max_ratio, ratio);
      if (ratio > bound + 1e-9) {
        std::printf("violation: %s ratio %s > bound %s, instance seed %llu\n",
                    label, format_g6(ratio).c_str(), format_g6(bound).c_str(),
                    (unsigned long long)inst_seed);
        ++violations;
      }
    };
    check(ps, ps_bound, max_ps_ratio, "ps_only");
    check(pe, pe_bound, max_pe_ratio, "ps_pe");
  }

  std::printf("instances=%d feasible, max ratio ps_only=%s (bound %s), "
              "ps_pe=%s (bound %s)\n",
              feasible, format_g6(max_ps_ratio).c_str(),
              format_g6(ps_bound).c_str(), format_g6(max_pe_ratio).c_str(),
              format_g6(pe_bound).c_str());
  if (feasible < instances) {
    std::fprintf(stderr, "error: only %d of %d requested feasible instances\n",
                 feasible, instances);
    return kExitUsage;
  }
  return violations == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-fidelity planning toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, logs_path, task_flag;
  std::string mde_dir = "mde_weights";
  std::string methods_csv = "ps_pe,ps_only,random,sim_only,analytical_only";
  std::uint64_t seed = 0;
  int instances = 10;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--seed", seed, "random seed");
  };

  CLI::App* collect = app.add_subcommand("collect", "run episodes, log transitions");
  add_common(collect);
  collect->add_option("--out", out_path, "episode log path")->required();

  CLI::App* train = app.add_subcommand("train", "fit deviation estimators");
  add_common(train);
  train->add_option("--logs", logs_path, "episode log path")->required();
  train->add_option("--out", out_path, "weight output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "compare planning methods");
  add_common(bench);
  bench->add_option("--out", out_path, "report path")->required();
  bench->add_option("--methods", methods_csv, "comma-separated method list");
  bench->add_option("--instances", instances, "instances per (task, method)");
  bench->add_option("--task", task_flag, "restrict to one task");
  bench->add_option("--mde-dir", mde_dir, "trained weight directory");

  CLI::App* verify = app.add_subcommand("verify-bounds",
                                        "check suboptimality bounds vs oracle");
  add_common(verify);
  verify->add_option("--instances", instances, "oracle-feasible instance count");
  verify->add_option("--task", task_flag, "task to verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (collect->parsed()) return cmd_collect(config_path, out_path, seed);
    if (train->parsed()) return cmd_train(config_path, logs_path, out_path, seed);
    if (bench->parsed()) {
      std::vector<std::string> methods;
      std::stringstream ss(methods_csv);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) methods.push_back(tok);
      }
      return cmd_bench(config_path, out_path, methods, instances, seed,
                       task_flag, mde_dir);
    }
    if (verify->parsed())
      return cmd_verify_bounds(config_path, instances, seed, task_flag);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
