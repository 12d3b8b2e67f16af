#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfp/state.hpp"
#include "mfp/world.hpp"

namespace mfp {

/// Task-side context needed to featurize a transition: which rod the task
/// cares about and where its goal region sits.
struct FeatureContext {
  int target_rod = 0;
  double goal_center_x = 0.0;
  double goal_center_y = 0.0;

  static FeatureContext from_task(const TaskSpec& task) {
    return FeatureContext{task.target_rod, task.goal_center_x,
                          task.goal_center_y};
  }
};

/// phi(s) ++ theta. Layout:
///   [0] gripper->rod0 distance
///   [1] gripper->rod1 distance
///   [2] grasp offset (0 when the hand is empty)
///   [3] target-rod -> goal-region distance
///   [4] drawer opening
///   [5] held flag
///   [6..] skill parameters
std::vector<double> extract_features(const WorldState& s, const SkillAction& a,
                                     const FeatureContext& ctx);

inline constexpr int kStateFeatureCount = 6;

/// Squared loss that penalizes underestimated deviations more than
/// overestimated ones: c1*max(0, d - d_hat)^2 + c2*max(0, d_hat - d)^2.
double asymmetric_loss(double d, double d_hat, double c1, double c2);
/// Derivative of asymmetric_loss with respect to d_hat.
double asymmetric_loss_grad(double d, double d_hat, double c1, double c2);

struct LabeledRow {
  std::vector<double> features;
  double label = 0.0;
};

LabeledRow label_transition(const Transition& t, const FeatureContext& ctx,
                            const TransitionModel& model);

/// Labels every transition against `model`: the label is the state distance
/// between the observed and the predicted next state.
std::vector<LabeledRow> label_transitions(
    const std::vector<std::pair<Transition, FeatureContext>>& transitions,
    const TransitionModel& model);

struct TrainConfig {
  double c1 = 3.0;
  double c2 = 1.0;
  double learning_rate = 5e-3;
  double l2_weight_decay = 5e-3;
  double state_noise_std = 1.0;  // cm
  double param_noise_std = 3.0;  // cm
  double test_fraction = 0.15;
  double val_fraction = 0.05;
  int jitter_copies = 4;
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 20;
  int hidden_units = 64;
  std::uint64_t seed = 0;

  static TrainConfig from_config(const Config& cfg);
};

/// original rows, a rod-swapped copy of each, and jittered copies of both.
/// Labels are carried unchanged onto the jittered rows.
std::vector<LabeledRow> augment(const std::vector<LabeledRow>& rows,
                                const TrainConfig& cfg, std::uint64_t seed);

/// Feed-forward deviation regressor: two ReLU hidden layers, linear scalar
/// output, z-score input normalization. Predictions are clamped at zero.
struct MdeModel {
  Skill skill = Skill::Pick;
  std::string model_name;
  int n_in = 0;
  int hidden = 64;
  std::vector<double> mean, stddev;
  std::vector<double> w1, b1;  // hidden x n_in
  std::vector<double> w2, b2;  // hidden x hidden
  std::vector<double> w3;      // 1 x hidden
  double b3 = 0.0;

  double predict(const std::vector<double>& features) const;
};

MdeModel train_mde(const std::vector<LabeledRow>& labeled,
                   const TrainConfig& cfg, Skill skill,
                   const std::string& model_name);

double predict_deviation(const MdeModel& m, const WorldState& s,
                         const SkillAction& a, const FeatureContext& ctx);

/// Eq-style model precondition: the predicted deviation is strictly below
/// the task threshold.
bool in_model_precondition(const MdeModel& m, const WorldState& s,
                           const SkillAction& a, const FeatureContext& ctx,
                           double d_max);

double mean_abs_error(const MdeModel& m, const std::vector<LabeledRow>& rows);

void save_mde(const MdeModel& m, const std::string& path);
MdeModel load_mde(const std::string& path);
std::string mde_filename(Skill skill, const std::string& model_name);

}  // namespace mfp
