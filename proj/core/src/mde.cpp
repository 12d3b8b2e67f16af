#include "mfp/mde.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mfp {

std::vector<double> extract_features(const WorldState& s, const SkillAction& a,
                                     const FeatureContext& ctx) {
  std::vector<double> f;
  f.reserve(kStateFeatureCount + a.theta.size());
  f.push_back(distance(s.gripper, s.rods[0]));
  f.push_back(distance(s.gripper, s.rods[1]));
  f.push_back(s.held ? s.held->grasp_offset : 0.0);
  f.push_back(distance(s.rods[ctx.target_rod].x, s.rods[ctx.target_rod].y,
                       ctx.goal_center_x, ctx.goal_center_y));
  f.push_back(s.drawer_open);
  f.push_back(s.held ? 1.0 : 0.0);
  f.insert(f.end(), a.theta.begin(), a.theta.end());
  return f;
}

double asymmetric_loss(double d, double d_hat, double c1, double c2) {
  const double under = std::max(0.0, d - d_hat);
  const double over = std::max(0.0, d_hat - d);
  return c1 * under * under + c2 * over * over;
}

double asymmetric_loss_grad(double d, double d_hat, double c1, double c2) {
  const double under = std::max(0.0, d - d_hat);
  const double over = std::max(0.0, d_hat - d);
  return -2.0 * c1 * under + 2.0 * c2 * over;
}

LabeledRow label_transition(const Transition& t, const FeatureContext& ctx,
                            const TransitionModel& model) {
  const WorldState predicted = model.forward(t.s, t.a);
  return LabeledRow{extract_features(t.s, t.a, ctx),
                    state_distance(t.s_next, predicted)};
}

std::vector<LabeledRow> label_transitions(
    const std::vector<std::pair<Transition, FeatureContext>>& transitions,
    const TransitionModel& model) {
  std::vector<LabeledRow> rows;
  rows.reserve(transitions.size());
  for (const auto& [t, ctx] : transitions) {
    rows.push_back(label_transition(t, ctx, model));
  }
  return rows;
}

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig tc;
  tc.c1 = cfg.get_double("mde.c1", tc.c1);
  tc.c2 = cfg.get_double("mde.c2", tc.c2);
  tc.learning_rate = cfg.get_double("mde.learning_rate", tc.learning_rate);
  tc.l2_weight_decay = cfg.get_double("mde.l2_weight_decay", tc.l2_weight_decay);
  tc.state_noise_std = cfg.get_double("mde.state_noise_std", tc.state_noise_std);
  tc.param_noise_std = cfg.get_double("mde.param_noise_std", tc.param_noise_std);
  tc.test_fraction = cfg.get_double("mde.test_fraction", tc.test_fraction);
  tc.val_fraction = cfg.get_double("mde.val_fraction", tc.val_fraction);
  tc.jitter_copies = int(cfg.get_int("mde.jitter_copies", tc.jitter_copies));
  tc.batch_size = int(cfg.get_int("mde.batch_size", tc.batch_size));
  tc.max_epochs = int(cfg.get_int("mde.max_epochs", tc.max_epochs));
  tc.patience = int(cfg.get_int("mde.patience", tc.patience));
  tc.hidden_units = int(cfg.get_int("mde.hidden_units", tc.hidden_units));
  if (!(tc.c1 > tc.c2 && tc.c2 > 0.0)) {
    throw std::runtime_error("mde config requires c1 > c2 > 0");
  }
  return tc;
}

std::vector<LabeledRow> augment(const std::vector<LabeledRow>& rows,
                                const TrainConfig& cfg, std::uint64_t seed) {
  std::vector<LabeledRow> out;
  out.reserve(rows.size() * (2 + 2 * cfg.jitter_copies));
  for (const auto& r : rows) out.push_back(r);
  // Rod swap: rods are interchangeable, so the two gripper->rod distances
  // commute while everything else stays fixed.
  for (const auto& r : rows) {
    LabeledRow swapped = r;
    std::swap(swapped.features[0], swapped.features[1]);
    out.push_back(std::move(swapped));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> state_noise(0.0, cfg.state_noise_std);
  std::normal_distribution<double> param_noise(0.0, cfg.param_noise_std);
  const std::size_t base = out.size();
  for (int copy = 0; copy < cfg.jitter_copies; ++copy) {
    for (std::size_t i = 0; i < base; ++i) {
      LabeledRow jittered = out[i];
      for (std::size_t k = 0; k < jittered.features.size(); ++k) {
        if (int(k) == 5) continue;  // held flag is discrete
        jittered.features[k] +=
            int(k) < kStateFeatureCount ? state_noise(rng) : param_noise(rng);
      }
      out.push_back(std::move(jittered));
    }
  }
  return out;
}

namespace {

struct Workspace {
  std::vector<double> z1, a1, z2, a2;  // per-sample activations
  std::vector<double> gw1, gb1, gw2, gb2, gw3;
  double gb3 = 0.0;
};

double forward_raw(const MdeModel& m, const double* x, Workspace* ws) {
  const int h = m.hidden;
  std::vector<double> local1, local2;
  std::vector<double>& a1 = ws ? ws->a1 : local1;
  std::vector<double>& a2 = ws ? ws->a2 : local2;
  a1.assign(h, 0.0);
  a2.assign(h, 0.0);
  if (ws) {
    ws->z1.assign(h, 0.0);
    ws->z2.assign(h, 0.0);
  }
  for (int i = 0; i < h; ++i) {
    double z = m.b1[i];
    const double* w = &m.w1[std::size_t(i) * m.n_in];
    for (int j = 0; j < m.n_in; ++j) z += w[j] * x[j];
    if (ws) ws->z1[i] = z;
    a1[i] = z > 0.0 ? z : 0.0;
  }
  for (int i = 0; i < h; ++i) {
    double z = m.b2[i];
    const double* w = &m.w2[std::size_t(i) * h];
    for (int j = 0; j < h; ++j) z += w[j] * a1[j];
    if (ws) ws->z2[i] = z;
    a2[i] = z > 0.0 ? z : 0.0;
  }
  double y = m.b3;
  for (int i = 0; i < h; ++i) y += m.w3[i] * a2[i];
  return y;
}

void normalize_into(const MdeModel& m, const std::vector<double>& features,
                    std::vector<double>& out) {
  out.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out[i] = (features[i] - m.mean[i]) / m.stddev[i];
  }
}

void backward(MdeModel& m, const double* x, const Workspace& fw, double dy,
              Workspace& grads) {
  const int h = m.hidden;
  std::vector<double> d2(h), d1(h);
  for (int i = 0; i < h; ++i) {
    grads.gw3[i] += dy * fw.a2[i];
    d2[i] = fw.z2[i] > 0.0 ? dy * m.w3[i] : 0.0;
  }
  grads.gb3 += dy;
  for (int i = 0; i < h; ++i) {
    grads.gb2[i] += d2[i];
    double* gw = &grads.gw2[std::size_t(i) * h];
    for (int j = 0; j < h; ++j) gw[j] += d2[i] * fw.a1[j];
  }
  for (int j = 0; j < h; ++j) {
    double acc = 0.0;
    for (int i = 0; i < h; ++i) acc += d2[i] * m.w2[std::size_t(i) * h + j];
    d1[j] = fw.z1[j] > 0.0 ? acc : 0.0;
  }
  for (int i = 0; i < h; ++i) {
    grads.gb1[i] += d1[i];
    double* gw = &grads.gw1[std::size_t(i) * m.n_in];
    for (int j = 0; j < m.n_in; ++j) gw[j] += d1[i] * x[j];
  }
}

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::vector<double>& w, const std::vector<double>& g,
               AdamState& st, double lr, double decay, std::size_t offset) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double grad = g[i] + decay * w[i];
    auto& mi = st.m[offset + i];
    auto& vi = st.v[offset + i];
    mi = beta1 * mi + (1.0 - beta1) * grad;
    vi = beta2 * vi + (1.0 - beta2) * grad * grad;
    const double mhat = mi / (1.0 - std::pow(beta1, double(st.t)));
    const double vhat = vi / (1.0 - std::pow(beta2, double(st.t)));
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

double mean_loss(const MdeModel& m, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y, const TrainConfig& cfg) {
  if (x.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += asymmetric_loss(y[i], forward_raw(m, x[i].data(), nullptr),
                             cfg.c1, cfg.c2);
  }
  return total / double(x.size());
}

}  // namespace

MdeModel train_mde(const std::vector<LabeledRow>& labeled,
                   const TrainConfig& cfg, Skill skill,
                   const std::string& model_name) {
  if (labeled.size() < 20) {
    throw std::invalid_argument("train_mde: need at least 20 labeled rows");
  }
  const int n_in = int(labeled.front().features.size());
  for (const auto& r : labeled) {
    if (int(r.features.size()) != n_in) {
      throw std::invalid_argument("train_mde: inconsistent feature lengths");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_val =
      std::min(labeled.size() - 1,
               std::size_t(std::llround(cfg.val_fraction * double(labeled.size()))));

  std::vector<std::vector<double>> train_x, val_x;
  std::vector<double> train_y, val_y;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& row = labeled[order[k]];
    if (k < n_val) {
      val_x.push_back(row.features);
      val_y.push_back(row.label);
    } else {
      train_x.push_back(row.features);
      train_y.push_back(row.label);
    }
  }

  MdeModel m;
  m.skill = skill;
  m.model_name = model_name;
  m.n_in = n_in;
  m.hidden = cfg.hidden_units;
  // Normalization statistics come from the training split only.
  m.mean.assign(n_in, 0.0);
  m.stddev.assign(n_in, 0.0);
  for (const auto& x : train_x) {
    for (int j = 0; j < n_in; ++j) m.mean[j] += x[j];
  }
  for (int j = 0; j < n_in; ++j) m.mean[j] /= double(train_x.size());
  for (const auto& x : train_x) {
    for (int j = 0; j < n_in; ++j) {
      const double d = x[j] - m.mean[j];
      m.stddev[j] += d * d;
    }
  }
  for (int j = 0; j < n_in; ++j) {
    m.stddev[j] = std::sqrt(m.stddev[j] / double(train_x.size()));
    if (m.stddev[j] < 1e-8) m.stddev[j] = 1.0;
  }
  for (auto& x : train_x) {
    for (int j = 0; j < n_in; ++j) x[j] = (x[j] - m.mean[j]) / m.stddev[j];
  }
  for (auto& x : val_x) {
    for (int j = 0; j < n_in; ++j) x[j] = (x[j] - m.mean[j]) / m.stddev[j];
  }

  const int h = m.hidden;
  auto init = [&rng](std::vector<double>& w, std::size_t n, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    w.resize(n);
    for (auto& v : w) v = dist(rng);
  };
  init(m.w1, std::size_t(h) * n_in, std::sqrt(2.0 / double(n_in)));
  m.b1.assign(h, 0.0);
  init(m.w2, std::size_t(h) * h, std::sqrt(2.0 / double(h)));
  m.b2.assign(h, 0.0);
  init(m.w3, h, std::sqrt(2.0 / double(h)));
  m.b3 = 0.0;

  const std::size_t n_params = m.w1.size() + m.b1.size() + m.w2.size() +
                               m.b2.size() + m.w3.size() + 1;
  AdamState adam(n_params);
  Workspace ws;
  ws.gw1.resize(m.w1.size());
  ws.gb1.resize(m.b1.size());
  ws.gw2.resize(m.w2.size());
  ws.gb2.resize(m.b2.size());
  ws.gw3.resize(m.w3.size());

  MdeModel best = m;
  double best_val = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;
  std::vector<std::size_t> idx(train_x.size());
  std::iota(idx.begin(), idx.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < idx.size();
         start += std::size_t(cfg.batch_size)) {
      const std::size_t end =
          std::min(idx.size(), start + std::size_t(cfg.batch_size));
      std::fill(ws.gw1.begin(), ws.gw1.end(), 0.0);
      std::fill(ws.gb1.begin(), ws.gb1.end(), 0.0);
      std::fill(ws.gw2.begin(), ws.gw2.end(), 0.0);
      std::fill(ws.gb2.begin(), ws.gb2.end(), 0.0);
      std::fill(ws.gw3.begin(), ws.gw3.end(), 0.0);
      ws.gb3 = 0.0;
      const double inv = 1.0 / double(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = train_x[idx[k]];
        const double y_hat = forward_raw(m, x.data(), &ws);
        const double dy =
            inv * asymmetric_loss_grad(train_y[idx[k]], y_hat, cfg.c1, cfg.c2);
        backward(m, x.data(), ws, dy, ws);
      }
      adam.t += 1;
      std::size_t off = 0;
      const double lr = cfg.learning_rate, wd = cfg.l2_weight_decay;
      adam_step(m.w1, ws.gw1, adam, lr, wd, off);
      off += m.w1.size();
      adam_step(m.b1, ws.gb1, adam, lr, 0.0, off);
      off += m.b1.size();
      adam_step(m.w2, ws.gw2, adam, lr, wd, off);
      off += m.w2.size();
      adam_step(m.b2, ws.gb2, adam, lr, 0.0, off);
      off += m.b2.size();
      adam_step(m.w3, ws.gw3, adam, lr, wd, off);
      off += m.w3.size();
      std::vector<double> b3v{m.b3}, gb3v{ws.gb3};
      adam_step(b3v, gb3v, adam, lr, 0.0, off);
      m.b3 = b3v[0];
    }

    const double val_loss = val_x.empty() ? mean_loss(m, train_x, train_y, cfg)
                                          : mean_loss(m, val_x, val_y, cfg);
    if (val_loss < best_val - 1e-9) {
      best_val = val_loss;
      best = m;
      stale_epochs = 0;
    } else if (++stale_epochs >= cfg.patience) {
      break;
    }
  }
  return best;
}

double MdeModel::predict(const std::vector<double>& features) const {
  if (int(features.size()) != n_in) {
    throw std::invalid_argument("MdeModel::predict: feature layout mismatch");
  }
  std::vector<double> z;
  normalize_into(*this, features, z);
  return std::max(0.0, forward_raw(*this, z.data(), nullptr));
}

double predict_deviation(const MdeModel& m, const WorldState& s,
                         const SkillAction& a, const FeatureContext& ctx) {
  if (a.skill != m.skill) {
    throw std::invalid_argument("predict_deviation: skill mismatch");
  }
  return m.predict(extract_features(s, a, ctx));
}

bool in_model_precondition(const MdeModel& m, const WorldState& s,
                           const SkillAction& a, const FeatureContext& ctx,
                           double d_max) {
  return predict_deviation(m, s, a, ctx) < d_max;
}

double mean_abs_error(const MdeModel& m, const std::vector<LabeledRow>& rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rows) {
    total += std::abs(m.predict(r.features) - r.label);
  }
  return total / double(rows.size());
}

namespace {
constexpr char kMagic[8] = {'M', 'F', 'P', 'M', 'D', 'E', '1', '\n'};

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            std::streamsize(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          std::streamsize(n * sizeof(double)));
}
}  // namespace

void save_mde(const MdeModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write MDE file: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t skill = std::uint32_t(m.skill);
  const std::uint32_t name_len = std::uint32_t(m.model_name.size());
  const std::uint32_t n_in = std::uint32_t(m.n_in);
  const std::uint32_t hidden = std::uint32_t(m.hidden);
  out.write(reinterpret_cast<const char*>(&skill), 4);
  out.write(reinterpret_cast<const char*>(&name_len), 4);
  out.write(m.model_name.data(), name_len);
  out.write(reinterpret_cast<const char*>(&n_in), 4);
  out.write(reinterpret_cast<const char*>(&hidden), 4);
  write_doubles(out, m.mean);
  write_doubles(out, m.stddev);
  write_doubles(out, m.w1);
  write_doubles(out, m.b1);
  write_doubles(out, m.w2);
  write_doubles(out, m.b2);
  write_doubles(out, m.w3);
  out.write(reinterpret_cast<const char*>(&m.b3), sizeof(double));
  if (!out) throw std::runtime_error("short write on MDE file: " + path);
}

MdeModel load_mde(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open MDE file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("bad MDE file header: " + path);
  }
  std::uint32_t skill = 0, name_len = 0, n_in = 0, hidden = 0;
  in.read(reinterpret_cast<char*>(&skill), 4);
  in.read(reinterpret_cast<char*>(&name_len), 4);
  MdeModel m;
  m.model_name.resize(name_len);
  in.read(m.model_name.data(), name_len);
  in.read(reinterpret_cast<char*>(&n_in), 4);
  in.read(reinterpret_cast<char*>(&hidden), 4);
  m.skill = Skill(skill);
  m.n_in = int(n_in);
  m.hidden = int(hidden);
  read_doubles(in, m.mean, n_in);
  read_doubles(in, m.stddev, n_in);
  read_doubles(in, m.w1, std::size_t(hidden) * n_in);
  read_doubles(in, m.b1, hidden);
  read_doubles(in, m.w2, std::size_t(hidden) * hidden);
  read_doubles(in, m.b2, hidden);
  read_doubles(in, m.w3, hidden);
  in.read(reinterpret_cast<char*>(&m.b3), sizeof(double));
  if (!in) throw std::runtime_error("truncated MDE file: " + path);
  return m;
}

std::string mde_filename(Skill skill, const std::string& model_name) {
  return std::string("mde_") + skill_name(skill) + "_" + model_name + ".bin";
}

}  // namespace mfp
