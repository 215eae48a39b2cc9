#include "finsent/student.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"

namespace finsent {

namespace {

void validate(const FeatureConfig& config) {
  if (config.dim < 2) {
    throw DataError("feature config: dim must be >= 2");
  }
  if (config.ngram_min < 1 || config.ngram_max < config.ngram_min) {
    throw DataError("feature config: invalid n-gram range");
  }
}

std::pair<std::uint32_t, float> hashed_feature(const char* data, std::size_t len,
                                               const FeatureConfig& config) {
  std::uint64_t h = derive_seed(fnv1a64(data, len), config.hash_seed);
  auto idx = static_cast<std::uint32_t>(h % config.dim);
  float sign = (splitmix64(h) >> 63) ? 1.0f : -1.0f;
  return {idx, sign};
}

}  // namespace

double FeatureVector::dot_row(const float* row) const {
  double acc = 0;
  for (const auto& [idx, w] : entries) {
    acc += static_cast<double>(row[idx]) * static_cast<double>(w);
  }
  return acc;
}

double FeatureVector::squared_norm() const {
  double acc = 0;
  for (const auto& [idx, w] : entries) {
    acc += static_cast<double>(w) * static_cast<double>(w);
  }
  return acc;
}

FeatureVector featurize(const std::string& text, const FeatureConfig& config) {
  validate(config);
  if (text.empty()) {
    throw DataError("featurize: empty text");
  }

  std::vector<std::pair<std::uint32_t, float>> raw;
  const std::size_t len = text.size();
  for (std::uint32_t n = config.ngram_min; n <= config.ngram_max; ++n) {
    if (n > len) break;
    for (std::size_t i = 0; i + n <= len; ++i) {
      raw.push_back(hashed_feature(text.data() + i, n, config));
    }
  }

  FeatureVector fv;
  if (!raw.empty()) {
    std::sort(raw.begin(), raw.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [idx, sign] : raw) {
      if (!fv.entries.empty() && fv.entries.back().first == idx) {
        fv.entries.back().second += sign;
      } else {
        fv.entries.emplace_back(idx, sign);
      }
    }
    std::erase_if(fv.entries, [](const auto& e) { return e.second == 0.0f; });
  }
  if (fv.entries.empty()) {
    // Text shorter than the smallest n (or full sign cancellation): hash
    // the whole text as a single feature so the unit-norm contract holds.
    auto [idx, sign] = hashed_feature(text.data(), len, config);
    fv.entries.emplace_back(idx, sign);
  }

  double norm = std::sqrt(fv.squared_norm());
  for (auto& [idx, w] : fv.entries) {
    w = static_cast<float>(w / norm);
  }
  return fv;
}

StudentModel StudentModel::zeros(LossKind head, const FeatureConfig& config) {
  validate(config);
  StudentModel model;
  model.head = head;
  model.features = config;
  model.weights.assign(model.rows() * config.dim, 0.0f);
  model.biases.assign(model.rows(), 0.0f);
  return model;
}

namespace {

struct Forward {
  double loss = 0;
  std::array<double, 3> dloss_dz{};  // per row; regression uses row 0 only
};

std::array<double, 3> logits(const StudentModel& model, const FeatureVector& fv) {
  std::array<double, 3> z{};
  for (std::size_t r = 0; r < model.rows(); ++r) {
    z[r] = static_cast<double>(model.biases[r]) +
           fv.dot_row(model.weights.data() + r * model.features.dim);
  }
  return z;
}

int class_index(const TrainTarget& target, LossKind loss) {
  if (loss != LossKind::Classification) {
    throw DataError("internal: class target requested for regression loss");
  }
  const Sentiment* s = std::get_if<Sentiment>(&target);
  if (s == nullptr) {
    throw DataError("train: classification loss needs sentiment targets");
  }
  return sentiment_index(*s);
}

double regression_target(const TrainTarget& target) {
  const double* t = std::get_if<double>(&target);
  if (t == nullptr) {
    throw DataError("train: regression loss needs numeric soft-score targets");
  }
  if (!(*t >= -1.0 && *t <= 1.0)) {
    throw DataError("train: regression target outside [-1, 1]");
  }
  return *t;
}

// Loss (and its gradient w.r.t. the logits) from precomputed logits, so
// the finite-difference check can perturb a single coordinate exactly.
Forward forward_from_logits(const std::array<double, 3>& z, LossKind loss,
                            const TrainTarget& target, bool want_grad) {
  Forward f;
  if (loss == LossKind::Classification) {
    int y = class_index(target, loss);
    double m = std::max({z[0], z[1], z[2]});
    double sum = std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m);
    double lse = m + std::log(sum);
    f.loss = lse - z[y];
    if (want_grad) {
      for (int k = 0; k < 3; ++k) {
        f.dloss_dz[k] = std::exp(z[k] - lse) - (k == y ? 1.0 : 0.0);
      }
    }
  } else {
    double t = regression_target(target);
    double y = std::tanh(z[0]);
    double err = y - t;
    f.loss = err * err;
    if (want_grad) {
      f.dloss_dz[0] = 2.0 * err * (1.0 - y * y);
    }
  }
  return f;
}

Forward forward(const StudentModel& model, const FeatureVector& fv,
                const TrainTarget& target, bool want_grad) {
  return forward_from_logits(logits(model, fv), model.head, target, want_grad);
}

}  // namespace

TrainResult train(const std::vector<TrainExample>& examples,
                  const TrainConfig& config) {
  if (examples.empty()) {
    throw DataError("train: empty training set");
  }
  if (!(config.learning_rate > 0)) {
    throw DataError("train: learning_rate must be > 0");
  }
  if (config.batch_size < 1) {
    throw DataError("train: batch_size must be >= 1");
  }
  if (config.epochs < 0) {
    throw DataError("train: epochs must be >= 0");
  }

  StudentModel model = StudentModel::zeros(config.loss, config.features);

  // Validate targets up front; a bad record should fail before any work.
  for (const TrainExample& ex : examples) {
    if (config.loss == LossKind::Classification) {
      (void)class_index(ex.target, config.loss);
    } else {
      (void)regression_target(ex.target);
    }
  }

  std::vector<FeatureVector> features;
  features.reserve(examples.size());
  for (const TrainExample& ex : examples) {
    features.push_back(featurize(ex.text, config.features));
  }

  DetRng init_rng(derive_seed(config.seed, 0));
  for (float& w : model.weights) {
    w = static_cast<float>(init_rng.next_double(-0.01, 0.01));
  }

  const std::size_t n = examples.size();
  const std::size_t rows = model.rows();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainResult result;
  std::unordered_map<std::uint32_t, std::array<double, 3>> grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    DetRng epoch_rng(derive_seed(config.seed, 1 + static_cast<std::uint64_t>(epoch)));
    epoch_rng.shuffle(order);

    double epoch_loss = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      grad.clear();
      std::array<double, 3> bias_grad{};
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        Forward f = forward(model, features[i], examples[i].target, true);
        epoch_loss += f.loss;
        for (std::size_t r = 0; r < rows; ++r) {
          bias_grad[r] += f.dloss_dz[r];
        }
        for (const auto& [idx, x] : features[i].entries) {
          auto& g = grad[idx];
          for (std::size_t r = 0; r < rows; ++r) {
            g[r] += f.dloss_dz[r] * static_cast<double>(x);
          }
        }
      }
      const double step = config.learning_rate * inv;
      for (const auto& [idx, g] : grad) {
        for (std::size_t r = 0; r < rows; ++r) {
          float& w = model.weights[r * model.features.dim + idx];
          w = static_cast<float>(static_cast<double>(w) - step * g[r]);
        }
      }
      for (std::size_t r = 0; r < rows; ++r) {
        float& b = model.biases[r];
        b = static_cast<float>(static_cast<double>(b) - step * bias_grad[r]);
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

double predict_score(const StudentModel& model, const std::string& text) {
  FeatureVector fv = featurize(text, model.features);
  std::array<double, 3> z = logits(model, fv);
  if (model.head == LossKind::Regression) {
    return std::tanh(z[0]);
  }
  double m = std::max({z[0], z[1], z[2]});
  double sum = std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m);
  double p_neg = std::exp(z[0] - m) / sum;
  double p_pos = std::exp(z[2] - m) / sum;
  return p_pos - p_neg;
}

void validate(const DecisionThresholds& thresholds) {
  if (thresholds.tau_pos < -1.0 || thresholds.tau_pos > 1.0 ||
      thresholds.tau_neg < -1.0 || thresholds.tau_neg > 1.0) {
    throw DataError("thresholds must lie in [-1, 1]");
  }
  if (thresholds.tau_neg > thresholds.tau_pos) {
    throw DataError("tau_neg must be <= tau_pos");
  }
}

Sentiment label_from_score(double score, const DecisionThresholds& thresholds) {
  if (score >= thresholds.tau_pos) return Sentiment::Positive;
  if (score <= thresholds.tau_neg) return Sentiment::Negative;
  return Sentiment::Neutral;
}

Sentiment predict_label(const StudentModel& model, const std::string& text,
                        const DecisionThresholds& thresholds) {
  validate(thresholds);
  return label_from_score(predict_score(model, text), thresholds);
}

double loss_value(const StudentModel& model, const TrainExample& example) {
  FeatureVector fv = featurize(example.text, model.features);
  return forward(model, fv, example.target, false).loss;
}

double gradient_norm(const StudentModel& model, const TrainExample& example) {
  FeatureVector fv = featurize(example.text, model.features);
  Forward f = forward(model, fv, example.target, true);
  double acc = 0;
  for (std::size_t r = 0; r < model.rows(); ++r) {
    acc += f.dloss_dz[r] * f.dloss_dz[r];  // bias coordinate
    for (const auto& [idx, x] : fv.entries) {
      double g = f.dloss_dz[r] * static_cast<double>(x);
      acc += g * g;
    }
  }
  return std::sqrt(acc);
}

double gradient_check(const StudentModel& model, const TrainExample& example,
                      double epsilon, std::uint64_t seed,
                      std::size_t max_coords) {
  if (!(epsilon > 0)) {
    throw DataError("gradient_check: epsilon must be > 0");
  }
  FeatureVector fv = featurize(example.text, model.features);
  std::array<double, 3> z = logits(model, fv);
  Forward f = forward_from_logits(z, model.head, example.target, true);

  // Coordinates are (row, entry) pairs plus one bias per row; entry -1 is
  // the bias. Perturbing weight (r, idx) by delta shifts z[r] by
  // delta * x_idx, which lets both loss evaluations stay in double.
  struct Coord {
    std::size_t row;
    std::ptrdiff_t entry;
  };
  std::vector<Coord> coords;
  for (std::size_t r = 0; r < model.rows(); ++r) {
    coords.push_back({r, -1});
    for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(fv.entries.size());
         ++e) {
      coords.push_back({r, e});
    }
  }
  if (coords.size() > max_coords) {
    DetRng rng(derive_seed(seed, 17));
    rng.shuffle(coords);
    coords.resize(max_coords);
  }

  double worst = 0;
  for (const Coord& c : coords) {
    double x = c.entry < 0
                   ? 1.0
                   : static_cast<double>(fv.entries[static_cast<std::size_t>(c.entry)].second);
    double analytic = f.dloss_dz[c.row] * x;

    std::array<double, 3> z_plus = z;
    std::array<double, 3> z_minus = z;
    z_plus[c.row] += epsilon * x;
    z_minus[c.row] -= epsilon * x;
    double loss_plus =
        forward_from_logits(z_plus, model.head, example.target, false).loss;
    double loss_minus =
        forward_from_logits(z_minus, model.head, example.target, false).loss;
    double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);

    double magnitude = std::max(std::abs(analytic), std::abs(numeric));
    if (magnitude < 1e-8) continue;  // both vanish: stationary coordinate
    worst = std::max(worst, std::abs(analytic - numeric) / magnitude);
  }
  return worst;
}

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32le(std::string& out, float f) {
  put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
 public:
  Reader(const std::string& data, std::string name)
      : data_(data), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void expect_magic(const char* magic) {
    need(4);
    if (std::memcmp(data_.data() + pos_, magic, 4) != 0) {
      throw DataError(name_ + ": not a model file (bad magic)");
    }
    pos_ += 4;
  }

  void expect_end() const {
    if (pos_ != data_.size()) {
      throw DataError(name_ + ": trailing bytes after model payload");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw DataError(name_ + ": truncated model file");
    }
  }

  const std::string& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const std::filesystem::path& path, const StudentModel& model) {
  std::string out;
  out.reserve(16 + 4 * (model.weights.size() + model.biases.size()));
  out += "FSM1";
  put_u32le(out, model.head == LossKind::Classification ? 0u : 1u);
  put_u32le(out, model.features.dim);
  put_u32le(out, model.features.ngram_min);
  put_u32le(out, model.features.ngram_max);
  put_u64le(out, model.features.hash_seed);
  for (float w : model.weights) put_f32le(out, w);
  for (float b : model.biases) put_f32le(out, b);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw DataError("cannot write " + tmp.string());
    stream.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!stream) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

StudentModel load_model(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw DataError("cannot open model file " + path.string());
  }
  std::string data((std::istreambuf_iterator<char>(stream)),
                   std::istreambuf_iterator<char>());
  Reader reader(data, path.string());
  reader.expect_magic("FSM1");
  std::uint32_t head = reader.u32();
  if (head > 1) {
    throw DataError(path.string() + ": unknown head kind " + std::to_string(head));
  }
  StudentModel model;
  model.head = head == 0 ? LossKind::Classification : LossKind::Regression;
  model.features.dim = reader.u32();
  model.features.ngram_min = reader.u32();
  model.features.ngram_max = reader.u32();
  model.features.hash_seed = reader.u64();
  validate(model.features);
  model.weights.resize(model.rows() * model.features.dim);
  for (float& w : model.weights) w = reader.f32();
  model.biases.resize(model.rows());
  for (float& b : model.biases) b = reader.f32();
  reader.expect_end();
  return model;
}

DecisionThresholds fit_thresholds(const std::vector<double>& scores,
                                  const std::vector<Sentiment>& golds) {
  if (scores.size() != golds.size() || scores.empty()) {
    throw DataError("fit_thresholds: scores and golds must be equal-length and non-empty");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  std::vector<double> sorted(n);
  // prefix[c][i]: count of class c among the i lowest-scoring examples
  std::array<std::vector<std::int64_t>, 3> prefix;
  for (auto& p : prefix) p.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = scores[order[i]];
    for (int c = 0; c < 3; ++c) {
      prefix[static_cast<std::size_t>(c)][i + 1] =
          prefix[static_cast<std::size_t>(c)][i] +
          (sentiment_index(golds[order[i]]) == c ? 1 : 0);
    }
  }

  std::vector<double> candidates = sorted;
  candidates.push_back(-1.0);
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  if (candidates.size() > 512) {
    std::vector<double> thinned;
    for (std::size_t i = 0; i < 512; ++i) {
      thinned.push_back(candidates[i * (candidates.size() - 1) / 511]);
    }
    thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
    candidates = std::move(thinned);
  }

  const auto neg = static_cast<std::size_t>(Sentiment::Negative);
  const auto neu = static_cast<std::size_t>(Sentiment::Neutral);
  const auto pos = static_cast<std::size_t>(Sentiment::Positive);

  DecisionThresholds best;
  std::int64_t best_correct = -1;
  for (double tau_pos : candidates) {
    // first sorted index predicted Positive (score >= tau_pos)
    std::size_t ip = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), tau_pos) - sorted.begin());
    for (double tau_neg : candidates) {
      if (tau_neg > tau_pos) break;
      std::size_t in = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), tau_neg) - sorted.begin());
      in = std::min(in, ip);  // Positive takes precedence at the boundary
      std::int64_t correct = prefix[neg][in] + (prefix[neu][ip] - prefix[neu][in]) +
                             (prefix[pos][n] - prefix[pos][ip]);
      if (correct > best_correct) {
        best_correct = correct;
        best = {tau_pos, tau_neg};
      }
    }
  }
  return best;
}

}  // namespace finsent
