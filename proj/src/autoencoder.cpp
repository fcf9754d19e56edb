#include "zzhd/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

#include "zzhd/errors.hpp"
#include "zzhd/io.hpp"

namespace zzhd {

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected tanh or identity)");
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "identity"; }
std::string_view to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

namespace {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : z; }

// Derivative expressed through the activation output h.
double activate_grad(Activation a, double h) { return a == Activation::tanh ? 1.0 - h * h : 1.0; }

void check_width(const AEModel& m, std::size_t n) {
  if (n != m.input_dim) {
    throw InvariantError("autoencoder input width " + std::to_string(n) + " != model width " +
                         std::to_string(m.input_dim));
  }
}

}  // namespace

std::uint64_t config_hash(const TrainConfig& cfg, std::size_t input_dim) {
  std::ostringstream s;
  s << "seed=" << cfg.seed << ";lr=" << hexfloat(cfg.learning_rate) << ";epochs=" << cfg.epochs
    << ";batch=" << cfg.batch_size << ";opt=" << to_string(cfg.optimizer)
    << ";act=" << to_string(cfg.activation) << ";dim=" << input_dim;
  return fnv1a(s.str());
}

AEModel init_model(std::size_t input_dim, std::uint64_t seed, Activation activation) {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  AEModel m{input_dim, activation, Vector(AEModel::parameter_count(input_dim), 0.0)};
  std::mt19937_64 rng(seed);
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double dec_bound = 1.0 / std::sqrt(static_cast<double>(kLatentDim));
  std::uniform_real_distribution<double> enc(-enc_bound, enc_bound);
  std::uniform_real_distribution<double> dec(-dec_bound, dec_bound);
  for (std::size_t i = 0; i < kLatentDim * input_dim; ++i) m.params[m.enc_w() + i] = enc(rng);
  for (std::size_t i = 0; i < input_dim * kLatentDim; ++i) m.params[m.dec_w() + i] = dec(rng);
  return m;
}

ForwardResult forward(const AEModel& m, std::span<const double> x) {
  check_width(m, x.size());
  const std::size_t d = m.input_dim;
  const double* p = m.params.data();
  ForwardResult r;
  for (std::size_t k = 0; k < kLatentDim; ++k) {
    double z = p[m.enc_b() + k];
    for (std::size_t i = 0; i < d; ++i) z += p[m.enc_w() + k * d + i] * x[i];
    r.latent[k] = activate(m.activation, z);
  }
  r.reconstruction.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    double y = p[m.dec_b() + i];
    for (std::size_t k = 0; k < kLatentDim; ++k) y += p[m.dec_w() + i * kLatentDim + k] * r.latent[k];
    r.reconstruction[i] = y;
  }
  return r;
}

double loss(const AEModel& m, std::span<const double> x) {
  const ForwardResult r = forward(m, x);
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = r.reconstruction[i] - x[i];
    s += e * e;
  }
  return s / static_cast<double>(x.size());
}

double mean_loss(const AEModel& m, const Dataset& data) {
  if (data.empty()) throw InvariantError("mean_loss of an empty dataset");
  double s = 0;
  for (const Vector& x : data) s += loss(m, x);
  return s / static_cast<double>(data.size());
}

namespace {

// Accumulates the gradient of the mean loss over rows `idx` of `data` into g.
void accumulate_gradients(const AEModel& m, const Dataset& data, std::span<const std::size_t> idx, Vector& g) {
  const std::size_t d = m.input_dim;
  const double* p = m.params.data();
  const double scale = 2.0 / (static_cast<double>(d) * static_cast<double>(idx.size()));
  Vector dy(d);
  for (std::size_t row : idx) {
    const Vector& x = data[row];
    const ForwardResult r = forward(m, x);
    for (std::size_t i = 0; i < d; ++i) dy[i] = scale * (r.reconstruction[i] - x[i]);
    std::array<double, kLatentDim> dh{};
    for (std::size_t i = 0; i < d; ++i) {
      g[m.dec_b() + i] += dy[i];
      for (std::size_t k = 0; k < kLatentDim; ++k) {
        g[m.dec_w() + i * kLatentDim + k] += dy[i] * r.latent[k];
        dh[k] += p[m.dec_w() + i * kLatentDim + k] * dy[i];
      }
    }
    for (std::size_t k = 0; k < kLatentDim; ++k) {
      const double dz = dh[k] * activate_grad(m.activation, r.latent[k]);
      g[m.enc_b() + k] += dz;
      for (std::size_t i = 0; i < d; ++i) g[m.enc_w() + k * d + i] += dz * x[i];
    }
  }
}

}  // namespace

Vector gradients(const AEModel& m, const Dataset& batch) {
  if (batch.empty()) throw InvariantError("gradients of an empty batch");
  Vector g(m.params.size(), 0.0);
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  accumulate_gradients(m, batch, idx, g);
  return g;
}

TrainResult train(AEModel m, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DataError("training set is empty");
  for (const Vector& x : data) check_width(m, x.size());

  auto checked_loss = [&](const AEModel& model) {
    const double l = mean_loss(model, data);
    if (!std::isfinite(l)) {
      throw ConfigError("training diverged (non-finite loss); lower learning_rate (currently " +
                        format_real(cfg.learning_rate) + ")");
    }
    return l;
  };

  TrainResult result;
  result.initial_loss = checked_loss(m);
  result.model = m;
  result.final_loss = result.initial_loss;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Vector first(m.params.size(), 0.0);
  Vector second(m.params.size(), 0.0);
  std::int64_t step = 0;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector g(m.params.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      std::fill(g.begin(), g.end(), 0.0);
      accumulate_gradients(m, data, std::span<const std::size_t>(order).subspan(start, len), g);
      if (cfg.optimizer == Optimizer::sgd) {
        for (std::size_t j = 0; j < g.size(); ++j) m.params[j] -= cfg.learning_rate * g[j];
      } else {
        ++step;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        for (std::size_t j = 0; j < g.size(); ++j) {
          first[j] = kBeta1 * first[j] + (1.0 - kBeta1) * g[j];
          second[j] = kBeta2 * second[j] + (1.0 - kBeta2) * g[j] * g[j];
          m.params[j] -= cfg.learning_rate * (first[j] / c1) / (std::sqrt(second[j] / c2) + kEps);
        }
      }
    }
    const double l = checked_loss(m);
    result.loss_history.push_back(l);
    if (l < result.final_loss) {
      result.final_loss = l;
      result.model = m;
    }
  }
  return result;
}

Vector Scaler::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw InvariantError("scaler width mismatch");
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean[i]) / std[i];
  return z;
}

Vector Scaler::invert(std::span<const double> z) const {
  if (z.size() != mean.size()) throw InvariantError("scaler width mismatch");
  Vector x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * std[i] + mean[i];
  return x;
}

Dataset Scaler::apply(const Dataset& data) const {
  Dataset out;
  out.reserve(data.size());
  for (const Vector& x : data) out.push_back(apply(x));
  return out;
}

Scaler fit_scaler(const Dataset& data) {
  if (data.empty()) throw DataError("cannot fit a scaler on an empty dataset");
  const std::size_t d = data.front().size();
  Scaler s{Vector(d, 0.0), Vector(d, 0.0)};
  for (const Vector& x : data) {
    if (x.size() != d) throw DataError("ragged dataset");
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += x[i];
  }
  const auto n = static_cast<double>(data.size());
  for (double& v : s.mean) v /= n;
  for (const Vector& x : data) {
    for (std::size_t i = 0; i < d; ++i) s.std[i] += (x[i] - s.mean[i]) * (x[i] - s.mean[i]);
  }
  for (double& v : s.std) v = std::max(std::sqrt(v / n), kScalerEpsilon);
  return s;
}

namespace {

constexpr std::string_view kModelMagic = "zzhd-autoencoder";
constexpr int kModelVersion = 1;

void write_reals(std::ostringstream& out, std::string_view key, const Vector& v) {
  out << key << ' ' << v.size() << '\n';
  for (double x : v) out << hexfloat(x) << '\n';
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
  std::ostringstream out;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "input_dim " << bundle.model.input_dim << '\n';
  out << "activation " << to_string(bundle.model.activation) << '\n';
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(bundle.config_hash));
  out << "config_hash " << hash << '\n';
  write_reals(out, "params", bundle.model.params);
  write_reals(out, "scaler_mean", bundle.scaler.mean);
  write_reals(out, "scaler_std", bundle.scaler.std);
  return out.str();
}

ModelBundle deserialize_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& what) -> DataError { return DataError("model file: " + what); };
  auto expect_key = [&](std::string_view key) {
    std::string k;
    if (!(in >> k) || k != key) throw fail("expected '" + std::string(key) + "'");
  };
  auto read_reals = [&](std::string_view key, std::size_t expected) {
    expect_key(key);
    std::size_t n = 0;
    if (!(in >> n) || n != expected) throw fail("bad length for " + std::string(key));
    Vector v(n);
    for (double& x : v) {
      std::string tok;
      if (!(in >> tok)) throw fail("truncated " + std::string(key));
      char* end = nullptr;
      x = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(x)) throw fail("bad real in " + std::string(key));
    }
    return v;
  };

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) throw fail("not a model dump");
  if (version != kModelVersion) throw fail("unsupported version " + std::to_string(version));
  ModelBundle b;
  expect_key("input_dim");
  if (!(in >> b.model.input_dim) || b.model.input_dim < 1) throw fail("bad input_dim");
  expect_key("activation");
  std::string act;
  in >> act;
  try {
    b.model.activation = parse_activation(act);
  } catch (const ConfigError&) {
    throw fail("bad activation");
  }
  expect_key("config_hash");
  std::string hash;
  if (!(in >> hash)) throw fail("bad config_hash");
  b.config_hash = std::strtoull(hash.c_str(), nullptr, 16);
  b.model.params = read_reals("params", AEModel::parameter_count(b.model.input_dim));
  b.scaler.mean = read_reals("scaler_mean", b.model.input_dim);
  b.scaler.std = read_reals("scaler_std", b.model.input_dim);
  return b;
}

std::string format_loss_history(std::span<const double> history) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_real(history[i]) + "\n";
  }
  return out;
}

}  // namespace zzhd
