#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zzhd {

using Vector = std::vector<double>;
using Dataset = std::vector<Vector>;

enum class Activation { tanh, identity };
enum class Optimizer { sgd, adam };

Activation parse_activation(std::string_view name);
Optimizer parse_optimizer(std::string_view name);
std::string_view to_string(Activation a);
std::string_view to_string(Optimizer o);

struct TrainConfig {
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int epochs = 500;
  std::size_t batch_size = 32;
  Optimizer optimizer = Optimizer::adam;
  Activation activation = Activation::tanh;

  /// Throws ConfigError on a non-positive rate, epoch count or batch size.
  void validate() const;
};

/// FNV-1a over a canonical rendering of the config and the input width.
std::uint64_t config_hash(const TrainConfig& cfg, std::size_t input_dim);

inline constexpr std::size_t kLatentDim = 2;

/// D -> 2 -> D fully connected autoencoder. Parameters live in one flat vector:
/// encoder weights (2 x D, row-major), encoder bias (2), decoder weights
/// (D x 2, row-major), decoder bias (D).
struct AEModel {
  std::size_t input_dim = 0;
  Activation activation = Activation::tanh;
  Vector params;

  std::size_t enc_w() const { return 0; }
  std::size_t enc_b() const { return kLatentDim * input_dim; }
  std::size_t dec_w() const { return enc_b() + kLatentDim; }
  std::size_t dec_b() const { return dec_w() + input_dim * kLatentDim; }
  static std::size_t parameter_count(std::size_t d) { return 2 * kLatentDim * d + kLatentDim + d; }

  friend bool operator==(const AEModel&, const AEModel&) = default;
};

/// Weights uniform in +-1/sqrt(fan_in) from mt19937_64(seed); biases zero.
AEModel init_model(std::size_t input_dim, std::uint64_t seed, Activation activation = Activation::tanh);

struct ForwardResult {
  Vector reconstruction;
  std::array<double, kLatentDim> latent{};
};

/// Throws InvariantError on a width mismatch.
ForwardResult forward(const AEModel& m, std::span<const double> x);

/// Mean squared reconstruction error over the coordinates.
double loss(const AEModel& m, std::span<const double> x);

/// Average of `loss` over the rows.
double mean_loss(const AEModel& m, const Dataset& data);

/// Exact gradient of the mean batch loss, shaped like `m.params`.
Vector gradients(const AEModel& m, const Dataset& batch);

struct TrainResult {
  AEModel model;
  /// Mean training loss after each epoch.
  std::vector<double> loss_history;
  double initial_loss = 0;
  double final_loss = 0;
};

/// Mini-batch training with a per-epoch seeded shuffle. Returns the parameters
/// with the lowest mean training loss seen, the initial ones included.
/// Throws ConfigError if the loss becomes non-finite.
TrainResult train(AEModel m, const Dataset& data, const TrainConfig& cfg);

struct Scaler {
  Vector mean;
  Vector std;

  Vector apply(std::span<const double> x) const;
  Vector invert(std::span<const double> z) const;
  Dataset apply(const Dataset& data) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

inline constexpr double kScalerEpsilon = 1e-8;

/// Per-column mean and population standard deviation floored at kScalerEpsilon.
Scaler fit_scaler(const Dataset& data);

/// Model plus the scaler fitted on its training data.
struct ModelBundle {
  AEModel model;
  Scaler scaler;
  std::uint64_t config_hash = 0;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Versioned text dump; reals are written as hexfloats so the reload is exact.
std::string serialize_model(const ModelBundle& bundle);
/// Throws DataError on a malformed or unsupported dump.
ModelBundle deserialize_model(std::string_view text);

/// `epoch,loss`, epochs numbered from 1.
std::string format_loss_history(std::span<const double> history);

}  // namespace zzhd
