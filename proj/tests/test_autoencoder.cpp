#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zzhd/autoencoder.hpp"
#include "zzhd/errors.hpp"

using namespace zzhd;

namespace {

Dataset gaussian_rows(std::mt19937_64& rng, std::size_t rows, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0, scale);
  Dataset out(rows, Vector(dim));
  for (auto& r : out)
    for (auto& v : r) v = n(rng);
  return out;
}

AEModel identity_model(Activation act) {
  AEModel m = init_model(2, 0, act);
  std::fill(m.params.begin(), m.params.end(), 0.0);
  m.params[m.enc_w() + 0] = 1;  // z0 = x0
  m.params[m.enc_w() + 3] = 1;  // z1 = x1
  m.params[m.dec_w() + 0] = 1;  // y0 = z0
  m.params[m.dec_w() + 3] = 1;  // y1 = z1
  return m;
}

}  // namespace

TEST_SUITE("autoencoder") {
  TEST_CASE("initialisation is seeded and bounded") {
    const AEModel a = init_model(8, 42);
    CHECK(a.params.size() == AEModel::parameter_count(8));
    CHECK(AEModel::parameter_count(8) == 16 + 2 + 16 + 8);
    CHECK(a == init_model(8, 42));
    CHECK_FALSE(a == init_model(8, 43));
    const double enc_bound = 1 / std::sqrt(8.0);
    const double dec_bound = 1 / std::sqrt(2.0);
    for (std::size_t j = a.enc_w(); j < a.enc_b(); ++j) CHECK(std::abs(a.params[j]) <= enc_bound);
    for (std::size_t j = a.enc_b(); j < a.dec_w(); ++j) CHECK(a.params[j] == 0);
    for (std::size_t j = a.dec_w(); j < a.dec_b(); ++j) CHECK(std::abs(a.params[j]) <= dec_bound);
    for (std::size_t j = a.dec_b(); j < a.params.size(); ++j) CHECK(a.params[j] == 0);
  }

  TEST_CASE("forward pass of hand-set two-dimensional models") {
    const Vector x = {0.5, -1.0};
    const auto lin = forward(identity_model(Activation::identity), x);
    CHECK(lin.reconstruction == x);
    CHECK(loss(identity_model(Activation::identity), x) == 0);
    const auto t = forward(identity_model(Activation::tanh), x);
    CHECK(t.latent[0] == doctest::Approx(std::tanh(0.5)));
    CHECK(t.reconstruction[1] == doctest::Approx(std::tanh(-1.0)));
    const double e0 = std::tanh(0.5) - 0.5, e1 = std::tanh(-1.0) + 1.0;
    CHECK(loss(identity_model(Activation::tanh), x) == doctest::Approx((e0 * e0 + e1 * e1) / 2));

    AEModel zero = init_model(3, 1);
    std::fill(zero.params.begin(), zero.params.end(), 0.0);
    zero.params[zero.dec_b() + 1] = 2;
    CHECK(forward(zero, Vector{1, 1, 1}).reconstruction == Vector{0, 2, 0});
    CHECK(loss(zero, Vector{1, 1, 1}) == doctest::Approx(1.0));
    CHECK(mean_loss(zero, Dataset{{1, 1, 1}, {0, 2, 0}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(forward(zero, Vector{1, 1}), InvariantError);
  }

  TEST_CASE("gradient vanishes at a perfect reconstruction") {
    const auto m = identity_model(Activation::identity);
    const auto g = gradients(m, Dataset{{0.5, -1}, {2, 3}});
    for (double v : g) CHECK(v == doctest::Approx(0).epsilon(1e-15));
  }

  TEST_CASE("gradients agree with finite differences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t dim = 1 + rng() % 10;
      const Activation act = trial % 3 == 0 ? Activation::identity : Activation::tanh;
      const AEModel m = init_model(dim, rng(), act);
      const Dataset batch = gaussian_rows(rng, 1 + rng() % 6, dim);
      CHECK(oracle::relative_error(gradients(m, batch), oracle::finite_difference_gradient(m, batch, 1e-5)) <= 1e-4);
    }
  }

  TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
    std::mt19937_64 rng(18);
    const AEModel m = init_model(5, 3);
    const Dataset batch = gaussian_rows(rng, 4, 5);
    Dataset doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const auto g1 = gradients(m, batch);
    const auto g2 = gradients(m, doubled);
    for (std::size_t j = 0; j < g1.size(); ++j) CHECK(g2[j] == doctest::Approx(g1[j]).epsilon(1e-12));
  }

  TEST_CASE("loss is quadratic along directions the encoder ignores") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t dim = 3 + rng() % 5;
      AEModel m = init_model(dim, rng());
      // Zero encoder weights on the last coordinate: moving along e_last leaves the latent fixed.
      for (std::size_t k = 0; k < kLatentDim; ++k) m.params[m.enc_w() + k * dim + dim - 1] = 0;
      const Vector x = gaussian_rows(rng, 1, dim)[0];
      auto at = [&](double t) {
        Vector y = x;
        y[dim - 1] += t;
        return loss(m, y);
      };
      const double second_difference = at(2) - 2 * at(1) + at(0);
      CHECK(second_difference == doctest::Approx(2.0 / static_cast<double>(dim)).epsilon(1e-9));
    }
  }

  TEST_CASE("training memorises a tiny dataset") {
    std::mt19937_64 rng(20);
    const Dataset data = gaussian_rows(rng, 3, 8, 0.5);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 4000;
    const auto r = train(init_model(8, 0), data, cfg);
    CHECK(r.final_loss < 1e-4);
    CHECK(r.final_loss <= r.initial_loss);
    CHECK(r.loss_history.size() == 4000);
    CHECK(r.final_loss == doctest::Approx(mean_loss(r.model, data)).epsilon(1e-12));
    CHECK(r.final_loss == *std::min_element(r.loss_history.begin(), r.loss_history.end()));
  }

  TEST_CASE("training is deterministic for a fixed seed") {
    std::mt19937_64 rng(21);
    const Dataset data = gaussian_rows(rng, 50, 6);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 7;
    const auto a = train(init_model(6, 5), data, cfg);
    const auto b = train(init_model(6, 5), data, cfg);
    CHECK(a.model == b.model);
    CHECK(a.loss_history == b.loss_history);
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 0.05;
    const auto c = train(init_model(6, 5), data, cfg);
    CHECK(c.final_loss <= c.initial_loss);
  }

  TEST_CASE("divergence is reported as a configuration error") {
    std::mt19937_64 rng(22);
    const Dataset data = gaussian_rows(rng, 20, 4, 10.0);
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.activation = Activation::identity;
    cfg.learning_rate = 1e6;
    cfg.epochs = 50;
    CHECK_THROWS_AS(train(init_model(4, 0, Activation::identity), data, cfg), ConfigError);
    TrainConfig bad;
    bad.learning_rate = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = TrainConfig{};
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(train(init_model(4, 0), Dataset{}, TrainConfig{}), DataError);
  }

  TEST_CASE("scaler standardises columns and inverts") {
    std::mt19937_64 rng(23);
    Dataset data = gaussian_rows(rng, 40, 5, 3.0);
    for (auto& r : data) r[2] = 7.0;  // constant column
    const Scaler s = fit_scaler(data);
    CHECK(s.std[2] == kScalerEpsilon);
    const Dataset z = s.apply(data);
    for (std::size_t k = 0; k < 5; ++k) {
      double mean = 0, sq = 0;
      for (const auto& r : z) mean += r[k];
      mean /= static_cast<double>(z.size());
      for (const auto& r : z) sq += (r[k] - mean) * (r[k] - mean);
      CHECK(mean == doctest::Approx(0).epsilon(1e-12));
      CHECK(std::sqrt(sq / static_cast<double>(z.size())) == doctest::Approx(k == 2 ? 0.0 : 1.0));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Vector back = s.invert(z[i]);
      for (std::size_t k = 0; k < 5; ++k) CHECK(back[k] == doctest::Approx(data[i][k]).epsilon(1e-12));
    }
  }

  TEST_CASE("model dump round-trips exactly") {
    std::mt19937_64 rng(24);
    const Dataset data = gaussian_rows(rng, 10, 8);
    ModelBundle bundle{init_model(8, 9), fit_scaler(data), config_hash(TrainConfig{}, 8)};
    bundle.model.params[3] = 1.0 / 3.0;
    const std::string text = serialize_model(bundle);
    CHECK(text.rfind("zzhd-autoencoder 1", 0) == 0);
    CHECK(deserialize_model(text) == bundle);
    CHECK(serialize_model(deserialize_model(text)) == text);
    CHECK_THROWS_AS(deserialize_model("zzhd-autoencoder 99\n"), DataError);
    CHECK_THROWS_AS(deserialize_model("hello"), DataError);
    CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), DataError);
  }

  TEST_CASE("config hash tracks the training settings") {
    TrainConfig a;
    TrainConfig b = a;
    CHECK(config_hash(a, 8) == config_hash(b, 8));
    CHECK(config_hash(a, 8) != config_hash(a, 48));
    b.learning_rate = 2e-3;
    CHECK(config_hash(a, 8) != config_hash(b, 8));
    b = a;
    b.seed = 1;
    CHECK(config_hash(a, 8) != config_hash(b, 8));
    CHECK(format_loss_history(std::vector<double>{0.5, 0.25}) == "epoch,loss\n1,0.5\n2,0.25\n");
    CHECK(parse_activation("identity") == Activation::identity);
    CHECK(parse_optimizer("sgd") == Optimizer::sgd);
    CHECK_THROWS_AS(parse_optimizer("rmsprop"), ConfigError);
  }
}
