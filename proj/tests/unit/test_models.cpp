#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "screening/grad_check.hpp"
#include "screening/models.hpp"
#include "test_support.hpp"

namespace screening {
namespace {

using testing::random_sparse;

double ref_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Second implementation of the MLP forward pass over the flat parameter
// layout: hidden weights input-major, hidden bias, output weights, bias.
double oracle_mlp_proba(const MlpModel& m, const FeatureVector& x) {
  const std::size_t h = m.hidden_dim();
  const std::size_t in = m.input_dim();
  std::vector<double> pre(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) pre[j] = m.parameter(in * h + j);
  for (std::size_t k = 0; k < x.nnz(); ++k)
    for (std::size_t j = 0; j < h; ++j) pre[j] += x.values[k] * m.parameter(x.indices[k] * h + j);
  double logit = m.parameter(in * h + h + h);
  for (std::size_t j = 0; j < h; ++j) {
    const double a = m.activation() == Activation::Relu ? std::max(0.0, pre[j]) : std::tanh(pre[j]);
    logit += a * m.parameter(in * h + h + j);
  }
  return ref_sigmoid(logit);
}

FeatureVector zero_vector(std::uint32_t dim) {
  FeatureVector fv;
  fv.dim = dim;
  return fv;
}

FeatureVector one_hot(std::uint32_t dim, std::uint32_t i, double v = 1.0) {
  FeatureVector fv;
  fv.dim = dim;
  fv.indices = {i};
  fv.values = {v};
  return fv;
}

TEST(Linear, ZeroModelPredictsHalf) {
  LinearModel m(50);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(m.predict_proba(random_sparse(rng, 50, 5)), 0.5);
}

TEST(Linear, ZeroLogitPredictsHalf) {
  LinearModel m(4);
  m.set_weight(0, 2.0);
  m.set_weight(1, -1.0);
  m.set_bias(0.0);
  FeatureVector x;
  x.dim = 4;
  x.indices = {0, 1};
  x.values = {0.5, 1.0};
  EXPECT_EQ(m.logit(x), 0.0);
  EXPECT_EQ(m.predict_proba(x), 0.5);
}

TEST(Linear, ForwardMatchesOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    LinearModel m(40);
    for (std::uint32_t i = 0; i < 40; ++i) m.set_weight(i, rng.uniform(-1, 1));
    m.set_bias(rng.uniform(-1, 1));
    const auto x = random_sparse(rng, 40, 6);
    double z = m.bias();
    for (std::size_t k = 0; k < x.nnz(); ++k) z += m.weight(x.indices[k]) * x.values[k];
    EXPECT_NEAR(m.predict_proba(x), ref_sigmoid(z), 1e-14);
  }
}

TEST(LogisticLoss, StableAtExtremes) {
  EXPECT_NEAR(logistic_loss(0.0, true), std::log(2.0), 1e-15);
  EXPECT_NEAR(logistic_loss(800.0, true), 0.0, 1e-300);
  EXPECT_NEAR(logistic_loss(800.0, false), 800.0, 1e-9);
  EXPECT_TRUE(std::isfinite(logistic_loss(-1e6, true)));
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_TRUE(std::isfinite(sigmoid(-1e6)));
}

TEST(Predict, ThresholdIsInclusive) {
  AnyModel zero = LinearModel(3);
  const auto x = zero_vector(3);
  EXPECT_TRUE(predict(zero, x, 0.5));
  LinearModel m(3);
  m.set_bias(std::log(0.49 / 0.51));
  EXPECT_NEAR(m.predict_proba(x), 0.49, 1e-12);
  EXPECT_FALSE(predict(AnyModel(m), x, 0.5));
}

TEST(Predict, DimensionMismatchThrows) {
  AnyModel m = LinearModel(3);
  EXPECT_THROW(predict_proba(m, zero_vector(4)), ModelError);
  MlpModel mlp(3, 2, Activation::Relu, 0.1, 1);
  EXPECT_THROW(embed(mlp, zero_vector(5)), ModelError);
}

// Thresholding at every distinct score reproduces exactly the confusion
// matrices achievable by a score cut.
TEST(Predict, ThresholdSweepReproducesEveryCut) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = 1 + rng.below(20);
    std::vector<std::pair<double, bool>> points;
    LinearModel m(1);
    m.set_weight(0, 1.0);
    for (std::uint64_t i = 0; i < n; ++i) points.emplace_back(std::round(rng.uniform(-3, 3) * 2) / 2, rng.bernoulli(0.4));
    using Counts = std::tuple<int, int, int, int>;
    std::set<Counts> via_predict;
    std::set<double> scores;
    for (auto& [s, y] : points) scores.insert(sigmoid(s));
    scores.insert(2.0);  // above every probability: all negative
    for (double t : scores) {
      int tp = 0, fp = 0, fn = 0, tn = 0;
      for (auto& [s, y] : points) {
        const bool p = predict(AnyModel(m), one_hot(1, 0, s), t);
        tp += p && y;
        fp += p && !y;
        fn += !p && y;
        tn += !p && !y;
      }
      via_predict.insert({tp, fp, fn, tn});
    }
    std::set<Counts> oracle;
    std::set<double> raw;
    for (auto& [s, y] : points) raw.insert(s);
    raw.insert(1e9);
    for (double cut : raw) {
      int tp = 0, fp = 0, fn = 0, tn = 0;
      for (auto& [s, y] : points) {
        const bool p = s >= cut;
        tp += p && y;
        fp += p && !y;
        fn += !p && y;
        tn += !p && !y;
      }
      oracle.insert({tp, fp, fn, tn});
    }
    EXPECT_EQ(via_predict, oracle);
  }
}

TEST(GradCheck, LinearBelowTightTolerance) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    LinearModel m(64);
    for (std::uint32_t i = 0; i < 64; ++i) m.set_weight(i, rng.uniform(-0.5, 0.5));
    m.set_bias(rng.uniform(-0.5, 0.5));
    const auto x = random_sparse(rng, 64, 8);
    GradCheckOptions opt;
    opt.l2 = trial % 2 ? 1e-3 : 0.0;
    EXPECT_LT(grad_check(m, x, trial % 3 == 0, 1e-5, opt), 1e-5);
  }
}

TEST(GradCheck, MlpTanhBelowTolerance) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    MlpModel m(48, 6, Activation::Tanh, 0.3, rng.next());
    const auto x = random_sparse(rng, 48, 7);
    GradCheckOptions opt;
    opt.l2 = 1e-3;
    EXPECT_LT(grad_check(m, x, trial % 2 == 0, 1e-5, opt), 1e-4);
  }
}

TEST(GradCheck, MlpReluBelowTolerance) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    MlpModel m(48, 6, Activation::Relu, 0.3, rng.next());
    const auto x = random_sparse(rng, 48, 7);
    EXPECT_LT(grad_check(m, x, trial % 2 == 0, 1e-6), 1e-4);
  }
}

TEST(GradCheck, ZeroInputGradientIsBiasOnly) {
  LinearModel m(10);
  for (std::uint32_t i = 0; i < 10; ++i) m.set_weight(i, 0.1 * i);
  m.set_bias(0.3);
  const auto x = zero_vector(10);
  for (bool y : {false, true}) {
    const auto g = m.loss_gradient(x, y, 0.0);
    ASSERT_EQ(g.size(), 11u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(g[i], 0.0);
    EXPECT_NEAR(g[10], ref_sigmoid(0.3) - (y ? 1.0 : 0.0), 1e-15);
  }
}

TEST(GradCheck, RejectsBadEpsilon) {
  LinearModel m(2);
  EXPECT_THROW(grad_check(m, zero_vector(2), true, 0.1), std::invalid_argument);
}

TEST(Mlp, ZeroInputZeroBiasEmbedsToZero) {
  for (auto act : {Activation::Relu, Activation::Tanh}) {
    MlpModel m(20, 5, act, 0.2, 9);
    const auto h = m.embed(zero_vector(20));
    ASSERT_EQ(h.size(), 5u);
    for (double v : h) EXPECT_EQ(v, 0.0);
  }
}

TEST(Mlp, EmbedThenOutputReproducesProba) {
  Rng rng(6);
  MlpModel m(30, 8, Activation::Relu, 0.5, 3);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_sparse(rng, 30, 5);
    EXPECT_EQ(sigmoid(m.output_logit(m.embed(x))), m.predict_proba(x));
  }
}

TEST(Mlp, ForwardMatchesOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    MlpModel m(25, 4, trial % 2 ? Activation::Tanh : Activation::Relu, 0.5, rng.next());
    // Perturb biases too so the oracle sees non-zero values everywhere.
    for (std::size_t i = 25 * 4; i < m.parameter_count(); ++i) m.set_parameter(i, rng.uniform(-0.5, 0.5));
    const auto x = random_sparse(rng, 25, 6);
    EXPECT_NEAR(m.predict_proba(x), oracle_mlp_proba(m, x), 1e-13);
  }
}

TEST(Mlp, InitIsSeeded) {
  MlpModel a(30, 4, Activation::Relu, 0.05, 11);
  MlpModel b(30, 4, Activation::Relu, 0.05, 11);
  MlpModel c(30, 4, Activation::Relu, 0.05, 12);
  bool differs = false;
  for (std::size_t i = 0; i < a.parameter_count(); ++i) {
    EXPECT_EQ(a.parameter(i), b.parameter(i));
    differs |= a.parameter(i) != c.parameter(i);
    if (i < 30 * 4) EXPECT_LE(std::abs(a.parameter(i)), 0.05);
  }
  EXPECT_TRUE(differs);
}

TEST(Training, SeparablePairReachesMargin) {
  const auto pos = one_hot(8, 1, 1.0);
  const auto neg = one_hot(8, 2, 1.0);
  std::vector<Example> data{{pos, true}, {neg, false}};
  TrainConfig c;
  c.epochs = 500;
  c.batch_size = 2;
  c.learning_rate = 0.5;
  c.l2 = 0.0;
  for (auto kind : {ModelKind::Linear, ModelKind::Mlp}) {
    const auto m = train(kind, data, c);
    const double lp = -std::log(predict_proba(m, pos));
    const double ln = -std::log(1.0 - predict_proba(m, neg));
    // loss < log(1/0.9) on a point means its probability margin exceeds 0.9.
    EXPECT_LT(lp, std::log(1.0 / 0.9));
    EXPECT_LT(ln, std::log(1.0 / 0.9));
    EXPECT_GT(predict_proba(m, pos), 0.9);
    EXPECT_LT(predict_proba(m, neg), 0.1);
  }
}

TEST(Training, SingleLabelDataSaturates) {
  Rng rng(8);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(random_sparse(rng, 30, 4));
  std::vector<Example> data;
  for (const auto& x : xs) data.push_back({x, true});
  TrainConfig c;
  c.epochs = 200;
  c.learning_rate = 0.5;
  const auto m = train(ModelKind::Linear, data, c);
  for (const auto& x : xs) EXPECT_GE(predict_proba(m, x), 0.99);
}

TEST(Training, DeterministicBitwise) {
  Rng rng(9);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(random_sparse(rng, 50, 6));
  std::vector<Example> data;
  for (std::size_t i = 0; i < xs.size(); ++i) data.push_back({xs[i], i % 3 == 0});
  TrainConfig c;
  c.epochs = 5;
  c.seed = 42;
  c.hidden_dim = 4;
  for (auto kind : {ModelKind::Linear, ModelKind::Mlp}) {
    std::ostringstream a;
    std::ostringstream b;
    save_model(a, train(kind, data, c), c, 1);
    save_model(b, train(kind, data, c), c, 1);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(Training, StepCallbackReportsDecreasingLoss) {
  Rng rng(10);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 64; ++i) xs.push_back(random_sparse(rng, 20, 3));
  std::vector<Example> data;
  for (std::size_t i = 0; i < xs.size(); ++i) data.push_back({xs[i], xs[i].values[0] > 0});
  TrainConfig c;
  c.epochs = 30;
  c.batch_size = 64;
  std::vector<double> losses;
  train_linear(data, c, [&](const StepInfo& s) { losses.push_back(s.mean_loss); });
  ASSERT_EQ(losses.size(), 30u);
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Training, RejectsEmptyDataAndBadConfig) {
  std::vector<Example> none;
  EXPECT_THROW(train_linear(none, TrainConfig{}), TrainingError);
  TrainConfig c;
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Training, DivergenceIsReported) {
  // The first step overshoots to an infinite weight; the second example then
  // sees an infinite loss.
  FeatureVector pos;
  pos.dim = 4;
  pos.indices = {0, 1};
  pos.values = {1e200, 1e200};
  const auto neg = one_hot(4, 0, 1e200);
  std::vector<Example> data{{pos, true}, {neg, false}};
  TrainConfig c;
  c.learning_rate = 1e300;
  c.batch_size = 1;
  c.epochs = 3;
  EXPECT_THROW(train_linear(data, c), TrainingError);
}

TEST(Serialization, RoundTripBothKinds) {
  Rng rng(12);
  LinearModel lin(16);
  for (std::uint32_t i = 0; i < 16; ++i) lin.set_weight(i, rng.uniform(-1, 1));
  lin.set_bias(0.25);
  MlpModel mlp(16, 3, Activation::Tanh, 0.4, 5);
  TrainConfig c;
  c.hidden_dim = 3;
  for (const AnyModel& model : {AnyModel(lin), AnyModel(mlp)}) {
    std::stringstream s;
    save_model(s, model, c, 0xabcdef);
    const auto loaded = load_model(s);
    EXPECT_EQ(loaded.featurizer_fingerprint, 0xabcdefULL);
    EXPECT_EQ(loaded.config, c);
    EXPECT_EQ(kind_of(loaded.model), kind_of(model));
    for (int i = 0; i < 10; ++i) {
      const auto x = random_sparse(rng, 16, 4);
      EXPECT_EQ(predict_proba(loaded.model, x), predict_proba(model, x));
    }
  }
}

TEST(Serialization, TruncatedStreamThrows) {
  std::stringstream s;
  save_model(s, AnyModel(LinearModel(8)), TrainConfig{}, 1);
  const auto bytes = s.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_model(cut), IoError);
  std::stringstream garbage("not a model");
  EXPECT_THROW(load_model(garbage), IoError);
}

TEST(Names, ParseRoundTrip) {
  for (auto k : {ModelKind::Linear, ModelKind::Mlp}) EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
  for (auto a : {Activation::Relu, Activation::Tanh}) EXPECT_EQ(parse_activation(activation_name(a)), a);
  EXPECT_FALSE(parse_model_kind("svm").has_value());
}

}  // namespace
}  // namespace screening
