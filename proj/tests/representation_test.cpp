#include "ksr/representation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ksr/error.hpp"
#include "oracles.hpp"
#include "toy_problem.hpp"

using namespace ksr;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

double rel_error(const Matrix& a, const Matrix& b) {
  const double d = std::max(a.norm(), b.norm());
  return d == 0 ? 0.0 : (a - b).norm() / d;
}

}  // namespace

TEST(SubjectNormalize, StandardizesPerSubject) {
  std::mt19937_64 rng(1);
  std::vector<WordEegEmbedding> batch;
  for (int i = 0; i < 6; ++i) batch.push_back({random_matrix(4, kBandCount, rng, 3.0).array() + 5.0, i < 3 ? "a" : "b"});
  batch[0].values(0, 0) = batch[1].values(0, 0) = batch[2].values(0, 0) = 7.0;  // constant entry for subject a
  auto out = subject_normalize(batch);
  for (const char* subject : {"a", "b"}) {
    Matrix mean = Matrix::Zero(4, kBandCount), sq = Matrix::Zero(4, kBandCount);
    for (const auto& e : out) {
      if (e.subject_id != subject) continue;
      mean += e.values;
      sq += e.values.cwiseProduct(e.values);
    }
    mean /= 3.0;
    sq /= 3.0;
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < sq.size(); ++i) {
      if (std::string(subject) == "a" && i == 0) {
        EXPECT_EQ(sq.data()[i], 0.0);
      } else {
        EXPECT_NEAR(sq.data()[i], 1.0, 1e-9);
      }
    }
  }
  batch.push_back({random_matrix(4, kBandCount, rng), "lonely"});
  EXPECT_THROW(subject_normalize(batch), std::invalid_argument);
}

TEST(BandSplit, RoundTrips) {
  std::mt19937_64 rng(2);
  WordEegEmbedding e{random_matrix(static_cast<Eigen::Index>(kDefaultChannels), kBandCount, rng), "s"};
  auto tokens = band_split(e);
  ASSERT_EQ(tokens.size(), kBandCount);
  EXPECT_EQ(tokens[3].band_index, 3u);
  EXPECT_EQ(tokens[3].values, e.values.col(3));
  EXPECT_EQ(reconstruct(tokens), e.values);
  std::vector<BandToken> gap(tokens.begin() + 1, tokens.end());  // band 0 missing
  EXPECT_THROW(reconstruct(gap), std::invalid_argument);
  auto twice = tokens;
  twice[1].band_index = 0;
  EXPECT_THROW(reconstruct(twice), std::invalid_argument);
}

TEST(ApplyMask, RatioAndNeverEmpty) {
  std::mt19937_64 rng(3);
  WordEegEmbedding e{random_matrix(5, kBandCount, rng), "s"};
  auto tokens = band_split(e);
  EXPECT_EQ(apply_mask(tokens, 0.0, rng).visible.size(), kBandCount);
  double masked = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    auto m = apply_mask(tokens, 0.1, rng);
    EXPECT_EQ(m.visible.size(), m.pattern.visible_count());
    masked += static_cast<double>(kBandCount - m.visible.size());
  }
  EXPECT_NEAR(masked / (draws * static_cast<double>(kBandCount)), 0.1, 0.005);
  for (int i = 0; i < 200; ++i) EXPECT_GE(apply_mask(tokens, 0.95, rng).visible.size(), 1u);
}

TEST(ContrastiveLoss, SinglePairIsZero) {
  std::mt19937_64 rng(4);
  auto r = masked_contrastive_loss(random_matrix(1, 6, rng), random_matrix(1, 6, rng), 0.3);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.gradient.norm(), 0.0);
}

TEST(ContrastiveLoss, IdenticalSimilaritiesGiveLogM) {
  // All-zero similarities: every softmax is uniform over M.
  auto r = masked_contrastive_loss(Matrix::Zero(7, 3), Matrix::Ones(7, 3), 0.3);
  EXPECT_NEAR(r.loss, std::log(7.0), 1e-12);
}

TEST(ContrastiveLoss, MatchesLoopOracleAndFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int point = 0; point < 20; ++point) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 6), d = 1 + static_cast<Eigen::Index>(rng() % 5);
    Matrix h = random_matrix(m, d, rng), w = random_matrix(m, d, rng);
    auto r = masked_contrastive_loss(h, w, 0.3);
    EXPECT_NEAR(r.loss, oracle::contrastive_loss(h, w, 0.3), 1e-12);
    auto fd = oracle::numeric_gradient([&](const Matrix& x) { return oracle::contrastive_loss(x, w, 0.3); }, h);
    EXPECT_LT(rel_error(r.gradient, fd), 1e-5) << "point " << point;
  }
}

TEST(ContrastiveLoss, RejectsBadInput) {
  EXPECT_THROW(masked_contrastive_loss(Matrix::Zero(2, 3), Matrix::Zero(3, 3), 0.3), std::invalid_argument);
  EXPECT_THROW(masked_contrastive_loss(Matrix::Zero(2, 3), Matrix::Zero(2, 3), 0.0), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 3);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(masked_contrastive_loss(bad, Matrix::Zero(2, 3), 0.3), std::invalid_argument);
}

TEST(SupervisedLoss, UniformLogitsGiveLogV) {
  std::vector<std::size_t> targets = {0, 17, 99};
  auto r = supervised_loss(Matrix::Constant(3, 100, 0.25), targets);
  EXPECT_NEAR(r.loss, std::log(100.0), 1e-12);
}

TEST(SupervisedLoss, MatchesLoopOracleAndFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int point = 0; point < 20; ++point) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 6), c = 2 + static_cast<Eigen::Index>(rng() % 8);
    Matrix z = random_matrix(m, c, rng, 2.0);
    std::vector<std::size_t> t(static_cast<std::size_t>(m));
    for (auto& x : t) x = rng() % static_cast<std::size_t>(c);
    auto r = supervised_loss(z, t);
    EXPECT_NEAR(r.loss, oracle::cross_entropy(z, t), 1e-12);
    auto fd = oracle::numeric_gradient([&](const Matrix& x) { return oracle::cross_entropy(x, t); }, z);
    EXPECT_LT(rel_error(r.gradient, fd), 1e-5) << "point " << point;
  }
}

TEST(CombinedLoss, WeightsTerms) {
  LossHyperparams hp;
  EXPECT_DOUBLE_EQ(combined_loss(2.0, 4.0, hp), 3.0);
  hp.alpha = 1.0;
  hp.beta = 0.0;
  EXPECT_DOUBLE_EQ(combined_loss(2.0, 4.0, hp), 2.0);
}

TEST(LossHyperparams, Validation) {
  LossHyperparams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.mask_ratio = 1.0;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = {};
  hp.temperature = 0.0;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = {};
  hp.alpha = -1;
  EXPECT_THROW(hp.validate(), ConfigError);
}

TEST(ToyEncoder, EveryParameterGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  auto encoder = ToyEncoder::random(5, 3, 4, rng);
  Matrix words = random_matrix(4, 3, rng);
  std::vector<ToyEncoder::Sample> batch;
  for (std::size_t i = 0; i < 6; ++i) {
    WordEegEmbedding e{random_matrix(5, kBandCount, rng), "s"};
    batch.push_back({apply_mask(band_split(e), 0.1, rng).visible, i % 4});
  }
  const LossHyperparams hp;
  auto eval = encoder.evaluate(batch, words, hp);
  auto loss_with = [&](auto set) {
    return [&, set](const Matrix& x) {
      ToyEncoder probe = encoder;
      set(probe.parameters(), x);
      return probe.evaluate(batch, words, hp).loss;
    };
  };
  const auto& p = encoder.parameters();
  EXPECT_LT(rel_error(eval.gradient.projection,
                      oracle::numeric_gradient(loss_with([](auto& q, const Matrix& x) { q.projection = x; }), p.projection)),
            1e-5);
  EXPECT_LT(rel_error(eval.gradient.head,
                      oracle::numeric_gradient(loss_with([](auto& q, const Matrix& x) { q.head = x; }), p.head)),
            1e-5);
  Matrix bias = p.bias;
  EXPECT_LT(rel_error(eval.gradient.bias, oracle::numeric_gradient(
                                              loss_with([](auto& q, const Matrix& x) { q.bias = x.col(0); }), bias)),
            1e-5);
}

TEST(ToyEncoder, BuiltInGradcheck) {
  auto report = run_gradcheck(11, 20);
  EXPECT_EQ(report.points, 20u);
  EXPECT_LT(report.contrastive_max_rel_error, 1e-5);
  EXPECT_LT(report.supervised_max_rel_error, 1e-5);
  EXPECT_LT(report.encoder_max_rel_error, 1e-5);
}

TEST(ToyEncoder, ShapeErrors) {
  std::mt19937_64 rng(8);
  auto encoder = ToyEncoder::random(5, 3, 4, rng);
  EXPECT_THROW(encoder.encode({}), std::invalid_argument);
  std::vector<BandToken> wrong = {{Vector::Zero(6), 0}};
  EXPECT_THROW(encoder.encode(wrong), std::invalid_argument);
}

TEST(ToyEncoder, LearnsSeparableProblem) {
  std::mt19937_64 rng(9);
  auto problem = oracle::make_toy_problem(10, 20, 16, 8, 0.5, rng);
  auto run = oracle::train_toy_encoder(problem, 8, {}, 500, 0.5, 0.8, rng);
  EXPECT_GT(run.accuracy, 0.8);
  EXPECT_LT(run.losses.back(), run.losses.front());
}
