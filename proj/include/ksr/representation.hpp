#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ksr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultChannels = 105;
inline constexpr std::size_t kBandCount = 8;
inline constexpr std::array<std::string_view, kBandCount> kBandNames = {
    "theta1", "theta2", "alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2"};

/// Band-power matrix for one word fixation: channels x bands.
struct WordEegEmbedding {
  Matrix values;
  std::string subject_id;
};

/// All channels of one frequency band.
struct BandToken {
  Vector values;
  std::size_t band_index = 0;
};

struct MaskPattern {
  std::vector<bool> visible;
  double ratio = 0.1;

  std::size_t visible_count() const;
};

struct LossHyperparams {
  double temperature = 0.3;
  double mask_ratio = 0.1;
  double alpha = 0.5;
  double beta = 0.5;

  /// Throws ConfigError unless tau > 0, eta in [0, 1), alpha, beta >= 0.
  void validate() const;
};

inline constexpr double kVarianceFloor = 1e-8;

/// Per-subject, per-entry standardization across that subject's samples.
/// Standard deviations below kVarianceFloor are clamped to it, so constant
/// entries map to 0. Throws std::invalid_argument when a subject has fewer
/// than two samples or shapes disagree.
std::vector<WordEegEmbedding> subject_normalize(std::vector<WordEegEmbedding> batch);

std::vector<BandToken> band_split(const WordEegEmbedding& e);
/// Inverse of band_split: tokens must cover bands 0..D-1 exactly once.
Matrix reconstruct(std::span<const BandToken> tokens);

struct MaskedTokens {
  std::vector<BandToken> visible;
  MaskPattern pattern;
};

/// Masks each token independently with probability `ratio`, redrawing when
/// every token would be masked.
MaskedTokens apply_mask(std::span<const BandToken> tokens, double ratio, std::mt19937_64& rng);

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;
};

/// Masked contrastive loss over M (EEG, word) pairs with dot-product
/// similarity: -(1/M) sum_i log softmax_j(h_i . w_j / tau)[i]. Returns the
/// gradient with respect to H. Throws std::invalid_argument on shape mismatch,
/// tau <= 0 or non-finite input.
LossAndGradient masked_contrastive_loss(const Matrix& h, const Matrix& w, double temperature);

/// Mean softmax cross-entropy; gradient with respect to the logits.
LossAndGradient supervised_loss(const Matrix& logits, std::span<const std::size_t> targets);

double combined_loss(double contrastive, double supervised, const LossHyperparams& params);

/// Stand-in encoder: one linear map channels -> d applied per visible band
/// token, mean-pooled, followed by a linear classification head.
class ToyEncoder {
 public:
  struct Parameters {
    Matrix projection;  // d x channels
    Matrix head;        // classes x d
    Vector bias;        // classes
  };

  struct Sample {
    std::vector<BandToken> visible;
    std::size_t target = 0;
  };

  struct Evaluation {
    double loss = 0.0;
    double contrastive = 0.0;
    double supervised = 0.0;
    Parameters gradient;
  };

  explicit ToyEncoder(Parameters params);
  static ToyEncoder random(std::size_t channels, std::size_t dim, std::size_t classes, std::mt19937_64& rng);

  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }

  /// Throws std::invalid_argument on an empty token list or channel mismatch.
  Vector encode(std::span<const BandToken> visible) const;
  Vector logits(const Vector& h) const;

  /// Combined objective over a batch and its gradient with respect to every
  /// parameter. `word_table` rows are word representations indexed by target.
  Evaluation evaluate(std::span<const Sample> batch, const Matrix& word_table, const LossHyperparams& hp) const;

  void step(const Parameters& gradient, double learning_rate);

 private:
  Parameters params_;
};

struct GradcheckReport {
  double contrastive_max_rel_error = 0.0;
  double supervised_max_rel_error = 0.0;
  double encoder_max_rel_error = 0.0;
  std::size_t points = 0;
};

/// Central-difference check of every analytical gradient at `points` random
/// instances. Relative error per point is ||analytic - numeric|| /
/// max(||analytic||, ||numeric||).
GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t points = 20, const LossHyperparams& hp = {});

}  // namespace ksr
