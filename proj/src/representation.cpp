#include "ksr/representation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ksr/error.hpp"

namespace ksr {
namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

// Row-wise softmax and log-sum-exp with max subtraction.
Matrix row_softmax(const Matrix& z, Vector& log_norm) {
  log_norm.resize(z.rows());
  Matrix p(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    const auto shifted = (z.row(i).array() - mx).exp();
    const double sum = shifted.sum();
    p.row(i) = shifted / sum;
    log_norm(i) = mx + std::log(sum);
  }
  return p;
}

}  // namespace

std::size_t MaskPattern::visible_count() const {
  std::size_t n = 0;
  for (bool v : visible) n += v ? 1 : 0;
  return n;
}

void LossHyperparams::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) throw ConfigError("mask ratio must lie in [0, 1)");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("loss weights must be non-negative");
}

std::vector<WordEegEmbedding> subject_normalize(std::vector<WordEegEmbedding> batch) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < batch.size(); ++i) by_subject[batch[i].subject_id].push_back(i);

  for (const auto& [subject, members] : by_subject) {
    if (members.size() < 2) {
      throw std::invalid_argument("subject '" + subject + "' needs at least two samples to normalize");
    }
    const auto rows = batch[members[0]].values.rows();
    const auto cols = batch[members[0]].values.cols();
    Matrix mean = Matrix::Zero(rows, cols);
    for (std::size_t i : members) {
      if (batch[i].values.rows() != rows || batch[i].values.cols() != cols) {
        throw std::invalid_argument("subject '" + subject + "': embedding shapes differ");
      }
      mean += batch[i].values;
    }
    mean /= static_cast<double>(members.size());
    Matrix var = Matrix::Zero(rows, cols);
    for (std::size_t i : members) var += (batch[i].values - mean).array().square().matrix();
    var /= static_cast<double>(members.size());
    const Matrix std_dev = var.array().sqrt().max(kVarianceFloor).matrix();
    for (std::size_t i : members) {
      batch[i].values = ((batch[i].values - mean).array() / std_dev.array()).matrix();
    }
  }
  return batch;
}

std::vector<BandToken> band_split(const WordEegEmbedding& e) {
  std::vector<BandToken> tokens;
  tokens.reserve(static_cast<std::size_t>(e.values.cols()));
  for (Eigen::Index b = 0; b < e.values.cols(); ++b) {
    tokens.push_back({e.values.col(b), static_cast<std::size_t>(b)});
  }
  return tokens;
}

Matrix reconstruct(std::span<const BandToken> tokens) {
  if (tokens.empty()) return {};
  const auto rows = tokens.front().values.size();
  Matrix out(rows, static_cast<Eigen::Index>(tokens.size()));
  std::vector<bool> filled(tokens.size(), false);
  for (const auto& t : tokens) {
    if (t.band_index >= tokens.size() || filled[t.band_index] || t.values.size() != rows) {
      throw std::invalid_argument("reconstruct: tokens do not partition the bands");
    }
    filled[t.band_index] = true;
    out.col(static_cast<Eigen::Index>(t.band_index)) = t.values;
  }
  return out;
}

MaskedTokens apply_mask(std::span<const BandToken> tokens, double ratio, std::mt19937_64& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw ConfigError("mask ratio must lie in [0, 1)");
  MaskedTokens out;
  out.pattern.ratio = ratio;
  if (tokens.empty()) return out;
  std::bernoulli_distribution masked(ratio);
  do {
    out.pattern.visible.assign(tokens.size(), true);
    for (std::size_t i = 0; i < tokens.size(); ++i) out.pattern.visible[i] = !masked(rng);
  } while (out.pattern.visible_count() == 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (out.pattern.visible[i]) out.visible.push_back(tokens[i]);
  }
  return out;
}

LossAndGradient masked_contrastive_loss(const Matrix& h, const Matrix& w, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (h.rows() < 1 || h.rows() != w.rows() || h.cols() != w.cols()) {
    throw std::invalid_argument("contrastive loss: H and W must both be M x d with M >= 1");
  }
  require_finite(h, "H");
  require_finite(w, "W");
  const auto m = static_cast<double>(h.rows());
  const Matrix logits = (h * w.transpose()) / temperature;
  Vector log_norm;
  Matrix p = row_softmax(logits, log_norm);

  double loss = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) loss -= logits(i, i) - log_norm(i);
  loss /= m;

  p.diagonal().array() -= 1.0;
  LossAndGradient out;
  out.loss = loss;
  out.gradient = (p * w) / (m * temperature);
  return out;
}

LossAndGradient supervised_loss(const Matrix& logits, std::span<const std::size_t> targets) {
  if (logits.rows() < 1 || static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw std::invalid_argument("supervised loss: need one target per logit row");
  }
  require_finite(logits, "logits");
  const auto m = static_cast<double>(logits.rows());
  Vector log_norm;
  Matrix p = row_softmax(logits, log_norm);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const std::size_t t = targets[static_cast<std::size_t>(i)];
    if (t >= static_cast<std::size_t>(logits.cols())) {
      throw std::invalid_argument("supervised loss: target " + std::to_string(t) + " out of range");
    }
    loss -= logits(i, static_cast<Eigen::Index>(t)) - log_norm(i);
    p(i, static_cast<Eigen::Index>(t)) -= 1.0;
  }
  return {loss / m, p / m};
}

double combined_loss(double contrastive, double supervised, const LossHyperparams& params) {
  return params.alpha * contrastive + params.beta * supervised;
}

ToyEncoder::ToyEncoder(Parameters params) : params_(std::move(params)) {
  const auto d = params_.projection.rows();
  if (params_.head.cols() != d || params_.bias.size() != params_.head.rows()) {
    throw std::invalid_argument("toy encoder: parameter shapes disagree");
  }
}

ToyEncoder ToyEncoder::random(std::size_t channels, std::size_t dim, std::size_t classes, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto fill = [&](Matrix& m, double scale) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal(rng);
  };
  Parameters p;
  p.projection.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(channels));
  p.head.resize(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  fill(p.projection, 1.0 / std::sqrt(static_cast<double>(channels)));
  fill(p.head, 1.0 / std::sqrt(static_cast<double>(dim)));
  p.bias = Vector::Zero(static_cast<Eigen::Index>(classes));
  return ToyEncoder(std::move(p));
}

Vector ToyEncoder::encode(std::span<const BandToken> visible) const {
  if (visible.empty()) throw std::invalid_argument("toy encoder: no visible tokens");
  Vector pooled = Vector::Zero(params_.projection.cols());
  for (const auto& t : visible) {
    if (t.values.size() != params_.projection.cols()) {
      throw std::invalid_argument("toy encoder: token has " + std::to_string(t.values.size()) +
                                  " channels, expected " + std::to_string(params_.projection.cols()));
    }
    pooled += t.values;
  }
  pooled /= static_cast<double>(visible.size());
  return params_.projection * pooled;
}

Vector ToyEncoder::logits(const Vector& h) const { return params_.head * h + params_.bias; }

ToyEncoder::Evaluation ToyEncoder::evaluate(std::span<const Sample> batch, const Matrix& word_table,
                                            const LossHyperparams& hp) const {
  hp.validate();
  if (batch.empty()) throw std::invalid_argument("toy encoder: empty batch");
  const auto m = static_cast<Eigen::Index>(batch.size());
  const auto channels = params_.projection.cols();
  const auto d = params_.projection.rows();
  if (word_table.cols() != d) throw std::invalid_argument("word table dimension differs from encoder output");

  // Linear encoder: h_i = P * mean(visible tokens), so cache the pooled inputs.
  Matrix pooled(m, channels);
  Matrix h(m, d);
  Matrix w(m, d);
  std::vector<std::size_t> targets(batch.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    if (s.target >= static_cast<std::size_t>(word_table.rows())) {
      throw std::invalid_argument("toy encoder: target outside word table");
    }
    Vector x = Vector::Zero(channels);
    for (const auto& t : s.visible) x += t.values;
    x /= static_cast<double>(s.visible.size());
    pooled.row(i) = x.transpose();
    h.row(i) = (params_.projection * x).transpose();
    w.row(i) = word_table.row(static_cast<Eigen::Index>(s.target));
    targets[static_cast<std::size_t>(i)] = s.target;
  }
  const Matrix logits = (h * params_.head.transpose()).rowwise() + params_.bias.transpose();

  const auto ct = masked_contrastive_loss(h, w, hp.temperature);
  const auto sup = supervised_loss(logits, targets);

  Evaluation out;
  out.contrastive = ct.loss;
  out.supervised = sup.loss;
  out.loss = combined_loss(ct.loss, sup.loss, hp);
  const Matrix d_logits = hp.beta * sup.gradient;
  const Matrix d_h = hp.alpha * ct.gradient + d_logits * params_.head;
  out.gradient.head = d_logits.transpose() * h;
  out.gradient.bias = d_logits.colwise().sum().transpose();
  out.gradient.projection = d_h.transpose() * pooled;
  return out;
}

void ToyEncoder::step(const Parameters& gradient, double learning_rate) {
  params_.projection -= learning_rate * gradient.projection;
  params_.head -= learning_rate * gradient.head;
  params_.bias -= learning_rate * gradient.bias;
}

namespace {

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double denom = std::max(analytic.norm(), numeric.norm());
  if (denom == 0.0) return 0.0;
  return (analytic - numeric).norm() / denom;
}

template <class F>
Matrix central_difference(Matrix x, F&& f, double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + step;
    const double up = f(x);
    x.data()[i] = orig - step;
    const double down = f(x);
    x.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * step);
  }
  return g;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t points, const LossHyperparams& hp) {
  hp.validate();
  std::mt19937_64 rng(seed);
  GradcheckReport report;
  report.points = points;
  for (std::size_t pt = 0; pt < points; ++pt) {
    const Matrix h = random_matrix(5, 4, rng);
    const Matrix w = random_matrix(5, 4, rng);
    const auto ct = masked_contrastive_loss(h, w, hp.temperature);
    const Matrix ct_fd =
        central_difference(h, [&](const Matrix& x) { return masked_contrastive_loss(x, w, hp.temperature).loss; });
    report.contrastive_max_rel_error = std::max(report.contrastive_max_rel_error, relative_error(ct.gradient, ct_fd));

    const Matrix z = random_matrix(5, 7, rng);
    std::uniform_int_distribution<std::size_t> cls(0, 6);
    std::vector<std::size_t> targets(5);
    for (auto& t : targets) t = cls(rng);
    const auto sup = supervised_loss(z, targets);
    const Matrix sup_fd = central_difference(z, [&](const Matrix& x) { return supervised_loss(x, targets).loss; });
    report.supervised_max_rel_error = std::max(report.supervised_max_rel_error, relative_error(sup.gradient, sup_fd));

    // End-to-end through the toy encoder, projection parameters only.
    auto encoder = ToyEncoder::random(6, 4, 3, rng);
    const Matrix words = random_matrix(3, 4, rng);
    std::vector<ToyEncoder::Sample> batch;
    for (std::size_t i = 0; i < 4; ++i) {
      WordEegEmbedding e{random_matrix(6, kBandCount, rng), "s"};
      auto tokens = band_split(e);
      batch.push_back({apply_mask(tokens, hp.mask_ratio, rng).visible, i % 3});
    }
    const auto eval = encoder.evaluate(batch, words, hp);
    const Matrix fd = central_difference(encoder.parameters().projection, [&](const Matrix& x) {
      ToyEncoder probe = encoder;
      probe.parameters().projection = x;
      return probe.evaluate(batch, words, hp).loss;
    });
    report.encoder_max_rel_error = std::max(report.encoder_max_rel_error, relative_error(eval.gradient.projection, fd));
  }
  return report;
}

}  // namespace ksr
