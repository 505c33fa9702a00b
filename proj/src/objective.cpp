#include "sievestream/objective.hpp"

#include <algorithm>
#include <cmath>

#include "sievestream/errors.hpp"

namespace sievestream {

Informativeness informativeness_from_name(std::string_view name) {
  if (name == "softmax-entropy") return Informativeness::kSoftmaxEntropy;
  if (name == "precomputed-score") return Informativeness::kPrecomputedScore;
  if (name == "detection-combo") return Informativeness::kDetectionCombo;
  throw ConfigError("unknown informativeness '" + std::string(name) + "'");
}

std::string_view informativeness_name(Informativeness kind) {
  switch (kind) {
    case Informativeness::kSoftmaxEntropy: return "softmax-entropy";
    case Informativeness::kPrecomputedScore: return "precomputed-score";
    case Informativeness::kDetectionCombo: return "detection-combo";
  }
  throw ConfigError("unknown informativeness enum value");
}

void ObjectiveSpec::validate() const {
  if (!(lambda_i >= 0.0) || !(lambda_d >= 0.0)) {
    throw ConfigError("lambda_i and lambda_d must be non-negative");
  }
  if (lambda_i + lambda_d <= 0.0) {
    throw ConfigError("lambda_i + lambda_d must be positive");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be a positive finite real");
  }
  if (detection_lambda < 0.0 || detection_lambda > 1.0) {
    throw ConfigError("detection lambda must lie in [0, 1]");
  }
  kernel.validate();
}

namespace {

double softmax_entropy(const Sample& sample) {
  if (!sample.softmax) {
    throw InputError("sample '" + sample.id +
                     "' is missing required field 'softmax'");
  }
  const Eigen::VectorXd& p = *sample.softmax;
  double sum = 0.0;
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (!(pi >= 0.0) || !std::isfinite(pi)) {
      throw ValidationError("sample '" + sample.id +
                            "' has invalid softmax entry");
    }
    sum += pi;
    if (pi > 0.0) entropy -= pi * std::log(pi);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("sample '" + sample.id + "' softmax sums to " +
                          std::to_string(sum));
  }
  return entropy;
}

double ingested_score(const Sample& sample) {
  if (!sample.score) {
    throw InputError("sample '" + sample.id +
                     "' is missing required field 'score'");
  }
  const double s = *sample.score;
  if (!std::isfinite(s) || s < 0.0) {
    throw ValidationError("sample '" + sample.id +
                          "' has negative or non-finite score");
  }
  return s;
}

}  // namespace

double informativeness(const Sample& sample, const ObjectiveSpec& spec) {
  switch (spec.informativeness) {
    case Informativeness::kSoftmaxEntropy:
      return softmax_entropy(sample);
    case Informativeness::kPrecomputedScore:
    case Informativeness::kDetectionCombo:
      // The detection combo is folded into `score` before ingestion.
      return ingested_score(sample);
  }
  throw ConfigError("unknown informativeness enum value");
}

DiversityGain DiversityState::gain(const Sample& candidate, double alpha,
                                   KernelEvaluator& kernels) const {
  DiversityGain g;
  g.revision = revision_;

  const Eigen::Index n = static_cast<Eigen::Index>(members_.size());
  g.cross.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.cross[i] = alpha * kernels(candidate, members_[i]);
  }
  const double diag = 1.0 + alpha * kernels(candidate, candidate);

  double s;
  if (n == 0) {
    g.inv_cross.resize(0);
    s = diag;
  } else {
    g.inv_cross.noalias() = inv_ * g.cross;
    s = diag - g.cross.dot(g.inv_cross);
  }
  if (!std::isfinite(s)) {
    throw NumericError("non-finite Schur complement for candidate '" +
                       candidate.id + "'");
  }
  g.schur = s;
  if (s <= kSchurFloor) {
    g.degenerate = true;
    g.gain = 0.0;
  } else {
    g.gain = 0.5 * std::log(s);
  }
  return g;
}

void DiversityState::commit(const Sample& candidate, const DiversityGain& g) {
  if (g.revision != revision_) {
    throw StaleGainError("diversity gain for '" + candidate.id +
                         "' was computed against an older state");
  }
  if (g.degenerate) {
    throw InputError("refusing to commit degenerate duplicate '" +
                     candidate.id + "'");
  }
  for (const Sample& m : members_) {
    if (m.id == candidate.id) {
      throw InputError("candidate '" + candidate.id + "' is already a member");
    }
  }

  const Eigen::Index n = inv_.rows();
  const double inv_s = 1.0 / g.schur;
  Eigen::MatrixXd next(n + 1, n + 1);
  if (n > 0) {
    next.topLeftCorner(n, n).noalias() =
        inv_ + (g.inv_cross * g.inv_cross.transpose()) * inv_s;
    next.topRightCorner(n, 1) = -g.inv_cross * inv_s;
    next.bottomLeftCorner(1, n) = next.topRightCorner(n, 1).transpose();
  }
  next(n, n) = inv_s;

  inv_ = std::move(next);
  logdet_ += 2.0 * g.gain;
  members_.push_back(candidate);
  ++revision_;
}

ObjectiveGain SelectionState::gain(const Sample& candidate,
                                   KernelEvaluator& kernels) const {
  const double info =
      spec_->lambda_i != 0.0 ? informativeness(candidate, *spec_) : 0.0;
  return gain_with_info(candidate, info, kernels);
}

ObjectiveGain SelectionState::gain_with_info(const Sample& candidate, double info,
                                             KernelEvaluator& kernels) const {
  ObjectiveGain g;
  g.info = info;
  g.total = spec_->lambda_i * info;
  if (spec_->uses_diversity()) {
    g.diversity = diversity_.gain(candidate, spec_->alpha, kernels);
    g.total += spec_->lambda_d * g.diversity.gain;
  }
  return g;
}

void SelectionState::commit(const Sample& candidate, const ObjectiveGain& g) {
  if (spec_->uses_diversity()) diversity_.commit(candidate, g.diversity);
  chosen_.push_back(candidate);
  info_sum_ += g.info;
  value_ += g.total;
}

double objective_gain(const SelectionState& state, const Sample& candidate,
                      KernelEvaluator& kernels) {
  return state.gain(candidate, kernels).total;
}

double logdet_regularized(const Eigen::MatrixXd& similarity, double alpha) {
  const Eigen::Index n = similarity.rows();
  if (n == 0) return 0.0;
  Eigen::MatrixXd a = alpha * similarity;
  a.diagonal().array() += 1.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw NumericError("log-det factorization failed");
  }
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = ldlt.vectorD()[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericError("determinant underflow in the direct evaluator");
    }
    logdet += std::log(d);
  }
  return logdet;
}

double objective_value(std::span<const Sample> set, const ObjectiveSpec& spec,
                       KernelEvaluator* kernels) {
  std::vector<const Sample*> order;
  order.reserve(set.size());
  for (const Sample& s : set) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i - 1]->id == order[i]->id) {
      throw InputError("set contains duplicate id '" + order[i]->id + "'");
    }
  }

  double info = 0.0;
  if (spec.lambda_i != 0.0) {
    for (const Sample* s : order) info += informativeness(*s, spec);
  }

  double logdet = 0.0;
  if (spec.uses_diversity() && !order.empty()) {
    const Eigen::Index n = static_cast<Eigen::Index>(order.size());
    Eigen::MatrixXd m(n, n);
    KernelEvaluator direct(spec.kernel, /*use_cache=*/false);
    KernelEvaluator& eval = kernels ? *kernels : direct;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double k = eval(*order[i], *order[j]);
        m(i, j) = k;
        m(j, i) = k;
      }
    }
    logdet = logdet_regularized(m, spec.alpha);
  }
  return spec.lambda_i * info + spec.lambda_d * 0.5 * logdet;
}

}  // namespace sievestream
