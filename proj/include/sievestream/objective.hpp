#ifndef SIEVESTREAM_OBJECTIVE_HPP
#define SIEVESTREAM_OBJECTIVE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sievestream/kernel.hpp"
#include "sievestream/sample.hpp"

namespace sievestream {

enum class Informativeness {
  kSoftmaxEntropy,     // g(x) = -sum_i p_i log p_i over the softmax vector
  kPrecomputedScore,   // g(x) = score, ingested as-is
  kDetectionCombo,     // g(x) = score, where score was built upstream as
                       // lambda*(1 - S_I) + (1 - lambda)*U_C
};

Informativeness informativeness_from_name(std::string_view name);
std::string_view informativeness_name(Informativeness kind);

/**
 * Full definition of the set function
 *
 *   f(S) = lambda_i * sum_{x in S} g(x)
 *        + lambda_d * 0.5 * log det(I + alpha * M_S)
 *
 * where M_S is the kernel similarity matrix of S.
 */
struct ObjectiveSpec {
  double lambda_i = 1.0;
  double lambda_d = 1.0;
  double alpha = 1.0;
  Informativeness informativeness = Informativeness::kSoftmaxEntropy;
  double detection_lambda = 0.5;  // recorded trade-off of the detection combo
  KernelSpec kernel;

  bool uses_diversity() const { return lambda_d != 0.0; }
  void validate() const;
};

// Per-sample informativeness g(x) >= 0 under the configured mode.
double informativeness(const Sample& sample, const ObjectiveSpec& spec);

// Candidates whose true Schur complement cancels to this level or below are
// treated as exact duplicates: zero diversity gain, commit refused.
inline constexpr double kSchurFloor = 1e-12;

struct DiversityGain {
  double gain = 0.0;   // 0.5 * log(schur); 0 when degenerate
  double schur = 1.0;  // s = (1 + alpha*k(e,e)) - w^T A^-1 w
  bool degenerate = false;
  Eigen::VectorXd cross;      // w = alpha * (k(e, x_1), ..., k(e, x_n))
  Eigen::VectorXd inv_cross;  // u = A^-1 w, reused by commit
  std::uint64_t revision = 0;
};

/**
 * Incremental representation of A_S = I + alpha * M_S.
 *
 * Grows one member at a time. With the bordered matrix
 *
 *   A_{n+1} = | A_n  w |
 *             | w^T  a |,   a = 1 + alpha * k(e, e),
 *
 * the determinant ratio is the Schur complement s = a - w^T A_n^-1 w and
 * the inverse extends in O(n^2):
 *
 *   A_{n+1}^-1 = | A_n^-1 + u u^T / s   -u / s |
 *                | -u^T / s              1 / s |,   u = A_n^-1 w.
 *
 * Working on A_S rather than M_S keeps every eigenvalue >= 1, so s >= 1 in
 * exact arithmetic and log det never goes negative.
 */
class DiversityState {
 public:
  const std::vector<Sample>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  double logdet() const { return logdet_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  std::uint64_t revision() const { return revision_; }

  // Marginal diversity gain of adding `candidate`; does not mutate state.
  DiversityGain gain(const Sample& candidate, double alpha,
                     KernelEvaluator& kernels) const;

  // Applies a gain produced by gain() on this exact revision of the state.
  void commit(const Sample& candidate, const DiversityGain& g);

 private:
  std::vector<Sample> members_;
  Eigen::MatrixXd inv_{0, 0};
  double logdet_ = 0.0;
  std::uint64_t revision_ = 0;
};

struct ObjectiveGain {
  double total = 0.0;
  double info = 0.0;  // g(candidate), before lambda_i weighting
  DiversityGain diversity;
};

/**
 * One candidate solution: the accepted samples plus the incremental
 * bookkeeping needed to evaluate marginal gains in O(|S|^2).
 */
class SelectionState {
 public:
  explicit SelectionState(const ObjectiveSpec& spec) : spec_(&spec) {}

  const std::vector<Sample>& chosen() const { return chosen_; }
  std::size_t size() const { return chosen_.size(); }
  double value() const { return value_; }
  const ObjectiveSpec& spec() const { return *spec_; }
  const DiversityState& diversity() const { return diversity_; }

  ObjectiveGain gain(const Sample& candidate, KernelEvaluator& kernels) const;
  // Variant for callers that already computed g(candidate) for this sample.
  ObjectiveGain gain_with_info(const Sample& candidate, double info,
                               KernelEvaluator& kernels) const;
  void commit(const Sample& candidate, const ObjectiveGain& g);

 private:
  const ObjectiveSpec* spec_;
  std::vector<Sample> chosen_;
  DiversityState diversity_;
  double info_sum_ = 0.0;
  double value_ = 0.0;
};

// Marginal gain f(S + e) - f(S) through the incremental path.
double objective_gain(const SelectionState& state, const Sample& candidate,
                      KernelEvaluator& kernels);

/**
 * Non-incremental reference evaluator: builds A_S densely and takes the
 * log-determinant through a factorization. Members are summed and indexed
 * in canonical (id-sorted) order, so any permutation of the same set
 * produces the identical value bit-for-bit. This is the oracle path; it
 * reports numeric trouble instead of clamping.
 */
double objective_value(std::span<const Sample> set, const ObjectiveSpec& spec,
                       KernelEvaluator* kernels = nullptr);

// Dense log det(I + alpha * M) of an explicit similarity matrix.
double logdet_regularized(const Eigen::MatrixXd& similarity, double alpha);

}  // namespace sievestream

#endif  // SIEVESTREAM_OBJECTIVE_HPP
