#ifndef SIEVESTREAM_KERNEL_HPP
#define SIEVESTREAM_KERNEL_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "sievestream/sample.hpp"

namespace sievestream {

// Similarity kernels. All four are positive semidefinite, so the
// log-det diversity built on them stays monotone submodular.
enum class KernelKind {
  kPolynomialFeatures,  // <F(a), F(b)> on feature vectors
  kRbfL1Raw,            // exp(-beta * ||a - b||_1) on the raw representation
  kRbfL2Features,       // exp(-beta * ||F(a) - F(b)||_2)
  kRbfJsdSoftmax,       // exp(-beta * JSD(softmax(a) || softmax(b)))
};

struct KernelSpec {
  KernelKind kind = KernelKind::kRbfL2Features;
  double beta = 1.0;  // RBF scaling; unused by the polynomial kernel

  void validate() const;
};

KernelKind kernel_kind_from_name(std::string_view name);
std::string_view kernel_kind_name(KernelKind kind);

// Jensen-Shannon divergence, natural log, with the 0*log(0) = 0 convention.
double jensen_shannon_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Evaluates k(a, b). Arguments are reordered canonically (by id) before
// evaluation so k(a, b) == k(b, a) holds bit-for-bit.
double kernel(const Sample& a, const Sample& b, const KernelSpec& spec);

/**
 * Memo table for kernel values, keyed by the unordered id pair.
 *
 * Ids are interned to dense indices so steady-state lookups hash one
 * 64-bit integer instead of two strings. Single-writer: a cache belongs
 * to one selector pass at a time; correctness never depends on a hit.
 */
class KernelCache {
 public:
  explicit KernelCache(std::size_t max_entries = kDefaultMaxEntries)
      : max_entries_(max_entries) {}

  double get_or_compute(const Sample& a, const Sample& b, const KernelSpec& spec);

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const { return values_.size(); }
  void clear();

  static constexpr std::size_t kDefaultMaxEntries = 1u << 22;

 private:
  std::uint32_t intern(const std::string& id);

  std::unordered_map<std::string, std::uint32_t> ids_;
  std::unordered_map<std::uint64_t, double> values_;
  std::size_t max_entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

/**
 * Routes kernel requests either through a cache or straight to the kernel,
 * and counts actual evaluations. evaluations() is the number of times the
 * kernel function really ran, which is what memoization is meant to shrink.
 */
class KernelEvaluator {
 public:
  KernelEvaluator(KernelSpec spec, bool use_cache)
      : spec_(spec), cache_(use_cache ? std::make_unique<KernelCache>() : nullptr) {}

  double operator()(const Sample& a, const Sample& b) {
    if (cache_) {
      const std::uint64_t before = cache_->misses();
      const double value = cache_->get_or_compute(a, b, spec_);
      evaluations_ += cache_->misses() - before;
      return value;
    }
    ++evaluations_;
    return kernel(a, b, spec_);
  }

  const KernelSpec& spec() const { return spec_; }
  bool cached() const { return cache_ != nullptr; }
  KernelCache* cache() { return cache_.get(); }
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  KernelSpec spec_;
  std::unique_ptr<KernelCache> cache_;
  std::uint64_t evaluations_ = 0;
};

}  // namespace sievestream

#endif  // SIEVESTREAM_KERNEL_HPP
