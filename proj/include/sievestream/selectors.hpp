#ifndef SIEVESTREAM_SELECTORS_HPP
#define SIEVESTREAM_SELECTORS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sievestream/objective.hpp"
#include "sievestream/sample.hpp"

namespace sievestream {

enum class Algorithm {
  kSieveStreaming,
  kSieveStreamingPP,
  kThreeSieves,
  kRandom,
  kEntropyTopK,
};

Algorithm algorithm_from_name(std::string_view name);
std::string_view algorithm_name(Algorithm algorithm);

struct SelectorConfig {
  Algorithm algorithm = Algorithm::kSieveStreamingPP;
  int k = 1;
  double epsilon = 0.1;          // sieve variants
  int rejection_budget = 500;    // ThreeSieves T
  std::uint64_t seed = 0;        // random baseline
  bool audit = false;            // recompute sieve values at finish
  bool inject_fault = false;     // verification sanity hook: breaks the
                                 // sieve acceptance rule on purpose

  void validate() const;
};

struct SelectionResult {
  std::vector<Sample> chosen;
  double value = 0.0;
  std::uint64_t samples_seen = 0;
  std::size_t stored_peak = 0;          // max simultaneous stored samples
  std::uint64_t gain_evaluations = 0;   // marginal-gain computations
  std::uint64_t kernel_evaluations = 0; // raw kernel computations
};

/**
 * One streaming selector pass. observe() must see each stream item exactly
 * once, in order; finish() returns the batch and invalidates the selector.
 */
class Selector {
 public:
  Selector(const ObjectiveSpec& objective, const SelectorConfig& config,
           bool use_cache);
  virtual ~Selector() = default;

  virtual void observe(const Sample& sample) = 0;
  virtual SelectionResult finish() = 0;

  std::uint64_t samples_seen() const { return samples_seen_; }

 protected:
  // Singleton objective value f({e}); also the submodular upper bound on
  // any later marginal gain of e, which lets sieves skip hopeless rows.
  double singleton_value(const Sample& sample, double info);
  double info_of(const Sample& sample) const;
  void base_result(SelectionResult& result) const;

  ObjectiveSpec objective_;
  SelectorConfig config_;
  KernelEvaluator kernels_;
  SelectionState empty_state_;
  std::uint64_t samples_seen_ = 0;
  std::uint64_t gain_evaluations_ = 0;
  std::size_t stored_peak_ = 0;
};

std::unique_ptr<Selector> make_selector(const ObjectiveSpec& objective,
                                        const SelectorConfig& config,
                                        bool use_cache = true);

// Drains the stream through the selector and finishes it.
SelectionResult run_stream(SampleStream& stream, Selector& selector);

// Convenience entry points, one per streaming algorithm. Each validates
// that the config names the matching algorithm.
SelectionResult sieve_streaming(SampleStream& stream, const ObjectiveSpec& objective,
                                const SelectorConfig& config, bool use_cache = true);
SelectionResult sieve_streaming_pp(SampleStream& stream, const ObjectiveSpec& objective,
                                   const SelectorConfig& config, bool use_cache = true);
SelectionResult three_sieves(SampleStream& stream, const ObjectiveSpec& objective,
                             const SelectorConfig& config, bool use_cache = true);
SelectionResult random_baseline(SampleStream& stream, const ObjectiveSpec& objective,
                                const SelectorConfig& config, bool use_cache = true);
SelectionResult entropy_topk(SampleStream& stream, const ObjectiveSpec& objective,
                             const SelectorConfig& config, bool use_cache = true);

// Offline oracles (full pool in memory; testing/verification only).
SelectionResult offline_greedy(std::span<const Sample> pool,
                               const ObjectiveSpec& objective, int k,
                               bool use_cache = true);
SelectionResult brute_force(std::span<const Sample> pool,
                            const ObjectiveSpec& objective, int k,
                            bool use_cache = true);

// Geometric threshold grid {(1+epsilon)^i}.
std::int64_t grid_exponent_floor(double x, double epsilon);  // max i: b^i <= x
std::int64_t grid_exponent_ceil(double x, double epsilon);   // min i: b^i >= x
double grid_value(std::int64_t exponent, double epsilon);
// All grid points inside [lo, hi], inclusive at both ends.
std::vector<double> threshold_grid(double lo, double hi, double epsilon);

}  // namespace sievestream

#endif  // SIEVESTREAM_SELECTORS_HPP
