#include "sievestream/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "sievestream/errors.hpp"

namespace sievestream {

Algorithm algorithm_from_name(std::string_view name) {
  if (name == "sieve-streaming") return Algorithm::kSieveStreaming;
  if (name == "sieve-streaming-pp") return Algorithm::kSieveStreamingPP;
  if (name == "three-sieves") return Algorithm::kThreeSieves;
  if (name == "random") return Algorithm::kRandom;
  if (name == "entropy-topk") return Algorithm::kEntropyTopK;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSieveStreaming: return "sieve-streaming";
    case Algorithm::kSieveStreamingPP: return "sieve-streaming-pp";
    case Algorithm::kThreeSieves: return "three-sieves";
    case Algorithm::kRandom: return "random";
    case Algorithm::kEntropyTopK: return "entropy-topk";
  }
  throw ConfigError("unknown algorithm enum value");
}

namespace {

bool is_sieve_family(Algorithm a) {
  return a == Algorithm::kSieveStreaming || a == Algorithm::kSieveStreamingPP ||
         a == Algorithm::kThreeSieves;
}

}  // namespace

void SelectorConfig::validate() const {
  if (k < 1) throw ConfigError("budget K must be at least 1");
  if (is_sieve_family(algorithm)) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
      throw ConfigError("epsilon must lie in (0, 1) for sieve algorithms");
    }
  }
  if (algorithm == Algorithm::kThreeSieves && rejection_budget < 1) {
    throw ConfigError("rejection budget T must be at least 1");
  }
}

std::int64_t grid_exponent_floor(double x, double epsilon) {
  const double guess = std::log(x) / std::log1p(epsilon);
  auto i = static_cast<std::int64_t>(std::floor(guess + 1e-9));
  while (grid_value(i + 1, epsilon) <= x * (1.0 + 1e-12)) ++i;
  while (grid_value(i, epsilon) > x * (1.0 + 1e-12)) --i;
  return i;
}

std::int64_t grid_exponent_ceil(double x, double epsilon) {
  const double guess = std::log(x) / std::log1p(epsilon);
  auto i = static_cast<std::int64_t>(std::ceil(guess - 1e-9));
  while (grid_value(i - 1, epsilon) >= x * (1.0 - 1e-12)) --i;
  while (grid_value(i, epsilon) < x * (1.0 - 1e-12)) ++i;
  return i;
}

double grid_value(std::int64_t exponent, double epsilon) {
  return std::pow(1.0 + epsilon, static_cast<double>(exponent));
}

std::vector<double> threshold_grid(double lo, double hi, double epsilon) {
  std::vector<double> grid;
  if (!(lo > 0.0) || hi < lo) return grid;
  for (std::int64_t i = grid_exponent_ceil(lo, epsilon);
       i <= grid_exponent_floor(hi, epsilon); ++i) {
    grid.push_back(grid_value(i, epsilon));
  }
  return grid;
}

Selector::Selector(const ObjectiveSpec& objective, const SelectorConfig& config,
                   bool use_cache)
    : objective_(objective),
      config_(config),
      kernels_(objective.kernel, use_cache),
      empty_state_(objective_) {}

double Selector::info_of(const Sample& sample) const {
  return objective_.lambda_i != 0.0 ? informativeness(sample, objective_) : 0.0;
}

double Selector::singleton_value(const Sample& sample, double info) {
  ++gain_evaluations_;
  const ObjectiveGain g = empty_state_.gain_with_info(sample, info, kernels_);
  if (!std::isfinite(g.total)) {
    throw NumericError("non-finite singleton value for sample '" + sample.id + "'");
  }
  return g.total;
}

void Selector::base_result(SelectionResult& result) const {
  result.samples_seen = samples_seen_;
  result.stored_peak = stored_peak_;
  result.gain_evaluations = gain_evaluations_;
  result.kernel_evaluations = kernels_.evaluations();
}

namespace {

std::vector<Sample> sorted_by_seq(std::vector<Sample> items) {
  std::sort(items.begin(), items.end(),
            [](const Sample& a, const Sample& b) { return a.seq < b.seq; });
  return items;
}

void audit_value(const SelectionState& state, const ObjectiveSpec& objective) {
  const double direct = objective_value(state.chosen(), objective);
  const double drift = std::abs(state.value() - direct);
  if (drift > 1e-8 * std::max(1.0, std::abs(direct))) {
    throw NumericError("incremental sieve value drifted from direct evaluation by " +
                       std::to_string(drift));
  }
}

struct Sieve {
  double threshold;
  SelectionState state;
};

/**
 * Sieve-Streaming: keeps one sieve per grid threshold v in [m, 2Km] where
 * m is the best singleton value so far. A sieve accepts an element when
 * the marginal gain covers the remaining deficit to v/2 spread over the
 * remaining slots.
 */
class SieveStreamingSelector final : public Selector {
 public:
  using Selector::Selector;

  void observe(const Sample& e) override {
    ++samples_seen_;
    const double info = info_of(e);
    const double singleton = singleton_value(e, info);
    if (singleton > max_singleton_) {
      max_singleton_ = singleton;
      refresh_window();
    }
    const int k = config_.k;
    for (auto& [exponent, sieve] : sieves_) {
      const auto n = static_cast<int>(sieve.state.size());
      if (n >= k) continue;
      double required = (sieve.threshold / 2.0 - sieve.state.value()) / (k - n);
      if (config_.inject_fault) required = required * 5.0 + 1.0;
      if (singleton < required) continue;  // submodular bound: gain <= singleton
      const ObjectiveGain g = sieve.state.gain_with_info(e, info, kernels_);
      ++gain_evaluations_;
      if (g.total >= required) sieve.state.commit(e, g);
    }
    track_storage();
  }

  SelectionResult finish() override {
    SelectionResult result;
    const Sieve* best = nullptr;
    for (const auto& [exponent, sieve] : sieves_) {
      if (config_.audit) audit_value(sieve.state, objective_);
      if (best == nullptr || sieve.state.value() > best->state.value()) {
        best = &sieve;
      }
    }
    if (best != nullptr) {
      result.chosen = sorted_by_seq(best->state.chosen());
      result.value = best->state.value();
    }
    base_result(result);
    return result;
  }

 private:
  void refresh_window() {
    const double eps = config_.epsilon;
    const std::int64_t lo = grid_exponent_ceil(max_singleton_, eps);
    const std::int64_t hi =
        grid_exponent_floor(2.0 * config_.k * max_singleton_, eps);
    sieves_.erase(sieves_.begin(), sieves_.lower_bound(lo));
    for (std::int64_t i = lo; i <= hi; ++i) {
      sieves_.try_emplace(i, Sieve{grid_value(i, eps), SelectionState(objective_)});
    }
  }

  void track_storage() {
    std::size_t stored = 0;
    for (const auto& [exponent, sieve] : sieves_) stored += sieve.state.size();
    stored_peak_ = std::max(stored_peak_, stored);
  }

  std::map<std::int64_t, Sieve> sieves_;
  double max_singleton_ = 0.0;
};

/**
 * Sieve-Streaming++: thresholds are flat marginal-gain bars tau in
 * [max(LB, m) / 2K, m], where LB is the best sieve value found so far.
 * Raising LB prunes the cheap sieves, which is what brings storage down
 * to O(K / epsilon).
 */
class SieveStreamingPPSelector final : public Selector {
 public:
  using Selector::Selector;

  void observe(const Sample& e) override {
    ++samples_seen_;
    const double info = info_of(e);
    const double singleton = singleton_value(e, info);
    if (singleton > max_singleton_) {
      max_singleton_ = singleton;
      refresh_window();
    }
    const int k = config_.k;
    for (auto& [exponent, sieve] : sieves_) {
      double tau = sieve.threshold;
      if (config_.inject_fault) tau = tau * 5.0 + 1.0;
      if (tau > singleton) break;  // sieves are sorted; none further can accept
      if (static_cast<int>(sieve.state.size()) >= k) continue;
      const ObjectiveGain g = sieve.state.gain_with_info(e, info, kernels_);
      ++gain_evaluations_;
      if (g.total >= tau) {
        sieve.state.commit(e, g);
        lower_bound_ = std::max(lower_bound_, sieve.state.value());
      }
    }
    prune_below_window();
    track_storage();
  }

  SelectionResult finish() override {
    SelectionResult result;
    const Sieve* best = nullptr;
    for (const auto& [exponent, sieve] : sieves_) {
      if (config_.audit) audit_value(sieve.state, objective_);
      if (best == nullptr || sieve.state.value() > best->state.value()) {
        best = &sieve;
      }
    }
    if (best != nullptr) {
      result.chosen = sorted_by_seq(best->state.chosen());
      result.value = best->state.value();
    }
    base_result(result);
    return result;
  }

 private:
  double window_floor() const {
    return std::max(lower_bound_, max_singleton_) / (2.0 * config_.k);
  }

  void refresh_window() {
    const double eps = config_.epsilon;
    const std::int64_t lo = grid_exponent_ceil(window_floor(), eps);
    const std::int64_t hi = grid_exponent_floor(max_singleton_, eps);
    sieves_.erase(sieves_.begin(), sieves_.lower_bound(lo));
    for (std::int64_t i = lo; i <= hi; ++i) {
      sieves_.try_emplace(i, Sieve{grid_value(i, eps), SelectionState(objective_)});
    }
  }

  void prune_below_window() {
    if (max_singleton_ <= 0.0) return;
    const std::int64_t lo = grid_exponent_ceil(window_floor(), config_.epsilon);
    sieves_.erase(sieves_.begin(), sieves_.lower_bound(lo));
  }

  void track_storage() {
    std::size_t stored = 0;
    for (const auto& [exponent, sieve] : sieves_) stored += sieve.state.size();
    stored_peak_ = std::max(stored_peak_, stored);
  }

  std::map<std::int64_t, Sieve> sieves_;
  double max_singleton_ = 0.0;
  double lower_bound_ = 0.0;
};

/**
 * ThreeSieves: a single candidate set and a single threshold that starts
 * at the top of the grid consistent with m and steps down one level after
 * T consecutive rejections. The element that triggers a step-down is
 * re-tested against the lowered bar before the stream moves on. The
 * threshold never drops below the grid point at m / 2K.
 */
class ThreeSievesSelector final : public Selector {
 public:
  ThreeSievesSelector(const ObjectiveSpec& objective, const SelectorConfig& config,
                      bool use_cache)
      : Selector(objective, config, use_cache), state_(objective_) {}

  void observe(const Sample& e) override {
    ++samples_seen_;
    const double info = info_of(e);
    const double singleton = singleton_value(e, info);
    if (singleton > max_singleton_) {
      max_singleton_ = singleton;
      level_ = grid_exponent_floor(max_singleton_, config_.epsilon);
      floor_level_ = std::min(
          grid_exponent_ceil(max_singleton_ / (2.0 * config_.k), config_.epsilon),
          level_);
      rejections_ = 0;
      active_ = true;
    }
    if (!active_ || static_cast<int>(state_.size()) >= config_.k) {
      track_storage();
      return;
    }
    const ObjectiveGain g = state_.gain_with_info(e, info, kernels_);
    ++gain_evaluations_;
    while (true) {
      double tau = grid_value(level_, config_.epsilon);
      if (config_.inject_fault) tau = tau * 5.0 + 1.0;
      if (g.total >= tau) {
        state_.commit(e, g);
        rejections_ = 0;
        break;
      }
      ++rejections_;
      if (rejections_ >= config_.rejection_budget && level_ > floor_level_) {
        --level_;
        rejections_ = 0;
        continue;  // re-test this element against the lowered threshold
      }
      break;
    }
    track_storage();
  }

  SelectionResult finish() override {
    if (config_.audit) audit_value(state_, objective_);
    SelectionResult result;
    result.chosen = sorted_by_seq(state_.chosen());
    result.value = state_.value();
    base_result(result);
    return result;
  }

 private:
  void track_storage() { stored_peak_ = std::max(stored_peak_, state_.size()); }

  SelectionState state_;
  double max_singleton_ = 0.0;
  std::int64_t level_ = 0;
  std::int64_t floor_level_ = 0;
  int rejections_ = 0;
  bool active_ = false;
};

// Uniform K-subset of the stream (algorithm R), one pass, O(K) memory.
class RandomSelector final : public Selector {
 public:
  RandomSelector(const ObjectiveSpec& objective, const SelectorConfig& config,
                 bool use_cache)
      : Selector(objective, config, use_cache), rng_(config.seed) {}

  void observe(const Sample& e) override {
    ++samples_seen_;
    if (reservoir_.size() < static_cast<std::size_t>(config_.k)) {
      reservoir_.push_back(e);
    } else {
      std::uniform_int_distribution<std::uint64_t> pick(0, samples_seen_ - 1);
      const std::uint64_t j = pick(rng_);
      if (j < reservoir_.size()) reservoir_[j] = e;
    }
    stored_peak_ = std::max(stored_peak_, reservoir_.size());
  }

  SelectionResult finish() override {
    SelectionResult result;
    result.chosen = sorted_by_seq(std::move(reservoir_));
    result.value = objective_value(result.chosen, objective_, &kernels_);
    base_result(result);
    return result;
  }

 private:
  std::vector<Sample> reservoir_;
  std::mt19937_64 rng_;
};

/**
 * Keeps the K samples with the largest informativeness, ties broken toward
 * the earlier stream position. Exactly optimal for the modular objective.
 */
class EntropyTopKSelector final : public Selector {
 public:
  using Selector::Selector;

  void observe(const Sample& e) override {
    ++samples_seen_;
    const double g = informativeness(e, objective_);
    ++gain_evaluations_;
    if (kept_.size() < static_cast<std::size_t>(config_.k)) {
      kept_.insert(Entry{g, e.seq, e});
    } else {
      const Entry& worst = *kept_.begin();
      if (g > worst.info || (g == worst.info && e.seq < worst.seq)) {
        kept_.erase(kept_.begin());
        kept_.insert(Entry{g, e.seq, e});
      }
    }
    stored_peak_ = std::max(stored_peak_, kept_.size());
  }

  SelectionResult finish() override {
    SelectionResult result;
    std::vector<Sample> chosen;
    chosen.reserve(kept_.size());
    for (const Entry& entry : kept_) chosen.push_back(entry.sample);
    result.chosen = sorted_by_seq(std::move(chosen));
    result.value = objective_value(result.chosen, objective_, &kernels_);
    base_result(result);
    return result;
  }

 private:
  struct Entry {
    double info;
    std::uint64_t seq;
    Sample sample;
    // Orders worst-first: lowest info, then latest arrival.
    bool operator<(const Entry& other) const {
      if (info != other.info) return info < other.info;
      return seq > other.seq;
    }
  };

  std::set<Entry> kept_;
};

}  // namespace

std::unique_ptr<Selector> make_selector(const ObjectiveSpec& objective,
                                        const SelectorConfig& config,
                                        bool use_cache) {
  objective.validate();
  switch (config.algorithm) {
    case Algorithm::kSieveStreaming:
      return std::make_unique<SieveStreamingSelector>(objective, config, use_cache);
    case Algorithm::kSieveStreamingPP:
      return std::make_unique<SieveStreamingPPSelector>(objective, config, use_cache);
    case Algorithm::kThreeSieves:
      return std::make_unique<ThreeSievesSelector>(objective, config, use_cache);
    case Algorithm::kRandom:
      return std::make_unique<RandomSelector>(objective, config, use_cache);
    case Algorithm::kEntropyTopK:
      return std::make_unique<EntropyTopKSelector>(objective, config, use_cache);
  }
  throw ConfigError("unknown algorithm enum value");
}

SelectionResult run_stream(SampleStream& stream, Selector& selector) {
  while (auto sample = stream.next()) selector.observe(*sample);
  return selector.finish();
}

namespace {

SelectionResult run_algorithm(SampleStream& stream, const ObjectiveSpec& objective,
                              const SelectorConfig& config, Algorithm expected,
                              bool use_cache) {
  if (config.algorithm != expected) {
    throw ConfigError(std::string("config names algorithm '") +
                      std::string(algorithm_name(config.algorithm)) +
                      "', expected '" + std::string(algorithm_name(expected)) + "'");
  }
  config.validate();
  auto selector = make_selector(objective, config, use_cache);
  return run_stream(stream, *selector);
}

}  // namespace

SelectionResult sieve_streaming(SampleStream& stream, const ObjectiveSpec& objective,
                                const SelectorConfig& config, bool use_cache) {
  return run_algorithm(stream, objective, config, Algorithm::kSieveStreaming, use_cache);
}

SelectionResult sieve_streaming_pp(SampleStream& stream, const ObjectiveSpec& objective,
                                   const SelectorConfig& config, bool use_cache) {
  return run_algorithm(stream, objective, config, Algorithm::kSieveStreamingPP, use_cache);
}

SelectionResult three_sieves(SampleStream& stream, const ObjectiveSpec& objective,
                             const SelectorConfig& config, bool use_cache) {
  return run_algorithm(stream, objective, config, Algorithm::kThreeSieves, use_cache);
}

SelectionResult random_baseline(SampleStream& stream, const ObjectiveSpec& objective,
                                const SelectorConfig& config, bool use_cache) {
  return run_algorithm(stream, objective, config, Algorithm::kRandom, use_cache);
}

SelectionResult entropy_topk(SampleStream& stream, const ObjectiveSpec& objective,
                             const SelectorConfig& config, bool use_cache) {
  return run_algorithm(stream, objective, config, Algorithm::kEntropyTopK, use_cache);
}

SelectionResult offline_greedy(std::span<const Sample> pool,
                               const ObjectiveSpec& objective, int k,
                               bool use_cache) {
  objective.validate();
  if (k < 1) throw ConfigError("budget K must be at least 1");

  SelectionResult result;
  result.samples_seen = pool.size();
  result.stored_peak = pool.size();

  KernelEvaluator kernels(objective.kernel, use_cache);
  SelectionState state(objective);

  struct Entry {
    double bound;
    std::uint64_t seq;
    std::size_t index;
    std::size_t stamp;  // |S| when the bound was computed
    ObjectiveGain gain;
    bool operator<(const Entry& other) const {
      if (bound != other.bound) return bound < other.bound;
      return seq > other.seq;  // earlier arrivals pop first on ties
    }
  };
  std::priority_queue<Entry> queue;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ObjectiveGain g = state.gain(pool[i], kernels);
    ++result.gain_evaluations;
    queue.push(Entry{g.total, pool[i].seq, i, 0, std::move(g)});
  }

  // Lazy greedy: stale bounds are upper bounds by submodularity, so a
  // popped entry whose stamp is current really is the argmax.
  while (static_cast<int>(state.size()) < k && !queue.empty()) {
    Entry top = queue.top();
    queue.pop();
    if (top.stamp == state.size()) {
      if (top.bound <= 0.0) break;
      state.commit(pool[top.index], top.gain);
    } else {
      ObjectiveGain g = state.gain(pool[top.index], kernels);
      ++result.gain_evaluations;
      queue.push(Entry{g.total, top.seq, top.index, state.size(), std::move(g)});
    }
  }

  result.chosen = sorted_by_seq(state.chosen());
  result.value = state.value();
  result.kernel_evaluations = kernels.evaluations();
  return result;
}

SelectionResult brute_force(std::span<const Sample> pool,
                            const ObjectiveSpec& objective, int k,
                            bool use_cache) {
  objective.validate();
  if (k < 1) throw ConfigError("budget K must be at least 1");

  const std::size_t n = pool.size();
  const std::size_t cap = std::min<std::size_t>(k, n);
  double subsets = 1.0;
  double binom = 1.0;
  for (std::size_t j = 1; j <= cap; ++j) {
    binom = binom * static_cast<double>(n - j + 1) / static_cast<double>(j);
    subsets += binom;
    if (subsets > 1e6) {
      throw BudgetError("brute force would enumerate more than 1e6 subsets");
    }
  }

  KernelEvaluator kernels(objective.kernel, use_cache);

  SelectionResult result;
  result.samples_seen = n;
  result.stored_peak = n;
  result.value = 0.0;  // empty set
  ++result.gain_evaluations;

  std::vector<Sample> best;
  std::vector<std::string> best_ids;
  std::vector<std::size_t> combo;
  std::vector<Sample> subset;

  auto sorted_ids = [](const std::vector<Sample>& items) {
    std::vector<std::string> ids;
    ids.reserve(items.size());
    for (const Sample& s : items) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  for (std::size_t size = 1; size <= cap; ++size) {
    combo.clear();
    for (std::size_t i = 0; i < size; ++i) combo.push_back(i);
    while (true) {
      subset.clear();
      for (std::size_t idx : combo) subset.push_back(pool[idx]);
      const double value = objective_value(subset, objective, &kernels);
      ++result.gain_evaluations;
      if (value > result.value) {
        result.value = value;
        best = subset;
        best_ids = sorted_ids(subset);
      } else if (value == result.value && !best.empty()) {
        auto ids = sorted_ids(subset);
        if (ids < best_ids) {
          best = subset;
          best_ids = std::move(ids);
        }
      }
      // next combination in lexicographic order
      std::size_t slot = size;
      while (slot > 0 && combo[slot - 1] == n - size + slot - 1) --slot;
      if (slot == 0) break;
      ++combo[slot - 1];
      for (std::size_t i = slot; i < size; ++i) combo[i] = combo[i - 1] + 1;
    }
  }

  result.chosen = sorted_by_seq(std::move(best));
  result.kernel_evaluations = kernels.evaluations();
  return result;
}

}  // namespace sievestream
