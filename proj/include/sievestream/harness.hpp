#ifndef SIEVESTREAM_HARNESS_HPP
#define SIEVESTREAM_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sievestream/objective.hpp"
#include "sievestream/sample.hpp"
#include "sievestream/selectors.hpp"
#include "sievestream/simulator.hpp"

namespace sievestream {

struct RoundReport {
  int round = 0;
  std::vector<std::string> selected_ids;
  int selected_count = 0;
  int unique_groups = 0;
  int nonobject_selected = 0;
  double objective = 0.0;
  double objective_parts_sum = 0.0;  // divided-K: sum of sub-batch objectives
  double latency_mean = 0.0;         // seconds per sample; 0 unless timing
  double latency_stderr = 0.0;
  std::size_t stored_peak = 0;
  std::uint64_t gain_evaluations = 0;
  std::uint64_t kernel_evaluations = 0;
  std::uint64_t samples_seen = 0;
  std::size_t dataset_size = 0;  // |D_n| after this round
};

struct AlgorithmRun {
  std::string name;  // CSV row-group label; defaults to the algorithm name
  SelectorConfig config;
};

struct ExperimentConfig {
  std::vector<AlgorithmRun> algorithms;
  ObjectiveSpec objective;

  // Stream source: a record file when set, the simulator otherwise.
  std::string record_path;
  WorldSpec world;
  PeculiaritySpec peculiarity;

  int divide_k = 1;                     // > 1 splits each round's budget
  std::vector<std::uint64_t> seeds;     // repeats; empty means {world.seed}
  bool cache = true;
  bool timing = false;                  // per-sample latency measurement
  int threads = 0;                      // 0 = auto; SIEVESTREAM_THREADS caps

  void validate() const;
};

// Thread budget after applying config, hardware, and the environment cap.
int effective_threads(const ExperimentConfig& config);

// One full multi-round pass for every configured algorithm at one world
// seed. Labels are stripped before samples reach a selector and re-joined
// afterwards for the report. Every algorithm sees the identical ordered
// stream per round. Index: [algorithm][round].
std::vector<std::vector<RoundReport>> run_rounds(const ExperimentConfig& config,
                                                 std::uint64_t seed);
std::vector<std::vector<RoundReport>> run_rounds(const ExperimentConfig& config);

// Divided-K variant for the first configured algorithm: each round's
// stream is split into divide_k contiguous substreams, each handled by a
// fresh selector with budget K/divide_k; the union batch is reported.
std::vector<RoundReport> run_divided_k(const ExperimentConfig& config);

// Selects over one in-memory round, honoring division. Used by run_rounds
// and directly by tests.
RoundReport select_round(std::span<const LabeledSample> round_items,
                         const ObjectiveSpec& objective, SelectorConfig selector,
                         int divide, bool use_cache, bool timing, int round_index);

// All runs across the seed list, executed in parallel up to the thread
// budget. Index: [algorithm][seed][round].
std::vector<std::vector<std::vector<RoundReport>>> run_experiment(
    const ExperimentConfig& config);

// ----- randomized verification suite -----

struct RandomInstance {
  std::vector<Sample> pool;
  ObjectiveSpec objective;
  int k = 1;
  double epsilon = 0.1;
};

// Deterministic small random instance mixing all four kernel kinds,
// lambda in {0, 0.5, 1}, alpha in {0.5, 1, 2}, n <= 12, K <= 4.
RandomInstance make_random_instance(std::mt19937_64& rng, int index);

struct VerificationReport {
  int instances = 0;
  int violations = 0;
  double min_ratio_sieve = 1.0;
  double min_ratio_sspp = 1.0;
  double min_ratio_greedy = 1.0;
  double min_ratio_entropy_modular = 1.0;
  double max_logdet_rel_error = 0.0;
  double max_inverse_abs_error = 0.0;
  double max_value_drift = 0.0;        // incremental vs direct f(S)
  double max_stored_ratio_sspp = 0.0;  // stored_peak / (K / epsilon)
  std::string worst_case;              // dump of the worst instance

  bool passed(double logdet_tolerance = 1e-8) const {
    return violations == 0 && max_logdet_rel_error <= logdet_tolerance;
  }
};

// Runs the randomized suite: approximation ratios against the brute-force
// oracle, feasibility, one-pass discipline, and incremental-vs-direct
// determinant agreement. `inject_fault` breaks the sieve acceptance rule
// to prove the checker can fail.
VerificationReport verify_guarantees(std::uint64_t suite_seed, int instances,
                                     bool inject_fault = false);

// ----- timing -----

struct TimingCell {
  std::string algorithm;
  int k = 0;
  double epsilon = 0.0;
  double mean_seconds = 0.0;
  double stderr_seconds = 0.0;
  std::uint64_t samples = 0;
};

// Per-sample processing time for every configured algorithm over the same
// fixed stream of `iterations` samples. Runs single-threaded so the
// clock measures the selector, not scheduler noise.
std::vector<TimingCell> measure_speed(const ExperimentConfig& config, int iterations);

// ----- reporting -----

inline constexpr int kFormatVersion = 1;

// Per-round CSV, one row group per algorithm, aggregated across seeds
// (means; stored_peak keeps the max). Reports indexed [algorithm][seed][round].
void write_round_csv(std::ostream& out, std::span<const AlgorithmRun> algorithms,
                     const std::vector<std::vector<std::vector<RoundReport>>>& reports);
void write_timing_csv(std::ostream& out, std::span<const TimingCell> cells);
std::string summary_manifest(std::span<const AlgorithmRun> algorithms,
                             const std::vector<std::vector<std::vector<RoundReport>>>& reports,
                             std::span<const std::uint64_t> seeds);

}  // namespace sievestream

#endif  // SIEVESTREAM_HARNESS_HPP
