#include "sievestream/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "sievestream/errors.hpp"
#include "sievestream/record_io.hpp"

namespace sievestream {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw ConfigError("experiment needs at least one algorithm");
  objective.validate();
  if (divide_k < 1) throw ConfigError("divide_k must be at least 1");
  for (const AlgorithmRun& run : algorithms) {
    run.config.validate();
    if (divide_k > 1 && run.config.k % divide_k != 0) {
      throw ConfigError("divide_k must divide K (" + std::to_string(run.config.k) +
                        " % " + std::to_string(divide_k) + " != 0)");
    }
  }
  if (record_path.empty()) {
    world.validate();
    peculiarity.validate();
  }
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

int effective_threads(const ExperimentConfig& config) {
  if (config.timing) return 1;  // measurement stability
  int n = config.threads > 0
              ? config.threads
              : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("SIEVESTREAM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) {
      n = std::min(n, static_cast<int>(cap));
    }
  }
  return n;
}

namespace {

struct LatencyStats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

LatencyStats latency_stats(const std::vector<double>& seconds) {
  LatencyStats stats;
  if (seconds.empty()) return stats;
  double sum = 0.0;
  for (double s : seconds) sum += s;
  stats.mean = sum / static_cast<double>(seconds.size());
  if (seconds.size() > 1) {
    double ss = 0.0;
    for (double s : seconds) ss += (s - stats.mean) * (s - stats.mean);
    const double var = ss / static_cast<double>(seconds.size() - 1);
    stats.stderr_ = std::sqrt(var / static_cast<double>(seconds.size()));
  }
  return stats;
}

SelectionResult feed_selector(Selector& selector, std::span<const Sample> stream,
                              bool timing, std::vector<double>* latencies) {
  if (timing && latencies != nullptr) {
    for (const Sample& s : stream) {
      const auto t0 = std::chrono::steady_clock::now();
      selector.observe(s);
      const auto t1 = std::chrono::steady_clock::now();
      latencies->push_back(std::chrono::duration<double>(t1 - t0).count());
    }
  } else {
    for (const Sample& s : stream) selector.observe(s);
  }
  return selector.finish();
}

}  // namespace

RoundReport select_round(std::span<const LabeledSample> round_items,
                         const ObjectiveSpec& objective, SelectorConfig selector_config,
                         int divide, bool use_cache, bool timing, int round_index) {
  RoundReport report;
  report.round = round_index;

  // Labels stay on this side of the fence; selectors see plain Samples.
  std::vector<Sample> stream;
  stream.reserve(round_items.size());
  std::unordered_map<std::string, const LabeledSample*> by_id;
  by_id.reserve(round_items.size());
  for (const LabeledSample& item : round_items) {
    stream.push_back(item.sample);
    by_id.emplace(item.sample.id, &item);
  }

  std::vector<double> latencies;
  std::vector<Sample> chosen;

  if (divide <= 1) {
    auto selector = make_selector(objective, selector_config, use_cache);
    SelectionResult result = feed_selector(*selector, stream, timing, &latencies);
    chosen = std::move(result.chosen);
    report.objective = result.value;
    report.stored_peak = result.stored_peak;
    report.gain_evaluations = result.gain_evaluations;
    report.kernel_evaluations = result.kernel_evaluations;
    report.samples_seen = result.samples_seen;
  } else {
    if (selector_config.k % divide != 0) {
      throw ConfigError("divide_k must divide K");
    }
    SelectorConfig sub = selector_config;
    sub.k = selector_config.k / divide;
    const std::size_t n = stream.size();
    for (int part = 0; part < divide; ++part) {
      const std::size_t begin = n * part / divide;
      const std::size_t end = n * (part + 1) / divide;
      sub.seed = mix_seed(selector_config.seed, 0x5EED + part);
      auto selector = make_selector(objective, sub, use_cache);
      SelectionResult result = feed_selector(
          *selector, std::span<const Sample>(stream).subspan(begin, end - begin),
          timing, &latencies);
      for (Sample& s : result.chosen) chosen.push_back(std::move(s));
      report.objective_parts_sum += result.value;
      report.stored_peak = std::max(report.stored_peak, result.stored_peak);
      report.gain_evaluations += result.gain_evaluations;
      report.kernel_evaluations += result.kernel_evaluations;
      report.samples_seen += result.samples_seen;
    }
    report.objective = objective_value(chosen, objective);
  }

  report.selected_count = static_cast<int>(chosen.size());
  std::set<std::string> groups;
  for (const Sample& s : chosen) {
    report.selected_ids.push_back(s.id);
    groups.insert(s.group.empty() ? s.id : s.group);
    const auto it = by_id.find(s.id);
    if (it != by_id.end() && it->second->label &&
        *it->second->label == kNonObjectLabel) {
      ++report.nonobject_selected;
    }
  }
  report.unique_groups = static_cast<int>(groups.size());

  const LatencyStats stats = latency_stats(latencies);
  report.latency_mean = stats.mean;
  report.latency_stderr = stats.stderr_;
  return report;
}

namespace {

std::vector<std::vector<LabeledSample>> materialize_rounds(
    const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.record_path.empty()) return read_rounds(config.record_path);
  WorldSpec world = config.world;
  world.seed = seed;
  std::vector<std::vector<LabeledSample>> rounds;
  rounds.reserve(config.peculiarity.rounds);
  for (int r = 0; r < config.peculiarity.rounds; ++r) {
    rounds.push_back(generate_round(world, config.peculiarity, r));
  }
  return rounds;
}

std::vector<RoundReport> run_algorithm_over_rounds(
    const ExperimentConfig& config, const AlgorithmRun& run,
    const std::vector<std::vector<LabeledSample>>& rounds, std::uint64_t seed) {
  std::vector<RoundReport> reports;
  reports.reserve(rounds.size());
  std::set<std::string> dataset;  // D_n, grows by union with each batch
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    SelectorConfig selector = run.config;
    selector.seed = mix_seed(mix_seed(seed, run.config.seed), r);
    RoundReport report =
        select_round(rounds[r], config.objective, selector, config.divide_k,
                     config.cache, config.timing, static_cast<int>(r));
    for (const std::string& id : report.selected_ids) dataset.insert(id);
    report.dataset_size = dataset.size();
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace

std::vector<std::vector<RoundReport>> run_rounds(const ExperimentConfig& config,
                                                 std::uint64_t seed) {
  config.validate();
  const auto rounds = materialize_rounds(config, seed);
  std::vector<std::vector<RoundReport>> all;
  all.reserve(config.algorithms.size());
  for (const AlgorithmRun& run : config.algorithms) {
    all.push_back(run_algorithm_over_rounds(config, run, rounds, seed));
  }
  return all;
}

std::vector<std::vector<RoundReport>> run_rounds(const ExperimentConfig& config) {
  return run_rounds(config, config.world.seed);
}

std::vector<RoundReport> run_divided_k(const ExperimentConfig& config) {
  if (config.divide_k < 2) throw ConfigError("run_divided_k needs divide_k > 1");
  config.validate();
  const auto rounds = materialize_rounds(config, config.world.seed);
  return run_algorithm_over_rounds(config, config.algorithms.front(), rounds,
                                   config.world.seed);
}

std::vector<std::vector<std::vector<RoundReport>>> run_experiment(
    const ExperimentConfig& config) {
  config.validate();
  const std::vector<std::uint64_t> seeds =
      config.seeds.empty() ? std::vector<std::uint64_t>{config.world.seed}
                           : config.seeds;

  const std::size_t a_count = config.algorithms.size();
  const std::size_t s_count = seeds.size();
  std::vector<std::vector<std::vector<RoundReport>>> results(a_count);
  for (auto& per_seed : results) per_seed.resize(s_count);

  // Record sources are seed-independent; load once and share.
  std::vector<std::vector<LabeledSample>> shared_rounds;
  const bool record_source = !config.record_path.empty();
  if (record_source) shared_rounds = materialize_rounds(config, seeds[0]);

  struct Task {
    std::size_t algorithm;
    std::size_t seed_index;
  };
  std::vector<Task> tasks;
  tasks.reserve(a_count * s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    for (std::size_t a = 0; a < a_count; ++a) tasks.push_back(Task{a, s});
  }

  const int thread_count =
      std::min<int>(effective_threads(config), static_cast<int>(tasks.size()));
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      const Task task = tasks[i];
      try {
        const auto rounds = record_source
                                ? shared_rounds
                                : materialize_rounds(config, seeds[task.seed_index]);
        results[task.algorithm][task.seed_index] = run_algorithm_over_rounds(
            config, config.algorithms[task.algorithm], rounds, seeds[task.seed_index]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

RandomInstance make_random_instance(std::mt19937_64& rng, int index) {
  RandomInstance inst;

  std::uniform_int_distribution<int> n_pick(4, 12);
  std::uniform_int_distribution<int> k_pick(1, 4);
  std::uniform_int_distribution<int> three_pick(0, 2);
  std::uniform_int_distribution<int> dim_pick(2, 5);
  std::uniform_int_distribution<int> class_pick(3, 6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int n = n_pick(rng);
  inst.k = std::min(k_pick(rng), n);
  inst.epsilon = (index % 2 == 0) ? 0.1 : 0.01;

  static constexpr KernelKind kKinds[4] = {
      KernelKind::kPolynomialFeatures, KernelKind::kRbfL1Raw,
      KernelKind::kRbfL2Features, KernelKind::kRbfJsdSoftmax};
  inst.objective.kernel.kind = kKinds[index % 4];
  static constexpr double kLevels[3] = {0.5, 1.0, 2.0};
  inst.objective.kernel.beta = kLevels[three_pick(rng)];
  inst.objective.alpha = kLevels[three_pick(rng)];

  static constexpr double kLambdas[3] = {0.0, 0.5, 1.0};
  do {
    inst.objective.lambda_i = kLambdas[three_pick(rng)];
    inst.objective.lambda_d = kLambdas[three_pick(rng)];
  } while (inst.objective.lambda_i + inst.objective.lambda_d <= 0.0);
  inst.objective.informativeness = (rng() % 2 == 0)
                                       ? Informativeness::kSoftmaxEntropy
                                       : Informativeness::kPrecomputedScore;

  const int dim = dim_pick(rng);
  const int classes = class_pick(rng);
  inst.pool.reserve(n);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.seq = static_cast<std::uint64_t>(i);
    s.group = s.id;
    Eigen::VectorXd f(dim);
    for (int d = 0; d < dim; ++d) f[d] = unit(rng);
    s.features = std::move(f);
    Eigen::VectorXd p(classes);
    for (int c = 0; c < classes; ++c) p[c] = std::exp(gauss(rng));
    p /= p.sum();
    s.softmax = std::move(p);
    s.score = std::abs(gauss(rng));
    inst.pool.push_back(std::move(s));
  }
  return inst;
}

namespace {

bool feasible(const SelectionResult& result, const RandomInstance& inst) {
  if (static_cast<int>(result.chosen.size()) > inst.k) return false;
  if (result.samples_seen != inst.pool.size()) return false;  // one pass
  std::set<std::string> ids;
  for (const Sample& s : result.chosen) {
    if (!ids.insert(s.id).second) return false;
    bool from_pool = false;
    for (const Sample& p : inst.pool) {
      if (p.id == s.id) {
        from_pool = true;
        break;
      }
    }
    if (!from_pool) return false;
  }
  return true;
}

double value_drift(const SelectionResult& result, const ObjectiveSpec& objective) {
  const double direct = objective_value(result.chosen, objective);
  return std::abs(result.value - direct) / std::max(1.0, std::abs(direct));
}

}  // namespace

VerificationReport verify_guarantees(std::uint64_t suite_seed, int instances,
                                     bool inject_fault) {
  if (instances < 1 || instances > 10000) {
    throw ConfigError("instances must lie in [1, 10000]");
  }
  std::mt19937_64 rng(mix_seed(suite_seed, 0x5EED5EEDULL));
  VerificationReport report;
  report.instances = instances;

  double worst_ratio = 2.0;
  const double slack = 1e-9;

  for (int i = 0; i < instances; ++i) {
    const RandomInstance inst = make_random_instance(rng, i);
    const SelectionResult opt = brute_force(inst.pool, inst.objective, inst.k);
    const bool trivial_opt = opt.value <= 1e-12;

    SelectorConfig base;
    base.k = inst.k;
    base.epsilon = inst.epsilon;
    base.seed = mix_seed(suite_seed, static_cast<std::uint64_t>(i));
    base.inject_fault = inject_fault;

    auto run_one = [&](Algorithm algorithm) {
      SelectorConfig cfg = base;
      cfg.algorithm = algorithm;
      VectorStream stream(inst.pool);
      auto selector = make_selector(inst.objective, cfg, /*use_cache=*/true);
      return run_stream(stream, *selector);
    };

    const SelectionResult sieve = run_one(Algorithm::kSieveStreaming);
    const SelectionResult sspp = run_one(Algorithm::kSieveStreamingPP);
    const SelectionResult threes = run_one(Algorithm::kThreeSieves);
    const SelectionResult entropy = run_one(Algorithm::kEntropyTopK);
    const SelectionResult greedy = offline_greedy(inst.pool, inst.objective, inst.k);

    auto note_violation = [&](const char* what, double ratio) {
      ++report.violations;
      if (ratio < worst_ratio) {
        worst_ratio = ratio;
        std::ostringstream dump;
        dump << "instance " << i << " [" << what << "]: ratio " << ratio
             << ", n=" << inst.pool.size() << ", K=" << inst.k
             << ", eps=" << inst.epsilon
             << ", kernel=" << kernel_kind_name(inst.objective.kernel.kind)
             << ", lambda_i=" << inst.objective.lambda_i
             << ", lambda_d=" << inst.objective.lambda_d
             << ", alpha=" << inst.objective.alpha << ", OPT=" << opt.value;
        report.worst_case = dump.str();
      }
    };

    auto ratio_of = [&](const SelectionResult& r) {
      return trivial_opt ? 1.0 : r.value / opt.value;
    };

    // Feasibility and one-pass discipline for every streaming run.
    for (const SelectionResult* r : {&sieve, &sspp, &threes, &entropy}) {
      if (!feasible(*r, inst)) note_violation("feasibility", 0.0);
    }
    if (threes.stored_peak > static_cast<std::size_t>(inst.k)) {
      note_violation("three-sieves-memory", 0.0);
    }

    const double r_sieve = ratio_of(sieve);
    const double r_sspp = ratio_of(sspp);
    const double r_greedy = ratio_of(greedy);
    report.min_ratio_sieve = std::min(report.min_ratio_sieve, r_sieve);
    report.min_ratio_sspp = std::min(report.min_ratio_sspp, r_sspp);
    report.min_ratio_greedy = std::min(report.min_ratio_greedy, r_greedy);

    const double sieve_bound = 0.5 - inst.epsilon;
    if (r_sieve < sieve_bound - slack) note_violation("sieve-streaming", r_sieve);
    if (r_sspp < sieve_bound - slack) note_violation("sieve-streaming-pp", r_sspp);
    if (r_greedy < (1.0 - 1.0 / std::exp(1.0)) - slack) {
      note_violation("greedy", r_greedy);
    }

    if (!inst.objective.uses_diversity()) {
      // Modular objective: top-K by informativeness is exactly optimal.
      const double r_entropy = ratio_of(entropy);
      report.min_ratio_entropy_modular =
          std::min(report.min_ratio_entropy_modular, r_entropy);
      if (std::abs(entropy.value - opt.value) > slack * std::max(1.0, opt.value)) {
        note_violation("entropy-topk-modular", r_entropy);
      }
    }

    const double stored_ratio =
        static_cast<double>(sspp.stored_peak) / (inst.k / inst.epsilon);
    report.max_stored_ratio_sspp = std::max(report.max_stored_ratio_sspp, stored_ratio);

    for (const SelectionResult* r : {&sieve, &sspp, &threes}) {
      const double drift = value_drift(*r, inst.objective);
      report.max_value_drift = std::max(report.max_value_drift, drift);
      if (drift > 1e-8) note_violation("value-drift", 0.0);
    }

    // Incremental vs direct determinant over a commit sequence.
    if (inst.objective.uses_diversity()) {
      KernelEvaluator kernels(inst.objective.kernel, true);
      DiversityState state;
      std::vector<Sample> order = inst.pool;
      std::shuffle(order.begin(), order.end(), rng);
      for (const Sample& s : order) {
        const DiversityGain g = state.gain(s, inst.objective.alpha, kernels);
        if (!g.degenerate) state.commit(s, g);
      }
      const std::size_t m = state.size();
      if (m > 0) {
        Eigen::MatrixXd sim(m, m);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = a; b < m; ++b) {
            const double k = kernels(state.members()[a], state.members()[b]);
            sim(a, b) = k;
            sim(b, a) = k;
          }
        }
        const double direct = logdet_regularized(sim, inst.objective.alpha);
        const double rel = std::abs(state.logdet() - direct) / std::max(1.0, std::abs(direct));
        report.max_logdet_rel_error = std::max(report.max_logdet_rel_error, rel);

        Eigen::MatrixXd a_dense = inst.objective.alpha * sim;
        a_dense.diagonal().array() += 1.0;
        const Eigen::MatrixXd inv_direct =
            a_dense.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
        const double inv_err = (state.inverse() - inv_direct).cwiseAbs().maxCoeff();
        report.max_inverse_abs_error = std::max(report.max_inverse_abs_error, inv_err);
      }
    }
  }
  return report;
}

std::vector<TimingCell> measure_speed(const ExperimentConfig& config, int iterations) {
  if (iterations < 100) throw ConfigError("iterations must be at least 100");
  config.validate();

  std::vector<Sample> stream;
  stream.reserve(iterations);
  for (const auto& round : materialize_rounds(config, config.world.seed)) {
    for (const LabeledSample& item : round) {
      if (static_cast<int>(stream.size()) >= iterations) break;
      stream.push_back(item.sample);
    }
    if (static_cast<int>(stream.size()) >= iterations) break;
  }
  if (static_cast<int>(stream.size()) < iterations) {
    throw ConfigError("stream source provides fewer samples than requested iterations");
  }

  std::vector<TimingCell> cells;
  cells.reserve(config.algorithms.size());
  for (const AlgorithmRun& run : config.algorithms) {
    auto selector = make_selector(config.objective, run.config, config.cache);
    std::vector<double> latencies;
    latencies.reserve(stream.size());
    for (const Sample& s : stream) {
      const auto t0 = std::chrono::steady_clock::now();
      selector->observe(s);
      const auto t1 = std::chrono::steady_clock::now();
      latencies.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    (void)selector->finish();

    const LatencyStats stats = latency_stats(latencies);
    TimingCell cell;
    cell.algorithm = run.name.empty()
                         ? std::string(algorithm_name(run.config.algorithm))
                         : run.name;
    cell.k = run.config.k;
    cell.epsilon = run.config.epsilon;
    cell.mean_seconds = stats.mean;
    cell.stderr_seconds = stats.stderr_;
    cell.samples = latencies.size();
    cells.push_back(std::move(cell));
  }
  return cells;
}

namespace {

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct RoundAggregate {
  double selected = 0.0;
  double unique = 0.0;
  double objective = 0.0;
  double latency_mean = 0.0;
  double latency_stderr = 0.0;
  std::size_t stored_peak = 0;
  double gain_evals = 0.0;
};

RoundAggregate aggregate_round(const std::vector<std::vector<RoundReport>>& per_seed,
                               std::size_t round) {
  RoundAggregate agg;
  const double n = static_cast<double>(per_seed.size());
  std::vector<double> latency_means;
  for (const auto& reports : per_seed) {
    const RoundReport& r = reports.at(round);
    agg.selected += r.selected_count / n;
    agg.unique += r.unique_groups / n;
    agg.objective += r.objective / n;
    agg.stored_peak = std::max(agg.stored_peak, r.stored_peak);
    agg.gain_evals += static_cast<double>(r.gain_evaluations) / n;
    latency_means.push_back(r.latency_mean);
  }
  if (per_seed.size() == 1) {
    agg.latency_mean = per_seed[0].at(round).latency_mean;
    agg.latency_stderr = per_seed[0].at(round).latency_stderr;
  } else {
    const LatencyStats stats = latency_stats(latency_means);
    agg.latency_mean = stats.mean;
    agg.latency_stderr = stats.stderr_;
  }
  return agg;
}

}  // namespace

void write_round_csv(std::ostream& out, std::span<const AlgorithmRun> algorithms,
                     const std::vector<std::vector<std::vector<RoundReport>>>& reports) {
  out << "# format_version: " << kFormatVersion << "\n";
  out << "algorithm,round,selected,unique,objective,latency_mean,latency_stderr,"
         "stored_peak,gain_evals\n";
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    const std::string& name = algorithms[a].name.empty()
                                  ? std::string(algorithm_name(algorithms[a].config.algorithm))
                                  : algorithms[a].name;
    if (reports[a].empty()) continue;
    const std::size_t rounds = reports[a][0].size();
    for (std::size_t r = 0; r < rounds; ++r) {
      const RoundAggregate agg = aggregate_round(reports[a], r);
      out << name << ',' << r << ',' << format_double(agg.selected) << ','
          << format_double(agg.unique) << ',' << format_double(agg.objective) << ','
          << format_double(agg.latency_mean) << ','
          << format_double(agg.latency_stderr) << ',' << agg.stored_peak << ','
          << format_double(agg.gain_evals) << '\n';
    }
  }
}

void write_timing_csv(std::ostream& out, std::span<const TimingCell> cells) {
  out << "# format_version: " << kFormatVersion << "\n";
  out << "algorithm,k,epsilon,mean_seconds,stderr_seconds,samples\n";
  for (const TimingCell& cell : cells) {
    out << cell.algorithm << ',' << cell.k << ',' << format_double(cell.epsilon)
        << ',' << format_double(cell.mean_seconds) << ','
        << format_double(cell.stderr_seconds) << ',' << cell.samples << '\n';
  }
}

std::string summary_manifest(std::span<const AlgorithmRun> algorithms,
                             const std::vector<std::vector<std::vector<RoundReport>>>& reports,
                             std::span<const std::uint64_t> seeds) {
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["seeds"] = json::array();
  for (std::uint64_t s : seeds) manifest["seeds"].push_back(s);
  manifest["algorithms"] = json::array();

  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    json entry;
    entry["name"] = algorithms[a].name.empty()
                        ? std::string(algorithm_name(algorithms[a].config.algorithm))
                        : algorithms[a].name;
    entry["algorithm"] = std::string(algorithm_name(algorithms[a].config.algorithm));
    entry["k"] = algorithms[a].config.k;

    double total_selected = 0.0;
    double total_unique = 0.0;
    double total_objective = 0.0;
    double total_gain_evals = 0.0;
    std::size_t stored_peak = 0;
    const double n = reports[a].empty() ? 1.0 : static_cast<double>(reports[a].size());
    for (const auto& per_round : reports[a]) {
      for (const RoundReport& r : per_round) {
        total_selected += r.selected_count / n;
        total_unique += r.unique_groups / n;
        total_objective += r.objective / n;
        total_gain_evals += static_cast<double>(r.gain_evaluations) / n;
        stored_peak = std::max(stored_peak, r.stored_peak);
      }
    }
    entry["total_selected_mean"] = total_selected;
    entry["total_unique_groups_mean"] = total_unique;
    entry["objective_sum_mean"] = total_objective;
    entry["gain_evaluations_mean"] = total_gain_evals;
    entry["stored_peak_max"] = stored_peak;
    manifest["algorithms"].push_back(std::move(entry));
  }
  return manifest.dump(2) + "\n";
}

}  // namespace sievestream
