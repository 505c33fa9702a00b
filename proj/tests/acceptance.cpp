// Acceptance suite: runs every primary criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sievestream/harness.hpp"
#include "support/test_util.hpp"

using namespace sievestream;
using namespace sievestream::testutil;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1
void guarantee_suite() {
  const auto start = std::chrono::steady_clock::now();
  const VerificationReport report_clean = verify_guarantees(20240917, 500);
  const double seconds = elapsed_seconds(start);

  char detail[512];
  std::snprintf(detail, sizeof detail,
                "500 instances, %d violations, min ratios sieve=%.4f sspp=%.4f "
                "greedy=%.4f, sspp stored peak <= %.2f*(K/eps), %.1f s",
                report_clean.violations, report_clean.min_ratio_sieve,
                report_clean.min_ratio_sspp, report_clean.min_ratio_greedy,
                report_clean.max_stored_ratio_sspp, seconds);
  const bool ok = report_clean.violations == 0 &&
                  report_clean.max_stored_ratio_sspp <= 8.0 && seconds <= 60.0;
  report("guarantee-suite", ok, detail);
}

// ---------------------------------------------------------------- criterion 2
void linalg_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> len_pick(1, 64);
  std::uniform_int_distribution<int> three_pick(0, 2);
  static constexpr double kAlphas[3] = {0.5, 1.0, 2.0};
  static constexpr KernelKind kKinds[4] = {
      KernelKind::kPolynomialFeatures, KernelKind::kRbfL1Raw,
      KernelKind::kRbfL2Features, KernelKind::kRbfJsdSoftmax};

  double max_logdet_err = 0.0;
  double max_inverse_err = 0.0;
  for (int sequence = 0; sequence < 1000; ++sequence) {
    const int length = len_pick(rng);
    const double alpha = kAlphas[three_pick(rng)];
    KernelSpec kernel_spec{kKinds[sequence % 4], kAlphas[three_pick(rng)]};
    const auto pool = random_pool(rng, length, 4, 5);

    KernelEvaluator kernels(kernel_spec, true);
    DiversityState state;
    for (const Sample& s : pool) {
      const DiversityGain g = state.gain(s, alpha, kernels);
      if (!g.degenerate) state.commit(s, g);
    }
    const std::size_t n = state.size();
    if (n == 0) continue;

    const Eigen::MatrixXd sim = similarity_matrix(state.members(), kernel_spec);
    const double direct = logdet_regularized(sim, alpha);
    max_logdet_err = std::max(
        max_logdet_err, std::abs(state.logdet() - direct) / std::max(1.0, std::abs(direct)));

    Eigen::MatrixXd a = alpha * sim;
    a.diagonal().array() += 1.0;
    const Eigen::MatrixXd inv_direct =
        a.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    max_inverse_err = std::max(
        max_inverse_err, (state.inverse() - inv_direct).cwiseAbs().maxCoeff());
  }

  char detail[256];
  std::snprintf(detail, sizeof detail,
                "1000 commit sequences (len <= 64): logdet rel err %.3g (tol 1e-8), "
                "inverse err %.3g (tol 1e-6), %.1f s",
                max_logdet_err, max_inverse_err, elapsed_seconds(start));
  report("linalg-oracle", max_logdet_err <= 1e-8 && max_inverse_err <= 1e-6, detail);
}

// ---------------------------------------------------------------- criterion 3
void property_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2718281);
  std::uniform_int_distribution<int> three_pick(0, 2);
  static constexpr double kLambdas[3] = {0.0, 0.5, 1.0};
  static constexpr double kAlphas[3] = {0.5, 1.0, 2.0};

  double worst_monotone = 1e9;
  double worst_submodular = 1e9;
  int checked = 0;
  for (KernelKind kind : {KernelKind::kPolynomialFeatures, KernelKind::kRbfL1Raw,
                          KernelKind::kRbfL2Features, KernelKind::kRbfJsdSoftmax}) {
    for (int trial = 0; trial < 1000; ++trial) {
      ObjectiveSpec spec;
      spec.kernel = KernelSpec{kind, kAlphas[three_pick(rng)]};
      spec.alpha = kAlphas[three_pick(rng)];
      spec.informativeness = Informativeness::kPrecomputedScore;
      do {
        spec.lambda_i = kLambdas[three_pick(rng)];
        spec.lambda_d = kLambdas[three_pick(rng)];
      } while (spec.lambda_i + spec.lambda_d <= 0.0);

      const int n = 3 + static_cast<int>(rng() % 8);
      auto pool = random_pool(rng, n, 3, 4);
      std::shuffle(pool.begin(), pool.end(), rng);
      const std::size_t small = 1 + rng() % (n - 2);
      const std::size_t large = small + rng() % (n - small);
      std::vector<Sample> s_set(pool.begin(), pool.begin() + small);
      std::vector<Sample> t_set(pool.begin(), pool.begin() + large);
      const Sample& e = pool.back();

      auto with = [&](std::vector<Sample> base) {
        base.push_back(e);
        return base;
      };
      const double gain_s =
          objective_value(with(s_set), spec) - objective_value(s_set, spec);
      const double gain_t =
          objective_value(with(t_set), spec) - objective_value(t_set, spec);
      worst_monotone = std::min(worst_monotone, std::min(gain_s, gain_t));
      worst_submodular = std::min(worst_submodular, gain_s - gain_t);
      ++checked;
    }
  }

  char detail[256];
  std::snprintf(detail, sizeof detail,
                "%d triples over 4 kernels: min gain %.3g, min (gain_S - gain_T) "
                "%.3g (tol -1e-9), %.1f s",
                checked, worst_monotone, worst_submodular, elapsed_seconds(start));
  report("property-suite", worst_monotone >= -1e-9 && worst_submodular >= -1e-9,
         detail);
}

// ------------------------------------------------------- criteria 4 and 5
struct PresetOutcome {
  double unique_sspp = 0.0;
  double unique_random = 0.0;
  double unique_entropy = 0.0;
  bool baselines_fill = true;
  bool sspp_feasible = true;
  bool sspp_underselects = true;
  double seconds = 0.0;
};

PresetOutcome run_preset_comparison() {
  const auto start = std::chrono::steady_clock::now();
  const PaperScalePreset preset = paper_scale_preset();

  ExperimentConfig cfg;
  cfg.objective.lambda_i = 1.0;
  cfg.objective.lambda_d = 1.0;
  cfg.objective.alpha = 1.0;
  cfg.objective.informativeness = Informativeness::kSoftmaxEntropy;
  cfg.objective.kernel.kind = KernelKind::kPolynomialFeatures;
  cfg.world = preset.world;
  cfg.peculiarity = preset.peculiarity;
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  AlgorithmRun sspp;
  sspp.name = "sspp";
  sspp.config = preset.selector;
  AlgorithmRun random_run;
  random_run.name = "random";
  random_run.config.algorithm = Algorithm::kRandom;
  random_run.config.k = preset.selector.k;
  AlgorithmRun entropy;
  entropy.name = "entropy";
  entropy.config.algorithm = Algorithm::kEntropyTopK;
  entropy.config.k = preset.selector.k;
  cfg.algorithms = {sspp, random_run, entropy};

  const auto reports = run_experiment(cfg);

  PresetOutcome out;
  const double seeds = static_cast<double>(cfg.seeds.size());
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    int sspp_total_selected = 0;
    for (const RoundReport& r : reports[0][s]) {
      out.unique_sspp += r.unique_groups / seeds;
      sspp_total_selected += r.selected_count;
      if (r.selected_count > preset.selector.k) out.sspp_feasible = false;
    }
    if (sspp_total_selected >=
        preset.selector.k * preset.peculiarity.rounds) {
      out.sspp_underselects = false;
    }
    for (const RoundReport& r : reports[1][s]) {
      out.unique_random += r.unique_groups / seeds;
      if (r.selected_count != preset.selector.k) out.baselines_fill = false;
    }
    for (const RoundReport& r : reports[2][s]) {
      out.unique_entropy += r.unique_groups / seeds;
      if (r.selected_count != preset.selector.k) out.baselines_fill = false;
    }
  }
  out.seconds = elapsed_seconds(start);
  return out;
}

void table2_ordering(const PresetOutcome& out) {
  // Desk-scale goldens recorded from the first verified run (10 seeds);
  // the band tolerates libm-level drift, not behavioral change.
  const double golden_sspp = 1248.7;
  const double golden_random = 1076.9;
  const double golden_entropy = 789.9;

  bool ok = out.unique_sspp >= 1.05 * out.unique_random &&
            out.unique_random >= 1.05 * out.unique_entropy &&
            out.seconds <= 600.0;
  auto near = [](double value, double golden) {
    return golden == 0.0 || std::abs(value - golden) <= 0.03 * golden;
  };
  ok = ok && near(out.unique_sspp, golden_sspp) &&
       near(out.unique_random, golden_random) &&
       near(out.unique_entropy, golden_entropy);

  char detail[512];
  std::snprintf(detail, sizeof detail,
                "mean unique over 10 seeds: sspp=%.1f > random=%.1f > entropy=%.1f "
                "(>=5%% gaps), %.0f s",
                out.unique_sspp, out.unique_random, out.unique_entropy, out.seconds);
  report("table2-ordering", ok, detail);
}

void under_selection(const PresetOutcome& out) {
  char detail[256];
  std::snprintf(detail, sizeof detail,
                "random/entropy fill K every round: %s; sspp <= K and total < N*K: %s",
                out.baselines_fill ? "yes" : "no",
                (out.sspp_feasible && out.sspp_underselects) ? "yes" : "no");
  report("under-selection",
         out.baselines_fill && out.sspp_feasible && out.sspp_underselects, detail);
}

// ---------------------------------------------------------------- criterion 6
void speed_trend() {
  const auto start = std::chrono::steady_clock::now();
  const PaperScalePreset preset = paper_scale_preset();

  ExperimentConfig cfg;
  cfg.objective.lambda_i = 1.0;
  cfg.objective.lambda_d = 1.0;
  cfg.objective.informativeness = Informativeness::kSoftmaxEntropy;
  cfg.objective.kernel.kind = KernelKind::kPolynomialFeatures;
  cfg.world = preset.world;
  cfg.world.seed = 1;
  cfg.peculiarity = preset.peculiarity;
  cfg.peculiarity.rounds = 1;
  cfg.timing = true;

  const std::vector<int> ks = {16, 32};
  const std::vector<double> epsilons = {0.01, 0.05, 0.1};
  for (int k : ks) {
    for (double eps : epsilons) {
      AlgorithmRun run;
      char name[64];
      std::snprintf(name, sizeof name, "sspp-k%d-eps%g", k, eps);
      run.name = name;
      run.config.algorithm = Algorithm::kSieveStreamingPP;
      run.config.k = k;
      run.config.epsilon = eps;
      cfg.algorithms.push_back(run);
    }
  }
  AlgorithmRun entropy;
  entropy.name = "entropy";
  entropy.config.algorithm = Algorithm::kEntropyTopK;
  entropy.config.k = 32;
  cfg.algorithms.push_back(entropy);

  // Median of three repetitions per cell to steady the clock.
  std::vector<std::vector<double>> means(cfg.algorithms.size());
  std::vector<TimingCell> last;
  for (int repetition = 0; repetition < 3; ++repetition) {
    last = measure_speed(cfg, 1200);
    for (std::size_t i = 0; i < last.size(); ++i) {
      means[i].push_back(last[i].mean_seconds);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  // Cells are ordered k16(.01,.05,.1), k32(.01,.05,.1), entropy.
  const double k16e001 = median(means[0]);
  const double k16e005 = median(means[1]);
  const double k16e01 = median(means[2]);
  const double k32e001 = median(means[3]);
  const double k32e005 = median(means[4]);
  const double k32e01 = median(means[5]);
  const double entropy_mean = median(means[6]);

  const bool eps_monotone = k16e001 >= k16e005 && k16e005 >= k16e01 &&
                            k32e001 >= k32e005 && k32e005 >= k32e01;
  const bool k_monotone =
      k32e001 >= k16e001 && k32e005 >= k16e005 && k32e01 >= k16e01;
  const bool entropy_cheap = entropy_mean <= k32e001;

  char detail[512];
  std::snprintf(detail, sizeof detail,
                "per-sample us, K=16: %.1f/%.1f/%.1f, K=32: %.1f/%.1f/%.1f "
                "(eps .01/.05/.1), entropy %.2f; %.0f s",
                1e6 * k16e001, 1e6 * k16e005, 1e6 * k16e01, 1e6 * k32e001,
                1e6 * k32e005, 1e6 * k32e01, 1e6 * entropy_mean,
                elapsed_seconds(start));
  report("speed-trend", eps_monotone && k_monotone && entropy_cheap, detail);
}

// ---------------------------------------------------------------- criterion 7
void memoization() {
  const PaperScalePreset preset = paper_scale_preset();
  ExperimentConfig cfg;
  cfg.objective.lambda_i = 1.0;
  cfg.objective.lambda_d = 1.0;
  cfg.objective.informativeness = Informativeness::kSoftmaxEntropy;
  cfg.objective.kernel.kind = KernelKind::kPolynomialFeatures;
  cfg.world = preset.world;
  cfg.peculiarity = preset.peculiarity;
  cfg.peculiarity.rounds = 1;
  AlgorithmRun sspp;
  sspp.config = preset.selector;
  cfg.algorithms = {sspp};

  cfg.cache = true;
  const auto cached = run_rounds(cfg);
  cfg.cache = false;
  const auto direct = run_rounds(cfg);

  const bool same_selection =
      cached[0][0].selected_ids == direct[0][0].selected_ids &&
      cached[0][0].objective == direct[0][0].objective;
  const bool fewer =
      cached[0][0].kernel_evaluations < direct[0][0].kernel_evaluations;

  char detail[256];
  std::snprintf(detail, sizeof detail,
                "identical selections: %s; kernel evals %llu (cache on) < %llu (off)",
                same_selection ? "yes" : "no",
                static_cast<unsigned long long>(cached[0][0].kernel_evaluations),
                static_cast<unsigned long long>(direct[0][0].kernel_evaluations));
  report("memoization", same_selection && fewer, detail);
}

// ---------------------------------------------------------------- criterion 8
void dividing_k() {
  // Block instance: orthonormal features, similarity block-diagonal under
  // the contiguous split, so division changes nothing.
  std::vector<LabeledSample> block;
  for (int i = 0; i < 8; ++i) {
    LabeledSample item;
    item.sample.id = "e" + std::to_string(i);
    item.sample.seq = i;
    item.sample.group = item.sample.id;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(8);
    f[i] = 1.0;
    item.sample.features = std::move(f);
    item.sample.score = 1.0;
    block.push_back(std::move(item));
  }
  ObjectiveSpec block_objective;
  block_objective.lambda_i = 1.0;
  block_objective.lambda_d = 1.0;
  block_objective.informativeness = Informativeness::kPrecomputedScore;
  block_objective.kernel.kind = KernelKind::kPolynomialFeatures;

  SelectorConfig selector;
  selector.algorithm = Algorithm::kSieveStreamingPP;
  selector.k = 8;
  selector.epsilon = 0.1;

  const RoundReport undivided_block =
      select_round(block, block_objective, selector, 1, true, false, 0);
  const RoundReport divided_block =
      select_round(block, block_objective, selector, 2, true, false, 0);
  const double block_gap = std::abs(divided_block.objective - undivided_block.objective);

  // Paper-scale preset: dividing K must strictly reduce gain evaluations.
  const PaperScalePreset preset = paper_scale_preset();
  ExperimentConfig cfg;
  cfg.objective = block_objective;
  cfg.objective.informativeness = Informativeness::kSoftmaxEntropy;
  cfg.world = preset.world;
  cfg.peculiarity = preset.peculiarity;
  cfg.peculiarity.rounds = 1;
  AlgorithmRun sspp;
  sspp.config = preset.selector;
  cfg.algorithms = {sspp};

  const auto undivided = run_rounds(cfg);
  cfg.divide_k = 2;
  const auto divided = run_divided_k(cfg);

  char detail[384];
  std::snprintf(detail, sizeof detail,
                "block instance gap %.3g (tol 1e-6); preset gain evals %llu "
                "(divided) < %llu (undivided)",
                block_gap, static_cast<unsigned long long>(divided[0].gain_evaluations),
                static_cast<unsigned long long>(undivided[0][0].gain_evaluations));
  report("dividing-k",
         block_gap <= 1e-6 &&
             divided[0].gain_evaluations < undivided[0][0].gain_evaluations,
         detail);
}

}  // namespace

int main() {
  guarantee_suite();
  linalg_oracle();
  property_suite();
  const PresetOutcome preset = run_preset_comparison();
  table2_ordering(preset);
  under_selection(preset);
  speed_trend();
  memoization();
  dividing_k();

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
