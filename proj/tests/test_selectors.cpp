#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sievestream/errors.hpp"
#include "sievestream/harness.hpp"
#include "sievestream/selectors.hpp"
#include "sievestream/simulator.hpp"
#include "support/test_util.hpp"

using namespace sievestream;
using namespace sievestream::testutil;

namespace {

ObjectiveSpec modular_objective() {
  ObjectiveSpec spec;
  spec.lambda_i = 1.0;
  spec.lambda_d = 0.0;
  spec.informativeness = Informativeness::kPrecomputedScore;
  return spec;
}

// All-identical samples with a huge alpha: every duplicate's Schur
// complement cancels below the floor, so marginal diversity is exactly 0.
ObjectiveSpec degenerate_duplicate_objective() {
  ObjectiveSpec spec;
  spec.lambda_i = 0.0;
  spec.lambda_d = 1.0;
  spec.alpha = 1e16;
  spec.kernel = KernelSpec{KernelKind::kRbfL2Features, 1.0};
  return spec;
}

std::vector<Sample> identical_stream(int n) {
  std::vector<Sample> stream;
  for (int i = 0; i < n; ++i) {
    Sample s = feature_sample("dup" + std::to_string(i), i, {0.5, 0.5, 0.5});
    s.group = "dup";
    stream.push_back(std::move(s));
  }
  return stream;
}

SelectorConfig sieve_config(Algorithm algorithm, int k, double epsilon) {
  SelectorConfig cfg;
  cfg.algorithm = algorithm;
  cfg.k = k;
  cfg.epsilon = epsilon;
  return cfg;
}

}  // namespace

TEST_CASE("threshold grid instantiation") {
  // m = 1, base 2, K = 4: thresholds {1, 2, 4, 8} inclusive.
  const auto grid = threshold_grid(1.0, 8.0, 1.0);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0] == 1.0);
  CHECK(grid[1] == 2.0);
  CHECK(grid[2] == 4.0);
  CHECK(grid[3] == 8.0);

  CHECK(grid_exponent_floor(1.0, 1.0) == 0);
  CHECK(grid_exponent_ceil(1.0, 1.0) == 0);
  // Grid points are their own floor and ceil even after pow round trips.
  for (int i = -20; i <= 20; ++i) {
    const double x = grid_value(i, 0.1);
    CHECK(grid_exponent_floor(x, 0.1) == i);
    CHECK(grid_exponent_ceil(x, 0.1) == i);
  }
  CHECK(threshold_grid(8.0, 1.0, 1.0).empty());
}

TEST_CASE("sieve-streaming picks the top modular pair") {
  // Scores {3, 1, 2}: the optimum pair is worth 5.
  const ObjectiveSpec objective = modular_objective();
  const SelectionResult oracle =
      brute_force(score_pool({3.0, 1.0, 2.0}), objective, 2);
  CHECK(oracle.value == 5.0);

  // Descending arrival reaches the optimum exactly.
  const auto descending = score_pool({3.0, 2.0, 1.0});
  VectorStream stream(descending);
  const SelectionResult result =
      sieve_streaming(stream, objective, sieve_config(Algorithm::kSieveStreaming, 2, 0.5));
  CHECK(result.value == doctest::Approx(5.0).epsilon(1e-12));
  REQUIRE(result.chosen.size() == 2);
  CHECK(result.chosen[0].id == "a");
  CHECK(result.chosen[1].id == "b");  // the score-2 sample
  CHECK(result.samples_seen == 3);

  // Order 3,1,2 lets the deficit rule admit the low scorer as a free
  // rider before 2 arrives; the approximation guarantee still holds.
  VectorStream adversarial(score_pool({3.0, 1.0, 2.0}));
  const SelectionResult worst =
      sieve_streaming(adversarial, objective, sieve_config(Algorithm::kSieveStreaming, 2, 0.5));
  CHECK(worst.value >= (0.5 - 0.5) * oracle.value - 1e-9);
  CHECK(worst.value >= 4.0 - 1e-9);
}

TEST_CASE("sieve-streaming K=1 halves the best singleton at worst") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    double best_singleton = 0.0;
    for (const Sample& s : inst.pool) {
      std::vector<Sample> singleton{s};
      best_singleton = std::max(best_singleton, objective_value(singleton, inst.objective));
    }
    VectorStream stream(inst.pool);
    const SelectionResult result = sieve_streaming(
        stream, inst.objective, sieve_config(Algorithm::kSieveStreaming, 1, inst.epsilon));
    CHECK(result.value >= (0.5 - inst.epsilon) * best_singleton - 1e-9);
  }
}

TEST_CASE("sieve family meets the approximation ratio on random instances") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    const SelectionResult oracle = brute_force(inst.pool, inst.objective, inst.k);
    if (oracle.value <= 1e-12) continue;

    for (Algorithm algorithm :
         {Algorithm::kSieveStreaming, Algorithm::kSieveStreamingPP}) {
      VectorStream stream(inst.pool);
      auto selector = make_selector(inst.objective,
                                    sieve_config(algorithm, inst.k, inst.epsilon));
      const SelectionResult result = run_stream(stream, *selector);
      CHECK(result.value >= (0.5 - inst.epsilon) * oracle.value - 1e-9);
      CHECK(result.chosen.size() <= static_cast<std::size_t>(inst.k));
    }
  }
}

TEST_CASE("sieve values survive the audit recomputation") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    for (Algorithm algorithm : {Algorithm::kSieveStreaming,
                                Algorithm::kSieveStreamingPP,
                                Algorithm::kThreeSieves}) {
      SelectorConfig cfg = sieve_config(algorithm, inst.k, inst.epsilon);
      cfg.audit = true;
      VectorStream stream(inst.pool);
      auto selector = make_selector(inst.objective, cfg);
      CHECK_NOTHROW(run_stream(stream, *selector));
    }
  }
}

TEST_CASE("sspp keeps one copy of a degenerate duplicate stream") {
  VectorStream stream(identical_stream(10));
  const SelectionResult result = sieve_streaming_pp(
      stream, degenerate_duplicate_objective(),
      sieve_config(Algorithm::kSieveStreamingPP, 3, 0.1));
  CHECK(result.chosen.size() == 1);
  CHECK(result.samples_seen == 10);
}

TEST_CASE("sspp storage stays within the K/epsilon envelope") {
  std::mt19937_64 rng(515);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    VectorStream stream(inst.pool);
    const SelectionResult result = sieve_streaming_pp(
        stream, inst.objective, sieve_config(Algorithm::kSieveStreamingPP, inst.k, inst.epsilon));
    worst_ratio = std::max(
        worst_ratio, static_cast<double>(result.stored_peak) / (inst.k / inst.epsilon));
  }
  CHECK(worst_ratio <= 8.0);
}

TEST_CASE("three sieves hand trace with a descending stream") {
  // Scores 8,4,2,1; K=2, T=1, grid base 2. The top threshold is 8; the
  // element 4 triggers one step-down and is accepted at threshold 4.
  const auto pool = score_pool({8.0, 4.0, 2.0, 1.0});
  SelectorConfig cfg;
  cfg.algorithm = Algorithm::kThreeSieves;
  cfg.k = 2;
  cfg.epsilon = 1.0;  // grid base 2; bypasses the wrapper validation
  cfg.rejection_budget = 1;

  auto selector = make_selector(modular_objective(), cfg);
  VectorStream stream(pool);
  const SelectionResult result = run_stream(stream, *selector);
  CHECK(result.value == doctest::Approx(12.0).epsilon(1e-12));
  REQUIRE(result.chosen.size() == 2);
  CHECK(result.chosen[0].id == "a");
  CHECK(result.chosen[1].id == "b");
}

TEST_CASE("three sieves on duplicates keeps one and stays within K") {
  SelectorConfig cfg;
  cfg.algorithm = Algorithm::kThreeSieves;
  cfg.k = 4;
  cfg.epsilon = 0.2;
  cfg.rejection_budget = 2;
  VectorStream stream(identical_stream(12));
  auto selector = make_selector(degenerate_duplicate_objective(), cfg);
  const SelectionResult result = run_stream(stream, *selector);
  CHECK(result.chosen.size() == 1);
  CHECK(result.stored_peak <= 4);
}

TEST_CASE("three sieves memory never exceeds K") {
  std::mt19937_64 rng(616);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    SelectorConfig cfg = sieve_config(Algorithm::kThreeSieves, inst.k, inst.epsilon);
    VectorStream stream(inst.pool);
    auto selector = make_selector(inst.objective, cfg);
    const SelectionResult result = run_stream(stream, *selector);
    CHECK(result.stored_peak <= static_cast<std::size_t>(inst.k));
    CHECK(result.chosen.size() <= static_cast<std::size_t>(inst.k));
  }
}

TEST_CASE("random baseline basics") {
  const ObjectiveSpec objective = modular_objective();
  SelectorConfig cfg;
  cfg.algorithm = Algorithm::kRandom;
  cfg.k = 5;
  cfg.seed = 99;

  SUBCASE("short streams are taken whole") {
    VectorStream stream(score_pool({1.0, 2.0, 3.0}));
    const SelectionResult result = random_baseline(stream, objective, cfg);
    CHECK(result.chosen.size() == 3);
    CHECK(result.value == doctest::Approx(6.0).epsilon(1e-12));
  }

  SUBCASE("fixed seed reproduces the selection") {
    std::mt19937_64 rng(3);
    const auto pool = random_pool(rng, 40);
    ObjectiveSpec spec = modular_objective();
    std::vector<std::string> first_ids;
    for (int run = 0; run < 2; ++run) {
      VectorStream stream(pool);
      const SelectionResult result = random_baseline(stream, spec, cfg);
      std::vector<std::string> ids;
      for (const Sample& s : result.chosen) ids.push_back(s.id);
      if (run == 0) {
        first_ids = ids;
      } else {
        CHECK(ids == first_ids);
      }
    }
  }
}

TEST_CASE("reservoir sampling is uniform over pairs") {
  // 10^4 one-pass draws of a 2-subset from 10 items; every one of the 45
  // pairs should land within the 3-sigma binomial band around 1/45.
  const auto pool = score_pool({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  const ObjectiveSpec objective = modular_objective();

  std::map<std::pair<std::string, std::string>, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    SelectorConfig cfg;
    cfg.algorithm = Algorithm::kRandom;
    cfg.k = 2;
    cfg.seed = 1000003ULL * static_cast<std::uint64_t>(t) + 17;
    VectorStream stream(pool);
    const SelectionResult result = random_baseline(stream, objective, cfg);
    REQUIRE(result.chosen.size() == 2);
    std::string a = result.chosen[0].id;
    std::string b = result.chosen[1].id;
    if (b < a) std::swap(a, b);
    ++counts[{a, b}];
  }

  CHECK(counts.size() == 45);
  const double p = 1.0 / 45.0;
  const double mean = trials * p;
  const double sigma = std::sqrt(trials * p * (1.0 - p));
  for (const auto& [pair, count] : counts) {
    CHECK(std::abs(count - mean) <= 3.0 * sigma);
  }
}

TEST_CASE("entropy top-k basics") {
  const ObjectiveSpec objective = modular_objective();
  SelectorConfig cfg;
  cfg.algorithm = Algorithm::kEntropyTopK;
  cfg.k = 2;

  SUBCASE("keeps the largest informativeness") {
    VectorStream stream(score_pool({3.0, 1.0, 2.0}));
    const SelectionResult result = entropy_topk(stream, objective, cfg);
    CHECK(result.value == doctest::Approx(5.0).epsilon(1e-12));
    REQUIRE(result.chosen.size() == 2);
    CHECK(result.chosen[0].id == "a");
    CHECK(result.chosen[1].id == "c");
  }

  SUBCASE("ties break toward the earlier arrival") {
    VectorStream stream(score_pool({1.0, 1.0, 1.0, 1.0}));
    const SelectionResult result = entropy_topk(stream, objective, cfg);
    REQUIRE(result.chosen.size() == 2);
    CHECK(result.chosen[0].id == "a");
    CHECK(result.chosen[1].id == "b");
  }
}

TEST_CASE("entropy top-k matches brute force on modular instances") {
  std::mt19937_64 rng(717);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    RandomInstance inst = make_random_instance(rng, trial);
    inst.objective.lambda_d = 0.0;  // modular only
    inst.objective.lambda_i = 1.0;
    const SelectionResult oracle = brute_force(inst.pool, inst.objective, inst.k);
    VectorStream stream(inst.pool);
    const SelectionResult result = entropy_topk(
        stream, inst.objective, sieve_config(Algorithm::kEntropyTopK, inst.k, 0.1));
    CHECK(std::abs(result.value - oracle.value) <= 1e-9 * std::max(1.0, oracle.value));
    ++compared;
  }
  CHECK(compared == 200);
}

TEST_CASE("offline greedy is exact on modular objectives") {
  std::mt19937_64 rng(818);
  for (int trial = 0; trial < 50; ++trial) {
    RandomInstance inst = make_random_instance(rng, trial);
    inst.objective.lambda_d = 0.0;
    inst.objective.lambda_i = 1.0;
    const SelectionResult oracle = brute_force(inst.pool, inst.objective, inst.k);
    const SelectionResult greedy = offline_greedy(inst.pool, inst.objective, inst.k);
    CHECK(std::abs(greedy.value - oracle.value) <= 1e-9 * std::max(1.0, oracle.value));
  }
}

TEST_CASE("offline greedy stops at zero gains on a degenerate duplicate pool") {
  const SelectionResult result =
      offline_greedy(identical_stream(8), degenerate_duplicate_objective(), 4);
  CHECK(result.chosen.size() == 1);
}

TEST_CASE("offline greedy holds the 1 - 1/e ratio") {
  std::mt19937_64 rng(919);
  const double bound = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomInstance inst = make_random_instance(rng, trial);
    const SelectionResult oracle = brute_force(inst.pool, inst.objective, inst.k);
    if (oracle.value <= 1e-12) continue;
    const SelectionResult greedy = offline_greedy(inst.pool, inst.objective, inst.k);
    CHECK(greedy.value >= bound * oracle.value - 1e-9);
  }
}

TEST_CASE("brute force basics") {
  const ObjectiveSpec objective = modular_objective();

  const auto one = score_pool({4.0});
  const SelectionResult single = brute_force(one, objective, 3);
  CHECK(single.chosen.size() == 1);
  CHECK(single.value == 4.0);

  const auto pool = score_pool({3.0, 1.0, 2.0});
  const SelectionResult pair = brute_force(pool, objective, 2);
  CHECK(pair.value == 5.0);

  std::vector<Sample> big;
  for (int i = 0; i < 80; ++i) big.push_back(score_sample("x" + std::to_string(i), i, 1.0));
  CHECK_THROWS_AS(brute_force(big, objective, 4), BudgetError);
}

TEST_CASE("streaming selectors touch each sample exactly once") {
  std::mt19937_64 rng(111);
  const RandomInstance inst = make_random_instance(rng, 0);
  for (Algorithm algorithm :
       {Algorithm::kSieveStreaming, Algorithm::kSieveStreamingPP,
        Algorithm::kThreeSieves, Algorithm::kRandom, Algorithm::kEntropyTopK}) {
    CountingStream stream(inst.pool);
    auto selector = make_selector(inst.objective,
                                  sieve_config(algorithm, inst.k, inst.epsilon));
    const SelectionResult result = run_stream(stream, *selector);
    CHECK(stream.handed_out() == inst.pool.size());
    CHECK(result.samples_seen == inst.pool.size());

    std::set<std::string> ids;
    for (const Sample& s : result.chosen) CHECK(ids.insert(s.id).second);
  }
}

TEST_CASE("empty streams produce empty results") {
  const ObjectiveSpec objective = modular_objective();
  for (Algorithm algorithm :
       {Algorithm::kSieveStreaming, Algorithm::kSieveStreamingPP,
        Algorithm::kThreeSieves, Algorithm::kRandom, Algorithm::kEntropyTopK}) {
    VectorStream stream({});
    auto selector = make_selector(objective, sieve_config(algorithm, 3, 0.1));
    const SelectionResult result = run_stream(stream, *selector);
    CHECK(result.chosen.empty());
    CHECK(result.value == 0.0);
    CHECK(result.samples_seen == 0);
  }
}

TEST_CASE("gain evaluations fall as epsilon grows") {
  WorldSpec world;
  world.classes = 5;
  world.feature_dim = 8;
  world.seed = 21;
  PeculiaritySpec pec;
  pec.round_size = 160;
  pec.nonobject_count = 60;
  pec.replication = 4;
  pec.rounds = 1;

  ObjectiveSpec objective;
  objective.lambda_i = 1.0;
  objective.lambda_d = 1.0;
  objective.kernel.kind = KernelKind::kPolynomialFeatures;

  const auto round = generate_round(world, pec, 0);
  const auto stream_items = strip_labels(round);

  std::uint64_t previous = 0;
  bool first = true;
  for (double epsilon : {0.01, 0.05, 0.1}) {
    VectorStream stream(stream_items);
    const SelectionResult result = sieve_streaming_pp(
        stream, objective, sieve_config(Algorithm::kSieveStreamingPP, 16, epsilon));
    if (!first) CHECK(result.gain_evaluations <= previous);
    previous = result.gain_evaluations;
    first = false;
  }
}

TEST_CASE("selector config validation") {
  SelectorConfig cfg = sieve_config(Algorithm::kSieveStreaming, 0, 0.1);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sieve_config(Algorithm::kSieveStreamingPP, 4, 1.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sieve_config(Algorithm::kThreeSieves, 4, 0.1);
  cfg.rejection_budget = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = sieve_config(Algorithm::kRandom, 4, 5.0);  // epsilon unused
  CHECK_NOTHROW(cfg.validate());

  VectorStream stream(score_pool({1.0}));
  CHECK_THROWS_AS(
      sieve_streaming(stream, modular_objective(),
                      sieve_config(Algorithm::kRandom, 2, 0.1)),
      ConfigError);
}
