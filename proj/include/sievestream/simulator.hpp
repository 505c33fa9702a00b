#ifndef SIEVESTREAM_SIMULATOR_HPP
#define SIEVESTREAM_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sievestream/sample.hpp"
#include "sievestream/selectors.hpp"

namespace sievestream {

/**
 * Parametric class-cluster world. Class centroids are Gaussian draws of
 * scale centroid_spread; points scatter around them with cluster_sigma.
 * Softmax vectors are sharpness-scaled softmaxes of negative squared
 * distances to the centroids, so entropy peaks near class boundaries.
 * Class index C (one past the real classes) is the non-object class; its
 * centroid sits far outside the class shell so non-object items come out
 * confident and uninformative.
 */
struct WorldSpec {
  int classes = 10;           // C; softmax vectors have C+1 entries
  int feature_dim = 16;
  double centroid_spread = 2.0;
  double cluster_sigma = 1.0;
  double softmax_sharpness = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PeculiaritySpec {
  int imbalance_factor = 10;        // rare classes appear 1/factor as often
  double imbalanced_fraction = 0.5; // leading fraction of classes made rare
  int replication = 4;              // r; each base point emits r+1 items
  double noise_sigma = 0.01;        // per-replica feature jitter
  int nonobject_count = 0;          // non-object items per round
  int round_size = 256;             // items per round
  int rounds = 1;                   // N

  void validate() const;
};

extern const char* const kNonObjectLabel;

// Deterministic synthetic stream for one round. Object base points are
// emitted as replication+1 consecutive items sharing a duplication group;
// non-object items are noisy replicas of the round's non-object archetype
// (they share one group) interleaved uniformly at random.
std::vector<LabeledSample> generate_round(const WorldSpec& world,
                                          const PeculiaritySpec& peculiarity,
                                          int round_index);

struct PaperScalePreset {
  WorldSpec world;
  PeculiaritySpec peculiarity;
  SelectorConfig selector;
};

// Stream parameters of the classification experiment: 2048 items per
// round, select up to 128, 1408 non-object fillers, x5 duplication, x10
// imbalance on half of 10 classes, 30 rounds.
PaperScalePreset paper_scale_preset();

struct EvaluationReport {
  int selected_count = 0;
  int unique_groups = 0;
  int nonobject_count = 0;
  std::map<std::string, int> per_class;  // label -> count
};

EvaluationReport evaluate_selection(std::span<const LabeledSample> chosen,
                                    const WorldSpec& world);

// Seed mixer used for all derived RNG streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace sievestream

#endif  // SIEVESTREAM_SIMULATOR_HPP
