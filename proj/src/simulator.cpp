#include "sievestream/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sievestream/errors.hpp"

namespace sievestream {

const char* const kNonObjectLabel = "nonobject";

void WorldSpec::validate() const {
  if (classes < 1) throw ConfigError("world needs at least one class");
  if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
  if (!(centroid_spread > 0.0)) throw ConfigError("centroid_spread must be positive");
  if (!(cluster_sigma > 0.0)) throw ConfigError("cluster_sigma must be positive");
  if (!(softmax_sharpness > 0.0)) throw ConfigError("softmax_sharpness must be positive");
}

void PeculiaritySpec::validate() const {
  if (imbalance_factor < 1) throw ConfigError("imbalance_factor must be >= 1");
  if (imbalanced_fraction < 0.0 || imbalanced_fraction > 1.0) {
    throw ConfigError("imbalanced_fraction must lie in [0, 1]");
  }
  if (replication < 0) throw ConfigError("replication must be non-negative");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
  if (nonobject_count < 0) throw ConfigError("nonobject_count must be non-negative");
  if (round_size < 1) throw ConfigError("round_size must be positive");
  if (rounds < 1) throw ConfigError("rounds must be positive");
  if (nonobject_count > round_size) {
    throw ConfigError("round_size must be at least nonobject_count");
  }
  const int object_slots = round_size - nonobject_count;
  if (object_slots % (replication + 1) != 0) {
    throw ConfigError("round_size - nonobject_count must be divisible by replication + 1");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the xored inputs.
  std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ULL) ^ 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Centroids for the C classes plus the non-object archetype at index C.
std::vector<Eigen::VectorXd> world_centroids(const WorldSpec& world) {
  std::mt19937_64 rng(mix_seed(world.seed, 0xC3A5C85C97CB3127ULL));
  std::normal_distribution<double> gauss(0.0, world.centroid_spread);
  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(world.classes + 1);
  for (int c = 0; c < world.classes; ++c) {
    Eigen::VectorXd v(world.feature_dim);
    for (int i = 0; i < world.feature_dim; ++i) v[i] = gauss(rng);
    centroids.push_back(std::move(v));
  }
  // Non-object archetype: well outside the class shell along the first
  // axis, so its softmax is confidently on the extra class.
  Eigen::VectorXd nonobject = Eigen::VectorXd::Zero(world.feature_dim);
  nonobject[0] = 3.0 * world.centroid_spread * std::sqrt(world.feature_dim);
  centroids.push_back(std::move(nonobject));

  for (std::size_t a = 0; a + 1 < centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      if ((centroids[a] - centroids[b]).norm() < 1e-9) {
        throw NumericError("degenerate world: coincident class centroids");
      }
    }
  }
  return centroids;
}

Eigen::VectorXd softmax_from_features(const Eigen::VectorXd& features,
                                      const std::vector<Eigen::VectorXd>& centroids,
                                      double sharpness) {
  Eigen::VectorXd logits(centroids.size());
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    logits[c] = -sharpness * (features - centroids[c]).squaredNorm();
  }
  const double peak = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - peak).exp();
  p /= p.sum();
  return p;
}

}  // namespace

std::vector<LabeledSample> generate_round(const WorldSpec& world,
                                          const PeculiaritySpec& peculiarity,
                                          int round_index) {
  world.validate();
  peculiarity.validate();
  if (round_index < 0 || round_index >= peculiarity.rounds) {
    throw ConfigError("round index " + std::to_string(round_index) +
                      " outside [0, " + std::to_string(peculiarity.rounds) + ")");
  }

  const auto centroids = world_centroids(world);
  std::mt19937_64 rng(mix_seed(world.seed, 0x1000 + static_cast<std::uint64_t>(round_index)));
  std::normal_distribution<double> unit_gauss(0.0, 1.0);

  const int replicas = peculiarity.replication + 1;
  const int base_points = (peculiarity.round_size - peculiarity.nonobject_count) / replicas;
  const std::string round_tag = "r" + std::to_string(round_index);

  // Rare classes are the leading floor(C * fraction) class indices.
  const int rare = static_cast<int>(std::floor(world.classes * peculiarity.imbalanced_fraction));
  std::vector<double> weights(world.classes, 1.0);
  for (int c = 0; c < rare; ++c) weights[c] = 1.0 / peculiarity.imbalance_factor;
  std::discrete_distribution<int> class_pick(weights.begin(), weights.end());

  struct Unit {
    std::vector<LabeledSample> items;  // without seq, assigned after shuffle
  };
  std::vector<Unit> units;
  units.reserve(base_points + peculiarity.nonobject_count);

  auto jitter = [&](const Eigen::VectorXd& base, double sigma) {
    Eigen::VectorXd v = base;
    if (sigma > 0.0) {
      for (int i = 0; i < world.feature_dim; ++i) v[i] += sigma * unit_gauss(rng);
    }
    return v;
  };

  for (int b = 0; b < base_points; ++b) {
    const int cls = class_pick(rng);
    const Eigen::VectorXd base = jitter(centroids[cls], world.cluster_sigma);
    Unit unit;
    for (int rep = 0; rep < replicas; ++rep) {
      LabeledSample item;
      item.sample.id = round_tag + "-b" + std::to_string(b) + "-" + std::to_string(rep);
      item.sample.group = round_tag + "-b" + std::to_string(b);
      item.sample.features = jitter(base, peculiarity.noise_sigma);
      item.sample.softmax = softmax_from_features(*item.sample.features, centroids,
                                                  world.softmax_sharpness);
      item.label = "class" + std::to_string(cls);
      unit.items.push_back(std::move(item));
    }
    units.push_back(std::move(unit));
  }

  const Eigen::VectorXd& archetype = centroids.back();
  for (int i = 0; i < peculiarity.nonobject_count; ++i) {
    LabeledSample item;
    item.sample.id = round_tag + "-n" + std::to_string(i);
    item.sample.group = round_tag + "-" + kNonObjectLabel;
    item.sample.features = jitter(archetype, peculiarity.noise_sigma);
    item.sample.softmax = softmax_from_features(*item.sample.features, centroids,
                                                world.softmax_sharpness);
    item.label = kNonObjectLabel;
    Unit unit;
    unit.items.push_back(std::move(item));
    units.push_back(std::move(unit));
  }

  std::shuffle(units.begin(), units.end(), rng);

  std::vector<LabeledSample> stream;
  stream.reserve(peculiarity.round_size);
  std::uint64_t seq = static_cast<std::uint64_t>(round_index) *
                      static_cast<std::uint64_t>(peculiarity.round_size);
  for (Unit& unit : units) {
    for (LabeledSample& item : unit.items) {
      item.sample.seq = seq++;
      stream.push_back(std::move(item));
    }
  }
  return stream;
}

PaperScalePreset paper_scale_preset() {
  PaperScalePreset preset;
  preset.world.classes = 10;
  preset.world.feature_dim = 16;
  preset.world.centroid_spread = 2.0;
  preset.world.cluster_sigma = 1.0;
  preset.world.softmax_sharpness = 0.5;
  preset.world.seed = 1;

  preset.peculiarity.imbalance_factor = 10;
  preset.peculiarity.imbalanced_fraction = 0.5;
  preset.peculiarity.replication = 4;
  preset.peculiarity.noise_sigma = 0.01;
  preset.peculiarity.nonobject_count = 1408;
  preset.peculiarity.round_size = 2048;
  preset.peculiarity.rounds = 30;

  preset.selector.algorithm = Algorithm::kSieveStreamingPP;
  preset.selector.k = 128;
  preset.selector.epsilon = 0.1;
  return preset;
}

EvaluationReport evaluate_selection(std::span<const LabeledSample> chosen,
                                    const WorldSpec& world) {
  (void)world;
  EvaluationReport report;
  report.selected_count = static_cast<int>(chosen.size());
  std::vector<std::string> groups;
  groups.reserve(chosen.size());
  for (const LabeledSample& item : chosen) {
    groups.push_back(item.sample.group.empty() ? item.sample.id : item.sample.group);
    const std::string label = item.label.value_or("unlabeled");
    ++report.per_class[label];
    if (label == kNonObjectLabel) ++report.nonobject_count;
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  report.unique_groups = static_cast<int>(groups.size());
  return report;
}

}  // namespace sievestream
