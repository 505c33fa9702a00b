#include "sievestream/kernel.hpp"

#include <cmath>
#include <memory>

#include "sievestream/errors.hpp"

namespace sievestream {

namespace {

const Eigen::VectorXd& require_vector(const Sample& s,
                                      const std::optional<Eigen::VectorXd>& field,
                                      const char* field_name) {
  if (!field) {
    throw InputError("sample '" + s.id + "' is missing required field '" +
                     field_name + "'");
  }
  return *field;
}

void check_finite(const Sample& s, const Eigen::VectorXd& v, const char* field_name) {
  if (!v.allFinite()) {
    throw ValidationError("sample '" + s.id + "' has non-finite entries in '" +
                          field_name + "'");
  }
}

void check_same_dim(const Sample& a, const Sample& b, const Eigen::VectorXd& va,
                    const Eigen::VectorXd& vb, const char* field_name) {
  if (va.size() != vb.size()) {
    throw InputError("dimension mismatch in '" + std::string(field_name) + "': " +
                     a.id + " has " + std::to_string(va.size()) + ", " + b.id +
                     " has " + std::to_string(vb.size()));
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("kernel beta must be a positive finite real");
  }
}

KernelKind kernel_kind_from_name(std::string_view name) {
  if (name == "polynomial-features") return KernelKind::kPolynomialFeatures;
  if (name == "rbf-l1-raw") return KernelKind::kRbfL1Raw;
  if (name == "rbf-l2-features") return KernelKind::kRbfL2Features;
  if (name == "rbf-jsd-softmax") return KernelKind::kRbfJsdSoftmax;
  throw ConfigError("unknown kernel kind '" + std::string(name) + "'");
}

std::string_view kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kPolynomialFeatures: return "polynomial-features";
    case KernelKind::kRbfL1Raw: return "rbf-l1-raw";
    case KernelKind::kRbfL2Features: return "rbf-l2-features";
    case KernelKind::kRbfJsdSoftmax: return "rbf-jsd-softmax";
  }
  throw ConfigError("unknown kernel kind enum value");
}

double jensen_shannon_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double jsd = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) jsd += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) jsd += 0.5 * q[i] * std::log(q[i] / m);
  }
  // Roundoff can leave a tiny negative residue for near-identical inputs.
  return jsd < 0.0 ? 0.0 : jsd;
}

double kernel(const Sample& a, const Sample& b, const KernelSpec& spec) {
  const Sample* lo = &a;
  const Sample* hi = &b;
  if (hi->id < lo->id) std::swap(lo, hi);

  switch (spec.kind) {
    case KernelKind::kPolynomialFeatures: {
      const auto& fa = require_vector(*lo, lo->features, "features");
      const auto& fb = require_vector(*hi, hi->features, "features");
      check_same_dim(*lo, *hi, fa, fb, "features");
      check_finite(*lo, fa, "features");
      check_finite(*hi, fb, "features");
      return fa.dot(fb);
    }
    case KernelKind::kRbfL1Raw: {
      // The raw representation is carried in the features vector.
      const auto& fa = require_vector(*lo, lo->features, "features");
      const auto& fb = require_vector(*hi, hi->features, "features");
      check_same_dim(*lo, *hi, fa, fb, "features");
      check_finite(*lo, fa, "features");
      check_finite(*hi, fb, "features");
      return std::exp(-spec.beta * (fa - fb).lpNorm<1>());
    }
    case KernelKind::kRbfL2Features: {
      const auto& fa = require_vector(*lo, lo->features, "features");
      const auto& fb = require_vector(*hi, hi->features, "features");
      check_same_dim(*lo, *hi, fa, fb, "features");
      check_finite(*lo, fa, "features");
      check_finite(*hi, fb, "features");
      return std::exp(-spec.beta * (fa - fb).norm());
    }
    case KernelKind::kRbfJsdSoftmax: {
      const auto& pa = require_vector(*lo, lo->softmax, "softmax");
      const auto& pb = require_vector(*hi, hi->softmax, "softmax");
      check_same_dim(*lo, *hi, pa, pb, "softmax");
      check_finite(*lo, pa, "softmax");
      check_finite(*hi, pb, "softmax");
      return std::exp(-spec.beta * jensen_shannon_divergence(pa, pb));
    }
  }
  throw ConfigError("unknown kernel kind enum value");
}

std::uint32_t KernelCache::intern(const std::string& id) {
  auto [it, inserted] = ids_.emplace(id, static_cast<std::uint32_t>(ids_.size()));
  return it->second;
}

double KernelCache::get_or_compute(const Sample& a, const Sample& b,
                                   const KernelSpec& spec) {
  std::uint32_t ia = intern(a.id);
  std::uint32_t ib = intern(b.id);
  if (ia > ib) std::swap(ia, ib);
  const std::uint64_t key = (static_cast<std::uint64_t>(ia) << 32) | ib;

  if (auto it = values_.find(key); it != values_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  const double value = kernel(a, b, spec);
  if (values_.size() >= max_entries_) values_.clear();
  values_.emplace(key, value);
  return value;
}

void KernelCache::clear() {
  values_.clear();
  ids_.clear();
}

}  // namespace sievestream
