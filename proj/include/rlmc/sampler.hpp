#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlmc/model.hpp"
#include "rlmc/random.hpp"

namespace rlmc {

enum class SampleMode { IidWithReplacement, Reservoir };

const char* to_string(SampleMode mode) noexcept;
SampleMode parse_sample_mode(const std::string& name);

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::uint64_t q = 1;
  SampleMode mode = SampleMode::IidWithReplacement;

  void validate() const {
    if (q < 1) throw Error(ErrorKind::InvalidParameter, "sample size q must be at least 1");
  }
};

/// q copies of n/q. The last entry absorbs the rounding residual so that the
/// pairwise sum equals n exactly; it differs from n/q by a few ulps of n.
template <typename Scalar>
std::vector<Scalar> uniform_weights(Index n, std::uint64_t q) {
  const auto nn = static_cast<Scalar>(n);
  std::vector<Scalar> w(static_cast<std::size_t>(q), nn / static_cast<Scalar>(q));
  for (int pass = 0; pass < 8 && !w.empty(); ++pass) {
    const Scalar s = pairwise_sum(w);
    if (s == nn) break;
    w.back() += nn - s;
  }
  return w;
}

/// q i.i.d. draws with P(i) = s'_i / S', each weighted S' / (s'_i q).
template <typename Scalar>
WeightedCoreset<Scalar> sensitivity_sample(std::span<const Scalar> s_prime, std::uint64_t q,
                                           std::uint64_t seed) {
  if (s_prime.empty()) throw Error(ErrorKind::EmptyDataset, "no sensitivities given");
  if (q < 1) throw Error(ErrorKind::InvalidParameter, "sample size q must be at least 1");
  std::vector<Scalar> cumulative(s_prime.size());
  Scalar running(0);
  for (std::size_t i = 0; i < s_prime.size(); ++i) {
    if (!(s_prime[i] > Scalar(0)) || !std::isfinite(static_cast<double>(s_prime[i])))
      throw Error(ErrorKind::InvalidWeights,
                  "sensitivity bound of point " + std::to_string(i) + " is not positive");
    running += s_prime[i];
    cumulative[i] = running;
  }
  const Scalar total = pairwise_sum(s_prime);

  Rng rng(seed);
  WeightedCoreset<Scalar> cs;
  cs.indices.reserve(static_cast<std::size_t>(q));
  cs.weights.reserve(static_cast<std::size_t>(q));
  const auto qq = static_cast<Scalar>(q);
  for (std::uint64_t t = 0; t < q; ++t) {
    const Scalar target = static_cast<Scalar>(rng.uniform()) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const auto i = static_cast<std::size_t>(it - cumulative.begin());
    cs.indices.push_back(static_cast<Index>(i));
    cs.weights.push_back(total / (s_prime[i] * qq));
  }
  return cs;
}

/// Uniform sample with replacement, u = n/q; the identity coreset when q >= n.
template <typename Scalar>
WeightedCoreset<Scalar> uniform_sample(Index n, std::uint64_t q, std::uint64_t seed) {
  if (n <= 0) throw Error(ErrorKind::EmptyDataset, "cannot sample an empty dataset");
  if (q < 1) throw Error(ErrorKind::InvalidParameter, "sample size q must be at least 1");
  if (q >= static_cast<std::uint64_t>(n)) return WeightedCoreset<Scalar>::identity(n);
  Rng rng(seed);
  WeightedCoreset<Scalar> cs;
  cs.indices.resize(static_cast<std::size_t>(q));
  for (auto& i : cs.indices) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  cs.weights = uniform_weights<Scalar>(n, q);
  return cs;
}

template <typename Scalar>
WeightedCoreset<Scalar> uniform_sample(const RlmInstance<Scalar>& inst, std::uint64_t q,
                                       std::uint64_t seed) {
  return uniform_sample<Scalar>(inst.n(), q, seed);
}

template <typename Scalar>
struct StreamCoreset {
  PointCoreset<Scalar> coreset;
  Index n = 0;          // points seen
  Scalar R = Scalar(0); // max two-norm over the whole stream
};

/// Single-pass reservoir (Algorithm R) of q points without replacement plus a
/// running max of the point norms. Holds O(q d) memory. Single owner.
template <typename Scalar>
class StreamSampler {
 public:
  StreamSampler(std::uint64_t q, std::uint64_t seed) : q_(q), rng_(seed) {
    if (q_ < 1) throw Error(ErrorKind::InvalidParameter, "sample size q must be at least 1");
    reservoir_.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(q_, 1u << 20)));
  }

  template <typename Derived>
  void push(const Eigen::MatrixBase<Derived>& x, Scalar y) {
    if (count_ == 0) {
      dim_ = x.size();
    } else if (x.size() != dim_) {
      throw Error(ErrorKind::InvalidParameter, "stream point has inconsistent dimension");
    }
    ++count_;
    const Scalar norm = row_norm(x);
    if (norm > radius_) radius_ = norm;
    // Slot j is overwritten with probability q/count once the reservoir is full.
    if (count_ <= q_) {
      reservoir_.push_back({x.transpose(), y});
    } else if (const std::uint64_t j = rng_.below(count_); j < q_) {
      reservoir_[static_cast<std::size_t>(j)] = {x.transpose(), y};
    }
  }

  void push(const LabeledPoint<Scalar>& p) { push(p.x, p.y); }

  std::uint64_t count() const { return count_; }
  Scalar R() const { return radius_; }

  /// Assigns weights n/q (or 1 when the stream was no longer than q).
  StreamCoreset<Scalar> finish() const {
    if (count_ == 0) throw Error(ErrorKind::StreamTooShort, "stream was empty");
    StreamCoreset<Scalar> out;
    out.n = static_cast<Index>(count_);
    out.R = radius_;
    const auto m = static_cast<Index>(reservoir_.size());
    out.coreset.points.resize(m, dim_);
    out.coreset.labels.resize(m);
    for (Index j = 0; j < m; ++j) {
      out.coreset.points.row(j) = reservoir_[static_cast<std::size_t>(j)].x.transpose();
      out.coreset.labels(j) = reservoir_[static_cast<std::size_t>(j)].y;
    }
    if (count_ <= q_)
      out.coreset.weights.assign(static_cast<std::size_t>(m), Scalar(1));
    else
      out.coreset.weights = uniform_weights<Scalar>(out.n, q_);
    return out;
  }

 private:
  std::uint64_t q_;
  Rng rng_;
  std::uint64_t count_ = 0;
  Index dim_ = 0;
  Scalar radius_ = Scalar(0);
  std::vector<LabeledPoint<Scalar>> reservoir_;
};

template <typename Scalar, typename Range>
StreamCoreset<Scalar> stream_sample(const Range& stream, std::uint64_t q, std::uint64_t seed) {
  StreamSampler<Scalar> sampler(q, seed);
  for (const auto& p : stream) sampler.push(p);
  return sampler.finish();
}

// Streams the rows of an instance in index order.
template <typename Scalar>
StreamCoreset<Scalar> stream_sample(const RlmInstance<Scalar>& inst, std::uint64_t q,
                                    std::uint64_t seed) {
  StreamSampler<Scalar> sampler(q, seed);
  for (Index i = 0; i < inst.n(); ++i)
    sampler.push(inst.points().row(i), inst.labels()(i));
  return sampler.finish();
}

}  // namespace rlmc
