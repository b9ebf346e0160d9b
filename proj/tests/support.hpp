#pragma once

#include <initializer_list>
#include <vector>

#include "rlmc/model.hpp"
#include "rlmc/random.hpp"

namespace rlmc::test {

inline RlmInstance<double> instance(std::initializer_list<std::initializer_list<double>> rows,
                                    std::initializer_list<double> labels, RlmParams<double> p = {}) {
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(rows.begin()->size());
  PointMatrix<double> x(n, d);
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) x(i, j++) = v;
    ++i;
  }
  Vector<double> y(n);
  i = 0;
  for (double v : labels) y(i++) = v;
  return RlmInstance<double>(std::move(x), std::move(y), p);
}

// Gaussian points with random +-1 labels.
inline RlmInstance<double> random_instance(Index n, Index d, RlmParams<double> p, Rng& rng,
                                           double scale = 1.0) {
  PointMatrix<double> x(n, d);
  Vector<double> y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = scale * rng.normal();
    y(i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
  }
  return RlmInstance<double>(std::move(x), std::move(y), p);
}

inline Vector<double> random_vector(Index d, Rng& rng, double norm) {
  Vector<double> v(d);
  for (Index j = 0; j < d; ++j) v(j) = rng.normal();
  return v * (norm / v.norm());
}

}  // namespace rlmc::test
