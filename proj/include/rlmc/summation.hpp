#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace rlmc {

// Terms are reduced in fixed blocks of kSumBlock; block partials are then
// combined pairwise. The result depends only on the input, never on the
// number of worker threads.
inline constexpr std::size_t kSumBlock = 4096;

struct Exec {
  unsigned threads = 1;
};

template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> v) {
  if (v.size() <= 8) {
    Scalar s(0);
    for (const Scalar& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

template <typename Scalar>
Scalar pairwise_sum(const std::vector<Scalar>& v) {
  return pairwise_sum(std::span<const Scalar>(v));
}

// Sums term(i) for i in [0, count). `term` must be safe to call concurrently.
template <typename Scalar, typename TermFn>
Scalar deterministic_sum(std::size_t count, TermFn&& term, Exec exec = {}) {
  if (count == 0) return Scalar(0);
  const std::size_t blocks = (count + kSumBlock - 1) / kSumBlock;
  std::vector<Scalar> partial(blocks);

  auto run_blocks = [&](std::size_t first, std::size_t last) {
    std::vector<Scalar> buf(kSumBlock);
    for (std::size_t b = first; b < last; ++b) {
      const std::size_t lo = b * kSumBlock;
      const std::size_t hi = std::min(count, lo + kSumBlock);
      for (std::size_t i = lo; i < hi; ++i) buf[i - lo] = term(i);
      partial[b] = pairwise_sum(std::span<const Scalar>(buf.data(), hi - lo));
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, exec.threads), blocks);
  if (workers <= 1) {
    run_blocks(0, blocks);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t per = (blocks + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * per;
      const std::size_t last = std::min(blocks, first + per);
      if (first >= last) break;
      pool.emplace_back(run_blocks, first, last);
    }
    for (auto& t : pool) t.join();
  }
  return pairwise_sum(partial);
}

}  // namespace rlmc
