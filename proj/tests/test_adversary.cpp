#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rlmc/adversary.hpp"
#include "rlmc/random.hpp"
#include "rlmc/sampler.hpp"

using namespace rlmc;
using namespace rlmc::adversary;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

// H(beta0) for C inside A with u = n/c, kappa = 0.5, gamma = 0.4; computed
// in extended precision from the group multiplicities.
struct TwoClusterRef {
  Index n;
  Index count_b;
  double logistic;
  double hinge;
};

const TwoClusterRef kTwoCluster[] = {
    {10000, 631, 0.52905868807281942, 0.77837487775093972},
    {100000, 3162, 0.57774401643066586, 0.80627334173820908},
    {1000000, 15849, 0.64754699010865924, 0.83280648149326808},
    {10000000, 79433, 0.73194486232861711, 0.85738501121573119},
};

// Circle, kappa = 0.1, gamma = 0.2, k = 4, evenly spaced C, default norm.
struct CircleRef {
  Index n;
  double H;
  double r1;
  double r2;
  Index start;
  Index length;
  double norm;
  double hinge_H;
};

const CircleRef kCircle[] = {
    {100000, 0.16165253393072662, 0.27109672293912235, 0.75070052166242274, 3126, 6250,
     28.117066259517461, 0.68683046983722462},
    {1000000, 0.57275202358602317, 0.18347180517472872, 0.21708028104436394, 31251, 62500,
     62.946270589708377, 0.78342879535764398},
    {10000000, 0.83882749722137717, 0.091602123678893255, 0.0074957424871646468, 312501, 625000,
     140.91914656322274, 0.88320193911675848},
};

// First free window by direct circular scan.
Index brute_window_start(Index n, Index k, const std::vector<Index>& C) {
  const Index W = n / (2 * k);
  std::vector<bool> in_c(static_cast<std::size_t>(n), false);
  for (Index i : C) in_c[static_cast<std::size_t>(i)] = true;
  for (Index s = 0; s < n; ++s) {
    bool free = true;
    for (Index j = 0; j < W && free; ++j) free = !in_c[static_cast<std::size_t>((s + j) % n)];
    if (free) return s;
  }
  return -1;
}

Index circ_dist(Index a, Index b, Index n) {
  const Index d = ((a - b) % n + n) % n;
  return std::min(d, n - d);
}

}  // namespace

TEST_CASE("two-cluster generator") {
  const auto inst = gen_two_cluster(1000000, 0.5, 0.4);
  CHECK(inst.lambda == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(inst.count_b == 15849);
  CHECK(inst.count_a == 984151);
  CHECK(inst.count_a + inst.count_b == inst.n);
  CHECK(gen_two_cluster(10000, 0.5, 0.99).count_b == 9550);
  CHECK(kind_of([] { gen_two_cluster(100, 0.9, 0.9); }) == ErrorKind::DegenerateInstance);
  CHECK(kind_of([] { gen_two_cluster(1000, 0.0, 0.5); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { gen_two_cluster(1000, 0.5, 1.0); }) == ErrorKind::InvalidParameter);
  const auto m = gen_two_cluster(100, 0.5, 0.4).materialize();
  for (Index i = 0; i < m.n(); ++i) CHECK(m.labels()(i) == 1.0);
  CHECK(m.R() == 1.0);
}

TEST_CASE("beta0") {
  CHECK(beta0(1000000, 0.4).beta(0) == doctest::Approx(3.9810717055349727).epsilon(1e-14));
  CHECK(beta0(1000000, 1e-9).beta(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(kind_of([] { beta0(16, 1.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("two-cluster H at beta = 0 vanishes for u = n/c") {
  for (LossKind l : {LossKind::Logistic, LossKind::Hinge}) {
    const auto inst = gen_two_cluster(1000000, 0.5, 0.4, l);
    const Index c = two_cluster_sample_count(inst.n, 0.5, 0.4);
    CHECK(two_cluster_H(inst, true, c, 1e6 / static_cast<double>(c), 0.0) <= 4 * kEps);
    CHECK(two_cluster_H(inst, false, c, 1e6 / static_cast<double>(c), 0.0) <= 4 * kEps);
  }
}

TEST_CASE("two-cluster H(beta0) matches the reference and grows with n") {
  double prev_l = 0.0, prev_h = 0.0;
  for (const auto& ref : kTwoCluster) {
    const auto il = gen_two_cluster(ref.n, 0.5, 0.4, LossKind::Logistic);
    const auto ih = gen_two_cluster(ref.n, 0.5, 0.4, LossKind::Hinge);
    CHECK(il.count_b == ref.count_b);
    const Index c = two_cluster_sample_count(ref.n, 0.5, 0.4);
    const double u = static_cast<double>(ref.n) / static_cast<double>(c);
    const double b = beta0(ref.n, 0.4).beta(0);
    const double hl = two_cluster_H(il, true, c, u, b);
    const double hh = two_cluster_H(ih, true, c, u, b);
    CHECK(hl == doctest::Approx(ref.logistic).epsilon(1e-12));
    CHECK(hh == doctest::Approx(ref.hinge).epsilon(1e-12));
    CHECK(hl >= prev_l);
    CHECK(hh >= prev_h);
    prev_l = hl;
    prev_h = hh;
  }
  CHECK(prev_l > 0.5);
}

TEST_CASE("two-cluster grouped evaluation equals the materialized instance") {
  Rng rng(3);
  for (Index n : {200, 1000, 10000}) {
    for (LossKind l : {LossKind::Logistic, LossKind::Hinge}) {
      const auto g = gen_two_cluster(n, 0.5, 0.4, l);
      const auto m = g.materialize();
      for (bool in_a : {true, false}) {
        const Index c = 1 + static_cast<Index>(rng.below(9));
        const double u = static_cast<double>(n) / static_cast<double>(c) * (0.5 + rng.uniform());
        WeightedCoreset<double> cs;
        const Index idx = in_a ? 0 : n - 1;
        cs.indices.assign(static_cast<std::size_t>(c), idx);
        cs.weights.assign(static_cast<std::size_t>(c), u);
        for (double b : {0.3, 1.0, beta0(n, 0.4).beta(0), -2.0}) {
          Vector<double> v(1);
          v << b;
          const double direct = approximation_error(m, cs, Hypothesis<double>(v));
          CHECK(two_cluster_H(g, in_a, c, u, b) == doctest::Approx(direct).epsilon(1e-10));
          CHECK(two_cluster_objective(g, b) ==
                doctest::Approx(full_objective(m, Hypothesis<double>(v))).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("two-cluster containment probability") {
  const auto inst = gen_two_cluster(1000000, 0.5, 0.4);
  const Index c = two_cluster_sample_count(inst.n, 0.5, 0.4);
  CHECK(c == 4);
  const auto con = two_cluster_containment(inst, c);
  CHECK(con.bound == doctest::Approx(1.0 - std::pow(1e6, -0.2)).epsilon(1e-14));
  CHECK(con.exact >= con.bound);
  CHECK(con.exact == doctest::Approx(std::pow(984151.0 / 1e6, 4)).epsilon(1e-14));
}

TEST_CASE("circle generator") {
  CHECK(kind_of([] { gen_circle(4, 0.5); }) == ErrorKind::DegenerateInstance);
  const auto c = gen_circle(8, 0.5);
  CHECK(c.point(0).x() == 1.0);
  CHECK(c.point(0).y() == 0.0);
  const auto lifted = c.materialize_lifted();
  for (Index i = 0; i < 8; ++i) {
    CHECK(c.point(i).norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lifted.points().row(i).norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  }
  CHECK(lifted.R() == doctest::Approx(CircleInstance::R).epsilon(1e-15));
}

TEST_CASE("find_chunk examples") {
  const std::vector<Index> C{0, 16, 32, 48};
  const Chunk ch = find_chunk(64, 4, C);
  CHECK(ch.window_start == 1);
  CHECK(ch.window_length == 8);
  CHECK(ch.indices() == std::vector<Index>{3, 4, 5, 6});
  CHECK(ch.before() == 2);
  CHECK(ch.after() == 7);
  CHECK(ch.guard == 2);
  CHECK(ch.theta == doctest::Approx(M_PI / 16));

  const std::vector<Index> rotated{1, 17, 33, 49};
  CHECK(find_chunk(64, 4, rotated).indices() == std::vector<Index>{4, 5, 6, 7});

  CHECK(kind_of([] { find_chunk(31, 4, {}); }) == ErrorKind::NoChunkFound);
  CHECK(kind_of([] {
          std::vector<Index> full(64);
          for (Index i = 0; i < 64; ++i) full[static_cast<std::size_t>(i)] = i;
          find_chunk(64, 4, full);
        }) == ErrorKind::NoChunkFound);
  CHECK(kind_of([] { find_chunk(64, 4, std::vector<Index>{64}); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("find_chunk agrees with a brute-force scan") {
  Rng rng(13);
  for (int t = 0; t < 500; ++t) {
    const Index k = 1 + static_cast<Index>(rng.below(6));
    const Index n = 8 * k + static_cast<Index>(rng.below(200));
    std::vector<Index> C;
    for (Index j = 0; j < k; ++j) C.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    const Chunk ch = find_chunk(n, k, C);
    CHECK(ch.window_start == brute_window_start(n, k, C));
    CHECK(ch.length == n / (4 * k));
    for (Index i : C) {
      CHECK_FALSE(ch.contains(i));
      CHECK_FALSE(ch.in_window(i));
      // No coreset point within the guard of either end of the chunk.
      CHECK(std::min(circ_dist(i, ch.start_index, n), circ_dist(i, ch.after() - 1, n)) > ch.guard);
    }
  }
}

TEST_CASE("chunk hypothesis geometry example") {
  Chunk ch;
  ch.n = 8;
  ch.center_angle = 0.0;
  ch.half_angle = M_PI / 4;
  const auto h = chunk_hypothesis(ch, 1.0);
  CHECK(h.beta(0) == doctest::Approx(-0.81649658092772603).epsilon(1e-12));
  CHECK(std::abs(h.beta(1)) <= 1e-15);
  CHECK(*h.bias == doctest::Approx(0.57735026918962573).epsilon(1e-12));
  CHECK(h.norm() == doctest::Approx(1.0).epsilon(1e-15));
  const double a = M_PI / 4;
  CHECK(std::abs(h.beta(0) * std::cos(a) + h.beta(1) * std::sin(a) + *h.bias) <= 1e-12);
  CHECK(h.beta(0) + *h.bias < 0.0);
  CHECK_THROWS_AS(chunk_hypothesis(ch, 0.0), Error);
}

TEST_CASE("chunk hypothesis separates the chunk") {
  Rng rng(19);
  for (int t = 0; t < 60; ++t) {
    const Index k = 1 + static_cast<Index>(rng.below(5));
    const Index n = 8 * k + static_cast<Index>(rng.below(2000));
    std::vector<Index> C;
    for (Index j = 0; j < k; ++j) C.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    const CircleInstance inst = gen_circle(n, 0.5);
    const Chunk ch = find_chunk(n, k, C);
    const auto h = chunk_hypothesis(ch, 1.0 + 50.0 * rng.uniform());
    const double nb = h.norm();
    CHECK(std::abs(circle_margin(inst, ch.before(), h)) <= 1e-9 * nb);
    CHECK(std::abs(circle_margin(inst, ch.after(), h)) <= 1e-9 * nb);
    for (Index i = 0; i < n; ++i) {
      if (ch.contains(i)) CHECK(circle_margin(inst, i, h) < 0.0);
      else if (!ch.in_window(i)) CHECK(circle_margin(inst, i, h) > 0.0);
    }
  }
}

TEST_CASE("point-line distance") {
  CHECK(point_line_distance(0.0, M_PI / 4) == doctest::Approx(0.29289321881345248).epsilon(1e-14));
  CHECK(point_line_distance(0.3, 0.3) == 0.0);
  CHECK(point_line_distance(0.7, 0.2) == point_line_distance(-0.7, 0.2));
}

TEST_CASE("margin sandwich and chord distance") {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    const Index k = 1 + static_cast<Index>(rng.below(4));
    const Index n = 8 * k + static_cast<Index>(rng.below(3000));
    std::vector<Index> C;
    for (Index j = 0; j < k; ++j) C.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    const CircleInstance inst = gen_circle(n, 0.5);
    const Chunk ch = find_chunk(n, k, C);
    const auto h = chunk_hypothesis(ch, 3.0);
    const double nb = h.norm();
    // Chord through the two adjacent points, in plane coordinates.
    const Eigen::Vector2d p1 = inst.point(ch.before()), p2 = inst.point(ch.after());
    for (Index i = 0; i < n; ++i) {
      const double ti = std::remainder(inst.angle(i) - ch.center_angle, 2 * M_PI);
      const double di = point_line_distance(ti, ch.half_angle);
      const double m = std::abs(circle_margin(inst, i, h));
      CHECK(m >= di * nb / 2 - 1e-12 * nb);
      CHECK(m <= di * nb + 1e-12 * nb);
      const Eigen::Vector2d p = inst.point(i), e = p2 - p1;
      const double geo = std::abs(e.x() * (p.y() - p1.y()) - e.y() * (p.x() - p1.x())) / e.norm();
      CHECK(di == doctest::Approx(geo).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("Taylor lower bound on cos(pi/4k) - cos(pi/2k)") {
  for (int k = 2; k <= 10000; ++k) {
    const double a = M_PI / (4.0 * k), b = M_PI / (2.0 * k);
    const double diff = 2.0 * std::sin((a + b) / 2) * std::sin((b - a) / 2);
    const double kk = static_cast<double>(k);
    CHECK(diff >= 3 * M_PI * M_PI / (32 * kk * kk) - 1 / (kk * kk * kk * kk));
  }
}

TEST_CASE("evenly spaced coreset") {
  const auto cs = evenly_spaced_coreset(100, 3);
  CHECK(cs.indices == std::vector<Index>{0, 33, 66});
  CHECK(cs.weight_sum() == 100.0);
  CHECK_THROWS_AS(evenly_spaced_coreset(5, 6), Error);
}

TEST_CASE("default parameters") {
  CHECK(default_target_norm(10000000, 0.2, 4, std::pow(1e7, 0.1)) ==
        doctest::Approx(140.91914656322274).epsilon(1e-14));
  CHECK(default_k(10000000, 0.1, 0.2, 1.0) == 1);
  CHECK(default_k(100000000, 0.1, 0.0, 2.0) == static_cast<Index>(std::round(2.0 * std::pow(1e8, 0.18))));
}

TEST_CASE("circle H is exact against the lifted three-dimensional instance") {
  for (LossKind l : {LossKind::Logistic, LossKind::Hinge}) {
    const CircleInstance inst = gen_circle(32, 0.3, l);
    const auto lifted = inst.materialize_lifted();
    const auto cs = evenly_spaced_coreset(32, 4);
    const Chunk ch = find_chunk(32, 4, cs.indices);
    for (double norm : {0.5, 2.0, 7.0}) {
      const auto h = chunk_hypothesis(ch, norm);
      Vector<double> b3(3);
      b3 << h.beta(0), h.beta(1), *h.bias;
      const double direct = approximation_error(lifted, cs, Hypothesis<double>(b3));
      CHECK(circle_H(inst, cs, h) == doctest::Approx(direct).epsilon(1e-10));
    }
    const auto id = WeightedCoreset<double>::identity(32);
    CHECK(circle_H(inst, id, chunk_hypothesis(ch, 3.0)) <= 1e-14);
  }
}

TEST_CASE("circle witness values and ratio trends") {
  double prev_r1 = 1e300, prev_r2 = 1e300;
  for (const auto& ref : kCircle) {
    const CircleInstance inst = gen_circle(ref.n, 0.1);
    const auto cs = evenly_spaced_coreset(ref.n, 4);
    const Chunk ch = find_chunk(ref.n, 4, cs.indices);
    CHECK(ch.start_index == ref.start);
    CHECK(ch.length == ref.length);
    const double norm = default_target_norm(ref.n, 0.2, 4, inst.lambda);
    CHECK(norm == doctest::Approx(ref.norm).epsilon(1e-14));
    const auto h = chunk_hypothesis(ch, norm);
    const auto ev = circle_evaluate(inst, cs, h);
    CHECK(ev.H == doctest::Approx(ref.H).epsilon(1e-11));
    const auto r = loss_ratios(inst, cs, h);
    CHECK(r.r1 == doctest::Approx(ref.r1).epsilon(1e-11));
    CHECK(r.r2 == doctest::Approx(ref.r2).epsilon(1e-11));
    CHECK(r.r1 <= 4.0 / (std::pow(static_cast<double>(ref.n), 0.2) * std::log(2.0)));
    CHECK(r.r1 < prev_r1);
    CHECK(r.r2 < prev_r2);
    prev_r1 = r.r1;
    prev_r2 = r.r2;

    const CircleInstance hinge = gen_circle(ref.n, 0.1, LossKind::Hinge);
    const auto rh = loss_ratios(hinge, cs, h);
    CHECK(circle_H(hinge, cs, h) == doctest::Approx(ref.hinge_H).epsilon(1e-11));
    CHECK(rh.r2 == 0.0);
    CHECK(rh.r1 <= 4.0 / std::pow(static_cast<double>(ref.n), 0.2));
  }
  CHECK(kCircle[2].H >= 0.5);
}

TEST_CASE("circle evaluation is thread-count invariant") {
  const CircleInstance inst = gen_circle(200000, 0.1);
  const auto cs = evenly_spaced_coreset(inst.n, 4);
  const auto h = chunk_hypothesis(find_chunk(inst.n, 4, cs.indices), 12.0);
  const double one = circle_H(inst, cs, h, Exec{1});
  CHECK(circle_H(inst, cs, h, Exec{3}) == one);
  CHECK(circle_H(inst, cs, h, Exec{8}) == one);
}
