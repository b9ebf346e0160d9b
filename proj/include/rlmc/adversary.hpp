#pragma once

#include <span>
#include <vector>

#include "rlmc/model.hpp"

// Lower-bound instances on which small coresets must fail, with exact
// evaluators that never materialize the full point set.
namespace rlmc::adversary {

/// n points on the real line, all labelled +1: count_a at +1 and
/// count_b = round(lambda n^(gamma/2)) at -1. R = 1, L2-squared regularizer.
struct TwoClusterInstance {
  Index n = 0;
  double kappa = 0.5;
  double gamma = 0.5;
  double lambda = 1.0;
  Index count_a = 0;
  Index count_b = 0;
  LossKind loss = LossKind::Logistic;

  static constexpr double R = 1.0;

  // Explicit n-point instance; only sensible for small n.
  RlmInstance<double> materialize() const;
};

TwoClusterInstance gen_two_cluster(Index n, double kappa, double gamma,
                                   LossKind loss = LossKind::Logistic);

/// The one-dimensional hypothesis n^(gamma/4).
Hypothesis<double> beta0(Index n, double gamma);

// Uniform sample size n^(1 - kappa - gamma), at least 1.
Index two_cluster_sample_count(Index n, double kappa, double gamma);

/// F(beta) from the two group multiplicities.
double two_cluster_objective(const TwoClusterInstance& inst, double beta);

/// Exact H(beta) for a coreset of c points, all at +1 when sample_in_a
/// (all at -1 otherwise), each weighted u.
double two_cluster_H(const TwoClusterInstance& inst, bool sample_in_a, Index c, double u,
                     double beta);

struct Containment {
  double bound;   // 1 - n^(-gamma/2)
  double exact;   // (count_a / n)^c for c i.i.d. draws
};

Containment two_cluster_containment(const TwoClusterInstance& inst, Index c);

/// n positively labelled points at angles 2 pi i / n on the unit circle,
/// evaluated with a bias term as the lifted instance (x, y, 1): R = sqrt 2
/// and the L2-squared regularizer contributes 2 lambda |beta|^2.
struct CircleInstance {
  Index n = 0;
  double kappa = 0.5;
  double lambda = 1.0;
  LossKind loss = LossKind::Logistic;

  static constexpr double R = 1.4142135623730951;

  double angle(Index i) const;
  Eigen::Vector2d point(Index i) const;

  // Lifted three-dimensional instance with explicit points (cos, sin, 1).
  RlmInstance<double> materialize_lifted() const;
};

CircleInstance gen_circle(Index n, double kappa, LossKind loss = LossKind::Logistic);

/// A run of `length` consecutive circle points centred in a window of
/// `window_length` points that contains no coreset point.
struct Chunk {
  Index n = 0;
  Index k = 0;
  Index window_start = 0;
  Index window_length = 0;
  Index start_index = 0;
  Index length = 0;
  Index guard = 0;           // n / (8k)
  double center_angle = 0.0;
  double half_angle = 0.0;   // angle from the centre to either adjacent point
  double theta = 0.0;        // pi / (4k)

  bool contains(Index i) const;
  bool in_window(Index i) const;
  std::vector<Index> indices() const;
  Index before() const;  // adjacent point preceding the chunk
  Index after() const;   // adjacent point following the chunk
};

/// First window of n/(2k) consecutive indices (circular scan from 0) that
/// avoids `coreset`; the chunk is its middle n/(4k) indices. Throws
/// NoChunkFound when n < 8k or no such window exists.
Chunk find_chunk(Index n, Index k, std::span<const Index> coreset);

/// sqrt(n^(1 - gamma) / (k lambda)).
double default_target_norm(Index n, double gamma, Index k, double lambda);

// c n^((1 - kappa)/5 - gamma), rounded, at least 1.
Index default_k(Index n, double kappa, double gamma, double c = 1.0);

/// Direction (-cos m, -sin m, cos phi) scaled to target_norm, for chunk centre
/// m and half angle phi: zero margin at both adjacent points, negative on the
/// chunk, positive everywhere else.
Hypothesis<double> chunk_hypothesis(const Chunk& chunk, double target_norm);

/// |cos(theta_i) - cos(theta)|: distance from a unit-circle point at angle
/// theta_i (from the chunk centre) to the chord at angle theta.
double point_line_distance(double theta_i, double theta);

// k indices floor(j n / k) with weights n/k.
WeightedCoreset<double> evenly_spaced_coreset(Index n, Index k);

struct CircleEvaluation {
  double loss_all = 0.0;       // sum of losses over all n points
  double loss_coreset = 0.0;   // sum over C of u_i loss_i
  double weight_sum = 0.0;
  double regularizer = 0.0;    // lambda r(R beta) = 2 lambda |beta|^2
  double full = 0.0;
  double coreset = 0.0;
  double H = 0.0;
};

// (beta_x, beta_y) . x_i + beta_z.
double circle_margin(const CircleInstance& inst, Index i, const Hypothesis<double>& h);

CircleEvaluation circle_evaluate(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                                 const Hypothesis<double>& h, Exec exec = {});

double circle_H(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                const Hypothesis<double>& h, Exec exec = {});

struct LossRatios {
  double r1;  // lambda |beta|^2 / sum_X loss_i
  double r2;  // sum_C u_i loss_i / sum_X loss_i
};

LossRatios loss_ratios(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                         const Hypothesis<double>& h, Exec exec = {});

}  // namespace rlmc::adversary
