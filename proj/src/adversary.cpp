#include "rlmc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlmc/sampler.hpp"

namespace rlmc::adversary {

namespace {

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0))
    throw Error(ErrorKind::InvalidParameter, std::string(name) + " must lie in (0, 1)");
}

Index circular(Index i, Index n) {
  const Index r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

RlmInstance<double> TwoClusterInstance::materialize() const {
  PointMatrix<double> x(n, 1);
  x.topRows(count_a).setConstant(1.0);
  x.bottomRows(count_b).setConstant(-1.0);
  RlmParams<double> p{loss, RegularizerKind::L2Squared, kappa, 1.0};
  return RlmInstance<double>(std::move(x), Vector<double>::Ones(n), p);
}

TwoClusterInstance gen_two_cluster(Index n, double kappa, double gamma, LossKind loss) {
  check_open_unit(kappa, "kappa");
  check_open_unit(gamma, "gamma");
  if (n < 2) throw Error(ErrorKind::DegenerateInstance, "two-cluster instance needs n >= 2");
  TwoClusterInstance inst;
  inst.n = n;
  inst.kappa = kappa;
  inst.gamma = gamma;
  inst.loss = loss;
  const auto nn = static_cast<double>(n);
  inst.lambda = std::pow(nn, kappa);
  const double b = std::round(inst.lambda * std::pow(nn, gamma / 2.0));
  if (!(b >= 1.0 && b < nn))
    throw Error(ErrorKind::DegenerateInstance,
                "cluster B size " + std::to_string(b) + " outside [1, n)");
  inst.count_b = static_cast<Index>(b);
  inst.count_a = n - inst.count_b;
  return inst;
}

Hypothesis<double> beta0(Index n, double gamma) {
  check_open_unit(gamma, "gamma");
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "n must be positive");
  Vector<double> b(1);
  b(0) = std::pow(static_cast<double>(n), gamma / 4.0);
  return Hypothesis<double>(std::move(b));
}

Index two_cluster_sample_count(Index n, double kappa, double gamma) {
  const double c = std::round(std::pow(static_cast<double>(n), 1.0 - kappa - gamma));
  return std::max<Index>(1, static_cast<Index>(c));
}

double two_cluster_objective(const TwoClusterInstance& inst, double beta) {
  // +1 points: loss(-beta); -1 points: loss(beta).
  return static_cast<double>(inst.count_a) * loss_eval(inst.loss, -beta) +
         static_cast<double>(inst.count_b) * loss_eval(inst.loss, beta) +
         inst.lambda * beta * beta;
}

double two_cluster_H(const TwoClusterInstance& inst, bool sample_in_a, Index c, double u,
                     double beta) {
  if (c < 1) throw Error(ErrorKind::InvalidParameter, "coreset size must be at least 1");
  if (!(u >= 0.0)) throw Error(ErrorKind::InvalidWeights, "weight must be nonnegative");
  const double full = two_cluster_objective(inst, beta);
  const double reg_share = inst.lambda * beta * beta / static_cast<double>(inst.n);
  const double point_loss = loss_eval(inst.loss, sample_in_a ? -beta : beta);
  const double core = static_cast<double>(c) * u * (point_loss + reg_share);
  return detail::relative_gap(full, core);
}

Containment two_cluster_containment(const TwoClusterInstance& inst, Index c) {
  const auto nn = static_cast<double>(inst.n);
  return {1.0 - std::pow(nn, -inst.gamma / 2.0),
          std::pow(static_cast<double>(inst.count_a) / nn, static_cast<double>(c))};
}

double CircleInstance::angle(Index i) const {
  return 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
}

Eigen::Vector2d CircleInstance::point(Index i) const {
  const double a = angle(i);
  return {std::cos(a), std::sin(a)};
}

RlmInstance<double> CircleInstance::materialize_lifted() const {
  PointMatrix<double> x(n, 3);
  for (Index i = 0; i < n; ++i) {
    const Eigen::Vector2d p = point(i);
    x(i, 0) = p.x();
    x(i, 1) = p.y();
    x(i, 2) = 1.0;
  }
  RlmParams<double> params{loss, RegularizerKind::L2Squared, kappa, 1.0};
  return RlmInstance<double>(std::move(x), Vector<double>::Ones(n), params);
}

CircleInstance gen_circle(Index n, double kappa, LossKind loss) {
  check_open_unit(kappa, "kappa");
  if (n < 8) throw Error(ErrorKind::DegenerateInstance, "circle instance needs n >= 8");
  CircleInstance inst;
  inst.n = n;
  inst.kappa = kappa;
  inst.loss = loss;
  inst.lambda = std::pow(static_cast<double>(n), kappa);
  return inst;
}

bool Chunk::contains(Index i) const { return circular(i - start_index, n) < length; }

bool Chunk::in_window(Index i) const { return circular(i - window_start, n) < window_length; }

std::vector<Index> Chunk::indices() const {
  std::vector<Index> out(static_cast<std::size_t>(length));
  for (Index j = 0; j < length; ++j) out[static_cast<std::size_t>(j)] = circular(start_index + j, n);
  return out;
}

Index Chunk::before() const { return circular(start_index - 1, n); }
Index Chunk::after() const { return circular(start_index + length, n); }

Chunk find_chunk(Index n, Index k, std::span<const Index> coreset) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be at least 1");
  if (n < 8 * k)
    throw Error(ErrorKind::NoChunkFound,
                "no chunk: need n >= 8k (n = " + std::to_string(n) +
                    ", k = " + std::to_string(k) + ")");
  std::vector<Index> c(coreset.begin(), coreset.end());
  for (Index i : c)
    if (i < 0 || i >= n)
      throw Error(ErrorKind::IndexOutOfRange, "coreset index " + std::to_string(i) + " outside circle");
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());

  const Index window = n / (2 * k);
  auto is_free = [&](Index s) {
    const Index last = s + window - 1;
    auto it = std::lower_bound(c.begin(), c.end(), s);
    if (it != c.end() && *it <= std::min(last, n - 1)) return false;
    if (last >= n && !c.empty() && c.front() <= last - n) return false;
    return true;
  };

  // The smallest free start is 0 or immediately follows a coreset index.
  std::vector<Index> candidates{0};
  for (Index i : c) candidates.push_back(circular(i + 1, n));
  std::sort(candidates.begin(), candidates.end());
  for (Index s : candidates) {
    if (!is_free(s)) continue;
    Chunk ch;
    ch.n = n;
    ch.k = k;
    ch.window_start = s;
    ch.window_length = window;
    ch.length = std::max<Index>(1, n / (4 * k));
    ch.guard = n / (8 * k);
    ch.start_index = circular(s + (window - ch.length) / 2, n);
    const double step = 2.0 * M_PI / static_cast<double>(n);
    ch.center_angle =
        std::fmod(step * (static_cast<double>(ch.start_index) +
                          static_cast<double>(ch.length - 1) / 2.0),
                  2.0 * M_PI);
    ch.half_angle = M_PI * static_cast<double>(ch.length + 1) / static_cast<double>(n);
    ch.theta = M_PI / (4.0 * static_cast<double>(k));
    return ch;
  }
  throw Error(ErrorKind::NoChunkFound, "every window of n/(2k) points meets the coreset");
}

double default_target_norm(Index n, double gamma, Index k, double lambda) {
  return std::sqrt(std::pow(static_cast<double>(n), 1.0 - gamma) /
                   (static_cast<double>(k) * lambda));
}

Index default_k(Index n, double kappa, double gamma, double c) {
  const double k = std::round(c * std::pow(static_cast<double>(n), (1.0 - kappa) / 5.0 - gamma));
  return std::max<Index>(1, static_cast<Index>(k));
}

Hypothesis<double> chunk_hypothesis(const Chunk& chunk, double target_norm) {
  if (!(target_norm > 0.0) || !std::isfinite(target_norm))
    throw Error(ErrorKind::InvalidParameter, "target norm must be positive");
  const double cz = std::cos(chunk.half_angle);
  const double scale = target_norm / std::sqrt(1.0 + cz * cz);
  Vector<double> b(2);
  b(0) = -scale * std::cos(chunk.center_angle);
  b(1) = -scale * std::sin(chunk.center_angle);
  return Hypothesis<double>(std::move(b), scale * cz);
}

double point_line_distance(double theta_i, double theta) {
  return std::abs(std::cos(theta_i) - std::cos(theta));
}

WeightedCoreset<double> evenly_spaced_coreset(Index n, Index k) {
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidParameter, "need 1 <= k <= n");
  WeightedCoreset<double> cs;
  cs.indices.resize(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) cs.indices[static_cast<std::size_t>(j)] = (j * n) / k;
  cs.weights = uniform_weights<double>(n, static_cast<std::uint64_t>(k));
  return cs;
}

double circle_margin(const CircleInstance& inst, Index i, const Hypothesis<double>& h) {
  const double a = inst.angle(i);
  return h.beta(0) * std::cos(a) + h.beta(1) * std::sin(a) + h.bias.value_or(0.0);
}

CircleEvaluation circle_evaluate(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                                 const Hypothesis<double>& h, Exec exec) {
  if (h.dim() != 2) throw Error(ErrorKind::InvalidParameter, "circle hypotheses are (beta_x, beta_y) plus bias");
  cs.validate(inst.n);
  CircleEvaluation ev;
  ev.loss_all = deterministic_sum<double>(
      static_cast<std::size_t>(inst.n),
      [&](std::size_t i) { return loss_eval(inst.loss, -circle_margin(inst, static_cast<Index>(i), h)); },
      exec);
  ev.loss_coreset = deterministic_sum<double>(cs.size(), [&](std::size_t j) {
    return cs.weights[j] * loss_eval(inst.loss, -circle_margin(inst, cs.indices[j], h));
  });
  ev.weight_sum = cs.weight_sum();
  ev.regularizer = inst.lambda * CircleInstance::R * CircleInstance::R * h.parameters().squaredNorm();
  ev.full = ev.loss_all + ev.regularizer;
  ev.coreset = ev.loss_coreset + (ev.weight_sum / static_cast<double>(inst.n)) * ev.regularizer;
  ev.H = detail::relative_gap(ev.full, ev.coreset);
  return ev;
}

double circle_H(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                const Hypothesis<double>& h, Exec exec) {
  return circle_evaluate(inst, cs, h, exec).H;
}

LossRatios loss_ratios(const CircleInstance& inst, const WeightedCoreset<double>& cs,
                         const Hypothesis<double>& h, Exec exec) {
  const CircleEvaluation ev = circle_evaluate(inst, cs, h, exec);
  const double sq = h.parameters().squaredNorm();
  return {inst.lambda * sq / ev.loss_all, ev.loss_coreset / ev.loss_all};
}

}  // namespace rlmc::adversary
