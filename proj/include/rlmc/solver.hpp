#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rlmc/model.hpp"
#include "rlmc/random.hpp"

namespace rlmc {

enum class TrainMethod { FullBatch, Sgd };
enum class LearningRateSchedule { Constant, InvSqrt };

struct SgdConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  LearningRateSchedule schedule = LearningRateSchedule::InvSqrt;
  // Trace every this many mini-batches; 0 means once per epoch.
  std::size_t trace_every = 0;
};

struct TrainConfig {
  TrainMethod method = TrainMethod::FullBatch;
  std::size_t max_iters = 1000;
  double grad_tol = 1e-6;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double step_growth = 2.0;
  double subgradient_step = 0.1;
  SgdConfig sgd;
  std::uint64_t seed = 0;
  bool record_trace = true;
  bool keep_iterates = false;

  void validate() const {
    if (!(grad_tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "grad_tol must be positive");
    if (!(initial_step > 0.0) || !(subgradient_step > 0.0))
      throw Error(ErrorKind::InvalidParameter, "step sizes must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0))
      throw Error(ErrorKind::InvalidParameter, "Armijo constant must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0))
      throw Error(ErrorKind::InvalidParameter, "backtracking factor must lie in (0, 1)");
    if (!(step_growth >= 1.0))
      throw Error(ErrorKind::InvalidParameter, "step growth must be at least 1");
    if (sgd.batch_size < 1) throw Error(ErrorKind::InvalidParameter, "batch size must be >= 1");
    if (!(sgd.learning_rate > 0.0))
      throw Error(ErrorKind::InvalidParameter, "learning rate must be positive");
  }
};

template <typename Scalar>
struct TracePoint {
  std::size_t iter;
  double seconds;     // solver time only; trace evaluation is excluded
  Scalar objective;   // F on the full instance
};

template <typename Scalar>
struct TrainTrace {
  std::vector<TracePoint<Scalar>> points;
};

template <typename Scalar>
struct TrainResult {
  Hypothesis<Scalar> hypothesis;
  TrainTrace<Scalar> trace;
  std::size_t iterations = 0;
  Scalar objective = Scalar(0);   // training objective at the returned iterate
  Scalar grad_norm = Scalar(0);
  bool converged = false;
  double seconds = 0.0;
  std::vector<Vector<Scalar>> iterates;
};

namespace detail {

// The rows a solver trains on: the full instance (unit weights) or a gathered
// coreset. Objective = sum_j w_j loss_j + (W / n) lambda r(R beta).
template <typename Scalar>
struct WeightedRows {
  const RlmInstance<Scalar>* inst = nullptr;
  PointCoreset<Scalar> owned;
  const PointMatrix<Scalar>* X = nullptr;
  const Vector<Scalar>* y = nullptr;
  Vector<Scalar> w;
  Scalar share = Scalar(1);

  WeightedRows(const RlmInstance<Scalar>& instance, const WeightedCoreset<Scalar>* cs)
      : inst(&instance) {
    if (cs == nullptr) {
      X = &instance.points();
      y = &instance.labels();
      w = Vector<Scalar>::Ones(instance.n());
      share = pairwise_sum(std::span<const Scalar>(w.data(), static_cast<std::size_t>(w.size()))) /
              static_cast<Scalar>(instance.n());
    } else {
      owned = materialize(instance, *cs);
      X = &owned.points;
      y = &owned.labels;
      w = Eigen::Map<const Vector<Scalar>>(owned.weights.data(),
                                           static_cast<Index>(owned.weights.size()));
      share = owned.weight_sum() / static_cast<Scalar>(instance.n());
    }
  }

  WeightedRows(const RlmInstance<Scalar>& instance, PointCoreset<Scalar> cs)
      : inst(&instance), owned(std::move(cs)) {
    if (owned.points.cols() != instance.d() ||
        owned.points.rows() != static_cast<Index>(owned.size()) ||
        owned.labels.size() != static_cast<Index>(owned.size()) || owned.size() == 0)
      throw Error(ErrorKind::InvalidParameter, "point coreset shape does not match instance");
    X = &owned.points;
    y = &owned.labels;
    w = Eigen::Map<const Vector<Scalar>>(owned.weights.data(),
                                         static_cast<Index>(owned.weights.size()));
    share = owned.weight_sum() / static_cast<Scalar>(instance.n());
  }

  WeightedRows(const WeightedRows&) = delete;
  WeightedRows& operator=(const WeightedRows&) = delete;

  Index rows() const { return X->rows(); }

  Scalar reg_value(const Vector<Scalar>& beta) const {
    if (inst->R() == Scalar(0)) return Scalar(0);
    return share * inst->lambda() * reg_eval(inst->reg(), (inst->R() * beta).eval());
  }

  void add_reg_gradient(const Vector<Scalar>& beta, Vector<Scalar>& g) const {
    const Scalar R = inst->R();
    if (R == Scalar(0)) return;
    const Scalar c = share * inst->lambda();
    switch (inst->reg()) {
      case RegularizerKind::L2Squared:
        g += (c * Scalar(2) * R * R) * beta;
        break;
      case RegularizerKind::L2: {
        const Scalar nb = beta.norm();
        if (nb > Scalar(0)) g += (c * R / nb) * beta;
        break;
      }
      case RegularizerKind::L1:
        for (Index j = 0; j < beta.size(); ++j) {
          if (beta(j) > Scalar(0)) g(j) += c * R;
          else if (beta(j) < Scalar(0)) g(j) -= c * R;
        }
        break;
    }
  }

  // At beta = 0 the L2 norm has subdifferential {lambda R v : |v| <= 1};
  // replaces the loss gradient g by the minimum-norm element of g + that set.
  void min_norm_at_origin(const Vector<Scalar>& beta, Vector<Scalar>& g) const {
    if (inst->reg() != RegularizerKind::L2 || inst->R() == Scalar(0) || beta.norm() > Scalar(0))
      return;
    const Scalar radius = share * inst->lambda() * inst->R();
    const Scalar gn = g.norm();
    if (gn <= radius) g.setZero();
    else g *= (gn - radius) / gn;
  }

  Scalar objective(const Vector<Scalar>& beta) const {
    const Vector<Scalar> m = (*X) * beta;
    const LossKind kind = inst->loss();
    const Scalar loss = deterministic_sum<Scalar>(
        static_cast<std::size_t>(rows()), [&](std::size_t j) {
          const auto k = static_cast<Index>(j);
          return w(k) * loss_eval(kind, -(*y)(k) * m(k));
        });
    return loss + reg_value(beta);
  }

  // Returns the objective and writes the (sub)gradient into g.
  Scalar objective_and_gradient(const Vector<Scalar>& beta, Vector<Scalar>& g) const {
    const Vector<Scalar> m = (*X) * beta;
    const LossKind kind = inst->loss();
    Vector<Scalar> coef(rows());
    std::vector<Scalar> terms(static_cast<std::size_t>(rows()));
    for (Index k = 0; k < rows(); ++k) {
      const Scalar z = -(*y)(k) * m(k);
      terms[static_cast<std::size_t>(k)] = w(k) * loss_eval(kind, z);
      coef(k) = -w(k) * (*y)(k) * loss_derivative(kind, z);
    }
    g = X->transpose() * coef;
    add_reg_gradient(beta, g);
    const Scalar loss = deterministic_sum<Scalar>(
        terms.size(), [&](std::size_t j) { return terms[j]; });
    return loss + reg_value(beta);
  }
};

class Stopwatch {
 public:
  using Clock = std::chrono::steady_clock;
  void resume() { start_ = Clock::now(); running_ = true; }
  void pause() {
    if (running_) elapsed_ += std::chrono::duration<double>(Clock::now() - start_).count();
    running_ = false;
  }
  double seconds() const {
    double s = elapsed_;
    if (running_) s += std::chrono::duration<double>(Clock::now() - start_).count();
    return s;
  }

 private:
  Clock::time_point start_{};
  double elapsed_ = 0.0;
  bool running_ = false;
};

// Largest rise of the objective, in units of eps |F|, that a full-batch step
// may take once the Armijo decrease is no longer representable.
inline constexpr double kFlatSlack = 4.0;

inline bool is_smooth(LossKind loss, RegularizerKind reg) {
  return loss == LossKind::Logistic && reg != RegularizerKind::L1;
}

template <typename Scalar>
void require_finite(Scalar f, const Vector<Scalar>& g) {
  if (!std::isfinite(static_cast<double>(f)) || !g.allFinite())
    throw Error(ErrorKind::NonFinite, "objective or gradient became non-finite");
}

}  // namespace detail

/// Gradient of the full objective (cs == nullptr) or of the weighted coreset
/// objective. Kinks take the zero subgradient.
template <typename Scalar>
Vector<Scalar> gradient(const RlmInstance<Scalar>& inst, const WeightedCoreset<Scalar>* cs,
                        const Hypothesis<Scalar>& h) {
  inst.check_hypothesis(h);
  if (h.bias) throw Error(ErrorKind::InvalidParameter, "gradient does not support a bias term");
  const detail::WeightedRows<Scalar> rows(inst, cs);
  Vector<Scalar> g;
  rows.objective_and_gradient(h.beta, g);
  return g;
}

template <typename Scalar>
Vector<Scalar> gradient(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& h) {
  return gradient<Scalar>(inst, nullptr, h);
}

/// Trains from beta = 0 on the full instance (cs == nullptr) or on a weighted
/// coreset. The trace reports F on the full instance; evaluating it is
/// excluded from the recorded solver time.
///
/// FullBatch on a smooth objective: gradient descent with Armijo backtracking
/// until |grad| <= grad_tol, taking the minimum-norm subgradient at the L2
/// kink beta = 0. Once the Armijo decrease is below the resolution of the
/// objective, steps are accepted on a strict drop in |grad| instead. FullBatch with hinge loss or L1: normalized subgradient steps of size subgradient_step / sqrt(t + 1), returning the
/// best iterate. Sgd: shuffled mini-batches for a fixed number of epochs.
namespace detail {

template <typename Scalar>
TrainResult<Scalar> train_rows(const RlmInstance<Scalar>& inst, const WeightedRows<Scalar>& rows,
                               const TrainConfig& cfg) {
  cfg.validate();
  const Index d = inst.d();
  TrainResult<Scalar> result;
  detail::Stopwatch clock;

  auto record = [&](std::size_t iter, const Vector<Scalar>& beta) {
    if (cfg.keep_iterates) result.iterates.push_back(beta);
    if (!cfg.record_trace) return;
    clock.pause();
    const Scalar f = full_objective(inst, Hypothesis<Scalar>(beta));
    result.trace.points.push_back({iter, clock.seconds(), f});
    clock.resume();
  };

  Vector<Scalar> beta = Vector<Scalar>::Zero(d);
  Vector<Scalar> g(d);
  clock.resume();
  record(0, beta);

  if (cfg.method == TrainMethod::FullBatch && detail::is_smooth(inst.loss(), inst.reg())) {
    Scalar f = rows.objective_and_gradient(beta, g);
    detail::require_finite(f, g);
    rows.min_norm_at_origin(beta, g);
    Scalar step = static_cast<Scalar>(cfg.initial_step);
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
      const Scalar gn2 = g.squaredNorm();
      if (std::sqrt(static_cast<double>(gn2)) <= cfg.grad_tol) {
        result.converged = true;
        break;
      }
      bool accepted = false;
      bool have_gradient = false;
      Vector<Scalar> cand(d), gc(d);
      Scalar fc = f;
      while (step > Scalar(1e-300)) {
        cand = beta - step * g;
        if (cand == beta) break;
        const Scalar target = f - static_cast<Scalar>(cfg.armijo_c) * step * gn2;
        if (target < f) {
          fc = rows.objective(cand);
          if (std::isfinite(static_cast<double>(fc)) && fc <= target) {
            accepted = true;
            break;
          }
        } else {
          // The required decrease is below the resolution of f: accept a
          // step that keeps f within its rounding (kFlatSlack eps |f|) and
          // strictly reduces the gradient norm.
          fc = rows.objective_and_gradient(cand, gc);
          rows.min_norm_at_origin(cand, gc);
          const Scalar slack = static_cast<Scalar>(kFlatSlack) *
                               std::numeric_limits<Scalar>::epsilon() * std::abs(f);
          if (std::isfinite(static_cast<double>(fc)) && gc.allFinite() && fc <= f + slack &&
              gc.squaredNorm() < gn2) {
            accepted = have_gradient = true;
            break;
          }
        }
        step *= static_cast<Scalar>(cfg.backtrack);
      }
      if (!accepted) break;  // no descent representable in floating point
      beta = cand;
      if (have_gradient) {
        f = fc;
        g = gc;
      } else {
        f = rows.objective_and_gradient(beta, g);
        detail::require_finite(f, g);
        rows.min_norm_at_origin(beta, g);
      }
      step *= static_cast<Scalar>(cfg.step_growth);
      record(it + 1, beta);
    }
    if (!result.converged && std::sqrt(static_cast<double>(g.squaredNorm())) <= cfg.grad_tol)
      result.converged = true;
    result.iterations = it;
    result.objective = f;
    result.grad_norm = g.norm();
  } else if (cfg.method == TrainMethod::FullBatch) {
    Scalar f = rows.objective_and_gradient(beta, g);
    detail::require_finite(f, g);
    Vector<Scalar> best = beta;
    Scalar best_f = f;
    Scalar best_gn = g.norm();
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
      const Scalar gn = g.norm();
      if (gn <= static_cast<Scalar>(cfg.grad_tol)) {
        result.converged = true;
        break;
      }
      const Scalar alpha = static_cast<Scalar>(cfg.subgradient_step) /
                           std::sqrt(static_cast<Scalar>(it + 1));
      beta -= (alpha / gn) * g;
      f = rows.objective_and_gradient(beta, g);
      detail::require_finite(f, g);
      if (f < best_f) {
        best_f = f;
        best = beta;
        best_gn = g.norm();
      }
      record(it + 1, beta);
    }
    beta = best;
    result.iterations = it;
    result.objective = best_f;
    result.grad_norm = best_gn;
  } else {
    const Index m = rows.rows();
    const Scalar total_w = rows.share * static_cast<Scalar>(inst.n());
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index(0));
    Rng rng(cfg.seed);
    const std::size_t b = std::min<std::size_t>(cfg.sgd.batch_size, static_cast<std::size_t>(m));
    const std::size_t batches = (static_cast<std::size_t>(m) + b - 1) / b;
    const LossKind kind = inst.loss();
    // Steps follow the gradient of objective / W so the learning rate does
    // not scale with the dataset size.
    const Scalar inv_w = Scalar(1) / total_w;
    std::size_t step_count = 0;
    for (std::size_t epoch = 0; epoch < cfg.sgd.epochs; ++epoch) {
      rlmc::shuffle(order.begin(), order.end(), rng);
      for (std::size_t bi = 0; bi < batches; ++bi) {
        const std::size_t lo = bi * b;
        const std::size_t hi = std::min(lo + b, static_cast<std::size_t>(m));
        const Scalar scale = static_cast<Scalar>(m) / static_cast<Scalar>(hi - lo);
        g.setZero();
        for (std::size_t t = lo; t < hi; ++t) {
          const Index k = order[t];
          const Scalar z = -(*rows.y)(k) * rows.X->row(k).dot(beta);
          const Scalar c = -rows.w(k) * (*rows.y)(k) * loss_derivative(kind, z);
          g += c * rows.X->row(k).transpose();
        }
        g *= scale;
        rows.add_reg_gradient(beta, g);
        g *= inv_w;
        if (!g.allFinite())
          throw Error(ErrorKind::NonFinite, "stochastic gradient became non-finite");
        double lr = cfg.sgd.learning_rate;
        if (cfg.sgd.schedule == LearningRateSchedule::InvSqrt)
          lr /= std::sqrt(1.0 + static_cast<double>(step_count) / static_cast<double>(batches));
        beta -= static_cast<Scalar>(lr) * g;
        ++step_count;
        if (cfg.sgd.trace_every > 0 && step_count % cfg.sgd.trace_every == 0)
          record(step_count, beta);
      }
      if (cfg.sgd.trace_every == 0) record(step_count, beta);
    }
    result.iterations = step_count;
    result.objective = rows.objective_and_gradient(beta, g);
    detail::require_finite(result.objective, g);
    result.grad_norm = g.norm();
  }

  clock.pause();
  result.seconds = clock.seconds();
  result.hypothesis = Hypothesis<Scalar>(beta);
  return result;
}

}  // namespace detail

template <typename Scalar>
TrainResult<Scalar> train(const RlmInstance<Scalar>& inst, const WeightedCoreset<Scalar>* cs,
                          const TrainConfig& cfg) {
  const detail::WeightedRows<Scalar> rows(inst, cs);
  return detail::train_rows(inst, rows, cfg);
}

// Trains on explicit weighted points, e.g. a streamed reservoir.
template <typename Scalar>
TrainResult<Scalar> train(const RlmInstance<Scalar>& inst, const PointCoreset<Scalar>& cs,
                          const TrainConfig& cfg) {
  const detail::WeightedRows<Scalar> rows(inst, cs);
  return detail::train_rows(inst, rows, cfg);
}

template <typename Scalar>
TrainResult<Scalar> train(const RlmInstance<Scalar>& inst, const TrainConfig& cfg) {
  return train<Scalar>(inst, nullptr, cfg);
}

/// F(beta_c) / F(beta_full) - 1.
template <typename Scalar>
Scalar relative_suboptimality(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& beta_c,
                              const Hypothesis<Scalar>& beta_full) {
  const Scalar f_full = full_objective(inst, beta_full);
  if (!(f_full > Scalar(0)))
    throw Error(ErrorKind::ZeroObjective, "F(beta_full) must be positive");
  return full_objective(inst, beta_c) / f_full - Scalar(1);
}

}  // namespace rlmc
