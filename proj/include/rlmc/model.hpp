#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlmc/error.hpp"
#include "rlmc/summation.hpp"

namespace rlmc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// One point per row; rows are contiguous so per-point dot products are
// evaluated in a fixed order.
template <typename Scalar>
using PointMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

enum class LossKind { Logistic, Hinge };
enum class RegularizerKind { L1, L2, L2Squared };

const char* to_string(LossKind kind) noexcept;
const char* to_string(RegularizerKind kind) noexcept;
LossKind parse_loss(const std::string& name);
RegularizerKind parse_regularizer(const std::string& name);

// VC-dimension bound for a linear threshold loss in d dimensions.
constexpr Index vc_bound(LossKind, Index d) noexcept { return d + 1; }

/// Logistic: softplus(z) = log(1 + e^z), evaluated as max(z,0) + log1p(e^-|z|).
/// Hinge: max(0, 1 + z).
template <typename Scalar>
Scalar loss_eval(LossKind kind, Scalar z) {
  using std::abs;
  using std::exp;
  using std::log1p;
  if (kind == LossKind::Logistic) {
    const Scalar pos = z > Scalar(0) ? z : Scalar(0);
    return pos + log1p(exp(-abs(z)));
  }
  const Scalar h = Scalar(1) + z;
  return h > Scalar(0) ? h : Scalar(0);
}

/// Derivative of loss_eval in z. The hinge kink at z = -1 maps to 0.
template <typename Scalar>
Scalar loss_derivative(LossKind kind, Scalar z) {
  using std::exp;
  if (kind == LossKind::Logistic) {
    if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
    const Scalar e = exp(z);
    return e / (Scalar(1) + e);
  }
  return Scalar(1) + z > Scalar(0) ? Scalar(1) : Scalar(0);
}

template <typename Derived>
typename Derived::Scalar reg_eval(RegularizerKind kind,
                                  const Eigen::MatrixBase<Derived>& v) {
  switch (kind) {
    case RegularizerKind::L1: return v.template lpNorm<1>();
    case RegularizerKind::L2: return v.norm();
    case RegularizerKind::L2Squared: return v.squaredNorm();
  }
  return typename Derived::Scalar(0);
}

// Two-norm of a row with a sequential sum of squares; used wherever R has to
// agree bit-for-bit between batch and streaming paths.
template <typename Derived>
typename Derived::Scalar row_norm(const Eigen::DenseBase<Derived>& x) {
  using std::sqrt;
  typename Derived::Scalar s(0);
  for (Index j = 0; j < x.size(); ++j) s += x(j) * x(j);
  return sqrt(s);
}

template <typename Scalar>
struct LabeledPoint {
  Vector<Scalar> x;
  Scalar y = Scalar(1);
};

/// Linear hypothesis. The optional bias is the third lifted coordinate of the
/// circle instance; when present it enters both the margin and the
/// regularizer, exactly as if every point carried an extra coordinate 1.
template <typename Scalar>
struct Hypothesis {
  Vector<Scalar> beta;
  std::optional<Scalar> bias;

  Hypothesis() = default;
  explicit Hypothesis(Vector<Scalar> b, std::optional<Scalar> z = std::nullopt)
      : beta(std::move(b)), bias(z) {}

  static Hypothesis zero(Index d) { return Hypothesis(Vector<Scalar>::Zero(d)); }

  Index dim() const { return beta.size(); }

  // (beta, bias) stacked; the vector the regularizer sees.
  Vector<Scalar> parameters() const {
    if (!bias) return beta;
    Vector<Scalar> p(beta.size() + 1);
    p.head(beta.size()) = beta;
    p(beta.size()) = *bias;
    return p;
  }

  Scalar norm() const { return parameters().norm(); }

  bool is_finite() const {
    return beta.allFinite() && (!bias || std::isfinite(static_cast<double>(*bias)));
  }
};

/// Index-based weighted subsample (C, U). Indices may repeat.
template <typename Scalar>
struct WeightedCoreset {
  std::vector<Index> indices;
  std::vector<Scalar> weights;

  std::size_t size() const { return indices.size(); }

  Scalar weight_sum() const { return pairwise_sum(weights); }

  void validate(Index n) const {
    if (indices.size() != weights.size())
      throw Error(ErrorKind::InvalidWeights,
                  "coreset has " + std::to_string(indices.size()) +
                      " indices but " + std::to_string(weights.size()) +
                      " weights");
    for (Index i : indices)
      if (i < 0 || i >= n)
        throw Error(ErrorKind::IndexOutOfRange,
                    "coreset index " + std::to_string(i) +
                        " outside [0, " + std::to_string(n) + ")");
    for (const Scalar& u : weights)
      if (!(u >= Scalar(0)) || !std::isfinite(static_cast<double>(u)))
        throw Error(ErrorKind::InvalidWeights,
                    "coreset weights must be finite and nonnegative");
  }

  static WeightedCoreset identity(Index n) {
    WeightedCoreset cs;
    cs.indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) cs.indices[static_cast<std::size_t>(i)] = i;
    cs.weights.assign(static_cast<std::size_t>(n), Scalar(1));
    return cs;
  }
};

/// Weighted subsample that owns its points; produced by the streaming sampler
/// where the source is not random-access.
template <typename Scalar>
struct PointCoreset {
  PointMatrix<Scalar> points;
  Vector<Scalar> labels;
  std::vector<Scalar> weights;

  std::size_t size() const { return weights.size(); }
  Scalar weight_sum() const { return pairwise_sum(weights); }
};

template <typename Scalar>
struct RlmParams {
  LossKind loss = LossKind::Logistic;
  RegularizerKind reg = RegularizerKind::L2Squared;
  Scalar kappa = Scalar(0.5);
  Scalar lambda_scale = Scalar(1);
};

/// A labelled dataset together with the loss, regularizer, lambda and R that
/// define F(beta) = sum_i loss(-y_i beta.x_i) + lambda * r(R beta).
/// Immutable after construction.
template <typename Scalar>
class RlmInstance {
 public:
  using Params = RlmParams<Scalar>;

  RlmInstance(PointMatrix<Scalar> points, Vector<Scalar> labels, Params params)
      : points_(std::move(points)), labels_(std::move(labels)), params_(params) {
    if (points_.rows() == 0)
      throw Error(ErrorKind::EmptyDataset, "instance has no points");
    if (labels_.size() != points_.rows())
      throw Error(ErrorKind::InvalidParameter, "label count differs from point count");
    if (!(params_.kappa > Scalar(0) && params_.kappa < Scalar(1)))
      throw Error(ErrorKind::InvalidParameter, "kappa must lie in (0, 1)");
    if (!(params_.lambda_scale > Scalar(0)) ||
        !std::isfinite(static_cast<double>(params_.lambda_scale)))
      throw Error(ErrorKind::InvalidParameter, "lambda scale must be positive");
    if (!points_.allFinite())
      throw Error(ErrorKind::InvalidParameter, "points must be finite");
    for (Index i = 0; i < labels_.size(); ++i)
      if (labels_(i) != Scalar(1) && labels_(i) != Scalar(-1))
        throw Error(ErrorKind::LabelError,
                    "label of point " + std::to_string(i) + " is not +1/-1");

    using std::pow;
    lambda_ = params_.lambda_scale *
              pow(static_cast<Scalar>(points_.rows()), params_.kappa);
    radius_ = Scalar(0);
    for (Index i = 0; i < points_.rows(); ++i) {
      const Scalar r = row_norm(points_.row(i));
      if (r > radius_) radius_ = r;
    }
    if (radius_ == Scalar(0))
      warn("all points lie at the origin (R = 0); the regularizer term vanishes");
  }

  Index n() const { return points_.rows(); }
  Index d() const { return points_.cols(); }
  LossKind loss() const { return params_.loss; }
  RegularizerKind reg() const { return params_.reg; }
  Scalar kappa() const { return params_.kappa; }
  Scalar lambda_scale() const { return params_.lambda_scale; }
  Scalar lambda() const { return lambda_; }
  Scalar R() const { return radius_; }
  const Params& params() const { return params_; }

  const PointMatrix<Scalar>& points() const { return points_; }
  const Vector<Scalar>& labels() const { return labels_; }

  LabeledPoint<Scalar> point(Index i) const {
    check_index(i);
    return {points_.row(i).transpose(), labels_(i)};
  }

  void check_index(Index i) const {
    if (i < 0 || i >= n())
      throw Error(ErrorKind::IndexOutOfRange,
                  "point index " + std::to_string(i) + " outside [0, " +
                      std::to_string(n()) + ")");
  }

  void check_hypothesis(const Hypothesis<Scalar>& h) const {
    if (h.dim() != d())
      throw Error(ErrorKind::InvalidParameter,
                  "hypothesis has dimension " + std::to_string(h.dim()) +
                      ", instance has " + std::to_string(d()));
  }

  // beta . x_i + bias, accumulated left to right.
  Scalar margin(Index i, const Hypothesis<Scalar>& h) const {
    Scalar s(0);
    const Scalar* row = points_.data() + i * points_.cols();
    for (Index j = 0; j < points_.cols(); ++j) s += row[j] * h.beta(j);
    if (h.bias) s += *h.bias;
    return s;
  }

 private:
  PointMatrix<Scalar> points_;
  Vector<Scalar> labels_;
  Params params_;
  Scalar lambda_;
  Scalar radius_;
};

/// lambda * r(R * theta) for theta = (beta, bias).
template <typename Scalar>
Scalar regularizer_term(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& h) {
  if (inst.R() == Scalar(0)) return Scalar(0);
  return inst.lambda() * reg_eval(inst.reg(), (inst.R() * h.parameters()).eval());
}

/// l_i(beta) = loss(-y_i (beta . x_i + bias)).
template <typename Scalar>
Scalar point_loss(const RlmInstance<Scalar>& inst, Index i, const Hypothesis<Scalar>& h) {
  inst.check_index(i);
  inst.check_hypothesis(h);
  return loss_eval(inst.loss(), -inst.labels()(i) * inst.margin(i, h));
}

/// f_i(beta) = l_i(beta) + lambda r(R beta) / n.
template <typename Scalar>
Scalar point_objective(const RlmInstance<Scalar>& inst, Index i, const Hypothesis<Scalar>& h) {
  return point_loss(inst, i, h) +
         regularizer_term(inst, h) / static_cast<Scalar>(inst.n());
}

/// All n point losses, in index order.
template <typename Scalar>
Vector<Scalar> loss_terms(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& h) {
  inst.check_hypothesis(h);
  Vector<Scalar> out(inst.n());
  for (Index i = 0; i < inst.n(); ++i)
    out(i) = loss_eval(inst.loss(), -inst.labels()(i) * inst.margin(i, h));
  return out;
}

template <typename Scalar>
Scalar total_loss(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& h,
                  Exec exec = {}) {
  inst.check_hypothesis(h);
  const LossKind kind = inst.loss();
  const auto& y = inst.labels();
  return deterministic_sum<Scalar>(
      static_cast<std::size_t>(inst.n()),
      [&](std::size_t i) {
        const auto k = static_cast<Index>(i);
        return loss_eval(kind, -y(k) * inst.margin(k, h));
      },
      exec);
}

/// F(beta). Bit-identical for any thread count.
template <typename Scalar>
Scalar full_objective(const RlmInstance<Scalar>& inst, const Hypothesis<Scalar>& h,
                      Exec exec = {}) {
  return total_loss(inst, h, exec) + regularizer_term(inst, h);
}

/// sum_{i in C} u_i f_i(beta), with the regularizer share collected once as
/// (sum u_i / n) * lambda r(R beta).
template <typename Scalar>
Scalar coreset_objective(const RlmInstance<Scalar>& inst, const WeightedCoreset<Scalar>& cs,
                         const Hypothesis<Scalar>& h, Exec exec = {}) {
  cs.validate(inst.n());
  inst.check_hypothesis(h);
  const LossKind kind = inst.loss();
  const auto& y = inst.labels();
  const Scalar loss = deterministic_sum<Scalar>(
      cs.size(),
      [&](std::size_t j) {
        const Index i = cs.indices[j];
        return cs.weights[j] * loss_eval(kind, -y(i) * inst.margin(i, h));
      },
      exec);
  const Scalar share = cs.weight_sum() / static_cast<Scalar>(inst.n());
  return loss + share * regularizer_term(inst, h);
}

template <typename Scalar>
Scalar coreset_objective(const RlmInstance<Scalar>& inst, const PointCoreset<Scalar>& cs,
                         const Hypothesis<Scalar>& h, Exec exec = {}) {
  inst.check_hypothesis(h);
  if (cs.points.cols() != inst.d() || cs.points.rows() != static_cast<Index>(cs.size()) ||
      cs.labels.size() != static_cast<Index>(cs.size()))
    throw Error(ErrorKind::InvalidParameter, "point coreset shape does not match instance");
  const LossKind kind = inst.loss();
  const Index d = inst.d();
  const Scalar loss = deterministic_sum<Scalar>(
      cs.size(),
      [&](std::size_t j) {
        const auto k = static_cast<Index>(j);
        Scalar m(0);
        const Scalar* row = cs.points.data() + k * d;
        for (Index c = 0; c < d; ++c) m += row[c] * h.beta(c);
        if (h.bias) m += *h.bias;
        return cs.weights[j] * loss_eval(kind, -cs.labels(k) * m);
      },
      exec);
  const Scalar share = cs.weight_sum() / static_cast<Scalar>(inst.n());
  return loss + share * regularizer_term(inst, h);
}

namespace detail {

template <typename Scalar>
Scalar relative_gap(Scalar full, Scalar core) {
  using std::abs;
  if (full == Scalar(0))
    throw Error(ErrorKind::ZeroObjective,
                "F(beta) = 0; the relative approximation error is undefined");
  return abs(full - core) / full;
}

}  // namespace detail

/// H(beta) = |F(beta) - sum_C u_i f_i(beta)| / F(beta).
template <typename Scalar, typename Coreset>
Scalar approximation_error(const RlmInstance<Scalar>& inst, const Coreset& cs,
                           const Hypothesis<Scalar>& h, Exec exec = {}) {
  const Scalar core = coreset_objective(inst, cs, h, exec);
  return detail::relative_gap(full_objective(inst, h, exec), core);
}

/// (1 - eps) n <= sum u_i <= (1 + eps) n. Necessary for an eps-coreset
/// whenever loss(0) != 0, which holds for both supported losses.
template <typename Scalar, typename Coreset>
bool check_weight_sum(const Coreset& cs, Index n, Scalar eps) {
  const Scalar total = cs.weight_sum();
  const auto nn = static_cast<Scalar>(n);
  return total >= (Scalar(1) - eps) * nn && total <= (Scalar(1) + eps) * nn;
}

/// Gathers an index coreset into owned rows, preserving order.
template <typename Scalar>
PointCoreset<Scalar> materialize(const RlmInstance<Scalar>& inst,
                                 const WeightedCoreset<Scalar>& cs) {
  cs.validate(inst.n());
  PointCoreset<Scalar> out;
  const auto m = static_cast<Index>(cs.size());
  out.points.resize(m, inst.d());
  out.labels.resize(m);
  for (Index j = 0; j < m; ++j) {
    const Index i = cs.indices[static_cast<std::size_t>(j)];
    out.points.row(j) = inst.points().row(i);
    out.labels(j) = inst.labels()(i);
  }
  out.weights = cs.weights;
  return out;
}

}  // namespace rlmc
