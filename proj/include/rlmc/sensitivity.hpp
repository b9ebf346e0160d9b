#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "rlmc/model.hpp"

namespace rlmc {

/// (sigma, tau) with loss(-sigma) > 0 and r(beta) >= tau * loss(|beta|)
/// whenever |beta| >= sigma.
template <typename Scalar>
struct ScalingConstants {
  Scalar sigma;
  Scalar tau;
};

template <typename Scalar = double>
ScalingConstants<Scalar> scaling_constants(LossKind loss, RegularizerKind reg) {
  if (loss == LossKind::Logistic) return {Scalar(1), Scalar(1) / Scalar(2)};
  if (reg == RegularizerKind::L2Squared) return {Scalar(1) / Scalar(2), Scalar(1) / Scalar(12)};
  return {Scalar(1) / Scalar(2), Scalar(1) / Scalar(3)};
}

// Vacuously true below sigma; otherwise r(beta) >= tau loss(|beta|) - 1e-12.
template <typename Scalar, typename Derived>
bool check_scaling(LossKind loss, RegularizerKind reg, const ScalingConstants<Scalar>& sc,
                   const Eigen::MatrixBase<Derived>& beta) {
  const Scalar norm = beta.norm();
  if (norm < sc.sigma) return true;
  return reg_eval(reg, beta) >= sc.tau * loss_eval(loss, norm) - Scalar(1e-12);
}

/// Uniform per-point sensitivity bound s' for every point; S' = n s'.
template <typename Scalar>
struct SensitivityProfile {
  Scalar s_prime;
  Scalar S_prime;
  Index delta_vc;
  Index n;
};

/// s' = 1/(tau lambda) + loss(sigma) / (n loss(-sigma)) + 1/n, clamped to 1.
template <typename Scalar>
SensitivityProfile<Scalar> sensitivity_upper_bound(const RlmInstance<Scalar>& inst) {
  const auto sc = scaling_constants<Scalar>(inst.loss(), inst.reg());
  const auto n = static_cast<Scalar>(inst.n());
  Scalar s = Scalar(1) / (sc.tau * inst.lambda()) +
             loss_eval(inst.loss(), sc.sigma) / (n * loss_eval(inst.loss(), -sc.sigma)) +
             Scalar(1) / n;
  if (s > Scalar(1)) s = Scalar(1);
  return {s, n * s, vc_bound(inst.loss(), inst.d()), inst.n()};
}

// Closed-form total used for both losses: S' = 12 n / lambda + 6.
template <typename Scalar>
Scalar default_total_sensitivity(Index n, Scalar lambda) {
  return Scalar(12) * static_cast<Scalar>(n) / lambda + Scalar(6);
}

struct SampleSize {
  std::uint64_t q;       // after clamping to n
  double raw;            // (10 S'/eps^2)(Delta ln S' + ln(1/delta))
  bool clamped;
};

/// Sample count from the sensitivity framework, natural logarithms, clamped
/// to n (the whole dataset is a zero-error coreset).
inline SampleSize sample_size_detail(double S_prime, Index delta_vc, double eps,
                                     double delta, Index n) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorKind::InvalidParameter, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorKind::InvalidParameter, "delta must lie in (0, 1)");
  if (!(S_prime > 1.0) || !std::isfinite(S_prime))
    throw Error(ErrorKind::InvalidParameter, "total sensitivity must exceed 1");
  if (delta_vc < 1 || n < 1)
    throw Error(ErrorKind::InvalidParameter, "VC bound and n must be positive");
  const double raw = (10.0 * S_prime / (eps * eps)) *
                     (static_cast<double>(delta_vc) * std::log(S_prime) + std::log(1.0 / delta));
  const auto cap = static_cast<double>(n);
  if (raw >= cap) return {static_cast<std::uint64_t>(n), raw, raw > cap};
  return {static_cast<std::uint64_t>(std::ceil(raw)), raw, false};
}

inline std::uint64_t sample_size(double S_prime, Index delta_vc, double eps, double delta,
                                 Index n) {
  return sample_size_detail(S_prime, delta_vc, eps, delta, n).q;
}

}  // namespace rlmc
