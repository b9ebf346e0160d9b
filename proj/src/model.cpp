#include "rlmc/model.hpp"

#include <algorithm>
#include <cctype>

namespace rlmc {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

const char* to_string(LossKind kind) noexcept {
  return kind == LossKind::Logistic ? "logistic" : "hinge";
}

const char* to_string(RegularizerKind kind) noexcept {
  switch (kind) {
    case RegularizerKind::L1: return "l1";
    case RegularizerKind::L2: return "l2";
    case RegularizerKind::L2Squared: return "l2sq";
  }
  return "l2sq";
}

LossKind parse_loss(const std::string& name) {
  const std::string s = lower(name);
  if (s == "logistic") return LossKind::Logistic;
  if (s == "hinge" || s == "svm") return LossKind::Hinge;
  throw Error(ErrorKind::InvalidParameter, "unknown loss '" + name + "'");
}

RegularizerKind parse_regularizer(const std::string& name) {
  const std::string s = lower(name);
  if (s == "l1") return RegularizerKind::L1;
  if (s == "l2") return RegularizerKind::L2;
  if (s == "l2sq" || s == "l2squared" || s == "l2^2") return RegularizerKind::L2Squared;
  throw Error(ErrorKind::InvalidParameter, "unknown regularizer '" + name + "'");
}

}  // namespace rlmc
