#include "rlmc/sampler.hpp"

namespace rlmc {

const char* to_string(SampleMode mode) noexcept {
  switch (mode) {
    case SampleMode::IidWithReplacement: return "iid";
    case SampleMode::Reservoir: return "reservoir";
  }
  return "unknown";
}

SampleMode parse_sample_mode(const std::string& name) {
  if (name == "iid" || name == "with-replacement") return SampleMode::IidWithReplacement;
  if (name == "reservoir" || name == "stream") return SampleMode::Reservoir;
  throw Error(ErrorKind::InvalidParameter, "unknown sample mode '" + name + "'");
}

}  // namespace rlmc
