#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlmc/model.hpp"

namespace rlmc::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kDomainError = 3,
  kNumericError = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

/// One --betas item: "random:K[:max-norm]", "trained", "zero" or "file:PATH".
struct ProbeSpec {
  enum class Kind { Random, Trained, Zero, File } kind = Kind::Random;
  std::size_t count = 0;
  std::optional<double> max_norm;
  std::string path;
};

ProbeSpec parse_probe_spec(const std::string& text);

/// K probes: seeded Gaussian directions with norms log-spaced from
/// 1e-3 / R up to max_norm (default 100 / R). R = 0 is read as R = 1.
std::vector<Hypothesis<double>> random_probes(Index d, std::size_t count, double R,
                                              std::optional<double> max_norm,
                                              std::uint64_t seed);

// Hypotheses from JSON (array of arrays or {"betas": [...]}) or whitespace
// separated rows of numbers, one hypothesis per line.
std::vector<Hypothesis<double>> load_probes(const std::string& path, Index d);

/// "50,100,200" or "START..END:geometric:RATIO", where END may be "n".
/// Geometric sizes are round(START r^j), deduplicated, capped at END.
std::vector<std::uint64_t> parse_sizes(const std::string& text, Index n);

// Entry point of the rlmc tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rlmc::cli
