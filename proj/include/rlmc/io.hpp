#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlmc/model.hpp"
#include "rlmc/solver.hpp"

namespace rlmc::io {

using Json = nlohmann::json;

inline constexpr const char* kCoresetSchema = "rlm-coreset/1";
inline constexpr const char* kReportSchema = "rlm-report/1";

/// Dense labelled data with labels already mapped onto {-1, +1}. R is the
/// largest row norm, computed while parsing.
struct Dataset {
  PointMatrix<double> points;
  Vector<double> labels;
  double R = 0.0;
  std::vector<std::string> feature_names;  // CSV header order; empty for svmlight
  Vector<double> w_star;                   // planted unit direction; synthetic only

  Index n() const { return points.rows(); }
  Index d() const { return points.cols(); }
};

enum class Format { Csv, SvmLight, Synthetic };

const char* to_string(Format f) noexcept;
Format parse_format(const std::string& name);

// "+1 1:0.5 3:-2". Labels must be a subset of {0, 1} or {-1, +1}; 0 maps to
// -1. Indices are 1-based. "qid:" tokens and "#" comments are ignored.
Dataset parse_svmlight(std::istream& in);
Dataset load_svmlight(const std::string& path);

struct CsvOptions {
  std::string label_column;            // empty: last column
  std::vector<std::string> drop;       // columns excluded from the features
  char delimiter = ',';
};

// Header row required. Label rule: numeric labels map the smaller value to
// -1, otherwise the lexicographically smaller string. More than two
// distinct values throw NonBinaryLabels.
Dataset parse_csv(std::istream& in, const CsvOptions& opts = {});
Dataset load_csv(const std::string& path, const CsvOptions& opts = {});

struct SyntheticSpec {
  Index n = 1000;
  Index d = 5;
  double margin = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Parses "n=1000,d=5,margin=0.1,noise=0.05,seed=7"; omitted keys keep defaults.
SyntheticSpec parse_synthetic_spec(const std::string& text);

/// Standard normal points, labels sign(w* . x) for a seeded random unit w*.
/// Each point is pushed margin along y w*, then its label flips with
/// probability noise.
Dataset gen_synthetic(Index n, Index d, double margin, double noise, std::uint64_t seed);
Dataset gen_synthetic(const SyntheticSpec& spec);

// Path is read as a synthetic spec when format is Synthetic.
Dataset load_dataset(const std::string& path, Format format, const CsvOptions& opts = {});

RlmInstance<double> make_instance(Dataset data, const RlmParams<double>& params);

/// Serialized coreset. Exactly one of `indices` and (`points`, `labels`) is
/// present: indices for batch samples, raw points for streamed ones.
struct CoresetFile {
  std::string schema = kCoresetSchema;
  Index n = 0;
  std::uint64_t q = 0;
  std::uint64_t seed = 0;
  std::string rng;
  std::string mode;
  std::optional<std::vector<Index>> indices;
  std::optional<PointMatrix<double>> points;
  std::optional<Vector<double>> labels;
  std::vector<double> weights;
  double R = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double lambda_scale = 1.0;
  LossKind loss = LossKind::Logistic;
  RegularizerKind reg = RegularizerKind::L2Squared;

  bool operator==(const CoresetFile& other) const;

  WeightedCoreset<double> weighted() const;  // requires indices
  PointCoreset<double> point_coreset() const;  // requires points
};

Json to_json(const CoresetFile& cs);
CoresetFile coreset_from_json(const Json& j);

void write_coreset(const std::string& path, const CoresetFile& cs);
CoresetFile read_coreset(const std::string& path);

struct Report {
  std::string schema = kReportSchema;
  std::string command;
  Json params = Json::object();
  Json results = Json::object();

  bool operator==(const Report& other) const = default;
};

Json to_json(const Report& r);
Report report_from_json(const Json& j);

void write_report(const std::string& path, const Report& r);
Report read_report(const std::string& path);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

// CSV "iter,seconds,objective" with 17 significant digits.
void write_trace_csv(std::ostream& out, const TrainTrace<double>& trace);
void write_trace_csv(const std::string& path, const TrainTrace<double>& trace);
TrainTrace<double> read_trace_csv(std::istream& in);

}  // namespace rlmc::io
