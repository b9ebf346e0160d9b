#include "rlmc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>

#include "rlmc/random.hpp"

namespace rlmc::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

void finish_rows(Dataset& ds) {
  ds.R = 0.0;
  for (Index i = 0; i < ds.n(); ++i) ds.R = std::max(ds.R, row_norm(ds.points.row(i)));
}

// Splits one CSV record; double quotes group a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

}  // namespace

const char* to_string(Format f) noexcept {
  switch (f) {
    case Format::Csv: return "csv";
    case Format::SvmLight: return "svmlight";
    case Format::Synthetic: return "synthetic";
  }
  return "unknown";
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "svmlight" || name == "libsvm") return Format::SvmLight;
  if (name == "synthetic") return Format::Synthetic;
  throw Error(ErrorKind::InvalidParameter, "unknown format '" + name + "'");
}

Dataset parse_svmlight(std::istream& in) {
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;
  bool saw_zero = false;
  bool saw_minus = false;
  Index d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;

    std::istringstream tokens{std::string(body)};
    std::string tok;
    tokens >> tok;
    const auto label = to_double(tok);
    if (!label) throw ParseError(lineno, "bad label '" + tok + "'");
    if (*label == 0.0) {
      saw_zero = true;
    } else if (*label == -1.0) {
      saw_minus = true;
    } else if (*label != 1.0) {
      throw Error(ErrorKind::LabelError,
                  "line " + std::to_string(lineno) + ": label '" + tok + "' is not 0, 1 or -1");
    }
    if (saw_zero && saw_minus)
      throw Error(ErrorKind::LabelError,
                  "line " + std::to_string(lineno) + ": labels mix the {0,1} and {-1,1} conventions");
    labels.push_back(*label == 1.0 ? 1.0 : -1.0);

    std::vector<std::pair<Index, double>> row;
    while (tokens >> tok) {
      if (tok.rfind("qid:", 0) == 0) continue;
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected index:value, got '" + tok + "'");
      const auto idx = to_integer(std::string_view(tok).substr(0, colon));
      const auto val = to_double(std::string_view(tok).substr(colon + 1));
      if (!idx || !val) throw ParseError(lineno, "malformed feature '" + tok + "'");
      if (*idx < 1) throw ParseError(lineno, "feature index must be >= 1");
      if (!std::isfinite(*val)) throw ParseError(lineno, "non-finite feature value");
      const auto j = static_cast<Index>(*idx);
      if (!row.empty() && j <= row.back().first) {
        const bool dup = std::any_of(row.begin(), row.end(), [&](const auto& e) { return e.first == j; });
        if (dup) throw ParseError(lineno, "duplicate feature index " + std::to_string(j));
      }
      row.emplace_back(j, *val);
      d = std::max(d, j);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "svmlight input has no records");

  Dataset ds;
  ds.points = PointMatrix<double>::Zero(static_cast<Index>(rows.size()), d);
  ds.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) ds.points(static_cast<Index>(i), j - 1) = v;
    ds.labels(static_cast<Index>(i)) = labels[i];
  }
  finish_rows(ds);
  return ds;
}

Dataset load_svmlight(const std::string& path) {
  auto in = open_input(path);
  return parse_svmlight(in);
}

Dataset parse_csv(std::istream& in, const CsvOptions& opts) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    header = split_record(line, opts.delimiter);
    break;
  }
  if (header.empty()) throw Error(ErrorKind::EmptyDataset, "CSV input has no header");

  std::size_t label_col = header.size() - 1;
  if (!opts.label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), opts.label_column);
    if (it == header.end())
      throw ParseError(lineno, "no column named '" + opts.label_column + "'");
    label_col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<bool> is_feature(header.size(), true);
  is_feature[label_col] = false;
  for (const auto& name : opts.drop) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw Error(ErrorKind::InvalidParameter, "cannot drop unknown column '" + name + "'");
    is_feature[static_cast<std::size_t>(it - header.begin())] = false;
  }

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (is_feature[c]) ds.feature_names.push_back(header[c]);
  const auto d = static_cast<Index>(ds.feature_names.size());

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, opts.delimiter);
    if (fields.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_col) {
        raw_labels.push_back(fields[c]);
      } else if (is_feature[c]) {
        const auto v = to_double(fields[c]);
        if (!v || !std::isfinite(*v))
          throw ParseError(lineno, "column '" + header[c] + "' value '" + fields[c] + "' is not a finite number");
        values.push_back(*v);
      }
    }
  }
  if (raw_labels.empty()) throw Error(ErrorKind::EmptyDataset, "CSV input has no records");

  std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() > 2)
    throw Error(ErrorKind::NonBinaryLabels,
                "label column has " + std::to_string(distinct.size()) + " distinct values");
  std::map<std::string, double> mapping;
  bool numeric = true;
  std::vector<std::pair<double, std::string>> parsed;
  for (const auto& s : distinct) {
    const auto v = to_double(s);
    if (!v) numeric = false;
    else parsed.emplace_back(*v, s);
  }
  if (numeric) {
    std::sort(parsed.begin(), parsed.end());
    if (parsed.size() == 2 && parsed[0].first == parsed[1].first)
      throw Error(ErrorKind::NonBinaryLabels, "label values '" + parsed[0].second + "' and '" +
                                                  parsed[1].second + "' are numerically equal");
    if (parsed.size() == 1) {
      mapping[parsed[0].second] = parsed[0].first <= 0.0 ? -1.0 : 1.0;
    } else {
      mapping[parsed[0].second] = -1.0;
      mapping[parsed[1].second] = 1.0;
    }
  } else {
    auto it = distinct.begin();
    mapping[*it] = -1.0;
    if (distinct.size() == 2) mapping[*std::next(it)] = 1.0;
  }

  const auto n = static_cast<Index>(raw_labels.size());
  ds.points.resize(n, d);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.points(i, j) = values[static_cast<std::size_t>(i * d + j)];
    ds.labels(i) = mapping.at(raw_labels[static_cast<std::size_t>(i)]);
  }
  finish_rows(ds);
  return ds;
}

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  auto in = open_input(path);
  return parse_csv(in, opts);
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  std::string_view rest(text);
  if (rest.rfind("synthetic:", 0) == 0) rest.remove_prefix(10);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvalidParameter, "synthetic spec item '" + std::string(item) + "' lacks '='");
    const auto key = trim(item.substr(0, eq));
    const auto value = item.substr(eq + 1);
    auto bad = [&] {
      return Error(ErrorKind::InvalidParameter,
                   "bad value for synthetic key '" + std::string(key) + "'");
    };
    if (key == "n" || key == "d" || key == "seed") {
      const auto v = to_integer(value);
      if (!v || *v < 0) throw bad();
      if (key == "n") spec.n = static_cast<Index>(*v);
      else if (key == "d") spec.d = static_cast<Index>(*v);
      else spec.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "margin" || key == "noise") {
      const auto v = to_double(value);
      if (!v) throw bad();
      (key == "margin" ? spec.margin : spec.noise) = *v;
    } else {
      throw Error(ErrorKind::InvalidParameter, "unknown synthetic key '" + std::string(key) + "'");
    }
  }
  return spec;
}

Dataset gen_synthetic(Index n, Index d, double margin, double noise, std::uint64_t seed) {
  if (n < 1 || d < 1) throw Error(ErrorKind::InvalidParameter, "synthetic data needs n, d >= 1");
  if (!(noise >= 0.0 && noise <= 1.0))
    throw Error(ErrorKind::InvalidParameter, "noise must lie in [0, 1]");
  if (!(margin >= 0.0) || !std::isfinite(margin))
    throw Error(ErrorKind::InvalidParameter, "margin must be finite and nonnegative");

  Rng rng(seed);
  Vector<double> w(d);
  for (Index j = 0; j < d; ++j) w(j) = rng.normal();
  w /= w.norm();

  Dataset ds;
  ds.points.resize(n, d);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.points(i, j) = rng.normal();
    const double y = ds.points.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    ds.points.row(i) += (margin * y) * w.transpose();
    ds.labels(i) = rng.uniform() < noise ? -y : y;
  }
  finish_rows(ds);
  ds.w_star = std::move(w);
  return ds;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  return gen_synthetic(spec.n, spec.d, spec.margin, spec.noise, spec.seed);
}

Dataset load_dataset(const std::string& path, Format format, const CsvOptions& opts) {
  switch (format) {
    case Format::Csv: return load_csv(path, opts);
    case Format::SvmLight: return load_svmlight(path);
    case Format::Synthetic: return gen_synthetic(parse_synthetic_spec(path));
  }
  throw Error(ErrorKind::InvalidParameter, "unknown format");
}

RlmInstance<double> make_instance(Dataset data, const RlmParams<double>& params) {
  return RlmInstance<double>(std::move(data.points), std::move(data.labels), params);
}

bool CoresetFile::operator==(const CoresetFile& o) const {
  auto same_points = [](const auto& a, const auto& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
  };
  return schema == o.schema && n == o.n && q == o.q && seed == o.seed && rng == o.rng &&
         mode == o.mode && indices == o.indices && same_points(points, o.points) &&
         same_points(labels, o.labels) && weights == o.weights && R == o.R && lambda == o.lambda &&
         kappa == o.kappa && lambda_scale == o.lambda_scale && loss == o.loss && reg == o.reg;
}

WeightedCoreset<double> CoresetFile::weighted() const {
  if (!indices) throw Error(ErrorKind::SchemaMismatch, "coreset stores points, not indices");
  WeightedCoreset<double> cs{*indices, weights};
  cs.validate(n);
  return cs;
}

PointCoreset<double> CoresetFile::point_coreset() const {
  if (!points || !labels) throw Error(ErrorKind::SchemaMismatch, "coreset stores indices, not points");
  return {*points, *labels, weights};
}

Json to_json(const CoresetFile& cs) {
  Json j;
  j["schema"] = cs.schema;
  j["n"] = cs.n;
  j["q"] = cs.q;
  j["seed"] = cs.seed;
  j["rng"] = cs.rng;
  j["mode"] = cs.mode;
  if (cs.indices) j["indices"] = *cs.indices;
  if (cs.points) {
    Json rows = Json::array();
    for (Index i = 0; i < cs.points->rows(); ++i) {
      Json row = Json::array();
      for (Index k = 0; k < cs.points->cols(); ++k) row.push_back((*cs.points)(i, k));
      rows.push_back(std::move(row));
    }
    j["points"] = std::move(rows);
  }
  if (cs.labels) j["labels"] = std::vector<double>(cs.labels->begin(), cs.labels->end());
  j["weights"] = cs.weights;
  j["R"] = cs.R;
  j["lambda"] = cs.lambda;
  j["kappa"] = cs.kappa;
  j["lambda_scale"] = cs.lambda_scale;
  j["loss"] = to_string(cs.loss);
  j["reg"] = to_string(cs.reg);
  return j;
}

CoresetFile coreset_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string())
    throw Error(ErrorKind::SchemaMismatch, "coreset JSON has no schema field");
  const auto schema = j["schema"].get<std::string>();
  if (schema != kCoresetSchema)
    throw Error(ErrorKind::SchemaMismatch,
                "unsupported coreset schema '" + schema + "' (expected " + kCoresetSchema + ")");
  CoresetFile cs;
  try {
    cs.n = j.at("n").get<Index>();
    cs.q = j.at("q").get<std::uint64_t>();
    cs.seed = j.at("seed").get<std::uint64_t>();
    cs.rng = j.at("rng").get<std::string>();
    cs.mode = j.at("mode").get<std::string>();
    if (j.contains("indices")) cs.indices = j["indices"].get<std::vector<Index>>();
    if (j.contains("points")) {
      const auto rows = j["points"].get<std::vector<std::vector<double>>>();
      const Index d = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
      PointMatrix<double> x(static_cast<Index>(rows.size()), d);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Index>(rows[i].size()) != d)
          throw Error(ErrorKind::SchemaMismatch, "coreset points are ragged");
        for (Index k = 0; k < d; ++k) x(static_cast<Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
      }
      cs.points = std::move(x);
    }
    if (j.contains("labels")) {
      const auto l = j["labels"].get<std::vector<double>>();
      cs.labels = Eigen::Map<const Vector<double>>(l.data(), static_cast<Index>(l.size()));
    }
    cs.weights = j.at("weights").get<std::vector<double>>();
    cs.R = j.at("R").get<double>();
    cs.lambda = j.at("lambda").get<double>();
    cs.kappa = j.at("kappa").get<double>();
    cs.lambda_scale = j.value("lambda_scale", 1.0);
    cs.loss = parse_loss(j.at("loss").get<std::string>());
    cs.reg = parse_regularizer(j.at("reg").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("malformed coreset JSON: ") + e.what());
  }
  if (cs.indices.has_value() == cs.points.has_value())
    throw Error(ErrorKind::SchemaMismatch, "coreset must hold exactly one of indices and points");
  if (cs.points && (!cs.labels || cs.labels->size() != cs.points->rows()))
    throw Error(ErrorKind::SchemaMismatch, "coreset points and labels differ in length");
  const std::size_t m = cs.indices ? cs.indices->size() : static_cast<std::size_t>(cs.points->rows());
  if (cs.weights.size() != m)
    throw Error(ErrorKind::SchemaMismatch, "coreset weights and entries differ in length");
  return cs;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
}

void write_coreset(const std::string& path, const CoresetFile& cs) { write_json(path, to_json(cs)); }

CoresetFile read_coreset(const std::string& path) { return coreset_from_json(read_json(path)); }

Json to_json(const Report& r) {
  return Json{{"schema", r.schema}, {"command", r.command}, {"params", r.params}, {"results", r.results}};
}

Report report_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kReportSchema)
    throw Error(ErrorKind::SchemaMismatch, std::string("report schema must be ") + kReportSchema);
  Report r;
  try {
    r.command = j.at("command").get<std::string>();
    r.params = j.at("params");
    r.results = j.at("results");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

void write_report(const std::string& path, const Report& r) { write_json(path, to_json(r)); }

Report read_report(const std::string& path) { return report_from_json(read_json(path)); }

void write_trace_csv(std::ostream& out, const TrainTrace<double>& trace) {
  out << "iter,seconds,objective\n" << std::setprecision(17);
  for (const auto& p : trace.points) out << p.iter << ',' << p.seconds << ',' << p.objective << '\n';
}

void write_trace_csv(const std::string& path, const TrainTrace<double>& trace) {
  auto out = open_output(path);
  write_trace_csv(out, trace);
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

TrainTrace<double> read_trace_csv(std::istream& in) {
  TrainTrace<double> trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || trim(line).empty()) continue;
    const auto f = split_record(line, ',');
    if (f.size() != 3) throw ParseError(lineno, "trace rows have three fields");
    const auto it = to_integer(f[0]);
    const auto s = to_double(f[1]);
    const auto o = to_double(f[2]);
    if (!it || !s || !o) throw ParseError(lineno, "malformed trace row");
    trace.points.push_back({static_cast<std::size_t>(*it), *s, *o});
  }
  return trace;
}

}  // namespace rlmc::io
