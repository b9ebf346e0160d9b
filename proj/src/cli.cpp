#include "rlmc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <type_traits>
#include <variant>

#include <CLI11.hpp>

#include "rlmc/adversary.hpp"
#include "rlmc/io.hpp"
#include "rlmc/random.hpp"
#include "rlmc/sampler.hpp"
#include "rlmc/sensitivity.hpp"
#include "rlmc/solver.hpp"

namespace rlmc::cli {

using io::Json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoChunkFound:
    case ErrorKind::DegenerateInstance:
    case ErrorKind::ZeroObjective:
      return kDomainError;
    case ErrorKind::NonFinite:
      return kNumericError;
    default:
      return kInputError;
  }
}

ProbeSpec parse_probe_spec(const std::string& text) {
  ProbeSpec spec;
  if (text == "trained") {
    spec.kind = ProbeSpec::Kind::Trained;
    return spec;
  }
  if (text == "zero") {
    spec.kind = ProbeSpec::Kind::Zero;
    return spec;
  }
  if (text.rfind("file:", 0) == 0) {
    spec.kind = ProbeSpec::Kind::File;
    spec.path = text.substr(5);
    if (spec.path.empty()) throw Error(ErrorKind::InvalidParameter, "probe spec 'file:' needs a path");
    return spec;
  }
  if (text.rfind("random:", 0) == 0) {
    const std::string rest = text.substr(7);
    const auto colon = rest.find(':');
    try {
      std::size_t used = 0;
      const std::string count = rest.substr(0, colon);
      const long long k = std::stoll(count, &used);
      if (used != count.size() || k < 1) throw std::invalid_argument("count");
      spec.count = static_cast<std::size_t>(k);
      if (colon != std::string::npos) {
        const std::string norm = rest.substr(colon + 1);
        const double m = std::stod(norm, &used);
        if (used != norm.size() || !(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("norm");
        spec.max_norm = m;
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidParameter, "malformed probe spec '" + text + "'");
    }
    return spec;
  }
  throw Error(ErrorKind::InvalidParameter,
              "probe spec must be random:K[:max-norm], trained, zero or file:PATH; got '" + text + "'");
}

std::vector<Hypothesis<double>> random_probes(Index d, std::size_t count, double R,
                                              std::optional<double> max_norm,
                                              std::uint64_t seed) {
  if (d < 1) throw Error(ErrorKind::InvalidParameter, "probe dimension must be positive");
  const double scale = R > 0.0 ? R : 1.0;
  const double hi = max_norm.value_or(100.0 / scale);
  const double lo = std::min(1e-3 / scale, hi * 1e-5);
  Rng rng(seed);
  std::vector<Hypothesis<double>> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Vector<double> b(d);
    double nb = 0.0;
    while (nb == 0.0) {
      for (Index c = 0; c < d; ++c) b(c) = rng.normal();
      nb = b.norm();
    }
    const double t = count > 1 ? static_cast<double>(j) / static_cast<double>(count - 1) : 1.0;
    const double norm = lo * std::pow(hi / lo, t);
    out.emplace_back(b * (norm / nb));
  }
  return out;
}

std::vector<Hypothesis<double>> load_probes(const std::string& path, Index d) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open probe file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::vector<double>> rows;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    try {
      Json j = Json::parse(text);
      if (j.is_object()) j = j.at("betas");
      rows = j.get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, "probe file '" + path + "': " + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream fields(line);
      std::vector<double> row;
      std::string tok;
      while (fields >> tok) {
        try {
          std::size_t used = 0;
          row.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
          throw ParseError(lineno, "bad probe value '" + tok + "'");
        }
      }
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  std::vector<Hypothesis<double>> out;
  for (const auto& r : rows) {
    if (static_cast<Index>(r.size()) != d)
      throw Error(ErrorKind::InvalidParameter, "probe has " + std::to_string(r.size()) +
                                                   " components, dataset has d = " + std::to_string(d));
    out.emplace_back(Eigen::Map<const Vector<double>>(r.data(), d));
  }
  return out;
}

std::vector<std::uint64_t> parse_sizes(const std::string& text, Index n) {
  auto number = [&](const std::string& s) -> double {
    if (s == "n") return static_cast<double>(n);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidParameter, "bad size '" + s + "' in '" + text + "'");
    }
  };
  std::vector<std::uint64_t> sizes;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::string start_s = text.substr(0, dots);
    const std::string rest = text.substr(dots + 2);
    const auto c1 = rest.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : rest.find(':', c1 + 1);
    if (c2 == std::string::npos || rest.substr(c1 + 1, c2 - c1 - 1) != "geometric")
      throw Error(ErrorKind::InvalidParameter, "range sizes take the form START..END:geometric:RATIO");
    const double start = number(start_s);
    const double end = number(rest.substr(0, c1));
    const double ratio = number(rest.substr(c2 + 1));
    if (!(start >= 1.0) || !(end >= start) || !(ratio > 1.0))
      throw Error(ErrorKind::InvalidParameter, "need 1 <= START <= END and RATIO > 1");
    for (double v = start; std::round(v) <= end; v *= ratio) {
      const auto s = static_cast<std::uint64_t>(std::round(v));
      if (sizes.empty() || sizes.back() != s) sizes.push_back(s);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const double v = number(item);
      if (!(v >= 1.0) || v != std::floor(v))
        throw Error(ErrorKind::InvalidParameter, "sizes must be positive integers");
      sizes.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (sizes.empty()) throw Error(ErrorKind::InvalidParameter, "no sample sizes given");
  return sizes;
}

namespace {

struct DataOptions {
  std::string input;
  std::string format;
  std::string label_column;
  std::vector<std::string> drop;
  std::string loss = "logistic";
  std::string reg = "l2sq";
  double kappa = 0.5;
  double lambda_scale = 1.0;
  unsigned threads = 1;

  void add_to(CLI::App* app, bool with_model = true) {
    app->add_option("--input", input, "dataset path, or synthetic:n=..,d=..,margin=..,noise=..,seed=..")
        ->required();
    app->add_option("--format", format, "csv | svmlight | synthetic (default: inferred)");
    app->add_option("--label-column", label_column, "CSV label column (default: last)");
    app->add_option("--drop", drop, "CSV columns to exclude from the features")->delimiter(',');
    if (with_model) {
      app->add_option("--loss", loss, "logistic | hinge");
      app->add_option("--reg", reg, "l1 | l2 | l2sq");
      app->add_option("--kappa", kappa, "lambda exponent in (0, 1)");
      app->add_option("--lambda-scale", lambda_scale, "lambda = scale * n^kappa");
    }
    app->add_option("--threads", threads, "threads for objective evaluation")
        ->check(CLI::PositiveNumber);
  }

  io::Format resolved_format() const {
    if (!format.empty()) return io::parse_format(format);
    if (input.rfind("synthetic:", 0) == 0) return io::Format::Synthetic;
    const auto dot = input.rfind('.');
    if (dot != std::string::npos && input.substr(dot) == ".csv") return io::Format::Csv;
    return io::Format::SvmLight;
  }

  RlmParams<double> params() const {
    return {parse_loss(loss), parse_regularizer(reg), kappa, lambda_scale};
  }

  io::Dataset load() const {
    return io::load_dataset(input, resolved_format(), {label_column, drop, ','});
  }

  Json to_json(bool with_model = true) const {
    Json j{{"input", input},
           {"format", io::to_string(resolved_format())},
           {"label_column", label_column},
           {"drop", drop},
           {"threads", threads}};
    if (with_model) {
      j["loss"] = loss;
      j["reg"] = reg;
      j["kappa"] = kappa;
      j["lambda_scale"] = lambda_scale;
    }
    return j;
  }
};

struct SolverOptions {
  std::string method = "gd";
  std::size_t max_iters = 1000;
  double grad_tol = 1e-6;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;
  std::string schedule = "invsqrt";

  void add_to(CLI::App* app, bool with_method) {
    if (with_method) app->add_option("--method", method, "gd | sgd");
    app->add_option("--max-iters", max_iters, "full-batch iteration cap");
    app->add_option("--grad-tol", grad_tol, "full-batch gradient-norm tolerance");
    app->add_option("--epochs", epochs, "SGD epochs");
    app->add_option("--batch-size", batch_size, "SGD mini-batch size");
    app->add_option("--learning-rate", learning_rate, "SGD base learning rate");
    app->add_option("--schedule", schedule, "SGD schedule: invsqrt | constant");
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig cfg;
    if (method == "gd" || method == "full") cfg.method = TrainMethod::FullBatch;
    else if (method == "sgd") cfg.method = TrainMethod::Sgd;
    else throw Error(ErrorKind::InvalidParameter, "unknown method '" + method + "'");
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;
    cfg.sgd.epochs = epochs;
    cfg.sgd.batch_size = batch_size;
    cfg.sgd.learning_rate = learning_rate;
    if (schedule == "invsqrt") cfg.sgd.schedule = LearningRateSchedule::InvSqrt;
    else if (schedule == "constant") cfg.sgd.schedule = LearningRateSchedule::Constant;
    else throw Error(ErrorKind::InvalidParameter, "unknown schedule '" + schedule + "'");
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }

  Json to_json() const {
    return {{"method", method},         {"max_iters", max_iters},   {"grad_tol", grad_tol},
            {"epochs", epochs},         {"batch_size", batch_size}, {"learning_rate", learning_rate},
            {"schedule", schedule}};
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json beta_json(const Hypothesis<double>& h) {
  return std::vector<double>(h.beta.data(), h.beta.data() + h.beta.size());
}

void finish_report(const std::string& path, io::Report report, std::ostream& out) {
  if (path.empty()) return;
  io::write_report(path, report);
  out << "report written to " << path << '\n';
}

// ---------------------------------------------------------------- sample

struct SampleCmd {
  DataOptions data;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::uint64_t> size;
  std::uint64_t seed = 0;
  std::string mode = "iid";
  std::string output;

  void add_to(CLI::App* app) {
    data.add_to(app);
    auto* e = app->add_option("--epsilon", epsilon, "target coreset error");
    auto* d = app->add_option("--delta", delta, "failure probability");
    auto* s = app->add_option("--size", size, "explicit sample size q")->check(CLI::PositiveNumber);
    s->excludes(e)->excludes(d);
    app->add_option("--seed", seed, "sampler seed");
    app->add_option("--mode", mode, "iid | reservoir");
    app->add_option("--output", output, "coreset JSON path")->required();
  }

  int run(std::ostream& out) {
    const SampleMode sm = parse_sample_mode(mode);
    if (!size && (!epsilon || !delta))
      throw Error(ErrorKind::InvalidParameter, "give --size or both --epsilon and --delta");
    const io::Dataset ds = data.load();
    const RlmInstance<double> inst = io::make_instance(ds, data.params());
    const double S_prime = default_total_sensitivity(inst.n(), inst.lambda());
    const Index delta_vc = vc_bound(inst.loss(), inst.d());
    std::uint64_t q = 0;
    if (size) {
      q = *size;
    } else {
      const SampleSize ss = sample_size_detail(S_prime, delta_vc, *epsilon, *delta, inst.n());
      q = ss.q;
      if (ss.clamped) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "sample size " << ss.raw << " exceeds n = " << inst.n()
            << "; clamped to the full dataset";
        warn(msg.str());
      }
    }

    io::CoresetFile cf;
    cf.n = inst.n();
    cf.seed = seed;
    cf.rng = Rng::kAlgorithm;
    cf.mode = to_string(sm);
    cf.R = inst.R();
    cf.lambda = inst.lambda();
    cf.kappa = inst.kappa();
    cf.lambda_scale = inst.lambda_scale();
    cf.loss = inst.loss();
    cf.reg = inst.reg();
    if (sm == SampleMode::IidWithReplacement) {
      WeightedCoreset<double> cs = uniform_sample(inst, q, seed);
      cf.q = cs.size();
      cf.indices = std::move(cs.indices);
      cf.weights = std::move(cs.weights);
    } else {
      StreamCoreset<double> sc = stream_sample(inst, q, seed);
      cf.q = sc.coreset.size();
      cf.R = sc.R;
      cf.points = std::move(sc.coreset.points);
      cf.labels = std::move(sc.coreset.labels);
      cf.weights = std::move(sc.coreset.weights);
    }
    io::write_coreset(output, cf);

    out << std::setprecision(17);
    out << "n = " << inst.n() << "\nd = " << inst.d() << "\nq = " << cf.q << "\nS' = " << S_prime
        << "\nlambda = " << inst.lambda() << "\nR = " << inst.R() << '\n';
    if (!cf.weights.empty()) out << "u = " << cf.weights.front() << '\n';
    out << "coreset written to " << output << '\n';
    return kOk;
  }
};


// Index coresets from `sample`, or raw points from the reservoir mode.
using AnyCoreset = std::variant<WeightedCoreset<double>, PointCoreset<double>>;

AnyCoreset coreset_of(const io::CoresetFile& cf) {
  if (cf.indices) return cf.weighted();
  return cf.point_coreset();
}

TrainResult<double> train_on(const RlmInstance<double>& inst, const AnyCoreset& cs,
                             const TrainConfig& cfg) {
  return std::visit(
      [&](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, WeightedCoreset<double>>)
          return train(inst, &c, cfg);
        else
          return train(inst, c, cfg);
      },
      cs);
}

double H_of(const RlmInstance<double>& inst, const AnyCoreset& cs, const Hypothesis<double>& h,
            Exec exec) {
  return std::visit([&](const auto& c) { return approximation_error(inst, c, h, exec); }, cs);
}

double weight_sum_of(const AnyCoreset& cs) {
  return std::visit([](const auto& c) { return c.weight_sum(); }, cs);
}

io::CoresetFile read_matching_coreset(const std::string& path, const io::Dataset& ds) {
  io::CoresetFile cf = io::read_coreset(path);
  if (ds.n() != cf.n)
    throw Error(ErrorKind::SchemaMismatch, "coreset was drawn from n = " + std::to_string(cf.n) +
                                               " points but the dataset has " + std::to_string(ds.n()));
  if (cf.points && cf.points->cols() != ds.d())
    throw Error(ErrorKind::SchemaMismatch, "coreset points have the wrong dimension");
  return cf;
}

// ---------------------------------------------------------------- verify

struct VerifyCmd {
  DataOptions data;
  std::string coreset;
  std::vector<std::string> betas{"random:1000"};
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  SolverOptions solver;
  std::string report;

  void add_to(CLI::App* app) {
    data.add_to(app, false);
    app->add_option("--coreset", coreset, "coreset JSON from `sample`")->required();
    app->add_option("--betas", betas, "probe sets: random:K[:max-norm], trained, zero, file:PATH");
    app->add_option("--seed", seed, "probe seed (set j uses seed + j)");
    app->add_option("--epsilon", epsilon, "tolerance for the weight-sum check")
        ->check(CLI::Range(0.0, 1.0));
    solver.add_to(app, false);
    app->add_option("--report", report, "report JSON path");
  }

  int run(std::ostream& out) {
    std::vector<ProbeSpec> specs;
    for (const auto& b : betas) specs.push_back(parse_probe_spec(b));
    const TrainConfig cfg = [&] {
      TrainConfig c = solver.config(seed);
      c.record_trace = false;
      return c;
    }();
    const io::Dataset ds = data.load();
    const io::CoresetFile cf = read_matching_coreset(coreset, ds);
    const RlmInstance<double> inst =
        io::make_instance(ds, {cf.loss, cf.reg, cf.kappa, cf.lambda_scale});
    if (cf.R != inst.R() && cf.indices) warn("dataset R differs from the R recorded in the coreset");
    const AnyCoreset cs = coreset_of(cf);
    const Exec exec{data.threads};

    std::vector<Hypothesis<double>> probes;
    std::vector<std::string> source;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const ProbeSpec& p = specs[s];
      std::vector<Hypothesis<double>> batch;
      if (p.kind == ProbeSpec::Kind::Random)
        batch = random_probes(inst.d(), p.count, inst.R(), p.max_norm, seed + s);
      else if (p.kind == ProbeSpec::Kind::Zero)
        batch.push_back(Hypothesis<double>::zero(inst.d()));
      else if (p.kind == ProbeSpec::Kind::File)
        batch = load_probes(p.path, inst.d());
      else
        batch.push_back(train_on(inst, cs, cfg).hypothesis);
      for (auto& h : batch) {
        probes.push_back(std::move(h));
        source.push_back(betas[s]);
      }
    }

    Json per_set = Json::object();
    double max_H = 0.0;
    double sum_H = 0.0;
    std::size_t argmax = 0;
    std::vector<double> hs;
    hs.reserve(probes.size());
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double H = H_of(inst, cs, probes[j], exec);
      hs.push_back(H);
      if (H > max_H || j == 0) {
        max_H = H;
        argmax = j;
      }
      auto& entry = per_set[source[j]];
      if (entry.is_null()) entry = {{"count", 0}, {"max_H", H}};
      entry["count"] = entry["count"].get<std::size_t>() + 1;
      entry["max_H"] = std::max(entry["max_H"].get<double>(), H);
    }
    sum_H = pairwise_sum(hs);
    const double mean_H = probes.empty() ? 0.0 : sum_H / static_cast<double>(probes.size());
    const double W = weight_sum_of(cs);
    const auto nn = static_cast<double>(inst.n());
    const bool weight_ok = W >= (1.0 - epsilon) * nn && W <= (1.0 + epsilon) * nn;

    io::Report rep;
    rep.command = "verify";
    rep.params = data.to_json(false);
    rep.params.update(Json{{"coreset", coreset}, {"betas", betas}, {"seed", seed},
                           {"epsilon", epsilon}, {"solver", solver.to_json()},
                           {"probe_semantics", "max over probes is a lower bound on sup H"}});
    rep.results = {{"n", inst.n()},
                   {"q", cf.q},
                   {"probes", probes.size()},
                   {"max_H", max_H},
                   {"mean_H", mean_H},
                   {"argmax", {{"index", argmax},
                               {"source", probes.empty() ? "" : source[argmax]},
                               {"norm", probes.empty() ? 0.0 : probes[argmax].norm()}}},
                   {"per_set", per_set},
                   {"weight_sum", W},
                   {"weight_check", {{"epsilon", epsilon}, {"pass", weight_ok}}}};

    out << std::setprecision(17) << "probes = " << probes.size() << "\nmax H = " << max_H
        << "\nmean H = " << mean_H << "\nweight sum = " << W << " (n = " << inst.n() << ", "
        << (weight_ok ? "within" : "outside") << " (1 +/- " << std::setprecision(6) << epsilon
        << ") n)\n";
    finish_report(report, rep, out);
    return kOk;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCmd {
  DataOptions data;
  std::string sizes = "50..n:geometric:1.1";
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  SolverOptions solver;
  std::string report;
  std::string csv;

  void add_to(CLI::App* app) {
    data.add_to(app);
    app->add_option("--sizes", sizes, "list \"50,100\" or START..END:geometric:RATIO (END may be n)");
    app->add_option("--trials", trials, "trials per size; trial t uses seed + t")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "base seed");
    solver.add_to(app, false);
    app->add_option("--report", report, "summary JSON path");
    app->add_option("--csv", csv, "per-trial CSV path (default: stdout)");
  }

  int run(std::ostream& out) {
    const TrainConfig base = solver.config(seed);
    const io::Dataset ds = data.load();
    const RlmInstance<double> inst = io::make_instance(ds, data.params());
    const std::vector<std::uint64_t> qs = parse_sizes(sizes, inst.n());
    const Exec exec{data.threads};

    std::ostringstream rows;
    rows << "size,trial,H,seconds\n" << std::setprecision(17);
    Json summary = Json::array();
    for (const std::uint64_t q : qs) {
      std::vector<double> hs;
      for (std::size_t t = 0; t < trials; ++t) {
        TrainConfig cfg = base;
        cfg.seed = seed + t;
        cfg.record_trace = false;
        const auto t0 = std::chrono::steady_clock::now();
        const WeightedCoreset<double> cs = uniform_sample(inst, q, seed + t);
        const TrainResult<double> r = train(inst, &cs, cfg);
        const double secs = seconds_since(t0);
        const double H = approximation_error(inst, cs, r.hypothesis, exec);
        hs.push_back(H);
        rows << q << ',' << t << ',' << H << ',' << secs << '\n';
      }
      const double mean = pairwise_sum(hs) / static_cast<double>(hs.size());
      double var = 0.0;
      for (double h : hs) var += (h - mean) * (h - mean);
      const double sd = hs.size() > 1 ? std::sqrt(var / static_cast<double>(hs.size() - 1)) : 0.0;
      summary.push_back({{"size", q}, {"mean_H", mean}, {"std_H", sd}, {"H", hs}});
    }

    if (csv.empty()) {
      out << rows.str();
    } else {
      std::ofstream f(csv, std::ios::trunc);
      if (!f) throw Error(ErrorKind::Io, "cannot open '" + csv + "' for writing");
      f << rows.str();
      out << "per-trial rows written to " << csv << '\n';
    }
    io::Report rep;
    rep.command = "sweep";
    rep.params = data.to_json();
    rep.params.update(Json{{"sizes", sizes}, {"trials", trials}, {"seed", seed},
                           {"solver", solver.to_json()},
                           {"H_evaluated_at", "coreset-trained hypothesis"}});
    rep.results = {{"n", inst.n()}, {"lambda", inst.lambda()}, {"sizes", summary}};
    finish_report(report, rep, out);
    return kOk;
  }
};

// ---------------------------------------------------------------- adversary

struct AdversaryCmd {
  std::string kind;
  Index n = 0;
  double kappa = 0.5;
  double gamma = 0.4;
  std::optional<Index> k;
  double c = 1.0;
  std::optional<double> norm_override;
  std::string loss = "logistic";
  unsigned threads = 1;
  std::string report;

  void add_to(CLI::App* app) {
    app->add_option("--kind", kind, "two-cluster | circle")
        ->required()
        ->check(CLI::IsMember({"two-cluster", "circle"}));
    app->add_option("--n", n, "number of points")->required()->check(CLI::PositiveNumber);
    app->add_option("--kappa", kappa, "lambda = n^kappa");
    app->add_option("--gamma", gamma, "coreset-size exponent");
    app->add_option("--k", k, "circle coreset size (default c n^((1-kappa)/5 - gamma))")
        ->check(CLI::PositiveNumber);
    app->add_option("--c", c, "constant in the default k");
    app->add_option("--norm-override", norm_override, "circle: |beta_A| instead of the default");
    app->add_option("--loss", loss, "logistic | hinge");
    app->add_option("--threads", threads, "threads for the circle sums")->check(CLI::PositiveNumber);
    app->add_option("--report", report, "report JSON path");
  }

  int run(std::ostream& out) {
    const LossKind lk = parse_loss(loss);
    io::Report rep;
    rep.command = "adversary";
    rep.params = {{"kind", kind},   {"n", n},       {"kappa", kappa},
                  {"gamma", gamma}, {"loss", loss}, {"threads", threads}};
    if (k) rep.params["k"] = *k;
    rep.params["c"] = c;
    if (norm_override) rep.params["norm_override"] = *norm_override;
    out << std::setprecision(17);

    if (kind == "two-cluster") {
      const adversary::TwoClusterInstance inst = adversary::gen_two_cluster(n, kappa, gamma, lk);
      const double b0 = adversary::beta0(n, gamma).beta(0);
      const Index cs = adversary::two_cluster_sample_count(n, kappa, gamma);
      const double u = static_cast<double>(n) / static_cast<double>(cs);
      const double H = adversary::two_cluster_H(inst, true, cs, u, b0);
      const double H_b = adversary::two_cluster_H(inst, false, cs, u, b0);
      const adversary::Containment con = adversary::two_cluster_containment(inst, cs);
      rep.results = {{"instance", "two-cluster"},
                     {"H", H},
                     {"H_sample_in_B", H_b},
                     {"r1", nullptr},
                     {"r2", nullptr},
                     {"chunk", nullptr},
                     {"beta_norm", b0},
                     {"lambda", inst.lambda},
                     {"count_a", inst.count_a},
                     {"count_b", inst.count_b},
                     {"c", cs},
                     {"u", u},
                     {"p_contained_bound", con.bound},
                     {"p_contained_exact", con.exact}};
      out << "H(beta0) = " << H << " with C inside A (c = " << cs << ", u = " << u << ")\n"
          << "P[C inside A] = " << con.exact << " >= " << con.bound << '\n';
    } else {
      const adversary::CircleInstance inst = adversary::gen_circle(n, kappa, lk);
      const Index kk = k.value_or(adversary::default_k(n, kappa, gamma, c));
      adversary::find_chunk(n, kk, {});  // rejects k > n / 8 before any allocation
      const WeightedCoreset<double> cs = adversary::evenly_spaced_coreset(n, kk);
      const adversary::Chunk ch = adversary::find_chunk(n, kk, cs.indices);
      const double norm = norm_override.value_or(adversary::default_target_norm(n, gamma, kk, inst.lambda));
      const Hypothesis<double> h = adversary::chunk_hypothesis(ch, norm);
      const Exec exec{threads};
      const adversary::CircleEvaluation ev = adversary::circle_evaluate(inst, cs, h, exec);
      const double sq = h.parameters().squaredNorm();
      const double r1 = inst.lambda * sq / ev.loss_all;
      const double r2 = ev.loss_coreset / ev.loss_all;
      rep.results = {{"instance", "circle"},
                     {"H", ev.H},
                     {"r1", r1},
                     {"r2", r2},
                     {"k", kk},
                     {"lambda", inst.lambda},
                     {"beta_norm", std::sqrt(sq)},
                     {"beta", {h.beta(0), h.beta(1), *h.bias}},
                     {"full", ev.full},
                     {"coreset", ev.coreset},
                     {"chunk", {{"start_index", ch.start_index},
                                {"length", ch.length},
                                {"window_start", ch.window_start},
                                {"window_length", ch.window_length},
                                {"guard", ch.guard},
                                {"center_angle", ch.center_angle},
                                {"half_angle", ch.half_angle},
                                {"theta", ch.theta}}}};
      out << "H(beta_A) = " << ev.H << " (k = " << kk << ", |beta_A| = " << std::sqrt(sq) << ")\n"
          << "r1 = " << r1 << "\nr2 = " << r2 << '\n';
    }
    finish_report(report, rep, out);
    return kOk;
  }
};

// ---------------------------------------------------------------- train

struct TrainCmd {
  DataOptions data;
  SolverOptions solver;
  std::string coreset;
  std::string trace;
  std::uint64_t seed = 0;
  std::string report;

  void add_to(CLI::App* app) {
    data.add_to(app);
    solver.add_to(app, true);
    app->add_option("--coreset", coreset, "train on this coreset; its loss, reg and lambda apply");
    app->add_option("--trace", trace, "trace CSV path (iter, seconds, objective)");
    app->add_option("--seed", seed, "SGD seed");
    app->add_option("--report", report, "report JSON path");
  }

  int run(std::ostream& out) {
    TrainConfig cfg = solver.config(seed);
    cfg.record_trace = !trace.empty();
    const io::Dataset ds = data.load();
    std::optional<io::CoresetFile> cf;
    RlmParams<double> params = data.params();
    if (!coreset.empty()) {
      cf = read_matching_coreset(coreset, ds);
      params = {cf->loss, cf->reg, cf->kappa, cf->lambda_scale};
    }
    const RlmInstance<double> inst = io::make_instance(ds, params);
    const TrainResult<double> r =
        cf ? train_on(inst, coreset_of(*cf), cfg) : train(inst, cfg);
    const double F = full_objective(inst, r.hypothesis, Exec{data.threads});
    if (!trace.empty()) io::write_trace_csv(trace, r.trace);

    io::Report rep;
    rep.command = "train";
    rep.params = data.to_json();
    rep.params.update(Json{{"solver", solver.to_json()}, {"coreset", coreset}, {"trace", trace},
                           {"seed", seed}});
    rep.results = {{"objective", F},
                   {"training_objective", r.objective},
                   {"iterations", r.iterations},
                   {"grad_norm", r.grad_norm},
                   {"converged", r.converged},
                   {"seconds", r.seconds},
                   {"beta", beta_json(r.hypothesis)}};
    out << std::setprecision(17) << "F = " << F << "\niterations = " << r.iterations
        << "\nconverged = " << (r.converged ? "yes" : "no") << "\nseconds = " << r.seconds << '\n';
    if (!trace.empty()) out << "trace written to " << trace << '\n';
    finish_report(report, rep, out);
    return kOk;
  }
};

// ---------------------------------------------------------------- bench

struct BenchCmd {
  DataOptions data;
  SolverOptions solver;
  std::optional<std::uint64_t> size;
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  double tolerance = 0.05;
  std::string trace;
  std::string report;

  void add_to(CLI::App* app) {
    data.add_to(app);
    solver.add_to(app, false);
    app->add_option("--size", size, "coreset size (default ceil(20 sqrt(n)))")
        ->check(CLI::PositiveNumber);
    app->add_option("--trials", trials, "seeded trials; trial t uses seed + t")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "base seed");
    app->add_option("--tolerance", tolerance, "allowed relative gap to the full-data optimum");
    app->add_option("--trace", trace, "trace CSV prefix: PREFIX_{coreset_gd,full_sgd}_T.csv");
    app->add_option("--report", report, "report JSON path");
  }

  int run(std::ostream& out) {
    TrainConfig gd = solver.config(seed);
    gd.method = TrainMethod::FullBatch;
    TrainConfig sgd = gd;
    sgd.method = TrainMethod::Sgd;
    const io::Dataset ds = data.load();
    const RlmInstance<double> inst = io::make_instance(ds, data.params());
    const Exec exec{data.threads};
    const std::uint64_t q =
        size.value_or(static_cast<std::uint64_t>(std::ceil(20.0 * std::sqrt(static_cast<double>(inst.n())))));

    TrainConfig ref_cfg = gd;
    ref_cfg.record_trace = false;
    const TrainResult<double> ref = train(inst, ref_cfg);
    const double F_opt = full_objective(inst, ref.hypothesis, exec);

    Json runs = Json::array();
    std::size_t wins = 0;
    out << std::setprecision(6);
    for (std::size_t t = 0; t < trials; ++t) {
      TrainConfig c_cfg = gd;
      c_cfg.seed = seed + t;
      c_cfg.record_trace = !trace.empty();
      TrainConfig s_cfg = sgd;
      s_cfg.seed = seed + t;
      s_cfg.record_trace = !trace.empty();

      const auto t0 = std::chrono::steady_clock::now();
      const WeightedCoreset<double> cs = uniform_sample(inst, q, seed + t);
      const double sample_secs = seconds_since(t0);
      const TrainResult<double> rc = train(inst, &cs, c_cfg);
      const double core_secs = sample_secs + rc.seconds;
      const TrainResult<double> rs = train(inst, s_cfg);

      const double F_core = full_objective(inst, rc.hypothesis, exec);
      const double F_sgd = full_objective(inst, rs.hypothesis, exec);
      const double gap_core = F_core / F_opt - 1.0;
      const double gap_sgd = F_sgd / F_opt - 1.0;
      const bool win = gap_core <= tolerance && core_secs < rs.seconds;
      wins += win ? 1 : 0;
      if (!trace.empty()) {
        io::write_trace_csv(trace + "_coreset_gd_" + std::to_string(t) + ".csv", rc.trace);
        io::write_trace_csv(trace + "_full_sgd_" + std::to_string(t) + ".csv", rs.trace);
      }
      runs.push_back({{"trial", t},
                      {"coreset_gd", {{"objective", F_core}, {"gap", gap_core},
                                      {"seconds", core_secs}, {"iterations", rc.iterations}}},
                      {"full_sgd", {{"objective", F_sgd}, {"gap", gap_sgd},
                                    {"seconds", rs.seconds}, {"iterations", rs.iterations}}},
                      {"coreset_wins", win}});
      out << "trial " << t << ": coreset+gd gap " << gap_core << " in " << core_secs
          << " s; full+sgd gap " << gap_sgd << " in " << rs.seconds << " s\n";
    }

    io::Report rep;
    rep.command = "bench";
    rep.params = data.to_json();
    rep.params.update(Json{{"solver", solver.to_json()}, {"size", q}, {"trials", trials},
                           {"seed", seed}, {"tolerance", tolerance}, {"trace", trace}});
    rep.results = {{"n", inst.n()},
                   {"q", q},
                   {"reference_objective", F_opt},
                   {"reference_seconds", ref.seconds},
                   {"trials", runs},
                   {"coreset_wins", wins}};
    out << "coreset+gd within " << tolerance << " and faster in " << wins << " of " << trials
        << " trials\n";
    finish_report(report, rep, out);
    return kOk;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uniform-sampling coresets for regularized logistic regression and SVM"};
  app.require_subcommand(1);

  SampleCmd sample;
  VerifyCmd verify;
  SweepCmd sweep;
  AdversaryCmd adv;
  TrainCmd trainc;
  BenchCmd bench;
  auto* s_sample = app.add_subcommand("sample", "draw a uniform coreset and write it as JSON");
  auto* s_verify = app.add_subcommand("verify", "measure H over probe hypotheses");
  auto* s_sweep = app.add_subcommand("sweep", "H of coreset-trained models across sample sizes");
  auto* s_adv = app.add_subcommand("adversary", "evaluate a lower-bound instance");
  auto* s_train = app.add_subcommand("train", "train on the full data or a coreset");
  auto* s_bench = app.add_subcommand("bench", "coreset + GD against full-data SGD");
  sample.add_to(s_sample);
  verify.add_to(s_verify);
  sweep.add_to(s_sweep);
  adv.add_to(s_adv);
  trainc.add_to(s_train);
  bench.add_to(s_bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  WarningHandler previous = set_warning_handler([&err](const std::string& m) {
    err << "warning: " << m << '\n';
  });
  int code = kOk;
  try {
    if (*s_sample) code = sample.run(out);
    else if (*s_verify) code = verify.run(out);
    else if (*s_sweep) code = sweep.run(out);
    else if (*s_adv) code = adv.run(out);
    else if (*s_train) code = trainc.run(out);
    else if (*s_bench) code = bench.run(out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    code = exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }
  set_warning_handler(std::move(previous));
  return code;
}

}  // namespace rlmc::cli
