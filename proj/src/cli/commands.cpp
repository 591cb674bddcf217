#include "proxama/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "proxama/errors.hpp"
#include "proxama/io.hpp"
#include "proxama/metrics.hpp"
#include "proxama/plot.hpp"
#include "proxama/svm.hpp"
#include "proxama/tv.hpp"

namespace proxama::cli {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommonColumns = {"iter",        "objective_primal", "objective_dual",
                                                 "feasibility", "kkt_f",            "kkt_g"};

std::vector<std::optional<double>> common_cells(const TraceRow& r) {
  return {static_cast<double>(r.iter), r.objective_primal, r.objective_dual,
          r.feasibility,               r.kkt_f,            r.kkt_g};
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::vector<std::string> expand(const std::string& value, const std::vector<std::string>& all,
                                const char* what) {
  if (value == "both") return all;
  for (const auto& a : all) {
    if (a == value) return {value};
  }
  throw ConfigError(std::string("unknown ") + what + " '" + value + "'");
}

void write_meta(const std::string& out_dir, json meta) {
  meta["written_at"] = utc_timestamp();
  io::write_text(join_path(out_dir, "run_meta.json"), meta.dump(2) + "\n");
}

// Config-file overrides ------------------------------------------------------

class JsonOverrides {
 public:
  explicit JsonOverrides(const json& j) : j_(j) {
    if (!j_.is_object()) throw ConfigError("config file must contain a JSON object");
  }

  template <class T>
  void take(const char* key, T& dst) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      dst = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::set<std::string> known_;
};

json load_config(const std::string& path) {
  const std::string text = io::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void apply_config(const std::string& path, TvOptions& o) {
  const json j = load_config(path);
  JsonOverrides ov(j);
  ov.take("input", o.input);
  ov.take("synthetic", o.synthetic);
  ov.take("size", o.size);
  ov.take("tv", o.variant);
  ov.take("algo", o.algo);
  ov.take("lambda", o.lambda);
  ov.take("c", o.c);
  ov.take("sigma", o.sigma);
  ov.take("epsilon", o.epsilon);
  ov.take("max_iter", o.max_iter);
  ov.take("tol", o.tol);
  ov.take("blur_size", o.blur_size);
  ov.take("blur_std", o.blur_std);
  ov.take("noise", o.noise);
  ov.take("init", o.init);
  ov.take("inner_iters", o.inner_iters);
  ov.take("inner_tol", o.inner_tol);
  ov.take("seed", o.seed);
  ov.take("out", o.out);
  ov.take("plot", o.plot);
  ov.finish();
}

void apply_preset(const std::string& name, SvmOptions& o) {
  if (name.empty()) return;
  if (name == "table1") {
    o.C = 1.0, o.sigma = 0.2, o.tau = 10.0;
  } else if (name == "table2") {
    o.C = 1.0, o.sigma = 0.25, o.tau = 102.0;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected table1 or table2)");
  }
}

void apply_config(const std::string& path, SvmOptions& o) {
  const json j = load_config(path);
  JsonOverrides ov(j);
  std::string preset;
  ov.take("preset", preset);
  apply_preset(preset, o);
  if (!preset.empty()) o.preset = preset;
  ov.take("train", o.train);
  ov.take("test", o.test);
  ov.take("synthetic", o.synthetic);
  ov.take("n_train", o.n_train);
  ov.take("n_test", o.n_test);
  ov.take("C", o.C);
  ov.take("sigma", o.sigma);
  ov.take("tau", o.tau);
  ov.take("c", o.c);
  ov.take("epsilon", o.epsilon);
  ov.take("algo", o.algo);
  ov.take("max_iter", o.max_iter);
  ov.take("rmse_target", o.rmse_target);
  ov.take("seed", o.seed);
  ov.take("out", o.out);
  ov.take("plot", o.plot);
  ov.finish();
}

void apply_config(const std::string& path, QpOptions& o) {
  const json j = load_config(path);
  JsonOverrides ov(j);
  ov.take("problem", o.problem);
  ov.take("algo", o.algo);
  ov.take("c", o.c);
  ov.take("m1_alpha", o.m1_alpha);
  ov.take("m2", o.m2);
  ov.take("m2_sigma", o.m2_sigma);
  ov.take("epsilon", o.epsilon);
  ov.take("max_iter", o.max_iter);
  ov.take("tol", o.tol);
  ov.take("seed", o.seed);
  ov.take("out", o.out);
  ov.take("plot", o.plot);
  ov.finish();
}

Mat json_matrix(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("problem is missing '") + key + "'");
  const json& m = j.at(key);
  if (!m.is_array() || m.empty() || !m.front().is_array() || m.front().empty()) {
    throw ParseError(std::string("'") + key + "' must be a non-empty array of rows");
  }
  const std::size_t cols = m.front().size();
  Mat out(m.size(), cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i].is_array() || m[i].size() != cols) {
      throw ParseError(std::string("'") + key + "' has ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!m[i][k].is_number()) throw ParseError(std::string("'") + key + "' has a non-number");
      out(i, k) = m[i][k].get<double>();
    }
  }
  return out;
}

Vec json_vector(const json& j, const char* key, std::optional<Index> default_zero) {
  if (!j.contains(key)) {
    if (default_zero) return Vec::Zero(*default_zero);
    throw ParseError(std::string("problem is missing '") + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ParseError(std::string("'") + key + "' must be a non-empty array");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ParseError(std::string("'") + key + "' has a non-number");
    out[i] = v[i].get<double>();
  }
  return out;
}

void write_svg(const std::string& path, const plot::ChartSpec& spec,
               const std::vector<plot::Series>& series) {
  io::write_text(path, plot::line_chart_svg(spec, series));
}

std::vector<double> column(const std::vector<TraceRow>& rows,
                           const std::function<double(const TraceRow&)>& get) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(get(r));
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const IllConditionedError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return kExitData;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const UnsupportedProblemError*>(&e)) {
    return kExitConfig;
  }
  return kExitFailure;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("PROXAMA_SEED");
  if (env == nullptr || *env == '\0') return 42;
  const std::string s(env);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("PROXAMA_SEED must be an unsigned integer, got '" + s + "'");
  }
  return v;
}

oracle::QuadraticInstance parse_qp_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed problem JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("problem JSON must be an object");
  oracle::QuadraticInstance in;
  in.P = json_matrix(j, "P");
  in.Q = json_matrix(j, "Q");
  in.A = json_matrix(j, "A");
  in.B = json_matrix(j, "B");
  in.b = json_vector(j, "b", std::nullopt);
  in.q = json_vector(j, "q", in.P.rows());
  in.r = json_vector(j, "r", in.Q.rows());
  const Index n = in.P.rows(), m = in.Q.rows(), k = in.b.size();
  if (in.P.cols() != n || in.Q.cols() != m || in.q.size() != n || in.r.size() != m ||
      in.A.rows() != k || in.A.cols() != n || in.B.rows() != k || in.B.cols() != m) {
    throw ParseError("problem matrices have inconsistent shapes");
  }
  return in;
}

// tv --------------------------------------------------------------------------

int cmd_tv(const TvOptions& o, std::ostream& out) {
  if (!(o.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (o.max_iter < 0) throw ConfigError("max_iter must be nonnegative");
  if (o.noise < 0.0) throw ConfigError("noise must be nonnegative");
  if (o.init != "observed" && o.init != "zero") throw ConfigError("init must be observed or zero");
  const auto variants = expand(o.variant, {"aniso", "iso"}, "TV variant");
  const auto algos = expand(o.algo, {"ama", "proximal-ama"}, "algorithm");
  if (o.synthetic == !o.input.empty()) throw ConfigError("give exactly one of --input or --synthetic");

  io::Image original;
  if (o.synthetic) {
    if (o.size < 16) throw ConfigError("synthetic image size must be at least 16");
    original.shape = ImageShape{o.size, o.size};
    original.pixels = tv::synthetic_shapes_image(original.shape, o.seed);
  } else {
    original = io::read_image(o.input);
  }
  const double c = o.c;
  const double sigma = o.sigma > 0.0 ? o.sigma : tv::default_sigma(c);

  std::mt19937_64 rng(o.seed);
  const LinearMap blur = make_gaussian_blur(original.shape, o.blur_size, o.blur_std);
  const Vec observed = tv::degrade(original.pixels, blur, o.noise, rng);
  io::write_pgm(join_path(o.out, "original.pgm"), original);
  io::write_pgm(join_path(o.out, "observed.pgm"), io::Image{original.shape, observed});

  json meta;
  meta["command"] = "tv";
  meta["seed"] = o.seed;
  meta["config"] = {{"input", o.input},     {"synthetic", o.synthetic}, {"size", o.size},
                    {"tv", o.variant},      {"algo", o.algo},           {"lambda", o.lambda},
                    {"c", c},               {"sigma", sigma},           {"epsilon", o.epsilon},
                    {"max_iter", o.max_iter}, {"tol", o.tol},           {"blur_size", o.blur_size},
                    {"blur_std", o.blur_std}, {"noise", o.noise},       {"init", o.init},
                    {"inner_iters", o.inner_iters}, {"inner_tol", o.inner_tol}};
  meta["runs"] = json::array();

  for (const auto& vname : variants) {
    const tv::TvDualInstance inst =
        tv::build_tv_dual(observed, original.shape, o.lambda, tv::parse_variant(vname),
                          tv::BlurSettings{o.blur_size, o.blur_std});
    const IterateState start = o.init == "observed"
                                   ? tv::observed_start(inst)
                                   : zero_state(inst.problem);
    SolverConfig cfg;
    cfg.stepsize = constant_schedule(c);
    cfg.epsilon = o.epsilon;
    cfg.max_iter = o.max_iter;
    cfg.feasibility_tol = o.tol;
    cfg.inner = FistaSettings{o.inner_iters, o.inner_tol};
    cfg.seed = o.seed;

    auto add_isnr = [&](const IterateState& s, TraceRow& row) {
      row.metric = isnr(original.pixels, observed, s.p);
    };
    std::vector<plot::Series> obj_series, isnr_series;
    for (const auto& aname : algos) {
      const bool prox = aname == "proximal-ama";
      const MetricRule m2 = prox ? MetricRule::induced(constant_schedule(sigma)) : MetricRule::zero();
      const ValidationReport report = validate(inst.problem, cfg, MetricRule::zero(), m2);
      report.throw_if_invalid();

      const auto t0 = std::chrono::steady_clock::now();
      RunRecord rec;
      if (prox) {
        rec = tv::run_tv_scheme(inst, c, sigma, o.max_iter, false, add_isnr, start);
        if (o.tol > 0.0) {
          for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            const auto& r = rec.rows[i];
            if (std::max({r.feasibility, r.kkt_f, r.kkt_g}) <= o.tol) {
              rec.rows.resize(i + 1);
              rec.status = RunStatus::converged;
              break;
            }
          }
        }
      } else {
        SolveCallbacks cb;
        cb.on_row = [&](const IterateState& s, TraceRow& row) {
          tv::fill_objectives(inst, s, row);
          add_isnr(s, row);
        };
        rec = solve(inst.problem, cfg, MetricRule::zero(), MetricRule::zero(), Algorithm::ama, cb, start);
      }
      const double elapsed = seconds_since(t0);

      std::vector<std::string> header = kCommonColumns;
      header.push_back("isnr_db");
      io::CsvWriter csv(join_path(o.out, "trace_" + aname + "_" + vname + ".csv"), header);
      for (const auto& r : rec.rows) {
        auto cells = common_cells(r);
        cells.push_back(r.metric);
        csv.row(cells);
      }
      csv.close();

      const Vec& image = rec.rows.empty() ? start.p : rec.final_state.p;
      io::write_pgm(join_path(o.out, "recon_" + aname + "_" + vname + ".pgm"),
                    io::Image{original.shape, image});

      const TraceRow& last = rec.rows.back();
      out << aname << " " << vname << ": " << last.iter << " iterations, objective "
          << last.objective_primal << ", feasibility " << last.feasibility << ", ISNR "
          << last.metric.value_or(0.0) << " dB, " << elapsed << " s\n";
      meta["runs"].push_back({{"algorithm", aname},
                              {"variant", vname},
                              {"status", to_string(rec.status)},
                              {"iterations", last.iter},
                              {"elapsed_s", elapsed},
                              {"final_objective_primal", last.objective_primal},
                              {"final_feasibility", last.feasibility},
                              {"final_isnr_db", last.metric.value_or(0.0)},
                              {"warnings", report.warnings}});

      const auto iters = column(rec.rows, [](const TraceRow& r) { return double(r.iter); });
      obj_series.push_back({aname, iters, column(rec.rows, [](const TraceRow& r) { return r.objective_primal; })});
      isnr_series.push_back({aname, iters, column(rec.rows, [](const TraceRow& r) { return r.metric.value_or(0.0); })});
    }
    if (o.plot) {
      write_svg(join_path(o.out, "objective_" + vname + ".svg"),
                {"Objective (" + vname + " TV)", "iteration", "objective", true}, obj_series);
      write_svg(join_path(o.out, "isnr_" + vname + ".svg"),
                {"ISNR (" + vname + " TV)", "iteration", "ISNR [dB]", false}, isnr_series);
    }
  }
  write_meta(o.out, meta);
  return kExitOk;
}

// svm -------------------------------------------------------------------------

int cmd_svm(const SvmOptions& o, std::ostream& out) {
  const auto algos = expand(o.algo, {"ama", "proximal-ama"}, "algorithm");
  if (o.max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(o.tau >= 0.0)) throw ConfigError("tau must be nonnegative");
  if (o.synthetic == !o.train.empty()) throw ConfigError("give exactly one of --train or --synthetic");

  svm::Dataset data;
  if (o.synthetic) {
    data = svm::synthetic_blobs(o.n_train, o.n_test, o.seed);
  } else {
    const io::LabeledData tr = io::read_labeled_csv(o.train);
    data.train = tr.features;
    data.train_labels = tr.labels;
    if (!o.test.empty()) {
      const io::LabeledData te = io::read_labeled_csv(o.test);
      if (te.features.cols() != tr.features.cols()) {
        throw DataError("test data has a different feature count than training data");
      }
      data.test = te.features;
      data.test_labels = te.labels;
    } else {
      data.test = tr.features;
      data.test_labels = tr.labels;
    }
  }

  const svm::SvmInstance prox = svm::build_svm(data.train, data.train_labels, o.C, o.sigma, o.tau);
  const double c = o.c > 0.0 ? o.c : prox.recommended_stepsize();
  SolverConfig cfg;
  cfg.stepsize = constant_schedule(c);
  cfg.epsilon = o.epsilon;
  cfg.max_iter = o.max_iter;
  cfg.feasibility_tol = 0.0;
  cfg.seed = o.seed;
  validate(prox.problem, cfg, prox.m1, prox.m2).throw_if_invalid();

  const Vec reference = svm::reference_solution(prox, c, std::max<long>(10 * o.max_iter, 20000));
  const Mat cross = svm::cross_kernel(data.test, data.train, o.sigma);

  json meta;
  meta["command"] = "svm";
  meta["seed"] = o.seed;
  meta["config"] = {{"train", o.train}, {"test", o.test},   {"synthetic", o.synthetic},
                    {"n_train", o.n_train}, {"n_test", o.n_test}, {"preset", o.preset},
                    {"C", o.C},         {"sigma", o.sigma}, {"tau", o.tau},
                    {"c", c},           {"epsilon", o.epsilon}, {"algo", o.algo},
                    {"max_iter", o.max_iter}, {"rmse_target", o.rmse_target}};
  meta["lambda_min"] = prox.lambda_min;
  meta["lambda_max"] = prox.lambda_max;
  meta["runs"] = json::array();

  std::vector<plot::Series> rmse_series;
  for (const auto& aname : algos) {
    const svm::SvmInstance ama_inst =
        aname == "ama" ? svm::build_svm(data.train, data.train_labels, o.C, o.sigma, 0.0) : prox;
    const svm::SvmInstance& inst = aname == "ama" ? ama_inst : prox;

    std::vector<double> misclass;
    SolveCallbacks cb;
    cb.on_row = [&](const IterateState& s, TraceRow& row) {
      row.metric = rmse(s.x, reference);
      misclass.push_back(svm::misclassification_rate(cross * s.x, data.test_labels));
    };
    const auto t0 = std::chrono::steady_clock::now();
    const RunRecord rec = solve(inst.problem, cfg, inst.m1, inst.m2, Algorithm::proximal_ama, cb);
    const double elapsed = seconds_since(t0);
    if (rec.status == RunStatus::invalid_config) rec.validation.throw_if_invalid();

    std::vector<std::string> header = kCommonColumns;
    header.push_back("rmse");
    header.push_back("misclass_pct");
    io::CsvWriter csv(join_path(o.out, "trace_" + aname + "_svm.csv"), header);
    std::optional<long> hit;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
      auto cells = common_cells(rec.rows[i]);
      cells.push_back(rec.rows[i].metric);
      cells.push_back(misclass[i]);
      csv.row(cells);
      if (!hit && rec.rows[i].metric && *rec.rows[i].metric <= o.rmse_target) hit = rec.rows[i].iter;
    }
    csv.close();

    std::vector<std::string> model_header = {"coefficient", "label", "sigma"};
    for (Index j = 0; j < data.train.cols(); ++j) model_header.push_back("x" + std::to_string(j + 1));
    io::CsvWriter model(join_path(o.out, "model_" + aname + ".csv"), model_header);
    for (Index i = 0; i < data.train.rows(); ++i) {
      std::vector<std::optional<double>> cells = {rec.final_state.x[i], data.train_labels[i], o.sigma};
      for (Index j = 0; j < data.train.cols(); ++j) cells.push_back(data.train(i, j));
      model.row(cells);
    }
    model.close();

    out << aname << " (tau " << inst.tau << "): RMSE <= " << o.rmse_target << " at iteration "
        << (hit ? std::to_string(*hit) : std::string("never")) << ", final misclassification "
        << misclass.back() << "%, " << elapsed << " s\n";
    meta["runs"].push_back({{"algorithm", aname},
                            {"tau", inst.tau},
                            {"status", to_string(rec.status)},
                            {"iterations", rec.rows.back().iter},
                            {"elapsed_s", elapsed},
                            {"rmse_hit_iteration", hit ? json(*hit) : json(nullptr)},
                            {"final_rmse", rec.rows.back().metric.value_or(0.0)},
                            {"final_misclass_pct", misclass.back()}});
    rmse_series.push_back({aname, column(rec.rows, [](const TraceRow& r) { return double(r.iter); }),
                           column(rec.rows, [](const TraceRow& r) { return r.metric.value_or(0.0); })});
  }
  if (o.plot) {
    write_svg(join_path(o.out, "rmse_svm.svg"), {"RMSE to reference", "iteration", "RMSE", true},
              rmse_series);
  }
  write_meta(o.out, meta);
  return kExitOk;
}

// qp --------------------------------------------------------------------------

int cmd_qp(const QpOptions& o, std::ostream& out) {
  const oracle::QuadraticInstance inst = parse_qp_json(io::read_text(o.problem));
  const auto algo = expand(o.algo, {"ama", "proximal-ama"}, "algorithm");
  if (algo.size() != 1) throw ConfigError("qp runs a single algorithm");
  const bool prox = algo.front() == "proximal-ama";

  TwoBlockProblem problem = oracle::make_quadratic_problem(inst);
  prepare(problem);
  const IterateState saddle = oracle::quadratic_saddle(inst);
  const double gamma = problem.f.strong_convexity;
  const double a_norm = *problem.a_norm;
  const double b_norm = *problem.b_norm;
  const double c = o.c > 0.0 ? o.c : gamma / (a_norm * a_norm);

  MetricRule m1 = MetricRule::zero();
  MetricRule m2 = MetricRule::zero();
  if (prox) {
    if (o.m1_alpha < 0.0) throw ConfigError("m1_alpha must be nonnegative");
    if (o.m1_alpha > 0.0) m1 = MetricRule::scaled_identity(constant_schedule(o.m1_alpha));
    if (o.m2 == "induced") {
      const double sigma = o.m2_sigma > 0.0 ? o.m2_sigma : 1.0 / (2.0 * c * std::max(b_norm * b_norm, 1e-300));
      m2 = MetricRule::induced(constant_schedule(sigma));
    } else if (o.m2 != "zero") {
      throw ConfigError("m2 must be zero or induced");
    }
  }

  SolverConfig cfg;
  cfg.stepsize = constant_schedule(c);
  cfg.epsilon = o.epsilon;
  cfg.max_iter = o.max_iter;
  cfg.feasibility_tol = o.tol;
  cfg.seed = o.seed;
  SolveCallbacks cb;
  cb.saddle = saddle;

  const auto t0 = std::chrono::steady_clock::now();
  const RunRecord rec = solve(problem, cfg, m1, m2, prox ? Algorithm::proximal_ama : Algorithm::ama, cb);
  const double elapsed = seconds_since(t0);
  if (rec.status == RunStatus::invalid_config) rec.validation.throw_if_invalid();

  std::vector<std::string> header = kCommonColumns;
  for (const char* h : {"lyapunov", "r_sum", "r_min"}) header.push_back(h);
  io::CsvWriter csv(join_path(o.out, "trace_" + algo.front() + "_qp.csv"), header);
  for (const auto& r : rec.rows) {
    auto cells = common_cells(r);
    cells.push_back(r.lyapunov);
    if (r.r_summands.empty()) {
      cells.push_back(std::nullopt);
      cells.push_back(std::nullopt);
    } else {
      double s = 0.0, lo = r.r_summands.front();
      for (double v : r.r_summands) s += v, lo = std::min(lo, v);
      cells.push_back(s);
      cells.push_back(lo);
    }
    csv.row(cells);
  }
  csv.close();

  const IterateState& fin = rec.final_state;
  const double dist = std::sqrt((fin.x - saddle.x).squaredNorm() + (fin.z - saddle.z).squaredNorm() +
                                (fin.p - saddle.p).squaredNorm());
  const TraceRow& last = rec.rows.back();
  const double kkt = std::max({last.feasibility, last.kkt_f, last.kkt_g});
  out << algo.front() << ": " << to_string(rec.status) << " after " << last.iter
      << " iterations, KKT residual " << kkt << ", distance to saddle " << dist << ", " << elapsed
      << " s\n";
  for (const auto& w : rec.validation.warnings) out << "warning: " << w << "\n";
  for (const auto& f : rec.flags) out << "note: " << f << "\n";

  if (o.plot) {
    write_svg(join_path(o.out, "kkt_qp.svg"), {"KKT residual", "iteration", "max residual", true},
              {{algo.front(), column(rec.rows, [](const TraceRow& r) { return double(r.iter); }),
                column(rec.rows, [](const TraceRow& r) {
                  return std::max({r.feasibility, r.kkt_f, r.kkt_g});
                })}});
  }
  json meta;
  meta["command"] = "qp";
  meta["seed"] = o.seed;
  meta["config"] = {{"problem", o.problem}, {"algo", o.algo},         {"c", c},
                    {"m1_alpha", o.m1_alpha}, {"m2", o.m2},           {"m2_sigma", o.m2_sigma},
                    {"epsilon", o.epsilon}, {"max_iter", o.max_iter}, {"tol", o.tol}};
  meta["status"] = to_string(rec.status);
  meta["iterations"] = last.iter;
  meta["elapsed_s"] = elapsed;
  meta["final_kkt"] = kkt;
  meta["distance_to_saddle"] = dist;
  meta["warnings"] = rec.validation.warnings;
  write_meta(o.out, meta);
  return kExitOk;
}

// check -----------------------------------------------------------------------

std::vector<CheckResult> property_checks() {
  std::vector<CheckResult> res;
  auto add = [&](std::string name, bool pass, double value) {
    std::ostringstream ss;
    ss << value;
    res.push_back({std::move(name), pass, ss.str()});
  };
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto rand_vec = [&](Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
  };

  const ImageShape shape{16, 16};
  const LinearMap grad = make_discrete_gradient(shape);
  const LinearMap blur = make_gaussian_blur(shape, 9, 4.0);
  Mat dm(3, 4);
  dm << 1, 2, 0, -1, 0.5, 3, 1, 2, -2, 0, 1, 1;
  const LinearMap dense = make_dense(dm);
  for (const auto& [name, op] : {std::pair{"dense", dense}, std::pair{"gradient", grad}, std::pair{"blur", blur}}) {
    const double mis = adjoint_mismatch(op, 100, 11);
    add(std::string("adjoint consistency (") + name + ")", mis <= 1e-10, mis);
  }
  const double gn = estimate_norm(grad);
  add("gradient norm^2 <= 8", gn * gn <= 8.0 + 1e-6, gn * gn);
  const double bn = estimate_norm(blur);
  add("blur norm = 1", std::abs(bn - 1.0) <= 1e-8, bn);

  const Vec labels = (rand_vec(6).array() > 0.0).select(Vec::Ones(6), -Vec::Ones(6));
  const ProxFn hinge = hinge_loss(labels, 1.0);
  const ProxFn hinge_c = hinge_conjugate(labels, 1.0);
  const ProxFn l1 = l1_norm(6, 0.7);
  const ProxFn box = box_indicator(6, -0.7, 0.7);
  double moreau = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vec x = 2.0 * rand_vec(6);
    moreau = std::max(moreau, moreau_residual(hinge.prox, hinge_c.prox, 0.8, x));
    moreau = std::max(moreau, moreau_residual(l1.prox, box.prox, 0.8, x));
  }
  add("Moreau residual (hinge, l1/box)", moreau <= 1e-10, moreau);

  double worst = 0.0;
  for (const ProxFn* f : {&hinge, &hinge_c, &l1, &box}) {
    for (int t = 0; t < 20; ++t) {
      const Vec x = 2.0 * rand_vec(6);
      const auto cert = oracle::subgradient_certificate(f->value, 0.8, x, f->prox(0.8, x), 100, t);
      worst = std::min(worst, cert.worst_slack);
    }
  }
  add("subgradient certificates", worst >= -1e-9, worst);

  const auto q = oracle::random_quadratic_instance(5, 3);
  const IterateState s = oracle::quadratic_saddle(q);
  const double kkt = kkt_residuals(oracle::make_quadratic_problem(q), s).max();
  add("quadratic saddle KKT residual", kkt <= 1e-10, kkt);
  return res;
}

int cmd_check(std::ostream& out) {
  bool all = true;
  for (const auto& r : property_checks()) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << " [" << r.detail << "]\n";
    all = all && r.pass;
  }
  return all ? kExitOk : kExitFailure;
}

// entry point ----------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const std::uint64_t seed = default_seed();
    CLI::App app{"Proximal AMA and AMA experiments"};
    app.require_subcommand(1);

    TvOptions tv_o;
    tv_o.seed = seed;
    std::string tv_config;
    auto* tv_cmd = app.add_subcommand("tv", "TV deblurring on an image");
    tv_cmd->add_option("--input", tv_o.input, "PGM (P2/P5) or CSV image");
    tv_cmd->add_flag("--synthetic", tv_o.synthetic, "use the synthetic shapes image");
    tv_cmd->add_option("--size", tv_o.size, "synthetic image side length");
    tv_cmd->add_option("--tv", tv_o.variant, "aniso | iso | both");
    tv_cmd->add_option("--algo", tv_o.algo, "ama | proximal-ama | both");
    tv_cmd->add_option("--lambda", tv_o.lambda, "regularization parameter");
    tv_cmd->add_option("--c", tv_o.c, "stepsize");
    tv_cmd->add_option("--sigma", tv_o.sigma, "metric parameter (default 1/(8.00001 c))");
    tv_cmd->add_option("--epsilon", tv_o.epsilon, "stepsize window margin");
    tv_cmd->add_option("--max-iter", tv_o.max_iter, "iterations");
    tv_cmd->add_option("--tol", tv_o.tol, "stop when all residuals drop below (0 = never)");
    tv_cmd->add_option("--blur-size", tv_o.blur_size, "odd blur kernel size");
    tv_cmd->add_option("--blur-std", tv_o.blur_std, "blur standard deviation");
    tv_cmd->add_option("--noise", tv_o.noise, "Gaussian noise standard deviation");
    tv_cmd->add_option("--init", tv_o.init, "observed | zero starting image");
    tv_cmd->add_option("--inner-iters", tv_o.inner_iters, "FISTA iterations for the AMA z-step");
    tv_cmd->add_option("--inner-tol", tv_o.inner_tol, "FISTA tolerance for the AMA z-step");
    tv_cmd->add_option("--seed", tv_o.seed, "random seed");
    tv_cmd->add_option("--out", tv_o.out, "output directory");
    tv_cmd->add_flag("--plot", tv_o.plot, "write SVG charts");
    tv_cmd->add_option("--config", tv_config, "JSON file overriding flags");

    SvmOptions svm_o;
    svm_o.seed = seed;
    std::string svm_config;
    auto* svm_cmd = app.add_subcommand("svm", "kernel SVM classification");
    svm_cmd->add_option("--train", svm_o.train, "CSV rows x1,...,xd,label");
    svm_cmd->add_option("--test", svm_o.test, "CSV test set (default: training set)");
    svm_cmd->add_flag("--synthetic", svm_o.synthetic, "use two seeded Gaussian blobs");
    svm_cmd->add_option("--n-train", svm_o.n_train, "synthetic training points");
    svm_cmd->add_option("--n-test", svm_o.n_test, "synthetic test points");
    auto* preset_opt = svm_cmd->add_option("--preset", svm_o.preset, "table1 | table2");
    svm_cmd->add_option("--C", svm_o.C, "hinge loss weight");
    svm_cmd->add_option("--sigma", svm_o.sigma, "Gaussian kernel width");
    svm_cmd->add_option("--tau", svm_o.tau, "M1 = tau K (0 gives AMA)");
    svm_cmd->add_option("--c", svm_o.c, "stepsize (default 2 lmin/lmax^2 - 1e-8)");
    svm_cmd->add_option("--epsilon", svm_o.epsilon, "stepsize window margin");
    svm_cmd->add_option("--algo", svm_o.algo, "ama | proximal-ama | both");
    svm_cmd->add_option("--max-iter", svm_o.max_iter, "iterations");
    svm_cmd->add_option("--rmse-target", svm_o.rmse_target, "RMSE level reported");
    svm_cmd->add_option("--seed", svm_o.seed, "random seed");
    svm_cmd->add_option("--out", svm_o.out, "output directory");
    svm_cmd->add_flag("--plot", svm_o.plot, "write SVG charts");
    svm_cmd->add_option("--config", svm_config, "JSON file overriding flags");

    QpOptions qp_o;
    qp_o.seed = seed;
    std::string qp_config;
    auto* qp_cmd = app.add_subcommand("qp", "quadratic two-block problem from JSON");
    qp_cmd->add_option("problem", qp_o.problem, "JSON with P, q, Q, r, A, B, b");
    qp_cmd->add_option("--algo", qp_o.algo, "ama | proximal-ama");
    qp_cmd->add_option("--c", qp_o.c, "stepsize (default gamma/|A|^2)");
    qp_cmd->add_option("--m1-alpha", qp_o.m1_alpha, "M1 = alpha Id (0 = zero metric)");
    qp_cmd->add_option("--m2", qp_o.m2, "zero | induced");
    qp_cmd->add_option("--m2-sigma", qp_o.m2_sigma, "induced metric parameter");
    qp_cmd->add_option("--epsilon", qp_o.epsilon, "stepsize window margin");
    qp_cmd->add_option("--max-iter", qp_o.max_iter, "iterations");
    qp_cmd->add_option("--tol", qp_o.tol, "KKT tolerance");
    qp_cmd->add_option("--seed", qp_o.seed, "random seed");
    qp_cmd->add_option("--out", qp_o.out, "output directory");
    qp_cmd->add_flag("--plot", qp_o.plot, "write SVG charts");
    qp_cmd->add_option("--config", qp_config, "JSON file overriding flags");

    auto* check_cmd = app.add_subcommand("check", "run the oracle and property checks");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }

    if (tv_cmd->parsed()) {
      if (!tv_config.empty()) apply_config(tv_config, tv_o);
      return cmd_tv(tv_o, out);
    }
    if (svm_cmd->parsed()) {
      if (preset_opt->count() > 0) {
        // Explicit flags win over the preset: re-parse them after applying it.
        SvmOptions base = svm_o;
        apply_preset(svm_o.preset, base);
        for (const char* name : {"--C", "--sigma", "--tau"}) {
          if (svm_cmd->get_option(name)->count() == 0) continue;
          if (std::string(name) == "--C") base.C = svm_o.C;
          if (std::string(name) == "--sigma") base.sigma = svm_o.sigma;
          if (std::string(name) == "--tau") base.tau = svm_o.tau;
        }
        svm_o = base;
      }
      if (!svm_config.empty()) apply_config(svm_config, svm_o);
      return cmd_svm(svm_o, out);
    }
    if (qp_cmd->parsed()) {
      if (!qp_config.empty()) apply_config(qp_config, qp_o);
      if (qp_o.problem.empty()) throw ConfigError("qp needs a problem file");
      return cmd_qp(qp_o, out);
    }
    if (check_cmd->parsed()) return cmd_check(out);
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace proxama::cli
