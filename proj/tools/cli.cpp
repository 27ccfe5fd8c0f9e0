#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polwishart/dataio.hpp"
#include "polwishart/distances.hpp"
#include "polwishart/error.hpp"
#include "polwishart/estimation.hpp"
#include "polwishart/experiments.hpp"
#include "polwishart/hypothesis.hpp"
#include "polwishart/wishart.hpp"

namespace polwishart::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_double(std::string_view text, std::string_view flag) {
  double value = 0.0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last) {
    throw UsageError(std::string(flag) + ": not a number: " + std::string(text));
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view flag) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_double(part, flag));
  return values;
}

std::vector<DistanceMeasure> parse_measure_list(std::string_view text) {
  std::vector<DistanceMeasure> measures;
  for (const auto& part : split(text, ',')) {
    try {
      measures.push_back(parse_measure(part));
    } catch (const Error& e) {
      throw UsageError(std::string("--measure: ") + e.what());
    }
  }
  return measures;
}

std::vector<double> parse_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("--grid: expected a:b:steps");
  const double a = parse_double(parts[0], "--grid");
  const double b = parse_double(parts[1], "--grid");
  const double steps = parse_double(parts[2], "--grid");
  if (!(steps >= 1.0) || steps != static_cast<double>(static_cast<long>(steps))) {
    throw UsageError("--grid: steps must be a positive integer");
  }
  const auto n = static_cast<std::size_t>(steps);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = n == 1 ? a
                     : (i + 1 == n ? b
                                   : a + (b - a) * static_cast<double>(i) /
                                             static_cast<double>(n - 1));
  }
  return grid;
}

SweepTarget parse_vary(std::string_view text) {
  if (text == "looks") return {SweepTarget::Kind::Looks, 0, 0};
  constexpr std::string_view prefix = "sigma-entry=";
  if (text.substr(0, prefix.size()) != prefix) {
    throw UsageError("--vary: expected looks or sigma-entry=<i,j>");
  }
  const auto idx = split(text.substr(prefix.size()), ',');
  if (idx.size() != 2) throw UsageError("--vary: expected sigma-entry=<i,j>");
  std::size_t ij[2];
  for (int k = 0; k < 2; ++k) {
    const auto* last = idx[k].data() + idx[k].size();
    auto [ptr, ec] = std::from_chars(idx[k].data(), last, ij[k]);
    if (ec != std::errc() || ptr != last) throw UsageError("--vary: bad index " + idx[k]);
  }
  return {SweepTarget::Kind::SigmaEntry, ij[0], ij[1]};
}

/// Destination chosen by --out: the given stream for "" or "-", else a truncated file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file_) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error(ErrorCode::IoError, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

json matrix_json(const HermitianMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) {
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json fit_json(const MLFit& f) {
  return json{{"looks", f.params.looks()},
              {"looks_estimated", f.looks_estimated},
              {"sigma", matrix_json(f.params.sigma())},
              {"crlb_looks_variance", f.crlb_looks_variance},
              {"iterations", f.iterations},
              {"score_residual", f.score_residual},
              {"n", f.sample_size}};
}

std::optional<double> optional_value(const CLI::Option* opt, double value) {
  return opt->count() > 0 ? std::optional<double>(value) : std::nullopt;
}

unsigned default_workers() {
  if (const char* env = std::getenv("POLWISHART_WORKERS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  return 0;
}

struct Options {
  // simulate
  double looks = 0.0;
  std::string sigma_path;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::vector<double> contaminate;
  double scale_k = 0.0;
  bool overwrite = false;
  // shared
  std::string in_path, a_path, b_path, out_path, config_path;
  double fixed_looks = 0.0;
  std::string measure = "kl";
  std::string alpha = "0.05";
  int dof = 0;
  unsigned workers = 0;
  bool timing = false;
  std::size_t replicas = 0;
  double epsilon = 1e-5;
  double scale = 1000.0;
  // sensitivity
  std::string vary, grid;
  std::string measures = "chi2,kl,renyi=0.9,bhattacharyya,hellinger,renyi=0.1";
  // blocks
  std::size_t nx = 0, ny = 0;
};

TestOptions test_options(const Options& o, const CLI::Option* fixed, const CLI::Option* dof) {
  TestOptions t;
  t.fixed_looks = optional_value(fixed, o.fixed_looks);
  if (dof->count() > 0) t.dof_override = o.dof;
  return t;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scaled multilook complex Wishart toolkit: sampling, ML fits, stochastic "
               "distances, homogeneity tests and Monte Carlo studies.",
               "polwishart"};
  app.require_subcommand(1);
  Options o;
  o.workers = default_workers();

  auto* simulate = app.add_subcommand(
      "simulate", "Draw N matrices from W(L, (1+k) Sigma), optionally contaminated");
  simulate->add_option("--looks", o.looks, "Number of looks L (integer >= p)")->required();
  simulate->add_option("--sigma", o.sigma_path, "Sample file holding one covariance matrix")
      ->required();
  simulate->add_option("--n", o.n, "Number of draws")->required();
  simulate->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  simulate->add_option("--contaminate", o.contaminate,
                       "EPS SCALE: each draw comes from W(L, SCALE Sigma) with probability EPS")
      ->expected(2);
  simulate->add_option("--scale-k", o.scale_k, "Multiply Sigma by (1 + k)")->capture_default_str();
  simulate->add_option("--out", o.out_path, "Output sample file (- for stdout)")->required();
  simulate->add_flag("--overwrite", o.overwrite, "Replace an existing output file");

  auto* estimate = app.add_subcommand("estimate", "Maximum-likelihood fit of (L, Sigma); JSON");
  estimate->add_option("--in", o.in_path, "Sample file")->required();
  auto* est_fixed = estimate->add_option("--fixed-looks", o.fixed_looks,
                                         "Known L; only Sigma is estimated");

  auto* dist = app.add_subcommand("distance", "Distance between the ML fits of two samples; JSON");
  dist->add_option("--a", o.a_path, "First sample file")->required();
  dist->add_option("--b", o.b_path, "Second sample file")->required();
  dist->add_option("--measure", o.measure,
                   "kl | chi2 | renyi=<beta> | bhattacharyya | hellinger (renyi alone: beta 0.9)")
      ->capture_default_str();
  auto* dist_fixed = dist->add_option("--fixed-looks", o.fixed_looks, "Known L for both fits");

  auto* test = app.add_subcommand("test", "Homogeneity test H0: theta_a = theta_b; JSON");
  test->add_option("--a", o.a_path, "First sample file")->required();
  test->add_option("--b", o.b_path, "Second sample file")->required();
  test->add_option("--measure", o.measure, "Distance measure (see distance --help)")
      ->capture_default_str();
  test->add_option("--alpha", o.alpha, "Comma-separated significance levels in (0, 1)")
      ->capture_default_str();
  auto* test_fixed = test->add_option("--fixed-looks", o.fixed_looks, "Known L for both fits");
  auto* test_dof = test->add_option("--dof", o.dof,
                                    "Degrees of freedom (default p^2 + 1, or p^2 with known L)");

  auto* mc = app.add_subcommand("mc-size", "Empirical test sizes under H0; CSV");
  mc->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  mc->add_option("--out", o.out_path, "Output CSV (- for stdout)");
  auto* mc_seed = mc->add_option("--seed", o.seed, "Override the config seed");
  auto* mc_reps = mc->add_option("--replicas", o.replicas, "Override the config replica count");
  auto* mc_workers = mc->add_option("--workers", o.workers,
                                    "Worker threads (0 = all cores); output does not depend on it");
  mc->add_flag("--timing", o.timing, "Fill the wall_time_ms column (mean ms per test)");

  auto* rob = app.add_subcommand(
      "robustness", "Kullback-Leibler test with a contaminated X sample; CSV");
  rob->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  rob->add_option("--out", o.out_path, "Output CSV (- for stdout)");
  auto* rob_seed = rob->add_option("--seed", o.seed, "Override the config seed");
  auto* rob_reps = rob->add_option("--replicas", o.replicas, "Override the config replica count");
  auto* rob_workers = rob->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  auto* rob_eps = rob->add_option("--epsilon", o.epsilon,
                                  "Contamination probability (default: config, else 1e-5)");
  auto* rob_scale = rob->add_option("--scale", o.scale,
                                    "Contamination scale (default: config, else 1000)");

  auto* sens = app.add_subcommand("sensitivity",
                                  "d((L, Sigma), perturbed) over a grid of one parameter; CSV");
  sens->add_option("--vary", o.vary, "looks | sigma-entry=<i,j> (zero-based; real part varies)")
      ->required();
  sens->add_option("--grid", o.grid, "a:b:steps, steps points from a to b inclusive")->required();
  sens->add_option("--fixed-looks", o.fixed_looks, "L of the fixed parameter")->required();
  sens->add_option("--sigma", o.sigma_path, "Sample file holding the fixed Sigma")->required();
  sens->add_option("--measures", o.measures, "Comma-separated measures")->capture_default_str();
  sens->add_option("--out", o.out_path, "Output CSV (- for stdout)");

  auto* blocks = app.add_subcommand("blocks",
                                    "Tests between disjoint blocks of one sample; CSV");
  blocks->add_option("--in", o.in_path, "Sample file")->required();
  blocks->add_option("--nx", o.nx, "X block size")->required();
  blocks->add_option("--ny", o.ny, "Y block size")->required();
  blocks->add_option("--measure", o.measure, "Comma-separated measures")->capture_default_str();
  blocks->add_option("--alpha", o.alpha, "Comma-separated significance levels")
      ->capture_default_str();
  auto* blk_fixed = blocks->add_option("--fixed-looks", o.fixed_looks, "Known L for all fits");
  auto* blk_dof = blocks->add_option("--dof", o.dof, "Degrees of freedom override");
  blocks->add_option("--out", o.out_path, "Output CSV (- for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (simulate->parsed()) {
      HermitianMatrix sigma = read_matrix(o.sigma_path);
      if (!(o.scale_k > -1.0)) throw UsageError("--scale-k must exceed -1");
      if (o.scale_k != 0.0) sigma = sigma.scaled(1.0 + o.scale_k);
      const WishartParams params(o.looks, sigma);
      const MatrixSample s =
          o.contaminate.empty()
              ? sample(params, o.n, o.seed)
              : sample_contaminated(params, {o.contaminate[0], o.contaminate[1]}, o.n, o.seed);
      if (o.out_path == "-") {
        write_sample(out, s);
      } else {
        write_sample(s, o.out_path, o.overwrite);
      }
    } else if (estimate->parsed()) {
      const MLFit f = fit(read_sample(o.in_path), optional_value(est_fixed, o.fixed_looks));
      out << fit_json(f).dump(2) << '\n';
    } else if (dist->parsed()) {
      const auto measure = parse_measure_list(o.measure);
      if (measure.size() != 1) throw UsageError("--measure: exactly one measure expected");
      const auto fixed = optional_value(dist_fixed, o.fixed_looks);
      const MLFit fa = fit(read_sample(o.a_path), fixed);
      const MLFit fb = fit(read_sample(o.b_path), fixed);
      const double d = distance(measure[0], fa.params, fb.params);
      out << json{{"measure", to_string(measure[0])}, {"distance", d}}.dump(2) << '\n';
    } else if (test->parsed()) {
      const auto measure = parse_measure_list(o.measure);
      if (measure.size() != 1) throw UsageError("--measure: exactly one measure expected");
      const auto alphas = parse_double_list(o.alpha, "--alpha");
      const TestOutcome r = run_test(measure[0], read_sample(o.a_path), read_sample(o.b_path),
                                     alphas, test_options(o, test_fixed, test_dof));
      json decisions = json::object();
      for (double a : alphas) decisions[format_number(a)] = r.reject_at.at(a);
      out << json{{"measure", to_string(measure[0])},
                  {"distance", r.distance},
                  {"statistic", r.statistic},
                  {"dof", r.dof},
                  {"p_value", r.p_value},
                  {"reject", decisions}}
                 .dump(2)
          << '\n';
    } else if (mc->parsed() || rob->parsed()) {
      const bool is_mc = mc->parsed();
      ExperimentConfigFile cfg = read_config(o.config_path);
      auto& exp = cfg.experiment;
      if ((is_mc ? mc_seed : rob_seed)->count() > 0) exp.base_seed = o.seed;
      if ((is_mc ? mc_reps : rob_reps)->count() > 0) exp.replicas = o.replicas;
      if ((is_mc ? mc_workers : rob_workers)->count() > 0 || o.workers > 0) {
        exp.workers = o.workers;
      }
      Sink sink(o.out_path, out);
      if (is_mc) {
        write_size_csv(sink.stream(), empirical_size(exp), exp.alpha_levels, o.timing);
      } else {
        ContaminationSpec spec = exp.contamination.value_or(ContaminationSpec{1e-5, 1000.0});
        if (rob_eps->count() > 0) spec.epsilon = o.epsilon;
        if (rob_scale->count() > 0) spec.scale = o.scale;
        exp.contamination.reset();
        write_robustness_csv(sink.stream(), robustness_study(exp, spec), exp.alpha_levels);
      }
      sink.finish();
    } else if (sens->parsed()) {
      const SweepTarget target = parse_vary(o.vary);
      const auto grid = parse_grid(o.grid);
      const auto measures = parse_measure_list(o.measures);
      const WishartParams fixed(o.fixed_looks, read_matrix(o.sigma_path));
      Sink sink(o.out_path, out);
      write_sensitivity_csv(sink.stream(), sensitivity_sweep(fixed, target, grid, measures));
      sink.finish();
    } else if (blocks->parsed()) {
      const auto measures = parse_measure_list(o.measure);
      const auto alphas = parse_double_list(o.alpha, "--alpha");
      const BlockStudyResult r = block_study(read_sample(o.in_path), o.nx, o.ny, measures,
                                             alphas, test_options(o, blk_fixed, blk_dof));
      Sink sink(o.out_path, out);
      write_blocks_csv(sink.stream(), r, alphas);
      sink.finish();
      if (r.pairs.empty()) err << "note: EmptyPairing: no Y block fits beside any X block\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace polwishart::cli
