#include "polwishart/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "polwishart/error.hpp"
#include "polwishart/estimation.hpp"
#include "polwishart/rng.hpp"
#include "polwishart/specfun.hpp"
#include "parallel.hpp"

namespace polwishart {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct ReplicaOutcome {
  bool ok = false;
  double fit_ms = 0.0;
  std::vector<double> distance;
  std::vector<double> statistic;
  std::vector<double> measure_ms;
  std::vector<char> diverged;
  double looks_x = kNaN;
  double looks_y = kNaN;
  std::vector<double> diag_x;
  std::vector<double> diag_y;
};

std::vector<double> diagonal_of(const HermitianMatrix& m) {
  std::vector<double> d(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) d[i] = m(i, i).real();
  return d;
}

ReplicaOutcome run_replica(const SizeExperimentConfig& config, const WishartParams& truth,
                           const SamplePair& pair, std::size_t replica,
                           const std::optional<ContaminationSpec>& contamination,
                           const std::vector<DistanceMeasure>& measures) {
  const std::uint64_t looks_key = std::bit_cast<std::uint64_t>(truth.looks());
  const std::uint64_t seed_x =
      derive_seed({config.base_seed, looks_key, pair.n_x, pair.n_y, replica, 0});
  const std::uint64_t seed_y =
      derive_seed({config.base_seed, looks_key, pair.n_x, pair.n_y, replica, 1});

  const MatrixSample x = contamination
                             ? sample_contaminated(truth, *contamination, pair.n_x, seed_x)
                             : sample(truth, pair.n_x, seed_x);
  const MatrixSample y = sample(truth, pair.n_y, seed_y);

  ReplicaOutcome out;
  const std::size_t m = measures.size();
  out.distance.assign(m, kNaN);
  out.statistic.assign(m, kNaN);
  out.measure_ms.assign(m, 0.0);
  out.diverged.assign(m, 0);

  const std::optional<double> fixed =
      config.estimate_looks ? std::nullopt : std::optional<double>(truth.looks());
  const auto fit_start = Clock::now();
  std::optional<MLFit> fit_x;
  std::optional<MLFit> fit_y;
  try {
    fit_x.emplace(fit(x, fixed));
    fit_y.emplace(fit(y, fixed));
  } catch (const Error&) {
    return out;
  }
  out.fit_ms = elapsed_ms(fit_start);
  out.ok = true;
  out.looks_x = fit_x->params.looks();
  out.looks_y = fit_y->params.looks();
  out.diag_x = diagonal_of(fit_x->params.sigma());
  out.diag_y = diagonal_of(fit_y->params.sigma());

  const double nx = static_cast<double>(pair.n_x);
  const double ny = static_cast<double>(pair.n_y);
  const double weight = 2.0 * nx * ny / (nx + ny);
  for (std::size_t j = 0; j < m; ++j) {
    const auto start = Clock::now();
    try {
      const double d = distance(measures[j], fit_x->params, fit_y->params);
      out.distance[j] = d;
      out.statistic[j] = weight * d / scaling_constant(measures[j]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ChiSquareDiverges) throw;
      out.diverged[j] = 1;
      out.statistic[j] = kInf;
    }
    out.measure_ms[j] = elapsed_ms(start);
  }
  return out;
}

struct MeanCv {
  double mean;
  double cv;
};

MeanCv mean_and_cv(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return {kNaN, kNaN};
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, mean > 0.0 ? 100.0 * sd / mean : kNaN};
}

std::vector<double> rejection_rates(const std::vector<double>& statistics,
                                    const std::vector<char>& ok, int dof,
                                    const std::vector<double>& alpha_levels) {
  std::vector<double> counts(alpha_levels.size(), 0.0);
  std::size_t valid = 0;
  for (std::size_t k = 0; k < statistics.size(); ++k) {
    if (!ok[k]) continue;
    ++valid;
    const double s = statistics[k];
    const double p_value = std::isinf(s) ? 0.0 : specfun::chi_square_sf(s, dof);
    for (std::size_t a = 0; a < alpha_levels.size(); ++a) {
      if (p_value <= alpha_levels[a]) counts[a] += 1.0;
    }
  }
  for (auto& c : counts) c = valid > 0 ? c / static_cast<double>(valid) : kNaN;
  return counts;
}

int experiment_dof(const SizeExperimentConfig& config) {
  return config.dof_override.value_or(
      degrees_of_freedom(static_cast<int>(config.sigma.dim()), config.estimate_looks));
}

std::vector<ReplicaOutcome> run_cell(const SizeExperimentConfig& config,
                                     const WishartParams& truth, const SamplePair& pair,
                                     const std::optional<ContaminationSpec>& contamination,
                                     const std::vector<DistanceMeasure>& measures) {
  std::vector<ReplicaOutcome> outcomes(config.replicas);
  detail::parallel_for(config.replicas, config.workers, [&](std::size_t k) {
    outcomes[k] = run_replica(config, truth, pair, k, contamination, measures);
  });
  return outcomes;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, "invalid `" + field + "`: " + why);
}

}  // namespace

std::vector<DistanceMeasure> all_measures(double renyi_beta) {
  return {DistanceMeasure::chi_square(), DistanceMeasure::kullback_leibler(),
          DistanceMeasure::renyi(renyi_beta), DistanceMeasure::bhattacharyya(),
          DistanceMeasure::hellinger()};
}

void validate(const SizeExperimentConfig& config) {
  if (config.sigma.dim() == 0) invalid("sigma", "missing covariance matrix");
  try {
    cholesky(config.sigma);
  } catch (const Error&) {
    invalid("sigma", "covariance matrix is not positive definite");
  }
  const double p = static_cast<double>(config.sigma.dim());
  if (config.looks.empty()) invalid("looks", "at least one value is required");
  for (double l : config.looks) {
    if (!(l >= p) || std::round(l) != l) {
      invalid("looks", "simulation requires integer looks >= p, got " + std::to_string(l));
    }
  }
  if (config.sample_size_pairs.empty()) invalid("pairs", "at least one pair is required");
  for (const auto& pair : config.sample_size_pairs) {
    if (pair.n_x < 1 || pair.n_y < 1) invalid("pairs", "sample sizes must be >= 1");
  }
  if (config.alpha_levels.empty()) invalid("alpha", "at least one level is required");
  for (double a : config.alpha_levels) {
    if (!(a > 0.0 && a <= 1.0)) invalid("alpha", "levels must lie in (0, 1]");
  }
  if (config.replicas < 1) invalid("replicas", "must be >= 1");
  if (config.measures.empty()) invalid("measures", "at least one measure is required");
  for (const auto& m : config.measures) {
    try {
      validate(m);
    } catch (const Error& e) {
      invalid("measures", e.what());
    }
  }
  if (config.dof_override && *config.dof_override < 1) invalid("dof", "must be >= 1");
  if (config.contamination) {
    try {
      validate(*config.contamination);
    } catch (const Error& e) {
      invalid("contamination", e.what());
    }
  }
}

SizeExperimentResult empirical_size(const SizeExperimentConfig& config) {
  validate(config);
  const int dof = experiment_dof(config);
  const std::size_t n_measures = config.measures.size();
  const std::size_t n_pairs = config.sample_size_pairs.size();
  const std::size_t n_looks = config.looks.size();

  // cells[pair][looks] -> per-replica outcomes
  std::vector<std::vector<std::vector<ReplicaOutcome>>> cells(n_pairs);
  for (std::size_t pi = 0; pi < n_pairs; ++pi) {
    for (std::size_t li = 0; li < n_looks; ++li) {
      const WishartParams truth(config.looks[li], config.sigma);
      cells[pi].push_back(run_cell(config, truth, config.sample_size_pairs[pi],
                                   config.contamination, config.measures));
    }
  }

  SizeExperimentResult result;
  for (std::size_t mi = 0; mi < n_measures; ++mi) {
    for (std::size_t pi = 0; pi < n_pairs; ++pi) {
      for (std::size_t li = 0; li < n_looks; ++li) {
        const auto& outcomes = cells[pi][li];
        std::vector<double> statistics(outcomes.size());
        std::vector<double> distances(outcomes.size());
        std::vector<char> ok(outcomes.size());
        std::size_t diverged = 0;
        std::size_t failed = 0;
        double time_sum = 0.0;
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
          const auto& o = outcomes[k];
          ok[k] = o.ok ? 1 : 0;
          if (!o.ok) {
            ++failed;
            statistics[k] = kNaN;
            distances[k] = kNaN;
            continue;
          }
          statistics[k] = o.statistic[mi];
          distances[k] = o.distance[mi];
          diverged += o.diverged[mi] ? 1 : 0;
          time_sum += o.fit_ms + o.measure_ms[mi];
        }
        const MeanCv summary = mean_and_cv(distances);
        const std::size_t valid = outcomes.size() - failed;
        SizeResultRow row{config.measures[mi],
                          config.sample_size_pairs[pi].n_x,
                          config.sample_size_pairs[pi].n_y,
                          config.looks[li],
                          rejection_rates(statistics, ok, dof, config.alpha_levels),
                          summary.mean,
                          summary.cv,
                          valid > 0 ? time_sum / static_cast<double>(valid) : kNaN,
                          diverged,
                          failed};
        result.rows.push_back(std::move(row));
        result.statistics.push_back(std::move(statistics));
      }
    }
  }
  return result;
}

std::vector<RobustnessResultRow> robustness_study(const SizeExperimentConfig& config,
                                                  const ContaminationSpec& contamination) {
  validate(config);
  validate(contamination);
  const int dof = experiment_dof(config);
  const std::vector<DistanceMeasure> measures{DistanceMeasure::kullback_leibler()};

  std::vector<RobustnessResultRow> rows;
  for (const auto& pair : config.sample_size_pairs) {
    for (double looks : config.looks) {
      const WishartParams truth(looks, config.sigma);
      const auto outcomes = run_cell(config, truth, pair, contamination, measures);
      const std::vector<double> true_diag = diagonal_of(config.sigma);

      std::vector<double> statistics(outcomes.size());
      std::vector<double> distances(outcomes.size());
      std::vector<char> ok(outcomes.size());
      double se_looks_x = 0.0;
      double se_looks_y = 0.0;
      double rse_sigma_x = 0.0;
      double rse_sigma_y = 0.0;
      std::size_t valid = 0;
      for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& o = outcomes[k];
        ok[k] = o.ok ? 1 : 0;
        statistics[k] = o.ok ? o.statistic[0] : kNaN;
        distances[k] = o.ok ? o.distance[0] : kNaN;
        if (!o.ok) continue;
        ++valid;
        se_looks_x += (o.looks_x - looks) * (o.looks_x - looks);
        se_looks_y += (o.looks_y - looks) * (o.looks_y - looks);
        for (std::size_t h = 0; h < true_diag.size(); ++h) {
          rse_sigma_x += (o.diag_x[h] - true_diag[h]) * (o.diag_x[h] - true_diag[h]) / true_diag[h];
          rse_sigma_y += (o.diag_y[h] - true_diag[h]) * (o.diag_y[h] - true_diag[h]) / true_diag[h];
        }
      }
      const double denom = valid > 0 ? static_cast<double>(valid) : kNaN;
      const MeanCv summary = mean_and_cv(distances);
      RobustnessResultRow row{pair.n_x,
                              pair.n_y,
                              looks,
                              rejection_rates(statistics, ok, dof, config.alpha_levels),
                              summary.mean,
                              summary.cv,
                              se_looks_x / denom,
                              se_looks_y / denom,
                              0.0,
                              rse_sigma_x / denom,
                              rse_sigma_y / denom,
                              0.0,
                              outcomes.size() - valid};
      row.r1 = row.mse_looks_x / row.mse_looks_y;
      row.r2 = row.rmse_sigma_x / row.rmse_sigma_y;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SensitivityPoint> sensitivity_sweep(const WishartParams& fixed,
                                                const SweepTarget& target,
                                                const std::vector<double>& grid,
                                                const std::vector<DistanceMeasure>& measures) {
  if (grid.empty()) throw Error(ErrorCode::DomainError, "sensitivity grid is empty");
  if (target.kind == SweepTarget::Kind::SigmaEntry &&
      (target.row >= fixed.dim() || target.col >= fixed.dim())) {
    throw Error(ErrorCode::DomainError, "swept entry lies outside the covariance matrix");
  }
  for (const auto& m : measures) validate(m);

  std::vector<SensitivityPoint> points;
  points.reserve(grid.size() * measures.size());
  for (double value : grid) {
    std::optional<WishartParams> perturbed;
    std::string status = "ok";
    try {
      if (target.kind == SweepTarget::Kind::Looks) {
        perturbed.emplace(value, fixed.sigma());
      } else {
        const Complex old = fixed.sigma()(target.row, target.col);
        perturbed.emplace(fixed.looks(),
                          fixed.sigma().with_entry(target.row, target.col,
                                                   Complex(value, old.imag())));
      }
    } catch (const Error& e) {
      status = std::string(error_code_name(e.code()));
    }
    for (const auto& m : measures) {
      if (!perturbed) {
        points.push_back({value, m, kNaN, status});
        continue;
      }
      try {
        points.push_back({value, m, distance(m, fixed, *perturbed), "ok"});
      } catch (const Error& e) {
        points.push_back({value, m, kNaN, std::string(error_code_name(e.code()))});
      }
    }
  }
  return points;
}

std::size_t IndexBlock::size() const noexcept {
  std::size_t n = 0;
  for (const auto& r : ranges) n += r.size();
  return n;
}

std::vector<BlockPair> block_pairs(std::size_t total, std::size_t n_x, std::size_t n_y) {
  if (n_x == 0 || n_y == 0) {
    throw Error(ErrorCode::InsufficientData, "block sizes must be positive");
  }
  if (total < n_x) {
    throw Error(ErrorCode::InsufficientData,
                "sample of " + std::to_string(total) + " cannot hold an X block of " +
                    std::to_string(n_x));
  }
  std::vector<BlockPair> pairs;
  const std::size_t x_blocks = total / n_x;
  for (std::size_t b = 0; b < x_blocks; ++b) {
    const IndexRange x{b * n_x, (b + 1) * n_x};
    // Positions of the complement of x, in index order: [0, x.begin) then [x.end, total).
    const std::size_t remaining = total - n_x;
    const std::size_t y_blocks = remaining / n_y;
    for (std::size_t c = 0; c < y_blocks; ++c) {
      const std::size_t first = c * n_y;  // position within the complement
      const std::size_t last = first + n_y;
      IndexBlock y;
      auto to_index = [&](std::size_t pos) { return pos < x.begin ? pos : pos + n_x; };
      if (last <= x.begin || first >= x.begin) {
        y.ranges.push_back({to_index(first), to_index(last - 1) + 1});
      } else {
        y.ranges.push_back({first, x.begin});
        y.ranges.push_back({x.end, to_index(last - 1) + 1});
      }
      pairs.push_back({x, std::move(y)});
    }
  }
  return pairs;
}

MatrixSample extract(const MatrixSample& sample, const IndexRange& range) {
  if (range.end > sample.size() || range.begin >= range.end) {
    throw Error(ErrorCode::InsufficientData, "index range outside the sample");
  }
  return MatrixSample(std::vector<HermitianMatrix>(sample.begin() + range.begin,
                                                   sample.begin() + range.end));
}

MatrixSample extract(const MatrixSample& sample, const IndexBlock& block) {
  std::vector<HermitianMatrix> items;
  items.reserve(block.size());
  for (const auto& r : block.ranges) {
    if (r.end > sample.size()) {
      throw Error(ErrorCode::InsufficientData, "index range outside the sample");
    }
    items.insert(items.end(), sample.begin() + r.begin, sample.begin() + r.end);
  }
  return MatrixSample(std::move(items));
}

BlockStudyResult block_study(const MatrixSample& sample, std::size_t n_x, std::size_t n_y,
                             const std::vector<DistanceMeasure>& measures,
                             const std::vector<double>& alpha_levels,
                             const TestOptions& options) {
  for (const auto& m : measures) validate(m);
  BlockStudyResult result;
  result.pairs = block_pairs(sample.size(), n_x, n_y);
  std::vector<std::vector<double>> rejections(measures.size(),
                                              std::vector<double>(alpha_levels.size(), 0.0));

  for (std::size_t i = 0; i < result.pairs.size(); ++i) {
    const auto& pair = result.pairs[i];
    const MLFit fit_x = fit(extract(sample, pair.x), options.fixed_looks);
    const MLFit fit_y = fit(extract(sample, pair.y), options.fixed_looks);
    for (std::size_t j = 0; j < measures.size(); ++j) {
      TestOutcome outcome{};
      try {
        outcome = test_fits(measures[j], fit_x, fit_y, alpha_levels, options);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ChiSquareDiverges) throw;
        const int dof = options.dof_override.value_or(
            degrees_of_freedom(static_cast<int>(sample.dim()), !options.fixed_looks));
        outcome = decide(kInf, kInf, dof, alpha_levels);
      }
      BlockTestRecord record{i, measures[j], outcome.statistic, outcome.distance,
                             outcome.p_value, {}};
      for (std::size_t a = 0; a < alpha_levels.size(); ++a) {
        const bool rejected = outcome.reject_at.at(alpha_levels[a]);
        record.reject.push_back(rejected);
        if (rejected) rejections[j][a] += 1.0;
      }
      result.records.push_back(std::move(record));
    }
  }
  const double n = static_cast<double>(result.pairs.size());
  for (auto& per_measure : rejections) {
    for (auto& r : per_measure) r = result.pairs.empty() ? kNaN : r / n;
  }
  result.empirical_size = std::move(rejections);
  return result;
}

}  // namespace polwishart
