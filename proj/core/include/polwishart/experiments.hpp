#pragma once

// Monte Carlo harnesses: empirical test size, robustness to contamination, distance
// sensitivity sweeps, and the disjoint-block pairing used on real image regions.
//
// Replica k of a cell draws its two samples from streams keyed by (base seed, looks,
// N_X, N_Y, k), so results do not depend on the number of workers, on the order of
// cells in the configuration, or on which measures are requested. All measures of a
// replica are evaluated on the same pair of fits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polwishart/distances.hpp"
#include "polwishart/hermitian.hpp"
#include "polwishart/hypothesis.hpp"
#include "polwishart/wishart.hpp"

namespace polwishart {

struct SamplePair {
  std::size_t n_x;
  std::size_t n_y;
  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

std::vector<DistanceMeasure> all_measures(double renyi_beta = kDefaultRenyiOrder);

struct SizeExperimentConfig {
  HermitianMatrix sigma;
  std::vector<double> looks;
  std::vector<SamplePair> sample_size_pairs;
  std::vector<double> alpha_levels{0.01, 0.05};
  std::size_t replicas = 1000;
  std::vector<DistanceMeasure> measures = all_measures();
  std::uint64_t base_seed = 1;
  /// When false, L is treated as known and the test uses p^2 degrees of freedom.
  bool estimate_looks = true;
  std::optional<int> dof_override;
  std::optional<ContaminationSpec> contamination;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Throws ValidationError naming the offending field.
void validate(const SizeExperimentConfig& config);

struct SizeResultRow {
  DistanceMeasure measure;
  std::size_t n_x;
  std::size_t n_y;
  double looks;
  /// C / T per entry of alpha_levels.
  std::vector<double> empirical_size;
  /// Mean and coefficient of variation (percent) of the finite distances.
  double mean_distance;
  double cv;
  /// Mean wall time of one test (two fits plus this measure), milliseconds.
  double wall_time_ms;
  /// Replicas whose chi-square integral diverged; counted as rejections.
  std::size_t diverged;
  /// Replicas whose ML fit failed; excluded from C and T.
  std::size_t failed;
};

struct SizeExperimentResult {
  std::vector<SizeResultRow> rows;
  /// Per row, the statistic of every replica (inf when diverged, NaN when failed).
  std::vector<std::vector<double>> statistics;
};

/// Rows are ordered by measure, then sample-size pair, then looks.
SizeExperimentResult empirical_size(const SizeExperimentConfig& config);

struct RobustnessResultRow {
  std::size_t n_x;
  std::size_t n_y;
  double looks;
  std::vector<double> empirical_size;
  double mean_distance;
  double cv;
  double mse_looks_x;
  double mse_looks_y;
  double r1;
  double rmse_sigma_x;
  double rmse_sigma_y;
  double r2;
  std::size_t failed;
};

/// Kullback-Leibler test of a contaminated X sample against a clean Y sample. Rows are
/// ordered by sample-size pair, then looks.
std::vector<RobustnessResultRow> robustness_study(const SizeExperimentConfig& config,
                                                  const ContaminationSpec& contamination);

struct SweepTarget {
  enum class Kind { SigmaEntry, Looks };
  Kind kind = Kind::SigmaEntry;
  /// Entry of Sigma to vary (SigmaEntry only). Off-diagonal entries vary the real part.
  std::size_t row = 0;
  std::size_t col = 0;
};

struct SensitivityPoint {
  double value;
  DistanceMeasure measure;
  /// NaN when the point could not be evaluated.
  double distance;
  /// "ok" or the error code name (NotPositiveDefinite, ChiSquareDiverges, ...).
  std::string status;
};

/// d(fixed, perturbed(value)) for every grid value and measure, grid-major.
std::vector<SensitivityPoint> sensitivity_sweep(const WishartParams& fixed,
                                                const SweepTarget& target,
                                                const std::vector<double>& grid,
                                                const std::vector<DistanceMeasure>& measures);

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin;
  std::size_t end;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Consecutive positions of the complement of an X block; may straddle it.
struct IndexBlock {
  std::vector<IndexRange> ranges;
  std::size_t size() const noexcept;
  friend bool operator==(const IndexBlock&, const IndexBlock&) = default;
};

struct BlockPair {
  IndexRange x;
  IndexBlock y;
};

/// Partition [0, total) into floor(total / n_x) X blocks; for each, split the remaining
/// observations (the complement of that X block, in index order) into disjoint Y blocks
/// of n_y; emit every (X, Y) pair. An empty result is a valid outcome (no Y block fits).
/// Throws InsufficientData when n_x or n_y is zero or total < n_x.
std::vector<BlockPair> block_pairs(std::size_t total, std::size_t n_x, std::size_t n_y);

MatrixSample extract(const MatrixSample& sample, const IndexRange& range);
MatrixSample extract(const MatrixSample& sample, const IndexBlock& block);

struct BlockTestRecord {
  std::size_t pair_index;
  DistanceMeasure measure;
  /// Infinite when the chi-square integral diverged.
  double statistic;
  double distance;
  double p_value;
  std::vector<bool> reject;
};

struct BlockStudyResult {
  std::vector<BlockPair> pairs;
  std::vector<BlockTestRecord> records;
  /// Per measure, rejection rate per alpha level (empty pairing gives NaN).
  std::vector<std::vector<double>> empirical_size;
};

BlockStudyResult block_study(const MatrixSample& sample, std::size_t n_x, std::size_t n_y,
                             const std::vector<DistanceMeasure>& measures,
                             const std::vector<double>& alpha_levels,
                             const TestOptions& options = {});

}  // namespace polwishart
