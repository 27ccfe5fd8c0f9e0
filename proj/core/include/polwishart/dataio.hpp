#pragma once

// Text formats for samples, experiment configurations and result tables.
//
// Sample file:
//   wishart-sample v1 p=<p> n=<count>
//   [[re,im],[re,im],...]        one line per matrix, p*p entries in row-major order
// Entries are written with 17 significant digits, so a write/read roundtrip is exact.
//
// Experiment config: a JSON object. Keys and defaults:
//   sigma           path to a sample-format file holding one matrix (relative to the
//                   config file) or an inline p x p array of numbers or [re, im] pairs
//   looks           array of integers >= p                       (required)
//   pairs           array of [n_x, n_y]                          (required)
//   alpha           array of levels in (0, 1]                    [0.01, 0.05]
//   replicas        integer >= 1                                 1000
//   measures        array of "chi2", "kl", "renyi[=beta]",
//                   "bhattacharyya", "hellinger"                 all five
//   beta            order used by a bare "renyi"                 0.9
//   seed            unsigned 64-bit integer                      1
//   estimate_looks  boolean                                      true
//   dof             integer override of the degrees of freedom   none
//   contamination   {"epsilon": e, "scale": s}                   none
//   workers         integer, 0 = all hardware threads            0
// Unknown keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polwishart/experiments.hpp"
#include "polwishart/wishart.hpp"

namespace polwishart {

inline constexpr std::string_view kSampleMagic = "wishart-sample";
inline constexpr int kSampleFormatVersion = 1;

MatrixSample read_sample(std::istream& in);
MatrixSample read_sample(const std::filesystem::path& path);

void write_sample(std::ostream& out, const MatrixSample& sample);
/// Throws IoError if `path` exists and `overwrite` is false, or on write failure.
void write_sample(const MatrixSample& sample, const std::filesystem::path& path,
                  bool overwrite = false);

/// Reads a single matrix from a sample-format file (n must be 1).
HermitianMatrix read_matrix(const std::filesystem::path& path);

struct ExperimentConfigFile {
  SizeExperimentConfig experiment;
  double beta = kDefaultRenyiOrder;
};

/// `base_dir` resolves a relative sigma path.
ExperimentConfigFile parse_config(std::string_view text,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfigFile read_config(const std::filesystem::path& path);
/// Fully resolved form with sigma inline; rewriting a parsed output reproduces it.
std::string write_config(const ExperimentConfigFile& config);

/// Shortest decimal that reads back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double value);

/// CSV header and rows. The wall-time column is left empty unless `include_timing`.
void write_size_csv(std::ostream& out, const SizeExperimentResult& result,
                    const std::vector<double>& alpha_levels, bool include_timing);
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessResultRow>& rows,
                          const std::vector<double>& alpha_levels);
void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityPoint>& points);
void write_blocks_csv(std::ostream& out, const BlockStudyResult& result,
                      const std::vector<double>& alpha_levels);

}  // namespace polwishart
