#include <algorithm>
#include <cmath>
#include <bit>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "polwishart/experiments.hpp"
#include "test_util.hpp"

namespace pw = polwishart;
using pw::DistanceMeasure;
using pw::ErrorCode;

namespace {

pw::SizeExperimentConfig small_config() {
  pw::SizeExperimentConfig c;
  c.sigma = oracle::matrix_b();
  c.looks = {4.0, 8.0};
  c.sample_size_pairs = {{49, 49}, {49, 121}};
  c.replicas = 60;
  c.base_seed = 11;
  c.workers = 1;
  return c;
}

bool same_bits(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

void expect_same_rows(const pw::SizeExperimentResult& a, const pw::SizeExperimentResult& b) {
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].empirical_size, b.rows[i].empirical_size);
    EXPECT_TRUE(same_bits(a.rows[i].mean_distance, b.rows[i].mean_distance));
    EXPECT_TRUE(same_bits(a.rows[i].cv, b.rows[i].cv));
    ASSERT_EQ(a.statistics[i].size(), b.statistics[i].size());
    for (std::size_t k = 0; k < a.statistics[i].size(); ++k)
      EXPECT_TRUE(same_bits(a.statistics[i][k], b.statistics[i][k]));
  }
}

}  // namespace

TEST(Validate, NamesOffendingField) {
  auto c = small_config();
  c.replicas = 0;
  try {
    pw::validate(c);
    FAIL() << "expected ValidationError";
  } catch (const pw::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    EXPECT_NE(std::string(e.what()).find("replicas"), std::string::npos);
  }
  c = small_config();
  c.looks = {4.5};
  EXPECT_ERROR_CODE(pw::validate(c), ErrorCode::ValidationError);
  c = small_config();
  c.sample_size_pairs = {{0, 5}};
  EXPECT_ERROR_CODE(pw::validate(c), ErrorCode::ValidationError);
  c = small_config();
  c.alpha_levels = {0.0};
  EXPECT_ERROR_CODE(pw::validate(c), ErrorCode::ValidationError);
}

TEST(EmpiricalSize, AlwaysRejectingLevelGivesOne) {
  auto c = small_config();
  c.alpha_levels = {1.0};
  for (const auto& row : pw::empirical_size(c).rows) EXPECT_EQ(row.empirical_size[0], 1.0);
}

TEST(EmpiricalSize, RowOrderAndBounds) {
  const auto c = small_config();
  const auto r = pw::empirical_size(c);
  ASSERT_EQ(r.rows.size(), c.measures.size() * c.sample_size_pairs.size() * c.looks.size());
  std::size_t i = 0;
  for (const auto& m : c.measures)
    for (const auto& pair : c.sample_size_pairs)
      for (double l : c.looks) {
        const auto& row = r.rows[i++];
        EXPECT_EQ(row.measure, m);
        EXPECT_EQ(row.n_x, pair.n_x);
        EXPECT_EQ(row.n_y, pair.n_y);
        EXPECT_EQ(row.looks, l);
        for (double s : row.empirical_size) {
          EXPECT_GE(s, 0.0);
          EXPECT_LE(s, 1.0);
        }
        EXPECT_GE(row.cv, 0.0);
        EXPECT_GT(row.mean_distance, 0.0);
      }
}

TEST(EmpiricalSize, IndependentOfWorkerCount) {
  auto c = small_config();
  const auto serial = pw::empirical_size(c);
  c.workers = 4;
  expect_same_rows(serial, pw::empirical_size(c));
}

TEST(EmpiricalSize, CellsIndependentOfRestOfConfig) {
  auto c = small_config();
  const auto full = pw::empirical_size(c);
  c.measures = {DistanceMeasure::kullback_leibler()};
  c.looks = {8.0};
  c.sample_size_pairs = {{49, 121}};
  const auto single = pw::empirical_size(c);
  ASSERT_EQ(single.rows.size(), 1u);
  // Full layout: measure-major, then pair, then looks. KL is measure 1.
  const std::size_t idx = 1 * 4 + 1 * 2 + 1;
  ASSERT_EQ(full.rows[idx].measure, DistanceMeasure::kullback_leibler());
  EXPECT_EQ(full.rows[idx].empirical_size, single.rows[0].empirical_size);
  EXPECT_EQ(full.statistics[idx], single.statistics[0]);
}

TEST(EmpiricalSize, SeedChangesResult) {
  auto c = small_config();
  const auto a = pw::empirical_size(c);
  c.base_seed = 12;
  EXPECT_NE(a.statistics[0], pw::empirical_size(c).statistics[0]);
}

TEST(EmpiricalSize, DivergedChiSquareCountsAsRejection) {
  pw::SizeExperimentConfig c;
  c.sigma = pw::HermitianMatrix::identity(1);
  c.looks = {1.0};
  c.sample_size_pairs = {{5, 5}};
  c.replicas = 200;
  c.measures = {DistanceMeasure::chi_square()};
  c.workers = 1;
  const auto r = pw::empirical_size(c);
  const auto& row = r.rows[0];
  EXPECT_GT(row.diverged, 0u);
  std::size_t infinite = 0;
  for (double s : r.statistics[0]) infinite += std::isinf(s) ? 1 : 0;
  EXPECT_EQ(infinite, row.diverged);
  const double valid = static_cast<double>(c.replicas - row.failed);
  EXPECT_GE(row.empirical_size[0] * valid + 1e-9, static_cast<double>(row.diverged));
}

TEST(EmpiricalSize, MeanDistanceFallsWithLooks) {
  pw::SizeExperimentConfig c;
  c.sigma = oracle::matrix_b();
  c.looks = {4.0, 16.0};
  c.sample_size_pairs = {{49, 49}};
  c.replicas = 1000;
  c.measures = {DistanceMeasure::chi_square()};
  c.workers = 0;
  const auto r = pw::empirical_size(c);
  EXPECT_GT(r.rows[0].mean_distance, r.rows[1].mean_distance);
}

TEST(Robustness, CleanSamplesGiveUnitRatios) {
  pw::SizeExperimentConfig c;
  c.sigma = oracle::matrix_b();
  c.looks = {4.0};
  c.sample_size_pairs = {{49, 49}};
  c.replicas = 1000;
  c.workers = 0;
  const auto rows = pw::robustness_study(c, {0.0, 1000.0});
  ASSERT_EQ(rows.size(), 1u);
  const auto& row = rows[0];
  EXPECT_GE(row.r1, 0.8);
  EXPECT_LE(row.r1, 1.25);
  EXPECT_GE(row.r2, 0.8);
  EXPECT_LE(row.r2, 1.25);
  EXPECT_DOUBLE_EQ(row.r1, row.mse_looks_x / row.mse_looks_y);
  EXPECT_DOUBLE_EQ(row.r2, row.rmse_sigma_x / row.rmse_sigma_y);
  EXPECT_GE(row.mse_looks_x, 0.0);
  EXPECT_GE(row.rmse_sigma_y, 0.0);
}

TEST(Robustness, CertainContaminationInflatesCovarianceError) {
  pw::SizeExperimentConfig c;
  c.sigma = oracle::matrix_b();
  c.looks = {4.0};
  c.sample_size_pairs = {{49, 49}};
  c.replicas = 100;
  c.workers = 1;
  const auto row = pw::robustness_study(c, {0.05, 1000.0})[0];
  EXPECT_GT(row.r2, 10.0);
  EXPECT_GT(row.empirical_size[1], 0.5);
}

TEST(Robustness, RowOrder) {
  pw::SizeExperimentConfig c;
  c.sigma = oracle::matrix_b();
  c.looks = {4.0, 8.0};
  c.sample_size_pairs = {{49, 49}, {49, 121}};
  c.replicas = 5;
  c.workers = 1;
  const auto rows = pw::robustness_study(c, {0.0, 10.0});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].looks, 8.0);
  EXPECT_EQ(rows[2].n_y, 121u);
}

TEST(Sensitivity, ZeroAtFixedEntryAndGrowsAway) {
  const pw::WishartParams fixed(8.0, oracle::matrix_b());
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(359000.0 + 100.0 * i);
  grid.push_back(360932.0);
  std::sort(grid.begin(), grid.end());
  auto measures = pw::all_measures(0.9);
  measures.push_back(DistanceMeasure::renyi(0.1));
  const auto pts = pw::sensitivity_sweep(fixed, {pw::SweepTarget::Kind::SigmaEntry, 0, 0}, grid, measures);
  ASSERT_EQ(pts.size(), grid.size() * measures.size());
  for (std::size_t j = 0; j < measures.size(); ++j) {
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& pt = pts[i * measures.size() + j];
      ASSERT_EQ(pt.status, "ok");
      EXPECT_EQ(pt.measure, measures[j]);
      curve.emplace_back(pt.value, pt.distance);
    }
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      const auto [x0, d0] = curve[i];
      const auto [x1, d1] = curve[i + 1];
      if (x1 <= 360932.0) EXPECT_GE(d0, d1) << pw::to_string(measures[j]) << " at " << x0;
      if (x0 >= 360932.0) EXPECT_LE(d0, d1) << pw::to_string(measures[j]) << " at " << x0;
      if (x0 == 360932.0) EXPECT_NEAR(d0, 0.0, 1e-10);
    }
  }
}

TEST(Sensitivity, LooksSweepZeroAtFixedLooks) {
  const pw::WishartParams fixed(8.0, oracle::matrix_b());
  const auto pts = pw::sensitivity_sweep(fixed, {pw::SweepTarget::Kind::Looks, 0, 0},
                                         {5, 6, 7, 8, 9, 10, 11}, pw::all_measures());
  for (const auto& pt : pts) {
    if (pt.status == "ChiSquareDiverges") {
      // 2 L - 8 <= p - 1 only below L = 6.
      EXPECT_EQ(pt.measure, DistanceMeasure::chi_square());
      EXPECT_LT(pt.value, 6.0);
      EXPECT_TRUE(std::isnan(pt.distance));
      continue;
    }
    ASSERT_EQ(pt.status, "ok");
    if (pt.value == 8.0) EXPECT_NEAR(pt.distance, 0.0, 1e-10);
    else EXPECT_GT(pt.distance, 0.0);
  }
}

TEST(Sensitivity, NonPositiveDefinitePointIsFlagged) {
  const pw::WishartParams fixed(8.0, oracle::matrix_b());
  const auto pts = pw::sensitivity_sweep(fixed, {pw::SweepTarget::Kind::SigmaEntry, 0, 0},
                                         {-5.0, 360000.0}, {DistanceMeasure::kullback_leibler()});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].status, "NotPositiveDefinite");
  EXPECT_TRUE(std::isnan(pts[0].distance));
  EXPECT_EQ(pts[1].status, "ok");
}

TEST(Sensitivity, Errors) {
  const pw::WishartParams fixed(8.0, oracle::matrix_b());
  EXPECT_ERROR_CODE(pw::sensitivity_sweep(fixed, {}, {}, pw::all_measures()), ErrorCode::DomainError);
  EXPECT_ERROR_CODE(pw::sensitivity_sweep(fixed, {pw::SweepTarget::Kind::SigmaEntry, 3, 0}, {1.0},
                                          pw::all_measures()),
                    ErrorCode::DomainError);
}

TEST(BlockPairs, Examples) {
  EXPECT_EQ(pw::block_pairs(100, 50, 50).size(), 2u);
  EXPECT_EQ(pw::block_pairs(147, 49, 49).size(), 6u);
  EXPECT_TRUE(pw::block_pairs(90, 49, 49).empty());
}

TEST(BlockPairs, Errors) {
  EXPECT_ERROR_CODE(pw::block_pairs(10, 0, 5), ErrorCode::InsufficientData);
  EXPECT_ERROR_CODE(pw::block_pairs(10, 5, 0), ErrorCode::InsufficientData);
  EXPECT_ERROR_CODE(pw::block_pairs(10, 11, 1), ErrorCode::InsufficientData);
}

TEST(BlockPairs, DisjointAndSized) {
  for (std::size_t total : {20u, 57u, 100u, 147u, 301u})
    for (std::size_t nx : {3u, 7u, 49u})
      for (std::size_t ny : {2u, 9u, 49u}) {
        if (nx > total) continue;
        const auto pairs = pw::block_pairs(total, nx, ny);
        EXPECT_EQ(pairs.size(), (total / nx) * ((total - nx) / ny));
        std::set<std::size_t> xs_seen;
        std::map<std::size_t, std::set<std::size_t>> y_seen;
        for (const auto& pair : pairs) {
          EXPECT_EQ(pair.x.size(), nx);
          EXPECT_EQ(pair.y.size(), ny);
          std::set<std::size_t> x_idx, y_idx;
          for (std::size_t i = pair.x.begin; i < pair.x.end; ++i) x_idx.insert(i);
          for (const auto& r : pair.y.ranges) {
            EXPECT_LE(r.end, total);
            for (std::size_t i = r.begin; i < r.end; ++i) {
              EXPECT_FALSE(x_idx.count(i)) << "Y overlaps X";
              EXPECT_TRUE(y_idx.insert(i).second);
              // Y blocks sharing an X block are disjoint.
              EXPECT_TRUE(y_seen[pair.x.begin].insert(i).second);
            }
          }
          xs_seen.insert(pair.x.begin);
        }
        // X blocks partition a prefix and never overlap.
        std::size_t expected_begin = 0;
        for (std::size_t b : xs_seen) {
          EXPECT_EQ(b, expected_begin);
          expected_begin += nx;
        }
      }
}

TEST(Extract, RangesAndBlocks) {
  const auto s = pw::sample(pw::WishartParams(4.0, oracle::matrix_b()), 10, 3);
  const auto x = pw::extract(s, pw::IndexRange{2, 5});
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x[0], s[2]);
  const auto y = pw::extract(s, pw::IndexBlock{{{0, 1}, {8, 10}}});
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0], s[0]);
  EXPECT_EQ(y[2], s[9]);
  EXPECT_ERROR_CODE(pw::extract(s, pw::IndexRange{8, 11}), ErrorCode::InsufficientData);
}

TEST(BlockStudy, RecordsPerPairAndMeasure) {
  const auto s = pw::sample(pw::WishartParams(8.0, oracle::matrix_b()), 300, 21);
  const std::vector<DistanceMeasure> measures{DistanceMeasure::kullback_leibler(),
                                              DistanceMeasure::hellinger()};
  const auto r = pw::block_study(s, 100, 100, measures, {0.01, 0.05});
  EXPECT_EQ(r.pairs.size(), 6u);
  EXPECT_EQ(r.records.size(), 12u);
  ASSERT_EQ(r.empirical_size.size(), 2u);
  for (const auto& per : r.empirical_size)
    for (double v : per) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  for (const auto& rec : r.records) EXPECT_EQ(rec.reject.size(), 2u);
}

TEST(BlockStudy, EmptyPairingReportsNaN) {
  const auto s = pw::sample(pw::WishartParams(8.0, oracle::matrix_b()), 90, 21);
  const auto r = pw::block_study(s, 49, 49, {DistanceMeasure::kullback_leibler()}, {0.05});
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(std::isnan(r.empirical_size[0][0]));
}
