// Acceptance suite: every criterion prints one pass/fail line with its
// statistic and bound, and fails the corresponding test on violation.

#include <gtest/gtest.h>

#include <cstdio>

#include "drbandit/validate.hpp"

namespace drbandit {
namespace {

void check_rows(const char* criterion, const std::vector<validation::OracleRow>& rows) {
  for (const auto& row : rows) {
    std::printf("[%s] %s: statistic=%.6g bound=%.6g -> %s\n", criterion,
                row.check.c_str(), row.statistic, row.bound, row.pass ? "PASS" : "FAIL");
    EXPECT_TRUE(row.pass) << criterion << " " << row.check << ": statistic "
                          << row.statistic << " vs bound " << row.bound;
  }
}

// Criteria 7 and 8 share one desk-scale sweep; run it once.
const std::vector<validation::OracleRow>& figure_rows_cached() {
  static const std::vector<validation::OracleRow> rows = validation::figure_rows();
  return rows;
}

TEST(Acceptance, C1_DrUnbiasedness) {
  check_rows("C1", validation::dr_unbiasedness_rows());
}

TEST(Acceptance, C2_ClosedFormSelectionProb) {
  check_rows("C2", validation::closed_form_rows());
}

TEST(Acceptance, C3_QuasiMcAccuracy) {
  check_rows("C3", validation::qmc_rows());
}

TEST(Acceptance, C4_Lemma2CandidateFrequency) {
  check_rows("C4", {validation::lemma2_row()});
}

TEST(Acceptance, C5_Lemma4MinEigenvalue) {
  check_rows("C5", validation::lemma4_rows());
}

TEST(Acceptance, C6_Theorem2RateShape) {
  check_rows("C6", validation::rate_rows());
}

TEST(Acceptance, C7_FigureReproduction) {
  std::vector<validation::OracleRow> rows = figure_rows_cached();
  rows.pop_back();  // the exhaustion row belongs to criterion 8
  check_rows("C7", rows);
}

TEST(Acceptance, C8_ResamplingBudget) {
  check_rows("C8", {figure_rows_cached().back()});
}

TEST(Acceptance, C9_IncrementalVsBatch) {
  check_rows("C9", {validation::incremental_row()});
}

}  // namespace
}  // namespace drbandit
