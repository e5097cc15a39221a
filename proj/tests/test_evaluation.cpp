#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "ncc/evaluation.hpp"
#include "ncc/synthetic.hpp"
#include "support/fixtures.hpp"

namespace ncc {
namespace {

TEST(Confusion, HandTally) {
  // Causes 1,1,2,3 vs 1,2,2,1, zero-based.
  const std::vector<CauseId> truth = {0, 0, 1, 2};
  const std::vector<CauseId> pred = {0, 1, 1, 0};
  const auto cm = confusion(truth, pred, 3);
  const std::vector<std::vector<std::uint64_t>> expected = {{1, 1, 0}, {0, 1, 0}, {1, 0, 0}};
  for (CauseId t = 0; t < 3; ++t) {
    for (CauseId p = 0; p < 3; ++p) EXPECT_EQ(cm.at(t, p), expected[t][p]) << t << p;
  }
  EXPECT_EQ(cm.true_positives(0), 1u);
  EXPECT_EQ(cm.false_positives(0), 1u);
  EXPECT_EQ(cm.false_negatives(0), 1u);
  EXPECT_EQ(cm.total(), 4u);
}

TEST(Confusion, PerfectIsDiagonalAndConstantIsOneColumn) {
  const std::vector<CauseId> truth = {0, 1, 2, 3, 1};
  const auto cm = confusion(truth, truth, 4);
  for (CauseId t = 0; t < 4; ++t) {
    for (CauseId p = 0; p < 4; ++p) {
      if (t != p) EXPECT_EQ(cm.at(t, p), 0u);
    }
  }
  const std::vector<CauseId> all_c1(5, 0);
  const auto c1 = confusion(truth, all_c1, 4);
  for (CauseId t = 0; t < 4; ++t) {
    for (CauseId p = 1; p < 4; ++p) EXPECT_EQ(c1.at(t, p), 0u);
  }
}

TEST(Confusion, RejectsMismatch) {
  const std::vector<CauseId> a = {0, 1};
  const std::vector<CauseId> b = {0};
  EXPECT_THROW(confusion(a, b, 2), std::invalid_argument);
  const std::vector<CauseId> out = {0, 5};
  EXPECT_THROW(confusion(a, out, 2), std::invalid_argument);
}

TEST(Metrics, DirectSubstitution) {
  ConfusionMatrix cm(2);
  for (int i = 0; i < 3; ++i) cm.add(0, 0);
  cm.add(1, 0);
  cm.add(0, 1);
  cm.add(0, 1);
  const auto m = per_class_metrics(cm);
  EXPECT_DOUBLE_EQ(m[0].precision, 0.75);
  EXPECT_DOUBLE_EQ(m[0].recall, 0.6);
  EXPECT_DOUBLE_EQ(m[0].f1, 2 * 0.75 * 0.6 / 1.35);
  EXPECT_NEAR(m[0].f1, 0.667, 5e-4);
  EXPECT_EQ(m[0].support, 5u);
}

TEST(Metrics, ZeroDenominatorsGiveZero) {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(1, 0);
  const auto m = per_class_metrics(cm);
  // Class 2: never true, never predicted.
  EXPECT_EQ(m[2].precision, 0.0);
  EXPECT_EQ(m[2].recall, 0.0);
  EXPECT_EQ(m[2].f1, 0.0);
  // Class 1: true once, never predicted.
  EXPECT_EQ(m[1].precision, 0.0);
  EXPECT_EQ(m[1].recall, 0.0);
}

TEST(Metrics, DiagonalIsAllOnes) {
  const std::vector<CauseId> truth = {0, 1, 2, 3};
  const auto r = evaluate(truth, truth, 4);
  for (const auto& m : r.per_class) {
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
  }
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Macro, UnweightedMeans) {
  std::vector<ClassMetrics> pc(4);
  const double f1[] = {0.792, 0, 0, 0};
  const double p[] = {0.8, 0.6, 0.4, 0.2};
  for (int j = 0; j < 4; ++j) {
    pc[j].f1 = f1[j];
    pc[j].precision = p[j];
  }
  const auto r = macro(pc);
  EXPECT_DOUBLE_EQ(r.f1, 0.198);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  std::vector<ClassMetrics> one(1);
  EXPECT_THROW(macro(one), std::invalid_argument);
}

TEST(Macro, F1IsMeanOfClassF1NotHarmonicOfMeans) {
  ConfusionMatrix cm(2);
  for (int i = 0; i < 9; ++i) cm.add(0, 0);
  cm.add(0, 1);
  cm.add(1, 1);
  for (int i = 0; i < 3; ++i) cm.add(1, 0);
  const auto pc = per_class_metrics(cm);
  const auto r = macro(pc);
  EXPECT_DOUBLE_EQ(r.f1, (pc[0].f1 + pc[1].f1) / 2);
  EXPECT_NE(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall));
}

TEST(MetricProperties, BoundsAndConservation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + trial % 5;
    const std::size_t n = 1 + rng() % 60;
    std::vector<CauseId> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng() % k;
      p[i] = rng() % k;
    }
    const auto r = evaluate(t, p, k);
    for (const auto& m : r.per_class) {
      for (const double v : {m.precision, m.recall, m.f1}) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
    }
    for (const double v : {r.precision, r.recall, r.f1}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CauseId> t2, p2;
    for (const auto i : perm) {
      t2.push_back(t[i]);
      p2.push_back(p[i]);
    }
    const auto cm2 = confusion(t2, p2, k);
    ASSERT_EQ(cm2, r.matrix);
    ASSERT_EQ(cm2.total(), n);
  }
}

TEST(Ablation, PlantedCorpusStructure) {
  const auto s = synthesize(default_synthetic_spec({60, 25, 12, 6}, 20, 5));
  const auto [train, test] = split(s.corpus, 0.2, 5);
  const auto full = run_ablation(train, test, Variant::full);
  const auto d1 = run_ablation(train, test, Variant::drop1);
  const auto d2 = run_ablation(train, test, Variant::drop2);
  const auto d3 = run_ablation(train, test, Variant::drop3);
  EXPECT_EQ(full.report.f1, 1.0);
  EXPECT_EQ(full.build.model.table.variant(), Variant::full);
  EXPECT_EQ(d1.build.model.table.variant(), Variant::drop1);

  const auto c1 = check_drop1_superset(full.build.details, d1.build.details);
  EXPECT_TRUE(c1.passed) << c1.detail;
  EXPECT_GT(d1.build.model.table.size(), full.build.model.table.size());
  const auto c2 = check_drop2_bypass(d2.build.details);
  EXPECT_TRUE(c2.passed) << c2.detail;
  const auto c3 = check_drop3_scaling(full.build.model.table, d3.build.model.table);
  EXPECT_TRUE(c3.passed) << c3.detail;
  EXPECT_EQ(d3.build.model.table.icf(), full.build.model.table.icf());
  for (const auto& [id, row] : full.build.model.table.rows()) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(row.scores[j], d3.build.model.table.find(id)->scores[j] * full.build.model.table.icf()[j]);
    }
  }
}

TEST(Ablation, ChecksDetectViolations) {
  const auto s = synthesize(testing::small_spec(80));
  const auto [train, test] = split(s.corpus, 0.2, 1);
  const auto full = run_ablation(train, test, Variant::full);
  const auto d3 = run_ablation(train, test, Variant::drop3);
  // Full against itself is not a column scaling unless every icf is 1.
  EXPECT_FALSE(check_drop3_scaling(full.build.model.table, full.build.model.table).passed);
  // Full is not a count-times-icf table.
  EXPECT_FALSE(check_drop2_bypass(full.build.details).passed);
  // Drop3 rows are not a superset of full rows that occur in passed logs.
  const auto d1 = run_ablation(train, test, Variant::drop1);
  EXPECT_FALSE(check_drop1_superset(d1.build.details, full.build.details).passed);
  EXPECT_TRUE(check_drop3_scaling(full.build.model.table, d3.build.model.table).passed);
}

TEST(Ablation, Deterministic) {
  const auto s = synthesize(testing::small_spec(81));
  const auto [train, test] = split(s.corpus, 0.3, 2);
  for (const auto v : {Variant::full, Variant::drop1, Variant::drop2, Variant::drop3}) {
    const auto a = run_ablation(train, test, v);
    const auto b = run_ablation(train, test, v);
    EXPECT_EQ(a.predictions, b.predictions);
    EXPECT_EQ(a.build.model.fingerprint(), b.build.model.fingerprint());
  }
}

TEST(Parallel, PredictionsIndependentOfJobs) {
  const auto s = synthesize(testing::small_spec(82, {40, 20, 10, 6}, 8));
  const auto [train, test] = split(s.corpus, 0.4, 2);
  const auto b = build_model(train);
  const auto one = predict_corpus(b.model, test, 1);
  EXPECT_EQ(predict_corpus(b.model, test, 3), one);
  EXPECT_EQ(predict_corpus(b.model, test, 64), one);
}

TEST(Output, TablesAndRecords) {
  const std::vector<CauseId> truth = {0, 0, 1, 2, 3};
  const std::vector<CauseId> pred = {0, 1, 1, 2, 0};
  const auto r = evaluate(truth, pred, 4);
  std::ostringstream macro_text, class_text, cm_text;
  write_macro_table(macro_text, {{"NCChecker", &r}});
  EXPECT_NE(macro_text.str().find("Precision"), std::string::npos);
  EXPECT_NE(macro_text.str().find("NCChecker"), std::string::npos);
  write_class_table(class_text, CauseTaxonomy::standard(), {{"MCC", &r}, {"NCChecker", &r}});
  EXPECT_NE(class_text.str().find("C4 third-party-library"), std::string::npos);
  write_confusion(cm_text, r.matrix, CauseTaxonomy::standard());
  EXPECT_NE(cm_text.str().find("C4"), std::string::npos);
  const auto recs = report_records("X", r, CauseTaxonomy::standard());
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs[4]["class"], "macro");
  EXPECT_EQ(recs[4]["support"], 5);
  EXPECT_DOUBLE_EQ(recs[4]["f1"].get<double>(), r.f1);
}

}  // namespace
}  // namespace ncc
