#ifndef SKULLBASE_EVALKIT_HPP
#define SKULLBASE_EVALKIT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "skullbase/core.hpp"
#include "skullbase/pipeline.hpp"

namespace skullbase {

// ---------------------------------------------------------------------------
// Landmark errors
// ---------------------------------------------------------------------------

/// Predicted and reference landmarks of one slice. Only names present in
/// `predicted` are compared; each must exist in `truth`.
struct LandmarkPair {
  std::string sample_id;
  LandmarkMap predicted;
  LandmarkMap truth;
  Spacing spacing;
};

struct LandmarkErrorStats {
  double mae_mm = 0.0;
  double maxe_mm = 0.0;
  std::size_t count = 0;
};

struct LandmarkErrorReport {
  LandmarkErrorStats overall;
  std::map<std::string, LandmarkErrorStats> per_landmark;
  std::map<std::string, double> per_sample_maxe_mm;
};

/// Euclidean error in mm with per-axis spacing.
inline double landmark_error_mm(Point2 pred, Point2 truth, Spacing spacing) {
  return std::hypot((pred.x - truth.x) * spacing.x, (pred.y - truth.y) * spacing.y);
}

/// MAE over every compared landmark of every sample jointly; MAXE is the
/// global maximum.
inline LandmarkErrorReport landmark_errors(std::span<const LandmarkPair> pairs) {
  LandmarkErrorReport out;
  std::map<std::string, double> sums;
  double total = 0.0;
  for (const auto& pair : pairs) {
    double sample_max = 0.0;
    for (const auto& [name, p] : pair.predicted) {
      const double e = landmark_error_mm(p, require_landmark(pair.truth, name), pair.spacing);
      total += e;
      ++out.overall.count;
      out.overall.maxe_mm = std::max(out.overall.maxe_mm, e);
      auto& stats = out.per_landmark[name];
      ++stats.count;
      stats.maxe_mm = std::max(stats.maxe_mm, e);
      sums[name] += e;
      sample_max = std::max(sample_max, e);
    }
    out.per_sample_maxe_mm[pair.sample_id] = sample_max;
  }
  if (out.overall.count > 0) out.overall.mae_mm = total / static_cast<double>(out.overall.count);
  for (auto& [name, stats] : out.per_landmark) stats.mae_mm = sums[name] / static_cast<double>(stats.count);
  return out;
}

// ---------------------------------------------------------------------------
// Measurement errors
// ---------------------------------------------------------------------------

struct MeasurementErrors {
  double keros_mm = 0.0;
  double gera_deg = 0.0;
  double tms1_mm = 0.0;
  double tms2_mm = 0.0;
  std::size_t sides = 0;
};

/// Mean absolute differences over matched sides.
inline MeasurementErrors measurement_errors(std::span<const SideMeasurements> pred,
                                            std::span<const SideMeasurements> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction and reference side counts differ");
  }
  MeasurementErrors out;
  out.sides = pred.size();
  if (pred.empty()) return out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.keros_mm += std::abs(pred[i].keros_depth_mm - truth[i].keros_depth_mm);
    out.gera_deg += std::abs(pred[i].gera_angle_deg - truth[i].gera_angle_deg);
    out.tms1_mm += std::abs(pred[i].tms1_mm - truth[i].tms1_mm);
    out.tms2_mm += std::abs(pred[i].tms2_mm - truth[i].tms2_mm);
  }
  const double n = static_cast<double>(pred.size());
  out.keros_mm /= n;
  out.gera_deg /= n;
  out.tms1_mm /= n;
  out.tms2_mm /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Classes
// ---------------------------------------------------------------------------

/// Rows are ground-truth classes, columns predicted classes.
struct ConfusionMatrix3 {
  std::array<std::array<std::uint64_t, 3>, 3> counts{};

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
      for (auto v : row) t += v;
    return t;
  }
  std::uint64_t operator()(ClassLabel truth, ClassLabel pred) const { return counts[index(truth)][index(pred)]; }

  ConfusionMatrix3& operator+=(const ConfusionMatrix3& o) {
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) counts[r][c] += o.counts[r][c];
    return *this;
  }
  friend bool operator==(const ConfusionMatrix3&, const ConfusionMatrix3&) = default;
};

inline ConfusionMatrix3 confusion(std::span<const ClassLabel> pred, std::span<const ClassLabel> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  ConfusionMatrix3 m;
  for (std::size_t i = 0; i < pred.size(); ++i) ++m.counts[index(truth[i])][index(pred[i])];
  return m;
}

struct ClassMetrics {
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  std::array<bool, 3> precision_defined{};  // false when nothing was predicted as the class
  std::array<bool, 3> recall_defined{};     // false when the class never occurs
  double accuracy = 0.0;
};

/// Per-class precision/recall and accuracy. Undefined ratios are reported as
/// 0 and flagged.
inline ClassMetrics class_metrics(const ConfusionMatrix3& m) {
  const std::uint64_t total = m.total();
  if (total == 0) throw Error(ErrorCode::InvalidArgument, "confusion matrix is empty");
  ClassMetrics out;
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      row += m.counts[c][k];
      col += m.counts[k][c];
    }
    const double hit = static_cast<double>(m.counts[c][c]);
    trace += m.counts[c][c];
    out.precision_defined[c] = col > 0;
    out.recall_defined[c] = row > 0;
    out.precision[c] = col > 0 ? hit / static_cast<double>(col) : 0.0;
    out.recall[c] = row > 0 ? hit / static_cast<double>(row) : 0.0;
  }
  out.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Report-level evaluation
// ---------------------------------------------------------------------------

struct ScoreEvaluation {
  ConfusionMatrix3 keros;
  ConfusionMatrix3 gera;
  ConfusionMatrix3 tms;
};

struct EvaluationReport {
  LandmarkErrorReport landmarks;
  MeasurementErrors measurements;
  ScoreEvaluation classes;
  std::size_t samples = 0;
  std::size_t sides_total = 0;
  std::size_t sides_unscorable = 0;
};

struct ReportPair {
  SliceReport predicted;
  SliceReport truth;
};

/// Compares predicted reports with ground-truth reports side by side.
/// Unscorable predicted sides are counted and excluded from the errors.
inline EvaluationReport evaluate(std::span<const ReportPair> pairs) {
  EvaluationReport out;
  out.samples = pairs.size();
  std::vector<LandmarkPair> lm;
  std::vector<SideMeasurements> pm, tm;
  std::vector<ClassLabel> pk, tk, pg, tg, pt, tt;
  for (const auto& [pred, truth] : pairs) {
    if (pred.sample_id != truth.sample_id) {
      throw Error(ErrorCode::LengthMismatch, "report pair mismatch: " + pred.sample_id + " vs " + truth.sample_id);
    }
    lm.push_back({pred.sample_id, pred.landmarks, truth.landmarks, truth.spacing});
    for (Side side : {Side::left, Side::right}) {
      ++out.sides_total;
      const auto& p = pred.side(side);
      const auto& t = truth.side(side);
      if (!t) throw Error(ErrorCode::InvalidArgument, "reference report lacks a scored side");
      if (!p) {
        ++out.sides_unscorable;
        continue;
      }
      pm.push_back(p->measurements);
      tm.push_back(t->measurements);
      pk.push_back(p->classes.keros);
      tk.push_back(t->classes.keros);
      pg.push_back(p->classes.gera);
      tg.push_back(t->classes.gera);
      pt.push_back(p->classes.tms);
      tt.push_back(t->classes.tms);
    }
  }
  out.landmarks = landmark_errors(lm);
  out.measurements = measurement_errors(pm, tm);
  out.classes = {confusion(pk, tk), confusion(pg, tg), confusion(pt, tt)};
  return out;
}

/// Fraction of correctly classified (side, score) pairs over all three scores.
inline double overall_accuracy(const ScoreEvaluation& s) {
  std::uint64_t hit = 0, total = 0;
  for (const auto* m : {&s.keros, &s.gera, &s.tms}) {
    total += m->total();
    for (std::size_t c = 0; c < 3; ++c) hit += m->counts[c][c];
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

// ---------------------------------------------------------------------------
// Patient-grouped splits
// ---------------------------------------------------------------------------

struct Fold {
  std::vector<std::size_t> train_groups;
  std::size_t validation_group = 0;
};

/// Six patient groups: group 0 is the test set, folds 1..5 each validate on
/// one of the remaining groups and train on the other four.
struct FoldPlan {
  std::vector<std::vector<std::string>> groups;
  std::size_t test_group = 0;
  std::vector<Fold> folds;

  std::size_t group_of(const std::string& patient) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (std::find(groups[g].begin(), groups[g].end(), patient) != groups[g].end()) return g;
    }
    throw Error(ErrorCode::InvalidArgument, "patient " + patient + " is not in the plan");
  }
};

inline constexpr std::size_t kSplitGroups = 6;

/// Seeded shuffle of the unique patient ids, dealt round-robin into groups.
inline FoldPlan grouped_folds(std::span<const std::string> patient_ids, std::uint64_t seed,
                              std::size_t groups = kSplitGroups) {
  if (groups < 2) throw Error(ErrorCode::InvalidArgument, "need at least two groups");
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const auto& id : patient_ids) {
    if (seen.insert(id).second) unique.push_back(id);
  }
  // Sort first so the plan depends only on the patient set, not input order.
  std::sort(unique.begin(), unique.end());
  if (unique.size() < groups) {
    throw Error(ErrorCode::InvalidArgument, "need at least " + std::to_string(groups) + " distinct patients, got " +
                                                std::to_string(unique.size()));
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  // Fisher-Yates with a fixed index draw, so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = unique.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(unique[i], unique[j]);
  }
  FoldPlan plan;
  plan.groups.resize(groups);
  for (std::size_t i = 0; i < unique.size(); ++i) plan.groups[i % groups].push_back(unique[i]);
  plan.test_group = 0;
  for (std::size_t k = 1; k < groups; ++k) {
    Fold f;
    f.validation_group = k;
    for (std::size_t g = 1; g < groups; ++g)
      if (g != k) f.train_groups.push_back(g);
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

}  // namespace skullbase

#endif  // SKULLBASE_EVALKIT_HPP
