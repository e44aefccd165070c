#ifndef SKULLBASE_REPORT_IO_HPP
#define SKULLBASE_REPORT_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skullbase/annotation_io.hpp"
#include "skullbase/evalkit.hpp"
#include "skullbase/pipeline.hpp"

namespace skullbase {

inline Stage stage_from_string(std::string_view s) {
  for (Stage st : {Stage::global, Stage::direct, Stage::local_kg, Stage::local_of_left, Stage::local_of_right}) {
    if (s == to_string(st)) return st;
  }
  throw Error(ErrorCode::CorruptFile, "unknown stage " + std::string(s));
}

inline Json to_json(const SideScore& s) {
  const auto& m = s.measurements;
  return {{"measurements",
           {{"keros_depth_mm", round6(m.keros_depth_mm)},
            {"gera_angle_deg", round6(m.gera_angle_deg)},
            {"tms1_mm", round6(m.tms1_mm)},
            {"tms2_mm", round6(m.tms2_mm)}}},
          {"classes",
           {{"keros", to_string(s.classes.keros)},
            {"gera", to_string(s.classes.gera)},
            {"tms", to_string(s.classes.tms)}}}};
}

inline SideScore side_score_from_json(const Json& j) {
  try {
    SideScore s;
    const Json& m = j.at("measurements");
    s.measurements = {m.at("keros_depth_mm").get<double>(), m.at("gera_angle_deg").get<double>(),
                      m.at("tms1_mm").get<double>(), m.at("tms2_mm").get<double>()};
    const Json& c = j.at("classes");
    s.classes = {class_from_string(c.at("keros").get<std::string>()), class_from_string(c.at("gera").get<std::string>()),
                 class_from_string(c.at("tms").get<std::string>())};
    return s;
  } catch (const Json::exception& e) {
    detail::corrupt(std::string("malformed side score: ") + e.what());
  }
}

inline Json to_json(const FrameRecord& r) {
  return {{"stage", to_string(r.stage)},
          {"kind", to_string(r.frame.kind)},
          {"rect", {{"x0", r.frame.rect.x0}, {"y0", r.frame.rect.y0}, {"width", r.frame.rect.width}, {"height", r.frame.rect.height}}},
          {"size", r.frame.size},
          {"scale", r.frame.scale},
          {"decoded", landmarks_to_json(r.decoded)},
          {"failed", r.failed}};
}

inline Json to_json(const SliceReport& r) {
  Json frames = Json::array();
  for (const auto& f : r.frames) frames.push_back(to_json(f));
  Json sides = Json::object();
  sides["left"] = r.left ? to_json(*r.left) : Json(nullptr);
  sides["right"] = r.right ? to_json(*r.right) : Json(nullptr);
  return {{"sample_id", r.sample_id},
          {"mode", to_string(r.mode)},
          {"predictor", r.predictor},
          {"spacing", Json::array({r.spacing.x, r.spacing.y})},
          {"landmarks_px", landmarks_to_json(r.landmarks)},
          {"frames", frames},
          {"sides", sides},
          {"status", to_string(r.status())}};
}

inline SliceReport report_from_json(const Json& j) {
  try {
    SliceReport r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.mode = mode_from_string(j.at("mode").get<std::string>());
    r.predictor = j.at("predictor").get<std::string>();
    r.spacing = {j.at("spacing").at(0).get<double>(), j.at("spacing").at(1).get<double>()};
    r.landmarks = landmarks_from_json(j.at("landmarks_px"));
    for (const auto& f : j.at("frames")) {
      FrameRecord rec;
      rec.stage = stage_from_string(f.at("stage").get<std::string>());
      rec.frame.kind = f.at("kind").get<std::string>() == "global" ? FrameKind::global : FrameKind::patch;
      const Json& rect = f.at("rect");
      rec.frame.rect = {rect.at("x0").get<long>(), rect.at("y0").get<long>(), rect.at("height").get<std::size_t>(),
                        rect.at("width").get<std::size_t>()};
      rec.frame.size = f.at("size").get<std::size_t>();
      rec.frame.scale = f.at("scale").get<double>();
      rec.decoded = landmarks_from_json(f.at("decoded"));
      rec.failed = f.at("failed").get<std::vector<std::string>>();
      r.frames.push_back(std::move(rec));
    }
    const Json& sides = j.at("sides");
    if (!sides.at("left").is_null()) r.left = side_score_from_json(sides.at("left"));
    if (!sides.at("right").is_null()) r.right = side_score_from_json(sides.at("right"));
    return r;
  } catch (const Json::exception& e) {
    detail::corrupt(std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::FormatMismatch) detail::corrupt(e.what());
    throw;
  }
}

inline std::filesystem::path report_path(const std::filesystem::path& dir, const std::string& sample_id) {
  return dir / (sample_id + ".report.json");
}

inline void write_report(const SliceReport& r, const std::filesystem::path& path) {
  detail::write_text_file(path, dump_json(to_json(r)));
}

inline SliceReport read_report(const std::filesystem::path& path) {
  return report_from_json(detail::parse_json_file(path));
}

// ---------------------------------------------------------------------------
// Metrics and fold plans
// ---------------------------------------------------------------------------

inline Json to_json(const ConfusionMatrix3& m) {
  Json rows = Json::array();
  for (const auto& row : m.counts) rows.push_back(Json::array({row[0], row[1], row[2]}));
  return rows;
}

inline Json class_report_json(const ConfusionMatrix3& m) {
  Json out = {{"confusion", to_json(m)}, {"total", m.total()}};
  if (m.total() == 0) {
    out["accuracy"] = nullptr;
    return out;
  }
  const ClassMetrics cm = class_metrics(m);
  Json precision = Json::object(), recall = Json::object(), undefined = Json::array();
  for (ClassLabel c : kAllClasses) {
    const auto i = index(c);
    precision[to_string(c)] = cm.precision[i];
    recall[to_string(c)] = cm.recall[i];
    if (!cm.precision_defined[i]) undefined.push_back(std::string("precision_") + to_string(c));
    if (!cm.recall_defined[i]) undefined.push_back(std::string("recall_") + to_string(c));
  }
  out["precision"] = precision;
  out["recall"] = recall;
  out["accuracy"] = cm.accuracy;
  out["undefined"] = undefined;
  return out;
}

inline Json to_json(const EvaluationReport& e) {
  Json per_landmark = Json::object();
  for (const auto& [name, s] : e.landmarks.per_landmark) {
    per_landmark[name] = {{"mae_mm", s.mae_mm}, {"maxe_mm", s.maxe_mm}, {"count", s.count}};
  }
  return {{"samples", e.samples},
          {"landmark",
           {{"mae_mm", e.landmarks.overall.mae_mm},
            {"maxe_mm", e.landmarks.overall.maxe_mm},
            {"count", e.landmarks.overall.count},
            {"per_landmark", per_landmark},
            {"per_sample_maxe_mm", e.landmarks.per_sample_maxe_mm}}},
          {"measurements",
           {{"keros_mae_mm", e.measurements.keros_mm},
            {"gera_mae_deg", e.measurements.gera_deg},
            {"tms1_mae_mm", e.measurements.tms1_mm},
            {"tms2_mae_mm", e.measurements.tms2_mm},
            {"sides", e.measurements.sides}}},
          {"classes",
           {{"keros", class_report_json(e.classes.keros)},
            {"gera", class_report_json(e.classes.gera)},
            {"tms", class_report_json(e.classes.tms)},
            {"overall_accuracy", overall_accuracy(e.classes)}}},
          {"sides_total", e.sides_total},
          {"sides_unscorable", e.sides_unscorable}};
}

inline Json to_json(const FoldPlan& p, std::uint64_t seed) {
  Json folds = Json::array();
  for (const auto& f : p.folds) folds.push_back({{"train_groups", f.train_groups}, {"validation_group", f.validation_group}});
  return {{"seed", seed}, {"groups", p.groups}, {"test_group", p.test_group}, {"folds", folds}};
}

}  // namespace skullbase

#endif  // SKULLBASE_REPORT_IO_HPP
