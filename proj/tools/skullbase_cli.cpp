// skullbase: command-line front end for the skull-base landmark toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error (one line on
// stderr starting with "error:"), 3 internal failure.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "skullbase/skullbase.hpp"

namespace fs = std::filesystem;
using namespace skullbase;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

/// Data problems surfaced to the user; mapped to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_json(const Json& j, const std::string& out) {
  const std::string text = dump_json(j);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    detail::write_text_file(out, text);
  }
}

ClassProbabilities parse_mix(const std::string& text, const char* what) {
  ClassProbabilities p{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 3) break;
    double v = 0;
    const auto* b = item.data();
    const auto [ptr, ec] = std::from_chars(b, b + item.size(), v);
    if (ec != std::errc{} || ptr != b + item.size()) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": bad number '" + item + "'");
    p[i++] = v;
  }
  if (i != 3 || std::getline(ss, item, ',')) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs exactly three comma-separated values");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Predictor selection
// ---------------------------------------------------------------------------

struct PredictorChoice {
  std::string kind;  // oracle | noisy | files
  double noise_std = 0.0;
  fs::path dir;
};

PredictorChoice parse_predictor(const std::string& s) {
  if (s == "oracle") return {"oracle", 0.0, {}};
  if (s.starts_with("noisy:")) {
    const std::string v = s.substr(6);
    double std_px = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), std_px);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !(std_px >= 0.0)) {
      throw CLI::ValidationError("--predictor", "noisy:STD needs a non-negative number");
    }
    return {"noisy", std_px, {}};
  }
  if (s.starts_with("files:") && s.size() > 6) return {"files", 0.0, fs::path(s.substr(6))};
  throw CLI::ValidationError("--predictor", "expected oracle, noisy:STD or files:DIR, got '" + s + "'");
}

std::shared_ptr<const Predictor> make_predictor(const PredictorChoice& c, const TruthLookup& truth,
                                                std::uint64_t seed) {
  if (c.kind == "oracle") return std::make_shared<OraclePredictor>(truth);
  if (c.kind == "noisy") return std::make_shared<NoisyOraclePredictor>(truth, c.noise_std, seed);
  return std::make_shared<FilePredictor>(c.dir);
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string mode = "g2l";
  std::string predictor = "oracle";
  std::string global_predictor;
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  bool resume = false;
};

int cmd_run(const RunOptions& o) {
  const Mode mode = mode_from_string(o.mode);
  if (mode == Mode::groundtruth) throw CLI::ValidationError("--mode", "run supports direct or g2l");
  const PredictorChoice choice = parse_predictor(o.predictor);
  const std::optional<PredictorChoice> global_choice =
      o.global_predictor.empty() ? std::nullopt : std::optional(parse_predictor(o.global_predictor));
  const Manifest manifest = read_manifest(o.manifest);
  fs::create_directories(o.out);

  // Oracle predictors read ground truth lazily per sample; annotations are
  // parsed once up front so workers never touch shared mutable state.
  std::map<std::string, LandmarkMap> truth;
  const bool needs_truth = choice.kind != "files" || (global_choice && global_choice->kind != "files");
  if (needs_truth) {
    for (const auto& e : manifest.entries) truth[e.sample_id] = read_annotation(manifest.root / e.annotations).landmarks;
  }
  const TruthLookup lookup = [&truth](const std::string& id) {
    auto it = truth.find(id);
    if (it == truth.end()) throw Error(ErrorCode::MissingLandmark, "no annotations for sample " + id);
    return it->second;
  };
  StageBindings bindings = StageBindings::all(make_predictor(choice, lookup, o.seed));
  if (global_choice) bindings.global = make_predictor(*global_choice, lookup, o.seed);
  PipelineConfig cfg;
  cfg.mode = mode;
  cfg.validate(bindings);

  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<SliceReport>> reports(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& e = manifest.entries[i];
      const fs::path path = report_path(o.out, e.sample_id);
      try {
        if (o.resume && fs::exists(path)) {
          try {
            SliceReport prior = read_report(path);
            if (prior.sample_id == e.sample_id && prior.mode == mode) {
              reports[i] = std::move(prior);
              continue;
            }
          } catch (const Error&) {
            // Unreadable leftovers from an interrupted run are recomputed.
          }
        }
        const LoadedSample s = load_sample(manifest, e);
        SliceReport r = run(s.image, e.sample_id, bindings, cfg);
        write_report(r, path);
        reports[i] = std::move(r);
      } catch (const Error& err) {
        errors[i] = "sample " + e.sample_id + ": " + err.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, o.jobs ? o.jobs : std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::min<std::size_t>(jobs, n); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Json index = Json::array();
  std::vector<std::string> unscorable;
  for (std::size_t i = 0; i < n; ++i) {
    Json item = {{"sample_id", manifest.entries[i].sample_id},
                 {"report", report_path("", manifest.entries[i].sample_id).string()}};
    if (reports[i]) {
      item["status"] = to_string(reports[i]->status());
      if (reports[i]->status() == ReportStatus::unscorable) unscorable.push_back(manifest.entries[i].sample_id);
    } else {
      item["status"] = "failed";
    }
    index.push_back(item);
  }
  const std::string tag = reports.empty() || !reports.front() ? bindings.global->tag() : reports.front()->predictor;
  detail::write_text_file(fs::path(o.out) / "index.json",
                          dump_json({{"mode", to_string(mode)}, {"predictor", tag}, {"samples", index}}));

  for (const auto& err : errors) {
    if (!err.empty()) throw DataError(err);
  }
  if (!unscorable.empty()) {
    std::string ids;
    for (const auto& id : unscorable) ids += (ids.empty() ? "" : ",") + id;
    throw DataError("Unscorable: " + std::to_string(unscorable.size()) + " sample(s) have no scorable side: " + ids);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / split / score / overlay / synth
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& pred_dir, const std::string& manifest_path, const std::string& out) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<ReportPair> pairs;
  for (const auto& e : manifest.entries) {
    const fs::path p = report_path(pred_dir, e.sample_id);
    if (!fs::exists(p)) throw Error(ErrorCode::MissingPrediction, "no report for sample " + e.sample_id + " in " + pred_dir);
    const LoadedSample s = load_sample(manifest, e);
    pairs.push_back({read_report(p), score_groundtruth(s.image, s.annotations, e.sample_id)});
  }
  emit_json(to_json(evaluate(pairs)), out);
  return kExitOk;
}

int cmd_split(const std::string& manifest_path, std::uint64_t seed, const std::string& out) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<std::string> patients;
  for (const auto& e : manifest.entries) patients.push_back(e.patient_id);
  emit_json(to_json(grouped_folds(patients, seed), seed), out);
  return kExitOk;
}

int cmd_score(const std::string& annotations, const std::string& image, const std::string& out) {
  const LoadedSample s = load_annotated(annotations, image);
  emit_json(to_json(score_groundtruth(s.image, s.annotations, s.sample_id)), out);
  return kExitOk;
}

int cmd_overlay(const std::string& input, const std::string& image, const std::string& out) {
  const Json j = detail::parse_json_file(input);
  if (j.is_object() && j.contains("schema_version")) {
    const LoadedSample s = load_annotated(input, image);
    const SliceReport r = score_groundtruth(s.image, s.annotations, s.sample_id);
    render_overlay(s.image, r, out);
  } else {
    if (image.empty()) throw Error(ErrorCode::InvalidArgument, "--image is required when overlaying a report");
    const SliceReport r = report_from_json(j);
    render_overlay(load_image(image, r.spacing), r, out);
  }
  return kExitOk;
}

struct SynthOptions {
  std::size_t n = 200;
  std::uint64_t seed = 42;
  std::string out;
  std::string mix_keros, mix_gera, mix_tms;
  double spacing = 0.45;
};

int cmd_synth(const SynthOptions& o) {
  ClassMix mix = ClassMix::clinical();
  if (!o.mix_keros.empty()) mix.keros = parse_mix(o.mix_keros, "--mix-keros");
  if (!o.mix_gera.empty()) mix.gera = parse_mix(o.mix_gera, "--mix-gera");
  if (!o.mix_tms.empty()) mix.tms = parse_mix(o.mix_tms, "--mix-tms");
  const auto entries = generate_dataset(o.n, o.seed, mix, o.out, {o.spacing, o.spacing});
  std::cout << "wrote " << entries.size() << " samples to " << o.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// hmap utilities
// ---------------------------------------------------------------------------

/// Oracle targets for an annotated sample. Frames match the ones the
/// pipeline builds, with local patches placed around the decoded global
/// oracle estimates, so the files feed `run --predictor files:DIR` directly.
int cmd_hmap_encode(const std::string& annotations, const std::string& image, const std::string& stage_name,
                    const std::string& out) {
  const LoadedSample s = load_annotated(annotations, image);
  const LandmarkMap& pts = s.annotations.points();
  const auto oracle = std::make_shared<OraclePredictor>([&pts](const std::string&) { return pts; });
  const SliceReport g2l = run_g2l(s.image, s.sample_id, StageBindings::all(oracle), {});

  auto write_stage = [&](Stage stage, const fs::path& path) {
    const StageSpec spec = stage_spec(stage);
    FrameTransform frame = global_frame(square_crop_rect(s.image.height(), s.image.width()), spec.frame_size);
    if (stage != Stage::global && stage != Stage::direct) {
      auto it = std::find_if(g2l.frames.begin(), g2l.frames.end(), [&](const FrameRecord& r) { return r.stage == stage; });
      if (it == g2l.frames.end()) throw Error(ErrorCode::EmptyHeatmap, "no global estimate for stage " + std::string(to_string(stage)));
      frame = it->frame;
    }
    LandmarkMap in_frame;
    for (const auto& [name, p] : stage_targets(spec, pts)) in_frame[name] = frame.forward(p);
    write_hmap(oracle_predict(extract_frame(s.image.pixels(), frame), in_frame, spec), path);
  };

  if (stage_name == "all") {
    fs::create_directories(out);
    for (Stage st : {Stage::global, Stage::direct, Stage::local_kg, Stage::local_of_left, Stage::local_of_right}) {
      write_stage(st, prediction_path(out, s.sample_id, st));
    }
  } else {
    write_stage(stage_from_string(stage_name), out);
  }
  return kExitOk;
}

int cmd_hmap_decode(const std::string& in, int window, const std::string& out) {
  const HeatmapStack stack = read_hmap(in);
  Json points = Json::object();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    try {
      points[stack.names[i]] = point_to_json(decode(stack.channels[i], window));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyHeatmap) throw;
      points[stack.names[i]] = nullptr;
    }
  }
  emit_json(points, out);
  return kExitOk;
}

int cmd_hmap_inspect(const std::string& in) {
  const auto bytes = detail::read_file_bytes(in, ErrorCode::IoError);
  const HeatmapStack stack = decode_hmap(bytes);
  Json channels = Json::array();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const auto& d = stack.channels[i].data();
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    channels.push_back({{"name", stack.names[i]}, {"min", d.empty() ? 0.0 : *lo}, {"max", d.empty() ? 0.0 : *hi}});
  }
  const std::size_t h = stack.empty() ? 0 : stack.channels.front().height();
  const std::size_t w = stack.empty() ? 0 : stack.channels.front().width();
  emit_json({{"version", kHmapVersion}, {"bytes", bytes.size()}, {"height", h}, {"width", w}, {"channels", channels}}, "");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skull-base landmark toolkit: synthetic data, heatmap pipelines, risk scores and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "skullbase 0.1.0");

  std::function<int()> action;

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset with manifest");
  c_synth->add_option("--n", synth.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  c_synth->add_option("--seed", synth.seed, "Master seed")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--mix-keros", synth.mix_keros, "Keros class probabilities a,b,c (default: clinical mix)");
  c_synth->add_option("--mix-gera", synth.mix_gera, "Gera class probabilities a,b,c (default: clinical mix)");
  c_synth->add_option("--mix-tms", synth.mix_tms, "TMS class probabilities a,b,c (default: clinical mix)");
  c_synth->add_option("--spacing", synth.spacing, "Isotropic pixel spacing in mm")->capture_default_str()->check(CLI::PositiveNumber);
  c_synth->callback([&] { action = [&] { return cmd_synth(synth); }; });

  std::string score_ann, score_image, score_out;
  auto* c_score = app.add_subcommand("score", "Score an annotated slice (ground-truth report)");
  c_score->add_option("--annotations", score_ann, "Annotation JSON file")->required()->check(CLI::ExistingFile);
  c_score->add_option("--image", score_image, "Image file (default: path stored in the annotation)");
  c_score->add_option("--out", score_out, "Report JSON output (default: stdout)");
  c_score->callback([&] { action = [&] { return cmd_score(score_ann, score_image, score_out); }; });

  RunOptions run_opt;
  auto* c_run = app.add_subcommand("run", "Run the direct or global-to-local pipeline over a manifest");
  c_run->add_option("--mode", run_opt.mode, "Pipeline mode")->capture_default_str()->check(CLI::IsMember({"direct", "g2l"}));
  c_run->add_option("--predictor", run_opt.predictor, "oracle | noisy:STD | files:DIR")->capture_default_str();
  c_run->add_option("--global-predictor", run_opt.global_predictor,
                    "Override for the global stage only (g2l), same syntax as --predictor");
  c_run->add_option("--manifest", run_opt.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  c_run->add_option("--out", run_opt.out, "Report directory")->required();
  c_run->add_option("--seed", run_opt.seed, "Seed for noisy predictors")->capture_default_str();
  c_run->add_option("--jobs", run_opt.jobs, "Worker threads (0 = available parallelism)")->capture_default_str();
  c_run->add_flag("--resume", run_opt.resume, "Keep existing reports from an earlier run");
  c_run->callback([&] { action = [&] { return cmd_run(run_opt); }; });

  std::string eval_pred, eval_manifest, eval_out;
  auto* c_eval = app.add_subcommand("eval", "Evaluate predicted reports against manifest annotations");
  c_eval->add_option("--pred", eval_pred, "Directory of predicted reports")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--manifest", eval_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval_out, "Metrics JSON output (default: stdout)");
  c_eval->callback([&] { action = [&] { return cmd_eval(eval_pred, eval_manifest, eval_out); }; });

  std::string split_manifest, split_out;
  std::uint64_t split_seed = 0;
  auto* c_split = app.add_subcommand("split", "Patient-grouped six-way split with five folds");
  c_split->add_option("--manifest", split_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  c_split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  c_split->add_option("--out", split_out, "Fold plan JSON output (default: stdout)");
  c_split->callback([&] { action = [&] { return cmd_split(split_manifest, split_seed, split_out); }; });

  std::string ov_ann, ov_image, ov_out;
  auto* c_overlay = app.add_subcommand("overlay", "Render landmarks and score constructions to a PNG");
  c_overlay->add_option("--annotations", ov_ann, "Annotation JSON or report JSON")->required()->check(CLI::ExistingFile);
  c_overlay->add_option("--image", ov_image, "Image file (required for reports)");
  c_overlay->add_option("--out", ov_out, "Output PNG")->required();
  c_overlay->callback([&] { action = [&] { return cmd_overlay(ov_ann, ov_image, ov_out); }; });

  auto* c_hmap = app.add_subcommand("hmap", "Heatmap container utilities");
  c_hmap->require_subcommand(1);
  std::string he_ann, he_image, he_stage = "global", he_out;
  auto* c_he = c_hmap->add_subcommand("encode", "Write oracle target heatmaps for one stage of an annotated slice");
  c_he->add_option("--annotations", he_ann, "Annotation JSON file")->required()->check(CLI::ExistingFile);
  c_he->add_option("--image", he_image, "Image file (default: path stored in the annotation)");
  c_he->add_option("--stage", he_stage,
                   "global | direct | local_kg | local_of_left | local_of_right | all")
      ->capture_default_str()
      ->check(CLI::IsMember({"global", "direct", "local_kg", "local_of_left", "local_of_right", "all"}));
  c_he->add_option("--out", he_out,
                   "Output .hmap file; with --stage all, a directory of <sample_id>.<stage>.hmap files")
      ->required();
  c_he->callback([&] { action = [&] { return cmd_hmap_encode(he_ann, he_image, he_stage, he_out); }; });

  std::string hd_in, hd_out;
  int hd_window = kDecodeWindow;
  auto* c_hd = c_hmap->add_subcommand("decode", "Decode every channel to a sub-pixel point");
  c_hd->add_option("--in", hd_in, "Input .hmap file")->required()->check(CLI::ExistingFile);
  c_hd->add_option("--window", hd_window, "Odd decode window size")->capture_default_str();
  c_hd->add_option("--out", hd_out, "Points JSON output (default: stdout)");
  c_hd->callback([&] { action = [&] { return cmd_hmap_decode(hd_in, hd_window, hd_out); }; });

  std::string hi_in;
  auto* c_hi = c_hmap->add_subcommand("inspect", "Print header, channel names and value ranges");
  c_hi->add_option("--in", hi_in, "Input .hmap file")->required()->check(CLI::ExistingFile);
  c_hi->callback([&] { action = [&] { return cmd_hmap_inspect(hi_in); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version are "errors" with exit code 0.
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e, std::cerr, std::cerr);
    return kExitUsage;
  }

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: CorruptFile: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
