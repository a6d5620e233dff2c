// tools/commands.cc

#include "commands.h"

#include <filesystem>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

namespace dysflux::cli {

namespace fs = std::filesystem;

namespace {

struct Note {
  std::string utterance_id;
  std::string message;
};

struct Report {
  std::string command;
  std::size_t utterances = 0;
  std::vector<Note> errors;
  std::vector<Note> warnings;

  Json ToJson() const {
    auto notes = [](const std::vector<Note> &v) {
      Json out = Json::array();
      for (const auto &n : v) out.push_back({{"utterance_id", n.utterance_id}, {"message", n.message}});
      return out;
    };
    return {{"command", command},
            {"utterances", utterances},
            {"succeeded", utterances - errors.size()},
            {"errors", notes(errors)},
            {"warnings", notes(warnings)}};
  }
};

void MakeDir(const std::string &dir) {
  if (dir.empty()) throw DataError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir);
}

std::string Join(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

std::string ResolveIn(const std::string &base, const std::string &path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

void CheckId(const std::string &id) {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
    throw DataError("invalid utterance id \"" + id + "\"");
  }
}

AsrHypothesis ParseHypothesis(const Json &j) {
  return HypothesisFromJson(j.is_object() ? j.at("words") : j);
}

// Where word-level hypotheses come from: --hyp (a directory or one JSON
// object keyed by utterance id), else each manifest entry's own path.
class HypothesisSource {
 public:
  explicit HypothesisSource(const std::string &hyp_path) {
    if (hyp_path.empty()) return;
    if (fs::is_directory(hyp_path)) {
      dir_ = hyp_path;
    } else {
      table_ = ReadJsonFile(hyp_path);
      if (!table_->is_object()) throw DataError(hyp_path + ": expected an object keyed by utterance id");
    }
  }

  // nullopt with a warning when no hypothesis is available.
  std::optional<AsrHypothesis> Find(const ManifestEntry &m, const std::string &manifest_dir,
                                    std::string &warning) const {
    std::string path;
    if (table_) {
      if (!table_->contains(m.utterance_id)) {
        warning = "no hypothesis for this utterance; phoneme events only";
        return std::nullopt;
      }
      return ParseHypothesis(table_->at(m.utterance_id));
    }
    if (!dir_.empty()) {
      path = Join(dir_, m.utterance_id + ".hyp.json");
    } else if (!m.hypothesis_path.empty()) {
      path = ResolveIn(manifest_dir, m.hypothesis_path);
    } else {
      return std::nullopt;
    }
    if (!fs::exists(path)) {
      warning = "hypothesis file " + path + " not found; phoneme events only";
      return std::nullopt;
    }
    return ParseHypothesis(ReadJsonFile(path));
  }

 private:
  std::string dir_;
  std::optional<Json> table_;
};

std::vector<ManifestEntry> LoadManifest(const std::string &path) {
  if (path.empty()) throw DataError("--manifest is required");
  return ManifestFromJson(ReadJsonFile(path));
}

void Finish(const std::string &out_dir, const Report &report) {
  for (const auto &w : report.warnings) spdlog::warn("{}: {}", w.utterance_id, w.message);
  for (const auto &e : report.errors) spdlog::error("{}: {}", e.utterance_id, e.message);
  WriteJsonFile(Join(out_dir, report.command + "_report.json"), report.ToJson());
  spdlog::info("{}: {} of {} utterances succeeded", report.command,
               report.utterances - report.errors.size(), report.utterances);
}

// Aligns (and optionally detects) every manifest entry, writing
// <id>.alignment.json and <id>.words.json and/or <id>.events.json.
Report ProcessManifest(const std::string &command, const std::string &manifest_path,
                       const std::string &out_dir, const std::string &hyp_path,
                       const PipelineConfig &cfg, bool write_alignment, bool write_events) {
  const auto entries = LoadManifest(manifest_path);
  const std::string manifest_dir = fs::path(manifest_path).parent_path().string();
  MakeDir(out_dir);
  const Resources res = Resources::Load(cfg);
  const HypothesisSource hyps(write_events ? hyp_path : "");

  std::vector<std::string> errors(entries.size()), warnings(entries.size());
  std::set<std::string> seen;
  std::vector<bool> duplicate(entries.size(), false);
  for (std::size_t i = 0; i != entries.size(); ++i) {
    duplicate[i] = !seen.insert(entries[i].utterance_id).second;
  }

  ParallelFor(entries.size(), cfg.workers, [&](std::size_t i) {
    const ManifestEntry &m = entries[i];
    try {
      CheckId(m.utterance_id);
      if (duplicate[i]) throw DataError("duplicate utterance id");
      spdlog::debug("{}: processing", m.utterance_id);
      const EmissionInput e = ReadEmission(ResolveIn(manifest_dir, m.emission_path), &res.inventory);
      const ReferenceText ref = res.lexicon.Reference(m.reference_text, res.inventory);
      std::optional<AsrHypothesis> hyp;
      if (write_events) hyp = hyps.Find(m, manifest_dir, warnings[i]);
      const UtteranceResult r = ProcessUtterance(e, ref, hyp ? &*hyp : nullptr, res, cfg);
      if (write_alignment) {
        WriteJsonFile(Join(out_dir, m.utterance_id + ".alignment.json"), ToJson(r.state));
        WriteJsonFile(Join(out_dir, m.utterance_id + ".words.json"),
                      WordsDocument(m.utterance_id, r.state));
      }
      if (write_events) {
        WriteJsonFile(Join(out_dir, m.utterance_id + ".events.json"),
                      EventsDocument(m.utterance_id, r));
      }
    } catch (const Error &ex) {
      errors[i] = ex.what();
    } catch (const std::exception &ex) {
      errors[i] = std::string("internal error: ") + ex.what();
    }
  });

  Report report;
  report.command = command;
  report.utterances = entries.size();
  for (std::size_t i = 0; i != entries.size(); ++i) {
    if (!errors[i].empty()) report.errors.push_back({entries[i].utterance_id, errors[i]});
    if (!warnings[i].empty()) report.warnings.push_back({entries[i].utterance_id, warnings[i]});
  }
  return report;
}

int ExitCode(const Report &r) { return r.errors.empty() ? kExitOk : kExitData; }

Report SimulateInto(const PipelineConfig &cfg, const std::string &out_dir) {
  MakeDir(out_dir);
  const Resources res = Resources::Load(cfg);
  const auto count = static_cast<std::size_t>(cfg.corpus.count);
  std::vector<ManifestEntry> manifest(count);
  std::vector<std::string> errors(count);

  ParallelFor(count, cfg.workers, [&](std::size_t i) {
    try {
      const SimulatedUtterance u =
          SimulateUtterance(cfg.corpus, static_cast<int32_t>(i), res.lexicon, res.inventory);
      ManifestEntry &m = manifest[i];
      m.utterance_id = u.id;
      m.emission_path = u.id + ".emission.bin";
      m.clean_alignment_path = u.id + ".clean.json";
      m.events_path = u.id + ".truth.json";
      m.hypothesis_path = u.id + ".hyp.json";
      m.reference_text = u.ref.Text();
      WriteEmission(Join(out_dir, m.emission_path), u.emission, res.inventory);
      Json clean = ToJson(u.truth.clean, res.inventory);
      clean["utterance_id"] = u.id;
      WriteJsonFile(Join(out_dir, m.clean_alignment_path), clean);
      WriteJsonFile(Join(out_dir, m.events_path), TruthDocument(u, res.inventory));
      WriteJsonFile(Join(out_dir, m.hypothesis_path),
                    {{"utterance_id", u.id}, {"words", ToJson(u.hypothesis)}});
    } catch (const std::exception &ex) {
      errors[i] = ex.what();
    }
  });

  Report report;
  report.command = "simulate";
  report.utterances = count;
  std::vector<ManifestEntry> written;
  for (std::size_t i = 0; i != count; ++i) {
    if (errors[i].empty()) {
      written.push_back(manifest[i]);
    } else {
      report.errors.push_back({"utt" + std::to_string(i), errors[i]});
    }
  }
  // The manifest is the completion marker, so it goes last.
  WriteJsonFile(Join(out_dir, "manifest.json"), ToJson(written));
  return report;
}

Report EvaluateInto(const std::string &manifest_path, const std::string &pred_dir,
                    const std::string &out_dir, const PipelineConfig &cfg) {
  if (pred_dir.empty()) throw DataError("--pred is required");
  if (!fs::is_directory(pred_dir)) throw DataError("prediction directory " + pred_dir + " not found");
  const auto entries = LoadManifest(manifest_path);
  const std::string manifest_dir = fs::path(manifest_path).parent_path().string();
  MakeDir(out_dir);
  const PhonemeInventory inv = cfg.inventory_path.empty()
                                   ? PhonemeInventory::Default()
                                   : PhonemeInventory::FromFile(cfg.inventory_path);

  Report report;
  report.command = "evaluate";
  report.utterances = entries.size();
  std::vector<TruthRecord> truth;
  std::vector<PredictionRecord> pred;
  std::vector<std::string> unreadable;
  std::set<std::string> manifest_ids;
  for (const ManifestEntry &m : entries) {
    manifest_ids.insert(m.utterance_id);
    try {
      CheckId(m.utterance_id);
      if (m.events_path.empty()) throw DataError("manifest entry has no events_path");
      TruthRecord t = TruthFromDocument(ReadJsonFile(ResolveIn(manifest_dir, m.events_path)), inv);
      t.id = m.utterance_id;
      truth.push_back(std::move(t));
    } catch (const Error &ex) {
      report.errors.push_back({m.utterance_id, ex.what()});
      unreadable.push_back(m.utterance_id);
      continue;
    }
    const std::string a = Join(pred_dir, m.utterance_id + ".alignment.json");
    const std::string e = Join(pred_dir, m.utterance_id + ".events.json");
    if (!fs::exists(a) || !fs::exists(e)) {
      report.warnings.push_back({m.utterance_id, "no prediction; skipped"});
      continue;
    }
    try {
      PredictionRecord p = PredictionFromDocuments(ReadJsonFile(a), ReadJsonFile(e), inv);
      p.id = m.utterance_id;
      pred.push_back(std::move(p));
    } catch (const Error &ex) {
      report.errors.push_back({m.utterance_id, ex.what()});
    }
  }
  // Prediction files for utterances the manifest does not list.
  std::vector<std::string> stray;
  for (const auto &f : fs::directory_iterator(pred_dir)) {
    const std::string name = f.path().filename().string();
    const std::string suffix = ".events.json";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      const std::string id = name.substr(0, name.size() - suffix.size());
      if (!manifest_ids.count(id)) stray.push_back(id);
    }
  }
  std::sort(stray.begin(), stray.end());

  EvaluationReport r = Evaluate(truth, pred);
  r.skipped.insert(r.skipped.end(), unreadable.begin(), unreadable.end());
  r.skipped.insert(r.skipped.end(), stray.begin(), stray.end());
  WriteJsonFile(Join(out_dir, "evaluation.json"), ToJson(r));
  WriteTextFile(Join(out_dir, "segmentation_ms.csv"), SegmentationCsv(r));
  WriteTextFile(Join(out_dir, "event_f1.csv"), EventCsv(r));
  spdlog::info("evaluate: phoneme event F1 {:.4f}, PER {:.4f}", r.phoneme_events.f1, r.per);
  return report;
}

}  // namespace

PipelineConfig LoadConfig(const Options &opt) {
  PipelineConfig cfg = opt.config_path.empty() ? PipelineConfig{}
                                               : PipelineConfig::FromFile(opt.config_path);
  if (opt.order) cfg.urfa.max_order = *opt.order;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.count) cfg.corpus.count = *opt.count;
  cfg.corpus.seed = cfg.seed;
  cfg.Validate();
  return cfg;
}

int Simulate(const Options &opt) {
  const PipelineConfig cfg = LoadConfig(opt);
  const Report r = SimulateInto(cfg, opt.out_dir);
  Finish(opt.out_dir, r);
  return ExitCode(r);
}

int Align(const Options &opt) {
  const PipelineConfig cfg = LoadConfig(opt);
  const Report r = ProcessManifest("align", opt.manifest_path, opt.out_dir, "", cfg, true, false);
  Finish(opt.out_dir, r);
  return ExitCode(r);
}

int Detect(const Options &opt) {
  const PipelineConfig cfg = LoadConfig(opt);
  const Report r =
      ProcessManifest("detect", opt.manifest_path, opt.out_dir, opt.hyp_path, cfg, false, true);
  Finish(opt.out_dir, r);
  return ExitCode(r);
}

int Evaluate(const Options &opt) {
  const PipelineConfig cfg = LoadConfig(opt);
  const Report r = EvaluateInto(opt.manifest_path, opt.pred_dir, opt.out_dir, cfg);
  Finish(opt.out_dir, r);
  return ExitCode(r);
}

int Run(const Options &opt) {
  const PipelineConfig cfg = LoadConfig(opt);
  MakeDir(opt.out_dir);
  WriteJsonFile(Join(opt.out_dir, "config.json"), cfg.ToJson());
  int code = kExitOk;
  std::string manifest = opt.manifest_path;
  if (manifest.empty()) {
    const std::string corpus = Join(opt.out_dir, "corpus");
    const Report sim = SimulateInto(cfg, corpus);
    Finish(corpus, sim);
    code = std::max(code, ExitCode(sim));
    manifest = Join(corpus, "manifest.json");
  }
  const std::string pred = Join(opt.out_dir, "pred");
  const Report proc = ProcessManifest("run", manifest, pred, opt.hyp_path, cfg, true, true);
  Finish(pred, proc);
  code = std::max(code, ExitCode(proc));

  const auto entries = LoadManifest(manifest);
  const bool has_truth = !entries.empty() &&
                         std::all_of(entries.begin(), entries.end(),
                                     [](const ManifestEntry &m) { return !m.events_path.empty(); });
  if (has_truth) {
    const std::string eval = Join(opt.out_dir, "eval");
    const Report ev = EvaluateInto(manifest, pred, eval, cfg);
    Finish(eval, ev);
    code = std::max(code, ExitCode(ev));
  } else {
    spdlog::info("run: manifest has no ground truth; skipping evaluation");
  }
  return code;
}

}  // namespace dysflux::cli
