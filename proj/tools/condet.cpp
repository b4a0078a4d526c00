// condet: constraint-aware multi-label detection toolkit.
//
// Subcommands cover the full pipeline: validate, loss, nms, correct, train,
// apply, eval, gen, export-wcnf. Every subcommand is deterministic for fixed
// flags and seeds, including parallel runs, and output files are written via
// a temp-file-then-rename so failures never leave partial outputs.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "condet/datagen.hpp"
#include "condet/detections.hpp"
#include "condet/eval.hpp"
#include "condet/fuzzy.hpp"
#include "condet/labels.hpp"
#include "condet/maxsat.hpp"
#include "condet/net.hpp"
#include "condet/parallel.hpp"
#include "condet/training.hpp"
#include "condet/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace condet;

namespace {

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary);
    if (!out) throw InputError("cannot open '" + temp.string() + "' for writing");
    out << content;
    if (!out) throw InputError("write to '" + temp.string() + "' failed");
  }
  fs::rename(temp, target);
}

std::string detections_text(const std::vector<DetectionFrame>& frames) {
  std::ostringstream out;
  write_detections(out, frames);
  return out.str();
}

std::string truth_text(const std::vector<TruthFrame>& frames) {
  std::ostringstream out;
  write_truth(out, frames);
  return out.str();
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return out;
}

// ---- external MaxSAT backend ------------------------------------------

std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'') quoted += "'\\''";
    else quoted += c;
  }
  quoted += "'";
  return quoted;
}

std::string run_command(const std::string& command) {
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw InputError("failed to spawn: " + command);
  std::string output;
  char buffer[4096];
  std::size_t got;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, got);
  const int status = pclose(pipe);
  if (status < 0) throw InputError("external solver did not run: " + command);
  return output;
}

SolverFn make_external_solver(const std::string& binary) {
  static std::atomic<std::uint64_t> counter{0};
  return [binary](const WcnfProblem& prob) {
    const fs::path wcnf_path =
        fs::temp_directory_path() /
        ("condet_" + std::to_string(::getpid()) + "_" +
         std::to_string(counter.fetch_add(1)) + ".wcnf");
    atomic_write(wcnf_path.string(), to_wcnf(prob));
    std::string output;
    try {
      output = run_command(shell_quote(binary) + " " + shell_quote(wcnf_path.string()) +
                           " 2>/dev/null");
    } catch (...) {
      fs::remove(wcnf_path);
      throw;
    }
    fs::remove(wcnf_path);
    const ExternalResult result = parse_solver_output(output, prob.num_vars);
    if (!hard_satisfied(prob, result.assignment)) {
      throw InputError("external solver model violates the hard clauses");
    }
    return SolveResult{result.assignment, falsified_weight(prob, result.assignment)};
  };
}

// ---- shared option bundles ---------------------------------------------

struct IoOptions {
  std::string labels_path;
  std::string requirements_path;
};

LabelSpace load_labels_arg(const IoOptions& io) { return load_labelspace(io.labels_path); }

// ---- subcommand states ---------------------------------------------------

struct ValidateCmd {
  IoOptions io;
};

struct LossCmd {
  IoOptions io;
  std::string scores_path;
  std::string scores_b_path;
  std::string gt_path;
  std::string out_path;
  int stage = 1;
  bool filtered = false;
  double lambda = 10.0;
};

struct NmsCmd {
  std::string labels_path;
  std::string scores_path;
  std::string out_path;
  double tau = 0.25;
  double tau_iou = 0.5;
  std::string mode = "agnostic";
  int jobs = 1;
};

struct CorrectCmd {
  IoOptions io;
  std::string scores_path;
  std::string out_path;
  std::string solver = "internal";
  std::string export_dir;
  std::int64_t scale = 1'000'000;
  std::string weighting = "polarity";
  int jobs = 1;
};

struct ExportCmd {
  IoOptions io;
  std::string scores_path;
  std::string out_dir;
  std::int64_t scale = 1'000'000;
  std::string weighting = "polarity";
};

struct TrainCmd {
  IoOptions io;
  std::string scores_path;
  std::string gt_path;
  std::string split_path;
  std::string out_path;
  std::string trace_path;
  std::string apply_out_path;
  TrainConfig cfg;
};

struct ApplyCmd {
  std::string labels_path;
  std::string model_path;
  std::string scores_path;
  std::string out_path;
  std::string which = "blender";
  int jobs = 1;
};

struct EvalCmd {
  std::string labels_path;
  std::string pred_path;
  std::string gt_path;
  std::string out_path;
  std::string metric = "map";
  double iou_threshold = 0.5;
  int jobs = 1;
};

struct GenCmd {
  IoOptions io;
  std::string out_scores;
  std::string out_gt;
  std::string out_split;
  GenConfig cfg;
};

SoftWeighting parse_weighting(const std::string& name) {
  if (name == "polarity") return SoftWeighting::polarity;
  if (name == "raw") return SoftWeighting::raw;
  throw InputError("unknown weighting '" + name + "' (expected polarity|raw)");
}

// ---- handlers -------------------------------------------------------------

int run_validate(const ValidateCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  std::cout << "labels " << ls.size() << '\n';
  std::cout << "agents " << ls.count(LabelGroup::agent) << '\n';
  std::cout << "actions " << ls.count(LabelGroup::action) << '\n';
  std::cout << "locations " << ls.count(LabelGroup::location) << '\n';
  std::cout << "other " << ls.count(LabelGroup::other) << '\n';
  std::cout << "clauses " << rs.num_clauses() << '\n';
  std::cout << "satisfiable yes\n";
  return 0;
}

std::vector<ScoreVector> flatten_scores(const std::vector<DetectionFrame>& frames) {
  std::vector<ScoreVector> out;
  for (const DetectionFrame& frame : frames) {
    for (const Detection& det : frame.detections) out.push_back(det.scores);
  }
  return out;
}

int run_loss(const LossCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  const auto frames = load_detections(cmd.scores_path, ls.size());
  json out_doc;

  if (cmd.stage == 1) {
    const auto batch = flatten_scores(frames);
    const BatchLossReport report = stage1_loss_batch(rs, batch, cmd.filtered);
    std::cout << "stage 1\n";
    std::cout << "items " << batch.size() << '\n';
    std::cout << "kept " << report.kept.size() << '\n';
    std::cout << "mean_loss " << report.mean_value << '\n';
    out_doc = json{{"stage", 1},
                   {"items", batch.size()},
                   {"kept", report.kept.size()},
                   {"mean_loss", report.mean_value}};
  } else {
    if (cmd.gt_path.empty()) throw InputError("--stage 2 requires --gt");
    const auto truth = load_truth(cmd.gt_path, ls.size());
    const auto frames_b = cmd.scores_b_path.empty()
                              ? frames
                              : load_detections(cmd.scores_b_path, ls.size());
    std::map<std::string, const TruthFrame*> gt_by_id;
    for (const TruthFrame& frame : truth) gt_by_id[frame.frame_id] = &frame;
    std::map<std::string, const DetectionFrame*> b_by_id;
    for (const DetectionFrame& frame : frames_b) b_by_id[frame.frame_id] = &frame;

    Real total = 0.0;
    std::int64_t items = 0;
    for (const DetectionFrame& frame : frames) {
      const auto gt_it = gt_by_id.find(frame.frame_id);
      const auto b_it = b_by_id.find(frame.frame_id);
      if (gt_it == gt_by_id.end()) {
        throw InputError("frame '" + frame.frame_id + "' missing from ground truth");
      }
      if (b_it == b_by_id.end()) {
        throw InputError("frame '" + frame.frame_id + "' missing from blender scores");
      }
      const TruthFrame& gt = *gt_it->second;
      const DetectionFrame& blended = *b_it->second;
      if (gt.boxes.size() != frame.detections.size() ||
          blended.detections.size() != frame.detections.size()) {
        throw InputError("frame '" + frame.frame_id + "': stream detection counts differ");
      }
      for (std::size_t d = 0; d < frame.detections.size(); ++d) {
        const Stage2Loss loss =
            stage2_loss(rs, frame.detections[d].scores, blended.detections[d].scores,
                        gt.boxes[d].labels, cmd.lambda);
        total += loss.value;
        ++items;
      }
    }
    const Real mean = items > 0 ? total / static_cast<Real>(items) : 0.0;
    std::cout << "stage 2\n";
    std::cout << "items " << items << '\n';
    std::cout << "mean_loss " << mean << '\n';
    out_doc = json{{"stage", 2}, {"items", items}, {"mean_loss", mean}};
  }
  if (!cmd.out_path.empty()) atomic_write(cmd.out_path, out_doc.dump() + "\n");
  return 0;
}

int run_nms(const NmsCmd& cmd) {
  const LabelSpace ls = load_labelspace(cmd.labels_path);
  const auto frames = load_detections(cmd.scores_path, ls.size());
  const NmsMode mode = cmd.mode == "per_agent" ? NmsMode::per_agent : NmsMode::agnostic;
  std::vector<DetectionFrame> out(frames.size());
  parallel_for(static_cast<int>(frames.size()), cmd.jobs, [&](int i) {
    out[i] = agent_nms(agent_threshold(frames[i], ls, cmd.tau), ls, cmd.tau_iou, mode);
  });
  atomic_write(cmd.out_path, detections_text(out));
  std::int64_t before = 0, after = 0;
  for (const auto& f : frames) before += static_cast<std::int64_t>(f.detections.size());
  for (const auto& f : out) after += static_cast<std::int64_t>(f.detections.size());
  std::cout << "frames " << frames.size() << '\n';
  std::cout << "detections_in " << before << '\n';
  std::cout << "detections_out " << after << '\n';
  return 0;
}

CorrectOptions correct_options(const std::string& solver, std::int64_t scale,
                               const std::string& weighting) {
  CorrectOptions opts;
  opts.scale = scale;
  opts.weighting = parse_weighting(weighting);
  if (solver == "internal") {
    // default in-process solver
  } else if (solver.rfind("external:", 0) == 0) {
    const std::string binary = solver.substr(9);
    if (binary.empty()) throw InputError("--solver external: requires a binary path");
    opts.solver = make_external_solver(binary);
  } else {
    throw InputError("unknown solver '" + solver + "' (expected internal|external:<path>)");
  }
  return opts;
}

void export_problems(const std::string& dir, const LabelSpace& ls, const RequirementSet& rs,
                     const std::vector<DetectionFrame>& frames, std::int64_t scale,
                     SoftWeighting weighting) {
  fs::create_directories(dir);
  for (const DetectionFrame& frame : frames) {
    for (std::size_t d = 0; d < frame.detections.size(); ++d) {
      const WcnfProblem prob = encode(rs, frame.detections[d].scores, scale, weighting);
      const fs::path path =
          fs::path(dir) / (sanitize_id(frame.frame_id) + "_" + std::to_string(d) + ".wcnf");
      atomic_write(path.string(), to_wcnf(prob));
    }
  }
  (void)ls;
}

int run_correct(const CorrectCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  const auto frames = load_detections(cmd.scores_path, ls.size());
  const CorrectOptions opts = correct_options(cmd.solver, cmd.scale, cmd.weighting);

  if (!cmd.export_dir.empty()) {
    export_problems(cmd.export_dir, ls, rs, frames, cmd.scale, opts.weighting);
  }

  std::vector<TruthFrame> out(frames.size());
  parallel_for(static_cast<int>(frames.size()), cmd.jobs, [&](int i) {
    out[i] = TruthFrame{frames[i].frame_id, correct_frame(rs, frames[i], opts)};
  });
  atomic_write(cmd.out_path, truth_text(out));

  std::int64_t boxes = 0;
  for (const auto& f : out) boxes += static_cast<std::int64_t>(f.boxes.size());
  std::cout << "frames " << out.size() << '\n';
  std::cout << "boxes " << boxes << '\n';
  return 0;
}

int run_export(const ExportCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  const auto frames = load_detections(cmd.scores_path, ls.size());
  export_problems(cmd.out_dir, ls, rs, frames, cmd.scale, parse_weighting(cmd.weighting));
  std::int64_t problems = 0;
  for (const auto& f : frames) problems += static_cast<std::int64_t>(f.detections.size());
  std::cout << "problems " << problems << '\n';
  return 0;
}

std::set<std::string> read_split(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("split file: " + std::string(e.what()));
  }
  std::set<std::string> ids;
  for (const json& id : doc.at("labeled_frames")) ids.insert(id.get<std::string>());
  return ids;
}

int run_train(const TrainCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  const auto frames = load_detections(cmd.scores_path, ls.size());
  const auto truth = load_truth(cmd.gt_path, ls.size());
  const auto labeled_ids = read_split(cmd.split_path);

  std::map<std::string, const TruthFrame*> gt_by_id;
  for (const TruthFrame& frame : truth) gt_by_id[frame.frame_id] = &frame;

  SemiSupervisedSet data;
  for (const DetectionFrame& frame : frames) {
    if (labeled_ids.count(frame.frame_id)) {
      const auto it = gt_by_id.find(frame.frame_id);
      if (it == gt_by_id.end()) {
        throw InputError("labeled frame '" + frame.frame_id + "' missing from ground truth");
      }
      if (it->second->boxes.size() != frame.detections.size()) {
        throw InputError("frame '" + frame.frame_id + "': detection counts differ from truth");
      }
      for (std::size_t d = 0; d < frame.detections.size(); ++d) {
        data.labeled.push_back(
            LabeledSample{frame.detections[d].scores, it->second->boxes[d].labels});
      }
    } else {
      for (const Detection& det : frame.detections) data.unlabeled.push_back(det.scores);
    }
  }

  const TrainResult result = train_semisupervised(data, rs, cmd.cfg);

  {
    std::ostringstream buffer;
    save_checkpoint(buffer, result.corrector, result.blender);
    atomic_write(cmd.out_path, buffer.str());
  }
  if (!cmd.trace_path.empty()) {
    std::ostringstream buffer;
    for (const TraceEntry& entry : result.trace) {
      buffer << json{{"epoch", entry.epoch},
                     {"stage", entry.stage},
                     {"batch", entry.batch},
                     {"loss", entry.loss}}
                    .dump()
             << '\n';
    }
    atomic_write(cmd.trace_path, buffer.str());
  }
  if (!cmd.apply_out_path.empty()) {
    std::vector<DetectionFrame> blended(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      blended[i].frame_id = frames[i].frame_id;
      for (const Detection& det : frames[i].detections) {
        const ScoreVector y_c = corrector_forward(result.corrector, det.scores);
        blended[i].detections.push_back(
            Detection{det.box, blender_forward(result.blender, det.scores, y_c)});
      }
    }
    atomic_write(cmd.apply_out_path, detections_text(blended));
  }

  std::cout << "labeled_samples " << data.labeled.size() << '\n';
  std::cout << "unlabeled_samples " << data.unlabeled.size() << '\n';
  std::cout << "epochs " << cmd.cfg.epochs << '\n';
  if (!result.trace.empty()) {
    std::cout << "final_loss " << result.trace.back().loss << '\n';
  }
  return 0;
}

int run_apply(const ApplyCmd& cmd) {
  const LabelSpace ls = load_labelspace(cmd.labels_path);
  const auto [corrector, blender] = load_checkpoint_file(cmd.model_path);
  if (corrector.in_size() != ls.size()) {
    throw InputError("checkpoint label width " + std::to_string(corrector.in_size()) +
                     " does not match label file (" + std::to_string(ls.size()) + ")");
  }
  const auto frames = load_detections(cmd.scores_path, ls.size());
  const bool use_blender = cmd.which == "blender";
  if (!use_blender && cmd.which != "corrector") {
    throw InputError("--which must be corrector or blender");
  }
  std::vector<DetectionFrame> out(frames.size());
  parallel_for(static_cast<int>(frames.size()), cmd.jobs, [&](int i) {
    out[i].frame_id = frames[i].frame_id;
    for (const Detection& det : frames[i].detections) {
      const ScoreVector y_c = corrector_forward(corrector, det.scores);
      out[i].detections.push_back(Detection{
          det.box, use_blender ? blender_forward(blender, det.scores, y_c) : y_c});
    }
  });
  atomic_write(cmd.out_path, detections_text(out));
  std::cout << "frames " << out.size() << '\n';
  return 0;
}

int run_eval(const EvalCmd& cmd) {
  const LabelSpace ls = load_labelspace(cmd.labels_path);
  const auto truth = load_truth(cmd.gt_path, ls.size());
  const MatchConfig match{cmd.iou_threshold};
  EvalReport report;
  bool is_map = false;
  if (cmd.metric == "map") {
    is_map = true;
    report = frame_map(load_detections(cmd.pred_path, ls.size()), truth, ls, match, cmd.jobs);
  } else if (cmd.metric == "prf1") {
    report = prf1(load_truth(cmd.pred_path, ls.size()), truth, ls, match);
  } else {
    throw InputError("unknown metric '" + cmd.metric + "' (expected map|prf1)");
  }
  std::cout << report_table(report, ls, is_map);
  if (!cmd.out_path.empty()) atomic_write(cmd.out_path, report_json(report, ls, is_map) + "\n");
  return 0;
}

int run_gen(const GenCmd& cmd) {
  const LabelSpace ls = load_labels_arg(cmd.io);
  const RequirementSet rs = load_requirements(cmd.io.requirements_path, ls);
  const GeneratedData data = generate(rs, cmd.cfg);

  atomic_write(cmd.out_scores, detections_text(data.scored));
  atomic_write(cmd.out_gt, truth_text(data.truth));
  json split;
  json ids = json::array();
  for (int i = 0; i < data.num_labeled_frames; ++i) ids.push_back(data.truth[i].frame_id);
  split["labeled_frames"] = std::move(ids);
  atomic_write(cmd.out_split, split.dump() + "\n");

  std::cout << "frames " << data.truth.size() << '\n';
  std::cout << "labeled_frames " << data.num_labeled_frames << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constraint-aware multi-label detection toolkit"};
  app.require_subcommand(1);

  ValidateCmd validate_cmd;
  auto* validate = app.add_subcommand("validate", "parse label and requirement files");
  validate->add_option("--labels", validate_cmd.io.labels_path, "label file")
      ->required()->check(CLI::ExistingFile);
  validate->add_option("--requirements", validate_cmd.io.requirements_path, "requirement file")
      ->required()->check(CLI::ExistingFile);

  LossCmd loss_cmd;
  auto* loss = app.add_subcommand("loss", "constrained losses over a score stream");
  loss->add_option("--labels", loss_cmd.io.labels_path)->required()->check(CLI::ExistingFile);
  loss->add_option("--requirements", loss_cmd.io.requirements_path)
      ->required()->check(CLI::ExistingFile);
  loss->add_option("--scores", loss_cmd.scores_path, "detection stream (corrector scores)")
      ->required()->check(CLI::ExistingFile);
  loss->add_option("--stage", loss_cmd.stage, "1 or 2")->check(CLI::Range(1, 2));
  loss->add_flag("--filtered", loss_cmd.filtered, "apply the anchor filter (stage 1)");
  loss->add_option("--gt", loss_cmd.gt_path, "truth stream (stage 2)")->check(CLI::ExistingFile);
  loss->add_option("--scores-b", loss_cmd.scores_b_path, "blender scores (stage 2)")
      ->check(CLI::ExistingFile);
  loss->add_option("--lambda", loss_cmd.lambda, "constrained-term weight (stage 2)");
  loss->add_option("--out", loss_cmd.out_path, "machine-readable report path");

  NmsCmd nms_cmd;
  auto* nms = app.add_subcommand("nms", "agent-wise thresholding and NMS");
  nms->add_option("--labels", nms_cmd.labels_path)->required()->check(CLI::ExistingFile);
  nms->add_option("--scores", nms_cmd.scores_path)->required()->check(CLI::ExistingFile);
  nms->add_option("--out", nms_cmd.out_path)->required();
  nms->add_option("--tau", nms_cmd.tau, "agent score threshold")->check(CLI::Range(0.0, 1.0));
  nms->add_option("--iou", nms_cmd.tau_iou, "suppression IoU")->check(CLI::Range(0.0, 1.0));
  nms->add_option("--mode", nms_cmd.mode)->check(CLI::IsMember({"agnostic", "per_agent"}));
  nms->add_option("--jobs", nms_cmd.jobs)->check(CLI::PositiveNumber);

  CorrectCmd correct_cmd;
  auto* correct = app.add_subcommand("correct", "MaxSAT decode to requirement-satisfying labels");
  correct->add_option("--labels", correct_cmd.io.labels_path)->required()->check(CLI::ExistingFile);
  correct->add_option("--requirements", correct_cmd.io.requirements_path)
      ->required()->check(CLI::ExistingFile);
  correct->add_option("--scores", correct_cmd.scores_path)->required()->check(CLI::ExistingFile);
  correct->add_option("--out", correct_cmd.out_path)->required();
  correct->add_option("--solver", correct_cmd.solver, "internal | external:<path>");
  correct->add_option("--export-wcnf", correct_cmd.export_dir, "also export WCNF files here");
  correct->add_option("--scale", correct_cmd.scale)->check(CLI::PositiveNumber);
  correct->add_option("--weighting", correct_cmd.weighting)
      ->check(CLI::IsMember({"polarity", "raw"}));
  correct->add_option("--jobs", correct_cmd.jobs)->check(CLI::PositiveNumber);

  ExportCmd export_cmd;
  auto* export_wcnf = app.add_subcommand("export-wcnf", "write per-detection WCNF problems");
  export_wcnf->add_option("--labels", export_cmd.io.labels_path)
      ->required()->check(CLI::ExistingFile);
  export_wcnf->add_option("--requirements", export_cmd.io.requirements_path)
      ->required()->check(CLI::ExistingFile);
  export_wcnf->add_option("--scores", export_cmd.scores_path)->required()->check(CLI::ExistingFile);
  export_wcnf->add_option("--out-dir", export_cmd.out_dir)->required();
  export_wcnf->add_option("--scale", export_cmd.scale)->check(CLI::PositiveNumber);
  export_wcnf->add_option("--weighting", export_cmd.weighting)
      ->check(CLI::IsMember({"polarity", "raw"}));

  TrainCmd train_cmd;
  auto* train = app.add_subcommand("train", "two-stage semi-supervised training");
  train->add_option("--labels", train_cmd.io.labels_path)->required()->check(CLI::ExistingFile);
  train->add_option("--requirements", train_cmd.io.requirements_path)
      ->required()->check(CLI::ExistingFile);
  train->add_option("--scores", train_cmd.scores_path)->required()->check(CLI::ExistingFile);
  train->add_option("--gt", train_cmd.gt_path)->required()->check(CLI::ExistingFile);
  train->add_option("--split", train_cmd.split_path)->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_cmd.out_path, "checkpoint path")->required();
  train->add_option("--trace", train_cmd.trace_path, "loss trace path (JSON lines)");
  train->add_option("--apply-out", train_cmd.apply_out_path,
                    "write blended scores for the whole input stream");
  train->add_option("--epochs", train_cmd.cfg.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--lr", train_cmd.cfg.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--hidden", train_cmd.cfg.hidden)->check(CLI::PositiveNumber);
  train->add_option("--batch1", train_cmd.cfg.stage1_batch)->check(CLI::PositiveNumber);
  train->add_option("--batch2", train_cmd.cfg.stage2_batch)->check(CLI::PositiveNumber);
  train->add_option("--lambda", train_cmd.cfg.lambda)->check(CLI::NonNegativeNumber);
  train->add_option("--seed", train_cmd.cfg.seed);

  ApplyCmd apply_cmd;
  auto* apply = app.add_subcommand("apply", "run a trained checkpoint over a score stream");
  apply->add_option("--labels", apply_cmd.labels_path)->required()->check(CLI::ExistingFile);
  apply->add_option("--model", apply_cmd.model_path)->required()->check(CLI::ExistingFile);
  apply->add_option("--scores", apply_cmd.scores_path)->required()->check(CLI::ExistingFile);
  apply->add_option("--out", apply_cmd.out_path)->required();
  apply->add_option("--which", apply_cmd.which)->check(CLI::IsMember({"corrector", "blender"}));
  apply->add_option("--jobs", apply_cmd.jobs)->check(CLI::PositiveNumber);

  EvalCmd eval_cmd;
  auto* eval = app.add_subcommand("eval", "frame-mAP or precision/recall/F1");
  eval->add_option("--labels", eval_cmd.labels_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", eval_cmd.pred_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_cmd.gt_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--metric", eval_cmd.metric)->check(CLI::IsMember({"map", "prf1"}));
  eval->add_option("--iou", eval_cmd.iou_threshold);
  eval->add_option("--out", eval_cmd.out_path, "machine-readable report path");
  eval->add_option("--jobs", eval_cmd.jobs)->check(CLI::PositiveNumber);

  GenCmd gen_cmd;
  auto* gen = app.add_subcommand("gen", "generate a synthetic benchmark");
  gen->add_option("--labels", gen_cmd.io.labels_path)->required()->check(CLI::ExistingFile);
  gen->add_option("--requirements", gen_cmd.io.requirements_path)
      ->required()->check(CLI::ExistingFile);
  gen->add_option("--out-scores", gen_cmd.out_scores)->required();
  gen->add_option("--out-gt", gen_cmd.out_gt)->required();
  gen->add_option("--out-split", gen_cmd.out_split)->required();
  gen->add_option("--seed", gen_cmd.cfg.seed);
  gen->add_option("--frames", gen_cmd.cfg.num_frames)->check(CLI::NonNegativeNumber);
  gen->add_option("--min-boxes", gen_cmd.cfg.min_boxes)->check(CLI::NonNegativeNumber);
  gen->add_option("--max-boxes", gen_cmd.cfg.max_boxes)->check(CLI::NonNegativeNumber);
  gen->add_option("--sigma", gen_cmd.cfg.sigma)->check(CLI::NonNegativeNumber);
  gen->add_option("--flip", gen_cmd.cfg.flip_prob)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--labeled-fraction", gen_cmd.cfg.labeled_fraction)->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*validate) return run_validate(validate_cmd);
    if (*loss) return run_loss(loss_cmd);
    if (*nms) return run_nms(nms_cmd);
    if (*correct) return run_correct(correct_cmd);
    if (*export_wcnf) return run_export(export_cmd);
    if (*train) return run_train(train_cmd);
    if (*apply) return run_apply(apply_cmd);
    if (*eval) return run_eval(eval_cmd);
    if (*gen) return run_gen(gen_cmd);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
