#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "condet/detections.hpp"
#include "condet/labels.hpp"
#include "condet/types.hpp"

namespace condet {

struct MatchConfig {
  Real iou_threshold = 0.5;  // in (0, 1]
};

struct EvalReport {
  // frame_map fields
  Vector per_label_ap;   // 0 for labels without ground truth
  BoolVector has_gt;     // labels with at least one ground-truth instance
  Real frame_map = 0.0;  // mean AP over labels with ground truth

  // prf1 fields (micro-averaged)
  Real precision = 0.0;
  Real recall = 0.0;
  Real f1 = 0.0;
  IntVector tp, fp, fn;  // per-label counts
  std::int64_t total_tp = 0, total_fp = 0, total_fn = 0;
};

/// Frame-level mean average precision: per label, predictions over all frames
/// are ranked by that label's score and greedily matched (highest IoU first)
/// to unmatched ground-truth boxes carrying the label at IoU >= threshold;
/// AP uses all-points interpolation; the mean runs over labels present in the
/// ground truth.
EvalReport frame_map(const std::vector<DetectionFrame>& preds,
                     const std::vector<TruthFrame>& truth, const LabelSpace& ls,
                     const MatchConfig& cfg = {}, int jobs = 1);

/// Micro-averaged precision/recall/F1 for hard label sets: per frame, boxes
/// are greedily paired by descending IoU (>= threshold); matched pairs
/// compare label sets element-wise, unmatched predictions count all their
/// labels as FP and unmatched ground truth as FN.
EvalReport prf1(const std::vector<TruthFrame>& preds, const std::vector<TruthFrame>& truth,
                const LabelSpace& ls, const MatchConfig& cfg = {});

/// Human-readable key-value table.
std::string report_table(const EvalReport& report, const LabelSpace& ls, bool is_map);
/// Machine-readable single-line JSON document.
std::string report_json(const EvalReport& report, const LabelSpace& ls, bool is_map);

}  // namespace condet
