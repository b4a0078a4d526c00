#include "condet/eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "condet/parallel.hpp"

namespace condet {
namespace {

using json = nlohmann::ordered_json;

// Pairs prediction and truth streams by frame_id; the id sets must coincide.
template <typename PredFrame>
std::vector<std::pair<const PredFrame*, const TruthFrame*>> pair_frames(
    const std::vector<PredFrame>& preds, const std::vector<TruthFrame>& truth) {
  std::map<std::string, const TruthFrame*> by_id;
  for (const TruthFrame& frame : truth) by_id[frame.frame_id] = &frame;
  if (by_id.size() != truth.size()) throw InputError("duplicate frame_id in ground truth");
  std::vector<std::pair<const PredFrame*, const TruthFrame*>> pairs;
  pairs.reserve(preds.size());
  for (const PredFrame& frame : preds) {
    const auto it = by_id.find(frame.frame_id);
    if (it == by_id.end()) {
      throw InputError("frame '" + frame.frame_id + "' missing from ground truth");
    }
    pairs.emplace_back(&frame, it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw InputError("ground-truth frame '" + by_id.begin()->first +
                     "' missing from predictions");
  }
  return pairs;
}

// All-points interpolated average precision for a ranked TP/FP sequence.
Real average_precision(const std::vector<bool>& is_tp, int num_positives) {
  if (num_positives == 0 || is_tp.empty()) return 0.0;
  const int n = static_cast<int>(is_tp.size());
  std::vector<Real> precision(n), recall(n);
  int tp = 0;
  for (int i = 0; i < n; ++i) {
    tp += is_tp[i] ? 1 : 0;
    precision[i] = static_cast<Real>(tp) / static_cast<Real>(i + 1);
    recall[i] = static_cast<Real>(tp) / static_cast<Real>(num_positives);
  }
  for (int i = n - 2; i >= 0; --i) precision[i] = std::max(precision[i], precision[i + 1]);
  Real ap = recall[0] * precision[0];
  for (int i = 1; i < n; ++i) ap += (recall[i] - recall[i - 1]) * precision[i];
  return ap;
}

}  // namespace

EvalReport frame_map(const std::vector<DetectionFrame>& preds,
                     const std::vector<TruthFrame>& truth, const LabelSpace& ls,
                     const MatchConfig& cfg, int jobs) {
  if (cfg.iou_threshold <= 0.0 || cfg.iou_threshold > 1.0) {
    throw InputError("IoU threshold must lie in (0, 1]");
  }
  const auto pairs = pair_frames(preds, truth);
  const int num_labels = ls.size();

  EvalReport report;
  report.per_label_ap = Vector::Zero(num_labels);
  report.has_gt = BoolVector::Constant(num_labels, false);
  report.tp = IntVector::Zero(num_labels);
  report.fp = IntVector::Zero(num_labels);
  report.fn = IntVector::Zero(num_labels);

  std::vector<int> gt_count(num_labels, 0);
  for (const auto& [pred, gt] : pairs) {
    for (const LabeledBox& item : gt->boxes) {
      for (int label = 0; label < num_labels; ++label) {
        if (item.labels[label]) ++gt_count[label];
      }
    }
  }

  parallel_for(num_labels, jobs, [&](int label) {
    // Rank all predictions by this label's score; ties resolve by frame
    // order then detection index so results do not depend on sort details.
    struct Ranked {
      Real score;
      int frame;
      int det;
    };
    std::vector<Ranked> ranked;
    for (std::size_t f = 0; f < pairs.size(); ++f) {
      const auto& dets = pairs[f].first->detections;
      for (std::size_t d = 0; d < dets.size(); ++d) {
        ranked.push_back(Ranked{dets[d].scores[label], static_cast<int>(f), static_cast<int>(d)});
      }
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      return std::tie(b.score, a.frame, a.det) < std::tie(a.score, b.frame, b.det);
    });

    std::vector<std::vector<bool>> taken(pairs.size());
    for (std::size_t f = 0; f < pairs.size(); ++f) {
      taken[f].assign(pairs[f].second->boxes.size(), false);
    }

    std::vector<bool> is_tp(ranked.size(), false);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      const auto& [pred, gt] = pairs[ranked[r].frame];
      const Box& box = pred->detections[ranked[r].det].box;
      int best_gt = -1;
      Real best_iou = 0.0;
      for (std::size_t g = 0; g < gt->boxes.size(); ++g) {
        if (taken[ranked[r].frame][g] || !gt->boxes[g].labels[label]) continue;
        const Real overlap = iou(box, gt->boxes[g].box);
        if (overlap >= cfg.iou_threshold && overlap > best_iou) {
          best_iou = overlap;
          best_gt = static_cast<int>(g);
        }
      }
      if (best_gt >= 0) {
        taken[ranked[r].frame][best_gt] = true;
        is_tp[r] = true;
      }
    }
    report.per_label_ap[label] = average_precision(is_tp, gt_count[label]);
  });

  Real ap_sum = 0.0;
  int labels_with_gt = 0;
  for (int label = 0; label < num_labels; ++label) {
    if (gt_count[label] > 0) {
      report.has_gt[label] = true;
      ap_sum += report.per_label_ap[label];
      ++labels_with_gt;
    }
  }
  report.frame_map = labels_with_gt > 0 ? ap_sum / labels_with_gt : 0.0;
  return report;
}

EvalReport prf1(const std::vector<TruthFrame>& preds, const std::vector<TruthFrame>& truth,
                const LabelSpace& ls, const MatchConfig& cfg) {
  if (cfg.iou_threshold <= 0.0 || cfg.iou_threshold > 1.0) {
    throw InputError("IoU threshold must lie in (0, 1]");
  }
  const auto pairs = pair_frames(preds, truth);
  const int num_labels = ls.size();

  EvalReport report;
  report.per_label_ap = Vector::Zero(num_labels);
  report.has_gt = BoolVector::Constant(num_labels, false);
  report.tp = IntVector::Zero(num_labels);
  report.fp = IntVector::Zero(num_labels);
  report.fn = IntVector::Zero(num_labels);

  for (const auto& [pred, gt] : pairs) {
    struct Overlap {
      Real value;
      int pred_idx;
      int gt_idx;
    };
    std::vector<Overlap> overlaps;
    for (std::size_t p = 0; p < pred->boxes.size(); ++p) {
      for (std::size_t g = 0; g < gt->boxes.size(); ++g) {
        const Real value = iou(pred->boxes[p].box, gt->boxes[g].box);
        if (value >= cfg.iou_threshold) {
          overlaps.push_back(Overlap{value, static_cast<int>(p), static_cast<int>(g)});
        }
      }
    }
    std::sort(overlaps.begin(), overlaps.end(), [](const Overlap& a, const Overlap& b) {
      return std::tie(b.value, a.pred_idx, a.gt_idx) < std::tie(a.value, b.pred_idx, b.gt_idx);
    });

    std::vector<bool> pred_used(pred->boxes.size(), false), gt_used(gt->boxes.size(), false);
    for (const Overlap& o : overlaps) {
      if (pred_used[o.pred_idx] || gt_used[o.gt_idx]) continue;
      pred_used[o.pred_idx] = true;
      gt_used[o.gt_idx] = true;
      const BoolVector& predicted = pred->boxes[o.pred_idx].labels;
      const BoolVector& actual = gt->boxes[o.gt_idx].labels;
      for (int label = 0; label < num_labels; ++label) {
        if (predicted[label] && actual[label]) ++report.tp[label];
        else if (predicted[label]) ++report.fp[label];
        else if (actual[label]) ++report.fn[label];
      }
    }
    for (std::size_t p = 0; p < pred->boxes.size(); ++p) {
      if (pred_used[p]) continue;
      for (int label = 0; label < num_labels; ++label) {
        if (pred->boxes[p].labels[label]) ++report.fp[label];
      }
    }
    for (std::size_t g = 0; g < gt->boxes.size(); ++g) {
      if (gt_used[g]) continue;
      for (int label = 0; label < num_labels; ++label) {
        if (gt->boxes[g].labels[label]) ++report.fn[label];
      }
    }
  }

  for (int label = 0; label < num_labels; ++label) {
    report.total_tp += report.tp[label];
    report.total_fp += report.fp[label];
    report.total_fn += report.fn[label];
    if (report.tp[label] + report.fn[label] > 0) report.has_gt[label] = true;
  }
  const auto tp = static_cast<Real>(report.total_tp);
  report.precision =
      report.total_tp + report.total_fp > 0 ? tp / (report.total_tp + report.total_fp) : 0.0;
  report.recall =
      report.total_tp + report.total_fn > 0 ? tp / (report.total_tp + report.total_fn) : 0.0;
  report.f1 = report.precision + report.recall > 0
                  ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                  : 0.0;
  return report;
}

std::string report_table(const EvalReport& report, const LabelSpace& ls, bool is_map) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  if (is_map) {
    out << "frame_map " << report.frame_map << '\n';
    for (int i = 0; i < ls.size(); ++i) {
      if (report.has_gt[i]) out << "ap " << ls.name(i) << ' ' << report.per_label_ap[i] << '\n';
    }
  } else {
    out << "precision " << report.precision << '\n';
    out << "recall " << report.recall << '\n';
    out << "f1 " << report.f1 << '\n';
    out << "tp " << report.total_tp << '\n';
    out << "fp " << report.total_fp << '\n';
    out << "fn " << report.total_fn << '\n';
  }
  return out.str();
}

std::string report_json(const EvalReport& report, const LabelSpace& ls, bool is_map) {
  json j;
  if (is_map) {
    j["metric"] = "frame_map";
    j["frame_map"] = report.frame_map;
    json ap = json::object();
    for (int i = 0; i < ls.size(); ++i) {
      if (report.has_gt[i]) ap[ls.name(i)] = report.per_label_ap[i];
    }
    j["ap"] = std::move(ap);
  } else {
    j["metric"] = "prf1";
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["tp"] = report.total_tp;
    j["fp"] = report.total_fp;
    j["fn"] = report.total_fn;
    json per_label = json::object();
    for (int i = 0; i < ls.size(); ++i) {
      per_label[ls.name(i)] =
          json{{"tp", report.tp[i]}, {"fp", report.fp[i]}, {"fn", report.fn[i]}};
    }
    j["per_label"] = std::move(per_label);
  }
  return j.dump();
}

}  // namespace condet
