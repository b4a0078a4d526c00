#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "condet/fuzzy.hpp"
#include "condet/labels.hpp"
#include "condet/types.hpp"

namespace condet {

// Axis-aligned pixel box with x1 < x2 and y1 < y2, all finite.
struct Box {
  Real x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  Real area() const { return (x2 - x1) * (y2 - y1); }
};

Box make_box(Real x1, Real y1, Real x2, Real y2);

/// Intersection over union, in [0, 1].
Real iou(const Box& a, const Box& b);

struct Detection {
  Box box;
  ScoreVector scores;
};

struct DetectionFrame {
  std::string frame_id;
  std::vector<Detection> detections;
};

// Ground-truth / decoded counterpart: hard label sets instead of scores.
struct LabeledBox {
  Box box;
  BoolVector labels;
};

struct TruthFrame {
  std::string frame_id;
  std::vector<LabeledBox> boxes;
};

/// Maximum confidence over the agent-group labels.
Real max_agent_score(const ScoreVector& scores, const LabelSpace& ls);

/// Keeps detections whose maximum agent score exceeds tau, order preserved.
DetectionFrame agent_threshold(const DetectionFrame& frame, const LabelSpace& ls, Real tau);

enum class NmsMode { agnostic, per_agent };

/// Greedy non-maximum suppression driven by agent confidences: detections are
/// visited by descending max agent score (ties by input index); a detection
/// is kept iff its IoU with every already-kept detection is <= tau_iou. In
/// per_agent mode only detections sharing the same argmax agent label
/// suppress each other. Kept detections retain their full score vectors and
/// appear in input order.
DetectionFrame agent_nms(const DetectionFrame& frame, const LabelSpace& ls, Real tau_iou,
                         NmsMode mode = NmsMode::agnostic);

// JSON-lines interchange. Detection streams:
//   {"frame_id": str, "detections": [{"box": [x1,y1,x2,y2], "scores": [...]}]}
// Truth streams carry "labels": [bool...] instead of "scores".
std::vector<DetectionFrame> read_detections(std::istream& in, int num_labels);
void write_detections(std::ostream& out, const std::vector<DetectionFrame>& frames);
std::vector<TruthFrame> read_truth(std::istream& in, int num_labels);
void write_truth(std::ostream& out, const std::vector<TruthFrame>& frames);

std::vector<DetectionFrame> load_detections(const std::string& path, int num_labels);
std::vector<TruthFrame> load_truth(const std::string& path, int num_labels);

}  // namespace condet
