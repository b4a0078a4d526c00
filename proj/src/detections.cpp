#include "condet/detections.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace condet {

using json = nlohmann::ordered_json;

Box make_box(Real x1, Real y1, Real x2, Real y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2)) {
    throw InputError("box coordinates must be finite");
  }
  if (x1 >= x2 || y1 >= y2) {
    throw InputError("degenerate box: requires x1 < x2 and y1 < y2");
  }
  return Box{x1, y1, x2, y2};
}

Real iou(const Box& a, const Box& b) {
  const Real ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const Real iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0 || iy <= 0) return 0.0;
  const Real inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

Real max_agent_score(const ScoreVector& scores, const LabelSpace& ls) {
  Real best = 0.0;
  for (int idx : ls.agent_indices()) best = std::max(best, scores[idx]);
  return best;
}

namespace {

int argmax_agent(const ScoreVector& scores, const LabelSpace& ls) {
  int best = ls.agent_indices().front();
  for (int idx : ls.agent_indices()) {
    if (scores[idx] > scores[best]) best = idx;
  }
  return best;
}

void check_frame(const DetectionFrame& frame, const LabelSpace& ls) {
  if (frame.frame_id.empty()) throw InputError("frame with empty frame_id");
  for (const Detection& det : frame.detections) {
    if (det.scores.size() != ls.size()) {
      throw InputError("frame '" + frame.frame_id + "': score vector length " +
                       std::to_string(det.scores.size()) + " does not match label count " +
                       std::to_string(ls.size()));
    }
  }
}

}  // namespace

DetectionFrame agent_threshold(const DetectionFrame& frame, const LabelSpace& ls, Real tau) {
  if (tau < 0.0 || tau > 1.0) throw InputError("threshold must lie in [0, 1]");
  check_frame(frame, ls);
  DetectionFrame out{frame.frame_id, {}};
  for (const Detection& det : frame.detections) {
    if (max_agent_score(det.scores, ls) > tau) out.detections.push_back(det);
  }
  return out;
}

DetectionFrame agent_nms(const DetectionFrame& frame, const LabelSpace& ls, Real tau_iou,
                         NmsMode mode) {
  if (tau_iou < 0.0 || tau_iou > 1.0) throw InputError("IoU threshold must lie in [0, 1]");
  check_frame(frame, ls);
  const int n = static_cast<int>(frame.detections.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return max_agent_score(frame.detections[a].scores, ls) >
           max_agent_score(frame.detections[b].scores, ls);
  });

  std::vector<int> kept;
  for (int candidate : order) {
    const Detection& det = frame.detections[candidate];
    bool suppressed = false;
    for (int keeper : kept) {
      const Detection& other = frame.detections[keeper];
      if (mode == NmsMode::per_agent &&
          argmax_agent(det.scores, ls) != argmax_agent(other.scores, ls)) {
        continue;
      }
      if (iou(det.box, other.box) > tau_iou) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }

  std::sort(kept.begin(), kept.end());  // survivors in input order
  DetectionFrame out{frame.frame_id, {}};
  out.detections.reserve(kept.size());
  for (int idx : kept) out.detections.push_back(frame.detections[idx]);
  return out;
}

namespace {

json box_to_json(const Box& box) { return json::array({box.x1, box.y1, box.x2, box.y2}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("'box' must be [x1, y1, x2, y2]");
  return make_box(j[0].get<Real>(), j[1].get<Real>(), j[2].get<Real>(), j[3].get<Real>());
}

json frame_to_json(const DetectionFrame& frame) {
  json dets = json::array();
  for (const Detection& det : frame.detections) {
    json scores = json::array();
    for (int i = 0; i < det.scores.size(); ++i) scores.push_back(det.scores[i]);
    dets.push_back(json{{"box", box_to_json(det.box)}, {"scores", std::move(scores)}});
  }
  return json{{"frame_id", frame.frame_id}, {"detections", std::move(dets)}};
}

json truth_to_json(const TruthFrame& frame) {
  json dets = json::array();
  for (const LabeledBox& item : frame.boxes) {
    json labels = json::array();
    for (int i = 0; i < item.labels.size(); ++i) labels.push_back(static_cast<bool>(item.labels[i]));
    dets.push_back(json{{"box", box_to_json(item.box)}, {"labels", std::move(labels)}});
  }
  return json{{"frame_id", frame.frame_id}, {"detections", std::move(dets)}};
}

template <typename Frame, typename ParseItem>
std::vector<Frame> read_stream(std::istream& in, const ParseItem& parse_item) {
  std::vector<Frame> frames;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    Frame frame;
    try {
      frame.frame_id = j.at("frame_id").get<std::string>();
      if (frame.frame_id.empty()) throw InputError("empty frame_id");
      for (const json& item : j.at("detections")) parse_item(item, frame);
    } catch (const json::exception& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_ids.insert(frame.frame_id).second) {
      throw InputError("duplicate frame_id '" + frame.frame_id + "'");
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace

std::vector<DetectionFrame> read_detections(std::istream& in, int num_labels) {
  return read_stream<DetectionFrame>(in, [&](const json& item, DetectionFrame& frame) {
    const json& raw = item.at("scores");
    if (static_cast<int>(raw.size()) != num_labels) {
      throw InputError("expected " + std::to_string(num_labels) + " scores, got " +
                       std::to_string(raw.size()));
    }
    Vector scores(num_labels);
    for (int i = 0; i < num_labels; ++i) scores[i] = raw[i].get<Real>();
    frame.detections.push_back(Detection{box_from_json(item.at("box")), ScoreVector(scores)});
  });
}

void write_detections(std::ostream& out, const std::vector<DetectionFrame>& frames) {
  for (const DetectionFrame& frame : frames) out << frame_to_json(frame).dump() << '\n';
}

std::vector<TruthFrame> read_truth(std::istream& in, int num_labels) {
  return read_stream<TruthFrame>(in, [&](const json& item, TruthFrame& frame) {
    const json& raw = item.at("labels");
    if (static_cast<int>(raw.size()) != num_labels) {
      throw InputError("expected " + std::to_string(num_labels) + " labels, got " +
                       std::to_string(raw.size()));
    }
    BoolVector labels(num_labels);
    for (int i = 0; i < num_labels; ++i) labels[i] = raw[i].get<bool>();
    frame.boxes.push_back(LabeledBox{box_from_json(item.at("box")), std::move(labels)});
  });
}

void write_truth(std::ostream& out, const std::vector<TruthFrame>& frames) {
  for (const TruthFrame& frame : frames) out << truth_to_json(frame).dump() << '\n';
}

namespace {
std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}
}  // namespace

std::vector<DetectionFrame> load_detections(const std::string& path, int num_labels) {
  auto in = open_input(path);
  return read_detections(in, num_labels);
}

std::vector<TruthFrame> load_truth(const std::string& path, int num_labels) {
  auto in = open_input(path);
  return read_truth(in, num_labels);
}

}  // namespace condet
