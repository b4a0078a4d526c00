#include "condet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "condet/maxsat.hpp"

namespace condet {
namespace {

constexpr Real kCanvasWidth = 1920.0;
constexpr Real kCanvasHeight = 1080.0;

// The requirement clauses as hard clauses plus one at-least-one-agent clause.
WcnfProblem hard_skeleton(const RequirementSet& rs) {
  WcnfProblem prob;
  prob.num_vars = rs.num_labels();
  for (const Requirement& clause : rs.clauses) {
    std::vector<int> lits;
    lits.reserve(clause.literals.size());
    for (const Literal& lit : clause.literals) {
      lits.push_back(lit.negated ? -(lit.label_index + 1) : lit.label_index + 1);
    }
    prob.hard.push_back(std::move(lits));
  }
  std::vector<int> agent_clause;
  for (int idx : rs.label_space.agent_indices()) agent_clause.push_back(idx + 1);
  prob.hard.push_back(std::move(agent_clause));
  return prob;
}

}  // namespace

void validate_config(const GenConfig& cfg) {
  if (cfg.num_frames < 0) throw InputError("num_frames must be >= 0");
  if (cfg.min_boxes < 0 || cfg.max_boxes < cfg.min_boxes) {
    throw InputError("box count range is invalid");
  }
  if (cfg.sigma < 0) throw InputError("sigma must be >= 0");
  if (cfg.flip_prob < 0 || cfg.flip_prob > 1) throw InputError("flip probability must lie in [0, 1]");
  if (cfg.labeled_fraction < 0 || cfg.labeled_fraction > 1) {
    throw InputError("labeled fraction must lie in [0, 1]");
  }
}

BoolVector sample_labelset(const RequirementSet& rs, Rng& rng) {
  const int n = rs.num_labels();
  WcnfProblem prob = hard_skeleton(rs);
  // Random draw repaired by MaxSAT: each label prefers its drawn polarity
  // with a random weight, so repairs vary across draws.
  constexpr std::int64_t kScale = 1000;
  for (int x = 0; x < n; ++x) {
    const bool drawn = rng.bernoulli(0.5);
    const auto weight = static_cast<std::uint64_t>(1 + rng.uniform_int(0, kScale - 1));
    prob.soft.push_back(SoftClause{{drawn ? x + 1 : -(x + 1)}, weight});
  }
  prob.top = 1 + soft_weight_sum(prob);
  return solve(prob).assignment;
}

GeneratedData generate(const RequirementSet& rs, const GenConfig& cfg) {
  validate_config(cfg);
  Rng rng(cfg.seed);
  const int n = rs.num_labels();

  GeneratedData data;
  data.scored.reserve(cfg.num_frames);
  data.truth.reserve(cfg.num_frames);
  data.num_labeled_frames =
      static_cast<int>(std::floor(cfg.labeled_fraction * cfg.num_frames));

  for (int f = 0; f < cfg.num_frames; ++f) {
    char id[32];
    std::snprintf(id, sizeof(id), "frame_%06d", f);
    DetectionFrame scored{id, {}};
    TruthFrame truth{id, {}};

    const int num_boxes = rng.uniform_int(cfg.min_boxes, cfg.max_boxes);
    for (int b = 0; b < num_boxes; ++b) {
      const Real w = rng.uniform(24.0, 160.0);
      const Real h = rng.uniform(24.0, 120.0);
      const Real x1 = rng.uniform(0.0, kCanvasWidth - w);
      const Real y1 = rng.uniform(0.0, kCanvasHeight - h);
      const Box box = make_box(x1, y1, x1 + w, y1 + h);

      const BoolVector labels = sample_labelset(rs, rng);
      Vector scores(n);
      for (int x = 0; x < n; ++x) {
        Real s = (labels[x] ? 1.0 : 0.0) + rng.normal(0.0, cfg.sigma);
        s = std::clamp(s, 0.0, 1.0);
        if (rng.bernoulli(cfg.flip_prob)) s = 1.0 - s;
        scores[x] = s;
      }
      truth.boxes.push_back(LabeledBox{box, labels});
      scored.detections.push_back(Detection{box, ScoreVector(std::move(scores))});
    }
    data.scored.push_back(std::move(scored));
    data.truth.push_back(std::move(truth));
  }
  return data;
}

}  // namespace condet
