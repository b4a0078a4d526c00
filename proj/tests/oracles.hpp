// Test-only oracles, independent of the library's implementation paths:
// finite differences, a quadratic reference NMS, and random instance
// generators used by the property tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "condet/detections.hpp"
#include "condet/labels.hpp"
#include "condet/rng.hpp"
#include "condet/types.hpp"

namespace condet::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(CONDET_FIXTURES_DIR) + "/" + name;
}

inline std::string cli_path() { return CONDET_CLI_PATH; }

// |a - b| relative to max(1, |a|, |b|): relative for large magnitudes,
// absolute near zero where FD noise dominates any true ratio.
inline Real rel_err(Real a, Real b) {
  return std::abs(a - b) / std::max({Real(1), std::abs(a), std::abs(b)});
}

/// Central finite differences of a scalar function at x.
inline Vector fd_gradient(const std::function<Real(const Vector&)>& f, const Vector& x,
                          Real h = 1e-5) {
  Vector grad(x.size());
  Vector probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const Real above = f(probe);
    probe[i] = x[i] - h;
    const Real below = f(probe);
    probe[i] = x[i];
    grad[i] = (above - below) / (2 * h);
  }
  return grad;
}

inline Real max_rel_err(const Vector& analytic, const Vector& numeric) {
  Real worst = 0;
  for (int i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, rel_err(analytic[i], numeric[i]));
  }
  return worst;
}

/// Direct transcription of greedy agent-driven NMS, quadratic and obvious.
inline std::vector<int> reference_nms(const std::vector<Box>& boxes,
                                      const std::vector<Real>& scores,
                                      const std::vector<int>& groups, Real tau_iou,
                                      bool per_group) {
  const int n = static_cast<int>(boxes.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<int> kept;
  for (int i : order) {
    bool ok = true;
    for (int j : kept) {
      if (per_group && groups[i] != groups[j]) continue;
      if (iou(boxes[i], boxes[j]) > tau_iou) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Random label space: index 0 is always an agent, the rest alternate groups.
inline LabelSpace random_labelspace(int n, Rng& rng) {
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    LabelGroup group = LabelGroup::agent;
    if (i > 0) {
      const int pick = rng.uniform_int(0, 3);
      group = pick == 0   ? LabelGroup::agent
              : pick == 1 ? LabelGroup::action
              : pick == 2 ? LabelGroup::location
                          : LabelGroup::other;
    }
    labels.push_back(Label{"l" + std::to_string(i), group});
  }
  return LabelSpace(std::move(labels));
}

/// Random satisfiable clause set: clauses are re-drawn until the all-true or
/// all-false corner (picked per set) satisfies them, keeping generation
/// simple while guaranteeing a model exists.
inline RequirementSet random_requirements(int n, int num_clauses, Rng& rng) {
  LabelSpace ls = random_labelspace(n, rng);
  const bool anchor = rng.bernoulli(0.5);  // the guaranteed model: all labels = anchor
  std::vector<Requirement> clauses;
  while (static_cast<int>(clauses.size()) < num_clauses) {
    const int k = rng.uniform_int(1, std::min(4, n));
    std::vector<int> vars(n);
    std::iota(vars.begin(), vars.end(), 0);
    for (int i = 0; i < k; ++i) std::swap(vars[i], vars[rng.uniform_int(i, n - 1)]);
    std::vector<Literal> lits;
    bool anchored = false;
    for (int i = 0; i < k; ++i) {
      const bool negated = rng.bernoulli(0.5);
      lits.push_back(Literal{vars[i], negated});
      if (negated != anchor) anchored = true;
    }
    if (!anchored) continue;  // would be false at the anchor corner
    clauses.push_back(Requirement{std::move(lits)});
  }
  return make_requirement_set(std::move(ls), std::move(clauses));
}

inline Vector random_scores(int n, Rng& rng, Real lo = 0.02, Real hi = 0.98) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

}  // namespace condet::testing
