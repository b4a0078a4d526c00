#pragma once

#include <vector>

#include "condet/labels.hpp"
#include "condet/types.hpp"

namespace condet {

// Per-label confidence scores in [0, 1]. NaN/Inf and out-of-range entries are
// rejected at construction.
class ScoreVector {
 public:
  explicit ScoreVector(Vector values);

  int size() const { return static_cast<int>(values_.size()); }
  const Vector& values() const { return values_; }
  Real operator[](int i) const { return values_[i]; }

 private:
  Vector values_;
};

// Product t-norm reading of a disjunctive clause: the violation degree is the
// product over literals of (1 - truth value), so 0 means satisfied and 1
// means maximally violated. Agrees with boolean evaluation at corners.
Real violation(const Requirement& clause, const ScoreVector& p);

struct LossReport {
  Real value = 0.0;      // mean of per_clause
  Vector per_clause;     // one violation degree per clause, in clause order
  Vector gradient;       // exact d(value)/d(score), length = label count
};

/// Mean clause violation with its analytic score gradient. An empty clause
/// list gives value 0 and a zero gradient.
LossReport stage1_loss(const RequirementSet& rs, const ScoreVector& p);

struct Stage2Loss {
  Real value = 0.0;
  Vector grad_c;  // d(value)/d(y_c): weighted stage-1 term plus its BCE term
  Vector grad_b;  // d(value)/d(y_b): BCE term only
};

/// Composite supervised loss: lambda * stage1_loss(y_c) + BCE(y_c, y_true)
/// + BCE(y_b, y_true). Scores are clamped to [eps, 1-eps] before the
/// logarithms; the gradient is zero where the clamp is active.
Stage2Loss stage2_loss(const RequirementSet& rs, const ScoreVector& y_c,
                       const ScoreVector& y_b, const BoolVector& y_true,
                       Real lambda = 10.0);

/// Mean binary cross-entropy with clamped scores, and its gradient in q.
Real bce(const Vector& q, const BoolVector& y, Vector* grad = nullptr);

/// Indices of score vectors whose maximum entry exceeds 0.5, in input order.
/// Batched constrained losses are computed only over these anchors.
std::vector<int> filter_anchors(const std::vector<ScoreVector>& batch);

struct BatchLossReport {
  std::vector<int> kept;            // indices into the input batch
  std::vector<LossReport> reports;  // one per kept item, same order
  Real mean_value = 0.0;            // 0 when nothing survives the filter
};

BatchLossReport stage1_loss_batch(const RequirementSet& rs,
                                  const std::vector<ScoreVector>& batch,
                                  bool filtered);

inline constexpr Real kBceClamp = 1e-7;

}  // namespace condet
