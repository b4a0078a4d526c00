#include "condet/fuzzy.hpp"

#include <algorithm>
#include <cmath>

namespace condet {
namespace {

// Order-independent sum: sorting the addends makes the result invariant
// under permutations of the clause list.
Real stable_sum(std::vector<Real>& terms) {
  std::sort(terms.begin(), terms.end());
  Real total = 0.0;
  for (Real t : terms) total += t;
  return total;
}

void check_clause(const Requirement& clause, const ScoreVector& p) {
  for (const Literal& lit : clause.literals) {
    if (lit.label_index < 0 || lit.label_index >= p.size()) {
      throw InputError("clause literal index " + std::to_string(lit.label_index) +
                       " outside score vector of length " + std::to_string(p.size()));
    }
  }
}

// Factor of the violation product for one literal: 1 - value(lit).
Real factor(const Literal& lit, const ScoreVector& p) {
  return lit.negated ? p[lit.label_index] : 1.0 - p[lit.label_index];
}

}  // namespace

ScoreVector::ScoreVector(Vector values) : values_(std::move(values)) {
  for (int i = 0; i < values_.size(); ++i) {
    const Real v = values_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InputError("score " + std::to_string(v) + " at index " + std::to_string(i) +
                       " outside [0, 1]");
    }
  }
}

Real violation(const Requirement& clause, const ScoreVector& p) {
  check_clause(clause, p);
  Real product = 1.0;
  for (const Literal& lit : clause.literals) product *= factor(lit, p);
  return product;
}

LossReport stage1_loss(const RequirementSet& rs, const ScoreVector& p) {
  if (p.size() != rs.num_labels()) {
    throw InputError("score vector length " + std::to_string(p.size()) +
                     " does not match label count " + std::to_string(rs.num_labels()));
  }
  const int num_clauses = rs.num_clauses();
  const int num_labels = rs.num_labels();

  LossReport report;
  report.per_clause = Vector::Zero(num_clauses);
  report.gradient = Vector::Zero(num_labels);

  // Signed leave-one-out products per label, collected then summed in sorted
  // order so value and gradient are exactly invariant under clause reorder.
  std::vector<std::vector<Real>> contributions(num_labels);
  std::vector<Real> values;
  values.reserve(num_clauses);
  std::vector<Real> prefix, suffix;

  for (int c = 0; c < num_clauses; ++c) {
    const auto& lits = rs.clauses[c].literals;
    const int k = static_cast<int>(lits.size());
    prefix.assign(k + 1, 1.0);
    suffix.assign(k + 1, 1.0);
    for (int i = 0; i < k; ++i) prefix[i + 1] = prefix[i] * factor(lits[i], p);
    for (int i = k - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * factor(lits[i], p);
    report.per_clause[c] = prefix[k];
    values.push_back(prefix[k]);
    for (int i = 0; i < k; ++i) {
      const Real leave_out = prefix[i] * suffix[i + 1];
      const Real sign = lits[i].negated ? 1.0 : -1.0;
      contributions[lits[i].label_index].push_back(sign * leave_out);
    }
  }

  if (num_clauses > 0) {
    report.value = stable_sum(values) / num_clauses;
    for (int x = 0; x < num_labels; ++x) {
      report.gradient[x] = stable_sum(contributions[x]) / num_clauses;
    }
  }
  return report;
}

Real bce(const Vector& q, const BoolVector& y, Vector* grad) {
  if (q.size() != y.size()) {
    throw InputError("BCE length mismatch: " + std::to_string(q.size()) + " vs " +
                     std::to_string(y.size()));
  }
  const int n = static_cast<int>(q.size());
  if (grad) *grad = Vector::Zero(n);
  if (n == 0) return 0.0;
  Real total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real clamped = std::clamp(q[i], kBceClamp, 1.0 - kBceClamp);
    total -= y[i] ? std::log(clamped) : std::log1p(-clamped);
    if (grad && q[i] > kBceClamp && q[i] < 1.0 - kBceClamp) {
      (*grad)[i] = (y[i] ? -1.0 / clamped : 1.0 / (1.0 - clamped)) / n;
    }
  }
  return total / n;
}

Stage2Loss stage2_loss(const RequirementSet& rs, const ScoreVector& y_c, const ScoreVector& y_b,
                       const BoolVector& y_true, Real lambda) {
  const int n = rs.num_labels();
  if (y_c.size() != n || y_b.size() != n || y_true.size() != n) {
    throw InputError("stage-2 loss inputs must all have length " + std::to_string(n));
  }
  const LossReport constrained = stage1_loss(rs, y_c);
  Vector bce_grad_c, bce_grad_b;
  const Real bce_c = bce(y_c.values(), y_true, &bce_grad_c);
  const Real bce_b = bce(y_b.values(), y_true, &bce_grad_b);

  Stage2Loss out;
  out.value = lambda * constrained.value + bce_c + bce_b;
  out.grad_c = lambda * constrained.gradient + bce_grad_c;
  out.grad_b = std::move(bce_grad_b);
  return out;
}

std::vector<int> filter_anchors(const std::vector<ScoreVector>& batch) {
  std::vector<int> kept;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() > 0 && batch[i].values().maxCoeff() > 0.5) {
      kept.push_back(static_cast<int>(i));
    }
  }
  return kept;
}

BatchLossReport stage1_loss_batch(const RequirementSet& rs, const std::vector<ScoreVector>& batch,
                                  bool filtered) {
  BatchLossReport out;
  if (filtered) {
    out.kept = filter_anchors(batch);
  } else {
    out.kept.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) out.kept[i] = static_cast<int>(i);
  }
  out.reports.reserve(out.kept.size());
  std::vector<Real> values;
  values.reserve(out.kept.size());
  for (int idx : out.kept) {
    out.reports.push_back(stage1_loss(rs, batch[idx]));
    values.push_back(out.reports.back().value);
  }
  out.mean_value = values.empty() ? 0.0 : stable_sum(values) / static_cast<Real>(values.size());
  return out;
}

}  // namespace condet
