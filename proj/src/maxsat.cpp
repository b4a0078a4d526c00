#include "condet/maxsat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace condet {
namespace {

constexpr int kBruteForceLimit = 24;

int var_of(int lit) { return std::abs(lit) - 1; }

bool lit_true(int lit, const BoolVector& assignment) {
  return lit > 0 ? assignment[var_of(lit)] : !assignment[var_of(lit)];
}

bool clause_satisfied(const std::vector<int>& lits, const BoolVector& assignment) {
  return std::any_of(lits.begin(), lits.end(),
                     [&](int lit) { return lit_true(lit, assignment); });
}

// Branch-and-bound core over a tri-state assignment with hard-clause unit
// propagation and falsified-soft-weight pruning. Two passes per solve: an
// optimizing pass over a soft-weight-driven variable order, then a
// lexicographic pass (index order, false first) that stops at the first
// assignment reaching the optimum, which is the lexicographically smallest
// optimal assignment.
class Solver {
 public:
  explicit Solver(const WcnfProblem& prob) : prob_(prob), value_(prob.num_vars, kUnset) {
    // Branch order for the optimizing pass: descending soft mass, then index.
    std::vector<std::uint64_t> pos_weight(prob.num_vars, 0), neg_weight(prob.num_vars, 0);
    for (const SoftClause& soft : prob.soft) {
      for (int lit : soft.lits) {
        (lit > 0 ? pos_weight : neg_weight)[var_of(lit)] += soft.weight;
      }
    }
    order_.resize(prob.num_vars);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return pos_weight[a] + neg_weight[a] > pos_weight[b] + neg_weight[b];
    });
    preferred_.resize(prob.num_vars);
    for (int v = 0; v < prob.num_vars; ++v) preferred_[v] = pos_weight[v] > neg_weight[v];
  }

  std::optional<std::uint64_t> best_cost() {
    best_.reset();
    if (!propagate()) return std::nullopt;
    optimize(0);
    undo_to(0);
    return best_;
  }

  std::optional<BoolVector> find_lex_leq(std::uint64_t bound) {
    bound_ = bound;
    found_.reset();
    if (propagate()) lex_search();
    undo_to(0);
    return found_;
  }

 private:
  static constexpr signed char kUnset = -1;

  void assign(int var, bool val) {
    value_[var] = val ? 1 : 0;
    trail_.push_back(var);
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      value_[trail_.back()] = kUnset;
      trail_.pop_back();
    }
  }

  // Sweeps hard clauses to fixpoint; false on conflict.
  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& clause : prob_.hard) {
        bool satisfied = false;
        int unassigned = 0;
        int last_free = 0;
        for (int lit : clause) {
          const signed char v = value_[var_of(lit)];
          if (v == kUnset) {
            ++unassigned;
            last_free = lit;
          } else if ((v == 1) == (lit > 0)) {
            satisfied = true;
            break;
          }
        }
        if (satisfied) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          assign(var_of(last_free), last_free > 0);
          changed = true;
        }
      }
    }
    return true;
  }

  std::uint64_t falsified_soft() const {
    std::uint64_t total = 0;
    for (const SoftClause& soft : prob_.soft) {
      bool possibly_true = false;
      for (int lit : soft.lits) {
        const signed char v = value_[var_of(lit)];
        if (v == kUnset || (v == 1) == (lit > 0)) {
          possibly_true = true;
          break;
        }
      }
      if (!possibly_true) total += soft.weight;
    }
    return total;
  }

  int pick_unassigned() const {
    for (int v : order_) {
      if (value_[v] == kUnset) return v;
    }
    return -1;
  }

  void optimize(int) {
    const std::uint64_t lb = falsified_soft();
    if (best_ && lb >= *best_) return;
    const int var = pick_unassigned();
    if (var < 0) {
      best_ = lb;  // strictly better than any previous, per the prune above
      return;
    }
    for (const bool first : {true, false}) {
      const bool val = first ? preferred_[var] : !preferred_[var];
      const std::size_t mark = trail_.size();
      assign(var, val);
      if (propagate()) optimize(0);
      undo_to(mark);
    }
  }

  // Index-order, false-first DFS; complete assignments are therefore visited
  // in lexicographic order and the first one within the bound is returned.
  bool lex_search() {
    const std::uint64_t lb = falsified_soft();
    if (lb > bound_) return false;
    int var = -1;
    for (int v = 0; v < prob_.num_vars; ++v) {
      if (value_[v] == kUnset) {
        var = v;
        break;
      }
    }
    if (var < 0) {
      BoolVector assignment(prob_.num_vars);
      for (int v = 0; v < prob_.num_vars; ++v) assignment[v] = value_[v] == 1;
      found_ = std::move(assignment);
      return true;
    }
    for (const bool val : {false, true}) {
      const std::size_t mark = trail_.size();
      assign(var, val);
      if (propagate() && lex_search()) return true;
      undo_to(mark);
    }
    return false;
  }

  const WcnfProblem& prob_;
  std::vector<signed char> value_;
  std::vector<int> trail_;
  std::vector<int> order_;
  std::vector<bool> preferred_;
  std::optional<std::uint64_t> best_;
  std::uint64_t bound_ = 0;
  std::optional<BoolVector> found_;
};

std::uint64_t round_weight(Real magnitude, std::int64_t scale) {
  return static_cast<std::uint64_t>(std::llround(static_cast<Real>(scale) * magnitude));
}

}  // namespace

void validate_problem(const WcnfProblem& prob) {
  if (prob.num_vars < 0) throw InputError("negative variable count");
  auto check_lits = [&](const std::vector<int>& lits) {
    for (int lit : lits) {
      if (lit == 0 || std::abs(lit) > prob.num_vars) {
        throw InputError("literal " + std::to_string(lit) + " outside [1, " +
                         std::to_string(prob.num_vars) + "]");
      }
    }
  };
  std::uint64_t soft_sum = 0;
  for (const auto& clause : prob.hard) check_lits(clause);
  for (const SoftClause& soft : prob.soft) {
    check_lits(soft.lits);
    if (soft.lits.empty()) throw InputError("empty soft clause");
    if (soft.weight == 0) throw InputError("soft clause with zero weight");
    soft_sum += soft.weight;
  }
  for (const auto& clause : prob.hard) {
    if (clause.empty()) throw InputError("empty hard clause");
  }
  if (prob.top <= soft_sum) {
    throw InputError("top (" + std::to_string(prob.top) +
                     ") must exceed the soft weight sum (" + std::to_string(soft_sum) + ")");
  }
}

std::uint64_t soft_weight_sum(const WcnfProblem& prob) {
  std::uint64_t total = 0;
  for (const SoftClause& soft : prob.soft) total += soft.weight;
  return total;
}

std::uint64_t falsified_weight(const WcnfProblem& prob, const BoolVector& assignment) {
  std::uint64_t total = 0;
  for (const SoftClause& soft : prob.soft) {
    if (!clause_satisfied(soft.lits, assignment)) total += soft.weight;
  }
  return total;
}

bool hard_satisfied(const WcnfProblem& prob, const BoolVector& assignment) {
  return std::all_of(prob.hard.begin(), prob.hard.end(),
                     [&](const auto& clause) { return clause_satisfied(clause, assignment); });
}

WcnfProblem encode(const RequirementSet& rs, const ScoreVector& p, std::int64_t scale,
                   SoftWeighting weighting) {
  if (p.size() != rs.num_labels()) {
    throw InputError("score vector length " + std::to_string(p.size()) +
                     " does not match label count " + std::to_string(rs.num_labels()));
  }
  if (scale < 1) throw InputError("scale must be >= 1");
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
  for (int x = 0; x < p.size(); ++x) {
    const Real score = p[x];
    std::uint64_t weight = 0;
    int lit = 0;
    if (weighting == SoftWeighting::polarity) {
      if (score == 0.5) continue;
      weight = round_weight(std::abs(2.0 * score - 1.0), scale);
      lit = score > 0.5 ? x + 1 : -(x + 1);
    } else {
      weight = round_weight(score, scale);
      lit = x + 1;
    }
    if (weight == 0) continue;  // a zero-weight clause cannot affect the optimum
    prob.soft.push_back(SoftClause{{lit}, weight});
  }
  prob.top = 1 + soft_weight_sum(prob);
  return prob;
}

SolveResult solve(const WcnfProblem& prob) {
  validate_problem(prob);
  Solver solver(prob);
  const auto cost = solver.best_cost();
  if (!cost) throw HardUnsatError("hard clauses are unsatisfiable");
  auto assignment = solver.find_lex_leq(*cost);
  if (!assignment) throw HardUnsatError("hard clauses are unsatisfiable");
  return SolveResult{std::move(*assignment), *cost};
}

SolveResult solve_bruteforce(const WcnfProblem& prob) {
  validate_problem(prob);
  const int n = prob.num_vars;
  if (n > kBruteForceLimit) {
    throw TooManyVarsError("brute force supports at most " +
                           std::to_string(kBruteForceLimit) + " variables, got " +
                           std::to_string(n));
  }
  std::optional<SolveResult> best;
  BoolVector assignment(n);
  // Variable 0 is the most significant digit, so ascending integers walk the
  // assignments in lexicographic order and the first strict improvement is
  // the lexicographically smallest optimum.
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    for (int v = 0; v < n; ++v) assignment[v] = (code >> (n - 1 - v)) & 1;
    if (!hard_satisfied(prob, assignment)) continue;
    const std::uint64_t cost = falsified_weight(prob, assignment);
    if (!best || cost < best->cost) best = SolveResult{assignment, cost};
  }
  if (!best) throw HardUnsatError("hard clauses are unsatisfiable");
  return *best;
}

std::vector<LabeledBox> correct_frame(const RequirementSet& rs, const DetectionFrame& frame,
                                      const CorrectOptions& opts) {
  const SolverFn solver = opts.solver ? opts.solver : SolverFn(&solve);
  std::vector<LabeledBox> out;
  out.reserve(frame.detections.size());
  for (const Detection& det : frame.detections) {
    const WcnfProblem prob = encode(rs, det.scores, opts.scale, opts.weighting);
    SolveResult result = solver(prob);
    out.push_back(LabeledBox{det.box, std::move(result.assignment)});
  }
  return out;
}

std::string to_wcnf(const WcnfProblem& prob) {
  validate_problem(prob);
  std::ostringstream out;
  out << "p wcnf " << prob.num_vars << ' ' << prob.hard.size() + prob.soft.size() << ' '
      << prob.top << '\n';
  auto write_clause = [&](std::uint64_t weight, const std::vector<int>& lits) {
    out << weight;
    for (int lit : lits) out << ' ' << lit;
    out << " 0\n";
  };
  for (const auto& clause : prob.hard) write_clause(prob.top, clause);
  for (const SoftClause& soft : prob.soft) write_clause(soft.weight, soft.lits);
  return out.str();
}

ExternalResult parse_solver_output(const std::string& text, int num_vars) {
  ExternalResult result;
  std::vector<std::string> value_tokens;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("o ", 0) == 0) {
      result.reported_cost = std::strtoull(line.c_str() + 2, nullptr, 10);
      result.has_cost = true;
    } else if (line.rfind("v ", 0) == 0 || line == "v") {
      std::istringstream parts(line.substr(1));
      std::string token;
      while (parts >> token) value_tokens.push_back(token);
    }
  }
  if (value_tokens.empty()) {
    throw InputError("solver output contains no 'v' model line");
  }
  BoolVector assignment = BoolVector::Constant(num_vars, false);
  const bool binary_form =
      value_tokens.size() == 1 &&
      value_tokens[0].find_first_not_of("01") == std::string::npos &&
      static_cast<int>(value_tokens[0].size()) == num_vars;
  if (binary_form) {
    for (int v = 0; v < num_vars; ++v) assignment[v] = value_tokens[0][v] == '1';
  } else {
    for (const std::string& token : value_tokens) {
      char* end = nullptr;
      const long lit = std::strtol(token.c_str(), &end, 10);
      if (end == token.c_str() || *end != '\0') {
        throw InputError("unparseable literal '" + token + "' in solver model line");
      }
      if (lit == 0) continue;
      const int var = static_cast<int>(std::labs(lit)) - 1;
      if (var >= num_vars) {
        throw InputError("model literal " + std::to_string(lit) + " outside problem");
      }
      assignment[var] = lit > 0;
    }
  }
  result.assignment = std::move(assignment);
  return result;
}

}  // namespace condet
