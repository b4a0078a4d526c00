#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "condet/detections.hpp"
#include "condet/fuzzy.hpp"
#include "condet/labels.hpp"
#include "condet/types.hpp"

namespace condet {

/// No assignment satisfies the hard clauses.
struct HardUnsatError : InfeasibleError {
  explicit HardUnsatError(const std::string& what) : InfeasibleError(what) {}
};

/// Brute-force enumeration requested above its variable limit.
struct TooManyVarsError : InputError {
  explicit TooManyVarsError(const std::string& what) : InputError(what) {}
};

struct SoftClause {
  std::vector<int> lits;     // 1-based DIMACS literals, never 0
  std::uint64_t weight = 1;  // positive
};

// Weighted partial MaxSAT instance. Hard clauses must hold; soft clauses may
// be falsified at their weight. top must exceed the sum of soft weights.
struct WcnfProblem {
  int num_vars = 0;
  std::vector<std::vector<int>> hard;
  std::vector<SoftClause> soft;
  std::uint64_t top = 1;
};

void validate_problem(const WcnfProblem& prob);

std::uint64_t soft_weight_sum(const WcnfProblem& prob);

/// Total weight of soft clauses falsified by the assignment.
std::uint64_t falsified_weight(const WcnfProblem& prob, const BoolVector& assignment);

bool hard_satisfied(const WcnfProblem& prob, const BoolVector& assignment);

enum class SoftWeighting {
  polarity,  // unit soft clause on the preferred polarity, weight round(scale*|2p-1|)
  raw,       // positive unit soft clauses only, weight round(scale*p)
};

/// Requirement clauses become hard clauses; each label with a score away from
/// 0.5 contributes one unit soft clause on its preferred polarity with weight
/// round(scale * |2p - 1|). Labels whose weight rounds to zero contribute no
/// soft clause. top = 1 + sum of soft weights.
WcnfProblem encode(const RequirementSet& rs, const ScoreVector& p,
                   std::int64_t scale = 1'000'000,
                   SoftWeighting weighting = SoftWeighting::polarity);

struct SolveResult {
  BoolVector assignment;
  std::uint64_t cost = 0;
};

/// Exact branch-and-bound solve: the returned assignment satisfies every hard
/// clause and minimizes the falsified soft weight; among optima the
/// lexicographically smallest assignment (false < true, index order) is
/// returned. Throws HardUnsatError when the hard clauses are unsatisfiable.
SolveResult solve(const WcnfProblem& prob);

/// Exhaustive reference with the identical contract; limited to 24 variables.
SolveResult solve_bruteforce(const WcnfProblem& prob);

using SolverFn = std::function<SolveResult(const WcnfProblem&)>;

struct CorrectOptions {
  std::int64_t scale = 1'000'000;
  SoftWeighting weighting = SoftWeighting::polarity;
  SolverFn solver;  // defaults to the internal solve()
};

/// Per detection: encode + solve, yielding hard label sets that satisfy the
/// requirement set.
std::vector<LabeledBox> correct_frame(const RequirementSet& rs, const DetectionFrame& frame,
                                      const CorrectOptions& opts = {});

/// Pre-2022 DIMACS WCNF text: header `p wcnf <vars> <clauses> <top>`, then one
/// clause per line, weight first, 0-terminated; hard clauses weigh top and
/// precede soft clauses. Every line ends with LF.
std::string to_wcnf(const WcnfProblem& prob);

/// Parses a MaxSAT solver's stdout: the model from `v ` lines (either signed
/// DIMACS literals or a single 0/1 string) and the last `o ` line as cost.
struct ExternalResult {
  BoolVector assignment;
  std::uint64_t reported_cost = 0;
  bool has_cost = false;
};
ExternalResult parse_solver_output(const std::string& text, int num_vars);

}  // namespace condet
