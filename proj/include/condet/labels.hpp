#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condet/types.hpp"

namespace condet {

enum class LabelGroup { agent, action, location, other };

std::string_view group_name(LabelGroup g);
std::optional<LabelGroup> parse_group(std::string_view token);

struct Label {
  std::string name;
  LabelGroup group = LabelGroup::other;
};

// Fixed, ordered label vocabulary. Indices are assigned in construction
// order and survive serialization round-trips. Immutable once built.
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<Label> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& name(int index) const { return labels_[index].name; }
  LabelGroup group(int index) const { return labels_[index].group; }
  const std::vector<Label>& labels() const { return labels_; }

  std::optional<int> index_of(std::string_view name) const;
  const std::vector<int>& agent_indices() const { return agent_indices_; }
  int count(LabelGroup g) const;

 private:
  std::vector<Label> labels_;
  std::vector<int> agent_indices_;
};

struct Literal {
  int label_index = 0;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

// One disjunctive clause over label literals.
struct Requirement {
  std::vector<Literal> literals;
};

/// Validates a clause against a label space: nonempty, indices in range, no
/// duplicate literals, not tautological (x and !x).
Requirement make_requirement(std::vector<Literal> literals, int num_labels);

// A conjunction of disjunctive clauses over one label space. Construction
// through parse_requirements/make_requirement_set verifies boolean
// satisfiability of the conjunction.
struct RequirementSet {
  LabelSpace label_space;
  std::vector<Requirement> clauses;

  int num_labels() const { return label_space.size(); }
  int num_clauses() const { return static_cast<int>(clauses.size()); }
};

RequirementSet make_requirement_set(LabelSpace space, std::vector<Requirement> clauses);

struct BooleanCheck {
  bool satisfied = true;
  std::vector<int> violated_indices;
};

/// True iff every clause has at least one true literal; lists failing clause
/// indices in clause order.
BooleanCheck eval_boolean(const RequirementSet& rs, const BoolVector& assignment);

// Text formats. Labels: one `name group` per line. Requirements: one clause
// per line, literals `name` or `!name` separated by `|`. `#` starts a
// comment; blank lines are skipped; LF and CRLF both accepted.
LabelSpace parse_labelspace(std::string_view text);
std::string serialize_labelspace(const LabelSpace& ls);
RequirementSet parse_requirements(std::string_view text, const LabelSpace& ls);
std::string serialize_requirements(const RequirementSet& rs);
std::string serialize_clause(const Requirement& clause, const LabelSpace& ls);

LabelSpace load_labelspace(const std::string& path);
RequirementSet load_requirements(const std::string& path, const LabelSpace& ls);

}  // namespace condet
