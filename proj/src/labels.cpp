#include "condet/labels.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "condet/maxsat.hpp"

namespace condet {
namespace {

std::vector<std::string> content_lines(std::string_view text) {
  // Returns one entry per input line with comments stripped and edges
  // trimmed; empty entries mark blank/comment lines so indices still match
  // the file's line numbers.
  std::vector<std::string> lines;
  std::string current;
  auto flush = [&] {
    const auto hash = current.find('#');
    if (hash != std::string::npos) current.erase(hash);
    const auto first = current.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      current.clear();
    } else {
      const auto last = current.find_last_not_of(" \t\r");
      current = current.substr(first, last - first + 1);
    }
    lines.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) flush();
  return lines;
}

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

[[noreturn]] void fail(int line_no, const std::string& message) {
  throw InputError("line " + std::to_string(line_no) + ": " + message);
}

bool clauses_satisfiable(const std::vector<Requirement>& clauses, int num_labels) {
  WcnfProblem prob;
  prob.num_vars = num_labels;
  prob.top = 1;
  for (const Requirement& clause : clauses) {
    std::vector<int> lits;
    lits.reserve(clause.literals.size());
    for (const Literal& lit : clause.literals) {
      lits.push_back(lit.negated ? -(lit.label_index + 1) : lit.label_index + 1);
    }
    prob.hard.push_back(std::move(lits));
  }
  try {
    solve(prob);
    return true;
  } catch (const HardUnsatError&) {
    return false;
  }
}

// Names one clause whose removal restores satisfiability, if any; makes the
// unsat diagnostic actionable.
std::string unsat_message(const std::vector<Requirement>& clauses, int num_labels,
                          const LabelSpace& ls) {
  for (std::size_t k = 0; k < clauses.size(); ++k) {
    std::vector<Requirement> rest;
    rest.reserve(clauses.size() - 1);
    for (std::size_t j = 0; j < clauses.size(); ++j) {
      if (j != k) rest.push_back(clauses[j]);
    }
    if (clauses_satisfiable(rest, num_labels)) {
      Requirement clause = clauses[k];
      return "requirement set is unsatisfiable: clause " + std::to_string(k + 1) + " ('" +
             serialize_clause(clause, ls) + "') conflicts with the remaining clauses";
    }
  }
  return "requirement set is unsatisfiable";
}

}  // namespace

std::string_view group_name(LabelGroup g) {
  switch (g) {
    case LabelGroup::agent: return "agent";
    case LabelGroup::action: return "action";
    case LabelGroup::location: return "location";
    case LabelGroup::other: return "other";
  }
  return "other";
}

std::optional<LabelGroup> parse_group(std::string_view token) {
  if (token == "agent") return LabelGroup::agent;
  if (token == "action") return LabelGroup::action;
  if (token == "location") return LabelGroup::location;
  if (token == "other") return LabelGroup::other;
  return std::nullopt;
}

LabelSpace::LabelSpace(std::vector<Label> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("label space is empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Label& label = labels_[i];
    if (!valid_identifier(label.name)) {
      throw InputError("label name '" + label.name + "' is not an identifier");
    }
    if (!seen.insert(label.name).second) {
      throw InputError("duplicate label name '" + label.name + "'");
    }
    if (label.group == LabelGroup::agent) agent_indices_.push_back(static_cast<int>(i));
  }
  if (agent_indices_.empty()) {
    throw InputError("label space has no agent-group label");
  }
}

std::optional<int> LabelSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int LabelSpace::count(LabelGroup g) const {
  return static_cast<int>(
      std::count_if(labels_.begin(), labels_.end(), [g](const Label& l) { return l.group == g; }));
}

Requirement make_requirement(std::vector<Literal> literals, int num_labels) {
  if (literals.empty()) throw InputError("empty clause");
  std::set<std::pair<int, bool>> seen;
  for (const Literal& lit : literals) {
    if (lit.label_index < 0 || lit.label_index >= num_labels) {
      throw InputError("literal index " + std::to_string(lit.label_index) +
                       " outside label space of size " + std::to_string(num_labels));
    }
    if (!seen.insert({lit.label_index, lit.negated}).second) {
      throw InputError("duplicate literal in clause");
    }
    if (seen.count({lit.label_index, !lit.negated})) {
      throw InputError("tautological clause: a label occurs with both polarities");
    }
  }
  return Requirement{std::move(literals)};
}

RequirementSet make_requirement_set(LabelSpace space, std::vector<Requirement> clauses) {
  const int n = space.size();
  std::vector<Requirement> checked;
  checked.reserve(clauses.size());
  for (Requirement& clause : clauses) {
    checked.push_back(make_requirement(std::move(clause.literals), n));
  }
  if (!clauses_satisfiable(checked, n)) {
    LabelSpace ls = space;
    throw InfeasibleError(unsat_message(checked, n, ls));
  }
  return RequirementSet{std::move(space), std::move(checked)};
}

BooleanCheck eval_boolean(const RequirementSet& rs, const BoolVector& assignment) {
  if (assignment.size() != rs.num_labels()) {
    throw InputError("assignment length " + std::to_string(assignment.size()) +
                     " does not match label count " + std::to_string(rs.num_labels()));
  }
  BooleanCheck result;
  for (int i = 0; i < rs.num_clauses(); ++i) {
    bool clause_true = false;
    for (const Literal& lit : rs.clauses[i].literals) {
      if (assignment[lit.label_index] != lit.negated) {
        clause_true = true;
        break;
      }
    }
    if (!clause_true) {
      result.satisfied = false;
      result.violated_indices.push_back(i);
    }
  }
  return result;
}

LabelSpace parse_labelspace(std::string_view text) {
  std::vector<Label> labels;
  std::unordered_set<std::string> seen;
  const auto lines = content_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    std::istringstream parts(line);
    std::string name, group_token, extra;
    parts >> name >> group_token;
    if (group_token.empty()) fail(static_cast<int>(i + 1), "expected 'name group'");
    if (parts >> extra) fail(static_cast<int>(i + 1), "trailing token '" + extra + "'");
    if (!valid_identifier(name)) {
      fail(static_cast<int>(i + 1), "label name '" + name + "' is not an identifier");
    }
    if (!seen.insert(name).second) {
      fail(static_cast<int>(i + 1), "duplicate label name '" + name + "'");
    }
    const auto group = parse_group(group_token);
    if (!group) fail(static_cast<int>(i + 1), "unknown group tag '" + group_token + "'");
    labels.push_back(Label{std::move(name), *group});
  }
  if (labels.empty()) throw InputError("label file defines no labels");
  return LabelSpace(std::move(labels));
}

std::string serialize_labelspace(const LabelSpace& ls) {
  std::string out;
  for (const Label& label : ls.labels()) {
    out += label.name;
    out += ' ';
    out += group_name(label.group);
    out += '\n';
  }
  return out;
}

RequirementSet parse_requirements(std::string_view text, const LabelSpace& ls) {
  std::vector<Requirement> clauses;
  const auto lines = content_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    std::vector<Literal> literals;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto bar = line.find('|', start);
      if (bar == std::string::npos) bar = line.size();
      std::string token = line.substr(start, bar - start);
      const auto first = token.find_first_not_of(" \t");
      if (first == std::string::npos) {
        fail(static_cast<int>(i + 1), "empty literal in clause");
      }
      const auto last = token.find_last_not_of(" \t");
      token = token.substr(first, last - first + 1);
      bool negated = false;
      if (token[0] == '!') {
        negated = true;
        token.erase(0, 1);
        const auto inner = token.find_first_not_of(" \t");
        if (inner == std::string::npos) fail(static_cast<int>(i + 1), "'!' without a label");
        token = token.substr(inner);
      }
      const auto index = ls.index_of(token);
      if (!index) fail(static_cast<int>(i + 1), "unknown label '" + token + "'");
      literals.push_back(Literal{*index, negated});
      start = bar + 1;
      if (bar == line.size()) break;
    }
    try {
      clauses.push_back(make_requirement(std::move(literals), ls.size()));
    } catch (const InputError& e) {
      fail(static_cast<int>(i + 1), e.what());
    }
  }
  return make_requirement_set(ls, std::move(clauses));
}

std::string serialize_clause(const Requirement& clause, const LabelSpace& ls) {
  std::string out;
  for (std::size_t i = 0; i < clause.literals.size(); ++i) {
    if (i > 0) out += " | ";
    if (clause.literals[i].negated) out += '!';
    out += ls.name(clause.literals[i].label_index);
  }
  return out;
}

std::string serialize_requirements(const RequirementSet& rs) {
  std::string out;
  for (const Requirement& clause : rs.clauses) {
    out += serialize_clause(clause, rs.label_space);
    out += '\n';
  }
  return out;
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}
}  // namespace

LabelSpace load_labelspace(const std::string& path) {
  return parse_labelspace(read_file(path));
}

RequirementSet load_requirements(const std::string& path, const LabelSpace& ls) {
  return parse_requirements(read_file(path), ls);
}

}  // namespace condet
