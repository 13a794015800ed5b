#ifndef PREMSEL_TPTP_HPP
#define PREMSEL_TPTP_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "premsel/util.hpp"

namespace premsel {

// First-order term. Variables are leaves; a constant is a 0-ary application.
struct Term {
  std::string name;
  std::vector<Term> args;
  bool is_variable = false;

  bool operator==(const Term&) const = default;
};

// Formula tree for the FOF fragment: quantifiers ! and ?, connectives
// ~ & | => <=>, predicate atoms and equations. `a != b` parses as Not(Equal).
struct Formula {
  enum class Kind { Forall, Exists, Not, And, Or, Implies, Iff, Atom, Equal };

  Kind kind = Kind::Atom;
  std::vector<std::string> variables;  // quantifiers
  std::vector<Formula> children;       // quantifier body / connective operands
  std::string predicate;               // atoms
  std::vector<Term> terms;             // atom arguments; both sides of Equal

  bool is_quantifier() const { return kind == Kind::Forall || kind == Kind::Exists; }
  bool operator==(const Formula&) const = default;
};

enum class Role { Axiom, Conjecture };

std::string_view role_name(Role role);

struct Statement {
  std::string name;
  Role role = Role::Axiom;
  Formula formula;
  // Exact byte span of the original `fof(...).` item, plus the location of
  // the role token inside it so the role can be rewritten without touching
  // anything else.
  std::string source_text;
  std::size_t role_begin = 0;
  std::size_t role_end = 0;

  // Equality of the parts the pipeline cares about; source spans may differ.
  bool same_content(const Statement& other) const {
    return name == other.name && role == other.role && formula == other.formula;
  }
};

// Multiset of feature strings with positive counts, keyed in sorted order.
using FeatureBag = std::map<std::string, std::uint32_t>;

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Parses a sequence of `fof(name, role, formula).` items. `%` comments and
// blank lines are allowed. Roles other than axiom/conjecture normalize to
// axiom. Rejects duplicate names, unbound variables, and symbols used with
// two different arities anywhere in the input.
std::vector<Statement> parse_statements(std::string_view text);

// Feature recipe: one `sym:<s>` per non-variable symbol occurrence (equality
// counts as the symbol `=`), one `walk:<parent>-<child>` per edge in the
// term/atom tree with variables anonymized to `V`. Connectives and
// quantifiers contribute nothing. Counts accumulate over occurrences.
FeatureBag extract_features(const Formula& formula);

// Original source text with the role token rewritten to match `s.role`.
std::string print_statement(const Statement& s);

// Canonical rendering of the formula tree back to TPTP syntax.
std::string print_formula(const Formula& formula);

Statement with_role(Statement s, Role role);

// Emits the axioms in the given order followed by the conjecture, each as its
// source text with the role rewritten. Names must be unique.
void write_problem(const Statement& conjecture, const std::vector<Statement>& axioms,
                   std::ostream& sink);

}  // namespace premsel

#endif  // PREMSEL_TPTP_HPP
