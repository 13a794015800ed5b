#include "premsel/tptp.hpp"

#include <cctype>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace premsel {

std::string_view role_name(Role role) {
  return role == Role::Conjecture ? "conjecture" : "axiom";
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(message + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
      line_(line),
      column_(column) {}

namespace {

enum class Tok {
  LowerWord,
  UpperWord,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Colon,
  Tilde,
  Amp,
  Pipe,
  Implies,
  Iff,
  Equal,
  NotEqual,
  Bang,
  Question,
  End,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::LowerWord: return "name";
    case Tok::UpperWord: return "variable";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Tilde: return "'~'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Implies: return "'=>'";
    case Tok::Iff: return "'<=>'";
    case Tok::Equal: return "'='";
    case Tok::NotEqual: return "'!='";
    case Tok::Bang: return "'!'";
    case Tok::Question: return "'?'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t offset = 0;  // byte offset of first character
  std::size_t length = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, current_.line, current_.column);
  }

 private:
  void advance() {
    skip_trivia();
    current_ = Token{};
    current_.offset = pos_;
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::End;
      return;
    }
    char c = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      scan_word(Tok::LowerWord);
      return;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      scan_word(Tok::UpperWord);
      return;
    }
    switch (c) {
      case '(': single(Tok::LParen); return;
      case ')': single(Tok::RParen); return;
      case '[': single(Tok::LBracket); return;
      case ']': single(Tok::RBracket); return;
      case ',': single(Tok::Comma); return;
      case '.': single(Tok::Dot); return;
      case ':': single(Tok::Colon); return;
      case '~': single(Tok::Tilde); return;
      case '&': single(Tok::Amp); return;
      case '|': single(Tok::Pipe); return;
      case '?': single(Tok::Question); return;
      case '!':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          multi(Tok::NotEqual, 2);
        } else {
          single(Tok::Bang);
        }
        return;
      case '=':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          multi(Tok::Implies, 2);
        } else {
          single(Tok::Equal);
        }
        return;
      case '<':
        if (pos_ + 2 < text_.size() && text_[pos_ + 1] == '=' && text_[pos_ + 2] == '>') {
          multi(Tok::Iff, 3);
          return;
        }
        throw ParseError("unsupported operator starting with '<'", line_, column_);
      case '\'':
      case '"':
        throw ParseError("quoted atoms are not supported", line_, column_);
      default:
        if (std::isdigit(static_cast<unsigned char>(c)))
          throw ParseError("numeric tokens are not supported", line_, column_);
        throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
    }
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') step();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        step();
      } else {
        break;
      }
    }
  }

  void scan_word(Tok kind) {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        step();
      } else {
        break;
      }
    }
    current_.kind = kind;
    current_.text = std::string(text_.substr(start, pos_ - start));
    current_.length = pos_ - start;
  }

  void single(Tok kind) { multi(kind, 1); }

  void multi(Tok kind, std::size_t n) {
    current_.kind = kind;
    current_.text = std::string(text_.substr(pos_, n));
    current_.length = n;
    for (std::size_t i = 0; i < n; ++i) step();
  }

  void step() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text), lexer_(text) {}

  std::vector<Statement> parse_all() {
    std::vector<Statement> statements;
    std::set<std::string> names;
    while (lexer_.peek().kind != Tok::End) {
      Statement s = parse_statement();
      if (!names.insert(s.name).second)
        throw Error("duplicate statement name: " + s.name);
      check_bound(s);
      statements.push_back(std::move(s));
    }
    return statements;
  }

 private:
  Token expect(Tok kind) {
    if (lexer_.peek().kind != kind)
      lexer_.fail(std::string("expected ") + tok_name(kind) + ", found " +
                  tok_name(lexer_.peek().kind));
    return lexer_.take();
  }

  Statement parse_statement() {
    Token head = expect(Tok::LowerWord);
    if (head.text != "fof")
      throw ParseError("expected 'fof', found '" + head.text + "'", head.line, head.column);
    std::size_t begin = head.offset;
    expect(Tok::LParen);
    Token name = expect(Tok::LowerWord);
    expect(Tok::Comma);
    Token role = expect(Tok::LowerWord);
    expect(Tok::Comma);
    Statement s;
    s.name = name.text;
    s.role = role.text == "conjecture" ? Role::Conjecture : Role::Axiom;
    s.formula = parse_formula();
    expect(Tok::RParen);
    Token dot = expect(Tok::Dot);
    s.source_text = std::string(text_.substr(begin, dot.offset + dot.length - begin));
    s.role_begin = role.offset - begin;
    s.role_end = s.role_begin + role.length;
    return s;
  }

  Formula parse_formula() {
    Formula left = parse_unit();
    Tok next = lexer_.peek().kind;
    if (next == Tok::Amp || next == Tok::Pipe) {
      Formula out;
      out.kind = next == Tok::Amp ? Formula::Kind::And : Formula::Kind::Or;
      out.children.push_back(std::move(left));
      while (lexer_.peek().kind == next) {
        lexer_.take();
        out.children.push_back(parse_unit());
      }
      Tok after = lexer_.peek().kind;
      if (after == Tok::Amp || after == Tok::Pipe || after == Tok::Implies || after == Tok::Iff)
        lexer_.fail("mixed binary connectives require parentheses");
      return out;
    }
    if (next == Tok::Implies || next == Tok::Iff) {
      lexer_.take();
      Formula out;
      out.kind = next == Tok::Implies ? Formula::Kind::Implies : Formula::Kind::Iff;
      out.children.push_back(std::move(left));
      out.children.push_back(parse_unit());
      Tok after = lexer_.peek().kind;
      if (after == Tok::Amp || after == Tok::Pipe || after == Tok::Implies || after == Tok::Iff)
        lexer_.fail("'=>' and '<=>' are non-associative; use parentheses");
      return out;
    }
    return left;
  }

  Formula parse_unit() {
    const Token& t = lexer_.peek();
    switch (t.kind) {
      case Tok::Tilde: {
        lexer_.take();
        Formula out;
        out.kind = Formula::Kind::Not;
        out.children.push_back(parse_unit());
        return out;
      }
      case Tok::Bang:
      case Tok::Question: {
        Tok q = lexer_.take().kind;
        expect(Tok::LBracket);
        Formula out;
        out.kind = q == Tok::Bang ? Formula::Kind::Forall : Formula::Kind::Exists;
        out.variables.push_back(expect(Tok::UpperWord).text);
        while (lexer_.peek().kind == Tok::Comma) {
          lexer_.take();
          out.variables.push_back(expect(Tok::UpperWord).text);
        }
        expect(Tok::RBracket);
        expect(Tok::Colon);
        out.children.push_back(parse_unit());
        return out;
      }
      case Tok::LParen: {
        lexer_.take();
        Formula out = parse_formula();
        expect(Tok::RParen);
        return out;
      }
      case Tok::LowerWord:
      case Tok::UpperWord: {
        Term lhs = parse_term();
        Tok next = lexer_.peek().kind;
        if (next == Tok::Equal || next == Tok::NotEqual) {
          lexer_.take();
          Formula eq;
          eq.kind = Formula::Kind::Equal;
          eq.terms.push_back(std::move(lhs));
          eq.terms.push_back(parse_term());
          record_arity("=", 2, t);
          if (next == Tok::Equal) return eq;
          Formula neq;
          neq.kind = Formula::Kind::Not;
          neq.children.push_back(std::move(eq));
          return neq;
        }
        if (lhs.is_variable)
          throw ParseError("variable '" + lhs.name + "' cannot occur as a formula", t.line,
                           t.column);
        Formula atom;
        atom.kind = Formula::Kind::Atom;
        atom.predicate = std::move(lhs.name);
        atom.terms = std::move(lhs.args);
        return atom;
      }
      default:
        lexer_.fail(std::string("expected a formula, found ") + tok_name(t.kind));
    }
  }

  Term parse_term() {
    const Token& t = lexer_.peek();
    if (t.kind == Tok::UpperWord) {
      Term v;
      v.name = lexer_.take().text;
      v.is_variable = true;
      return v;
    }
    Token head = expect(Tok::LowerWord);
    Term out;
    out.name = head.text;
    if (lexer_.peek().kind == Tok::LParen) {
      lexer_.take();
      out.args.push_back(parse_term());
      while (lexer_.peek().kind == Tok::Comma) {
        lexer_.take();
        out.args.push_back(parse_term());
      }
      expect(Tok::RParen);
    }
    record_arity(out.name, out.args.size(), head);
    return out;
  }

  void record_arity(const std::string& symbol, std::size_t arity, const Token& at) {
    auto [it, inserted] = arities_.emplace(symbol, arity);
    if (!inserted && it->second != arity)
      throw ParseError("inconsistent arity for symbol '" + symbol + "': " +
                           std::to_string(it->second) + " vs " + std::to_string(arity),
                       at.line, at.column);
  }

  void check_bound(const Statement& s) {
    std::vector<std::string> scope;
    check_bound_formula(s, s.formula, scope);
  }

  void check_bound_formula(const Statement& s, const Formula& f, std::vector<std::string>& scope) {
    if (f.is_quantifier()) {
      for (const auto& v : f.variables) scope.push_back(v);
      check_bound_formula(s, f.children.front(), scope);
      scope.resize(scope.size() - f.variables.size());
      return;
    }
    for (const auto& child : f.children) check_bound_formula(s, child, scope);
    for (const auto& term : f.terms) check_bound_term(s, term, scope);
  }

  void check_bound_term(const Statement& s, const Term& t, const std::vector<std::string>& scope) {
    if (t.is_variable) {
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (*it == t.name) return;
      throw Error("unbound variable " + t.name + " in statement " + s.name);
    }
    for (const auto& arg : t.args) check_bound_term(s, arg, scope);
  }

  std::string_view text_;
  Lexer lexer_;
  std::unordered_map<std::string, std::size_t> arities_;
};

void term_features(const Term& t, const std::string* parent, FeatureBag& bag) {
  if (t.is_variable) {
    if (parent) ++bag["walk:" + *parent + "-V"];
    return;
  }
  ++bag["sym:" + t.name];
  if (parent) ++bag["walk:" + *parent + "-" + t.name];
  for (const auto& arg : t.args) term_features(arg, &t.name, bag);
}

void formula_features(const Formula& f, FeatureBag& bag) {
  switch (f.kind) {
    case Formula::Kind::Atom: {
      ++bag["sym:" + f.predicate];
      for (const auto& arg : f.terms) term_features(arg, &f.predicate, bag);
      return;
    }
    case Formula::Kind::Equal: {
      static const std::string eq = "=";
      ++bag["sym:="];
      for (const auto& side : f.terms) term_features(side, &eq, bag);
      return;
    }
    default:
      for (const auto& child : f.children) formula_features(child, bag);
  }
}

void print_term(const Term& t, std::string& out) {
  out += t.name;
  if (!t.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ", ";
      print_term(t.args[i], out);
    }
    out += ')';
  }
}

bool is_unit(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Equal:
    case Formula::Kind::Not:
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return true;
    default:
      return false;
  }
}

void print_rec(const Formula& f, std::string& out) {
  auto child = [&](const Formula& c) {
    if (is_unit(c)) {
      print_rec(c, out);
    } else {
      out += '(';
      print_rec(c, out);
      out += ')';
    }
  };
  switch (f.kind) {
    case Formula::Kind::Atom:
      out += f.predicate;
      if (!f.terms.empty()) {
        out += '(';
        for (std::size_t i = 0; i < f.terms.size(); ++i) {
          if (i) out += ", ";
          print_term(f.terms[i], out);
        }
        out += ')';
      }
      return;
    case Formula::Kind::Equal:
      print_term(f.terms[0], out);
      out += " = ";
      print_term(f.terms[1], out);
      return;
    case Formula::Kind::Not:
      // `a != b` round-trips through Not(Equal).
      if (f.children.front().kind == Formula::Kind::Equal) {
        const Formula& eq = f.children.front();
        print_term(eq.terms[0], out);
        out += " != ";
        print_term(eq.terms[1], out);
        return;
      }
      out += '~';
      child(f.children.front());
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      out += f.kind == Formula::Kind::Forall ? '!' : '?';
      out += '[';
      for (std::size_t i = 0; i < f.variables.size(); ++i) {
        if (i) out += ", ";
        out += f.variables[i];
      }
      out += "]: ";
      child(f.children.front());
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const char* op = f.kind == Formula::Kind::And ? " & " : " | ";
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += op;
        child(f.children[i]);
      }
      return;
    }
    case Formula::Kind::Implies:
    case Formula::Kind::Iff: {
      child(f.children[0]);
      out += f.kind == Formula::Kind::Implies ? " => " : " <=> ";
      child(f.children[1]);
      return;
    }
  }
}

}  // namespace

std::vector<Statement> parse_statements(std::string_view text) {
  return Parser(text).parse_all();
}

FeatureBag extract_features(const Formula& formula) {
  FeatureBag bag;
  formula_features(formula, bag);
  return bag;
}

std::string print_formula(const Formula& formula) {
  std::string out;
  print_rec(formula, out);
  return out;
}

std::string print_statement(const Statement& s) {
  if (s.source_text.empty())
    return "fof(" + s.name + ", " + std::string(role_name(s.role)) + ", " +
           print_formula(s.formula) + ").";
  std::string out;
  out.reserve(s.source_text.size() + 16);
  out += s.source_text.substr(0, s.role_begin);
  out += role_name(s.role);
  out += s.source_text.substr(s.role_end);
  return out;
}

Statement with_role(Statement s, Role role) {
  s.role = role;
  return s;
}

void write_problem(const Statement& conjecture, const std::vector<Statement>& axioms,
                   std::ostream& sink) {
  if (conjecture.role != Role::Conjecture)
    throw Error("write_problem: conjecture statement must have role conjecture");
  std::set<std::string> names;
  names.insert(conjecture.name);
  for (const auto& ax : axioms) {
    if (ax.role != Role::Axiom)
      throw Error("write_problem: axiom statement must have role axiom: " + ax.name);
    if (!names.insert(ax.name).second)
      throw Error("write_problem: duplicate name " + ax.name);
  }
  for (const auto& ax : axioms) sink << print_statement(ax) << '\n';
  sink << print_statement(conjecture) << '\n';
}

}  // namespace premsel
