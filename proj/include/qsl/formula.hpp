#pragma once

// Object language: kets, superposition (*), measurement (M), the classical
// connectives and the diamond. Derived connectives (->, <->, [], ~2, ~3) are
// surface syntax only and are expanded while parsing.

#include <cctype>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsl {

namespace detail {
struct Node;
}

/// Immutable, structurally compared formula handle. Copies share the node.
class Formula {
public:
  enum class Kind : std::uint8_t { Atom, Star, Neg, And, Or, Diamond, Meas };

  static Formula atom(std::string name);
  static Formula star(Formula left, Formula right);
  static Formula neg(Formula operand);
  static Formula conj(Formula left, Formula right);
  static Formula disj(Formula left, Formula right);
  static Formula diamond(Formula operand);
  static Formula meas(Formula operand);

  Kind kind() const noexcept;
  const std::string& name() const noexcept;   // atoms only; empty otherwise
  const Formula& left() const;                 // binary nodes
  const Formula& right() const;                // binary nodes
  const Formula& operand() const;              // unary nodes
  std::size_t hash() const noexcept;
  std::size_t size() const noexcept;           // node count of the tree

  bool is_atom() const noexcept { return kind() == Kind::Atom; }
  bool is_star() const noexcept { return kind() == Kind::Star; }
  bool is_binary() const noexcept {
    return kind() == Kind::Star || kind() == Kind::And || kind() == Kind::Or;
  }

  friend bool operator==(const Formula& a, const Formula& b) noexcept;
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b) noexcept;

private:
  explicit Formula(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  static Formula make(Kind kind, std::string name, std::vector<Formula> children);

  std::shared_ptr<const detail::Node> node_;
};

namespace detail {

struct Node {
  Formula::Kind kind;
  std::string name;
  std::vector<Formula> children;
  std::size_t hash = 0;
  std::size_t size = 1;
};

inline std::size_t mix_hash(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

} // namespace detail

inline Formula Formula::make(Kind kind, std::string name, std::vector<Formula> children) {
  auto node = std::make_shared<detail::Node>();
  node->kind = kind;
  node->name = std::move(name);
  node->children = std::move(children);
  std::size_t h = detail::mix_hash(static_cast<std::size_t>(kind) + 1, std::hash<std::string>{}(node->name));
  for (const auto& c : node->children) {
    h = detail::mix_hash(h, c.hash());
    node->size += c.size();
  }
  node->hash = h;
  return Formula(std::move(node));
}

inline Formula Formula::atom(std::string name) { return make(Kind::Atom, std::move(name), {}); }
inline Formula Formula::star(Formula l, Formula r) { return make(Kind::Star, {}, {std::move(l), std::move(r)}); }
inline Formula Formula::neg(Formula f) { return make(Kind::Neg, {}, {std::move(f)}); }
inline Formula Formula::conj(Formula l, Formula r) { return make(Kind::And, {}, {std::move(l), std::move(r)}); }
inline Formula Formula::disj(Formula l, Formula r) { return make(Kind::Or, {}, {std::move(l), std::move(r)}); }
inline Formula Formula::diamond(Formula f) { return make(Kind::Diamond, {}, {std::move(f)}); }
inline Formula Formula::meas(Formula f) { return make(Kind::Meas, {}, {std::move(f)}); }

inline Formula::Kind Formula::kind() const noexcept { return node_->kind; }
inline const std::string& Formula::name() const noexcept { return node_->name; }
inline std::size_t Formula::hash() const noexcept { return node_->hash; }
inline std::size_t Formula::size() const noexcept { return node_->size; }

inline const Formula& Formula::left() const {
  if (node_->children.size() != 2) throw std::logic_error("left() on a non-binary formula");
  return node_->children[0];
}
inline const Formula& Formula::right() const {
  if (node_->children.size() != 2) throw std::logic_error("right() on a non-binary formula");
  return node_->children[1];
}
inline const Formula& Formula::operand() const {
  if (node_->children.size() != 1) throw std::logic_error("operand() on a non-unary formula");
  return node_->children[0];
}

inline bool operator==(const Formula& a, const Formula& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->size != b.node_->size) return false;
  if (a.node_->kind != b.node_->kind || a.node_->name != b.node_->name) return false;
  for (std::size_t i = 0; i < a.node_->children.size(); ++i) {
    if (!(a.node_->children[i] == b.node_->children[i])) return false;
  }
  return true;
}

// Order: kind, then atom name, then children left to right.
inline std::strong_ordering operator<=>(const Formula& a, const Formula& b) noexcept {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.node_->kind <=> b.node_->kind; c != 0) return c;
  if (auto c = a.node_->name.compare(b.node_->name); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  for (std::size_t i = 0; i < a.node_->children.size(); ++i) {
    if (auto c = a.node_->children[i] <=> b.node_->children[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

struct FormulaHash {
  std::size_t operator()(const Formula& f) const noexcept { return f.hash(); }
};

// ---------------------------------------------------------------------------
// Derived connectives

/// Sasaki hook: ~a \/ (a & b).
inline Formula implies(const Formula& a, const Formula& b) {
  return Formula::disj(Formula::neg(a), Formula::conj(a, b));
}
inline Formula iff(const Formula& a, const Formula& b) {
  return Formula::conj(implies(a, b), implies(b, a));
}
inline Formula material(const Formula& a, const Formula& b) {
  return Formula::disj(Formula::neg(a), b);
}
inline Formula box(const Formula& f) {
  return Formula::neg(Formula::diamond(Formula::neg(f)));
}
/// Subcontrary negation: ~[]f.
inline Formula neg3(const Formula& f) { return Formula::neg(box(f)); }

// ---------------------------------------------------------------------------
// Signature

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

/// Atom inventory plus the declared orthocomplement pairing used by ~2.
class Signature {
public:
  void add_atom(const std::string& name) {
    if (!is_identifier(name)) throw std::invalid_argument("invalid atom name '" + name + "'");
    atoms_.insert(name);
  }

  void declare_perp(const std::string& a, const std::string& b) {
    if (a == b) throw std::invalid_argument("an atom cannot be its own orthocomplement: " + a);
    auto clash = [&](const std::string& x, const std::string& y) {
      auto it = perp_.find(x);
      return it != perp_.end() && it->second != y;
    };
    if (clash(a, b) || clash(b, a)) {
      throw std::invalid_argument("conflicting orthocomplement for " + a + " / " + b);
    }
    add_atom(a);
    add_atom(b);
    perp_[a] = b;
    perp_[b] = a;
  }

  bool has_atom(const std::string& name) const { return atoms_.count(name) != 0; }

  std::optional<std::string> perp(const std::string& name) const {
    auto it = perp_.find(name);
    if (it == perp_.end()) return std::nullopt;
    return it->second;
  }

  const std::set<std::string>& atoms() const noexcept { return atoms_; }

  /// Each declared pair once, smaller name first.
  std::vector<std::pair<std::string, std::string>> perp_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [a, b] : perp_) {
      if (a < b) out.emplace_back(a, b);
    }
    return out;
  }

  bool operator==(const Signature&) const = default;

private:
  std::set<std::string> atoms_;
  std::map<std::string, std::string> perp_;
};

// ---------------------------------------------------------------------------
// Structure queries

/// All subformulas, f included, deduplicated, in post-order (operands first).
inline std::vector<Formula> subformulas(const Formula& f) {
  std::vector<Formula> out;
  std::set<Formula> seen;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    switch (g.kind()) {
      case Formula::Kind::Atom: break;
      case Formula::Kind::Star:
      case Formula::Kind::And:
      case Formula::Kind::Or:
        walk(g.left());
        walk(g.right());
        break;
      default: walk(g.operand()); break;
    }
    if (seen.insert(g).second) out.push_back(g);
  };
  walk(f);
  return out;
}

inline bool is_basic(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: return true;
    case Formula::Kind::Star: return is_basic(f.left()) && is_basic(f.right());
    default: return false;
  }
}

inline std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  for (const auto& g : subformulas(f)) {
    if (g.is_atom()) out.insert(g.name());
  }
  return out;
}

/// Basic subformulas of all inputs, post-order, deduplicated. Closed under
/// subformula because every subformula of a basic formula is basic.
inline std::vector<Formula> basic_subformulas(const std::vector<Formula>& fs) {
  std::vector<Formula> out;
  std::set<Formula> seen;
  for (const auto& f : fs) {
    for (const auto& g : subformulas(f)) {
      if (is_basic(g) && seen.insert(g).second) out.push_back(g);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Errors and well-formedness

enum class FormulaErrorKind {
  Syntax,
  UnknownAtom,
  DuplicateStarOperand,
  StarOnMolecular,
  MOnMolecular,
  Neg2OnNonAtom,
  Neg2Undeclared,
};

inline std::string_view to_string(FormulaErrorKind k) {
  switch (k) {
    case FormulaErrorKind::Syntax: return "SyntaxError";
    case FormulaErrorKind::UnknownAtom: return "UnknownAtom";
    case FormulaErrorKind::DuplicateStarOperand: return "DuplicateStarOperand";
    case FormulaErrorKind::StarOnMolecular: return "StarOnMolecular";
    case FormulaErrorKind::MOnMolecular: return "MOnMolecular";
    case FormulaErrorKind::Neg2OnNonAtom: return "Neg2OnNonAtom";
    case FormulaErrorKind::Neg2Undeclared: return "Neg2Undeclared";
  }
  return "?";
}

class FormulaError : public std::runtime_error {
public:
  FormulaError(FormulaErrorKind kind, std::size_t position, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(position) + ": " + message),
        kind_(kind), position_(position) {}

  FormulaErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

private:
  FormulaErrorKind kind_;
  std::size_t position_;
};

struct Violation {
  FormulaErrorKind kind;
  Formula at;
};

namespace detail {

inline std::optional<FormulaErrorKind> star_problem(const Formula& l, const Formula& r) {
  if (!is_basic(l) || !is_basic(r)) return FormulaErrorKind::StarOnMolecular;
  auto ls = subformulas(l);
  std::set<Formula> left_set(ls.begin(), ls.end());
  for (const auto& g : subformulas(r)) {
    if (left_set.count(g)) return FormulaErrorKind::DuplicateStarOperand;
  }
  return std::nullopt;
}

} // namespace detail

/// Every Star must join basic operands sharing no subformula at all, and every
/// M must sit on a basic formula. Returns the violations, outermost last.
inline std::vector<Violation> well_formed(const Formula& f) {
  std::vector<Violation> out;
  for (const auto& g : subformulas(f)) {
    if (g.is_star()) {
      if (auto p = detail::star_problem(g.left(), g.right())) out.push_back({*p, g});
    } else if (g.kind() == Formula::Kind::Meas && !is_basic(g.operand())) {
      out.push_back({FormulaErrorKind::MOnMolecular, g});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string_view binary_token(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Star: return " * ";
    case Formula::Kind::And: return " & ";
    case Formula::Kind::Or: return " \\/ ";
    default: return " ? ";
  }
}

inline std::string_view unary_token(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Neg: return "~";
    case Formula::Kind::Diamond: return "<>";
    case Formula::Kind::Meas: return "M";
    default: return "?";
  }
}

inline void render_into(const Formula& f, std::string& out) {
  if (f.is_atom()) {
    out += '|';
    out += f.name();
    out += '>';
  } else if (f.is_binary()) {
    out += '(';
    render_into(f.left(), out);
    out += binary_token(f.kind());
    render_into(f.right(), out);
    out += ')';
  } else {
    out += unary_token(f.kind());
    const Formula& g = f.operand();
    // Atoms and binary nodes delimit themselves; nested unary operators get
    // parentheses so the output stays fully bracketed.
    if (g.is_atom() || g.is_binary()) {
      render_into(g, out);
    } else {
      out += '(';
      render_into(g, out);
      out += ')';
    }
  }
}

} // namespace detail

/// Fully parenthesised surface text; parse(render(f)) == f.
inline std::string render(const Formula& f) {
  std::string out;
  detail::render_into(f, out);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << render(f); }

// ---------------------------------------------------------------------------
// Parsing

enum class AtomPolicy { Strict, Register };

namespace detail {

enum class Tok {
  Ket, Neg, Neg2, Neg3, Diamond, Box, Meas, Star, And, Or, Implies, Iff, LParen, RParen, End,
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;  // ket name
};

inline std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t at = i;
    if (c == '|') {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      if (j == i + 1) throw FormulaError(FormulaErrorKind::Syntax, at, "empty ket name");
      if (j >= s.size() || s[j] != '>') throw FormulaError(FormulaErrorKind::Syntax, j, "expected '>' closing ket");
      out.push_back({Tok::Ket, at, std::string(s.substr(i + 1, j - i - 1))});
      i = j + 1;
    } else if (starts("<->")) {
      out.push_back({Tok::Iff, at, {}});
      i += 3;
    } else if (starts("<>")) {
      out.push_back({Tok::Diamond, at, {}});
      i += 2;
    } else if (starts("[]")) {
      out.push_back({Tok::Box, at, {}});
      i += 2;
    } else if (starts("->")) {
      out.push_back({Tok::Implies, at, {}});
      i += 2;
    } else if (starts("\\/")) {
      out.push_back({Tok::Or, at, {}});
      i += 2;
    } else if (starts("~2")) {
      out.push_back({Tok::Neg2, at, {}});
      i += 2;
    } else if (starts("~3")) {
      out.push_back({Tok::Neg3, at, {}});
      i += 2;
    } else if (c == '~') {
      out.push_back({Tok::Neg, at, {}});
      ++i;
    } else if (c == 'M') {
      out.push_back({Tok::Meas, at, {}});
      ++i;
    } else if (c == '*') {
      out.push_back({Tok::Star, at, {}});
      ++i;
    } else if (c == '&') {
      out.push_back({Tok::And, at, {}});
      ++i;
    } else if (c == '(') {
      out.push_back({Tok::LParen, at, {}});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen, at, {}});
      ++i;
    } else {
      throw FormulaError(FormulaErrorKind::Syntax, at, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, s.size(), {}});
  return out;
}

class Parser {
public:
  Parser(std::string_view text, Signature& sig, AtomPolicy policy)
      : toks_(lex(text)), sig_(sig), policy_(policy) {}

  Formula parse() {
    Formula f = biconditional();
    if (peek().kind != Tok::End) fail(peek().pos, "unexpected trailing input");
    return f;
  }

private:
  // <-> is loosest and left-associative; -> is right-associative.
  Formula biconditional() {
    Formula f = implication();
    while (accept(Tok::Iff)) f = iff(f, implication());
    return f;
  }

  Formula implication() {
    Formula f = disjunction();
    if (accept(Tok::Implies)) return implies(f, implication());
    return f;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::Or)) f = Formula::disj(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = superposition();
    while (accept(Tok::And)) f = Formula::conj(f, superposition());
    return f;
  }

  Formula superposition() {
    Formula f = unary();
    while (peek().kind == Tok::Star) {
      std::size_t at = next().pos;
      Formula r = unary();
      if (auto p = star_problem(f, r)) {
        fail(at, *p, *p == FormulaErrorKind::StarOnMolecular
                         ? "'*' applies only to basic formulas"
                         : "'*' operands share a subformula");
      }
      f = Formula::star(f, r);
    }
    return f;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Neg: next(); return Formula::neg(unary());
      case Tok::Diamond: next(); return Formula::diamond(unary());
      case Tok::Box: next(); return box(unary());
      case Tok::Neg3: next(); return neg3(unary());
      case Tok::Meas: {
        std::size_t at = next().pos;
        Formula f = unary();
        if (!is_basic(f)) fail(at, FormulaErrorKind::MOnMolecular, "M applies only to basic formulas");
        return Formula::meas(f);
      }
      case Tok::Neg2: {
        std::size_t at = next().pos;
        Formula f = unary();
        if (!f.is_atom()) fail(at, FormulaErrorKind::Neg2OnNonAtom, "~2 applies only to kets");
        auto partner = sig_.perp(f.name());
        if (!partner) fail(at, FormulaErrorKind::Neg2Undeclared, "no orthocomplement declared for |" + f.name() + ">");
        return Formula::atom(*partner);
      }
      default: return primary();
    }
  }

  Formula primary() {
    const Token& t = peek();
    if (t.kind == Tok::Ket) {
      Token k = next();
      if (!sig_.has_atom(k.text)) {
        if (policy_ == AtomPolicy::Register) {
          sig_.add_atom(k.text);
        } else {
          fail(k.pos, FormulaErrorKind::UnknownAtom, "unknown atom |" + k.text + ">");
        }
      }
      return Formula::atom(k.text);
    }
    if (accept(Tok::LParen)) {
      Formula f = biconditional();
      if (!accept(Tok::RParen)) fail(peek().pos, "expected ')'");
      return f;
    }
    fail(t.pos, "expected a formula");
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(std::size_t at, const std::string& msg) { fail(at, FormulaErrorKind::Syntax, msg); }
  [[noreturn]] void fail(std::size_t at, FormulaErrorKind kind, const std::string& msg) {
    throw FormulaError(kind, at, msg);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Signature& sig_;
  AtomPolicy policy_;
};

} // namespace detail

/// Parses surface syntax into the canonical AST. With AtomPolicy::Register
/// unknown kets are added to sig instead of rejected.
inline Formula parse(std::string_view text, Signature& sig, AtomPolicy policy) {
  Formula f = detail::Parser(text, sig, policy).parse();
  if (auto v = well_formed(f); !v.empty()) throw FormulaError(v.front().kind, 0, render(v.front().at));
  return f;
}

inline Formula parse(std::string_view text, const Signature& sig) {
  Signature copy = sig;
  return parse(text, copy, AtomPolicy::Strict);
}

} // namespace qsl
