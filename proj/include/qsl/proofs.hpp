#pragma once

// Hilbert-style proof checking for the modal base (K, T, 4 over a
// propositional tautology rule) plus the four superposition/measurement
// schemata, and a library of checked theorem scripts.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsl/formula.hpp"
#include "qsl/kripke.hpp"

namespace qsl {

enum class SchemaId { K, T, Four, QS1, QS2, QS3, QS4 };

inline std::string_view to_string(SchemaId id) {
  switch (id) {
    case SchemaId::K: return "K";
    case SchemaId::T: return "T";
    case SchemaId::Four: return "4";
    case SchemaId::QS1: return "QS1";
    case SchemaId::QS2: return "QS2";
    case SchemaId::QS3: return "QS3";
    case SchemaId::QS4: return "QS4";
  }
  return "?";
}

inline std::optional<SchemaId> schema_from_string(std::string_view s) {
  for (auto id : {SchemaId::K, SchemaId::T, SchemaId::Four, SchemaId::QS1, SchemaId::QS2, SchemaId::QS3, SchemaId::QS4}) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

/// What a metavariable may be replaced by.
enum class MetaRange { AnyFormula, Basic, Atom };

struct AxiomSchema {
  SchemaId id;
  Formula pattern;                         // metavariables are the atoms A, B
  std::vector<std::string> metavariables;
  MetaRange range;
};

enum class ProofErrorKind { IllFormedInstance, MissingMetavariable, OutOfRange };

class ProofError : public std::runtime_error {
public:
  ProofError(ProofErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ProofErrorKind kind() const noexcept { return kind_; }

private:
  ProofErrorKind kind_;
};

namespace detail {

inline AxiomSchema make_schema(SchemaId id, std::string_view text, std::vector<std::string> vars, MetaRange range) {
  Signature scratch;
  return {id, parse(text, scratch, AtomPolicy::Register), std::move(vars), range};
}

} // namespace detail

inline const AxiomSchema& axiom_schema(SchemaId id) {
  static const std::vector<AxiomSchema> schemata = [] {
    using detail::make_schema;
    std::vector<AxiomSchema> v;
    v.push_back(make_schema(SchemaId::K, "[](|A> -> |B>) -> ([]|A> -> []|B>)", {"A", "B"}, MetaRange::AnyFormula));
    v.push_back(make_schema(SchemaId::T, "[]|A> -> |A>", {"A"}, MetaRange::AnyFormula));
    v.push_back(make_schema(SchemaId::Four, "[]|A> -> [][]|A>", {"A"}, MetaRange::AnyFormula));
    v.push_back(make_schema(SchemaId::QS1, "(|A> * |B>) -> ~(|A> \\/ |B>)", {"A", "B"}, MetaRange::Basic));
    v.push_back(make_schema(SchemaId::QS2, "M |A> -> |A>", {"A"}, MetaRange::Atom));
    v.push_back(make_schema(SchemaId::QS3, "(M (|A> * |B>) & (|A> * |B>)) -> (<>|A> \\/ <>|B>)", {"A", "B"},
                            MetaRange::Basic));
    v.push_back(make_schema(SchemaId::QS4, "M (|A> * |B>) -> ~<>(|A> & |B>)", {"A", "B"}, MetaRange::Basic));
    return v;
  }();
  return schemata.at(static_cast<std::size_t>(id));
}

/// Frame class a schema is sound for.
inline FrameClass schema_frame_class(SchemaId id) {
  switch (id) {
    case SchemaId::T: return FrameClass::T;
    case SchemaId::Four: return FrameClass::S4;
    default: return FrameClass::K;
  }
}

using Substitution = std::map<std::string, Formula>;

/// Replaces atoms named in subst; other atoms stay.
inline Formula substitute(const Formula& f, const Substitution& subst) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = subst.find(f.name());
      return it == subst.end() ? f : it->second;
    }
    case Formula::Kind::Star: return Formula::star(substitute(f.left(), subst), substitute(f.right(), subst));
    case Formula::Kind::And: return Formula::conj(substitute(f.left(), subst), substitute(f.right(), subst));
    case Formula::Kind::Or: return Formula::disj(substitute(f.left(), subst), substitute(f.right(), subst));
    case Formula::Kind::Neg: return Formula::neg(substitute(f.operand(), subst));
    case Formula::Kind::Diamond: return Formula::diamond(substitute(f.operand(), subst));
    case Formula::Kind::Meas: return Formula::meas(substitute(f.operand(), subst));
  }
  return f;
}

inline Formula instantiate_axiom(SchemaId id, const Substitution& subst) {
  const AxiomSchema& s = axiom_schema(id);
  for (const auto& var : s.metavariables) {
    auto it = subst.find(var);
    if (it == subst.end()) {
      throw ProofError(ProofErrorKind::MissingMetavariable,
                       "schema " + std::string(to_string(id)) + " needs a value for " + var);
    }
    if (s.range == MetaRange::Basic && !is_basic(it->second)) {
      throw ProofError(ProofErrorKind::OutOfRange, var + " must be a basic formula in " + std::string(to_string(id)));
    }
    if (s.range == MetaRange::Atom && !it->second.is_atom()) {
      throw ProofError(ProofErrorKind::OutOfRange, var + " must be a ket in " + std::string(to_string(id)));
    }
  }
  for (const auto& [var, _] : subst) {
    if (std::find(s.metavariables.begin(), s.metavariables.end(), var) == s.metavariables.end()) {
      throw ProofError(ProofErrorKind::MissingMetavariable,
                       "schema " + std::string(to_string(id)) + " has no metavariable " + var);
    }
  }
  Formula out = substitute(s.pattern, subst);
  if (auto v = well_formed(out); !v.empty()) {
    throw ProofError(ProofErrorKind::IllFormedInstance, "IllFormedInstance: " + std::string(to_string(v.front().kind)) +
                                                            " in " + render(v.front().at));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Propositional tautology check

/// Truth-table check. Atoms, superpositions, diamonds and measurements are
/// opaque propositional letters; only ~, & and \/ are interpreted.
inline bool is_pc_tautology(const Formula& f, std::size_t max_letters = 20) {
  std::map<Formula, std::size_t> letters;
  std::vector<Formula> order;
  std::function<void(const Formula&)> collect = [&](const Formula& g) {
    switch (g.kind()) {
      case Formula::Kind::Neg: collect(g.operand()); break;
      case Formula::Kind::And:
      case Formula::Kind::Or:
        collect(g.left());
        collect(g.right());
        break;
      default:
        if (letters.emplace(g, letters.size()).second) order.push_back(g);
        break;
    }
  };
  collect(f);
  if (letters.size() > max_letters) return false;
  std::function<bool(const Formula&, std::uint32_t)> value = [&](const Formula& g, std::uint32_t row) -> bool {
    switch (g.kind()) {
      case Formula::Kind::Neg: return !value(g.operand(), row);
      case Formula::Kind::And: return value(g.left(), row) && value(g.right(), row);
      case Formula::Kind::Or: return value(g.left(), row) || value(g.right(), row);
      default: return (row >> letters.at(g)) & 1U;
    }
  };
  const std::uint64_t rows = std::uint64_t{1} << letters.size();
  for (std::uint64_t row = 0; row < rows; ++row) {
    if (!value(f, static_cast<std::uint32_t>(row))) return false;
  }
  return true;
}

/// Drops double negations everywhere. With [] read as ~<>~ this identifies
/// ~<>g with []~g and ~[]g with <>~g, at any depth. Replacing ~~g by g is sound
/// under every connective on every frame, so equal normal forms are
/// interderivable.
inline Formula normalize_duality(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Star:
    case Formula::Kind::Meas: return f;
    case Formula::Kind::Neg: {
      if (f.operand().kind() == Formula::Kind::Neg) return normalize_duality(f.operand().operand());
      return Formula::neg(normalize_duality(f.operand()));
    }
    case Formula::Kind::And: return Formula::conj(normalize_duality(f.left()), normalize_duality(f.right()));
    case Formula::Kind::Or: return Formula::disj(normalize_duality(f.left()), normalize_duality(f.right()));
    case Formula::Kind::Diamond: return Formula::diamond(normalize_duality(f.operand()));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Scripts

enum class Rule { Hypothesis, Axiom, PcTautology, ModusPonens, Necessitation, Duality, Definition };

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::Hypothesis: return "hypothesis";
    case Rule::Axiom: return "axiom";
    case Rule::PcTautology: return "pc-taut";
    case Rule::ModusPonens: return "mp";
    case Rule::Necessitation: return "nec";
    case Rule::Duality: return "duality";
    case Rule::Definition: return "definition";
  }
  return "?";
}

inline std::optional<Rule> rule_from_string(std::string_view s) {
  for (auto r : {Rule::Hypothesis, Rule::Axiom, Rule::PcTautology, Rule::ModusPonens, Rule::Necessitation,
                 Rule::Duality, Rule::Definition}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct Justification {
  Rule rule = Rule::Hypothesis;
  std::optional<SchemaId> schema;    // Rule::Axiom
  Substitution substitution;         // Rule::Axiom
  std::vector<std::size_t> cites;    // 1-based line numbers
};

struct ProofLine {
  std::size_t index;
  Formula formula;
  Justification why;
};

struct ProofScript {
  std::string name;
  FrameClass frame_class = FrameClass::K;
  Signature signature;
  std::vector<Formula> hypotheses;
  std::vector<ProofLine> lines;
  std::optional<Formula> conclusion;  // when set, the last line must equal it

  const Formula& final_formula() const {
    if (lines.empty()) throw std::logic_error("empty proof script");
    return lines.back().formula;
  }
};

struct ProofReport {
  bool ok = true;
  std::size_t line = 0;  // first bad line, 1-based; 0 for script-level problems
  std::string reason;
};

namespace detail {

// Does `impl` read as `antecedent -> consequent`, either as the hook
// ~a \/ (a & b) or materially as ~a \/ b?
inline bool implication_matches(const Formula& impl, const Formula& antecedent, const Formula& consequent) {
  if (impl.kind() != Formula::Kind::Or) return false;
  const Formula& l = impl.left();
  if (l.kind() != Formula::Kind::Neg || !(l.operand() == antecedent)) return false;
  const Formula& r = impl.right();
  if (r == consequent) return true;
  return r.kind() == Formula::Kind::And && r.left() == antecedent && r.right() == consequent;
}

} // namespace detail

inline ProofReport check_proof(const ProofScript& script) {
  auto bad = [](std::size_t line, std::string why) { return ProofReport{false, line, std::move(why)}; };
  if (script.lines.empty()) return bad(0, "script has no lines");
  for (const auto& h : script.hypotheses) {
    if (auto v = well_formed(h); !v.empty()) return bad(0, "ill-formed hypothesis " + render(h));
  }

  std::vector<bool> uses_hypotheses;
  for (std::size_t pos = 0; pos < script.lines.size(); ++pos) {
    const ProofLine& line = script.lines[pos];
    const std::size_t n = pos + 1;
    if (line.index != n) return bad(n, "line numbers must run 1, 2, 3, ...");
    if (auto v = well_formed(line.formula); !v.empty()) {
      return bad(n, std::string("ill-formed formula: ") + std::string(to_string(v.front().kind)));
    }
    for (auto c : line.why.cites) {
      if (c < 1 || c >= n) return bad(n, "cited line " + std::to_string(c) + " does not precede this line");
    }
    auto cited = [&](std::size_t k) -> const Formula& { return script.lines[line.why.cites[k] - 1].formula; };
    auto cited_dep = [&](std::size_t k) -> bool { return uses_hypotheses[line.why.cites[k] - 1]; };
    auto need_cites = [&](std::size_t k) { return line.why.cites.size() == k; };

    bool dep = false;
    switch (line.why.rule) {
      case Rule::Hypothesis:
        if (std::find(script.hypotheses.begin(), script.hypotheses.end(), line.formula) == script.hypotheses.end()) {
          return bad(n, "not one of the script's hypotheses");
        }
        dep = true;
        break;
      case Rule::Axiom: {
        if (!line.why.schema) return bad(n, "axiom line names no schema");
        SchemaId id = *line.why.schema;
        if (!class_within(script.frame_class, schema_frame_class(id))) {
          return bad(n, "schema " + std::string(to_string(id)) + " is not available in " +
                            std::string(to_string(script.frame_class)));
        }
        try {
          if (!(instantiate_axiom(id, line.why.substitution) == line.formula)) {
            return bad(n, "formula is not the stated instance of " + std::string(to_string(id)));
          }
        } catch (const ProofError& e) {
          return bad(n, e.what());
        }
        break;
      }
      case Rule::PcTautology:
        if (!is_pc_tautology(line.formula)) return bad(n, "not a propositional tautology");
        break;
      case Rule::ModusPonens: {
        if (!need_cites(2)) return bad(n, "modus ponens cites two lines");
        bool fwd = detail::implication_matches(cited(1), cited(0), line.formula);
        bool rev = detail::implication_matches(cited(0), cited(1), line.formula);
        if (!fwd && !rev) return bad(n, "cited lines do not form A and A -> this line");
        dep = cited_dep(0) || cited_dep(1);
        break;
      }
      case Rule::Necessitation:
        if (!need_cites(1)) return bad(n, "necessitation cites one line");
        if (cited_dep(0)) return bad(n, "necessitation applied to a line that depends on hypotheses");
        if (!(line.formula == box(cited(0)))) return bad(n, "formula is not [] of the cited line");
        break;
      case Rule::Duality:
        if (!need_cites(1)) return bad(n, "duality cites one line");
        if (!(normalize_duality(line.formula) == normalize_duality(cited(0)))) {
          return bad(n, "not a modal-duality rewrite of the cited line");
        }
        dep = cited_dep(0);
        break;
      case Rule::Definition:
        if (!need_cites(1)) return bad(n, "definition cites one line");
        if (!(line.formula == cited(0))) return bad(n, "not a definitional unfolding of the cited line");
        dep = cited_dep(0);
        break;
    }
    uses_hypotheses.push_back(dep);
  }
  if (script.conclusion && !(*script.conclusion == script.final_formula())) {
    return bad(script.lines.size(), "last line is not the stated conclusion");
  }
  return {};
}

/// The hypothesis-free form of a script's result: the conclusion itself, or
/// (h1 & ... & hn) -> conclusion. Scripts never necessitate hypothesis-
/// dependent lines, so the deduction theorem applies.
inline Formula theorem_statement(const ProofScript& script) {
  const Formula& concl = script.final_formula();
  if (script.hypotheses.empty()) return concl;
  Formula ante = script.hypotheses.front();
  for (std::size_t i = 1; i < script.hypotheses.size(); ++i) ante = Formula::conj(ante, script.hypotheses[i]);
  return implies(ante, concl);
}

// ---------------------------------------------------------------------------
// Library

namespace detail {

class ScriptBuilder {
public:
  ScriptBuilder(std::string name, FrameClass cls) {
    script_.name = std::move(name);
    script_.frame_class = cls;
  }

  ScriptBuilder& perp(const std::string& a, const std::string& b) {
    script_.signature.declare_perp(a, b);
    return *this;
  }

  ScriptBuilder& hypothesis(std::string_view text) {
    Formula f = read(text);
    script_.hypotheses.push_back(f);
    return push(f, {Rule::Hypothesis, {}, {}, {}});
  }

  ScriptBuilder& axiom(std::string_view text, SchemaId id, std::map<std::string, std::string> subst) {
    Justification j{Rule::Axiom, id, {}, {}};
    for (const auto& [var, value] : subst) j.substitution.emplace(var, read(value));
    return push(read(text), std::move(j));
  }

  ScriptBuilder& pc(std::string_view text) { return push(read(text), {Rule::PcTautology, {}, {}, {}}); }
  ScriptBuilder& mp(std::string_view text, std::size_t a, std::size_t b) {
    return push(read(text), {Rule::ModusPonens, {}, {}, {a, b}});
  }
  ScriptBuilder& duality(std::string_view text, std::size_t a) {
    return push(read(text), {Rule::Duality, {}, {}, {a}});
  }

  ProofScript done(std::string_view conclusion) {
    script_.conclusion = read(conclusion);
    return script_;
  }

private:
  Formula read(std::string_view text) { return parse(text, script_.signature, AtomPolicy::Register); }
  ScriptBuilder& push(Formula f, Justification j) {
    script_.lines.push_back({script_.lines.size() + 1, std::move(f), std::move(j)});
    return *this;
  }

  ProofScript script_;
};

} // namespace detail

/// Bundled theorem scripts. All pass check_proof.
inline const std::vector<ProofScript>& theorem_library() {
  static const std::vector<ProofScript> library = [] {
    using detail::ScriptBuilder;
    const std::map<std::string, std::string> psi12{{"A", "|psi1>"}, {"B", "|psi2>"}};
    const std::string qs1 = "(|psi1> * |psi2>) -> ~(|psi1> \\/ |psi2>)";
    std::vector<ProofScript> lib;

    lib.push_back(ScriptBuilder("star-excludes-each-component", FrameClass::K)
                      .axiom(qs1, SchemaId::QS1, psi12)
                      .pc("(" + qs1 + ") -> ((|psi1> * |psi2>) -> (~|psi1> & ~|psi2>))")
                      .mp("(|psi1> * |psi2>) -> (~|psi1> & ~|psi2>)", 1, 2)
                      .done("(|psi1> * |psi2>) -> (~|psi1> & ~|psi2>)"));

    lib.push_back(ScriptBuilder("star-excludes-conjunction", FrameClass::K)
                      .axiom(qs1, SchemaId::QS1, psi12)
                      .pc("(" + qs1 + ") -> ((|psi1> * |psi2>) -> ~(|psi1> & |psi2>))")
                      .mp("(|psi1> * |psi2>) -> ~(|psi1> & |psi2>)", 1, 2)
                      .done("(|psi1> * |psi2>) -> ~(|psi1> & |psi2>)"));

    {
      const std::string ax = "(|psi> * ~2 |psi>) -> ~(|psi> \\/ ~2 |psi>)";
      lib.push_back(ScriptBuilder("orthogonal-star-excludes-conjunction", FrameClass::K)
                        .perp("psi", "psi_perp")
                        .axiom(ax, SchemaId::QS1, {{"A", "|psi>"}, {"B", "|psi_perp>"}})
                        .pc("(" + ax + ") -> ((|psi> * ~2 |psi>) -> ~(|psi> & ~2 |psi>))")
                        .mp("(|psi> * ~2 |psi>) -> ~(|psi> & ~2 |psi>)", 1, 2)
                        .done("(|psi> * ~2 |psi>) -> ~(|psi> & ~2 |psi>)"));
    }

    lib.push_back(ScriptBuilder("measured-star-excludes-conjunction", FrameClass::T)
                      .hypothesis("M (|psi1> * |psi2>)")
                      .axiom("M (|psi1> * |psi2>) -> ~<>(|psi1> & |psi2>)", SchemaId::QS4, psi12)
                      .mp("~<>(|psi1> & |psi2>)", 1, 2)
                      .duality("[]~(|psi1> & |psi2>)", 3)
                      .axiom("[]~(|psi1> & |psi2>) -> ~(|psi1> & |psi2>)", SchemaId::T,
                             {{"A", "~(|psi1> & |psi2>)"}})
                      .mp("~(|psi1> & |psi2>)", 4, 5)
                      .done("~(|psi1> & |psi2>)"));

    lib.push_back(ScriptBuilder("component-refutes-star", FrameClass::K)
                      .hypothesis("|psi1>")
                      .axiom(qs1, SchemaId::QS1, psi12)
                      .pc("(" + qs1 + ") -> (|psi1> -> ~(|psi1> * |psi2>))")
                      .mp("|psi1> -> ~(|psi1> * |psi2>)", 2, 3)
                      .mp("~(|psi1> * |psi2>)", 1, 4)
                      .done("~(|psi1> * |psi2>)"));

    lib.push_back(ScriptBuilder("conjunction-refutes-star", FrameClass::K)
                      .hypothesis("|psi1> & |psi2>")
                      .axiom(qs1, SchemaId::QS1, psi12)
                      .pc("(" + qs1 + ") -> ((|psi1> & |psi2>) -> ~(|psi1> * |psi2>))")
                      .mp("(|psi1> & |psi2>) -> ~(|psi1> * |psi2>)", 2, 3)
                      .mp("~(|psi1> * |psi2>)", 1, 4)
                      .done("~(|psi1> * |psi2>)"));

    {
      // X = psi & psi_perp. Derives ~X -> <>~X from T, then ~3 X by chaining
      // with the superposition axiom.
      const std::string x = "(|psi> & ~2 |psi>)";
      const std::string t_dual = "~" + x + " -> <>~" + x;
      const std::string dual_neg3 = "<>~" + x + " -> ~3 " + x;
      const std::string ax = "(|psi> * ~2 |psi>) -> ~(|psi> \\/ ~2 |psi>)";
      const std::string goal = "(|psi> * ~2 |psi>) -> ~3 " + x;
      lib.push_back(ScriptBuilder("star-not-paraconsistently-contradictory", FrameClass::S5)
                        .perp("psi", "psi_perp")
                        .axiom("[]~~" + x + " -> ~~" + x, SchemaId::T, {{"A", "~~" + x}})
                        .pc("([]~~" + x + " -> ~~" + x + ") -> (~" + x + " -> <>~~~" + x + ")")
                        .mp("~" + x + " -> <>~~~" + x, 1, 2)
                        .duality(t_dual, 3)
                        .pc(dual_neg3)
                        .axiom(ax, SchemaId::QS1, {{"A", "|psi>"}, {"B", "|psi_perp>"}})
                        .pc("(" + ax + ") -> ((" + t_dual + ") -> ((" + dual_neg3 + ") -> (" + goal + ")))")
                        .mp("(" + t_dual + ") -> ((" + dual_neg3 + ") -> (" + goal + "))", 6, 7)
                        .mp("(" + dual_neg3 + ") -> (" + goal + ")", 4, 8)
                        .mp(goal, 5, 9)
                        .done(goal));
    }
    return lib;
  }();
  return library;
}

inline const ProofScript* find_theorem(std::string_view name) {
  for (const auto& s : theorem_library()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

} // namespace qsl
