#pragma once

// The acceptance battery: eight end-to-end criteria over the whole library.
// Shared by the acceptance test binary and the `suite` CLI command.

#include <chrono>
#include <string>
#include <vector>

#include "qsl/formula.hpp"
#include "qsl/kripke.hpp"
#include "qsl/proofs.hpp"
#include "qsl/qdeduction.hpp"
#include "qsl/validity.hpp"

namespace qsl {

struct CriterionResult {
  int number = 0;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;
};

/// Three worlds: w0 holds the superposition, w1 has the cat alive, w2 dead;
/// w0 sees both branches and every world sees itself. The branches do not see
/// each other, so the frame is not Euclidean.
inline Model cat_model() {
  Model m;
  m.frame = Frame({"w0", "w1", "w2"});
  for (std::size_t w = 0; w < 3; ++w) m.frame.add_edge(w, w);
  m.frame.add_edge(0, 1);
  m.frame.add_edge(0, 2);
  m.frame_class = FrameClass::T;
  m.signature.declare_perp("alive", "dead");
  const Formula alive = Formula::atom("alive");
  const Formula dead = Formula::atom("dead");
  m.add_to_domain(Formula::star(alive, dead));
  m.set(Formula::star(alive, dead), 0);
  m.set(alive, 1);
  m.set(dead, 2);
  return m;
}

namespace detail {

class Recorder {
public:
  Recorder(int number, std::string title) : start_(std::chrono::steady_clock::now()) {
    r_.number = number;
    r_.title = std::move(title);
    r_.passed = true;
  }

  void check(bool ok, const std::string& what) {
    r_.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    r_.passed = r_.passed && ok;
  }

  CriterionResult finish() {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
    r_.details.push_back("time " + std::to_string(ms.count()) + " ms");
    return r_;
  }

private:
  CriterionResult r_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string at(const SearchBound& b) {
  return "(" + std::to_string(b.max_worlds) + ", " + std::string(to_string(b.frame_class)) + ")";
}

} // namespace detail

inline CriterionResult criterion_axiom_regression() {
  detail::Recorder rec(1, "Axiom regression: QS1-QS4 valid at (3,S4) and (3,T); QS4 also at (3,K)");
  const Substitution two{{"A", Formula::atom("psi1")}, {"B", Formula::atom("psi2")}};
  const Substitution one{{"A", Formula::atom("psi1")}};
  const std::vector<std::pair<SchemaId, Substitution>> axioms{
      {SchemaId::QS1, two}, {SchemaId::QS2, one}, {SchemaId::QS3, two}, {SchemaId::QS4, two}};
  for (const auto& [id, subst] : axioms) {
    Formula f = instantiate_axiom(id, subst);
    std::vector<FrameClass> classes{FrameClass::S4, FrameClass::T};
    if (id == SchemaId::QS4) classes.push_back(FrameClass::K);
    for (auto cls : classes) {
      SearchBound b = bound_of(3, cls);
      Verdict v = check_validity(f, b);
      rec.check(is_valid(v), std::string(to_string(id)) + " at " + detail::at(b) + ": " + describe(v));
    }
  }
  return rec.finish();
}

inline CriterionResult criterion_worked_validities() {
  detail::Recorder rec(2, "Worked validities hold with zero countermodels in their frame classes");
  const std::vector<std::pair<std::string, FrameClass>> cases{
      {"(|psi1> * |psi2>) -> (~|psi1> & ~|psi2>)", FrameClass::T},
      {"M |psi1> -> |psi1>", FrameClass::T},
      {"M (|psi1> * |psi2>) -> ~<>(|psi1> & |psi2>)", FrameClass::K},
      {"((|psi1> * |psi2>) & M (|psi1> * |psi2>)) -> (<>|psi1> \\/ <>|psi2>)", FrameClass::K},
  };
  for (const auto& [text, cls] : cases) {
    Signature sig;
    Formula f = parse(text, sig, AtomPolicy::Register);
    SearchBound b = bound_of(3, cls);
    Verdict v = check_validity(f, b, sig);
    rec.check(is_valid(v), text + " at " + detail::at(b) + ": " + describe(v));
  }
  return rec.finish();
}

inline CriterionResult criterion_theorem_library() {
  detail::Recorder rec(3, "Theorem library: every script checks and has no countermodel at bound 3");
  for (const auto& script : theorem_library()) {
    ProofReport pr = check_proof(script);
    rec.check(pr.ok, script.name + " check_proof" + (pr.ok ? "" : ": line " + std::to_string(pr.line) + " " + pr.reason));
    SearchBound b = bound_of(3, script.frame_class);
    Verdict ent = entails(script.hypotheses, script.final_formula(), b, script.signature);
    rec.check(is_valid(ent), script.name + " hypotheses entail conclusion at " + detail::at(b) + ": " + describe(ent));
    Verdict imp = check_validity(theorem_statement(script), b, script.signature);
    rec.check(is_valid(imp), script.name + " implication form at " + detail::at(b) + ": " + describe(imp));
  }
  return rec.finish();
}

inline CriterionResult criterion_nonadjunction() {
  detail::Recorder rec(4, "Non-adjunction suite at (2,S5)");
  NonadjunctionReport report = check_nonadjunction(bound_of(2, FrameClass::S5));
  for (const auto& c : report.checks) rec.check(c.passed, c.name + " [" + c.detail + "]");
  return rec.finish();
}

inline CriterionResult criterion_cat_model() {
  detail::Recorder rec(5, "Cat model: acceptable, M(alive*dead) at w0, T but not Euclidean, closure detected");
  Model cat = cat_model();
  rec.check(check_acceptability(cat).empty(), "acceptability holds");
  rec.check(check_orthogonality(cat).empty(), "orthogonality holds");
  Formula measured = parse("M (|alive> * |dead>)", cat.signature);
  rec.check(eval(cat, 0, measured), "M(alive * dead) true at w0");
  FrameClassReport t = check_frame_class(cat.frame, FrameClass::T);
  rec.check(t.ok(), "frame satisfies T");
  rec.check(!t.properties.euclidean, "frame reported non-Euclidean");
  rec.check(linked_branches(cat.frame, 0).empty(), "branches w1, w2 do not access each other");

  Frame linked = cat.frame;
  linked.add_edge(1, 2);
  linked.add_edge(2, 1);
  auto links = linked_branches(linked, 0);
  rec.check(links.size() == 2, "adding w1<->w2 is reported as " + std::to_string(links.size()) + " branch links");

  Frame closure = euclidean_closure(cat.frame);
  rec.check(closure.has_edge(1, 2) && closure.has_edge(2, 1), "Euclidean closure adds w1<->w2");
  rec.check(frame_properties(closure).euclidean, "closure reported Euclidean");
  return rec.finish();
}

inline CriterionResult criterion_negation_square() {
  detail::Recorder rec(6, "Negation square at bound 2 with orthogonality on");
  Signature sig;
  sig.declare_perp("a", "a_perp");
  sig.add_atom("p");
  auto f = [&](std::string_view t) { return parse(t, sig); };

  for (auto cls : {FrameClass::K, FrameClass::T, FrameClass::S4, FrameClass::S5}) {
    SearchBound b = bound_of(2, cls);
    Verdict v = check_validity(f("~(|a> & ~2 |a>)"), b, sig);
    rec.check(is_valid(v), "contrariety: no world with a & a_perp at " + detail::at(b) + ": " + describe(v));
  }
  {
    SearchBound b = bound_of(2, FrameClass::T);
    SatVerdict s = is_satisfiable({f("|a> * ~2 |a>"), f("~|a>"), f("~~2 |a>")}, b, sig);
    rec.check(is_sat(s), "both-false witness (superposition world) at " + detail::at(b) + ": " + describe(s));
  }
  for (auto cls : {FrameClass::T, FrameClass::S4, FrameClass::S5}) {
    SearchBound b = bound_of(2, cls);
    for (const char* g : {"|p>", "|a>", "(|a> * |a_perp>)"}) {
      std::string text = std::string(g) + " \\/ ~3 " + g;
      Verdict v = check_validity(f(text), b, sig);
      rec.check(is_valid(v), "subcontrariety " + text + " at " + detail::at(b) + ": " + describe(v));
    }
  }
  {
    SearchBound b = bound_of(2, FrameClass::S5);
    for (const char* g : {"|p>", "|a>"}) {
      SatVerdict s = is_satisfiable({f(g), f(std::string("~3 ") + g)}, b, sig);
      rec.check(is_sat(s), std::string("both-true witness for ") + g + " & ~3 " + g + " at " + detail::at(b) + ": " +
                               describe(s));
    }
  }
  return rec.finish();
}

inline CriterionResult criterion_sasaki_hook() {
  detail::Recorder rec(7, "Sasaki hook agrees with ~A \\/ B on all valuations of two atoms");
  Signature sig;
  sig.add_atom("a");
  sig.add_atom("b");
  Formula hook = parse("|a> -> |b>", sig);
  Formula mat = parse("~|a> \\/ |b>", sig);
  for (int bits = 0; bits < 4; ++bits) {
    Model m;
    m.signature = sig;
    m.set(Formula::atom("a"), 0, bits & 1);
    m.set(Formula::atom("b"), 0, bits & 2);
    bool h = eval(m, 0, hook);
    bool c = eval(m, 0, mat);
    rec.check(h == c, "a=" + std::to_string(bits & 1) + " b=" + std::to_string((bits >> 1) & 1) + ": hook " +
                          (h ? "1" : "0") + ", material " + (c ? "1" : "0"));
  }
  return rec.finish();
}

inline CriterionResult criterion_enumerator_count() {
  detail::Recorder rec(8, "Enumerator: {a, b, a*b} on one reflexive world gives 5 acceptable valuations");
  const Formula a = Formula::atom("a");
  const Formula b = Formula::atom("b");
  const std::vector<Formula> domain{a, b, Formula::star(a, b)};
  std::uint64_t n = count_models(domain, {}, bound_of(1, FrameClass::T));
  rec.check(n == 5, "count " + std::to_string(n) + " (expected 8 - 3 = 5)");
  return rec.finish();
}

inline std::vector<CriterionResult> run_acceptance_battery() {
  return {criterion_axiom_regression(), criterion_worked_validities(), criterion_theorem_library(),
          criterion_nonadjunction(),     criterion_cat_model(),         criterion_negation_square(),
          criterion_sasaki_hook(),       criterion_enumerator_count()};
}

} // namespace qsl
