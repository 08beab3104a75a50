#pragma once

// The three negations and the non-adjunctive "quantum deduction" relation:
// alpha follows from gamma if it is a member of gamma, a thesis, or classically
// entailed by some subset of gamma that stays non-trivial together with alpha.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsl/formula.hpp"
#include "qsl/proofs.hpp"
#include "qsl/validity.hpp"

namespace qsl {

enum class NegationKind {
  Exclusion,    // classical complement
  Choice,       // orthocomplement partner of a ket
  Subcontrary,  // ~[]
};

inline Formula apply_negation(NegationKind kind, const Formula& f, const Signature& sig) {
  switch (kind) {
    case NegationKind::Exclusion: return Formula::neg(f);
    case NegationKind::Subcontrary: return neg3(f);
    case NegationKind::Choice: {
      if (!f.is_atom()) throw FormulaError(FormulaErrorKind::Neg2OnNonAtom, 0, "~2 applies only to kets");
      auto partner = sig.perp(f.name());
      if (!partner) {
        throw FormulaError(FormulaErrorKind::Neg2Undeclared, 0, "no orthocomplement declared for |" + f.name() + ">");
      }
      return Formula::atom(*partner);
    }
  }
  return f;
}

enum class Answer { Yes, No, Unknown };
enum class Clause { Membership, Thesis, Subset };

inline std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Unknown: return "unknown";
  }
  return "?";
}

inline std::string_view to_string(Clause c) {
  switch (c) {
    case Clause::Membership: return "membership";
    case Clause::Thesis: return "thesis";
    case Clause::Subset: return "subset";
  }
  return "?";
}

struct QDeductionTrace {
  std::optional<Clause> clause;
  std::string thesis_source;                // library theorem name, or "semantic"
  std::vector<Formula> delta;               // subset clause
  std::optional<SatWitness> non_triviality; // subset clause: delta + alpha holds here
  std::optional<Verdict> entailment;        // subset clause, or semantic thesis
  std::size_t subsets_tried = 0;
};

struct QDeductionResult {
  Answer answer = Answer::No;
  QDeductionTrace trace;
};

struct QDeductionOptions {
  std::array<Clause, 3> order{Clause::Membership, Clause::Thesis, Clause::Subset};
  bool use_library = true;
  std::size_t max_gamma = 16;
};

namespace detail {

// Structural match up to an injective renaming of atoms.
inline bool match_renaming(const Formula& pattern, const Formula& target, std::map<std::string, std::string>& fwd,
                           std::map<std::string, std::string>& back) {
  if (pattern.kind() != target.kind()) return false;
  switch (pattern.kind()) {
    case Formula::Kind::Atom: {
      auto f = fwd.find(pattern.name());
      auto b = back.find(target.name());
      if (f == fwd.end() && b == back.end()) {
        fwd.emplace(pattern.name(), target.name());
        back.emplace(target.name(), pattern.name());
        return true;
      }
      return f != fwd.end() && b != back.end() && f->second == target.name();
    }
    case Formula::Kind::Star:
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return match_renaming(pattern.left(), target.left(), fwd, back) &&
             match_renaming(pattern.right(), target.right(), fwd, back);
    default: return match_renaming(pattern.operand(), target.operand(), fwd, back);
  }
}

inline const ProofScript* library_thesis(const Formula& alpha, FrameClass cls) {
  for (const auto& s : theorem_library()) {
    if (!class_within(cls, s.frame_class)) continue;
    std::map<std::string, std::string> fwd, back;
    if (match_renaming(theorem_statement(s), alpha, fwd, back)) return &s;
  }
  return nullptr;
}

// Index subsets of {0..n-1}: by size, then lexicographically.
template <class F>
bool for_each_subset(std::size_t n, F&& visit) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k <= n; ++k) {
    idx.resize(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      if (!visit(idx)) return false;
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return true;
}

inline std::vector<Formula> dedupe(const std::vector<Formula>& fs) {
  std::vector<Formula> out;
  for (const auto& f : fs) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

} // namespace detail

/// Decides gamma ||- alpha within the bound. "Unknown" means some check hit
/// the safety limit and no clause succeeded.
inline QDeductionResult quantum_derives(const std::vector<Formula>& gamma_in, const Formula& alpha,
                                        const Signature& sig, const SearchBound& bound,
                                        const QDeductionOptions& options = {}) {
  const std::vector<Formula> gamma = detail::dedupe(gamma_in);
  if (gamma.size() > options.max_gamma) throw BoundTooLarge("gamma has too many formulas for subset search");
  QDeductionResult result;
  bool unknown = false;

  for (Clause clause : options.order) {
    switch (clause) {
      case Clause::Membership:
        if (std::find(gamma.begin(), gamma.end(), alpha) != gamma.end()) {
          result.answer = Answer::Yes;
          result.trace.clause = Clause::Membership;
          return result;
        }
        break;

      case Clause::Thesis: {
        if (options.use_library) {
          if (const ProofScript* s = detail::library_thesis(alpha, bound.frame_class)) {
            result.answer = Answer::Yes;
            result.trace.clause = Clause::Thesis;
            result.trace.thesis_source = s->name;
            return result;
          }
        }
        Verdict v = check_validity(alpha, bound, sig);
        if (is_valid(v)) {
          result.answer = Answer::Yes;
          result.trace.clause = Clause::Thesis;
          result.trace.thesis_source = "semantic";
          result.trace.entailment = std::move(v);
          return result;
        }
        if (std::holds_alternative<Unknown>(v)) unknown = true;
        break;
      }

      case Clause::Subset: {
        bool found = false;
        detail::for_each_subset(gamma.size(), [&](const std::vector<std::size_t>& idx) {
          ++result.trace.subsets_tried;
          std::vector<Formula> delta;
          for (auto i : idx) delta.push_back(gamma[i]);
          std::vector<Formula> with_alpha = delta;
          with_alpha.push_back(alpha);
          SatVerdict sat = is_satisfiable(with_alpha, bound, sig);
          if (std::holds_alternative<Unknown>(sat)) unknown = true;
          if (!is_sat(sat)) return true;
          Verdict ent = entails(delta, alpha, bound, sig);
          if (std::holds_alternative<Unknown>(ent)) unknown = true;
          if (!is_valid(ent)) return true;
          result.trace.clause = Clause::Subset;
          result.trace.delta = std::move(delta);
          result.trace.non_triviality = std::get<SatWitness>(std::move(sat));
          result.trace.entailment = std::move(ent);
          found = true;
          return false;
        });
        if (found) {
          result.answer = Answer::Yes;
          return result;
        }
        break;
      }
    }
  }
  result.answer = unknown ? Answer::Unknown : Answer::No;
  return result;
}

/// Re-runs the checks a "yes" trace cites. False for traces that do not hold up.
inline bool replay_trace(const std::vector<Formula>& gamma, const Formula& alpha, const Signature& sig,
                         const SearchBound& bound, const QDeductionResult& r) {
  if (r.answer != Answer::Yes || !r.trace.clause) return false;
  switch (*r.trace.clause) {
    case Clause::Membership: return std::find(gamma.begin(), gamma.end(), alpha) != gamma.end();
    case Clause::Thesis:
      if (r.trace.thesis_source == "semantic") return is_valid(check_validity(alpha, bound, sig));
      return detail::library_thesis(alpha, bound.frame_class) != nullptr;
    case Clause::Subset: {
      for (const auto& d : r.trace.delta) {
        if (std::find(gamma.begin(), gamma.end(), d) == gamma.end()) return false;
      }
      if (!r.trace.non_triviality) return false;
      const Model& m = r.trace.non_triviality->model;
      const std::size_t w = r.trace.non_triviality->world;
      if (!check_acceptability(m).empty() || !check_frame_class(m.frame, bound.frame_class).ok()) return false;
      if (bound.orthogonality && !check_orthogonality(m).empty()) return false;
      for (const auto& d : r.trace.delta) {
        if (!eval(m, w, d)) return false;
      }
      return eval(m, w, alpha) && is_valid(entails(r.trace.delta, alpha, bound, sig));
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Non-adjunction property suite

struct PropertyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct NonadjunctionReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
  }
};

/// Sample of satisfiable premise sets used by the never-derivable checks.
inline std::vector<std::vector<std::string>> nonadjunction_battery() {
  return {
      {"|p>"},
      {"|p>", "~3 |p>"},
      {"~|p>"},
      {"|p>", "|q>"},
      {"<>|p>", "<>~|p>"},
      {"|p> \\/ ~|p>"},
      {"|a>"},
      {"|a_perp>"},
      {"|a> * |a_perp>"},
      {"|a> * |a_perp>", "M (|a> * |a_perp>)"},
      {"|a>", "~3 |a>"},
      {"~|a>", "~|a_perp>"},
  };
}

inline NonadjunctionReport check_nonadjunction(const SearchBound& bound) {
  NonadjunctionReport report;
  Signature sig;
  sig.declare_perp("a", "a_perp");
  for (const char* atom : {"p", "q"}) sig.add_atom(atom);
  auto f = [&](std::string_view text) { return parse(text, sig); };
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  const Formula p = f("|p>");
  const Formula q = f("|q>");
  const std::vector<Formula> gamma{p, apply_negation(NegationKind::Subcontrary, p, sig)};

  {
    SatVerdict s = is_satisfiable(gamma, bound, sig);
    add("{p, ~3 p} is satisfiable", is_sat(s), describe(s));
  }
  {
    auto r = quantum_derives(gamma, Formula::conj(p, gamma[1]), sig, bound);
    add("{p, ~3 p} ||- p & ~3 p", r.answer == Answer::Yes,
        std::string(to_string(r.answer)) + (r.trace.clause ? " via " + std::string(to_string(*r.trace.clause)) : ""));
  }
  {
    Verdict v = entails(gamma, q, bound, sig);
    add("{p, ~3 p} does not entail q", is_countermodel(v), describe(v));
    auto r = quantum_derives(gamma, q, sig, bound);
    add("{p, ~3 p} does not ||- q", r.answer == Answer::No, std::string(to_string(r.answer)));
  }
  {
    const Formula not_q = apply_negation(NegationKind::Exclusion, q, sig);
    Verdict v = entails(gamma, not_q, bound, sig);
    add("{p, ~3 p} does not entail ~q", is_countermodel(v), describe(v));
    auto r = quantum_derives(gamma, not_q, sig, bound);
    add("{p, ~3 p} does not ||- ~q", r.answer == Answer::No, std::string(to_string(r.answer)));
  }
  {
    SatVerdict s = is_satisfiable({Formula::conj(p, Formula::neg(p))}, bound, sig);
    add("p & ~p is unsatisfiable", is_unsat(s), describe(s));
    const Formula a = f("|a>");
    SatVerdict o = is_satisfiable({Formula::conj(a, apply_negation(NegationKind::Choice, a, sig))}, bound, sig);
    bool expect_unsat = bound.orthogonality;
    add("a & ~2 a is unsatisfiable under orthogonality", expect_unsat ? is_unsat(o) : true, describe(o));
  }

  const std::vector<std::pair<std::string, Formula>> never{
      {"p & ~1 p", Formula::conj(p, Formula::neg(p))},
      {"a & ~2 a", f("|a> & ~2 |a>")},
  };
  for (const auto& premises : nonadjunction_battery()) {
    std::vector<Formula> g;
    std::string label = "{";
    for (const auto& t : premises) {
      g.push_back(f(t));
      label += (label.size() > 1 ? ", " : "") + t;
    }
    label += "}";
    SatVerdict s = is_satisfiable(g, bound, sig);
    if (!is_sat(s)) {
      add(label + " is satisfiable", false, describe(s));
      continue;
    }
    for (const auto& [name, alpha] : never) {
      if (name == "a & ~2 a" && !bound.orthogonality) continue;
      auto r = quantum_derives(g, alpha, sig, bound);
      add(label + " does not ||- " + name, r.answer != Answer::Yes, std::string(to_string(r.answer)));
    }
  }
  return report;
}

} // namespace qsl
