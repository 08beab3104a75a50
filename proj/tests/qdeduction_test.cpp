#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "qsl/qdeduction.hpp"

using namespace qsl;

namespace {

Formula A(const std::string& n) { return Formula::atom(n); }

struct Fixture {
  Signature sig;
  Fixture() {
    sig.declare_perp("a", "a_perp");
    sig.declare_perp("cat_alive", "cat_dead");
    for (const char* n : {"p", "q", "r", "psi1", "psi2", "x", "y"}) sig.add_atom(n);
  }
  Formula operator()(std::string_view t) const { return parse(t, sig); }
};

const SearchBound s5 = bound_of(2, FrameClass::S5);

} // namespace

TEST(Negation, Choice) {
  Fixture f;
  EXPECT_EQ(apply_negation(NegationKind::Choice, A("cat_alive"), f.sig), A("cat_dead"));
  EXPECT_EQ(apply_negation(NegationKind::Choice, A("cat_dead"), f.sig), A("cat_alive"));
  try {
    apply_negation(NegationKind::Choice, A("p"), f.sig);
    FAIL();
  } catch (const FormulaError& e) {
    EXPECT_EQ(e.kind(), FormulaErrorKind::Neg2Undeclared);
  }
  try {
    apply_negation(NegationKind::Choice, f("|a> & |p>"), f.sig);
    FAIL();
  } catch (const FormulaError& e) {
    EXPECT_EQ(e.kind(), FormulaErrorKind::Neg2OnNonAtom);
  }
}

TEST(Negation, Subcontrary) {
  Fixture f;
  Formula n3 = apply_negation(NegationKind::Subcontrary, A("p"), f.sig);
  EXPECT_EQ(n3, f("~[]|p>"));
  EXPECT_EQ(n3, f("~3 |p>"));
  // Same truth value as <>~p everywhere.
  enumerate_models({A("p")}, f.sig, bound_of(2, FrameClass::K), [&](const Model& m) {
    for (std::size_t w = 0; w < m.frame.size(); ++w) EXPECT_EQ(eval(m, w, n3), eval(m, w, f("<>~|p>")));
    return true;
  });
}

TEST(Negation, ExclusionTwiceKeepsBothNodes) {
  Fixture f;
  Formula nn = apply_negation(NegationKind::Exclusion, apply_negation(NegationKind::Exclusion, A("p"), f.sig), f.sig);
  EXPECT_EQ(nn, Formula::neg(Formula::neg(A("p"))));
  EXPECT_NE(nn, A("p"));
  EXPECT_TRUE(is_valid(check_validity(iff(nn, A("p")), bound_of(2, FrameClass::K), f.sig)));
}

TEST(Derive, Membership) {
  Fixture f;
  auto r = quantum_derives({f("|p>")}, f("|p>"), f.sig, s5);
  EXPECT_EQ(r.answer, Answer::Yes);
  EXPECT_EQ(r.trace.clause, Clause::Membership);
  // Membership is structural after expansion.
  auto h = quantum_derives({f("|p> -> |q>")}, f("~|p> \\/ (|p> & |q>)"), f.sig, s5);
  EXPECT_EQ(h.trace.clause, Clause::Membership);
}

TEST(Derive, NoExplosionFromSubcontraries) {
  Fixture f;
  std::vector<Formula> gamma{f("|p>"), f("~3 |p>")};
  auto q = quantum_derives(gamma, f("|q>"), f.sig, s5);
  EXPECT_EQ(q.answer, Answer::No);
  EXPECT_FALSE(q.trace.clause);
  EXPECT_EQ(q.trace.subsets_tried, 4u);
  auto nq = quantum_derives(gamma, f("~|q>"), f.sig, s5);
  EXPECT_EQ(nq.answer, Answer::No);
}

TEST(Derive, ConjunctionOfSubcontrariesViaSubset) {
  Fixture f;
  std::vector<Formula> gamma{f("|p>"), f("~3 |p>")};
  auto r = quantum_derives(gamma, f("|p> & ~3 |p>"), f.sig, s5);
  ASSERT_EQ(r.answer, Answer::Yes);
  EXPECT_EQ(r.trace.clause, Clause::Subset);
  EXPECT_EQ(r.trace.delta, gamma);
  ASSERT_TRUE(r.trace.non_triviality);
  EXPECT_TRUE(eval(r.trace.non_triviality->model, r.trace.non_triviality->world, f("|p> & ~3 |p>")));
  EXPECT_TRUE(replay_trace(gamma, f("|p> & ~3 |p>"), f.sig, s5, r));
}

TEST(Derive, ComponentRefutesStar) {
  Fixture f;
  SearchBound b = bound_of(3, FrameClass::S4);
  auto r = quantum_derives({f("|psi1>")}, f("~(|psi1> * |psi2>)"), f.sig, b);
  ASSERT_EQ(r.answer, Answer::Yes);
  EXPECT_EQ(r.trace.clause, Clause::Subset);
  EXPECT_EQ(r.trace.delta, std::vector<Formula>{f("|psi1>")});
  EXPECT_TRUE(replay_trace({f("|psi1>")}, f("~(|psi1> * |psi2>)"), f.sig, b, r));
}

TEST(Derive, ThesisFromLibraryUpToRenaming) {
  Fixture f;
  Formula alpha = f("(|x> * |y>) -> (~|x> & ~|y>)");
  auto r = quantum_derives({}, alpha, f.sig, bound_of(2, FrameClass::S4));
  ASSERT_EQ(r.answer, Answer::Yes);
  EXPECT_EQ(r.trace.clause, Clause::Thesis);
  EXPECT_EQ(r.trace.thesis_source, "star-excludes-each-component");
}

TEST(Derive, LibraryRespectsFrameClass) {
  Fixture f;
  Formula alpha = theorem_statement(*find_theorem("measured-star-excludes-conjunction"));
  auto t = quantum_derives({}, alpha, f.sig, bound_of(2, FrameClass::T));
  EXPECT_EQ(t.trace.thesis_source, "measured-star-excludes-conjunction");
  auto k = quantum_derives({}, alpha, f.sig, bound_of(2, FrameClass::K));
  EXPECT_EQ(k.answer, Answer::Yes);
  EXPECT_EQ(k.trace.thesis_source, "semantic");
  ASSERT_TRUE(k.trace.entailment);
  EXPECT_TRUE(is_valid(*k.trace.entailment));
}

TEST(Derive, SemanticThesisWithoutLibrary) {
  Fixture f;
  QDeductionOptions opts;
  opts.use_library = false;
  auto r = quantum_derives({f("|q>")}, f("M |p> -> |p>"), f.sig, bound_of(2, FrameClass::T), opts);
  EXPECT_EQ(r.answer, Answer::Yes);
  EXPECT_EQ(r.trace.clause, Clause::Thesis);
  EXPECT_EQ(r.trace.thesis_source, "semantic");
}

TEST(Derive, ContradictoryTargetNeverDerivable) {
  Fixture f;
  std::vector<Formula> gamma{f("|p>"), f("~|p>"), f("|q>")};
  EXPECT_EQ(quantum_derives(gamma, f("|p> & ~|p>"), f.sig, s5).answer, Answer::No);
  EXPECT_EQ(quantum_derives(gamma, f("|r>"), f.sig, s5).answer, Answer::No);
  EXPECT_EQ(quantum_derives(gamma, f("|q> & |p>"), f.sig, s5).answer, Answer::Yes);
}

TEST(Derive, ClauseOrderDoesNotChangeAnswer) {
  Fixture f;
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"|p>"}, "|p>"},
      {{"|p>", "~3 |p>"}, "|q>"},
      {{"|p>", "~3 |p>"}, "|p> & ~3 |p>"},
      {{"|p>", "~3 |p>"}, "|p> \\/ ~|p>"},
      {{"|psi1>"}, "~(|psi1> * |psi2>)"},
      {{"|a>", "|q>"}, "|a> & ~2 |a>"},
      {{"|q>"}, "M |p> -> |p>"},
      {{"|p> & |q>"}, "|q>"},
      {{}, "|p>"},
  };
  std::array<Clause, 3> order{Clause::Membership, Clause::Subset, Clause::Thesis};
  std::sort(order.begin(), order.end());
  for (const auto& [gtexts, atext] : cases) {
    std::vector<Formula> gamma;
    for (const auto& t : gtexts) gamma.push_back(f(t));
    Formula alpha = f(atext);
    Answer reference = quantum_derives(gamma, alpha, f.sig, s5).answer;
    std::array<Clause, 3> perm = order;
    do {
      QDeductionOptions opts;
      opts.order = perm;
      auto r = quantum_derives(gamma, alpha, f.sig, s5, opts);
      EXPECT_EQ(r.answer, reference) << atext;
      if (r.answer == Answer::Yes) {
        EXPECT_TRUE(replay_trace(gamma, alpha, f.sig, s5, r)) << atext;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST(Derive, MembershipIsMonotone) {
  Fixture f;
  const std::vector<Formula> pool{f("|p>"), f("~3 |p>"), f("|q> \\/ |r>"), f("<>|a>"), f("|a> * |a_perp>")};
  for (std::size_t mask = 1; mask < (1u << pool.size()); ++mask) {
    std::vector<Formula> gamma;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if ((mask >> i) & 1U) gamma.push_back(pool[i]);
    }
    for (const auto& alpha : gamma) {
      auto r = quantum_derives(gamma, alpha, f.sig, s5);
      EXPECT_EQ(r.answer, Answer::Yes);
      EXPECT_EQ(r.trace.clause, Clause::Membership);
    }
  }
}

TEST(Derive, TamperedTraceDoesNotReplay) {
  Fixture f;
  std::vector<Formula> gamma{f("|p>"), f("~3 |p>")};
  Formula alpha = f("|p> & ~3 |p>");
  auto r = quantum_derives(gamma, alpha, f.sig, s5);
  ASSERT_EQ(r.answer, Answer::Yes);
  auto bad = r;
  bad.trace.delta = {f("|p>")};
  EXPECT_FALSE(replay_trace(gamma, alpha, f.sig, s5, bad));
  auto foreign = r;
  foreign.trace.delta.push_back(f("|q>"));
  EXPECT_FALSE(replay_trace(gamma, alpha, f.sig, s5, foreign));
  auto no = quantum_derives(gamma, f("|q>"), f.sig, s5);
  EXPECT_FALSE(replay_trace(gamma, f("|q>"), f.sig, s5, no));
}

TEST(Derive, BoundExhaustionIsUnknown) {
  Fixture f;
  SearchBound b = bound_of(2, FrameClass::K);
  b.safety_limit = 1;
  auto r = quantum_derives({f("|p>")}, f("|q>"), f.sig, b);
  EXPECT_EQ(r.answer, Answer::Unknown);
  // Membership still answers.
  EXPECT_EQ(quantum_derives({f("|p>")}, f("|p>"), f.sig, b).answer, Answer::Yes);
}

TEST(Derive, GammaSizeLimit) {
  Fixture f;
  std::vector<Formula> gamma;
  for (int i = 0; i < 17; ++i) gamma.push_back(A("g" + std::to_string(i)));
  EXPECT_THROW(quantum_derives(gamma, f("|p>"), f.sig, s5), BoundTooLarge);
}

TEST(Nonadjunction, FullSuiteAtTwoWorldsS5) {
  NonadjunctionReport r = check_nonadjunction(s5);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " [" << c.detail << "]";
  EXPECT_TRUE(r.all_passed());
  EXPECT_GT(r.checks.size(), 20u);
}

TEST(Nonadjunction, ContradictionsUnsatisfiable) {
  Fixture f;
  for (std::size_t n = 1; n <= 3; ++n) {
    EXPECT_TRUE(is_unsat(is_satisfiable({f("|p> & ~|p>")}, bound_of(n, FrameClass::S5), f.sig)));
    EXPECT_TRUE(is_unsat(is_satisfiable({f("|a> & ~2 |a>")}, bound_of(n, FrameClass::S5), f.sig)));
  }
  SearchBound off = s5;
  off.orthogonality = false;
  EXPECT_TRUE(is_sat(is_satisfiable({f("|a> & ~2 |a>")}, off, f.sig)));
}
