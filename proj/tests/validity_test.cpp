#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "qsl/proofs.hpp"
#include "qsl/validity.hpp"

using namespace qsl;

namespace {

Formula A(const std::string& n) { return Formula::atom(n); }

Formula P(std::string_view text, Signature& sig) { return parse(text, sig, AtomPolicy::Register); }

// Brute-force count: every relation on n worlds filtered by the class
// conditions, times every per-world assignment passing acceptability.
std::uint64_t brute_force_count(const std::vector<Formula>& domain, std::size_t max_worlds, FrameClass cls) {
  auto in_class = [&](const std::vector<std::vector<bool>>& r) {
    std::size_t n = r.size();
    bool refl = true, trans = true, sym = true, eucl = true;
    for (std::size_t i = 0; i < n; ++i) {
      refl = refl && r[i][i];
      for (std::size_t j = 0; j < n; ++j) {
        sym = sym && (!r[i][j] || r[j][i]);
        for (std::size_t k = 0; k < n; ++k) {
          trans = trans && (!(r[i][j] && r[j][k]) || r[i][k]);
          eucl = eucl && (!(r[i][j] && r[i][k]) || r[j][k]);
        }
      }
    }
    switch (cls) {
      case FrameClass::K: return true;
      case FrameClass::T: return refl;
      case FrameClass::S4: return refl && trans;
      case FrameClass::S5: return refl && sym && trans && eucl;
    }
    return false;
  };
  std::uint64_t per_world = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << domain.size()); ++mask) {
    std::set<Formula> truths;
    for (std::size_t d = 0; d < domain.size(); ++d) {
      if ((mask >> d) & 1U) truths.insert(domain[d]);
    }
    bool ok = true;
    for (const auto& f : truths) {
      if (!f.is_star()) continue;
      for (const auto& side : {f.left(), f.right()}) {
        for (const auto& g : subformulas(side)) ok = ok && !truths.count(g);
      }
    }
    per_world += ok;
  }
  std::uint64_t total = 0;
  for (std::size_t n = 1; n <= max_worlds; ++n) {
    std::uint64_t frames = 0;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * n)); ++code) {
      std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r[i][j] = (code >> (i * n + j)) & 1U;
      frames += in_class(r);
    }
    std::uint64_t vals = 1;
    for (std::size_t i = 0; i < n; ++i) vals *= per_world;
    total += frames * vals;
  }
  return total;
}

void expect_countermodel_verifies(const Verdict& v, const Formula& f, const SearchBound& b) {
  ASSERT_TRUE(is_countermodel(v)) << describe(v);
  const auto& cm = std::get<Countermodel>(v);
  EXPECT_TRUE(check_acceptability(cm.model).empty());
  EXPECT_TRUE(check_frame_class(cm.model.frame, b.frame_class).ok());
  if (b.orthogonality) {
    EXPECT_TRUE(check_orthogonality(cm.model).empty());
  }
  EXPECT_FALSE(eval(cm.model, cm.world, f));
  EXPECT_LE(cm.model.frame.size(), b.max_worlds);
}

} // namespace

TEST(Enumerate, SingleAtomOneReflexiveWorld) {
  EXPECT_EQ(count_models({A("p")}, {}, bound_of(1, FrameClass::T)), 2u);
}

TEST(Enumerate, StarDomainOneWorld) {
  Formula a = A("a"), b = A("b");
  std::vector<Formula> dom{a, b, Formula::star(a, b)};
  EXPECT_EQ(count_models(dom, {}, bound_of(1, FrameClass::T)), 5u);
  EXPECT_EQ(brute_force_count(dom, 1, FrameClass::T), 5u);
}

TEST(Enumerate, SingleAtomTwoWorldsK) {
  // Bound 2 also enumerates the 1-world models: 2 relations x 2 valuations.
  EXPECT_EQ(brute_force_count({A("p")}, 2, FrameClass::K), 4u + 64u);
  EXPECT_EQ(count_models({A("p")}, {}, bound_of(2, FrameClass::K)), 4u + 64u);

  std::uint64_t exactly_two = 0;
  enumerate_models({A("p")}, {}, bound_of(2, FrameClass::K), [&](const Model& m) {
    exactly_two += m.frame.size() == 2;
    return true;
  });
  EXPECT_EQ(exactly_two, 64u);
}

TEST(Enumerate, CountsMatchBruteForceAcrossClasses) {
  Formula a = A("a"), b = A("b"), c = A("c");
  const std::vector<std::vector<Formula>> domains{
      {a},
      {a, b},
      {a, b, Formula::star(a, b)},
      {a, b, c, Formula::star(a, b), Formula::star(Formula::star(a, b), c)},
  };
  for (const auto& dom : domains) {
    for (auto cls : {FrameClass::K, FrameClass::T, FrameClass::S4, FrameClass::S5}) {
      std::size_t n = dom.size() > 3 ? 2 : 3;
      if (cls == FrameClass::K && n == 3 && dom.size() > 1) n = 2;
      EXPECT_EQ(count_models(dom, {}, bound_of(n, cls)), brute_force_count(dom, n, cls))
          << "domain size " << dom.size() << " class " << to_string(cls) << " worlds " << n;
    }
  }
}

TEST(Enumerate, OrthogonalityFiltersValuations) {
  Signature sig;
  sig.declare_perp("a", "a_perp");
  SearchBound on = bound_of(1, FrameClass::T);
  SearchBound off = on;
  off.orthogonality = false;
  std::vector<Formula> dom{A("a"), A("a_perp")};
  EXPECT_EQ(count_models(dom, sig, on), 3u);
  EXPECT_EQ(count_models(dom, sig, off), 4u);
}

TEST(Enumerate, SearchOrderIsDeterministic) {
  std::vector<std::string> seen;
  enumerate_models({A("p")}, {}, bound_of(2, FrameClass::K), [&](const Model& m) {
    std::string s = std::to_string(m.frame.size()) + ":";
    for (const auto& [from, to] : m.frame.edges()) s += std::to_string(from) + std::to_string(to) + ",";
    s += "|" + std::to_string(m.valuation.at(A("p")));
    seen.push_back(s);
    return seen.size() < 8;
  });
  const std::vector<std::string> expected{
      "1:|0", "1:|1", "1:00,|0", "1:00,|1",
      // two worlds, empty relation; valuations by odometer with world 0 most significant
      "2:|0", "2:|2", "2:|1", "2:|3",
  };
  EXPECT_EQ(seen, expected);
}

TEST(Enumerate, RejectsOversizedBounds) {
  SearchBound b = bound_of(9, FrameClass::K);
  EXPECT_THROW(count_models({A("p")}, {}, b), BoundTooLarge);

  SearchBound k5 = bound_of(5, FrameClass::K);  // 2^25 relations
  EXPECT_THROW(count_models({A("p")}, {}, k5), BoundTooLarge);

  std::vector<Formula> big;
  for (int i = 0; i < 25; ++i) big.push_back(A("x" + std::to_string(i)));
  EXPECT_THROW(count_models(big, {}, bound_of(1, FrameClass::K)), BoundTooLarge);
}

TEST(Validity, PaperExamples) {
  Signature sig;
  EXPECT_TRUE(is_valid(check_validity(P("M |psi> -> |psi>", sig), bound_of(3, FrameClass::T), sig)));
  EXPECT_TRUE(is_valid(
      check_validity(P("(|psi1> * |psi2>) -> (~|psi1> & ~|psi2>)", sig), bound_of(3, FrameClass::T), sig)));
  EXPECT_TRUE(is_valid(
      check_validity(P("M (|psi1> * |psi2>) -> ~<>(|psi1> & |psi2>)", sig), bound_of(3, FrameClass::K), sig)));
}

TEST(Validity, DiamondToAtomHasTwoWorldCountermodel) {
  Signature sig;
  Formula f = P("<>|p> -> |p>", sig);
  SearchBound b = bound_of(2, FrameClass::K);
  Verdict v = check_validity(f, b, sig);
  expect_countermodel_verifies(v, f, b);
  const auto& cm = std::get<Countermodel>(v);
  EXPECT_EQ(cm.model.frame.size(), 2u);
  // The first relation in search order is the single edge w1 -> w0.
  EXPECT_EQ(describe(v), "Countermodel(w1)");
  EXPECT_TRUE(cm.model.frame.has_edge(1, 0));
  EXPECT_FALSE(cm.model.value(A("p"), cm.world));
  EXPECT_TRUE(cm.model.value(A("p"), 0));
}

TEST(Validity, CountermodelsAreMinimalAndMonotone) {
  Signature sig;
  const std::vector<std::string> non_theorems{"<>|p> -> |p>", "|p> -> []|p>", "<>|p> -> []<>|p>",
                                              "[]|p> -> [][]|p>", "M |p> -> []|p>", "|p> \\/ |q>"};
  for (const auto& text : non_theorems) {
    Formula f = P(text, sig);
    std::optional<std::size_t> first;
    for (std::size_t n = 1; n <= 3; ++n) {
      SearchBound b = bound_of(n, FrameClass::K);
      Verdict v = check_validity(f, b, sig);
      if (!first && is_countermodel(v)) first = std::get<Countermodel>(v).model.frame.size();
      if (first) {
        expect_countermodel_verifies(v, f, b);
        EXPECT_EQ(std::get<Countermodel>(v).model.frame.size(), *first) << text << " bound " << n;
      }
    }
    EXPECT_TRUE(first) << text;
  }
}

TEST(Validity, EuclideanSeparation) {
  Signature sig;
  Formula f = P("<>|p> -> []<>|p>", sig);
  SearchBound s4 = bound_of(3, FrameClass::S4);
  expect_countermodel_verifies(check_validity(f, s4, sig), f, s4);
  EXPECT_TRUE(is_valid(check_validity(f, bound_of(3, FrameClass::S5), sig)));
}

TEST(Validity, AxiomSchemataAtBoundThree) {
  const Substitution two{{"A", A("psi1")}, {"B", A("psi2")}};
  for (auto id : {SchemaId::QS1, SchemaId::QS3, SchemaId::QS4}) {
    for (auto cls : {FrameClass::S4, FrameClass::T}) {
      EXPECT_TRUE(is_valid(check_validity(instantiate_axiom(id, two), bound_of(3, cls))))
          << to_string(id) << " " << to_string(cls);
    }
  }
  EXPECT_TRUE(is_valid(check_validity(instantiate_axiom(SchemaId::QS2, {{"A", A("psi1")}}), bound_of(3, FrameClass::T))));
  EXPECT_TRUE(is_valid(check_validity(instantiate_axiom(SchemaId::QS4, two), bound_of(3, FrameClass::K))));
}

// Under the literal reading of M on a superposition, the measurement axiom has
// a countermodel: the superposition world may itself hold both components.
TEST(Validity, LiteralStarMeasurementBreaksMeasurementAxiom) {
  Formula f = instantiate_axiom(SchemaId::QS4, {{"A", A("a")}, {"B", A("b")}});
  for (auto cls : {FrameClass::K, FrameClass::T, FrameClass::S4}) {
    SearchBound b = bound_of(2, cls);
    b.star_measurement = StarMeasurement::AsWritten;
    Verdict v = check_validity(f, b);
    expect_countermodel_verifies(v, f, b);
    const auto& cm = std::get<Countermodel>(v);
    EXPECT_EQ(cm.model.star_measurement, StarMeasurement::AsWritten);
    EXPECT_TRUE(cm.model.value(A("a"), cm.world));
    EXPECT_TRUE(cm.model.value(A("b"), cm.world));
  }
}

TEST(Validity, SafetyLimitGivesUnknown) {
  Signature sig;
  SearchBound b = bound_of(3, FrameClass::K);
  b.safety_limit = 100;  // 2^9 relations on three worlds
  Verdict v = check_validity(P("|p> \\/ ~|p>", sig), b, sig);
  ASSERT_TRUE(std::holds_alternative<Unknown>(v)) << describe(v);
  EXPECT_NE(std::get<Unknown>(v).reason.find("safety limit"), std::string::npos);
  // A countermodel found before the limit is still reported.
  Verdict cm = check_validity(P("|p>", sig), b, sig);
  EXPECT_TRUE(is_countermodel(cm));
}

TEST(Entails, Examples) {
  Signature sig;
  SearchBound s4 = bound_of(3, FrameClass::S4);
  EXPECT_TRUE(is_valid(entails({P("|psi1>", sig)}, P("~(|psi1> * |psi2>)", sig), s4, sig)));
  EXPECT_TRUE(is_valid(entails({P("|psi1> & |psi2>", sig)}, P("~(|psi1> * |psi2>)", sig), s4, sig)));
  SearchBound s5 = bound_of(2, FrameClass::S5);
  Formula q = P("|q>", sig);
  Verdict v = entails({P("|p>", sig), P("~3 |p>", sig)}, q, s5, sig);
  ASSERT_TRUE(is_countermodel(v));
  const auto& cm = std::get<Countermodel>(v);
  EXPECT_TRUE(eval(cm.model, cm.world, P("|p> & ~3 |p>", sig)));
  EXPECT_FALSE(eval(cm.model, cm.world, q));
}

TEST(Satisfiable, Examples) {
  Signature sig;
  SearchBound s5 = bound_of(2, FrameClass::S5);
  SatVerdict s = is_satisfiable({P("|p>", sig), P("~3 |p>", sig)}, s5, sig);
  ASSERT_TRUE(is_sat(s));
  const auto& w = std::get<SatWitness>(s);
  EXPECT_EQ(w.model.frame.size(), 2u);
  EXPECT_TRUE(check_frame_class(w.model.frame, FrameClass::S5).ok());

  for (std::size_t n = 1; n <= 3; ++n) {
    EXPECT_TRUE(is_unsat(is_satisfiable({P("|p>", sig), P("~|p>", sig)}, bound_of(n, FrameClass::K), sig)));
    EXPECT_TRUE(is_unsat(
        is_satisfiable({P("|a> * |b>", sig), P("|a>", sig)}, bound_of(n, FrameClass::S4), sig)));
  }
  EXPECT_EQ(describe(is_satisfiable({P("|p>", sig), P("~|p>", sig)}, bound_of(2, FrameClass::K), sig)),
            "UnsatUpToBound(2)");
}

TEST(Satisfiable, EmptySetIsSatisfiable) {
  EXPECT_TRUE(is_sat(is_satisfiable({}, bound_of(1, FrameClass::K))));
}

TEST(Validity, ExplicitSignatureSupersetIsHarmless) {
  Signature sig;
  sig.add_atom("unused");
  Formula f = P("M |psi> -> |psi>", sig);
  EXPECT_TRUE(is_valid(check_validity(f, bound_of(2, FrameClass::T), sig)));
}
