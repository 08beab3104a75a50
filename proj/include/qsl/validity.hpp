#pragma once

// Bounded enumeration of frames and acceptable valuations, and the searches
// built on it: validity, entailment and satisfiability. Every verdict is
// relative to the bound; nothing here claims unbounded validity.
//
// Search order, which is also the tie-break for reported witnesses:
//   1. fewer worlds first;
//   2. relations by their row-major adjacency bit string, 0 before 1,
//      pair (0,0) most significant (forced pairs skipped);
//   3. valuations by per-world assignment index, world 0 most significant,
//      where per-world assignments are ordered by their domain bit mask;
//   4. the lowest world satisfying the goal.

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qsl/formula.hpp"
#include "qsl/kripke.hpp"

namespace qsl {

struct SearchBound {
  std::size_t max_worlds = 3;
  FrameClass frame_class = FrameClass::S4;
  bool orthogonality = true;
  StarMeasurement star_measurement = StarMeasurement::ComponentsAbsent;
  /// Per world count: cap on candidate relations and on valuations per frame.
  std::uint64_t safety_limit = std::uint64_t{1} << 24;
};

inline SearchBound bound_of(std::size_t worlds, FrameClass cls) {
  SearchBound b;
  b.max_worlds = worlds;
  b.frame_class = cls;
  return b;
}

class BoundTooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ValidUpToBound {
  SearchBound bound;
};
struct Countermodel {
  Model model;
  std::size_t world;
};
struct Unknown {
  std::string reason;
};
using Verdict = std::variant<ValidUpToBound, Countermodel, Unknown>;

struct SatWitness {
  Model model;
  std::size_t world;
};
struct UnsatUpToBound {
  SearchBound bound;
};
using SatVerdict = std::variant<SatWitness, UnsatUpToBound, Unknown>;

inline bool is_valid(const Verdict& v) { return std::holds_alternative<ValidUpToBound>(v); }
inline bool is_countermodel(const Verdict& v) { return std::holds_alternative<Countermodel>(v); }
inline bool is_sat(const SatVerdict& v) { return std::holds_alternative<SatWitness>(v); }
inline bool is_unsat(const SatVerdict& v) { return std::holds_alternative<UnsatUpToBound>(v); }

inline std::string describe(const Verdict& v) {
  if (auto* ok = std::get_if<ValidUpToBound>(&v)) return "ValidUpToBound(" + std::to_string(ok->bound.max_worlds) + ")";
  if (auto* cm = std::get_if<Countermodel>(&v)) return "Countermodel(" + cm->model.frame.name(cm->world) + ")";
  return "Unknown(" + std::get<Unknown>(v).reason + ")";
}

inline std::string describe(const SatVerdict& v) {
  if (auto* w = std::get_if<SatWitness>(&v)) return "SatWitness(" + w->model.frame.name(w->world) + ")";
  if (auto* u = std::get_if<UnsatUpToBound>(&v)) return "UnsatUpToBound(" + std::to_string(u->bound.max_worlds) + ")";
  return "Unknown(" + std::get<Unknown>(v).reason + ")";
}

namespace detail {

/// One enumerated interpretation, valid only during the visitor call.
struct RawModel {
  std::span<const WorldSet> succ;
  std::span<const WorldSet> val;  // indexed like the domain
};

class ModelSpace {
public:
  ModelSpace(std::vector<Formula> domain, const Signature& sig, const SearchBound& bound)
      : domain_(std::move(domain)), sig_(sig), bound_(bound) {
    if (bound_.max_worlds < 1) throw std::invalid_argument("max_worlds must be at least 1");
    if (bound_.max_worlds > 8) throw BoundTooLarge("max_worlds above 8 is not enumerable");
    if (domain_.size() > 24) throw BoundTooLarge("more than 24 basic formulas in the domain");
    build_world_assignments();
  }

  const std::vector<Formula>& domain() const noexcept { return domain_; }
  const std::vector<std::uint32_t>& world_assignments() const noexcept { return assignments_; }

  /// Throws BoundTooLarge if n worlds exceed the safety limit.
  void check_limits(std::size_t n) const {
    std::size_t free_pairs = n * n - (forced_reflexive() ? n : 0);
    if (free_pairs >= 63 || (std::uint64_t{1} << free_pairs) > bound_.safety_limit) {
      throw BoundTooLarge(std::to_string(n) + " worlds: relation count exceeds the safety limit");
    }
    std::uint64_t vals = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (assignments_.size() != 0 && vals > bound_.safety_limit / assignments_.size()) {
        throw BoundTooLarge(std::to_string(n) + " worlds: valuation count exceeds the safety limit");
      }
      vals *= assignments_.size();
    }
    if (vals > bound_.safety_limit) {
      throw BoundTooLarge(std::to_string(n) + " worlds: valuation count exceeds the safety limit");
    }
  }

  /// Visits every model with exactly n worlds in search order. Stops when the
  /// visitor returns false; returns false in that case.
  bool visit(std::size_t n, const std::function<bool(const RawModel&)>& visitor) const {
    check_limits(n);
    if (assignments_.empty()) return true;
    const bool refl = forced_reflexive();
    std::vector<std::pair<std::size_t, std::size_t>> free;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!(refl && i == j)) free.emplace_back(i, j);
      }
    }
    const std::uint64_t relations = std::uint64_t{1} << free.size();
    std::vector<WorldSet> succ(n);
    std::vector<WorldSet> val(domain_.size());
    std::vector<std::size_t> choice(n);
    for (std::uint64_t code = 0; code < relations; ++code) {
      for (std::size_t i = 0; i < n; ++i) succ[i] = refl ? world_bit(i) : 0;
      for (std::size_t k = 0; k < free.size(); ++k) {
        if ((code >> (free.size() - 1 - k)) & 1U) succ[free[k].first] |= world_bit(free[k].second);
      }
      if (!satisfies(succ, bound_.frame_class)) continue;
      std::fill(choice.begin(), choice.end(), 0);
      while (true) {
        std::fill(val.begin(), val.end(), 0);
        for (std::size_t w = 0; w < n; ++w) {
          std::uint32_t a = assignments_[choice[w]];
          for (std::size_t d = 0; d < domain_.size(); ++d) {
            if ((a >> d) & 1U) val[d] |= world_bit(w);
          }
        }
        if (!visitor(RawModel{succ, val})) return false;
        // Odometer, last world fastest.
        bool wrapped = true;
        for (std::size_t w = n; w-- > 0;) {
          if (++choice[w] < assignments_.size()) {
            wrapped = false;
            break;
          }
          choice[w] = 0;
        }
        if (wrapped) break;
      }
    }
    return true;
  }

  Model materialize(const RawModel& raw) const {
    Model m;
    m.frame = Frame::from_successors(raw.succ);
    m.frame_class = bound_.frame_class;
    m.signature = sig_;
    m.orthogonality = bound_.orthogonality;
    m.star_measurement = bound_.star_measurement;
    for (std::size_t d = 0; d < domain_.size(); ++d) m.valuation.emplace(domain_[d], raw.val[d]);
    return m;
  }

private:
  bool forced_reflexive() const { return bound_.frame_class != FrameClass::K; }

  // Per-world assignments over the domain that pass acceptability and, when
  // enabled, orthogonality. Ascending by bit mask.
  void build_world_assignments() {
    const std::size_t d = domain_.size();
    std::map<Formula, std::size_t> index;
    for (std::size_t i = 0; i < d; ++i) index.emplace(domain_[i], i);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> star_rules;  // star bit, forbidden mask
    for (std::size_t i = 0; i < d; ++i) {
      if (!domain_[i].is_star()) continue;
      std::uint32_t forbidden = 0;
      for (const auto* side : {&domain_[i].left(), &domain_[i].right()}) {
        for (const auto& g : subformulas(*side)) {
          auto it = index.find(g);
          if (it == index.end()) throw std::invalid_argument("domain is not closed under subformula: " + render(g));
          forbidden |= std::uint32_t{1} << it->second;
        }
      }
      star_rules.emplace_back(std::uint32_t{1} << i, forbidden);
    }
    std::vector<std::uint32_t> perp_masks;
    if (bound_.orthogonality) {
      for (const auto& [a, b] : sig_.perp_pairs()) {
        auto ia = index.find(Formula::atom(a));
        auto ib = index.find(Formula::atom(b));
        if (ia != index.end() && ib != index.end()) {
          perp_masks.push_back((std::uint32_t{1} << ia->second) | (std::uint32_t{1} << ib->second));
        }
      }
    }
    const std::uint64_t total = std::uint64_t{1} << d;
    for (std::uint64_t a = 0; a < total; ++a) {
      auto mask = static_cast<std::uint32_t>(a);
      bool ok = true;
      for (const auto& [star_bit, forbidden] : star_rules) {
        if ((mask & star_bit) && (mask & forbidden)) ok = false;
      }
      for (auto pm : perp_masks) {
        if ((mask & pm) == pm) ok = false;
      }
      if (ok) assignments_.push_back(mask);
    }
  }

  std::vector<Formula> domain_;
  Signature sig_;
  SearchBound bound_;
  std::vector<std::uint32_t> assignments_;
};

struct Found {
  Model model;
  std::size_t world;
};

inline Signature with_atoms_of(Signature sig, const std::vector<Formula>& fs) {
  for (const auto& f : fs) {
    for (const auto& a : atoms_of(f)) {
      if (!sig.has_atom(a)) sig.add_atom(a);
    }
  }
  return sig;
}

/// Least (model, world) in search order where every `truths` formula holds and
/// every `falsities` formula fails. Re-verifies the witness through the public
/// model checks before returning it.
inline std::variant<Found, std::monostate, Unknown> find_world(const std::vector<Formula>& truths,
                                                             const std::vector<Formula>& falsities,
                                                             const Signature& sig_in, const SearchBound& bound) {
  std::vector<Formula> all = truths;
  all.insert(all.end(), falsities.begin(), falsities.end());
  for (const auto& f : all) {
    if (auto v = well_formed(f); !v.empty()) {
      throw FormulaError(v.front().kind, 0, "ill-formed search target " + render(v.front().at));
    }
  }
  Signature sig = with_atoms_of(sig_in, all);
  ModelSpace space(basic_subformulas(all), sig, bound);

  std::vector<Evaluator> pos, negs;
  for (const auto& f : truths) pos.emplace_back(f, space.domain());
  for (const auto& f : falsities) negs.emplace_back(f, space.domain());

  std::optional<Found> found;
  std::vector<WorldSet> scratch;
  for (std::size_t n = 1; n <= bound.max_worlds && !found; ++n) {
    try {
      space.check_limits(n);
    } catch (const BoundTooLarge& e) {
      return Unknown{e.what()};
    }
    space.visit(n, [&](const RawModel& raw) {
      WorldSet candidates = all_worlds(n);
      for (const auto& ev : pos) {
        candidates &= ev.extension_into(raw.succ, raw.val, bound.star_measurement, scratch);
        if (!candidates) return true;
      }
      for (const auto& ev : negs) {
        candidates &= ~ev.extension_into(raw.succ, raw.val, bound.star_measurement, scratch);
        if (!candidates) return true;
      }
      found = Found{space.materialize(raw), static_cast<std::size_t>(std::countr_zero(candidates))};
      return false;
    });
  }
  if (!found) return std::monostate{};

  // Self-check on every emitted witness.
  const Model& m = found->model;
  bool sound = check_acceptability(m).empty() && check_frame_class(m.frame, bound.frame_class).ok() &&
               (!bound.orthogonality || check_orthogonality(m).empty());
  for (const auto& f : truths) sound = sound && eval(m, found->world, f);
  for (const auto& f : falsities) sound = sound && !eval(m, found->world, f);
  if (!sound) throw std::logic_error("search produced a witness that does not re-verify");
  return *std::move(found);
}

} // namespace detail

/// Visits every model over `domain` (which must be closed under subformula)
/// with at most bound.max_worlds worlds, in search order. Return false from
/// the visitor to stop. Throws BoundTooLarge past the safety limit.
inline void enumerate_models(const std::vector<Formula>& domain, const Signature& sig, const SearchBound& bound,
                             const std::function<bool(const Model&)>& visitor) {
  Signature full = detail::with_atoms_of(sig, domain);
  detail::ModelSpace space(domain, full, bound);
  for (std::size_t n = 1; n <= bound.max_worlds; ++n) {
    bool more = space.visit(n, [&](const detail::RawModel& raw) { return visitor(space.materialize(raw)); });
    if (!more) return;
  }
}

inline std::uint64_t count_models(const std::vector<Formula>& domain, const Signature& sig, const SearchBound& bound) {
  std::uint64_t count = 0;
  enumerate_models(domain, sig, bound, [&](const Model&) {
    ++count;
    return true;
  });
  return count;
}

/// Valid iff true at every world of every acceptable model within the bound.
/// Countermodels have the fewest worlds possible.
inline Verdict check_validity(const Formula& f, const SearchBound& bound, const Signature& sig = {}) {
  auto r = detail::find_world({}, {f}, sig, bound);
  if (auto* found = std::get_if<detail::Found>(&r)) return Countermodel{std::move(found->model), found->world};
  if (auto* u = std::get_if<Unknown>(&r)) return *u;
  return ValidUpToBound{bound};
}

/// Local consequence: at every world where all of gamma hold, f holds.
inline Verdict entails(const std::vector<Formula>& gamma, const Formula& f, const SearchBound& bound,
                       const Signature& sig = {}) {
  auto r = detail::find_world(gamma, {f}, sig, bound);
  if (auto* found = std::get_if<detail::Found>(&r)) return Countermodel{std::move(found->model), found->world};
  if (auto* u = std::get_if<Unknown>(&r)) return *u;
  return ValidUpToBound{bound};
}

inline SatVerdict is_satisfiable(const std::vector<Formula>& formulas, const SearchBound& bound,
                                 const Signature& sig = {}) {
  auto r = detail::find_world(formulas, {}, sig, bound);
  if (auto* found = std::get_if<detail::Found>(&r)) return SatWitness{std::move(found->model), found->world};
  if (auto* u = std::get_if<Unknown>(&r)) return *u;
  return UnsatUpToBound{bound};
}

} // namespace qsl
