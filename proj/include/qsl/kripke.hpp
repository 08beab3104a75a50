#pragma once

// Frames, models, the acceptability filter and truth evaluation.
//
// World sets are 64-bit masks, so frames hold at most 64 worlds. Bounded search
// never gets near that; model files beyond it are rejected on load.

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qsl/formula.hpp"

namespace qsl {

using WorldSet = std::uint64_t;
inline constexpr std::size_t kMaxWorlds = 64;

inline constexpr WorldSet world_bit(std::size_t w) { return WorldSet{1} << w; }
inline constexpr WorldSet all_worlds(std::size_t n) { return n >= 64 ? ~WorldSet{0} : world_bit(n) - 1; }

enum class FrameClass { K, T, S4, S5 };

inline std::string_view to_string(FrameClass c) {
  switch (c) {
    case FrameClass::K: return "K";
    case FrameClass::T: return "T";
    case FrameClass::S4: return "S4";
    case FrameClass::S5: return "S5";
  }
  return "?";
}

inline std::optional<FrameClass> frame_class_from_string(std::string_view s) {
  if (s == "K") return FrameClass::K;
  if (s == "T") return FrameClass::T;
  if (s == "S4") return FrameClass::S4;
  if (s == "S5") return FrameClass::S5;
  return std::nullopt;
}

/// True when every frame of `narrow` is also a frame of `wide` (S5 < S4 < T < K).
inline bool class_within(FrameClass narrow, FrameClass wide) {
  return static_cast<int>(narrow) >= static_cast<int>(wide);
}

/// How M on a superposition treats the evaluation world itself.
///   AsWritten: only the accessible worlds other than w are constrained.
///   ComponentsAbsent: additionally neither component holds at w, so a
///     reflexive loop can never show both components together.
enum class StarMeasurement { ComponentsAbsent, AsWritten };

inline std::string_view to_string(StarMeasurement m) {
  return m == StarMeasurement::AsWritten ? "as-written" : "components-absent";
}

inline std::optional<StarMeasurement> star_measurement_from_string(std::string_view s) {
  if (s == "as-written") return StarMeasurement::AsWritten;
  if (s == "components-absent") return StarMeasurement::ComponentsAbsent;
  return std::nullopt;
}

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EvalError : public std::runtime_error {
public:
  explicit EvalError(const Formula& f)
      : std::runtime_error("UnknownBasicFormula: " + render(f) + " is outside the model domain"), formula_(f) {}
  const Formula& formula() const noexcept { return formula_; }

private:
  Formula formula_;
};

// ---------------------------------------------------------------------------
// Frames

class Frame {
public:
  explicit Frame(std::vector<std::string> worlds) : names_(std::move(worlds)), succ_(names_.size(), 0) {
    if (names_.empty()) throw ModelError("a frame needs at least one world");
    if (names_.size() > kMaxWorlds) throw ModelError("frames are limited to 64 worlds");
    for (std::size_t i = 0; i < names_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (names_[i] == names_[j]) throw ModelError("duplicate world id '" + names_[i] + "'");
      }
    }
  }

  /// Worlds named w0 .. w{n-1}.
  static Frame indexed(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("w" + std::to_string(i));
    return Frame(std::move(names));
  }

  static Frame from_successors(std::span<const WorldSet> succ) {
    Frame f = indexed(succ.size());
    for (std::size_t i = 0; i < succ.size(); ++i) f.succ_[i] = succ[i] & all_worlds(succ.size());
    return f;
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t w) const { return names_.at(w); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    return std::nullopt;
  }

  void add_edge(std::size_t from, std::size_t to) { succ_.at(from) |= world_bit(check(to)); }
  void remove_edge(std::size_t from, std::size_t to) { succ_.at(from) &= ~world_bit(check(to)); }
  bool has_edge(std::size_t from, std::size_t to) const { return (succ_.at(from) >> to) & 1U; }
  WorldSet successors(std::size_t w) const { return succ_.at(w); }
  std::span<const WorldSet> successor_sets() const noexcept { return succ_; }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = 0; j < size(); ++j) {
        if (has_edge(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

  bool operator==(const Frame&) const = default;

private:
  std::size_t check(std::size_t w) const {
    if (w >= names_.size()) throw ModelError("world index out of range");
    return w;
  }

  std::vector<std::string> names_;
  std::vector<WorldSet> succ_;
};

struct FrameProperties {
  bool reflexive = false;
  bool transitive = false;
  bool symmetric = false;
  bool euclidean = false;
};

namespace detail {

template <class F>
void for_each_world(WorldSet set, F&& f) {
  while (set) {
    f(static_cast<std::size_t>(std::countr_zero(set)));
    set &= set - 1;
  }
}

inline bool reflexive(std::span<const WorldSet> succ) {
  for (std::size_t i = 0; i < succ.size(); ++i) {
    if (!(succ[i] & world_bit(i))) return false;
  }
  return true;
}

inline bool transitive(std::span<const WorldSet> succ) {
  for (std::size_t i = 0; i < succ.size(); ++i) {
    bool ok = true;
    for_each_world(succ[i], [&](std::size_t j) { ok = ok && (succ[j] & ~succ[i]) == 0; });
    if (!ok) return false;
  }
  return true;
}

inline bool symmetric(std::span<const WorldSet> succ) {
  for (std::size_t i = 0; i < succ.size(); ++i) {
    bool ok = true;
    for_each_world(succ[i], [&](std::size_t j) { ok = ok && (succ[j] & world_bit(i)); });
    if (!ok) return false;
  }
  return true;
}

// wRu and wRv imply uRv.
inline bool euclidean(std::span<const WorldSet> succ) {
  for (std::size_t i = 0; i < succ.size(); ++i) {
    bool ok = true;
    for_each_world(succ[i], [&](std::size_t j) { ok = ok && (succ[i] & ~succ[j]) == 0; });
    if (!ok) return false;
  }
  return true;
}

inline bool satisfies(std::span<const WorldSet> succ, FrameClass cls) {
  switch (cls) {
    case FrameClass::K: return true;
    case FrameClass::T: return reflexive(succ);
    case FrameClass::S4: return reflexive(succ) && transitive(succ);
    case FrameClass::S5: return reflexive(succ) && transitive(succ) && symmetric(succ);
  }
  return false;
}

} // namespace detail

inline FrameProperties frame_properties(const Frame& frame) {
  auto s = frame.successor_sets();
  return {detail::reflexive(s), detail::transitive(s), detail::symmetric(s), detail::euclidean(s)};
}

struct FrameClassReport {
  FrameProperties properties;
  std::vector<std::string> missing;
  bool ok() const noexcept { return missing.empty(); }
};

inline FrameClassReport check_frame_class(const Frame& frame, FrameClass cls) {
  FrameClassReport r{frame_properties(frame), {}};
  bool need_refl = cls != FrameClass::K;
  bool need_trans = cls == FrameClass::S4 || cls == FrameClass::S5;
  bool need_sym = cls == FrameClass::S5;
  if (need_refl && !r.properties.reflexive) r.missing.emplace_back("reflexive");
  if (need_trans && !r.properties.transitive) r.missing.emplace_back("transitive");
  if (need_sym && !r.properties.symmetric) r.missing.emplace_back("symmetric");
  return r;
}

inline Frame reflexive_closure(Frame frame) {
  for (std::size_t i = 0; i < frame.size(); ++i) frame.add_edge(i, i);
  return frame;
}

/// Smallest Euclidean relation containing the frame's.
inline Frame euclidean_closure(Frame frame) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t w = 0; w < frame.size(); ++w) {
      WorldSet s = frame.successors(w);
      detail::for_each_world(s, [&](std::size_t u) {
        if ((s & ~frame.successors(u)) != 0) {
          detail::for_each_world(s, [&](std::size_t v) { frame.add_edge(u, v); });
          changed = true;
        }
      });
    }
  }
  return frame;
}

/// Distinct successors u, v of w (both other than w) with u R v. These are the
/// links between measurement branches that a non-Euclidean frame avoids.
inline std::vector<std::pair<std::size_t, std::size_t>> linked_branches(const Frame& frame, std::size_t w) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  WorldSet branches = frame.successors(w) & ~world_bit(w);
  detail::for_each_world(branches, [&](std::size_t u) {
    detail::for_each_world(branches & frame.successors(u) & ~world_bit(u),
                           [&](std::size_t v) { out.emplace_back(u, v); });
  });
  return out;
}

// ---------------------------------------------------------------------------
// Models

/// Frame plus a valuation over a subformula-closed domain of basic formulas.
/// The keys of `valuation` are the domain; values are the worlds where the
/// basic formula is true.
struct Model {
  Frame frame = Frame::indexed(1);
  FrameClass frame_class = FrameClass::K;
  Signature signature;
  bool orthogonality = true;
  StarMeasurement star_measurement = StarMeasurement::ComponentsAbsent;
  std::map<Formula, WorldSet> valuation;

  std::vector<Formula> domain() const {
    std::vector<Formula> out;
    out.reserve(valuation.size());
    for (const auto& [f, _] : valuation) out.push_back(f);
    return out;
  }

  /// Adds f (and its subformulas) to the domain, false everywhere unless set.
  void add_to_domain(const Formula& f) {
    for (const auto& g : subformulas(f)) {
      if (!is_basic(g)) throw ModelError("valuation domain holds basic formulas only: " + render(g));
      valuation.try_emplace(g, 0);
    }
  }

  void set(const Formula& f, std::size_t world, bool value = true) {
    if (world >= frame.size()) throw ModelError("world index out of range");
    add_to_domain(f);
    if (value) {
      valuation[f] |= world_bit(world);
    } else {
      valuation[f] &= ~world_bit(world);
    }
  }

  bool value(const Formula& f, std::size_t world) const {
    auto it = valuation.find(f);
    if (it == valuation.end()) throw EvalError(f);
    return (it->second >> world) & 1U;
  }
};

struct AcceptabilityViolation {
  std::size_t world;
  Formula star;
  Formula offending;
};

/// A true superposition forces its operands and all their subformulas false
/// at the same world.
inline std::vector<AcceptabilityViolation> check_acceptability(const Model& m) {
  std::vector<AcceptabilityViolation> out;
  for (const auto& [f, worlds] : m.valuation) {
    if (!f.is_star()) continue;
    std::vector<Formula> parts = subformulas(f.left());
    for (const auto& g : subformulas(f.right())) parts.push_back(g);
    detail::for_each_world(worlds, [&](std::size_t w) {
      for (const auto& g : parts) {
        auto it = m.valuation.find(g);
        if (it != m.valuation.end() && ((it->second >> w) & 1U)) out.push_back({w, f, g});
      }
    });
  }
  return out;
}

struct OrthogonalityViolation {
  std::size_t world;
  std::string atom;
  std::string partner;
};

inline std::vector<OrthogonalityViolation> check_orthogonality(const Model& m) {
  std::vector<OrthogonalityViolation> out;
  for (const auto& [a, b] : m.signature.perp_pairs()) {
    auto ia = m.valuation.find(Formula::atom(a));
    auto ib = m.valuation.find(Formula::atom(b));
    if (ia == m.valuation.end() || ib == m.valuation.end()) continue;
    detail::for_each_world(ia->second & ib->second, [&](std::size_t w) { out.push_back({w, a, b}); });
  }
  return out;
}

/// Domain entries that are not basic, or whose subformulas are missing.
inline std::vector<Formula> check_domain(const Model& m) {
  std::vector<Formula> out;
  for (const auto& [f, _] : m.valuation) {
    if (!is_basic(f) || !well_formed(f).empty()) {
      out.push_back(f);
      continue;
    }
    for (const auto& g : subformulas(f)) {
      if (!m.valuation.count(g)) out.push_back(g);
    }
  }
  return out;
}

/// Throws ModelError describing the first broken model invariant.
inline void validate_model(const Model& m) {
  if (auto bad = check_domain(m); !bad.empty()) {
    throw ModelError("domain not closed or not basic at " + render(bad.front()));
  }
  for (const auto& [f, worlds] : m.valuation) {
    if ((worlds & ~all_worlds(m.frame.size())) != 0) throw ModelError("valuation mentions unknown worlds");
    for (const auto& a : atoms_of(f)) {
      if (!m.signature.has_atom(a)) throw ModelError("atom |" + a + "> is not in the signature");
    }
  }
  if (auto r = check_frame_class(m.frame, m.frame_class); !r.ok()) {
    throw ModelError(std::string("frame is not ") + std::string(to_string(m.frame_class)) + ": missing " +
                     r.missing.front());
  }
  if (auto v = check_acceptability(m); !v.empty()) {
    const auto& x = v.front();
    throw ModelError("acceptability violated at " + m.frame.name(x.world) + ": " + render(x.star) +
                     " is true together with " + render(x.offending));
  }
  if (m.orthogonality) {
    if (auto v = check_orthogonality(m); !v.empty()) {
      const auto& x = v.front();
      throw ModelError("orthogonality violated at " + m.frame.name(x.world) + ": |" + x.atom + "> and |" +
                       x.partner + "> both true");
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

/// A formula compiled against a fixed domain ordering. Evaluates to the set of
/// worlds where it holds, given successor sets and one world set per domain
/// entry.
class Evaluator {
public:
  Evaluator(const Formula& f, const std::vector<Formula>& domain) {
    std::map<Formula, std::uint32_t> dom_index;
    for (std::size_t i = 0; i < domain.size(); ++i) dom_index.emplace(domain[i], static_cast<std::uint32_t>(i));
    std::map<Formula, std::uint32_t> step_of;
    for (const auto& g : subformulas(f)) {
      Step s{g.kind(), 0, 0, 0};
      switch (g.kind()) {
        case Formula::Kind::Atom:
        case Formula::Kind::Star: {
          auto it = dom_index.find(g);
          if (it == dom_index.end()) throw EvalError(g);
          s.a = it->second;
          break;
        }
        case Formula::Kind::And:
        case Formula::Kind::Or:
          s.a = step_of.at(g.left());
          s.b = step_of.at(g.right());
          break;
        case Formula::Kind::Meas:
          s.a = step_of.at(g.operand());
          if (g.operand().is_star()) {
            s.b = step_of.at(g.operand().left());
            s.c = step_of.at(g.operand().right());
          }
          break;
        default: s.a = step_of.at(g.operand()); break;
      }
      step_of.emplace(g, static_cast<std::uint32_t>(steps_.size()));
      steps_.push_back(s);
    }
    star_meas_.resize(steps_.size(), false);
    for (const auto& g : subformulas(f)) {
      if (g.kind() == Formula::Kind::Meas && g.operand().is_star()) star_meas_[step_of.at(g)] = true;
    }
  }

  WorldSet extension(std::span<const WorldSet> succ, std::span<const WorldSet> val,
                     StarMeasurement mode = StarMeasurement::ComponentsAbsent) const {
    std::vector<WorldSet> ext(steps_.size(), 0);
    extension_into(succ, val, mode, ext);
    return ext.back();
  }

  /// Same as extension() but reuses a caller-owned scratch buffer.
  WorldSet extension_into(std::span<const WorldSet> succ, std::span<const WorldSet> val, StarMeasurement mode,
                          std::vector<WorldSet>& ext) const {
    const std::size_t n = succ.size();
    const WorldSet all = all_worlds(n);
    ext.resize(steps_.size());
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      const Step& s = steps_[i];
      WorldSet r = 0;
      switch (s.op) {
        case Formula::Kind::Atom:
        case Formula::Kind::Star: r = val[s.a] & all; break;
        case Formula::Kind::Neg: r = ~ext[s.a] & all; break;
        case Formula::Kind::And: r = ext[s.a] & ext[s.b]; break;
        case Formula::Kind::Or: r = ext[s.a] | ext[s.b]; break;
        case Formula::Kind::Diamond:
          for (std::size_t w = 0; w < n; ++w) {
            if (succ[w] & ext[s.a]) r |= world_bit(w);
          }
          break;
        case Formula::Kind::Meas:
          if (!star_meas_[i]) {
            // Atom: true here and at some other accessible world.
            for (std::size_t w = 0; w < n; ++w) {
              WorldSet others = succ[w] & ~world_bit(w);
              if ((ext[s.a] & world_bit(w)) && (others & ext[s.a])) r |= world_bit(w);
            }
          } else {
            // Superposition: the other accessible worlds are nonempty and each
            // gives the two components different values.
            WorldSet split = ext[s.b] ^ ext[s.c];
            WorldSet here_blocked = mode == StarMeasurement::ComponentsAbsent ? (ext[s.b] | ext[s.c]) : 0;
            for (std::size_t w = 0; w < n; ++w) {
              WorldSet others = succ[w] & ~world_bit(w);
              if (others != 0 && (others & ~split) == 0 && !(here_blocked & world_bit(w))) r |= world_bit(w);
            }
          }
          break;
      }
      ext[i] = r;
    }
    return ext.back();
  }

private:
  struct Step {
    Formula::Kind op;
    std::uint32_t a, b, c;
  };
  std::vector<Step> steps_;
  std::vector<bool> star_meas_;
};

namespace detail {

inline std::vector<WorldSet> valuation_vector(const Model& m) {
  std::vector<WorldSet> v;
  v.reserve(m.valuation.size());
  for (const auto& [_, worlds] : m.valuation) v.push_back(worlds);
  return v;
}

} // namespace detail

/// Worlds of m where f holds. Throws EvalError if a basic subformula of f is
/// outside the model's domain.
inline WorldSet extension(const Model& m, const Formula& f) {
  Evaluator ev(f, m.domain());
  auto val = detail::valuation_vector(m);
  return ev.extension(m.frame.successor_sets(), val, m.star_measurement);
}

inline bool eval(const Model& m, std::size_t world, const Formula& f) {
  if (world >= m.frame.size()) throw ModelError("world index out of range");
  return (extension(m, f) >> world) & 1U;
}

inline bool holds_everywhere(const Model& m, const Formula& f) {
  return extension(m, f) == all_worlds(m.frame.size());
}

} // namespace qsl
