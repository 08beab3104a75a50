#pragma once

// JSON file formats: signatures, models and proof scripts.
//
//   signature: { "atoms": [names], "perp": [[a, b], ...] }
//   model:     { "worlds": [ids], "rel": [[from, to], ...], "frame_class": "K|T|S4|S5",
//                "atoms": [names], "perp": [[a, b], ...],
//                "valuation": { world: [true basic formulas, surface syntax] },
//                "orthogonality": bool }
//              Basic formulas missing from a world's list are false there.
//   proof:     { "name", "class", "atoms", "perp", "hypotheses": [formulas],
//                "conclusion": formula (optional),
//                "lines": [[index, formula, justification, [cited], {metavar: formula}]] }
//              justification is hypothesis | axiom:<schema> | pc-taut | mp | nec |
//              duality | definition.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qsl/formula.hpp"
#include "qsl/kripke.hpp"
#include "qsl/proofs.hpp"

namespace qsl {

class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Signature

inline void read_signature_fields(const Json& j, Signature& sig) {
  try {
    if (j.contains("atoms")) {
      for (const auto& a : j.at("atoms")) sig.add_atom(a.get<std::string>());
    }
    if (j.contains("perp")) {
      for (const auto& pair : j.at("perp")) {
        if (!pair.is_array() || pair.size() != 2) throw InputError("perp entries are [atom, atom] pairs");
        sig.declare_perp(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("signature: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("signature: ") + e.what());
  }
}

inline void write_signature_fields(const Signature& sig, Json& j) {
  j["atoms"] = Json::array();
  for (const auto& a : sig.atoms()) j["atoms"].push_back(a);
  j["perp"] = Json::array();
  for (const auto& [a, b] : sig.perp_pairs()) j["perp"].push_back(Json::array({a, b}));
}

inline Signature signature_from_json(const Json& j) {
  Signature sig;
  read_signature_fields(j, sig);
  return sig;
}

inline Json signature_to_json(const Signature& sig) {
  Json j = Json::object();
  write_signature_fields(sig, j);
  return j;
}

// ---------------------------------------------------------------------------
// Model

inline Json model_to_json(const Model& m) {
  Json j = Json::object();
  j["worlds"] = m.frame.names();
  j["rel"] = Json::array();
  for (const auto& [from, to] : m.frame.edges()) {
    j["rel"].push_back(Json::array({m.frame.name(from), m.frame.name(to)}));
  }
  j["frame_class"] = std::string(to_string(m.frame_class));
  write_signature_fields(m.signature, j);
  j["valuation"] = Json::object();
  for (std::size_t w = 0; w < m.frame.size(); ++w) {
    Json truths = Json::array();
    for (const auto& [f, worlds] : m.valuation) {
      if ((worlds >> w) & 1U) truths.push_back(render(f));
    }
    j["valuation"][m.frame.name(w)] = std::move(truths);
  }
  j["orthogonality"] = m.orthogonality;
  if (m.star_measurement != StarMeasurement::ComponentsAbsent) {
    j["star_measurement"] = std::string(to_string(m.star_measurement));
  }
  return j;
}

/// Builds and validates a model. The domain is every declared atom plus every
/// listed formula, closed under subformula.
inline Model model_from_json(const Json& j) {
  try {
    Model m;
    m.frame = Frame(j.at("worlds").get<std::vector<std::string>>());
    for (const auto& edge : j.at("rel")) {
      if (!edge.is_array() || edge.size() != 2) throw InputError("rel entries are [from, to] pairs");
      auto from = m.frame.index_of(edge[0].get<std::string>());
      auto to = m.frame.index_of(edge[1].get<std::string>());
      if (!from || !to) throw InputError("rel mentions an unknown world");
      m.frame.add_edge(*from, *to);
    }
    auto cls = frame_class_from_string(j.value("frame_class", std::string("K")));
    if (!cls) throw InputError("frame_class must be K, T, S4 or S5");
    m.frame_class = *cls;
    read_signature_fields(j, m.signature);
    const bool strict = j.contains("atoms");
    m.orthogonality = j.value("orthogonality", true);
    if (j.contains("star_measurement")) {
      auto sm = star_measurement_from_string(j.at("star_measurement").get<std::string>());
      if (!sm) throw InputError("star_measurement must be components-absent or as-written");
      m.star_measurement = *sm;
    }
    if (j.contains("valuation")) {
      for (const auto& [world, truths] : j.at("valuation").items()) {
        auto w = m.frame.index_of(world);
        if (!w) throw InputError("valuation mentions unknown world " + world);
        for (const auto& text : truths) {
          Formula f = strict ? parse(text.get<std::string>(), m.signature)
                             : parse(text.get<std::string>(), m.signature, AtomPolicy::Register);
          if (!is_basic(f)) throw InputError("valuation lists a non-basic formula: " + render(f));
          m.set(f, *w);
        }
      }
    }
    for (const auto& a : m.signature.atoms()) m.add_to_domain(Formula::atom(a));
    validate_model(m);
    return m;
  } catch (const Json::exception& e) {
    throw InputError(std::string("model: ") + e.what());
  } catch (const FormulaError& e) {
    throw InputError(std::string("model: ") + e.what());
  } catch (const ModelError& e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Proof scripts

inline Json script_to_json(const ProofScript& s) {
  Json j = Json::object();
  j["name"] = s.name;
  j["class"] = std::string(to_string(s.frame_class));
  write_signature_fields(s.signature, j);
  j["hypotheses"] = Json::array();
  for (const auto& h : s.hypotheses) j["hypotheses"].push_back(render(h));
  if (s.conclusion) j["conclusion"] = render(*s.conclusion);
  j["lines"] = Json::array();
  for (const auto& line : s.lines) {
    std::string why(to_string(line.why.rule));
    if (line.why.rule == Rule::Axiom && line.why.schema) why += ":" + std::string(to_string(*line.why.schema));
    Json subst = Json::object();
    for (const auto& [var, f] : line.why.substitution) subst[var] = render(f);
    j["lines"].push_back(Json::array({line.index, render(line.formula), why, line.why.cites, subst}));
  }
  return j;
}

inline ProofScript script_from_json(const Json& j) {
  try {
    ProofScript s;
    s.name = j.value("name", std::string("unnamed"));
    auto cls = frame_class_from_string(j.value("class", std::string("K")));
    if (!cls) throw InputError("class must be K, T, S4 or S5");
    s.frame_class = *cls;
    read_signature_fields(j, s.signature);
    auto read = [&](const Json& text) { return parse(text.get<std::string>(), s.signature, AtomPolicy::Register); };
    if (j.contains("hypotheses")) {
      for (const auto& h : j.at("hypotheses")) s.hypotheses.push_back(read(h));
    }
    if (j.contains("conclusion")) s.conclusion = read(j.at("conclusion"));
    for (const auto& row : j.at("lines")) {
      if (!row.is_array() || row.size() < 3) throw InputError("proof lines are [index, formula, justification, ...]");
      ProofLine line{row[0].get<std::size_t>(), read(row[1]), {}};
      std::string why = row[2].get<std::string>();
      std::string rule_name = why.substr(0, why.find(':'));
      auto rule = rule_from_string(rule_name);
      if (!rule) throw InputError("unknown justification '" + why + "'");
      line.why.rule = *rule;
      if (*rule == Rule::Axiom) {
        auto colon = why.find(':');
        auto id = colon == std::string::npos ? std::nullopt : schema_from_string(why.substr(colon + 1));
        if (!id) throw InputError("axiom justification needs a schema, e.g. axiom:QS1");
        line.why.schema = id;
      }
      if (row.size() > 3) line.why.cites = row[3].get<std::vector<std::size_t>>();
      if (row.size() > 4) {
        for (const auto& [var, text] : row[4].items()) line.why.substitution.emplace(var, read(text));
      }
      s.lines.push_back(std::move(line));
    }
    return s;
  } catch (const Json::exception& e) {
    throw InputError(std::string("proof: ") + e.what());
  } catch (const FormulaError& e) {
    throw InputError(std::string("proof: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("proof: ") + e.what());
  }
}

} // namespace qsl
