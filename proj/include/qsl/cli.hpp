#pragma once

// Command-line front end. Output is line-oriented `key: value`; models are
// emitted as single-line JSON in the model file format.
//
// Exit codes: 0 affirmative (ok / valid / derivable / true), 1 negative with a
// witness, 2 unknown (bound exhausted), 3 input or usage error.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsl/acceptance.hpp"
#include "qsl/formula.hpp"
#include "qsl/io.hpp"
#include "qsl/kripke.hpp"
#include "qsl/proofs.hpp"
#include "qsl/qdeduction.hpp"
#include "qsl/validity.hpp"

namespace qsl::cli {

enum ExitCode : int { kAffirmative = 0, kNegative = 1, kUnknown = 2, kInputError = 3 };

namespace detail {

struct BoundFlags {
  std::size_t bound = 3;
  std::string cls = "S4";
  std::string ortho = "on";
  std::string star_measurement = "components-absent";

  void attach(CLI::App* cmd) {
    cmd->add_option("--bound", bound, "maximum number of worlds")->check(CLI::Range(1, 8));
    cmd->add_option("--class", cls, "frame class")->check(CLI::IsMember({"K", "T", "S4", "S5"}));
    cmd->add_option("--ortho", ortho, "orthogonality of declared perp pairs")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--star-measurement", star_measurement, "reading of M on a superposition")
        ->check(CLI::IsMember({"components-absent", "as-written"}));
  }

  SearchBound to_bound() const {
    SearchBound b;
    b.max_worlds = bound;
    b.frame_class = *frame_class_from_string(cls);
    b.orthogonality = ortho == "on";
    b.star_measurement = *star_measurement_from_string(star_measurement);
    return b;
  }
};

struct SigFlags {
  std::string sig_file;
  bool auto_atoms = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sig", sig_file, "signature file (atoms and perp pairs)");
    cmd->add_flag("--auto-atoms", auto_atoms, "accept kets missing from --sig");
  }

  Signature load() const {
    return sig_file.empty() ? Signature{} : signature_from_json(read_json_file(sig_file));
  }

  AtomPolicy policy() const { return sig_file.empty() || auto_atoms ? AtomPolicy::Register : AtomPolicy::Strict; }
};

inline std::string join(const std::vector<Formula>& fs) {
  std::string out = "{";
  for (std::size_t i = 0; i < fs.size(); ++i) out += (i ? "; " : "") + render(fs[i]);
  return out + "}";
}

inline std::vector<std::string> split_gamma(const std::string& arg) {
  std::vector<std::string> items;
  std::error_code ec;
  if (!arg.empty() && std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::string line;
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      items.push_back(line);
    }
    return items;
  }
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") != std::string::npos) items.push_back(item);
  }
  return items;
}

inline int report_verdict(const Verdict& v, std::ostream& out, const std::string& model_out = {}) {
  out << "verdict: " << describe(v) << '\n';
  if (auto* ok = std::get_if<ValidUpToBound>(&v)) {
    out << "bound: " << ok->bound.max_worlds << '\n';
    out << "class: " << to_string(ok->bound.frame_class) << '\n';
    return kAffirmative;
  }
  if (auto* cm = std::get_if<Countermodel>(&v)) {
    out << "world: " << cm->model.frame.name(cm->world) << '\n';
    out << "model: " << model_to_json(cm->model).dump() << '\n';
    if (!model_out.empty()) {
      write_json_file(model_out, model_to_json(cm->model));
      out << "model_file: " << model_out << '\n';
    }
    return kNegative;
  }
  return kUnknown;
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Workbench for a modal logic of quantum superpositions", "qsl"};
  app.require_subcommand(1);

  std::string formula_text;
  detail::SigFlags sig_flags;
  detail::BoundFlags bound_flags;

  auto* parse_cmd = app.add_subcommand("parse", "parse and print a formula in canonical form");
  parse_cmd->add_option("formula", formula_text)->required();
  sig_flags.attach(parse_cmd);

  std::string model_file, world;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula in a model file");
  eval_cmd->add_option("formula", formula_text)->required();
  eval_cmd->add_option("--model", model_file, "model file")->required();
  eval_cmd->add_option("--world", world, "world id (default: every world)");

  auto* validate_cmd = app.add_subcommand("validate", "bounded validity check");
  validate_cmd->add_option("formula", formula_text)->required();
  sig_flags.attach(validate_cmd);
  bound_flags.attach(validate_cmd);

  std::string model_out;
  auto* counter_cmd = app.add_subcommand("countermodel", "search for a smallest countermodel");
  counter_cmd->add_option("formula", formula_text)->required();
  counter_cmd->add_option("--out", model_out, "write the countermodel to this file");
  sig_flags.attach(counter_cmd);
  bound_flags.attach(counter_cmd);

  std::string proof_file;
  auto* proof_cmd = app.add_subcommand("check-proof", "check a proof script file");
  proof_cmd->add_option("file", proof_file)->required();

  std::vector<std::string> gamma_args;
  std::string alpha_text;
  auto* qderive_cmd = app.add_subcommand("qderive", "decide quantum deduction gamma ||- alpha");
  qderive_cmd->add_option("--gamma", gamma_args, "file with one formula per line, or ';'-separated list");
  qderive_cmd->add_option("--alpha", alpha_text)->required();
  sig_flags.attach(qderive_cmd);
  bound_flags.attach(qderive_cmd);

  bool verbose = false;
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance battery");
  suite_cmd->add_flag("-v,--verbose", verbose, "print every individual check");

  std::vector<const char*> argv{"qsl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kAffirmative : kInputError;
  }

  try {
    if (*parse_cmd) {
      Signature sig = sig_flags.load();
      Formula f = parse(formula_text, sig, sig_flags.policy());
      out << "formula: " << render(f) << '\n';
      out << "basic: " << (is_basic(f) ? "yes" : "no") << '\n';
      return kAffirmative;
    }

    if (*eval_cmd) {
      Model m = model_from_json(read_json_file(model_file));
      Formula f = parse(formula_text, m.signature);
      // Basic formulas missing from the file are false everywhere.
      for (const auto& g : basic_subformulas({f})) m.add_to_domain(g);
      if (!world.empty()) {
        auto w = m.frame.index_of(world);
        if (!w) throw InputError("unknown world " + world);
        bool v = eval(m, *w, f);
        out << "world: " << world << '\n' << "value: " << (v ? "true" : "false") << '\n';
        return v ? kAffirmative : kNegative;
      }
      WorldSet ext = extension(m, f);
      for (std::size_t w = 0; w < m.frame.size(); ++w) {
        out << m.frame.name(w) << ": " << (((ext >> w) & 1U) ? "true" : "false") << '\n';
      }
      bool everywhere = ext == all_worlds(m.frame.size());
      out << "holds_everywhere: " << (everywhere ? "true" : "false") << '\n';
      return everywhere ? kAffirmative : kNegative;
    }

    if (*validate_cmd || *counter_cmd) {
      Signature sig = sig_flags.load();
      Formula f = parse(formula_text, sig, sig_flags.policy());
      Verdict v = check_validity(f, bound_flags.to_bound(), sig);
      return detail::report_verdict(v, out, *counter_cmd ? model_out : std::string{});
    }

    if (*proof_cmd) {
      ProofScript script = script_from_json(read_json_file(proof_file));
      ProofReport r = check_proof(script);
      out << "proof: " << script.name << '\n';
      out << "class: " << to_string(script.frame_class) << '\n';
      out << "lines: " << script.lines.size() << '\n';
      if (r.ok) {
        out << "result: ok\n";
        out << "theorem: " << render(theorem_statement(script)) << '\n';
        return kAffirmative;
      }
      out << "result: bad\n" << "line: " << r.line << '\n' << "reason: " << r.reason << '\n';
      return kNegative;
    }

    if (*qderive_cmd) {
      Signature sig = sig_flags.load();
      std::vector<Formula> gamma;
      for (const auto& arg : gamma_args) {
        for (const auto& text : detail::split_gamma(arg)) gamma.push_back(parse(text, sig, sig_flags.policy()));
      }
      Formula alpha = parse(alpha_text, sig, sig_flags.policy());
      SearchBound bound = bound_flags.to_bound();
      QDeductionResult r = quantum_derives(gamma, alpha, sig, bound);
      out << "gamma: " << detail::join(gamma) << '\n';
      out << "alpha: " << render(alpha) << '\n';
      out << "derivable: " << to_string(r.answer) << '\n';
      out << "bound: " << bound.max_worlds << '\n' << "class: " << to_string(bound.frame_class) << '\n';
      if (r.trace.clause) out << "clause: " << to_string(*r.trace.clause) << '\n';
      if (!r.trace.thesis_source.empty()) out << "thesis: " << r.trace.thesis_source << '\n';
      if (r.trace.clause == Clause::Subset) {
        out << "delta: " << detail::join(r.trace.delta) << '\n';
        out << "witness_world: " << r.trace.non_triviality->model.frame.name(r.trace.non_triviality->world) << '\n';
        out << "witness: " << model_to_json(r.trace.non_triviality->model).dump() << '\n';
      }
      if (r.trace.entailment) out << "entailment: " << describe(*r.trace.entailment) << '\n';
      out << "subsets_tried: " << r.trace.subsets_tried << '\n';
      switch (r.answer) {
        case Answer::Yes: return kAffirmative;
        case Answer::No: return kNegative;
        case Answer::Unknown: return kUnknown;
      }
    }

    if (*suite_cmd) {
      bool all = true;
      for (const auto& c : run_acceptance_battery()) {
        out << (c.passed ? "PASS" : "FAIL") << "  " << c.number << "  " << c.title << '\n';
        if (verbose || !c.passed) {
          for (const auto& d : c.details) out << "        " << d << '\n';
        }
        all = all && c.passed;
      }
      out << "result: " << (all ? "all criteria passed" : "some criteria failed") << '\n';
      return all ? kAffirmative : kNegative;
    }
  } catch (const BoundTooLarge& e) {
    out << "verdict: Unknown(" << e.what() << ")\n";
    return kUnknown;
  } catch (const FormulaError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

} // namespace qsl::cli
