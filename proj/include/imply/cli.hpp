#pragma once

// Command-line front end: compile, run, verify, simulate.
//
// Commands write results to `out` and diagnostics to `err` and return the
// process exit status, so they can be driven in-process by tests.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imply/analog.hpp"
#include "imply/ir.hpp"
#include "imply/logic.hpp"
#include "imply/report.hpp"
#include "imply/synthesis.hpp"
#include "imply/verify.hpp"

namespace imply::cli {

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("cannot write '" + path + "'");
  out << text;
}

inline Program load_program(const std::string& path, std::ostream& err) {
  auto parsed = parse_program(read_file(path));
  for (const auto& d : parsed.diagnostics) err << path << ":" << to_string(d) << "\n";
  if (!parsed.program) throw CommandError("failed to parse '" + path + "'");
  return std::move(*parsed.program);
}

/// The program built for a compile target.
inline Program build_gate_program(GateKind kind) {
  const bool xor_names = kind == GateKind::XorV1 || kind == GateKind::XorV2;
  const std::string a = xor_names ? "A" : "P";
  const std::string b = xor_names ? "B" : "Q";
  const std::vector<std::string> work = xor_names ? std::vector<std::string>{"M0", "M1"}
                                                    : std::vector<std::string>{"S", "T"};
  const bool unary = gate_arity(kind) == 1;
  auto frag = synth_gate(kind, a, unary ? std::nullopt : std::optional(b),
                         std::span(work).first(gate_work_registers(kind)));
  Program prog;
  prog.registers = {a};
  if (!unary) prog.registers.push_back(b);
  for (std::size_t i = 0; i < gate_work_registers(kind); ++i) prog.registers.push_back(work[i]);
  prog.inputs = unary ? std::vector<std::string>{a} : std::vector<std::string>{a, b};
  prog.outputs = {frag.result()};
  prog.body = std::move(frag.body);
  return prog;
}

/// Number of bits when the program's inputs are exactly A0.., B0.. and C.
inline std::optional<std::size_t> adder_width(const Program& prog) {
  if (prog.inputs.size() < 3 || prog.inputs.size() % 2 == 0) return std::nullopt;
  const std::size_t n = (prog.inputs.size() - 1) / 2;
  std::set<std::string> want{std::string(kAdderCarryRegister)};
  for (std::size_t i = 0; i < n; ++i) {
    want.insert(adder_a_register(i));
    want.insert(adder_b_register(i));
  }
  if (std::set<std::string>(prog.inputs.begin(), prog.inputs.end()) != want) return std::nullopt;
  return n;
}

inline Assignment parse_set_flags(const std::vector<std::string>& sets) {
  Assignment a;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw CommandError("--set expects NAME=0|1, got '" + s + "'");
    const auto name = s.substr(0, eq);
    const auto value = s.substr(eq + 1);
    if (value != "0" && value != "1") throw CommandError("--set " + name + " expects 0 or 1");
    a[name] = to_level(value == "1");
  }
  return a;
}

inline std::uint64_t parse_packed(const std::string& text, const char* flag) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw CommandError(std::string(flag) + " expects an integer, got '" + text + "'");
  }
}

struct PackedInputs {
  std::optional<std::string> a, b, cin;
  bool any() const { return a || b || cin; }
};

/// Merges --set flags with packed --a/--b/--cin (A0 = least significant bit).
inline Assignment collect_inputs(const Program& prog, const std::vector<std::string>& sets,
                                 const PackedInputs& packed) {
  Assignment a = parse_set_flags(sets);
  if (!packed.any()) return a;
  const auto n = adder_width(prog);
  if (!n) throw CommandError("--a/--b/--cin need an adder program (inputs A0.., B0.., C)");
  auto unpack = [&](const std::optional<std::string>& text, const char* flag, auto reg) {
    if (!text) return;
    const auto v = parse_packed(*text, flag);
    if (*n < 64 && v >> *n) throw CommandError(std::string(flag) + " does not fit in " +
                                                std::to_string(*n) + " bits");
    for (std::size_t i = 0; i < *n; ++i) a[reg(i)] = to_level((v >> i) & 1U);
  };
  unpack(packed.a, "--a", adder_a_register);
  unpack(packed.b, "--b", adder_b_register);
  if (packed.cin) {
    const auto v = parse_packed(*packed.cin, "--cin");
    if (v > 1) throw CommandError("--cin expects 0 or 1");
    a[std::string(kAdderCarryRegister)] = to_level(v == 1);
  }
  return a;
}

inline std::string hex_value(std::uint64_t v, std::size_t bits) {
  static const char* digits = "0123456789ABCDEF";
  std::size_t n = (bits + 3) / 4;
  std::string s(n, '0');
  for (std::size_t i = 0; i < n; ++i) s[n - 1 - i] = digits[(v >> (4 * i)) & 0xF];
  return "0x" + s;
}

inline std::string format_levels(const RegisterFile& file, const std::vector<std::string>& regs) {
  std::string s;
  for (const auto& r : regs) {
    if (!s.empty()) s += ' ';
    s += r + "=" + std::to_string(to_int(file.get(r)));
  }
  return s;
}

/// "S=0x.. Cout=." for adder programs, "R=v ..." otherwise.
inline std::string format_outputs(const Program& prog, const RegisterFile& file) {
  const auto n = adder_width(prog);
  if (n && prog.outputs.size() == *n + 1) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < *n; ++i)
      if (to_bool(file.get(prog.outputs[i]))) s |= std::uint64_t{1} << i;
    return "S=" + hex_value(s, *n) + " Cout=" + std::to_string(to_int(file.get(prog.outputs[*n])));
  }
  return format_levels(file, prog.outputs);
}

/// Exhaustive analog run at the given parameters. agreement means every
/// output readout equals the logical machine's output on every assignment.
inline AnalogSummary analog_summary(const Program& prog, analog::CircuitParams params) {
  constexpr std::size_t kMaxAnalogInputs = 10;
  if (prog.inputs.size() > kMaxAnalogInputs)
    throw CommandError("analog summary limited to " + std::to_string(kMaxAnalogInputs) + " inputs");
  params = analog::with_calibrated_pulse(params);
  AnalogSummary s;
  s.write_time_s = params.pulse_width;
  s.agreement = true;
  std::vector<LogicLevel> levels(prog.inputs.size());
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << prog.inputs.size()); ++i) {
    decode_case(i, levels);
    Assignment in;
    for (std::size_t j = 0; j < levels.size(); ++j) in[prog.inputs[j]] = levels[j];
    const auto logical = run_program(prog, in);
    const auto run = analog::execute_analog(prog, in, params, {.record_trace = false});
    s.max_drift = std::max(s.max_drift, run.drift.max_drift);
    for (const auto& o : prog.outputs)
      if (run.readouts.get(o) != logical.final.get(o)) s.agreement = false;
  }
  return s;
}

inline Oracle oracle_for(const std::string& name, const Program& prog) {
  if (name == "adder") return adder_program_oracle(prog);
  const auto kind = parse_gate_kind(name);
  if (!kind) throw CommandError("unknown oracle '" + name + "'");
  if (prog.inputs.size() != gate_arity(*kind) || prog.outputs.size() != 1)
    throw CommandError("oracle '" + name + "' expects " + std::to_string(gate_arity(*kind)) +
                       " input(s) and 1 output, program has " + std::to_string(prog.inputs.size()) +
                       " and " + std::to_string(prog.outputs.size()));
  return gate_oracle(*kind);
}

inline std::string describe_counterexample(const Counterexample& cx) {
  auto list = [](const auto& v) {
    std::string s;
    for (const auto& [n, l] : v) s += (s.empty() ? "" : " ") + n + "=" + std::to_string(to_int(l));
    return s;
  };
  return "inputs: " + list(cx.inputs) + " | expected: " + list(cx.expected) +
         " | actual: " + list(cx.actual);
}

struct AnalogFlags {
  std::optional<double> r_g, r_on, r_off, v_set, v_cond, v_clear, length, mobility, threshold;

  analog::CircuitParams apply() const {
    analog::CircuitParams p;
    if (r_g) p.r_g = *r_g;
    if (r_on) p.r_on = *r_on;
    if (r_off) p.r_off = *r_off;
    if (v_set) p.v_set = *v_set;
    if (v_cond) p.v_cond = *v_cond;
    if (v_clear) p.v_clear = *v_clear;
    if (length) p.length = *length;
    if (mobility) p.mobility = *mobility;
    p.read_threshold = threshold ? *threshold : analog::default_read_threshold(p);
    return p;
  }

  void add_to(CLI::App& cmd) {
    cmd.add_option("--rg", r_g, "ground resistor R_G (ohm)");
    cmd.add_option("--ron", r_on, "R_ON (ohm)");
    cmd.add_option("--roff", r_off, "R_OFF (ohm)");
    cmd.add_option("--vset", v_set, "V_set (V)");
    cmd.add_option("--vcond", v_cond, "V_cond (V)");
    cmd.add_option("--vclear", v_clear, "V_clear (V)");
    cmd.add_option("--length", length, "device length D (m)");
    cmd.add_option("--mobility", mobility, "dopant mobility mu_v (m^2/(V s))");
    cmd.add_option("--threshold", threshold, "readout threshold (ohm), default sqrt(R_ON R_OFF)");
  }
};

inline std::string csv_path_for(const std::string& base, const std::string& suffix) {
  if (suffix.empty()) return base;
  std::filesystem::path p(base);
  auto stem = p.stem().string();
  auto ext = p.extension().string();
  return (p.parent_path() / (stem + "_" + suffix + ext)).string();
}

inline int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IMPLY microcode toolchain", "implyc"};
  app.require_subcommand(1);

  // compile
  auto* compile = app.add_subcommand("compile", "synthesize a gate or adder into .imply text");
  std::string gate_name;
  std::optional<long long> adder_bits;
  std::string compile_out;
  auto* gate_opt = compile->add_option("--gate", gate_name, "gate: not nand and nor or xor xor_v1 xor_v2");
  auto* adder_opt = compile->add_option("--adder", adder_bits, "serial adder bit width");
  gate_opt->excludes(adder_opt);
  compile->add_option("-o,--output", compile_out, "output path (stdout if omitted)");

  // run
  auto* run = app.add_subcommand("run", "execute a program on the logical machine");
  std::string run_path;
  std::vector<std::string> run_sets;
  PackedInputs run_packed;
  bool run_trace = false;
  run->add_option("program", run_path)->required();
  run->add_option("--set", run_sets, "NAME=0|1");
  run->add_option("--a", run_packed.a, "packed adder operand A");
  run->add_option("--b", run_packed.b, "packed adder operand B");
  run->add_option("--cin", run_packed.cin, "adder carry in");
  run->add_flag("--trace", run_trace, "print the state after every instruction");

  // verify
  auto* verify = app.add_subcommand("verify", "exhaustively check a program against an oracle");
  std::string verify_path, oracle_name, report_path;
  unsigned threads = 0;
  bool with_analog = false;
  verify->add_option("program", verify_path)->required();
  verify->add_option("--oracle", oracle_name, "gate name or 'adder'")->required();
  verify->add_option("--report", report_path, "write a JSON report here");
  verify->add_option("--threads", threads, "worker threads (0 = hardware)");
  verify->add_flag("--analog", with_analog, "add an analog agreement summary");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "execute a program on the analog device model");
  std::string sim_path, csv_out;
  std::vector<std::string> sim_sets;
  PackedInputs sim_packed;
  AnalogFlags flags;
  simulate->add_option("program", sim_path)->required();
  simulate->add_option("--set", sim_sets, "NAME=0|1 (all assignments when omitted)");
  simulate->add_option("--a", sim_packed.a, "packed adder operand A");
  simulate->add_option("--b", sim_packed.b, "packed adder operand B");
  simulate->add_option("--cin", sim_packed.cin, "adder carry in");
  simulate->add_option("--csv", csv_out, "trace CSV path");
  flags.add_to(*simulate);

  std::vector<const char*> argv{"implyc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*compile) {
      Program prog;
      if (adder_bits) {
        if (*adder_bits < 1) throw CommandError("width must be ≥ 1");
        prog = gen_adder_serial(static_cast<std::size_t>(*adder_bits)).program;
      } else if (!gate_name.empty()) {
        auto kind = parse_gate_kind(gate_name);
        if (!kind) throw CommandError("unknown gate '" + gate_name + "'");
        prog = build_gate_program(*kind);
      } else {
        throw CommandError("compile needs --gate or --adder");
      }
      const auto text = format_program(prog);
      const auto summary = "steps=" + std::to_string(count_steps(prog)) +
                           " registers=" + std::to_string(prog.registers.size());
      if (compile_out.empty()) {
        out << text;
        err << summary << "\n";
      } else {
        write_file(compile_out, text);
        out << summary << "\n";
      }
      return 0;
    }

    if (*run) {
      const auto prog = load_program(run_path, err);
      const auto inputs = collect_inputs(prog, run_sets, run_packed);
      const auto result = run_program(prog, inputs);
      if (run_trace)
        for (const auto& e : result.trace)
          out << (e.index + 1) << ": " << to_string(e.instr) << " | "
              << format_levels(e.post, prog.registers) << "\n";
      out << format_outputs(prog, result.final) << " steps=" << result.steps << "\n";
      return 0;
    }

    if (*verify) {
      const auto prog = load_program(verify_path, err);
      const auto oracle = oracle_for(oracle_name, prog);
      ReportDocument doc;
      doc.program = std::filesystem::path(verify_path).stem().string();
      doc.metrics = metrics(prog);
      doc.verdict = exhaustive_check(prog, oracle, threads);
      if (with_analog) doc.analog = analog_summary(prog, analog::CircuitParams{});
      if (doc.verdict.pass) {
        out << "PASS cases=" << doc.verdict.cases;
      } else {
        out << "FAIL cases=" << doc.verdict.cases << " "
            << describe_counterexample(*doc.verdict.counterexample);
      }
      out << " steps=" << doc.metrics.steps << " registers=" << doc.metrics.registers << "\n";
      for (const auto& b : doc.metrics.baselines)
        out << "  vs " << b.name << " (" << b.steps << " steps): improvement "
            << format_number(b.improvement) << "\n";
      if (doc.analog)
        out << "  analog: write_time_s=" << format_number(doc.analog->write_time_s)
            << " max_drift=" << format_number(doc.analog->max_drift)
            << " agreement=" << (doc.analog->agreement ? "true" : "false") << "\n";
      if (!report_path.empty()) write_file(report_path, serialize_report(doc));
      return doc.verdict.pass ? 0 : 1;
    }

    if (*simulate) {
      const auto prog = load_program(sim_path, err);
      auto params = flags.apply();
      params = analog::with_calibrated_pulse(params);
      params.validate();
      out << "write_time_s=" << format_number(params.pulse_width) << "\n";

      std::vector<Assignment> cases;
      if (!sim_sets.empty() || sim_packed.any()) {
        cases.push_back(collect_inputs(prog, sim_sets, sim_packed));
      } else {
        if (prog.inputs.size() > 10)
          throw CommandError("too many inputs to simulate every assignment; use --set");
        std::vector<LogicLevel> levels(prog.inputs.size());
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << prog.inputs.size()); ++i) {
          decode_case(i, levels);
          Assignment in;
          for (std::size_t j = 0; j < levels.size(); ++j) in[prog.inputs[j]] = levels[j];
          cases.push_back(std::move(in));
        }
      }
      for (const auto& in : cases) {
        const auto run_result = analog::execute_analog(prog, in, params);
        const auto logical = run_program(prog, in);
        std::string bits;
        RegisterFile in_file(prog.inputs);
        for (const auto& name : prog.inputs) {
          in_file.set(name, in.at(name));
          bits += std::to_string(to_int(in.at(name)));
        }
        out << "inputs: " << format_levels(in_file, prog.inputs)
            << " | readout: " << format_outputs(prog, run_result.readouts)
            << " | logic: " << format_outputs(prog, logical.final);
        for (const auto& o : prog.outputs)
          out << " | " << o << "_ohm=" << format_number(run_result.final_memristance(o, params));
        out << " | max_drift=" << format_number(run_result.drift.max_drift) << "\n";
        if (!csv_out.empty())
          write_file(csv_path_for(csv_out, cases.size() > 1 ? bits : ""),
                     analog::trace_to_csv(run_result.trace, params));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace imply::cli
