#pragma once

// Expansion of boolean gates and serial adders into FALSE/IMPLY microcode.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "imply/ir.hpp"
#include "imply/logic.hpp"

namespace imply {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GateKind { Not, Nand, And, Nor, Or, XorTable3, XorV1, XorV2 };

inline constexpr GateKind kAllGateKinds[] = {GateKind::Not,       GateKind::Nand,
                                             GateKind::And,       GateKind::Nor,
                                             GateKind::Or,        GateKind::XorTable3,
                                             GateKind::XorV1,     GateKind::XorV2};

inline std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::Not: return "not";
    case GateKind::Nand: return "nand";
    case GateKind::And: return "and";
    case GateKind::Nor: return "nor";
    case GateKind::Or: return "or";
    case GateKind::XorTable3: return "xor";
    case GateKind::XorV1: return "xor_v1";
    case GateKind::XorV2: return "xor_v2";
  }
  return "?";
}

inline std::optional<GateKind> parse_gate_kind(std::string_view s) {
  for (auto k : kAllGateKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

constexpr std::size_t gate_arity(GateKind k) { return k == GateKind::Not ? 1 : 2; }

/// Work registers a template needs besides its operands.
constexpr std::size_t gate_work_registers(GateKind k) {
  switch (k) {
    case GateKind::Not:
    case GateKind::Nand:
    case GateKind::Nor:
    case GateKind::Or:
      return 1;
    default:
      return 2;
  }
}

/// Boolean function a gate computes.
constexpr bool gate_function(GateKind k, bool a, bool b) {
  switch (k) {
    case GateKind::Not: return !a;
    case GateKind::Nand: return !(a && b);
    case GateKind::And: return a && b;
    case GateKind::Nor: return !(a || b);
    case GateKind::Or: return a || b;
    default: return a != b;
  }
}

struct Fragment {
  std::vector<Instruction> body;
  std::vector<std::string> operands;
  std::vector<std::string> results;    // primary result first
  std::vector<std::string> clobbered;  // every register the body writes, first-write order

  const std::string& result() const { return results.front(); }
  std::size_t steps() const {
    return static_cast<std::size_t>(std::count_if(
        body.begin(), body.end(), [](const Instruction& i) { return i.counts_as_step(); }));
  }
};

namespace detail {

inline Fragment make_fragment(std::vector<Instruction> body, std::vector<std::string> operands,
                              std::vector<std::string> results) {
  Fragment f{std::move(body), std::move(operands), std::move(results), {}};
  for (const auto& instr : f.body)
    if (std::find(f.clobbered.begin(), f.clobbered.end(), instr.target) == f.clobbered.end())
      f.clobbered.push_back(instr.target);
  return f;
}

inline void require_distinct(std::initializer_list<std::string_view> regs) {
  std::set<std::string_view> seen;
  for (auto r : regs) {
    if (r.empty()) throw SynthesisError("empty register name");
    if (!seen.insert(r).second)
      throw SynthesisError("registers must be distinct: '" + std::string(r) + "' repeated");
  }
}

// Steps 1-9 of the 11-step XOR. Afterwards: m0 = NOT(a XOR b),
// b = a OR b, m1 = a NAND b, a unchanged.
inline std::vector<Instruction> xnor_prefix(const std::string& a, const std::string& b,
                                            const std::string& m0, const std::string& m1) {
  return {Instruction::False(m0),    Instruction::Imply(a, m0), Instruction::False(m1),
          Instruction::Imply(b, m1), Instruction::Imply(m0, b), Instruction::Imply(a, m1),
          Instruction::False(m0),    Instruction::Imply(m1, m0), Instruction::Imply(b, m0)};
}

}  // namespace detail

/// Nine-step XOR. Leaves a unchanged, b = a IMP b, m1 = b IMP a, m0 = a XOR b.
inline Fragment synth_xor_v1(const std::string& a, const std::string& b, const std::string& m0,
                             const std::string& m1) {
  detail::require_distinct({a, b, m0, m1});
  return detail::make_fragment(
      {Instruction::False(m0), Instruction::Imply(a, m0), Instruction::False(m1),
       Instruction::Imply(b, m1), Instruction::Imply(a, b), Instruction::Imply(m0, m1),
       Instruction::False(m0), Instruction::Imply(m1, m0), Instruction::Imply(b, m0)},
      {a, b}, {m0});
}

/// Eleven-step XOR. The ninth step leaves NOT(a XOR b) in m0; the final
/// FALSE/IMPLY pair inverts it into m1, which holds the result.
inline Fragment synth_xor_v2(const std::string& a, const std::string& b, const std::string& m0,
                             const std::string& m1) {
  detail::require_distinct({a, b, m0, m1});
  auto body = detail::xnor_prefix(a, b, m0, m1);
  body.push_back(Instruction::False(m1));
  body.push_back(Instruction::Imply(m0, m1));
  return detail::make_fragment(std::move(body), {a, b}, {m1});
}

/// Expands one gate. Work registers may hold anything beforehand; every
/// template clears what it reads. OR writes its result into operand b.
inline Fragment synth_gate(GateKind kind, const std::string& a, std::optional<std::string> b,
                           std::span<const std::string> work) {
  const std::size_t arity = gate_arity(kind);
  if (arity == 2 && !b)
    throw SynthesisError(std::string(to_string(kind)) + " needs two operands");
  if (arity == 1 && b)
    throw SynthesisError(std::string(to_string(kind)) + " takes one operand");
  const std::size_t need = gate_work_registers(kind);
  if (work.size() < need)
    throw SynthesisError(std::string(to_string(kind)) + " needs " + std::to_string(need) +
                         " work register" + (need == 1 ? "" : "s") + ", got " +
                         std::to_string(work.size()));

  const std::string& s = work[0];
  if (arity == 1) {
    detail::require_distinct({a, s});
    return detail::make_fragment({Instruction::False(s), Instruction::Imply(a, s)}, {a}, {s});
  }
  const std::string& q = *b;
  if (need == 1) detail::require_distinct({a, q, s});
  else detail::require_distinct({a, q, s, work[1]});

  switch (kind) {
    case GateKind::Nand:
      return detail::make_fragment(
          {Instruction::False(s), Instruction::Imply(a, s), Instruction::Imply(q, s)}, {a, q},
          {s});
    case GateKind::And: {
      // {a IMP (b IMP 0)} IMP 0
      const std::string& t = work[1];
      return detail::make_fragment({Instruction::False(t), Instruction::Imply(q, t),
                                    Instruction::Imply(a, t), Instruction::False(s),
                                    Instruction::Imply(t, s)},
                                   {a, q}, {s});
    }
    case GateKind::Or:
      // (a IMP 0) IMP b
      return detail::make_fragment(
          {Instruction::False(s), Instruction::Imply(a, s), Instruction::Imply(s, q)}, {a, q},
          {q});
    case GateKind::Nor:
      // {(a IMP 0) IMP b} IMP 0
      return detail::make_fragment({Instruction::False(s), Instruction::Imply(a, s),
                                    Instruction::Imply(s, q), Instruction::False(s),
                                    Instruction::Imply(q, s)},
                                   {a, q}, {s});
    case GateKind::XorTable3: {
      // (a IMP b) IMP {(b IMP a) IMP 0}; a is copied into t before b is overwritten.
      const std::string& t = work[1];
      return detail::make_fragment(
          {Instruction::False(s), Instruction::Imply(a, s), Instruction::False(t),
           Instruction::Imply(s, t), Instruction::Imply(q, t), Instruction::Imply(a, q),
           Instruction::False(s), Instruction::Imply(t, s), Instruction::Imply(q, s)},
          {a, q}, {s});
    }
    case GateKind::XorV1:
      return synth_xor_v1(a, q, work[0], work[1]);
    case GateKind::XorV2:
      return synth_xor_v2(a, q, work[0], work[1]);
    case GateKind::Not:
      break;
  }
  throw SynthesisError("unhandled gate kind");
}

// ---------------------------------------------------------------------------
// Netlists

struct Gate {
  GateKind kind;
  std::string output;
  std::string a;
  std::optional<std::string> b;
};

struct Netlist {
  std::vector<std::string> inputs;
  std::vector<Gate> gates;
  std::vector<std::string> outputs;
};

struct CompiledNetlist {
  Program program;
  std::map<std::string, std::string> net_register;  // final location of every gate output
};

/// Concatenates gate fragments in topological order (ties keep list order).
/// Primary inputs live in registers named after their nets. A work register
/// becomes reusable once every reader of the net it holds has run.
inline CompiledNetlist compile_netlist(const Netlist& net, std::span<const std::string> workpool) {
  std::set<std::string> nets(net.inputs.begin(), net.inputs.end());
  if (nets.size() != net.inputs.size()) throw SynthesisError("duplicate primary input");
  for (const auto& in : net.inputs)
    if (!is_identifier(in)) throw SynthesisError("invalid net name '" + in + "'");
  std::map<std::string, std::size_t> driver;
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    const auto& g = net.gates[i];
    if (!nets.insert(g.output).second)
      throw SynthesisError("net '" + g.output + "' driven twice");
    driver[g.output] = i;
  }
  for (const auto& w : workpool)
    if (nets.contains(w))
      throw SynthesisError("work register '" + w + "' collides with a net name");

  auto reads = [](const Gate& g) {
    std::vector<std::string> r{g.a};
    if (g.b) r.push_back(*g.b);
    return r;
  };

  // Kahn's algorithm, smallest pending index first.
  std::vector<std::size_t> indegree(net.gates.size(), 0);
  std::vector<std::vector<std::size_t>> users(net.gates.size());
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    const auto& g = net.gates[i];
    if ((gate_arity(g.kind) == 2) != g.b.has_value())
      throw SynthesisError("gate '" + g.output + "' has wrong operand count");
    for (const auto& r : reads(g)) {
      if (!nets.contains(r)) throw SynthesisError("undefined net '" + r + "'");
      if (auto it = driver.find(r); it != driver.end()) {
        ++indegree[i];
        users[it->second].push_back(i);
      }
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < net.gates.size(); ++i)
    if (indegree[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (auto u : users[i])
      if (--indegree[u] == 0) ready.insert(u);
  }
  if (order.size() != net.gates.size()) throw SynthesisError("cyclic netlist");

  std::map<std::string, std::size_t> pending_reads;
  for (const auto& g : net.gates)
    for (const auto& r : reads(g)) ++pending_reads[r];
  const std::set<std::string> outputs(net.outputs.begin(), net.outputs.end());
  for (const auto& o : net.outputs)
    if (!nets.contains(o)) throw SynthesisError("undefined output net '" + o + "'");

  std::map<std::string, std::string> location;  // live net -> register
  std::map<std::string, std::string> holder;    // register -> net it holds
  std::set<std::string> clobbered;
  for (const auto& in : net.inputs) location[in] = holder[in] = in;

  auto live = [&](const std::string& n) { return pending_reads[n] > 0 || outputs.contains(n); };

  CompiledNetlist out;
  std::set<std::string> used_work;
  for (auto gi : order) {
    const auto& g = net.gates[gi];
    std::vector<std::string> operand_regs;
    for (const auto& r : reads(g)) {
      if (clobbered.contains(r)) throw SynthesisError("net clobbered: '" + r + "'");
      operand_regs.push_back(location.at(r));
    }

    std::vector<std::string> work;
    for (const auto& w : workpool) {
      if (work.size() == gate_work_registers(g.kind)) break;
      auto h = holder.find(w);
      if (h != holder.end() && live(h->second)) continue;
      work.push_back(w);
    }
    if (work.size() < gate_work_registers(g.kind))
      throw SynthesisError("work pool exhausted at gate '" + g.output + "'");

    auto frag = synth_gate(g.kind, operand_regs[0],
                           operand_regs.size() > 1 ? std::optional(operand_regs[1]) : std::nullopt,
                           work);
    for (const auto& r : reads(g)) --pending_reads[r];
    for (const auto& reg : frag.clobbered) {
      if (std::find(workpool.begin(), workpool.end(), reg) != workpool.end())
        used_work.insert(reg);
      auto h = holder.find(reg);
      if (h == holder.end()) continue;
      if (live(h->second)) clobbered.insert(h->second);
      location.erase(h->second);
      holder.erase(h);
    }
    location[g.output] = frag.result();
    holder[frag.result()] = g.output;
    out.program.body.insert(out.program.body.end(), frag.body.begin(), frag.body.end());
  }

  for (const auto& o : net.outputs) {
    if (clobbered.contains(o) || !location.contains(o))
      throw SynthesisError("net clobbered: '" + o + "'");
    out.program.outputs.push_back(location.at(o));
  }
  out.program.registers = net.inputs;
  for (const auto& w : workpool)
    if (used_work.contains(w)) out.program.registers.push_back(w);
  out.program.inputs = net.inputs;
  for (const auto& g : net.gates)
    if (location.contains(g.output)) out.net_register[g.output] = location.at(g.output);

  auto diags = validate(out.program);
  if (has_errors(diags)) throw SynthesisError("compiled program invalid: " + to_string(diags[0]));
  return out;
}

// ---------------------------------------------------------------------------
// Adders

struct AdderRegisters {
  std::string a;
  std::string b;
  std::string carry;
  std::vector<std::string> work;
};

inline constexpr std::size_t kFullAdderWorkRegisters = 2;

/// One-bit full adder, 23 steps. The sum overwrites `a`; the carry register
/// is read as C_in and rewritten with C_out.
///
///   steps  1-9   XNOR prefix on (a, b):   m0 = NOT X, b = a OR b   (X = a XOR b)
///   steps 10-18  XNOR prefix on (m0, c), result into a:
///                a = XNOR(NOT X, c) = X XOR c, c = X IMP c
///   steps 19-23  AND of b and c into c:   c = (a OR b) AND (X IMP c)
///
/// The last line equals the majority function: when a = b the first factor
/// is a and X = 0; otherwise it is 1 and X IMP c reduces to c.
inline Fragment gen_full_adder_1bit(const AdderRegisters& regs) {
  if (regs.work.size() < kFullAdderWorkRegisters)
    throw SynthesisError("register budget exceeded: full-adder slice needs " +
                         std::to_string(kFullAdderWorkRegisters) + " work registers");
  const auto& [a, b, c, work] = regs;
  const auto& m0 = work[0];
  const auto& m1 = work[1];
  detail::require_distinct({a, b, c, m0, m1});

  auto body = detail::xnor_prefix(a, b, m0, m1);
  auto sum = detail::xnor_prefix(m0, c, a, m1);
  body.insert(body.end(), sum.begin(), sum.end());
  // {b IMP (c IMP 0)} IMP 0, with m1 as scratch and c as the destination.
  body.push_back(Instruction::False(m1));
  body.push_back(Instruction::Imply(c, m1));
  body.push_back(Instruction::Imply(b, m1));
  body.push_back(Instruction::False(c));
  body.push_back(Instruction::Imply(m1, c));
  return detail::make_fragment(std::move(body), {a, b, c}, {a, c});
}

struct AdderPlan {
  std::size_t width = 0;
  std::vector<std::string> a_bank;    // A0 is least significant
  std::vector<std::string> b_bank;
  std::string carry;                  // carry in before, carry out after
  std::vector<std::string> work;
  std::vector<std::string> sum_bank;  // where sum bit i lands (in place over A)
  std::size_t slice_steps = 0;
  std::size_t total_steps = 0;
  std::size_t total_registers = 0;
  Fragment slice;                     // bit-0 instance
};

struct AdderBuild {
  Program program;
  AdderPlan plan;
};

inline std::string adder_a_register(std::size_t i) { return "A" + std::to_string(i); }
inline std::string adder_b_register(std::size_t i) { return "B" + std::to_string(i); }
inline constexpr std::string_view kAdderCarryRegister = "C";

/// Bit-serial ripple adder: the slice repeated n times over the same carry
/// and work registers. Inputs A0.., B0.., C; outputs A0.. (sum) then C.
inline AdderBuild gen_adder_serial(std::size_t n) {
  if (n < 1) throw SynthesisError("width must be ≥ 1");
  AdderPlan plan;
  plan.width = n;
  plan.carry = std::string(kAdderCarryRegister);
  plan.work = {"M0", "M1"};
  for (std::size_t i = 0; i < n; ++i) {
    plan.a_bank.push_back(adder_a_register(i));
    plan.b_bank.push_back(adder_b_register(i));
  }
  plan.sum_bank = plan.a_bank;

  Program prog;
  prog.registers = plan.a_bank;
  prog.registers.insert(prog.registers.end(), plan.b_bank.begin(), plan.b_bank.end());
  prog.registers.push_back(plan.carry);
  prog.registers.insert(prog.registers.end(), plan.work.begin(), plan.work.end());
  prog.inputs = plan.a_bank;
  prog.inputs.insert(prog.inputs.end(), plan.b_bank.begin(), plan.b_bank.end());
  prog.inputs.push_back(plan.carry);
  prog.outputs = plan.sum_bank;
  prog.outputs.push_back(plan.carry);

  for (std::size_t i = 0; i < n; ++i) {
    auto slice = gen_full_adder_1bit({plan.a_bank[i], plan.b_bank[i], plan.carry, plan.work});
    if (i == 0) plan.slice = slice;
    prog.body.insert(prog.body.end(), slice.body.begin(), slice.body.end());
  }
  plan.slice_steps = plan.slice.steps();
  plan.total_steps = count_steps(prog);
  plan.total_registers = prog.registers.size();
  return {std::move(prog), std::move(plan)};
}

}  // namespace imply
