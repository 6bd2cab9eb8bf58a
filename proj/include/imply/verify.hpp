#pragma once

// Exhaustive equivalence checking against boolean oracles, plus step and
// register metrics compared with earlier IMPLY adder designs.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "imply/logic.hpp"
#include "imply/synthesis.hpp"

namespace imply {

class VerifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle: input levels (Program::inputs order) -> expected output levels
/// (Program::outputs order). Must be safe to call concurrently.
using Oracle = std::function<std::vector<LogicLevel>(std::span<const LogicLevel>)>;

struct Counterexample {
  std::vector<std::pair<std::string, LogicLevel>> inputs;
  std::vector<std::pair<std::string, LogicLevel>> expected;
  std::vector<std::pair<std::string, LogicLevel>> actual;

  friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

struct Verdict {
  bool pass = false;
  std::uint64_t cases = 0;  // full input space on pass, first failing case index + 1 otherwise
  std::optional<Counterexample> counterexample;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline constexpr std::size_t kMaxExhaustiveInputs = 24;

/// Input levels for case `index`, first input most significant, so case
/// order is lexicographic over the inputs.
inline void decode_case(std::uint64_t index, std::span<LogicLevel> levels) {
  const std::size_t k = levels.size();
  for (std::size_t j = 0; j < k; ++j) levels[j] = to_level((index >> (k - 1 - j)) & 1U);
}

/// Runs the program over every input assignment. Workers scan disjoint
/// contiguous ranges; the merge keeps the lowest failing index, so the
/// verdict does not depend on `threads`.
inline Verdict exhaustive_check(const Program& prog, const Oracle& oracle, unsigned threads = 0) {
  const std::size_t k = prog.inputs.size();
  if (k > kMaxExhaustiveInputs)
    throw VerifyError("input space too large: " + std::to_string(k) + " inputs (limit " +
                      std::to_string(kMaxExhaustiveInputs) + ")");
  const CompiledProgram compiled(prog);
  const std::uint64_t total = std::uint64_t{1} << k;
  const auto outs = compiled.output_indices();

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, total));
  constexpr auto kNone = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> first_fail(threads, kNone);

  auto scan = [&](unsigned w) {
    const std::uint64_t lo = total * w / threads;
    const std::uint64_t hi = total * (w + 1) / threads;
    std::vector<LogicLevel> in(k), regs(compiled.register_count());
    for (std::uint64_t i = lo; i < hi; ++i) {
      decode_case(i, in);
      compiled.run(in, regs);
      const auto expected = oracle(in);
      if (expected.size() != outs.size())
        throw VerifyError("oracle returned " + std::to_string(expected.size()) +
                          " outputs, program has " + std::to_string(outs.size()));
      for (std::size_t o = 0; o < outs.size(); ++o) {
        if (regs[outs[o]] != expected[o]) {
          first_fail[w] = i;
          return;
        }
      }
    }
  };

  if (threads == 1) {
    scan(0);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          scan(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Verdict v;
  const auto fail = *std::min_element(first_fail.begin(), first_fail.end());
  if (fail == kNone) {
    v.pass = true;
    v.cases = total;
    return v;
  }
  v.cases = fail + 1;
  std::vector<LogicLevel> in(k), regs(compiled.register_count());
  decode_case(fail, in);
  compiled.run(in, regs);
  const auto expected = oracle(in);
  Counterexample cx;
  for (std::size_t j = 0; j < k; ++j) cx.inputs.emplace_back(prog.inputs[j], in[j]);
  for (std::size_t o = 0; o < outs.size(); ++o) {
    cx.expected.emplace_back(prog.outputs[o], expected[o]);
    cx.actual.emplace_back(prog.outputs[o], regs[outs[o]]);
  }
  v.counterexample = std::move(cx);
  return v;
}

struct AdderResult {
  std::uint64_t sum = 0;
  unsigned cout = 0;
  friend bool operator==(const AdderResult&, const AdderResult&) = default;
};

/// (a + b + cin) split into its low `width` bits and the carry out.
inline AdderResult adder_oracle(std::uint64_t a, std::uint64_t b, unsigned cin, std::size_t width) {
  if (width < 1 || width > 62) throw VerifyError("adder width out of range");
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  if (a > mask || b > mask) throw VerifyError("adder operand exceeds width");
  const std::uint64_t total = a + b + (cin & 1U);
  return {total & mask, static_cast<unsigned>(total >> width)};
}

/// Oracle for a single gate over a one- or two-input program.
inline Oracle gate_oracle(GateKind kind) {
  return [kind](std::span<const LogicLevel> in) {
    const bool a = to_bool(in[0]);
    const bool b = in.size() > 1 && to_bool(in[1]);
    return std::vector<LogicLevel>{to_level(gate_function(kind, a, b))};
  };
}

/// Oracle for a program laid out like gen_adder_serial: inputs A0.., B0..
/// and the carry register in any order; outputs are the n sum bits (least
/// significant first) followed by the carry out.
inline Oracle adder_program_oracle(const Program& prog) {
  const std::size_t n = prog.outputs.size() - (prog.outputs.empty() ? 0 : 1);
  if (n < 1 || prog.inputs.size() != 2 * n + 1)
    throw VerifyError("adder oracle needs 2n+1 inputs and n+1 outputs, program has " +
                      std::to_string(prog.inputs.size()) + " inputs and " +
                      std::to_string(prog.outputs.size()) + " outputs");
  // Input position -> (bank, bit). bank 0 = A, 1 = B, 2 = carry.
  std::vector<std::pair<int, std::size_t>> role(prog.inputs.size(), {-1, 0});
  for (std::size_t j = 0; j < prog.inputs.size(); ++j) {
    const auto& name = prog.inputs[j];
    if (name == kAdderCarryRegister) {
      role[j] = {2, 0};
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (name == adder_a_register(i)) role[j] = {0, i};
      if (name == adder_b_register(i)) role[j] = {1, i};
    }
    if (role[j].first < 0)
      throw VerifyError("register '" + name + "' is not part of an adder layout");
  }
  return [role, n](std::span<const LogicLevel> in) {
    std::uint64_t a = 0, b = 0;
    unsigned cin = 0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      const std::uint64_t bit = to_bool(in[j]) ? 1 : 0;
      switch (role[j].first) {
        case 0: a |= bit << role[j].second; break;
        case 1: b |= bit << role[j].second; break;
        default: cin = static_cast<unsigned>(bit); break;
      }
    }
    const auto r = adder_oracle(a, b, cin, n);
    std::vector<LogicLevel> out(n + 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = to_level((r.sum >> i) & 1U);
    out[n] = to_level(r.cout != 0);
    return out;
  };
}

// ---------------------------------------------------------------------------
// Metrics

struct Baseline {
  std::string name;
  std::size_t steps = 0;
  std::size_t registers = 0;
};

/// Earlier 8-bit IMPLY full adders: 712 steps on 29 memristors, and 232
/// steps on 27 memristors.
inline const std::vector<Baseline>& reference_baselines() {
  static const std::vector<Baseline> kBaselines{{"prior_712", 712, 29}, {"prior_232", 232, 27}};
  return kBaselines;
}

struct BaselineComparison {
  std::string name;
  std::size_t steps = 0;
  std::size_t registers = 0;
  double improvement = 0.0;  // (baseline steps - steps) / baseline steps

  friend bool operator==(const BaselineComparison&, const BaselineComparison&) = default;
};

struct MetricsReport {
  std::size_t steps = 0;
  std::size_t registers = 0;
  std::size_t false_count = 0;
  std::size_t imply_count = 0;
  std::vector<BaselineComparison> baselines;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline MetricsReport metrics(const Program& prog) {
  MetricsReport m;
  m.registers = prog.registers.size();
  for (const auto& instr : prog.body) {
    if (instr.op == Op::False) ++m.false_count;
    if (instr.op == Op::Imply) ++m.imply_count;
  }
  m.steps = m.false_count + m.imply_count;
  for (const auto& b : reference_baselines()) {
    const double base = static_cast<double>(b.steps);
    m.baselines.push_back(
        {b.name, b.steps, b.registers, (base - static_cast<double>(m.steps)) / base});
  }
  return m;
}

}  // namespace imply
