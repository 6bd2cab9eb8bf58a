#pragma once

// Logical machine for FALSE/IMPLY microcode.
//
// Registers model memristors; a register holds logic 1 when its device sits
// at R_ON and logic 0 at R_OFF. FALSE and IMPLY are the computational
// primitives and each costs one step. LOAD is an input-initialization
// directive and costs nothing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace imply {

enum class LogicLevel : std::uint8_t { Zero = 0, One = 1 };

constexpr LogicLevel to_level(bool b) noexcept {
  return b ? LogicLevel::One : LogicLevel::Zero;
}
constexpr bool to_bool(LogicLevel v) noexcept { return v == LogicLevel::One; }
constexpr int to_int(LogicLevel v) noexcept { return static_cast<int>(v); }
constexpr LogicLevel operator!(LogicLevel v) noexcept {
  return to_level(!to_bool(v));
}

/// Material implication: p IMP q == (NOT p) OR q.
constexpr LogicLevel eval_imply(LogicLevel p, LogicLevel q) noexcept {
  return to_level(!to_bool(p) || to_bool(q));
}

class ExecutionError : public std::runtime_error {
 public:
  ExecutionError(std::string reg, const std::string& what)
      : std::runtime_error(what), reg_(std::move(reg)) {}
  const std::string& reg() const noexcept { return reg_; }

 private:
  std::string reg_;
};

enum class Op : std::uint8_t { False, Imply, Load };

struct Instruction {
  Op op = Op::False;
  std::string target;
  std::string source;  // IMPLY only
  LogicLevel value = LogicLevel::Zero;  // LOAD only

  static Instruction False(std::string target) {
    return {Op::False, std::move(target), {}, LogicLevel::Zero};
  }
  static Instruction Imply(std::string source, std::string target) {
    return {Op::Imply, std::move(target), std::move(source), LogicLevel::Zero};
  }
  static Instruction Load(std::string target, LogicLevel value) {
    return {Op::Load, std::move(target), {}, value};
  }

  bool counts_as_step() const noexcept { return op != Op::Load; }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Canonical single-line text of an instruction, e.g. "IMPLY P S".
inline std::string to_string(const Instruction& instr) {
  switch (instr.op) {
    case Op::False:
      return "FALSE " + instr.target;
    case Op::Imply:
      return "IMPLY " + instr.source + " " + instr.target;
    case Op::Load:
      return "LOAD " + instr.target + (to_bool(instr.value) ? " 1" : " 0");
  }
  return {};
}

struct Program {
  std::vector<std::string> registers;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Instruction> body;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Number of FALSE plus IMPLY instructions. LOADs are initialization.
inline std::size_t count_steps(const Program& prog) {
  return static_cast<std::size_t>(
      std::count_if(prog.body.begin(), prog.body.end(),
                    [](const Instruction& i) { return i.counts_as_step(); }));
}

/// Total map from declared register names to levels. Unknown names throw.
class RegisterFile {
 public:
  RegisterFile() = default;
  explicit RegisterFile(std::span<const std::string> names)
      : names_(names.begin(), names.end()), levels_(names.size()) {
    for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
  }
  RegisterFile(std::initializer_list<std::pair<std::string, LogicLevel>> init) {
    for (const auto& [name, level] : init) {
      index_.emplace(name, names_.size());
      names_.push_back(name);
      levels_.push_back(level);
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const LogicLevel> levels() const noexcept { return levels_; }

  bool contains(std::string_view name) const {
    return index_.find(std::string(name)) != index_.end();
  }
  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
      throw ExecutionError(std::string(name),
                           "unknown register '" + std::string(name) + "'");
    return it->second;
  }
  LogicLevel get(std::string_view name) const { return levels_[index_of(name)]; }
  void set(std::string_view name, LogicLevel v) { levels_[index_of(name)] = v; }
  LogicLevel at(std::size_t i) const { return levels_.at(i); }
  void set_at(std::size_t i, LogicLevel v) { levels_.at(i) = v; }

  friend bool operator==(const RegisterFile& a, const RegisterFile& b) {
    return a.names_ == b.names_ && a.levels_ == b.levels_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<LogicLevel> levels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Applies one instruction. Only the target register changes.
inline RegisterFile exec_instruction(RegisterFile state, const Instruction& instr) {
  switch (instr.op) {
    case Op::False:
      state.set(instr.target, LogicLevel::Zero);
      break;
    case Op::Imply: {
      const LogicLevel p = state.get(instr.source);
      const LogicLevel q = state.get(instr.target);
      state.set(instr.target, eval_imply(p, q));
      break;
    }
    case Op::Load:
      state.set(instr.target, instr.value);
      break;
  }
  return state;
}

using Assignment = std::map<std::string, LogicLevel>;

struct TraceEntry {
  std::size_t index = 0;
  Instruction instr;
  RegisterFile post;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RunResult {
  RegisterFile final;
  std::vector<TraceEntry> trace;
  std::size_t steps = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

namespace detail {

inline void check_assignment(const Program& prog, const Assignment& inputs) {
  for (const auto& in : prog.inputs)
    if (!inputs.contains(in))
      throw ExecutionError(in, "missing input assignment for register '" + in + "'");
  for (const auto& [name, level] : inputs)
    if (std::find(prog.inputs.begin(), prog.inputs.end(), name) == prog.inputs.end())
      throw ExecutionError(name, "register '" + name + "' is not a program input");
}

}  // namespace detail

/// Index-resolved form of a program for repeated execution. Registers are
/// addressed by their position in Program::registers.
class CompiledProgram {
 public:
  struct Op3 {
    Op op;
    std::uint32_t target;
    std::uint32_t source;
    LogicLevel value;
  };

  explicit CompiledProgram(const Program& prog) : file_(prog.registers) {
    ops_.reserve(prog.body.size());
    for (const auto& instr : prog.body) {
      Op3 o{instr.op, static_cast<std::uint32_t>(file_.index_of(instr.target)), 0,
            instr.value};
      if (instr.op == Op::Imply) {
        o.source = static_cast<std::uint32_t>(file_.index_of(instr.source));
        if (o.source == o.target)
          throw ExecutionError(instr.target, "IMPLY operands must differ");
      }
      ops_.push_back(o);
    }
    for (const auto& in : prog.inputs) inputs_.push_back(file_.index_of(in));
    for (const auto& out : prog.outputs) outputs_.push_back(file_.index_of(out));
  }

  std::size_t register_count() const noexcept { return file_.size(); }
  std::span<const std::size_t> input_indices() const noexcept { return inputs_; }
  std::span<const std::size_t> output_indices() const noexcept { return outputs_; }

  /// Runs from an all-zero file with the given input levels (in
  /// Program::inputs order). `scratch` must hold register_count() entries.
  void run(std::span<const LogicLevel> input_levels, std::span<LogicLevel> scratch) const {
    std::fill(scratch.begin(), scratch.end(), LogicLevel::Zero);
    for (std::size_t i = 0; i < inputs_.size(); ++i) scratch[inputs_[i]] = input_levels[i];
    for (const auto& o : ops_) {
      switch (o.op) {
        case Op::False:
          scratch[o.target] = LogicLevel::Zero;
          break;
        case Op::Imply:
          scratch[o.target] = eval_imply(scratch[o.source], scratch[o.target]);
          break;
        case Op::Load:
          scratch[o.target] = o.value;
          break;
      }
    }
  }

 private:
  RegisterFile file_;
  std::vector<Op3> ops_;
  std::vector<std::size_t> inputs_;
  std::vector<std::size_t> outputs_;
};

/// Executes the body in order from an all-zero register file overlaid with
/// the input assignment. One trace entry per instruction.
inline RunResult run_program(const Program& prog, const Assignment& inputs) {
  detail::check_assignment(prog, inputs);
  RegisterFile state(prog.registers);
  for (const auto& [name, level] : inputs) state.set(name, level);

  RunResult result;
  result.trace.reserve(prog.body.size());
  for (std::size_t i = 0; i < prog.body.size(); ++i) {
    const auto& instr = prog.body[i];
    if (instr.op == Op::Imply && instr.source == instr.target)
      throw ExecutionError(instr.target, "IMPLY operands must differ");
    state = exec_instruction(std::move(state), instr);
    if (instr.counts_as_step()) ++result.steps;
    result.trace.push_back({i, instr, state});
  }
  result.final = std::move(state);
  return result;
}

}  // namespace imply
