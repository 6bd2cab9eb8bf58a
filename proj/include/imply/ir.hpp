#pragma once

// `.imply` text format.
//
//   .regs <id>+        declare registers
//   .in <id>+          declared registers that receive input assignments
//   .out <id>+         declared registers read as results
//   LOAD <id> <0|1>    initialization, must precede FALSE/IMPLY
//   FALSE <id>
//   IMPLY <src> <dst>
//
// One statement per line, `#` starts a comment. Mnemonics are uppercase,
// register names are case-sensitive and match [A-Za-z][A-Za-z0-9_]*.

#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "imply/logic.hpp"

namespace imply {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_error() const noexcept { return severity == Severity::Error; }
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::string to_string(const Diagnostic& d) {
  return std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
         (d.is_error() ? "error: " : "warning: ") + d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.is_error()) return true;
  return false;
}

struct ParseResult {
  std::optional<Program> program;  // present iff no error diagnostics
  std::vector<Diagnostic> diagnostics;
};

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

// Shared by the parser and validate(). Locations point into the source when
// parsing, or into the canonical formatting when validating a built program.
class Checker {
 public:
  explicit Checker(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void error(std::string msg, std::size_t line, std::size_t col) {
    diags_.push_back({Severity::Error, std::move(msg), line, col});
  }
  void warning(std::string msg, std::size_t line, std::size_t col) {
    diags_.push_back({Severity::Warning, std::move(msg), line, col});
  }

  bool declare(const std::string& name, std::size_t line, std::size_t col) {
    if (!is_identifier(name)) {
      error("invalid register name '" + name + "'", line, col);
      return false;
    }
    if (!declared_.insert(name).second) {
      error("register '" + name + "' declared twice", line, col);
      return false;
    }
    return true;
  }

  bool use(const std::string& name, std::size_t line, std::size_t col) {
    if (!declared_.contains(name)) {
      error("undeclared register '" + name + "'", line, col);
      return false;
    }
    return true;
  }

  bool mark_unique(std::set<std::string>& seen, const std::string& name,
                   const char* directive, std::size_t line, std::size_t col) {
    if (!seen.insert(name).second) {
      error("register '" + name + "' listed twice in " + directive, line, col);
      return false;
    }
    return true;
  }

 private:
  std::vector<Diagnostic>& diags_;
  std::set<std::string> declared_;
};

// Output registers that are neither inputs nor written anywhere stay at the
// all-zero initial level.
inline void check_outputs_written(const Program& prog, Checker& check,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& out_locs) {
  std::set<std::string> written(prog.inputs.begin(), prog.inputs.end());
  for (const auto& instr : prog.body) written.insert(instr.target);
  for (std::size_t i = 0; i < prog.outputs.size(); ++i)
    if (!written.contains(prog.outputs[i]))
      check.warning("output register '" + prog.outputs[i] + "' is never written",
                    out_locs[i].first, out_locs[i].second);
}

}  // namespace detail

inline ParseResult parse_program(std::string_view text) {
  ParseResult result;
  detail::Checker check(result.diagnostics);
  Program prog;
  bool saw_compute = false;
  bool saw_instruction = false;
  std::set<std::string> in_seen, out_seen;
  std::vector<std::pair<std::size_t, std::size_t>> out_locs;

  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;

    const auto toks = detail::tokenize(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string head(toks[0].text);
    const auto args = std::span(toks).subspan(1);

    auto require_args = [&](std::size_t n) {
      if (args.size() == n) return true;
      check.error(head + " expects " + std::to_string(n) + " operand" + (n == 1 ? "" : "s") +
                      ", got " + std::to_string(args.size()),
                  line_no, toks[0].column);
      return false;
    };

    if (head == ".regs" || head == ".in" || head == ".out") {
      if (saw_instruction) {
        check.error("directive " + head + " after instructions", line_no, toks[0].column);
      } else if (args.empty()) {
        check.error(head + " expects at least one register", line_no, toks[0].column);
      } else if (head == ".regs") {
        for (const auto& t : args) {
          std::string name(t.text);
          if (check.declare(name, line_no, t.column)) prog.registers.push_back(name);
        }
      } else {
        bool is_in = head == ".in";
        for (const auto& t : args) {
          std::string name(t.text);
          if (!check.use(name, line_no, t.column)) continue;
          if (!check.mark_unique(is_in ? in_seen : out_seen, name, head.c_str(), line_no,
                                 t.column))
            continue;
          if (is_in) {
            prog.inputs.push_back(name);
          } else {
            prog.outputs.push_back(name);
            out_locs.emplace_back(line_no, t.column);
          }
        }
      }
    } else if (head == "LOAD") {
      saw_instruction = true;
      if (saw_compute)
        check.error("LOAD after FALSE/IMPLY", line_no, toks[0].column);
      if (require_args(2)) {
        std::string name(args[0].text);
        bool ok = check.use(name, line_no, args[0].column);
        if (args[1].text != "0" && args[1].text != "1") {
          check.error("LOAD value must be 0 or 1", line_no, args[1].column);
          ok = false;
        }
        if (ok) prog.body.push_back(Instruction::Load(name, to_level(args[1].text == "1")));
      }
    } else if (head == "FALSE") {
      saw_instruction = saw_compute = true;
      if (require_args(1)) {
        std::string name(args[0].text);
        if (check.use(name, line_no, args[0].column))
          prog.body.push_back(Instruction::False(name));
      }
    } else if (head == "IMPLY") {
      saw_instruction = saw_compute = true;
      if (require_args(2)) {
        std::string src(args[0].text), dst(args[1].text);
        bool ok = check.use(src, line_no, args[0].column);
        ok = check.use(dst, line_no, args[1].column) && ok;
        if (src == dst) {
          check.error("IMPLY operands must differ", line_no, args[1].column);
          ok = false;
        }
        if (ok) prog.body.push_back(Instruction::Imply(src, dst));
      }
    } else {
      check.error("unknown mnemonic '" + head + "'", line_no, toks[0].column);
    }
    if (end == text.size()) break;
  }

  detail::check_outputs_written(prog, check, out_locs);
  if (!has_errors(result.diagnostics)) result.program = std::move(prog);
  return result;
}

/// Canonical text: .regs/.in/.out (empty lists omitted), then the body in
/// order. Every line ends with '\n'.
inline std::string format_program(const Program& prog) {
  std::string out;
  auto directive = [&](const char* name, const std::vector<std::string>& regs) {
    if (regs.empty()) return;
    out += name;
    for (const auto& r : regs) {
      out += ' ';
      out += r;
    }
    out += '\n';
  };
  directive(".regs", prog.registers);
  directive(".in", prog.inputs);
  directive(".out", prog.outputs);
  for (const auto& instr : prog.body) {
    out += to_string(instr);
    out += '\n';
  }
  return out;
}

/// Re-checks every Program invariant. Locations refer to the program's
/// canonical formatting (format_program).
inline std::vector<Diagnostic> validate(const Program& prog) {
  std::vector<Diagnostic> diags;
  detail::Checker check(diags);
  std::size_t line = 0;

  // Column of the k-th token of a directive line in canonical form.
  auto column_of = [](const char* head, const std::vector<std::string>& regs, std::size_t k) {
    std::size_t col = std::string_view(head).size() + 2;
    for (std::size_t i = 0; i < k; ++i) col += regs[i].size() + 1;
    return col;
  };

  if (!prog.registers.empty()) {
    ++line;
    for (std::size_t i = 0; i < prog.registers.size(); ++i)
      check.declare(prog.registers[i], line, column_of(".regs", prog.registers, i));
  }
  std::set<std::string> in_seen, out_seen;
  if (!prog.inputs.empty()) {
    ++line;
    for (std::size_t i = 0; i < prog.inputs.size(); ++i) {
      auto col = column_of(".in", prog.inputs, i);
      if (check.use(prog.inputs[i], line, col))
        check.mark_unique(in_seen, prog.inputs[i], ".in", line, col);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out_locs;
  if (!prog.outputs.empty()) {
    ++line;
    for (std::size_t i = 0; i < prog.outputs.size(); ++i) {
      auto col = column_of(".out", prog.outputs, i);
      out_locs.emplace_back(line, col);
      if (check.use(prog.outputs[i], line, col))
        check.mark_unique(out_seen, prog.outputs[i], ".out", line, col);
    }
  }

  bool saw_compute = false;
  for (const auto& instr : prog.body) {
    ++line;
    switch (instr.op) {
      case Op::Load:
        if (saw_compute) check.error("LOAD after FALSE/IMPLY", line, 1);
        check.use(instr.target, line, 6);
        if (in_seen.contains(instr.target))
          check.warning("LOAD overrides input register '" + instr.target + "'", line, 6);
        break;
      case Op::False:
        saw_compute = true;
        check.use(instr.target, line, 7);
        break;
      case Op::Imply:
        saw_compute = true;
        check.use(instr.source, line, 7);
        check.use(instr.target, line, 8 + instr.source.size());
        if (instr.source == instr.target)
          check.error("IMPLY operands must differ", line, 8 + instr.source.size());
        break;
    }
  }
  detail::check_outputs_written(prog, check, out_locs);
  return diags;
}

}  // namespace imply
