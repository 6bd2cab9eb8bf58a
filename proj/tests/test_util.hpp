#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imply/imply.hpp"

namespace imply::testing_util {

// Three-register NAND: FALSE S, P IMP S, Q IMP S.
inline const char* kNandText =
    ".regs P Q S\n"
    ".in P Q\n"
    ".out S\n"
    "FALSE S\n"
    "IMPLY P S\n"
    "IMPLY Q S\n";

/// Converts a comma-separated step listing such as
/// "FALSE(M0), A IMP M0, ..." into canonical instruction lines.
inline std::string listing_to_ir(const std::string& listing) {
  std::string out;
  std::stringstream ss(listing);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \n");
      auto e = s.find_last_not_of(" \n");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    item = trim(item);
    if (item.rfind("FALSE(", 0) == 0) {
      out += "FALSE " + trim(item.substr(6, item.size() - 7)) + "\n";
    } else {
      auto pos = item.find(" IMP ");
      out += "IMPLY " + trim(item.substr(0, pos)) + " " + trim(item.substr(pos + 5)) + "\n";
    }
  }
  return out;
}

inline const char* kXorV1Listing =
    "FALSE(M0), A IMP M0, FALSE(M1), B IMP M1, A IMP B, M0 IMP M1, FALSE(M0), M1 IMP M0, B IMP M0";
inline const char* kXorV2Listing =
    "FALSE(M0), A IMP M0, FALSE(M1), B IMP M1, M0 IMP B, A IMP M1, FALSE(M0), M1 IMP M0, "
    "B IMP M0, FALSE(M1), M0 IMP M1";

inline Program xor_program(const Fragment& f) {
  Program p;
  p.registers = {"A", "B", "M0", "M1"};
  p.inputs = {"A", "B"};
  p.outputs = {f.result()};
  p.body = f.body;
  return p;
}

inline Program nand_program() { return *parse_program(kNandText).program; }

inline Assignment assign(std::initializer_list<std::pair<const char*, int>> kv) {
  Assignment a;
  for (const auto& [k, v] : kv) a[k] = to_level(v != 0);
  return a;
}

/// Random valid program, for round-trip properties.
inline Program random_program(std::mt19937& rng) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_";
  Program p;
  const std::size_t nregs = pick(8);
  std::set<std::string> used;
  while (p.registers.size() < nregs) {
    std::string name(1, alphabet[pick(52)]);
    const std::size_t extra = pick(5);
    for (std::size_t i = 0; i < extra; ++i) name += alphabet[pick(63)];
    if (used.insert(name).second) p.registers.push_back(name);
  }
  if (p.registers.empty()) return p;
  for (const auto& r : p.registers) {
    if (pick(3) == 0) p.inputs.push_back(r);
  }
  for (const auto& r : p.registers) {
    if (pick(3) == 0) p.outputs.push_back(r);
  }
  const std::size_t loads = pick(3);
  for (std::size_t i = 0; i < loads; ++i)
    p.body.push_back(Instruction::Load(p.registers[pick(p.registers.size())], to_level(pick(2))));
  const std::size_t ops = pick(20);
  for (std::size_t i = 0; i < ops; ++i) {
    if (p.registers.size() < 2 || pick(3) == 0) {
      p.body.push_back(Instruction::False(p.registers[pick(p.registers.size())]));
    } else {
      auto a = pick(p.registers.size());
      auto b = pick(p.registers.size() - 1);
      if (b >= a) ++b;
      p.body.push_back(Instruction::Imply(p.registers[a], p.registers[b]));
    }
  }
  return p;
}

}  // namespace imply::testing_util
