#pragma once

// JSON report for verification runs:
//
//   {version, program,
//    metrics: {steps, registers, false_count, imply_count,
//              baselines: [{name, steps, registers, improvement}]},
//    verdict: {pass, cases, counterexample?: {inputs, expected, actual}},
//    analog?: {write_time_s, max_drift, agreement}}
//
// Keys are emitted in the order above so reports are byte-stable.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imply/logic.hpp"
#include "imply/verify.hpp"

namespace imply {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalogSummary {
  double write_time_s = 0.0;
  double max_drift = 0.0;
  bool agreement = false;

  friend bool operator==(const AnalogSummary&, const AnalogSummary&) = default;
};

struct ReportDocument {
  std::string version = kToolVersion;
  std::string program;
  MetricsReport metrics;
  Verdict verdict;
  std::optional<AnalogSummary> analog;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json levels_to_json(const std::vector<std::pair<std::string, LogicLevel>>& v) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, level] : v) j[name] = to_int(level);
  return j;
}

inline std::vector<std::pair<std::string, LogicLevel>> levels_from_json(const ordered_json& j) {
  std::vector<std::pair<std::string, LogicLevel>> v;
  for (auto it = j.begin(); it != j.end(); ++it)
    v.emplace_back(it.key(), to_level(it.value().get<int>() != 0));
  return v;
}

}  // namespace detail

inline ordered_json to_json(const ReportDocument& r) {
  ordered_json j;
  j["version"] = r.version;
  j["program"] = r.program;

  ordered_json m;
  m["steps"] = r.metrics.steps;
  m["registers"] = r.metrics.registers;
  m["false_count"] = r.metrics.false_count;
  m["imply_count"] = r.metrics.imply_count;
  m["baselines"] = ordered_json::array();
  for (const auto& b : r.metrics.baselines) {
    ordered_json e;
    e["name"] = b.name;
    e["steps"] = b.steps;
    e["registers"] = b.registers;
    e["improvement"] = b.improvement;
    m["baselines"].push_back(std::move(e));
  }
  j["metrics"] = std::move(m);

  ordered_json v;
  v["pass"] = r.verdict.pass;
  v["cases"] = r.verdict.cases;
  if (r.verdict.counterexample) {
    const auto& cx = *r.verdict.counterexample;
    ordered_json c;
    c["inputs"] = detail::levels_to_json(cx.inputs);
    c["expected"] = detail::levels_to_json(cx.expected);
    c["actual"] = detail::levels_to_json(cx.actual);
    v["counterexample"] = std::move(c);
  }
  j["verdict"] = std::move(v);

  if (r.analog) {
    ordered_json a;
    a["write_time_s"] = r.analog->write_time_s;
    a["max_drift"] = r.analog->max_drift;
    a["agreement"] = r.analog->agreement;
    j["analog"] = std::move(a);
  }
  return j;
}

inline ReportDocument report_from_json(const ordered_json& j) {
  ReportDocument r;
  r.version = j.at("version").get<std::string>();
  r.program = j.at("program").get<std::string>();
  const auto& m = j.at("metrics");
  r.metrics.steps = m.at("steps").get<std::size_t>();
  r.metrics.registers = m.at("registers").get<std::size_t>();
  r.metrics.false_count = m.at("false_count").get<std::size_t>();
  r.metrics.imply_count = m.at("imply_count").get<std::size_t>();
  for (const auto& b : m.at("baselines"))
    r.metrics.baselines.push_back({b.at("name").get<std::string>(), b.at("steps").get<std::size_t>(),
                                   b.at("registers").get<std::size_t>(),
                                   b.at("improvement").get<double>()});
  const auto& v = j.at("verdict");
  r.verdict.pass = v.at("pass").get<bool>();
  r.verdict.cases = v.at("cases").get<std::uint64_t>();
  if (v.contains("counterexample")) {
    const auto& c = v.at("counterexample");
    r.verdict.counterexample = Counterexample{detail::levels_from_json(c.at("inputs")),
                                              detail::levels_from_json(c.at("expected")),
                                              detail::levels_from_json(c.at("actual"))};
  }
  if (j.contains("analog")) {
    const auto& a = j.at("analog");
    r.analog = AnalogSummary{a.at("write_time_s").get<double>(), a.at("max_drift").get<double>(),
                             a.at("agreement").get<bool>()};
  }
  return r;
}

inline std::string serialize_report(const ReportDocument& r) { return to_json(r).dump(2) + "\n"; }

inline ReportDocument parse_report(const std::string& text) {
  return report_from_json(ordered_json::parse(text));
}

}  // namespace imply
