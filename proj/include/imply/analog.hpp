#pragma once

// Linear ion drift memristors in the two-device IMPLY cell.
//
// A device's state is the normalized dopant position x = w/D in [0, 1] with
// memristance M(x) = R_ON x + R_OFF (1 - x). Current entering the doped
// side moves the state as dx/dt = (mu_v R_ON / D^2) i. The IMPLY cell drives
// P with V_cond and Q with V_set; both meet at a common node tied to ground
// through R_G.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "imply/ir.hpp"
#include "imply/logic.hpp"

namespace imply::analog {

class AnalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CircuitParams {
  double r_on = 1e3;
  double r_off = 100e3;
  double r_g = 10e3;
  double v_set = 1.0;
  double v_cond = 0.5;
  double v_clear = -1.0;
  double length = 10e-9;     // D, metres
  double mobility = 1e-14;   // mu_v, m^2/(V s)
  double pulse_width = 0.0;  // seconds; 0 until calibrated
  double dt = 0.0;           // integration step; 0 until calibrated
  double read_threshold = 10e3;

  /// dx/dt per ampere.
  double drift_coefficient() const { return mobility * r_on / (length * length); }

  void validate() const {
    auto fail = [](const std::string& m) { throw AnalogError("invalid circuit parameters: " + m); };
    for (double v : {r_on, r_off, r_g, v_set, v_cond, v_clear, length, mobility, pulse_width, dt,
                     read_threshold})
      if (!std::isfinite(v)) fail("non-finite value");
    if (!(r_on > 0 && r_on < read_threshold && read_threshold < r_off))
      fail("need 0 < R_ON < read_threshold < R_OFF");
    if (!(r_g > 0)) fail("need R_G > 0");
    if (!(std::abs(v_cond) < std::abs(v_set))) fail("need |V_cond| < |V_set|");
    if (!(length > 0 && mobility > 0)) fail("need D > 0 and mu_v > 0");
    if (!(dt > 0 && dt <= pulse_width)) fail("need 0 < dt <= pulse_width");
  }
};

/// Geometric mean of the rails, symmetric in log-resistance.
inline double default_read_threshold(const CircuitParams& p) { return std::sqrt(p.r_on * p.r_off); }

struct DeviceState {
  double x = 0.0;
};

inline double clamp_state(double x) { return std::clamp(x, 0.0, 1.0); }

inline double memristance(DeviceState dev, const CircuitParams& p) {
  const double x = clamp_state(dev.x);
  return p.r_on * x + p.r_off * (1.0 - x);
}

/// Logic 1 iff memristance is strictly below the read threshold.
inline LogicLevel readout(DeviceState dev, const CircuitParams& p) {
  return to_level(memristance(dev, p) < p.read_threshold);
}

inline double state_for_level(LogicLevel v) { return to_bool(v) ? 1.0 : 0.0; }

// ---------------------------------------------------------------------------
// Cell

struct CellSolution {
  double node_v = 0.0;
  double drop_p = 0.0;  // V_cond - V_n
  double drop_q = 0.0;  // V_set - V_n
  double current_p = 0.0;
  double current_q = 0.0;
  double current_g = 0.0;  // node to ground through R_G
};

inline CellSolution solve_cell(double rp, double rq, const CircuitParams& p) {
  CellSolution s;
  s.node_v = (p.v_cond / rp + p.v_set / rq) / (1.0 / rp + 1.0 / rq + 1.0 / p.r_g);
  s.drop_p = p.v_cond - s.node_v;
  s.drop_q = p.v_set - s.node_v;
  s.current_p = s.drop_p / rp;
  s.current_q = s.drop_q / rq;
  s.current_g = s.node_v / p.r_g;
  return s;
}

/// Initial (P, Q) states for the four IMPLY truth-table cases.
inline std::array<double, 2> case_states(int case_id) {
  switch (case_id) {
    case 1: return {0.0, 0.0};
    case 2: return {0.0, 1.0};
    case 3: return {1.0, 0.0};
    case 4: return {1.0, 1.0};
    default: throw AnalogError("invalid IMPLY case " + std::to_string(case_id));
  }
}

/// Closed-form cell voltages for each case at unswitched resistances.
/// Cases 1 and 4 equal the common-node voltage exactly. Cases 2 and 3 are
/// approximations of the voltage across Q (it is about 0 and about V_cond).
inline double closed_form_check(int case_id, const CircuitParams& p) {
  switch (case_id) {
    case 1: return p.r_g / (p.r_off + 2 * p.r_g) * (p.v_set + p.v_cond);
    case 2: return p.v_set - p.r_on / p.r_off * (p.r_off + p.r_g) / (p.r_on + 2 * p.r_g) * p.v_set;
    case 3: return p.r_g / (p.r_on + p.r_g) * p.v_cond;
    case 4: return p.r_g / (p.r_on + 2 * p.r_g) * (p.v_set + p.v_cond);
    default: throw AnalogError("invalid IMPLY case " + std::to_string(case_id));
  }
}

/// The nodal quantity each closed form describes: the common-node voltage
/// for cases 1 and 4, the drop across Q for cases 2 and 3.
inline double closed_form_counterpart(int case_id, const CircuitParams& p) {
  const auto [xp, xq] = case_states(case_id);
  const auto s = solve_cell(memristance({xp}, p), memristance({xq}, p), p);
  return (case_id == 1 || case_id == 4) ? s.node_v : s.drop_q;
}

// ---------------------------------------------------------------------------
// Integration

/// Classic fixed-step RK4 on N device states; states are clamped to [0, 1]
/// after every step and before every derivative evaluation.
template <std::size_t N, class Deriv>
std::array<double, N> rk4_step(const std::array<double, N>& x, double t, double h, Deriv&& f) {
  auto clamped = [](std::array<double, N> s) {
    for (auto& v : s) v = clamp_state(v);
    return s;
  };
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const auto k1 = f(clamped(x), t);
  const auto k2 = f(clamped(axpy(x, h / 2, k1)), t + h / 2);
  const auto k3 = f(clamped(axpy(x, h / 2, k2)), t + h / 2);
  const auto k4 = f(clamped(axpy(x, h, k3)), t + h);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = clamp_state(x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]));
    if (!std::isfinite(out[i])) throw AnalogError("non-finite device state during integration");
  }
  return out;
}

inline std::size_t step_count(double duration, double dt) {
  if (!(duration > 0) || !std::isfinite(duration)) throw AnalogError("pulse duration must be > 0");
  if (!(dt > 0)) throw AnalogError("integration step must be > 0");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
}

/// Integrates one device for `duration` seconds under a current that may
/// depend on the device's own state and time.
inline DeviceState integrate_pulse(DeviceState dev,
                                   const std::function<double(double x, double t)>& current,
                                   double duration, const CircuitParams& p) {
  const std::size_t n = step_count(duration, p.dt);
  const double h = duration / static_cast<double>(n);
  const double k = p.drift_coefficient();
  std::array<double, 1> x{clamp_state(dev.x)};
  auto f = [&](const std::array<double, 1>& s, double t) {
    return std::array<double, 1>{k * current(s[0], t)};
  };
  for (std::size_t i = 0; i < n; ++i) x = rk4_step<1>(x, static_cast<double>(i) * h, h, f);
  return {x[0]};
}

/// Current through a device driven alone by `volts` in series with R_G.
inline std::function<double(double, double)> series_drive(double volts, const CircuitParams& p) {
  return [volts, p](double x, double) { return volts / (memristance({x}, p) + p.r_g); };
}

/// Co-integrates P and Q through one IMPLY pulse. `steps` fixed-size steps.
template <class Sample>
std::array<double, 2> integrate_cell(std::array<double, 2> x, double duration, std::size_t steps,
                                     const CircuitParams& p, Sample&& on_sample) {
  const double h = duration / static_cast<double>(steps);
  const double k = p.drift_coefficient();
  auto f = [&](const std::array<double, 2>& s, double) {
    const auto c = solve_cell(memristance({s[0]}, p), memristance({s[1]}, p), p);
    return std::array<double, 2>{k * c.current_p, k * c.current_q};
  };
  for (std::size_t i = 0; i < steps; ++i) {
    x = rk4_step<2>(x, static_cast<double>(i) * h, h, f);
    on_sample(static_cast<double>(i + 1) * h, x);
  }
  return x;
}

inline constexpr std::size_t kStepsPerPulse = 1000;

/// Shortest case-1 pulse that takes Q from R_OFF to at most 1.01 R_ON,
/// bracketed by doubling and then bisected to 0.1% relative width. Each
/// candidate is integrated with kStepsPerPulse steps.
inline double calibrate_write_time(const CircuitParams& params) {
  CircuitParams p = params;
  if (!(p.r_on > 0 && p.r_off > p.r_on && p.r_g > 0 && p.length > 0 && p.mobility > 0))
    throw AnalogError("invalid circuit parameters for calibration");
  auto switches = [&](double duration) {
    auto x = integrate_cell({0.0, 0.0}, duration, kStepsPerPulse, p, [](double, const auto&) {});
    return memristance({x[1]}, p) <= 1.01 * p.r_on;
  };
  double hi = p.length * p.length * p.r_off / (p.mobility * p.r_on) * 1e-3;
  double lo = 0.0;
  constexpr int kMaxIterations = 200;
  int it = 0;
  while (!switches(hi)) {
    lo = hi;
    hi *= 2;
    if (++it > 80) throw AnalogError("write-time calibration did not converge: Q never switches");
  }
  while ((hi - lo) > 1e-3 * hi) {
    if (++it > kMaxIterations) throw AnalogError("write-time calibration did not converge");
    const double mid = 0.5 * (lo + hi);
    (switches(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Copy of `p` with pulse_width set to the calibrated write time and dt to
/// pulse_width / kStepsPerPulse.
inline CircuitParams with_calibrated_pulse(CircuitParams p) {
  p.pulse_width = calibrate_write_time(p);
  p.dt = p.pulse_width / static_cast<double>(kStepsPerPulse);
  return p;
}

// ---------------------------------------------------------------------------
// Program execution

struct TraceSample {
  double time = 0.0;
  double node_v = 0.0;
  std::vector<double> x;  // one per device
};

struct TraceBoundary {
  std::size_t sample = 0;  // index of the first sample of this pulse
  std::size_t step = 0;    // 1-based pulse number
  std::string instruction;
};

struct AnalogTrace {
  std::vector<std::string> devices;
  std::vector<TraceSample> samples;
  std::vector<TraceBoundary> boundaries;
};

struct DriftRecord {
  std::size_t step = 0;
  std::string instruction;
  std::vector<double> distance;  // |x - nominal rail| per device
};

struct DriftReport {
  std::vector<DriftRecord> records;
  double max_drift = 0.0;
};

struct AnalogRun {
  std::vector<std::string> devices;
  std::vector<double> final_x;
  RegisterFile readouts;
  AnalogTrace trace;
  DriftReport drift;

  double final_memristance(const std::string& reg, const CircuitParams& p) const {
    return memristance({final_x.at(readouts.index_of(reg))}, p);
  }
};

struct AnalogOptions {
  bool record_trace = true;
};

/// Runs the program pulse by pulse. Inputs are written first (in
/// Program::inputs order) as LOAD pulses; LOAD 1 applies V_set, LOAD 0 and
/// FALSE apply V_clear to the device alone through R_G; IMPLY drives the
/// two-device cell for one pulse width.
inline AnalogRun execute_analog(const Program& prog, const Assignment& inputs,
                                const CircuitParams& p, AnalogOptions opts = {}) {
  p.validate();
  for (const auto& d : validate(prog))
    if (d.is_error()) throw AnalogError("program invalid: " + d.message);
  detail::check_assignment(prog, inputs);

  AnalogRun run;
  run.devices = prog.registers;
  run.trace.devices = prog.registers;
  RegisterFile nominal(prog.registers);
  std::vector<double> x(prog.registers.size(), 0.0);
  const std::size_t steps = step_count(p.pulse_width, p.dt);
  const double h = p.pulse_width / static_cast<double>(steps);
  const double k = p.drift_coefficient();
  double clock = 0.0;

  auto record = [&](double t, double node_v) {
    if (opts.record_trace) run.trace.samples.push_back({t, node_v, x});
  };
  record(0.0, 0.0);

  std::vector<Instruction> pulses;
  for (const auto& in : prog.inputs) pulses.push_back(Instruction::Load(in, inputs.at(in)));
  pulses.insert(pulses.end(), prog.body.begin(), prog.body.end());

  for (std::size_t n = 0; n < pulses.size(); ++n) {
    const auto& instr = pulses[n];
    if (opts.record_trace)
      run.trace.boundaries.push_back({run.trace.samples.size(), n + 1, to_string(instr)});
    if (instr.op == Op::Imply) {
      const auto ip = nominal.index_of(instr.source);
      const auto iq = nominal.index_of(instr.target);
      integrate_cell({x[ip], x[iq]}, p.pulse_width, steps, p,
                     [&](double t, const std::array<double, 2>& s) {
                       x[ip] = s[0];
                       x[iq] = s[1];
                       if (opts.record_trace) {
                         const auto c = solve_cell(memristance({s[0]}, p), memristance({s[1]}, p), p);
                         record(clock + t, c.node_v);
                       }
                     });
    } else {
      const auto i = nominal.index_of(instr.target);
      const double volts =
          (instr.op == Op::Load && to_bool(instr.value)) ? p.v_set : p.v_clear;
      std::array<double, 1> s{x[i]};
      auto f = [&](const std::array<double, 1>& st, double) {
        return std::array<double, 1>{k * volts / (memristance({st[0]}, p) + p.r_g)};
      };
      for (std::size_t j = 0; j < steps; ++j) {
        s = rk4_step<1>(s, static_cast<double>(j) * h, h, f);
        x[i] = s[0];
        const double m = memristance({s[0]}, p);
        record(clock + static_cast<double>(j + 1) * h, volts * p.r_g / (m + p.r_g));
      }
    }
    clock += p.pulse_width;
    nominal = exec_instruction(std::move(nominal), instr);

    DriftRecord rec{n + 1, to_string(instr), {}};
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double dist = std::abs(x[d] - state_for_level(nominal.at(d)));
      rec.distance.push_back(dist);
      run.drift.max_drift = std::max(run.drift.max_drift, dist);
    }
    run.drift.records.push_back(std::move(rec));
  }

  run.final_x = x;
  run.readouts = RegisterFile(prog.registers);
  for (std::size_t d = 0; d < x.size(); ++d) run.readouts.set_at(d, readout({x[d]}, p));
  return run;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline void append_number(std::string& out, double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

}  // namespace detail

/// time_s,node_v,<reg>_x,<reg>_ohm,... with "# step <n>: <instruction>"
/// comment rows ahead of each pulse's samples.
inline std::string trace_to_csv(const AnalogTrace& trace, const CircuitParams& p) {
  std::string out = "time_s,node_v";
  for (const auto& d : trace.devices) out += "," + d + "_x," + d + "_ohm";
  out += '\n';
  std::size_t next = 0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    while (next < trace.boundaries.size() && trace.boundaries[next].sample == i) {
      out += "# step " + std::to_string(trace.boundaries[next].step) + ": " +
             trace.boundaries[next].instruction + '\n';
      ++next;
    }
    const auto& s = trace.samples[i];
    detail::append_number(out, s.time);
    out += ',';
    detail::append_number(out, s.node_v);
    for (double xv : s.x) {
      out += ',';
      detail::append_number(out, xv);
      out += ',';
      detail::append_number(out, memristance({xv}, p));
    }
    out += '\n';
  }
  return out;
}

}  // namespace imply::analog
