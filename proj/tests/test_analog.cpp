#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "imply/analog.hpp"
#include "test_util.hpp"

using namespace imply;
using namespace imply::analog;
using namespace imply::testing_util;

namespace {

const CircuitParams& calibrated() {
  static const CircuitParams p = with_calibrated_pulse(CircuitParams{});
  return p;
}

Program single_imply() {
  Program p;
  p.registers = {"P", "Q"};
  p.inputs = {"P", "Q"};
  p.outputs = {"Q"};
  p.body = {Instruction::Imply("P", "Q")};
  return p;
}

Assignment case_inputs(int case_id) {
  const auto [xp, xq] = case_states(case_id);
  return {{"P", to_level(xp > 0.5)}, {"Q", to_level(xq > 0.5)}};
}

TEST(Memristance, Rails) {
  const CircuitParams p;
  EXPECT_DOUBLE_EQ(memristance({1.0}, p), 1e3);
  EXPECT_DOUBLE_EQ(memristance({0.0}, p), 100e3);
  EXPECT_DOUBLE_EQ(memristance({0.5}, p), 50.5e3);
  EXPECT_DOUBLE_EQ(memristance({1.7}, p), 1e3);
  EXPECT_DOUBLE_EQ(memristance({-0.2}, p), 100e3);
}

TEST(Readout, Threshold) {
  const CircuitParams p;
  EXPECT_DOUBLE_EQ(default_read_threshold(p), 10e3);
  auto at = [&](double ohms) { return DeviceState{(p.r_off - ohms) / (p.r_off - p.r_on)}; };
  EXPECT_EQ(readout(at(1e3), p), LogicLevel::One);
  EXPECT_EQ(readout(at(100e3), p), LogicLevel::Zero);
  EXPECT_EQ(readout(at(50e3), p), LogicLevel::Zero);
  CircuitParams exact = p;
  exact.read_threshold = memristance({0.25}, p);
  EXPECT_EQ(readout({0.25}, exact), LogicLevel::Zero);
}

TEST(Params, Validation) {
  CircuitParams p = calibrated();
  EXPECT_NO_THROW(p.validate());
  auto broken = [&](auto mutate) {
    CircuitParams q = p;
    mutate(q);
    return q;
  };
  EXPECT_THROW(broken([](auto& q) { q.read_threshold = 200e3; }).validate(), AnalogError);
  EXPECT_THROW(broken([](auto& q) { q.r_g = 0; }).validate(), AnalogError);
  EXPECT_THROW(broken([](auto& q) { q.v_cond = 1.5; }).validate(), AnalogError);
  EXPECT_THROW(broken([](auto& q) { q.dt = 2 * q.pulse_width; }).validate(), AnalogError);
  EXPECT_THROW(broken([](auto& q) { q.dt = 0; }).validate(), AnalogError);
  EXPECT_THROW(broken([](auto& q) { q.mobility = NAN; }).validate(), AnalogError);
}

TEST(SolveCell, CaseOneSubstitution) {
  const CircuitParams p;
  const auto s = solve_cell(100e3, 100e3, p);
  // Two equal branches in parallel into R_G: V_n = R_G (V_set + V_cond) / (R + 2 R_G).
  EXPECT_NEAR(s.node_v, 10e3 * 1.5 / 120e3, 1e-15);
  EXPECT_NEAR(s.node_v, 0.125, 1e-12);
}

TEST(SolveCell, CaseTwoDropAcrossQIsSmall) {
  const CircuitParams p;
  const auto s = solve_cell(100e3, 1e3, p);
  EXPECT_LT(s.drop_q, 0.1);
  EXPECT_GT(s.drop_q, 0.0);
}

TEST(SolveCell, CaseThreeNodeNearCond) {
  const CircuitParams p;
  const auto s = solve_cell(1e3, 100e3, p);
  EXPECT_NEAR(s.node_v, p.r_g * p.v_cond / (p.r_on + p.r_g), 0.01);
  EXPECT_LT(s.node_v, p.v_cond);
}

TEST(SolveCell, KirchhoffResidual) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> r(1e2, 1e6), v(-2, 2);
  for (int i = 0; i < 1000; ++i) {
    CircuitParams p;
    p.r_g = r(rng);
    p.v_set = v(rng);
    p.v_cond = v(rng);
    const double rp = r(rng), rq = r(rng);
    const auto s = solve_cell(rp, rq, p);
    const double in = s.current_p + s.current_q;
    const double scale = std::abs(s.current_p) + std::abs(s.current_q) + std::abs(s.current_g);
    EXPECT_LE(std::abs(in - s.current_g), 1e-12 * scale);
  }
}

TEST(SolveCell, CurrentFollowsDrop) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> x(0, 1);
  const CircuitParams p;
  for (int i = 0; i < 1000; ++i) {
    const auto s = solve_cell(memristance({x(rng)}, p), memristance({x(rng)}, p), p);
    EXPECT_EQ(std::signbit(s.current_p), std::signbit(s.drop_p));
    EXPECT_EQ(std::signbit(s.current_q), std::signbit(s.drop_q));
  }
}

TEST(ClosedForm, SubstitutedValues) {
  const CircuitParams p;
  EXPECT_NEAR(closed_form_check(1, p), 0.125, 1e-12);
  EXPECT_NEAR(closed_form_check(4, p), 10e3 / 21e3 * 1.5, 1e-12);
  EXPECT_NEAR(closed_form_check(3, p), 0.5, 0.05);
  EXPECT_THROW(closed_form_check(0, p), AnalogError);
  EXPECT_THROW(closed_form_check(5, p), AnalogError);
}

TEST(ClosedForm, NodeVoltageCasesMatchSolver) {
  const CircuitParams p;
  for (int c : {1, 4}) {
    const double cf = closed_form_check(c, p);
    EXPECT_LE(std::abs(closed_form_counterpart(c, p) - cf), 1e-9 * std::abs(cf)) << "case " << c;
  }
}

TEST(IntegratePulse, ZeroVoltageLeavesStateAlone) {
  const auto& p = calibrated();
  for (double x0 : {0.0, 0.3, 1.0}) {
    auto out = integrate_pulse({x0}, series_drive(0.0, p), p.pulse_width, p);
    EXPECT_EQ(out.x, x0);
  }
}

TEST(IntegratePulse, CaseOneDriveSwitchesQ) {
  const auto& p = calibrated();
  // Q's current with P held at R_OFF.
  auto case1 = [&](double xq, double) {
    return solve_cell(p.r_off, memristance({xq}, p), p).current_q;
  };
  auto out = integrate_pulse({0.0}, case1, p.pulse_width, p);
  EXPECT_LE(memristance(out, p), 1.01 * p.r_on);
}

TEST(IntegratePulse, CaseThreeDriveDriftsButReadsZero) {
  const auto& p = calibrated();
  auto case3 = [&](double xq, double) {
    return solve_cell(p.r_on, memristance({xq}, p), p).current_q;
  };
  auto out = integrate_pulse({0.0}, case3, p.pulse_width, p);
  EXPECT_LT(memristance(out, p), p.r_off);
  EXPECT_GT(memristance(out, p), p.r_on);
  EXPECT_EQ(readout(out, p), LogicLevel::Zero);
}

TEST(IntegratePulse, HalvingStepBarelyMovesResult) {
  auto p = calibrated();
  auto half = p;
  half.dt /= 2;
  for (double v : {p.v_set, p.v_clear, 0.3}) {
    for (double x0 : {0.0, 0.5, 1.0}) {
      auto a = integrate_pulse({x0}, series_drive(v, p), p.pulse_width / 3, p);
      auto b = integrate_pulse({x0}, series_drive(v, half), p.pulse_width / 3, half);
      EXPECT_LT(std::abs(a.x - b.x), 1e-6);
    }
  }
}

TEST(IntegratePulse, BadDuration) {
  const auto& p = calibrated();
  EXPECT_THROW(integrate_pulse({0.0}, series_drive(1, p), 0.0, p), AnalogError);
  EXPECT_THROW(integrate_pulse({0.0}, series_drive(1, p), -1.0, p), AnalogError);
}

TEST(IntegratePulse, NonFiniteCurrent) {
  const auto& p = calibrated();
  auto bad = [](double, double) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(integrate_pulse({0.5}, bad, p.pulse_width, p), AnalogError);
}

TEST(Calibration, FinitePositive) {
  const auto& p = calibrated();
  EXPECT_GT(p.pulse_width, 0.0);
  EXPECT_TRUE(std::isfinite(p.pulse_width));
  EXPECT_DOUBLE_EQ(p.dt, p.pulse_width / kStepsPerPulse);
}

TEST(Calibration, IsShortest) {
  auto p = calibrated();
  auto x = integrate_cell({0.0, 0.0}, p.pulse_width * 0.99, kStepsPerPulse, p, [](double, const auto&) {});
  EXPECT_GT(memristance({x[1]}, p), 1.01 * p.r_on);
}

TEST(Calibration, DoublingMobilityHalvesWriteTime) {
  CircuitParams fast;
  fast.mobility *= 2;
  const double ratio = calibrate_write_time(fast) / calibrated().pulse_width;
  EXPECT_NEAR(ratio, 0.5, 0.005);
}

TEST(Calibration, NoDriveDoesNotConverge) {
  CircuitParams p;
  p.v_set = 0;
  try {
    calibrate_write_time(p);
    FAIL();
  } catch (const AnalogError& e) {
    EXPECT_NE(std::string(e.what()).find("did not converge"), std::string::npos);
  }
}

TEST(Calibration, ReplayReproducesSwitching) {
  const auto& p = calibrated();
  auto run = execute_analog(single_imply(), case_inputs(1), p);
  EXPECT_LE(run.final_memristance("Q", p), 1.01 * p.r_on);
  EXPECT_EQ(run.readouts.get("Q"), LogicLevel::One);
}

TEST(ExecuteAnalog, SingleImplyCases) {
  const auto& p = calibrated();
  for (int c = 1; c <= 4; ++c) {
    auto run = execute_analog(single_imply(), case_inputs(c), p);
    auto logic = run_program(single_imply(), case_inputs(c));
    EXPECT_EQ(run.readouts.get("Q"), logic.final.get("Q")) << "case " << c;
    const double q = run.final_memristance("Q", p);
    if (c == 3) {
      EXPECT_LT(q, p.r_off);
      EXPECT_GT(run.drift.max_drift, 0.0);
    } else {
      EXPECT_LE(std::abs(q - p.r_on), 0.01 * p.r_on) << "case " << c;
    }
  }
}

TEST(ExecuteAnalog, HalvingStepChangesMemristanceLittle) {
  const auto& p = calibrated();
  auto half = p;
  half.dt /= 2;
  for (int c = 1; c <= 4; ++c) {
    auto a = execute_analog(single_imply(), case_inputs(c), p, {false});
    auto b = execute_analog(single_imply(), case_inputs(c), half, {false});
    for (const auto& r : {"P", "Q"}) {
      const double ma = a.final_memristance(r, p), mb = b.final_memristance(r, half);
      EXPECT_LT(std::abs(ma - mb) / ma, 1e-4) << "case " << c << " " << r;
    }
  }
}

TEST(ExecuteAnalog, TraceInvariants) {
  const auto& p = calibrated();
  auto run = execute_analog(nand_program(), assign({{"P", 1}, {"Q", 0}}), p);
  const auto& t = run.trace;
  ASSERT_FALSE(t.samples.empty());
  EXPECT_EQ(t.boundaries.size(), 2u + 3u);
  for (std::size_t i = 1; i < t.samples.size(); ++i) EXPECT_GT(t.samples[i].time, t.samples[i - 1].time);
  for (const auto& s : t.samples)
    for (double x : s.x) {
      const double m = memristance({x}, p);
      EXPECT_GE(m, p.r_on);
      EXPECT_LE(m, p.r_off);
    }
  EXPECT_EQ(run.drift.records.size(), 5u);
}

TEST(ExecuteAnalog, DriftFollowsDropDuringImply) {
  const auto& p = calibrated();
  for (int c = 1; c <= 4; ++c) {
    auto run = execute_analog(single_imply(), case_inputs(c), p);
    const auto& t = run.trace;
    const std::size_t begin = t.boundaries.back().sample;
    for (std::size_t i = begin; i < t.samples.size(); ++i) {
      const auto& prev = t.samples[i - 1];
      const auto s = solve_cell(memristance({prev.x[0]}, p), memristance({prev.x[1]}, p), p);
      const double dp = t.samples[i].x[0] - prev.x[0];
      const double dq = t.samples[i].x[1] - prev.x[1];
      if (dp != 0) {
        EXPECT_EQ(std::signbit(dp), std::signbit(s.drop_p));
      }
      if (dq != 0) {
        EXPECT_EQ(std::signbit(dq), std::signbit(s.drop_q));
      }
    }
  }
}

TEST(ExecuteAnalog, RepeatedCaseThreePulsesSwitchTarget) {
  // With linear drift and no threshold, two case-3 pulses in a row move S
  // all the way to R_ON.
  const auto& p = calibrated();
  auto run = execute_analog(nand_program(), assign({{"P", 1}, {"Q", 1}}), p);
  EXPECT_EQ(run_program(nand_program(), assign({{"P", 1}, {"Q", 1}})).final.get("S"), LogicLevel::Zero);
  EXPECT_EQ(run.readouts.get("S"), LogicLevel::One);
}

TEST(ExecuteAnalog, Errors) {
  const auto& p = calibrated();
  EXPECT_THROW(execute_analog(nand_program(), assign({{"P", 1}}), p), ExecutionError);
  Program bad = nand_program();
  bad.body.push_back(Instruction::False("Nope"));
  EXPECT_THROW(execute_analog(bad, assign({{"P", 1}, {"Q", 1}}), p), AnalogError);
  CircuitParams uncalibrated;
  EXPECT_THROW(execute_analog(nand_program(), assign({{"P", 1}, {"Q", 1}}), uncalibrated), AnalogError);
}

TEST(ExecuteAnalog, LoadPulsesSetRails) {
  const auto& p = calibrated();
  Program prog;
  prog.registers = {"R"};
  prog.outputs = {"R"};
  prog.body = {Instruction::Load("R", LogicLevel::One)};
  auto run = execute_analog(prog, {}, p);
  EXPECT_EQ(run.readouts.get("R"), LogicLevel::One);
  prog.body.push_back(Instruction::False("R"));
  run = execute_analog(prog, {}, p);
  EXPECT_EQ(run.readouts.get("R"), LogicLevel::Zero);
}

TEST(Csv, HeaderBoundariesAndMonotoneTime) {
  const auto& p = calibrated();
  auto run = execute_analog(nand_program(), assign({{"P", 0}, {"Q", 1}}), p);
  const auto csv = trace_to_csv(run.trace, p);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time_s,node_v,P_x,P_ohm,Q_x,Q_ohm,S_x,S_ohm");
  std::vector<std::string> comments;
  double last = -1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) {
      comments.push_back(line);
      continue;
    }
    const double t = std::stod(line.substr(0, line.find(',')));
    EXPECT_GT(t, last);
    last = t;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
    ++rows;
  }
  EXPECT_EQ(rows, run.trace.samples.size());
  ASSERT_EQ(comments.size(), 5u);
  EXPECT_EQ(comments[0], "# step 1: LOAD P 0");
  EXPECT_EQ(comments[2], "# step 3: FALSE S");
  EXPECT_EQ(comments[4], "# step 5: IMPLY Q S");
  EXPECT_EQ(csv, trace_to_csv(execute_analog(nand_program(), assign({{"P", 0}, {"Q", 1}}), p).trace, p));
}

}  // namespace
