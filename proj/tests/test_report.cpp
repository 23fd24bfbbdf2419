#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "udn/report.hpp"

using namespace udn;

TEST(Format, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e9, 1e9);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    ASSERT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(-3.0), "-3");
}

TEST(Csv, RowsAndNewlines) {
  Csv csv("a,b");
  csv.cell(1).cell(2.5).end_row().cell("x").cell(std::optional<double>()).end_row();
  EXPECT_EQ(csv.text(), "a,b\n1,2.5\nx,\n");
}

namespace {

std::vector<SlotMetrics> two_slots() {
  SlotMetrics a;
  a.slot = 0;
  a.mean_reward[0] = 4.0;
  a.per_sbs_load = {2, 0};
  a.load_std = 1.0;
  a.jain_index = 0.5;
  SlotMetrics b = a;
  b.slot = 1;
  b.mean_reward[0] = 6.0;
  b.mean_reward[1] = -1.0;
  b.per_sbs_load = {1, 2};
  return {a, b};
}

}  // namespace

TEST(Tables, MetricsHasEveryCohortEverySlot) {
  const auto m = two_slots();
  EXPECT_EQ(metrics_table(m).text(),
            "slot,cohort,mean_reward,load_std,jain_index\n"
            "0,incumbent,4,1,0.5\n0,imitator,,1,0.5\n0,non_imitator,,1,0.5\n"
            "1,incumbent,6,1,0.5\n1,imitator,-1,1,0.5\n1,non_imitator,,1,0.5\n");
}

TEST(Tables, SmoothedSkipsAbsentSlots) {
  const auto m = two_slots();
  EXPECT_EQ(smoothed_table(m, 2).text(),
            "slot,cohort,mean_reward_smoothed\n"
            "0,incumbent,4\n0,imitator,\n0,non_imitator,\n"
            "1,incumbent,5\n1,imitator,-1\n1,non_imitator,\n");
}

TEST(Tables, LoadsHeader) {
  const auto m = two_slots();
  EXPECT_EQ(loads_table(m, 2).text(), "slot,sbs0,sbs1\n0,2,0\n1,1,2\n");
}

TEST(Tables, TrajectoryLayout) {
  mfg::MfgSolution s;
  s.pi = {mfg::Vector::Constant(2, 0.5)};
  s.value = {mfg::Vector::Zero(2)};
  s.policy = {mfg::Matrix::Identity(2, 2)};
  s.converged = true;
  s.iterations = 3;
  s.residual = 0.0;
  EXPECT_EQ(trajectory_table(s).text(), "t,pi_0,pi_1,V_0,V_1\n0,0.5,0.5,0,0\n");
  EXPECT_EQ(policy_table(s).text(), "t,from,to_0,to_1\n0,0,1,0\n0,1,0,1\n");
  EXPECT_EQ(mfg_summary(s).text(), "converged,iterations,residual\ntrue,3,0\n");
}

TEST(Files, UnwritableDirectoryIsAnIoError) {
  EXPECT_THROW(ensure_directory("/proc/udn_cannot_exist/x"), io_error);
  EXPECT_THROW(Csv("a").save("/proc/udn_cannot_exist.csv"), io_error);
}
