#include "flame/latency.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "flame/error.hpp"

namespace flame {
namespace {

TEST(FrameOffset, PublishedLatencies) {
  EXPECT_EQ(frame_offset(26, 60), 1);
  EXPECT_EQ(frame_offset(38, 60), 1);
  EXPECT_EQ(frame_offset(76, 60), 2);
  EXPECT_EQ(frame_offset(195, 60), 4);
}

TEST(FrameOffset, Boundaries) {
  EXPECT_EQ(frame_offset(0, 60), 0);
  EXPECT_EQ(frame_offset(60, 60), 1);
  EXPECT_EQ(frame_offset(61, 60), 2);
  EXPECT_EQ(frame_offset(120, 60), 2);
  EXPECT_EQ(frame_offset(1e-9, 60), 1);
  // 0.3 / 0.1 rounds to 2.9999999999999996 in binary floating point.
  EXPECT_EQ(frame_offset(0.3, 0.1), 3);
}

TEST(FrameOffset, PreconditionViolations) {
  EXPECT_THROW(frame_offset(-1, 60), std::invalid_argument);
  EXPECT_THROW(frame_offset(10, 0), std::invalid_argument);
  EXPECT_THROW(frame_offset(10, -5), std::invalid_argument);
  EXPECT_THROW(frame_offset(std::nan(""), 60), std::invalid_argument);
  EXPECT_THROW(frame_offset(1e300, 1e-300), std::invalid_argument);
}

TEST(FrameOffsetProperty, CeilingBoundsAndMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> latency(0.0, 1000.0);
  std::uniform_real_distribution<double> interval(0.5, 120.0);
  for (int i = 0; i < 20000; ++i) {
    const double l = latency(rng);
    const double d = interval(rng);
    const auto k = frame_offset(l, d);
    ASSERT_GE(k, 1);
    ASSERT_LT(static_cast<double>(k - 1) * d, l);
    ASSERT_LE(l, static_cast<double>(k) * d);

    const double l2 = l + latency(rng) / 10.0;
    ASSERT_LE(k, frame_offset(l2, d));
    const double d2 = d + interval(rng) / 10.0;
    ASSERT_GE(k, frame_offset(l, d2));
  }
}

TEST(FrameOffsetProperty, ExactMultiplesMapToQuotient) {
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(frame_offset(60.0 * k, 60.0), k);
    EXPECT_EQ(frame_offset(33.0 * k, 33.0), k);
  }
}

TEST(FrameTimingTest, Validation) {
  EXPECT_THROW(FrameTiming(0.0), std::invalid_argument);
  EXPECT_THROW(FrameTiming(60.0, {0.0, 60.0, 60.0}), std::invalid_argument);
  EXPECT_THROW(FrameTiming(60.0, {0.0, 60.0, 30.0}), std::invalid_argument);
  EXPECT_NO_THROW(FrameTiming(60.0, {0.0, 55.0, 130.0}));
}

TEST(ResolveTargetFrame, UniformTiming) {
  const FrameTiming timing(60.0);
  EXPECT_EQ(resolve_target_frame(16, 195, timing, 30), 20);
  EXPECT_EQ(resolve_target_frame(5, 0, timing, 30), 5);
  EXPECT_EQ(resolve_target_frame(28, 195, timing, 30), std::nullopt);
  EXPECT_EQ(resolve_target_frame(25, 195, timing, 30), 29);
  EXPECT_EQ(resolve_target_frame(26, 195, timing, 30), std::nullopt);
  EXPECT_THROW(resolve_target_frame(30, 0, timing, 30), std::out_of_range);
  EXPECT_THROW(resolve_target_frame(-1, 0, timing, 30), std::out_of_range);
}

TEST(ResolveTargetFrame, ExplicitTimestamps) {
  const FrameTiming timing(60.0, {0, 50, 100, 170, 230});
  EXPECT_EQ(resolve_target_frame(0, 0, timing, 5), 0);
  EXPECT_EQ(resolve_target_frame(0, 50, timing, 5), 1);   // equal timestamp counts
  EXPECT_EQ(resolve_target_frame(0, 51, timing, 5), 2);
  EXPECT_EQ(resolve_target_frame(1, 100, timing, 5), 3);
  EXPECT_EQ(resolve_target_frame(2, 130, timing, 5), 4);
  EXPECT_EQ(resolve_target_frame(2, 131, timing, 5), std::nullopt);
  EXPECT_THROW(resolve_target_frame(0, 10, timing, 6), std::invalid_argument);
}

TEST(ResolveTargetFrameProperty, TimestampPathAgreesWithUniformPath) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> interval(1, 100);
  std::uniform_int_distribution<int> latency(0, 500);
  for (int trial = 0; trial < 500; ++trial) {
    const double d = interval(rng);
    std::vector<double> ts;
    for (int i = 0; i < 30; ++i) ts.push_back(i * d);
    const FrameTiming uniform(d);
    const FrameTiming stamped(d, ts);
    const double l = latency(rng) + (trial % 2 ? 0.25 : 0.0);
    for (std::int64_t input = 0; input < 30; ++input) {
      ASSERT_EQ(resolve_target_frame(input, l, uniform, 30),
                resolve_target_frame(input, l, stamped, 30))
          << "d=" << d << " l=" << l << " input=" << input;
    }
  }
}

TEST(LatencyModelTest, ConstantAndPerPrediction) {
  const auto constant = LatencyModel::constant(26);
  EXPECT_TRUE(constant.is_constant());
  EXPECT_EQ(constant.latency_for(123), 26.0);

  const auto traced = LatencyModel::per_prediction({{3, 40.0}, {4, 80.0}});
  EXPECT_FALSE(traced.is_constant());
  EXPECT_EQ(traced.latency_for(4), 80.0);
  EXPECT_EQ(traced.latency_for(5), std::nullopt);

  EXPECT_THROW(LatencyModel::constant(-1), std::invalid_argument);
  EXPECT_THROW(LatencyModel::per_prediction({{1, -2.0}}), std::invalid_argument);
}

TEST(LatencyTrace, ParseAndWrite) {
  std::istringstream in("frame_index,latency_ms\r\n16,195\n17, 26.5\n\n19,0\n");
  const auto trace = parse_latency_trace(in);
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_EQ(trace.at(17), 26.5);

  std::ostringstream out;
  write_latency_trace(trace, out);
  EXPECT_EQ(out.str(), "frame_index,latency_ms\n16,195\n17,26.5\n19,0\n");
  std::istringstream again(out.str());
  EXPECT_EQ(parse_latency_trace(again), trace);
}

TEST(LatencyTrace, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_latency_trace(in);
  };
  EXPECT_THROW(parse(""), Error);
  EXPECT_THROW(parse("frame,latency\n1,2\n"), Error);
  EXPECT_THROW(parse("frame_index,latency_ms\n1\n"), Error);
  EXPECT_THROW(parse("frame_index,latency_ms\n1,abc\n"), Error);
  EXPECT_THROW(parse("frame_index,latency_ms\n1,-3\n"), Error);
  EXPECT_THROW(parse("frame_index,latency_ms\n1,3\n1,4\n"), Error);
  EXPECT_NO_THROW(parse("\xEF\xBB\xBF" "frame_index,latency_ms\n1,3\n"));
}

}  // namespace
}  // namespace flame
