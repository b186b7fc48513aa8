#include <gtest/gtest.h>

#include "support/properties.hpp"

namespace rawisp::testing {
namespace {

constexpr std::uint64_t kSeed = 20240611;

void expect_holds(const PropertyOutcome& p) {
  EXPECT_GE(p.cases, kMinPropertyCases) << p.name;
  EXPECT_EQ(p.failures, 0u) << p.name << ": " << p.first_failure;
}

TEST(Property, QuantizationMonotonicity) { expect_holds(quantization_monotonicity(kSeed, kMinPropertyCases)); }
TEST(Property, FixedPointRoundTrip) { expect_holds(fixed_point_round_trip(kSeed, kMinPropertyCases)); }
TEST(Property, EventPartitionTiling) { expect_holds(event_partition_tiling(kSeed, kMinPropertyCases)); }
TEST(Property, FilterLaws) { expect_holds(filter_laws(kSeed, kMinPropertyCases)); }
TEST(Property, TraceByteConservation) { expect_holds(trace_byte_conservation(kSeed, kMinPropertyCases)); }
TEST(Property, SimulatorLaws) { expect_holds(simulator_laws(kSeed, kMinPropertyCases)); }

}  // namespace
}  // namespace rawisp::testing
