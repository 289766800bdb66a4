#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace hybridsa;
using testing_support::random_arc;

namespace {

HybridArc two_interval_arc() {
  // ([0,2],0) u ([2,3],1), x = t on the first interval and 10 + t on the second.
  return HybridArc::from_pieces({{0, {0.0, 0.5, 1.0, 1.5, 2.0}, {{0.0}, {0.5}, {1.0}, {1.5}, {2.0}}},
                                 {0, {2.0, 2.5, 3.0}, {{12.0}, {12.5}, {13.0}}}});
}

}  // namespace

TEST(Domain, LengthOfListedIntervals) {
  EXPECT_EQ(HybridTimeDomain().length(), 0.0);
  HybridTimeDomain e({{0.0, 1.0, 0}, {1.0, 1.0, 1}, {1.0, 2.5, 2}});
  EXPECT_DOUBLE_EQ(e.length(), 4.5);
  HybridTimeDomain u({{0.0, kInf, 0}});
  EXPECT_TRUE(std::isinf(u.length()));
  HybridTimeDomain prefix({{0.0, 1.0, 0}}, true);
  EXPECT_TRUE(std::isinf(prefix.length()));
}

TEST(Domain, RejectsBrokenStructure) {
  EXPECT_THROW(HybridTimeDomain({{0.5, 1.0, 0}}), DomainError);
  EXPECT_THROW(HybridTimeDomain({{0.0, 1.0, 0}, {1.5, 2.0, 1}}), DomainError);
  EXPECT_THROW(HybridTimeDomain({{0.0, 1.0, 0}, {1.0, 2.0, 2}}), DomainError);
  EXPECT_THROW(HybridTimeDomain({{0.0, -1.0, 0}}), DomainError);
  EXPECT_THROW(HybridSequenceDomain({{0, 0}, {2, 0}}), DomainError);
  EXPECT_THROW(HybridSequenceDomain({{1, 0}}), DomainError);
  EXPECT_NO_THROW(HybridSequenceDomain({{0, 0}, {1, 0}, {1, 1}, {2, 1}}));
}

TEST(Domain, HybridTimeOrder) {
  EXPECT_TRUE(precedes({1.0, 0}, {0.5, 1}));
  EXPECT_FALSE(precedes({2.0, 0}, {0.5, 1}));
  EXPECT_DOUBLE_EQ((HybridTime{1.5, 2}).length(), 3.5);
}

TEST(Tail, ShiftsDomain) {
  const HybridArc arc = two_interval_arc();
  const HybridArc t = tail(arc, {2.0, 0});
  const auto dom = t.domain();
  ASSERT_EQ(dom.intervals().size(), 2u);
  EXPECT_EQ(dom.intervals()[0].t_start, 0.0);
  EXPECT_EQ(dom.intervals()[0].t_end, 0.0);
  EXPECT_EQ(dom.intervals()[1].t_start, 0.0);
  EXPECT_EQ(dom.intervals()[1].t_end, 1.0);
  EXPECT_EQ(t.value({0.0, 0}), Vector{2.0});
  EXPECT_EQ(t.value({0.5, 1}), Vector{12.5});
}

TEST(Tail, IdentityAndOffDomain) {
  const HybridArc arc = two_interval_arc();
  EXPECT_EQ(tail(arc, {0.0, 0}).samples(), arc.samples());
  EXPECT_THROW(tail(arc, {2.5, 0}), DomainError);
  EXPECT_THROW(tail(arc, {0.0, 2}), DomainError);
}

TEST(Tail, Composition) {
  const HybridArc arc = two_interval_arc();
  const HybridArc a = tail(tail(arc, {0.75, 0}), {1.25, 0});
  const HybridArc b = tail(arc, {2.0, 0});
  EXPECT_EQ(a.samples(), b.samples());
}

TEST(Truncate, ClipsInterval) {
  const HybridArc arc = HybridArc::sample_flow([](double t) { return Vector{t}; }, 3.0, 0.25);
  const HybridArc t = truncate(arc, 1.5);
  EXPECT_EQ(t.domain().intervals().size(), 1u);
  EXPECT_DOUBLE_EQ(t.domain().intervals()[0].t_end, 1.5);
  EXPECT_EQ(truncate(arc, arc.length()).samples(), arc.samples());
  const HybridArc c = HybridArc::constant({4.0}, 2.0, 0.5);
  const HybridArc z = truncate(c, 0.0);
  EXPECT_EQ(z.samples().size(), 1u);
  EXPECT_EQ(z.length(), 0.0);
  EXPECT_THROW(truncate(arc, -1.0), DomainError);
}

TEST(Truncate, AcrossJumps) {
  const HybridArc arc = two_interval_arc();
  const HybridArc t = truncate(arc, 3.5);  // t + j <= 3.5 keeps ([2, 2.5], 1)
  EXPECT_EQ(t.end(), (HybridTime{2.5, 1}));
}

TEST(Concatenate, NeutralElementAndAdditivity) {
  const HybridArc arc = two_interval_arc();
  const HybridArc triv = HybridArc::trivial(arc.value(arc.end()));
  EXPECT_EQ(concatenate(arc, triv, arc.end()).samples(), arc.samples());

  const HybridArc a = HybridArc::sample_flow([](double t) { return Vector{t}; }, 1.0, 0.1);
  const HybridArc b = HybridArc::sample_flow([](double t) { return Vector{1.0 + t}; }, 2.0, 0.1);
  const HybridArc ab = concatenate(a, b, {1.0, 0});
  EXPECT_DOUBLE_EQ(ab.length(), 3.0);
  EXPECT_EQ(ab.domain().last_j(), 0);
}

TEST(Concatenate, JumpOnlySecondArcShiftsIndices) {
  const HybridArc first = two_interval_arc();  // ends at (3, 1)
  const HybridArc jumps = HybridArc::from_pieces({{0, {0.0}, {{13.0}}}, {0, {0.0}, {{20.0}}}, {0, {0.0}, {{30.0}}}});
  const HybridArc c = concatenate(first, jumps, first.end());
  EXPECT_EQ(c.domain().last_j(), 3);
  EXPECT_EQ(c.value({3.0, 2}), Vector{20.0});
  EXPECT_EQ(c.value({3.0, 3}), Vector{30.0});
  EXPECT_DOUBLE_EQ(c.length(), 4.0 + 2.0);
}

TEST(Concatenate, MismatchNeedsTolerance) {
  const HybridArc a = HybridArc::constant({0.0}, 1.0, 0.5);
  const HybridArc b = HybridArc::constant({0.1}, 1.0, 0.5);
  EXPECT_THROW(concatenate(a, b, {1.0, 0}), ConcatenationError);
  EXPECT_NO_THROW(concatenate(a, b, {1.0, 0}, 0.2));
  EXPECT_THROW(concatenate(a, b, {2.0, 0}, 0.2), DomainError);
}

TEST(GeneralizedConcatenation, SingleLinkIsTruncation) {
  const HybridArc arc = two_interval_arc();
  const auto g = generalized_concatenate({{arc, {2.5, 1}}});
  EXPECT_EQ(g.mapping.points(), truncate_at(arc, {2.5, 1}).samples());
  EXPECT_EQ(g.mapping.multivalued_count(), 0u);
  EXPECT_TRUE(g.concatenation_times.empty());
}

TEST(GeneralizedConcatenation, MatchingLinksEqualConcatenate) {
  const HybridArc a = HybridArc::sample_flow([](double t) { return Vector{t}; }, 1.0, 0.25);
  const HybridArc b = HybridArc::sample_flow([](double t) { return Vector{1.0 + t}; }, 2.0, 0.25);
  const auto g = generalized_concatenate({{a, {1.0, 0}}, {b, {2.0, 0}}});
  EXPECT_EQ(g.mapping.multivalued_count(), 0u);
  EXPECT_EQ(g.mapping.points(), concatenate(a, b, {1.0, 0}).samples());
  ASSERT_EQ(g.segment_lengths.size(), 2u);
  EXPECT_DOUBLE_EQ(g.segment_lengths[0], 1.0);
}

TEST(GeneralizedConcatenation, GapGivesOneTwoValuedTime) {
  const HybridArc a = HybridArc::sample_flow([](double t) { return Vector{t}; }, 1.0, 0.25);
  const HybridArc b = HybridArc::sample_flow([](double t) { return Vector{1.3 + t}; }, 2.0, 0.25);
  const auto g = generalized_concatenate({{a, {1.0, 0}}, {b, {2.0, 0}}});
  EXPECT_EQ(g.mapping.multivalued_count(), 1u);
  ASSERT_EQ(g.concatenation_times.size(), 1u);
  const auto vals = g.mapping.values_at(g.concatenation_times[0]);
  ASSERT_EQ(vals.size(), 2u);
  EXPECT_NEAR(std::abs(vals[0][0] - vals[1][0]), 0.3, 1e-15);
}

TEST(SplitLong, FlowOnlyLengthFive) {
  const HybridArc arc = HybridArc::sample_flow([](double t) { return Vector{std::sin(t)}; }, 5.0, 0.1);
  const auto segs = split_long(arc, 2.0);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_GE(segs[0].length(), 2.0);
  EXPECT_LT(segs[0].length(), 3.0);
  EXPECT_EQ(join_segments(segs).samples(), arc.samples());
}

TEST(SplitLong, NothingToDoAndErrors) {
  const HybridArc arc = HybridArc::sample_flow([](double t) { return Vector{t}; }, 4.5, 0.1);
  const auto segs = split_long(arc, 2.0);  // 2 tau + 0.5
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].samples(), arc.samples());
  EXPECT_THROW(split_long(arc, 4.5), NothingToSplit);
  EXPECT_THROW(split_long(arc, 0.0), std::invalid_argument);
}

TEST(SplitLong, UnboundedStream) {
  // Jumps every 0.7 time units, forever.
  ClosedFormArc arc([](double t, int j) { return Vector{std::cos(t) + j}; }, [](int j) { return 0.7 * (j + 1); }, 0.05);
  auto stream = split_long(arc, 1.0);
  double total = 0.0;
  for (int i = 0; i < 10; ++i) {
    const HybridArc seg = stream.next();
    EXPECT_GE(seg.length(), 1.0 - 1e-12);
    EXPECT_LT(seg.length(), 3.0);
    total += seg.length();
  }
  EXPECT_NEAR(total, stream.position().length(), 1e-9);
}

TEST(GraphCloseness, ReflexiveAndShifted) {
  const HybridArc arc = two_interval_arc();
  EXPECT_TRUE(graph_closeness(arc, arc, 10.0, 0.0).close);
  const double eps = 0.05;
  std::vector<GraphPoint> shifted = arc.samples();
  for (auto& p : shifted) p.x[0] += 2.0 * eps;
  const auto r = graph_closeness(arc.graph(), HybridMapping(shifted), 10.0, eps);
  EXPECT_FALSE(r.close);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(r.witness->distance, 2.0 * eps, 1e-12);
  EXPECT_TRUE(graph_closeness(arc.graph(), HybridMapping(shifted), 10.0, 2.0 * eps + 1e-12).close);
}

TEST(GraphCloseness, SymmetricOnRandomArcs) {
  std::mt19937_64 g(11);
  for (int c = 0; c < 50; ++c) {
    const HybridArc a = random_arc(g, 1);
    const HybridArc b = random_arc(g, 1);
    const double T = std::min(a.length(), b.length());
    EXPECT_EQ(graph_closeness(a, b, T, 0.0).distance, graph_closeness(b, a, T, 0.0).distance);
  }
}

TEST(GraphCloseness, JumpIndexMismatchCostsOne) {
  const HybridArc a = HybridArc::from_pieces({{0, {0.0}, {{0.0}}}, {0, {0.0}, {{0.0}}}});
  const HybridArc b = HybridArc::trivial({0.0});
  EXPECT_DOUBLE_EQ(graph_closeness(a, b, 5.0, 0.0).distance, 1.0);
}

TEST(Properties, DomainAlgebraRandomized) {
  const auto fails = testing_support::domain_algebra_failures(20240501, 1000);
  for (const auto& f : fails) ADD_FAILURE() << f;
  EXPECT_TRUE(fails.empty());
}
