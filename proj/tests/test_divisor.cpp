#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "zetaforge/divisor.hpp"

using namespace zetaforge;

namespace {

SpectralDivisor random_finite(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 8), mult(0, 4), grid(0, 20);
  std::vector<std::pair<double, long long>> pts;
  int n = count(rng);
  for (int i = 0; i < n; ++i) pts.emplace_back(0.25 * grid(rng), mult(rng));
  return make_finite(pts);
}

void expect_sorted_positive(const SpectralDivisor& d) {
  for (size_t i = 0; i < d.finite.size(); ++i) {
    EXPECT_GT(d.finite[i].first, 0.0);
    EXPECT_GT(d.finite[i].second, 0);
    if (i) EXPECT_LT(d.finite[i - 1].first, d.finite[i].first);
  }
  double top = d.finite.empty() ? 0.0 : d.finite.back().first;
  for (auto& t : d.tails) EXPECT_GT(t.point(t.start), top);
}

}  // namespace

TEST(Divisor, NormalizeMergesAndMovesZerosToKernel) {
  auto d = make_finite({{2.0, 1}, {1.0, 2}, {2.0, 3}, {0.0, 4}, {5.0, 0}});
  ASSERT_EQ(d.finite.size(), 2u);
  EXPECT_EQ(d.finite[0], std::make_pair(1.0, 2LL));
  EXPECT_EQ(d.finite[1], std::make_pair(2.0, 4LL));
  EXPECT_EQ(d.kernel, 4);
}

TEST(Divisor, RandomDirectSumsStaySortedAndCommute) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_finite(rng), b = random_finite(rng);
    if (trial % 3 == 0) a = direct_sum(a, make_naturals());
    auto ab = direct_sum(a, b), ba = direct_sum(b, a);
    expect_sorted_positive(ab);
    EXPECT_EQ(ab.finite, ba.finite);
    EXPECT_EQ(ab.kernel, ba.kernel);
    EXPECT_EQ(ab.tails.size(), ba.tails.size());
  }
}

TEST(Divisor, TailAbsorbsOverlappingHead) {
  auto d = direct_sum(make_finite({{3.5, 1}}), make_naturals());
  // naturals 1,2,3 pulled below 3.5 into the finite part
  ASSERT_EQ(d.finite.size(), 4u);
  EXPECT_EQ(d.tails[0].start, 4);
  expect_sorted_positive(d);
}

TEST(Divisor, DsigmaMultiplicitiesAreIntegral) {
  EXPECT_NO_THROW(make_Dsigma(PolyQ::from_ints({0, 0, 1}, Parity::Even)));
  EXPECT_NO_THROW(make_Dsigma(PolyQ::from_ints({0, 1, 0, 1}, Parity::Odd)));
  // x/4 on even points 2n gives n/2: not integral
  EXPECT_THROW(make_Dsigma(PolyQ({Rational(0), Rational(1, 4)}, Parity::Odd)), Error);
  EXPECT_THROW(make_Dsigma(PolyQ::from_ints({0, 1})), Error);
}

TEST(Divisor, DsigmaPointsFollowParity) {
  auto even = make_Dsigma(PolyQ::from_ints({0, 0, 1}, Parity::Even));
  auto lead = leading_points(even, 3);
  ASSERT_EQ(lead.size(), 3u);
  EXPECT_EQ(lead[0], std::make_pair(2.0, 4LL));
  EXPECT_EQ(lead[2], std::make_pair(6.0, 36LL));
  auto odd = make_Dsigma(PolyQ::from_ints({0, 1}, Parity::Odd));
  lead = leading_points(odd, 2);
  EXPECT_EQ(lead[0], std::make_pair(1.0, 1LL));
  EXPECT_EQ(lead[1], std::make_pair(3.0, 3LL));
}

TEST(Divisor, ShiftScaleAndPowerMovePoints) {
  auto n = make_naturals();
  auto s = shift(n, 0.5);
  EXPECT_DOUBLE_EQ(leading_points(s, 1)[0].first, 1.5);
  auto c = scale(n, 3.0);
  EXPECT_DOUBLE_EQ(leading_points(c, 2)[1].first, 6.0);
  auto p = power(n, 2.0);
  EXPECT_DOUBLE_EQ(leading_points(p, 3)[2].first, 9.0);
  EXPECT_THROW(shift(make_finite({{1.0, 1}}), -2.0), Error);
  EXPECT_THROW(scale(n, 0.0), Error);
}

TEST(Divisor, MaterializeRecordsTruncation) {
  auto m = materialize(make_Dj(1), 10);
  EXPECT_TRUE(m.is_finite());
  ASSERT_TRUE(m.truncation.has_value());
  EXPECT_EQ(m.truncation->points_per_tail, 10);
  EXPECT_DOUBLE_EQ(m.truncation->largest_kept, 19.0);
  EXPECT_EQ(m.finite.back(), std::make_pair(19.0, 19LL));
}

TEST(Divisor, MinEigenvalue) {
  EXPECT_DOUBLE_EQ(min_eigenvalue(make_Ej(0)), 2.0);
  EXPECT_DOUBLE_EQ(min_eigenvalue(direct_sum(make_dualP(), make_finite({{0.2, 1}}))), 0.2);
}
