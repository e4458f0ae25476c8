#include <array>
#include <cmath>

#include "doctest.h"
#include "fairbits/bitsource.hpp"

using namespace fairbits;

TEST_CASE("philox known answers") {
  auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U});
  auto ones = philox4x32({~0U, ~0U, ~0U, ~0U}, {~0U, ~0U});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU});
}

TEST_CASE("seeded determinism and counting") {
  auto a = BitStream::seeded(0);
  auto b = BitStream::seeded(0);
  CHECK(a.next_bit() == b.next_bit());
  auto w1 = a.take(500);
  auto w2 = b.take(500);
  CHECK(w1 == w2);
  CHECK(a.consumed() == 501);

  auto c = BitStream::seeded(1);
  for (int i = 0; i < 17; ++i) c.next_bit();
  CHECK(c.consumed() == 17);

  // Copies replay from the same position.
  auto d = c;
  CHECK(d.take(64) == c.take(64));
  CHECK(BitStream::seeded(0).take(256) != BitStream::seeded(1).take(256));
}

TEST_CASE("children are reproducible and distinct") {
  auto root = BitStream::seeded(99);
  auto c1 = root.child(1).take(256);
  CHECK(root.child(1).take(256) == c1);
  CHECK(root.child(2).take(256) != c1);
  CHECK(root.child(1).child(1).take(256) != c1);
  CHECK(root.take(256) != c1);
  // Drawing from the parent does not move children.
  CHECK(root.child(1).take(256) == c1);
  CHECK_THROWS_AS(BitStream::scripted(Word::parse("01")).child(0), std::logic_error);
}

TEST_CASE("bit balance over 1e5 draws") {
  auto s = BitStream::seeded(2024);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += s.next_bit();
  double mean = static_cast<double>(ones) / n;
  // 4 sigma of Binomial(n, 1/2)
  CHECK(std::abs(mean - 0.5) <= 4 * 0.5 / std::sqrt(n));
  CHECK(mean >= 0.49);
  CHECK(mean <= 0.51);
}

TEST_CASE("chi-square on 3-bit blocks") {
  auto s = BitStream::seeded(7);
  const int blocks = 100000 / 3;
  std::array<int, 8> counts{};
  for (int i = 0; i < blocks; ++i) {
    int v = (s.next_bit() << 2) | (s.next_bit() << 1) | s.next_bit();
    ++counts[static_cast<std::size_t>(v)];
  }
  double expected = blocks / 8.0;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square(7) upper 0.001 quantile
  CHECK(chi2 < 24.322);
}

TEST_CASE("entropy mode") {
  auto s = BitStream::entropy();
  int ones = 0;
  for (int i = 0; i < 4096; ++i) ones += s.next_bit();
  CHECK(s.consumed() == 4096);
  CHECK(ones > 1700);
  CHECK(ones < 2400);
  CHECK_FALSE(s.seed().has_value());
}

TEST_CASE("scripted streams") {
  auto s = BitStream::scripted(Word::parse("0"), Word::parse("10"));
  CHECK(s.take(7).to_string() == "0101010");
  auto f = BitStream::scripted(Word::parse("11"));
  f.take(2);
  CHECK_THROWS_AS(f.next_bit(), StreamExhausted);
}

TEST_CASE("words") {
  CHECK(Word::from_index(5, 4).to_string() == "0101");
  CHECK(Word::parse("0101").index() == 5);
  CHECK(Word::parse("01").is_prefix_of(Word::parse("0110")));
  CHECK_FALSE(Word::parse("11").is_prefix_of(Word::parse("0110")));
  CHECK(Word::parse("001") < Word::parse("010"));
  CHECK_THROWS_AS(Word::parse("012"), std::invalid_argument);
}

TEST_CASE("rho_b enclosures") {
  CHECK(rho_b_enclosure(Word{}) == DyadicInterval(Dyadic(0), Dyadic(1)));
  CHECK(rho_b_enclosure(Word::parse("1")) ==
        DyadicInterval(Dyadic::parse("1/2"), Dyadic(1)));
  CHECK(rho_b_enclosure(Word::parse("0100")) ==
        DyadicInterval(Dyadic::parse("1/4"), Dyadic::parse("5/16")));
}

TEST_CASE("rho_b halving property") {
  auto s = BitStream::seeded(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto w = s.take(static_cast<std::size_t>(trial % 40));
    auto whole = rho_b_enclosure(w);
    auto left = rho_b_enclosure(w.with(0));
    auto right = rho_b_enclosure(w.with(1));
    CHECK(hull(left, right) == whole);
    CHECK(left.hi() == right.lo());
    CHECK(whole.width() == Dyadic(1).scaled(-static_cast<std::int64_t>(w.size())));
    CHECK(left.width() == whole.width().scaled(-1));
  }
}
