#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "doctest.h"
#include "fairbits/measures.hpp"
#include "fairbits/oracle.hpp"

using namespace fairbits;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// 50-digit reference values, independent of the tabulated integrator.
Big ref_quantile(const mpq_class& t) {
  Big p = Big(t.get_num().get_str()) / Big(t.get_den().get_str());
  return -boost::multiprecision::sqrt(Big(2)) * boost::math::erfc_inv(2 * p);
}

Big ref_cdf(const Dyadic& x) {
  Big v = Big(x.mantissa().get_str()) * boost::multiprecision::pow(Big(2), Big(x.exponent()));
  return boost::math::erfc(-v / boost::multiprecision::sqrt(Big(2))) / 2;
}

bool encloses(const DyadicInterval& d, const Big& v) {
  Big lo = Big(d.lo().mantissa().get_str()) *
           boost::multiprecision::pow(Big(2), Big(d.lo().exponent()));
  Big hi = Big(d.hi().mantissa().get_str()) *
           boost::multiprecision::pow(Big(2), Big(d.hi().exponent()));
  return lo <= v && v <= hi;
}

DyadicInterval at(const std::optional<DyadicInterval>& v) {
  REQUIRE(v.has_value());
  return *v;
}

Dyadic frac(long num, int log2den) { return Dyadic(num).scaled(-log2den); }

std::vector<Distribution> builtins() {
  return {make_uniform(), make_gaussian(), make_cantor(),
          make_dirac(Real::rational(mpq_class(1, 3)))};
}

std::vector<Dyadic> midpoints(const Distribution& mu, std::uint64_t seed, int count, int n) {
  auto s = BitStream::seeded(seed);
  std::vector<Dyadic> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_real(mu, s, n).value.midpoint());
  return out;
}

}  // namespace

TEST_CASE("uniform is the identity") {
  auto u = make_uniform();
  auto v = at(u->eval_lower(DyadicInterval(frac(3, 4)), 10));
  CHECK(v == DyadicInterval(frac(3, 4)));
  auto s = BitStream::scripted(Word::parse("1011"), Word::parse("0"));
  auto r = sample_real(u, s, 4);
  CHECK(r.value.width() <= frac(1, 4));
  CHECK(rho_b_enclosure(Word::parse("1011")).contains(r.value));
}

TEST_CASE("gaussian quantile examples") {
  auto g = make_gaussian();
  CHECK(at(g->eval_lower(DyadicInterval(frac(1, 1)), 20)).contains(Dyadic{}));
  CHECK(at(g->eval_upper(DyadicInterval(frac(1, 1)), 20)).contains(Dyadic{}));

  // 0.975 is not dyadic: pass a 2^-60 enclosure of it.
  mpq_class p(39, 40);
  DyadicInterval t(Dyadic::floor_of(p, 60), Dyadic::ceil_of(p, 60));
  auto q = at(g->eval_lower(t, 20));
  CHECK(q.width() <= frac(1, 19));
  CHECK(encloses(q, ref_quantile(p)));
}

TEST_CASE("gaussian quantile against reference") {
  auto g = make_gaussian();
  auto s = BitStream::seeded(5);
  for (int i = 0; i < 200; ++i) {
    Word w = s.take(24);
    Dyadic t = rho_b_enclosure(w).lo();
    if (t.is_zero()) continue;
    int n = 8 + (i % 5) * 8;
    auto q = at(g->eval_lower(DyadicInterval(t), n));
    CHECK(q.width() <= frac(1, n));
    CHECK(encloses(q, ref_quantile(t.to_rational())));
  }
  // Deep tails.
  for (int k : {20, 40, 60}) {
    auto q = gaussian_quantile(frac(1, k), 16);
    CHECK(encloses(q, ref_quantile(mpq_class(1) / (mpq_class(1) << k))));
  }
}

TEST_CASE("gaussian cdf against reference") {
  for (long k = -96; k <= 96; k += 7) {
    Dyadic x = frac(k, 4);
    for (int n : {10, 30, 60}) {
      auto c = gaussian_cdf(x, n);
      CHECK(c.width() <= frac(1, n));
      CHECK(encloses(c, ref_cdf(x)));
    }
  }
}

TEST_CASE("cantor semi-inverses") {
  auto c = make_cantor();
  auto lo = at(c->eval_lower(DyadicInterval(frac(1, 1)), 30));
  auto hi = at(c->eval_upper(DyadicInterval(frac(1, 1)), 30));
  CHECK(lo.width() <= frac(1, 30));
  CHECK(hi.width() <= frac(1, 30));
  CHECK(lo.lo().to_rational() <= mpq_class(1, 3));
  CHECK(lo.hi().to_rational() >= mpq_class(1, 3));
  CHECK(hi.lo().to_rational() <= mpq_class(2, 3));
  CHECK(hi.hi().to_rational() >= mpq_class(2, 3));
  // t = 1/4: flat of height 1/4 over [1/9, 2/9].
  auto a = at(c->eval_lower(DyadicInterval(frac(1, 2)), 30));
  auto b = at(c->eval_upper(DyadicInterval(frac(1, 2)), 30));
  CHECK(a.lo().to_rational() <= mpq_class(1, 9));
  CHECK(a.hi().to_rational() >= mpq_class(1, 9));
  CHECK(b.lo().to_rational() <= mpq_class(2, 9));
  CHECK(b.hi().to_rational() >= mpq_class(2, 9));
  // The staircase at 1/3 and 0.2 (ternary 0.0121...).
  CHECK(c->cdf(Dyadic{}, 20).contains(Dyadic{}));
  auto mid = c->cdf(frac(1, 1), 20);
  CHECK(mid.contains(frac(1, 1)));
}

TEST_CASE("dirac") {
  auto d = make_dirac(Real::rational(mpq_class(1, 3)));
  for (int n : {1, 8, 40}) {
    auto v = at(d->eval_lower(DyadicInterval(frac(1, 3)), n));
    CHECK(v.width() <= frac(1, n));
    CHECK(v.lo().to_rational() <= mpq_class(1, 3));
    CHECK(v.hi().to_rational() >= mpq_class(1, 3));
  }
  auto s = BitStream::seeded(3);
  for (int i = 0; i < 200; ++i) {
    auto r = sample_real(d, s, 24);
    CHECK(r.value.lo().to_rational() <= mpq_class(1, 3));
    CHECK(r.value.hi().to_rational() >= mpq_class(1, 3));
  }
}

TEST_CASE("tables") {
  auto u = cdf_from_table({{0, 0}, {1, 1}});
  CHECK(at(u->eval_lower(DyadicInterval(frac(3, 4)), 16)).contains(frac(3, 4)));

  auto t = cdf_from_table({{0, 0}, {1, frac(1, 1)}, {2, 1}});
  auto v = at(t->eval_lower(DyadicInterval(frac(3, 2)), 16));
  CHECK(v.contains(frac(3, 1)));
  CHECK(v.width() <= frac(1, 16));

  CHECK_THROWS_AS(cdf_from_table({{5, 0}, {5, 1}}), TableError);
  CHECK_THROWS_AS(cdf_from_table({{0, 0}, {1, frac(3, 2)}, {2, frac(1, 1)}, {3, 1}}), TableError);
  CHECK_THROWS_AS(cdf_from_table({{0, 0}, {1, frac(1, 1)}}), TableError);
  CHECK_THROWS_AS(cdf_from_table({{0, -1}, {1, 1}}), TableError);
  CHECK_THROWS_AS(cdf_from_table({}), TableError);

  // A jump at 5 encoded with a tiny ramp before it.
  auto j = cdf_from_table({{Dyadic(5) - frac(1, 20), 0}, {5, 1}});
  auto x = at(j->eval_lower(DyadicInterval(frac(1, 1)), 8));
  CHECK(x.lo() >= Dyadic(4));
  CHECK(x.hi() <= Dyadic(5));

  // Positive first F is an atom.
  auto a = cdf_from_table({{2, frac(1, 1)}, {3, 1}});
  CHECK(at(a->eval_lower(DyadicInterval(frac(1, 2)), 16)).contains(Dyadic(2)));
  CHECK(at(a->eval_lower(DyadicInterval(frac(3, 2)), 16)).contains(frac(5, 1)));
}

TEST_CASE("table csv") {
  auto rows = parse_table_csv("# paths=3\nx,F\n1,0\n3*2^-1,0.5\n2,1\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].x == frac(3, 1));
  CHECK(rows[1].f == frac(1, 1));
  CHECK_THROWS(parse_table_csv("a,b\n1,0\n"));
  CHECK_THROWS(parse_table_csv("x,F\n1\n"));
  CHECK_THROWS(parse_table_csv("x,F\n0.1,1\n"));  // not dyadic
}

TEST_CASE("semi-inverse order and monotonicity on a grid") {
  const int n = 16;
  for (const auto& mu : builtins()) {
    CAPTURE(mu->name());
    std::optional<DyadicInterval> prev_lo, prev_hi;
    for (long k = 0; k < 256; ++k) {
      DyadicInterval t(frac(2 * k + 1, 9));
      auto lo = at(mu->eval_lower(t, n));
      auto hi = at(mu->eval_upper(t, n));
      CHECK(compare_strict(lo, hi) != Ordering::GT);
      if (prev_lo) {
        CHECK(compare_strict(*prev_lo, lo) != Ordering::GT);
        CHECK(compare_strict(*prev_hi, hi) != Ordering::GT);
      }
      prev_lo = lo;
      prev_hi = hi;
    }
  }
}

TEST_CASE("interval arguments enclose point evaluations") {
  auto s = BitStream::seeded(11);
  for (const auto& mu : builtins()) {
    CAPTURE(mu->name());
    for (int i = 0; i < 50; ++i) {
      Word w = s.take(12);
      auto T = rho_b_enclosure(w);
      if (T.lo().is_zero() || T.hi() == Dyadic(1)) continue;
      auto whole = at(mu->eval_lower(T, 20));
      Dyadic inner = T.lo() + frac(1, 14);
      auto point = at(mu->eval_lower(DyadicInterval(inner), 20));
      CHECK(whole.contains(point));
    }
  }
  // Unbounded images at the ends of (0,1).
  auto g = make_gaussian();
  CHECK_FALSE(g->eval_lower(DyadicInterval(Dyadic{}, frac(1, 1)), 10).has_value());
  CHECK(make_uniform()->eval_lower(DyadicInterval(Dyadic{}, Dyadic(1)), 10).has_value());
}

TEST_CASE("pushforward KS at n = 16") {
  for (const auto& mu : {make_uniform(), make_gaussian(), make_cantor()}) {
    CAPTURE(mu->name());
    auto xs = midpoints(mu, 16, 10000, 16);
    auto ks = ks_test(xs, *mu);
    CHECK(ks.p_value > 0.01);
  }
}

TEST_CASE("bits used stay linear in the precision") {
  const int n = 16;
  for (const auto& mu : builtins()) {
    CAPTURE(mu->name());
    auto s = BitStream::seeded(77);
    for (int i = 0; i < 1000; ++i) {
      auto r = sample_real(mu, s, n);
      CHECK(r.value.width() <= frac(1, n));
      CHECK(r.bits_used <= 4 * n + 64);
    }
  }
  // Uniform uses exactly n bits.
  auto s = BitStream::seeded(1);
  CHECK(sample_real(make_uniform(), s, 16).bits_used <= 16 + 2);
}

TEST_CASE("lazy refinement is nested") {
  auto g = make_gaussian();
  LazySample z(g, BitStream::seeded(8));
  auto coarse = z.enclose(4);
  auto fine = z.enclose(30);
  CHECK(coarse.contains(fine));
  CHECK(fine.width() <= frac(1, 30));
  auto used = z.bits_used();
  z.enclose(10);
  CHECK(z.bits_used() == used);

  // Same stream, same value.
  LazySample y(g, BitStream::seeded(8));
  CHECK(y.enclose(30) == fine);
}

TEST_CASE("ambiguous variates signal a resample") {
  // Cantor with t pinned to 1/2 sits on a flat.
  auto c = make_cantor();
  LazySample z(c, BitStream::scripted(Word::parse("1"), Word::parse("0")), 64);
  CHECK_THROWS_AS(z.enclose(8), ResampleSignal);
}
