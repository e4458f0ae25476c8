#include <cmath>
#include <random>

#include "doctest.h"
#include "fairbits/dyadic.hpp"

using namespace fairbits;

namespace {

Dyadic D(std::string_view s) { return Dyadic::parse(s); }
DyadicInterval I(std::string_view lo, std::string_view hi) { return {D(lo), D(hi)}; }

bool encloses(const DyadicInterval& a, const mpq_class& q) {
  return a.lo().to_rational() <= q && q <= a.hi().to_rational();
}

// e = sum 1/k!, tail after K terms below 2/(K+1)!
std::pair<mpq_class, mpq_class> e_oracle() {
  mpq_class sum = 0;
  mpq_class term = 1;
  for (int k = 0; k <= 30; ++k) {
    sum += term;
    term /= (k + 1);
  }
  return {sum, sum + 2 * term};
}

// ln 2 = sum_{k>=1} 1/(k 2^k), tail after K terms below 2/((K+1) 2^(K+1))
std::pair<mpq_class, mpq_class> ln2_oracle() {
  mpq_class sum = 0;
  mpq_class pow = 1;
  int k = 1;
  for (; k <= 120; ++k) {
    pow /= 2;
    sum += pow / k;
  }
  mpq_class tail = pow / 2 * 2 / k;
  return {sum, sum + tail};
}

}  // namespace

TEST_CASE("canonical form") {
  Dyadic a(mpz_class(12), 3);
  CHECK(a.mantissa() == 3);
  CHECK(a.exponent() == 5);
  Dyadic z(mpz_class(0), 17);
  CHECK(z.exponent() == 0);
  CHECK(D("3/4") == Dyadic(mpz_class(3), -2));
  CHECK(D("0.375") == Dyadic(mpz_class(3), -3));
  CHECK(D("-5*2^-3").to_string() == "-5*2^-3");
  CHECK(D("-12*2^-5") == D("-3*2^-3"));
  CHECK_THROWS_AS(D("1/3"), std::invalid_argument);
  CHECK_THROWS_AS(D("0.1"), std::invalid_argument);
  CHECK_THROWS_AS(D("abc"), std::invalid_argument);
  CHECK(parse_rational("1e-3") == mpq_class(1, 1000));
}

TEST_CASE("ordering and rounding") {
  CHECK(D("1/4") < D("1/2"));
  CHECK(D("-1/2") < D("-1/4"));
  CHECK(D("-1/2") < D("0"));
  CHECK(D("5/8").floor_to(2) == D("1/2"));
  CHECK(D("5/8").ceil_to(2) == D("3/4"));
  CHECK(D("-5/8").floor_to(2) == D("-3/4"));
  CHECK(D("7/2").floor() == 3);
  CHECK(D("-7/2").floor() == -4);
  CHECK(D("11/16").to_decimal(4) == "0.6875");
  CHECK(D("-11/32").to_decimal(2) == "-0.34");
}

TEST_CASE("interval arithmetic examples") {
  auto ab = I("-3/8", "5/16");
  CHECK(add(DyadicInterval(Dyadic{}), ab) == ab);
  CHECK(mul(DyadicInterval(D("1/2")), I("1/4", "3/8")) == I("1/8", "3/16"));
  CHECK(abs(I("-1/4", "1/8")) == I("0", "1/4"));
  CHECK(abs(I("-1/2", "-1/4")) == I("1/4", "1/2"));
  CHECK(sub(I("1", "2"), I("1/2", "1")) == I("0", "3/2"));
  CHECK(neg(I("1", "2")) == I("-2", "-1"));
  CHECK(mul(I("-1", "2"), I("-3", "1")) == I("-6", "3"));
  CHECK_THROWS_AS(DyadicInterval(D("1"), D("0")), std::invalid_argument);
}

TEST_CASE("compare_strict") {
  CHECK(compare_strict(I("0", "1/4"), I("1/2", "1")) == Ordering::LT);
  CHECK(compare_strict(I("0", "1/2"), I("1/2", "1")) == Ordering::OVERLAP);
  CHECK(compare_strict(I("3/4", "1"), I("0", "1/2")) == Ordering::GT);
}

TEST_CASE("precision ladder") {
  PrecisionLadder ladder{4, 256};
  CHECK(ladder.rungs() == std::vector<int>{4, 8, 16, 32, 64, 128, 256});
  int calls = 0;
  auto third = Real::rational(mpq_class(1, 3));
  // 1/3 vs the dyadic 0.0101...01 (32 bits) needs a rung past 32 bits.
  Dyadic below(mpz_class("1431655765"), -32);
  auto o = decide_strict([&](int p) {
    ++calls;
    return std::pair{third.enclose(p), DyadicInterval(below)};
  });
  CHECK(o == Ordering::GT);
  CHECK(calls == 5);
  CHECK_THROWS_AS(decide_strict([&](int p) {
                    return std::pair{third.enclose(p), third.enclose(p)};
                  }),
                  UndecidedComparison);
}

TEST_CASE("sqrt enclosures") {
  CHECK(sqrt_enclosure(DyadicInterval(Dyadic{}), 30) == DyadicInterval(Dyadic{}));
  auto quarter = sqrt_enclosure(DyadicInterval(D("1/4")), 10);
  CHECK(quarter.contains(D("1/2")));
  CHECK(quarter.within(10));
  auto r2 = sqrt_enclosure(DyadicInterval(Dyadic(2)), 20);
  CHECK(r2.within(20));
  // Oracle: squares of the endpoints straddle 2 exactly.
  CHECK(r2.lo() * r2.lo() <= Dyadic(2));
  CHECK(r2.hi() * r2.hi() >= Dyadic(2));
  CHECK(r2.lo().to_decimal(6) == "1.414213");
  CHECK_THROWS_AS(sqrt_enclosure(I("-1/4", "1"), 8), DomainError);
}

TEST_CASE("exp and ln enclosures") {
  auto e = exp_enclosure(DyadicInterval(Dyadic(1)), 20);
  auto [elo, ehi] = e_oracle();
  CHECK(e.within(20));
  CHECK(encloses(e, elo));
  CHECK(encloses(e, ehi));

  auto ln1 = ln_enclosure(DyadicInterval(Dyadic(1)), 20);
  CHECK(ln1.contains(Dyadic{}));
  CHECK(ln1.within(20));

  auto ln4 = ln_enclosure(DyadicInterval(Dyadic(4)), 20);
  auto [l2lo, l2hi] = ln2_oracle();
  CHECK(ln4.within(20));
  CHECK(encloses(ln4, 2 * l2lo));
  CHECK(encloses(ln4, 2 * l2hi));
  CHECK(ln4.midpoint().to_decimal(5) == "1.38629");

  CHECK_THROWS_AS(ln_enclosure(I("0", "1"), 8), DomainError);
  CHECK_THROWS_AS(ln_enclosure(I("-1", "-1/2"), 8), DomainError);
}

TEST_CASE("pi and sine") {
  auto pi = pi_enclosure(100);
  CHECK(pi.within(100));
  CHECK(pi.lo().to_decimal(20) == "3.14159265358979323846");
  CHECK(sin_pi_enclosure(Dyadic{}, 30) == DyadicInterval(Dyadic{}));
  CHECK(sin_pi_enclosure(D("1/2"), 30) == DyadicInterval(Dyadic(1)));
  CHECK(sin_pi_enclosure(D("3/2"), 30) == DyadicInterval(Dyadic(-1)));
  auto s = sin_pi_enclosure(D("1/4"), 40);
  CHECK(s.within(40));
  CHECK(s.contains(Dyadic::from_double(std::sqrt(0.5)).floor_to(60)) ==
        s.contains(Dyadic::from_double(std::sqrt(0.5)).ceil_to(60)));
  CHECK(std::abs(s.midpoint().to_double() - std::sqrt(0.5)) < 1e-12);
  auto t = sin_pi_enclosure(D("127/4"), 30);  // 31.75 ≡ 1.75 (mod 2)
  CHECK(std::abs(t.midpoint().to_double() + std::sqrt(0.5)) < 1e-8);
}

TEST_CASE("soundness by sampling") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<long> mant(1, (1L << 30));
  std::uniform_int_distribution<int> expo(-34, -26);
  for (int trial = 0; trial < 1000; ++trial) {
    Dyadic x(mpz_class(mant(rng)), expo(rng));
    int n = 24;
    const double xd = x.to_double();
    struct Case {
      DyadicInterval coarse, fine;
      double libm;
    };
    Case cases[] = {
        {sqrt_enclosure(x, n), sqrt_enclosure(x, 2 * n), std::sqrt(xd)},
        {exp_enclosure(x, n), exp_enclosure(x, 2 * n), std::exp(xd)},
        {ln_enclosure(x, n), ln_enclosure(x, 2 * n), std::log(xd)},
        {exp_enclosure(-x, n), exp_enclosure(-x, 2 * n), std::exp(-xd)},
    };
    for (const auto& c : cases) {
      REQUIRE(c.coarse.within(n));
      // Both contain the true value, so they must intersect and the fine
      // one must agree with libm to double accuracy.
      REQUIRE(compare_strict(c.coarse, c.fine) == Ordering::OVERLAP);
      REQUIRE(std::abs(c.fine.midpoint().to_double() - c.libm) <=
              1e-13 * std::max(1.0, std::abs(c.libm)));
    }
  }
}

TEST_CASE("inclusion monotonicity") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> m(-1000, 1000);
  auto rand_interval = [&] {
    Dyadic a(mpz_class(m(rng)), -8);
    Dyadic b(mpz_class(m(rng)), -8);
    return DyadicInterval(std::min(a, b), std::max(a, b));
  };
  for (int i = 0; i < 500; ++i) {
    auto a = rand_interval();
    auto b = rand_interval();
    auto a2 = DyadicInterval(a.lo() - Dyadic(1).scaled(-6), a.hi());
    auto b2 = DyadicInterval(b.lo(), b.hi() + Dyadic(1).scaled(-5));
    CHECK((a2 + b2).contains(a + b));
    CHECK((a2 - b2).contains(a - b));
    CHECK((a2 * b2).contains(a * b));
    CHECK(abs(a2).contains(abs(a)));
  }
}

TEST_CASE("precision convergence") {
  for (auto x : {Dyadic(2), D("3/8"), D("17/4")}) {
    for (int n : {4, 8, 16, 32}) {
      DyadicInterval pt(x);
      CHECK(sqrt_enclosure(pt, n + 1).width() <= sqrt_enclosure(pt, n).width());
      CHECK(exp_enclosure(pt, n + 1).width() <= exp_enclosure(pt, n).width());
      CHECK(ln_enclosure(pt, n + 1).width() <= ln_enclosure(pt, n).width());
      CHECK(ln_enclosure(pt, n + 1).within(n + 1));
      CHECK(exp_enclosure(pt, n + 1).within(n + 1));
    }
  }
}

TEST_CASE("real numbers") {
  auto third = Real::rational(mpq_class(1, 3));
  auto e = third.enclose(10);
  CHECK(e.within(10));
  CHECK(encloses(e, mpq_class(1, 3)));
  auto sum = third + third + third;
  REQUIRE(sum.exact());
  CHECK(*sum.exact() == 1);
  auto fn = Real::from_oracle([](int p) { return sqrt_enclosure(DyadicInterval(Dyadic(2)), p); });
  auto s = fn + third;
  auto se = s.enclose(30);
  CHECK(se.within(30));
  CHECK(std::abs(se.midpoint().to_double() - (std::sqrt(2.0) + 1.0 / 3)) < 1e-8);
}
