#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fairbits/oracle.hpp"

using namespace fairbits;

namespace {

Dyadic frac(long num, int log2den) { return Dyadic(num).scaled(-log2den); }

std::vector<Dyadic> grid(int depth) {
  std::vector<Dyadic> ts;
  for (long k = 0; k <= (1L << depth); ++k) ts.push_back(frac(k, depth));
  return ts;
}

double mid(const DyadicInterval& v) { return v.midpoint().to_double(); }

double median(std::vector<Dyadic> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2].to_double();
}

}  // namespace

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_tail(0.0) == doctest::Approx(1.0));
  // Reference values of the Kolmogorov distribution.
  CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.0494).epsilon(0.01));
  CHECK(kolmogorov_tail(1.63) == doctest::Approx(0.0098).epsilon(0.02));
  CHECK(kolmogorov_tail(3.0) < 1e-6);
}

TEST_CASE("ks examples") {
  auto u = make_uniform();
  const int N = 1000;
  std::vector<Dyadic> grid_samples;
  for (int k = 1; k <= N; ++k) {
    grid_samples.push_back(Dyadic::floor_of(mpq_class(k, N + 1), 60));
  }
  CHECK(ks_test(grid_samples, *u).statistic <= 1.0 / (N + 1) + 1e-12);

  std::vector<Dyadic> constant(100, frac(1, 1));
  CHECK(ks_test(constant, *u).statistic >= 0.5);

  CHECK_THROWS_AS(ks_test(std::vector<Dyadic>(19, Dyadic{}), *u), std::invalid_argument);
  CHECK_THROWS_AS(ks_two_sample(std::vector<double>(10, 0.0), std::vector<double>(30, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("ks significance over 100 repetitions") {
  auto u = make_uniform();
  auto s = BitStream::seeded(100);
  int passes = 0;
  for (int r = 0; r < 100; ++r) {
    std::vector<Dyadic> xs;
    for (int i = 0; i < 10000; ++i) xs.push_back(rho_b_enclosure(s.take(32)).midpoint());
    passes += ks_test(xs, *u).p_value > 0.01;
  }
  CHECK(passes >= 98);
}

TEST_CASE("two-sample ks") {
  auto s = BitStream::seeded(101);
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(rho_b_enclosure(s.take(32)).lo().to_double());
    b.push_back(rho_b_enclosure(s.take(32)).lo().to_double());
    c.push_back(rho_b_enclosure(s.take(32)).lo().to_double() * 0.9);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 0.01);
}

TEST_CASE("schauder hats") {
  for (int m = 1; m <= 6; ++m) {
    for (std::uint64_t j = 1; j <= (std::uint64_t{1} << (m - 1)); ++j) {
      Dyadic center(mpz_class(static_cast<unsigned long>(2 * j - 1)), -m);
      auto peak = schauder_hat(m, j, center, 40);
      double expect = std::pow(2.0, (m - 1) / 2.0) * std::pow(2.0, -m);
      CHECK(peak.lo().to_double() <= expect + 1e-12);
      CHECK(peak.hi().to_double() >= expect - 1e-12);
      Dyadic lo(mpz_class(static_cast<unsigned long>(2 * j - 2)), -m);
      Dyadic hi(mpz_class(static_cast<unsigned long>(2 * j)), -m);
      CHECK(schauder_hat(m, j, lo, 40) == DyadicInterval(Dyadic{}));
      CHECK(schauder_hat(m, j, hi, 40) == DyadicInterval(Dyadic{}));
    }
  }
  CHECK_THROWS(schauder_hat(0, 1, Dyadic{}, 10));
  CHECK_THROWS(schauder_hat(3, 5, Dyadic{}, 10));
}

TEST_CASE("hat supports are disjoint within a level") {
  auto ts = grid(9);
  for (int m = 1; m <= 8; ++m) {
    for (const auto& t : ts) {
      int nonzero = 0;
      for (std::uint64_t j = 1; j <= (std::uint64_t{1} << (m - 1)); ++j) {
        nonzero += schauder_hat(m, j, t, 20).hi().sign() > 0;
      }
      CHECK(nonzero <= 1);
    }
  }
}

TEST_CASE("levy-ciesielski") {
  auto s = BitStream::seeded(20);
  CHECK(levy_ciesielski(5, s, {Dyadic{}}, 20)[0] == DyadicInterval(Dyadic{}));

  // Exact on the grid of level n for every N >= n.
  for (int i = 0; i < 20; ++i) {
    auto child = s.child(i);
    for (int n = 0; n <= 5; ++n) {
      auto base = levy_ciesielski(n, child, grid(n), 30);
      for (int N : {n + 1, n + 3, 12}) CHECK(levy_ciesielski(N, child, grid(n), 30) == base);
    }
  }

  std::vector<double> w1, whalf;
  for (int i = 0; i < 10000; ++i) {
    w1.push_back(mid(levy_ciesielski(0, s.child(1000 + i), {Dyadic(1)}, 24)[0]));
    whalf.push_back(mid(levy_ciesielski(8, s.child(1000 + i), {frac(1, 1)}, 24)[0]));
  }
  CHECK(ks_test(w1, normal_cdf, 1.0).p_value > 0.01);
  CHECK(ks_test(whalf, normal_cdf, 0.5).p_value > 0.01);
}

TEST_CASE("karhunen-loeve") {
  auto s = BitStream::seeded(21);
  CHECK(karhunen_loeve(8, s, {Dyadic{}}, 20)[0] == DyadicInterval(Dyadic{}));

  const int runs = 10000;
  double sum = 0, sq = 0;
  for (int i = 0; i < runs; ++i) {
    double x = mid(karhunen_loeve(1, s.child(i), {Dyadic(1)}, 24)[0]);
    sum += x;
    sq += x * x;
  }
  double var = (sq - sum * sum / runs) / (runs - 1);
  double expect = 8 / (std::numbers::pi * std::numbers::pi);
  CHECK(std::abs(var - expect) <= 4 * expect * std::sqrt(2.0 / runs));

  std::vector<double> w1;
  for (int i = 0; i < 5000; ++i) {
    w1.push_back(mid(karhunen_loeve(64, s.child(50000 + i), {Dyadic(1)}, 16)[0]));
  }
  CHECK(ks_test(w1, normal_cdf, 1.0).p_value > 0.01);
}

TEST_CASE("donsker") {
  auto steps = BitStream::scripted(Word::parse("1101"));
  auto v = donsker(4, steps, {Dyadic{}, frac(1, 1), Dyadic(1)});
  CHECK(v[0] == DyadicInterval(Dyadic{}));
  CHECK(v[1] == DyadicInterval(Dyadic(1)));  // (1 + 1) / 2
  CHECK(v[2] == DyadicInterval(Dyadic(1)));  // (1 + 1 - 1 + 1) / 2

  auto s = BitStream::seeded(22);
  auto odd = donsker(5, s, {Dyadic(1)}, 30);
  CHECK(odd[0].width() <= frac(1, 30));

  std::vector<double> w1;
  for (int i = 0; i < 5000; ++i) w1.push_back(mid(donsker(10000, s, {Dyadic(1)})[0]));
  CHECK(ks_test(w1, normal_cdf, 1.0).p_value > 0.01);
}

TEST_CASE("estimate_c_distribution format and reproducibility") {
  auto s = BitStream::seeded(23);
  auto r = estimate_c_distribution(100, 4, s, "23");
  REQUIRE(!r.rows.empty());
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i - 1].x < r.rows[i].x);
  for (const auto& v : r.values) CHECK(v >= Dyadic(1));
  CHECK(r.rows.back().f == Dyadic(1));
  auto loaded = parse_table_csv(r.csv);
  CHECK(loaded.size() == r.rows.size());
  CHECK_NOTHROW(cdf_from_table(loaded));
  CHECK(r.csv.find("paths=100") != std::string::npos);
  CHECK(r.csv.find("depth=4") != std::string::npos);
  CHECK(r.csv.find("family=levy") != std::string::npos);
  CHECK(r.csv.find("seed=23") != std::string::npos);

  CHECK(estimate_c_distribution(100, 4, s, "23").csv == r.csv);
  CHECK(estimate_c_distribution(100, 4, s, "23", 3).csv == r.csv);
  CHECK_THROWS(estimate_c_distribution(99, 4, s, "23"));
}

TEST_CASE("deeper grids give larger c") {
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    auto s = BitStream::seeded(300 + rep);
    auto shallow = estimate_c_distribution(100, 4, s, std::to_string(rep));
    auto deep = estimate_c_distribution(100, 7, s, std::to_string(rep));
    CHECK(median(deep.values) >= median(shallow.values));
  }
}
