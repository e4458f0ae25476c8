#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairbits/bitsource.hpp"
#include "fairbits/dyadic.hpp"
#include "fairbits/measures.hpp"
#include "fairbits/wiener.hpp"

namespace fairbits {

//---------------------------------------------------------------------------//
// Kolmogorov-Smirnov
//---------------------------------------------------------------------------//

struct KsResult {
  double statistic = 0;  // D
  double p_value = 0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov tail P(K > lambda) from the first two terms of
/// 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2); the omitted terms add at most
/// 2 exp(-18 lambda^2).
double kolmogorov_tail(double lambda);

/// One-sample test against a distribution's CDF (evaluated to 2^-40).
/// Requires at least 20 samples.
KsResult ks_test(std::vector<Dyadic> samples, const SemiInverseCdf& cdf);
/// Same against a plain double CDF, for scaled normal references.
KsResult ks_test(std::vector<double> samples, double (*cdf)(double, double),
                 double param);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Normal CDF with variance `var`, double precision, for test references.
double normal_cdf(double x, double var);

//---------------------------------------------------------------------------//
// Reference constructions of Brownian motion
//---------------------------------------------------------------------------//

/// Standard Levy-Ciesielski hat function at level m >= 1, j = 1..2^{m-1}:
/// support [(2j-2) 2^-m, 2j 2^-m], peak 2^{(m-1)/2} 2^-m at the center.
/// Returns the enclosure of phi_{m,j}(t).
DyadicInterval schauder_hat(int m, std::uint64_t j, const Dyadic& t, int n);

/// Partial sum W^N(t) = R_0 t + sum_{m=1}^N sum_j R_{m,j} phi_{m,j}(t)
/// with the R drawn as standard normals. Coefficient (m, j) comes from
/// child stream index (2^m + j - 1) (R_0 uses index 0), so values at
/// different t agree on shared coefficients. Results have width <= 2^-n.
/// Bits read from s are added to *bits_used when given.
std::vector<DyadicInterval> levy_ciesielski(int N, const BitStream& s,
                                            const std::vector<Dyadic>& ts, int n,
                                            std::uint64_t* bits_used = nullptr);

/// W^N(t) = sqrt(2) sum_{k=1}^N R_k sin((k-1/2) pi t) / ((k-1/2) pi).
std::vector<DyadicInterval> karhunen_loeve(int N, const BitStream& s,
                                           const std::vector<Dyadic>& ts, int n,
                                           std::uint64_t* bits_used = nullptr);

/// W^N(t) = S_{floor(N t)} / sqrt(N) for N fair +-1 steps drawn from s.
/// Values are exact when N is a power of four; otherwise enclosed to 2^-n.
std::vector<DyadicInterval> donsker(std::uint64_t N, BitStream& s,
                                    const std::vector<Dyadic>& ts, int n = 64);

//---------------------------------------------------------------------------//
// Empirical c-distribution
//---------------------------------------------------------------------------//

struct CDistReport {
  std::vector<TableRow> rows;
  std::vector<Dyadic> values;  // c(W) per path, sorted
  std::size_t floor_hits = 0;
  std::string csv;  // with metadata header
};

/// Tabulates c(W) over `paths` Levy-Ciesielski paths on the grid of the
/// given depth (coefficients through level `depth`, so the grid values are
/// exact Brownian marginals). Path k uses child k of `s`.
CDistReport estimate_c_distribution(std::size_t paths, int depth,
                                    const BitStream& s, const std::string& seed_tag,
                                    int threads = 1);

}  // namespace fairbits
