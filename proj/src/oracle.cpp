#include "fairbits/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fairbits {

//---------------------------------------------------------------------------//
// Kolmogorov-Smirnov
//---------------------------------------------------------------------------//

double kolmogorov_tail(double lambda) {
  if (lambda <= 0) return 1.0;
  double l2 = lambda * lambda;
  double p = 2.0 * (std::exp(-2.0 * l2) - std::exp(-8.0 * l2));
  return std::clamp(p, 0.0, 1.0);
}

namespace {

double effective_lambda(double n, double d) {
  double rn = std::sqrt(n);
  return (rn + 0.12 + 0.11 / rn) * d;
}

template <class F>
KsResult ks_sorted(std::vector<double> xs, F&& cdf) {
  if (xs.size() < 20) throw std::invalid_argument("KS test needs at least 20 samples");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_tail(effective_lambda(n, d)), xs.size()};
}

}  // namespace

KsResult ks_test(std::vector<Dyadic> samples, const SemiInverseCdf& cdf) {
  std::vector<double> xs;
  std::map<double, double> f;
  for (const auto& x : samples) {
    double d = x.to_double();
    xs.push_back(d);
    if (!f.count(d)) f[d] = cdf.cdf(x, 40).midpoint().to_double();
  }
  return ks_sorted(std::move(xs), [&](double x) { return f.at(x); });
}

KsResult ks_test(std::vector<double> samples, double (*cdf)(double, double), double param) {
  return ks_sorted(std::move(samples), [&](double x) { return cdf(x, param); });
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 20 || b.size() < 20) {
    throw std::invalid_argument("KS test needs at least 20 samples per side");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, kolmogorov_tail(effective_lambda(na * nb / (na + nb), d)), a.size() + b.size()};
}

double normal_cdf(double x, double var) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * var));
}

//---------------------------------------------------------------------------//
// Brownian motion constructions
//---------------------------------------------------------------------------//

namespace {

const Distribution& normal() {
  static const Distribution g = make_gaussian();
  return g;
}

int guard_bits(std::size_t terms) {
  int g = 2;
  while ((std::size_t{1} << g) < terms + 1) ++g;
  return g + 1;
}

/// 2^{-(m+1)/2}
DyadicInterval hat_peak(int m, int p) {
  if ((m + 1) % 2 == 0) return Dyadic(1).scaled(-(m + 1) / 2);
  return scaled(sqrt_enclosure(DyadicInterval(Dyadic(2)), p + 2), -(m + 2) / 2);
}

/// Coefficients drawn lazily, each from its own child stream.
class Coefficients {
 public:
  explicit Coefficients(const BitStream& s) : root_(s) {}

  DyadicInterval at(std::uint64_t index, int p) {
    auto it = draws_.find(index);
    if (it == draws_.end()) {
      it = draws_.emplace(index, LazySample(normal(), root_.child(index))).first;
    }
    return it->second.enclose(p);
  }

  std::uint64_t bits_used() const {
    std::uint64_t total = 0;
    for (const auto& [index, z] : draws_) total += z.bits_used();
    return total;
  }

 private:
  BitStream root_;
  std::map<std::uint64_t, LazySample> draws_;
};

}  // namespace

DyadicInterval schauder_hat(int m, std::uint64_t j, const Dyadic& t, int n) {
  if (m < 1 || j < 1 || j > (std::uint64_t{1} << (m - 1))) {
    throw std::invalid_argument("hat index out of range");
  }
  Dyadic center(mpz_class(static_cast<unsigned long>(2 * j - 1)), -m);
  Dyadic offset = (t - center).abs().scaled(m);  // |t - center| / half-width
  if (offset >= Dyadic(1)) return Dyadic{};
  return round_outward(hat_peak(m, n + 2) * DyadicInterval(Dyadic(1) - offset), n + 1);
}

std::vector<DyadicInterval> levy_ciesielski(int N, const BitStream& s,
                                            const std::vector<Dyadic>& ts, int n,
                                            std::uint64_t* bits_used) {
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  Coefficients R(s);
  std::vector<DyadicInterval> out;
  out.reserve(ts.size());
  for (const Dyadic& t : ts) {
    if (t.sign() < 0 || t > Dyadic(1)) throw DomainError("t outside [0,1]");
    // Hats with t strictly inside their support; at most one per level.
    std::vector<std::pair<int, std::uint64_t>> active;
    for (int m = 1; m <= N; ++m) {
      mpz_class k = t.scaled(m - 1).floor();
      if (Dyadic(k, -(m - 1)) == t) continue;  // on a support boundary
      active.emplace_back(m, k.get_ui() + 1);
    }
    const int g = guard_bits(active.size() + 1);
    for (int extra = g;; extra += 8) {
      int p = n + extra;
      DyadicInterval w = t.is_zero() ? DyadicInterval(Dyadic{}) : R.at(0, p + 1) * DyadicInterval(t);
      for (auto [m, j] : active) {
        std::uint64_t index = (std::uint64_t{1} << m) + j - 1;
        w = w + R.at(index, p + 2) * schauder_hat(m, j, t, p + 2);
      }
      w = round_outward(w, n + 2);
      if (w.within(n)) {
        out.push_back(w);
        break;
      }
    }
  }
  if (bits_used) *bits_used += R.bits_used();
  return out;
}

namespace {

/// sqrt(2) sin((k-1/2) pi t) / ((k-1/2) pi), cached per (k, t, precision).
DyadicInterval kl_basis(std::uint64_t k, const Dyadic& t, int p) {
  static std::mutex mutex;
  static std::map<std::tuple<std::uint64_t, Dyadic, int>, DyadicInterval> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find({k, t, p}); it != cache.end()) return it->second;
  }
  Dyadic freq(mpz_class(static_cast<unsigned long>(2 * k - 1)), -1);  // k - 1/2
  DyadicInterval s = sin_pi_enclosure(freq * t, p + 4);
  DyadicInterval den = round_outward(DyadicInterval(freq) * pi_enclosure(p + 8), p + 8);
  DyadicInterval v = divide(sqrt_enclosure(DyadicInterval(Dyadic(2)), p + 4) * s, den, p + 2);
  v = round_outward(v, p + 2);
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() > 200000) cache.clear();
  cache.emplace(std::tuple{k, t, p}, v);
  return v;
}

}  // namespace

std::vector<DyadicInterval> karhunen_loeve(int N, const BitStream& s,
                                           const std::vector<Dyadic>& ts, int n,
                                           std::uint64_t* bits_used) {
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  Coefficients R(s);
  const int g = guard_bits(static_cast<std::size_t>(N));
  std::vector<DyadicInterval> out;
  out.reserve(ts.size());
  for (const Dyadic& t : ts) {
    if (t.sign() < 0 || t > Dyadic(1)) throw DomainError("t outside [0,1]");
    if (t.is_zero()) {
      out.emplace_back(Dyadic{});
      continue;
    }
    for (int extra = g;; extra += 8) {
      int p = n + extra;
      DyadicInterval w(Dyadic{});
      for (int k = 1; k <= N; ++k) {
        auto ku = static_cast<std::uint64_t>(k);
        w = w + R.at(ku, p + 1) * kl_basis(ku, t, p + 1);
      }
      w = round_outward(w, n + 2);
      if (w.within(n)) {
        out.push_back(w);
        break;
      }
    }
  }
  if (bits_used) *bits_used += R.bits_used();
  return out;
}

std::vector<DyadicInterval> donsker(std::uint64_t N, BitStream& s,
                                    const std::vector<Dyadic>& ts, int n) {
  if (N == 0) throw std::invalid_argument("N must be positive");
  std::vector<std::uint64_t> need;
  for (const Dyadic& t : ts) {
    if (t.sign() < 0 || t > Dyadic(1)) throw DomainError("t outside [0,1]");
    need.push_back((Dyadic(mpz_class(static_cast<unsigned long>(N)), 0) * t).floor().get_ui());
  }
  std::vector<long> partial(N + 1, 0);
  for (std::uint64_t i = 1; i <= N; ++i) {
    partial[i] = partial[i - 1] + (s.next_bit() ? 1 : -1);
  }
  mpz_class root;
  mpz_class nz(static_cast<unsigned long>(N));
  mpz_sqrt(root.get_mpz_t(), nz.get_mpz_t());
  const bool square = root * root == nz;
  std::vector<DyadicInterval> out;
  for (auto k : need) {
    mpz_class S(partial[k]);
    if (square) {
      out.push_back(Real::rational(mpq_class(S, root)).enclose(n));
    } else {
      DyadicInterval r = sqrt_enclosure(DyadicInterval(Dyadic(nz, 0)), n + 8);
      out.push_back(round_outward(divide(DyadicInterval(Dyadic(S, 0)), r, n + 2), n + 1));
    }
  }
  return out;
}

//---------------------------------------------------------------------------//
// c-distribution
//---------------------------------------------------------------------------//

CDistReport estimate_c_distribution(std::size_t paths, int depth, const BitStream& s,
                                    const std::string& seed_tag, int threads) {
  if (paths < 100) throw std::invalid_argument("estimate_c_distribution needs >= 100 paths");
  const std::size_t grid = (std::size_t{1} << depth) + 1;
  std::vector<Dyadic> ts;
  for (std::size_t i = 0; i < grid; ++i) {
    ts.emplace_back(mpz_class(static_cast<unsigned long>(i)), -depth);
  }
  std::vector<CEstimate> results(paths, CEstimate{DyadicInterval(Dyadic(1)), false});
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t k = begin; k < paths; k += step) {
      auto values = levy_ciesielski(depth, s.child(k), ts, 40);
      results[k] = compute_c(values, levy_family(), 20);
    }
  };
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  CDistReport report;
  for (const auto& r : results) {
    report.values.push_back(r.c.hi());
    if (r.at_floor) ++report.floor_hits;
  }
  std::sort(report.values.begin(), report.values.end());
  const auto total = static_cast<long>(paths);
  for (std::size_t i = 0; i < report.values.size(); ++i) {
    if (i + 1 < report.values.size() && report.values[i + 1] == report.values[i]) continue;
    mpq_class f(static_cast<long>(i + 1), total);
    f.canonicalize();
    report.rows.push_back({report.values[i], Dyadic::floor_of(f, 32)});
  }
  report.rows.back().f = Dyadic(1);

  std::ostringstream csv;
  csv << "# empirical distribution of c(W) on the dyadic grid\n"
      << "# paths=" << paths << " depth=" << depth << " family=levy seed=" << seed_tag
      << " construction=levy-ciesielski precision=20\n"
      << "# floor_hits=" << report.floor_hits << "\n"
      << "x,F\n";
  for (const auto& row : report.rows) {
    csv << row.x.to_string() << "," << row.f.to_string() << "\n";
  }
  report.csv = csv.str();
  return report;
}

}  // namespace fairbits
