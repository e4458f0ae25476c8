// Validated standard normal CDF and quantile.
//
// The upper tail Q(x) = 1 - Phi(x) is tabulated at nodes x_i = i/16 by
// integrating the density panel by panel from Q(0) = 1/2. Each node keeps
// the Taylor coefficients of the integral of phi around it,
//   int_{x_i}^{x_i+u} phi = phi(x_i) sum_k (-1)^k He_k(x_i) u^{k+1} / (k+1)!,
// truncated at K terms. Cramer's inequality gives |phi^(K)| <= sqrt(K!)/2,
// so the integrated remainder is at most u^{K+1} / (2 (K+1) sqrt(K!)).
// Past the last node Q is bounded by its value there. Tables are built per
// precision tier (multiples of 64 bits) and cached.

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "fairbits/measures.hpp"

namespace fairbits {

namespace {

constexpr int kNodesPerUnit = 16;
constexpr int kNodeShift = 4;  // log2(kNodesPerUnit)

// Coefficients as fixed-point integers at scale 2^-work: a_k in [lo, hi].
struct Node {
  DyadicInterval q;  // Q(x_i)
  std::vector<mpz_class> lo;
  std::vector<mpz_class> hi;
};

struct Tier {
  int precision = 0;
  int work = 0;
  Dyadic remainder;  // bound on the truncation error over one panel
  std::vector<Node> nodes;
  Dyadic tail;  // Q(x) <= tail beyond the last node
};

int terms_for(int work) {
  for (int k = 1;; ++k) {
    double bits = (kNodeShift * (k + 1)) + std::log2(2.0 * (k + 1)) +
                  0.5 * std::lgamma(k + 1.0) / std::log(2.0);
    if (bits >= work + 2) return k;
  }
}

/// sum_k a_k u^{k+1} for 0 <= u <= 1/16. With u >= 0 the lower and upper
/// Horner chains are each monotone, so they can run separately.
DyadicInterval horner(const Node& node, const Dyadic& u, int work) {
  // u = U 2^-s exactly.
  const std::int64_t s = std::max<std::int64_t>(0, -u.exponent());
  const mpz_class U = u.exponent() >= 0 ? mpz_class(u.mantissa() << u.exponent())
                                         : u.mantissa();
  const auto shift = static_cast<mp_bitcnt_t>(s);
  mpz_class lo = node.lo.back();
  mpz_class hi = node.hi.back();
  for (auto k = node.lo.size() - 1; k-- > 0;) {
    lo *= U;
    mpz_fdiv_q_2exp(lo.get_mpz_t(), lo.get_mpz_t(), shift);
    lo += node.lo[k];
    hi *= U;
    mpz_cdiv_q_2exp(hi.get_mpz_t(), hi.get_mpz_t(), shift);
    hi += node.hi[k];
  }
  lo *= U;
  mpz_fdiv_q_2exp(lo.get_mpz_t(), lo.get_mpz_t(), shift);
  hi *= U;
  mpz_cdiv_q_2exp(hi.get_mpz_t(), hi.get_mpz_t(), shift);
  return {Dyadic(lo, -work), Dyadic(hi, -work)};
}

mpz_class fixed_floor(const Dyadic& d, int work) { return d.scaled(work).floor(); }
mpz_class fixed_ceil(const Dyadic& d, int work) { return -(-d).scaled(work).floor(); }

Tier build_tier(int precision) {
  Tier t;
  t.precision = precision;
  t.work = precision + 24;
  const int w = t.work;
  const int K = terms_for(w);

  mpz_class fact = 1;
  for (int k = 2; k <= K; ++k) fact *= k;
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), fact.get_mpz_t());  // <= sqrt(K!)
  t.remainder = div_ceil(Dyadic(1), Dyadic(root * 2 * (K + 1), 0), w + 8)
                    .scaled(-static_cast<std::int64_t>(kNodeShift) * (K + 1));

  // Beyond X = sqrt(2 (p+10) ln 2), Q(X) < exp(-X^2/2) <= 2^-(p+10).
  const int last = static_cast<int>(std::ceil(
                       kNodesPerUnit * std::sqrt(2.0 * (precision + 10) * std::log(2.0)))) + 1;

  DyadicInterval sqrt2pi =
      sqrt_enclosure(scaled(pi_enclosure(w + 8), 1), w + 8);
  const Dyadic panel = Dyadic(1).scaled(-kNodeShift);

  DyadicInterval q(Dyadic(1).scaled(-1));
  t.nodes.reserve(static_cast<std::size_t>(last) + 1);
  for (int i = 0; i <= last; ++i) {
    Dyadic x = Dyadic(i).scaled(-kNodeShift);
    DyadicInterval phi =
        divide(exp_enclosure(DyadicInterval(-(x * x).scaled(-1)), w + 8),
               sqrt2pi, w + 8);
    Node node;
    node.q = q;
    node.lo.reserve(static_cast<std::size_t>(K));
    node.hi.reserve(static_cast<std::size_t>(K));
    Dyadic he_prev = 1;  // He_{k-1}
    Dyadic he = 1;       // He_k
    mpz_class denom = 1;
    for (int k = 0; k < K; ++k) {
      if (k == 1) {
        he_prev = 1;
        he = x;
      } else if (k > 1) {
        Dyadic next = x * he - Dyadic(k - 1) * he_prev;
        he_prev = he;
        he = next;
      }
      denom *= (k + 1);
      Dyadic signed_he = (k % 2 == 0) ? he : -he;
      DyadicInterval a =
          divide(phi * DyadicInterval(signed_he), DyadicInterval(Dyadic(denom, 0)), w);
      node.lo.push_back(fixed_floor(a.lo(), w));
      node.hi.push_back(fixed_ceil(a.hi(), w));
    }
    DyadicInterval integral = horner(node, panel, w);
    q = round_outward(q - integral, w);
    q = DyadicInterval(q.lo() - t.remainder, q.hi() + t.remainder);
    t.nodes.push_back(std::move(node));
  }
  t.tail = std::max(Dyadic{}, t.nodes.back().q.hi());
  return t;
}

const Tier& tier_for(int precision) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Tier>> tiers;
  int p = ((std::max(precision, 1) + 63) / 64) * 64;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = tiers[p];
  if (!slot) slot = std::make_unique<Tier>(build_tier(p));
  return *slot;
}

/// Upper tail Q(y) for y >= 0.
DyadicInterval upper_tail(const Tier& t, const Dyadic& y) {
  mpz_class idx = y.scaled(kNodeShift).floor();
  if (idx >= static_cast<long>(t.nodes.size()) - 1) {
    return {Dyadic{}, t.tail};
  }
  const Node& node = t.nodes[idx.get_ui()];
  Dyadic u = y - Dyadic(idx, -kNodeShift);
  DyadicInterval q = node.q;
  if (!u.is_zero()) {
    DyadicInterval s = horner(node, u, t.work);
    q = q - s;
    q = DyadicInterval(q.lo() - t.remainder, q.hi() + t.remainder);
  }
  Dyadic lo = std::max(Dyadic{}, q.lo());
  Dyadic hi = std::min(Dyadic(1).scaled(-1), q.hi());
  return round_outward(DyadicInterval(lo, std::max(lo, hi)), t.work);
}

int log2_inverse(const Dyadic& q) {
  return q.is_zero() ? 0 : static_cast<int>(std::max<std::int64_t>(0, -q.magnitude()));
}

/// Enclosure of the y >= 0 with Q(y) = q, for dyadic q in (0, 1/2).
DyadicInterval tail_root(const Dyadic& q, int n) {
  double guess = 0.0;
  try {
    guess = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q.to_double());
  } catch (const std::exception&) {
    guess = 0.0;
  }
  if (!std::isfinite(guess) || guess < 0) guess = 0.0;
  const Dyadic g = Dyadic::from_double(guess);
  const int base = n + log2_inverse(q) + 12;
  const Dyadic target_width = Dyadic(1).scaled(-n);

  for (int p = base; p <= base + 64 * 8; p += 64) {
    const Tier& t = tier_for(p);
    // GT: Q(y) > q, so y lies below the root.
    auto side = [&](const Dyadic& y) {
      return compare_strict(upper_tail(t, y), DyadicInterval(q));
    };
    Dyadic step = Dyadic(1).scaled(-(n + 3));
    Dyadic lo = std::max(Dyadic{}, (g - step).floor_to(n + 3));
    Dyadic hi = std::max(lo + step, (g + step).ceil_to(n + 3));
    bool ok = true;
    for (Dyadic s = step; ok && !lo.is_zero() && side(lo) != Ordering::GT; s = s.scaled(1)) {
      lo = std::max(Dyadic{}, lo - s);
      if (s > Dyadic(64)) ok = false;
    }
    for (Dyadic s = step; ok && side(hi) != Ordering::LT; s = s.scaled(1)) {
      hi = hi + s;
      if (s > Dyadic(64)) ok = false;
    }
    while (ok && hi - lo > target_width) {
      Dyadic mid = (lo + hi).scaled(-1);
      switch (side(mid)) {
        case Ordering::GT: lo = mid; break;
        case Ordering::LT: hi = mid; break;
        case Ordering::OVERLAP: ok = false; break;
      }
    }
    if (ok) return {lo, hi};
  }
  throw UndecidedComparison("normal quantile did not resolve");
}

}  // namespace

DyadicInterval gaussian_cdf(const Dyadic& x, int n) {
  const Tier& t = tier_for(n + 8);
  if (x.sign() >= 0) {
    return DyadicInterval(Dyadic(1)) - upper_tail(t, x);
  }
  return upper_tail(t, -x);
}

DyadicInterval gaussian_quantile(const Dyadic& t, int n) {
  if (t.sign() <= 0 || t >= Dyadic(1)) {
    throw DomainError("normal quantile outside (0,1)");
  }
  const Dyadic half = Dyadic(1).scaled(-1);
  if (t == half) return Dyadic{};
  if (t < half) return -tail_root(t, n);
  return tail_root(Dyadic(1) - t, n);
}

}  // namespace fairbits
