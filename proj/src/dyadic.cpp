#include "fairbits/dyadic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <sstream>

namespace fairbits {

namespace {

mpz_class shifted_left(const mpz_class& m, std::int64_t k) {
  mpz_class r;
  mpz_mul_2exp(r.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
  return r;
}

bool is_power_of_two(const mpz_class& d) {
  return d > 0 && mpz_popcount(d.get_mpz_t()) == 1;
}

std::string trim(std::string_view text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

}  // namespace

//---------------------------------------------------------------------------//
// Dyadic
//---------------------------------------------------------------------------//

Dyadic::Dyadic(long value) : mantissa_(value) { canonicalize(); }

Dyadic::Dyadic(mpz_class mantissa, std::int64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent) {
  canonicalize();
}

void Dyadic::canonicalize() {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  auto tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
  if (tz > 0) {
    mpz_tdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), tz);
    exponent_ += static_cast<std::int64_t>(tz);
  }
}

std::int64_t Dyadic::magnitude() const {
  return static_cast<std::int64_t>(mpz_sizeinbase(mantissa_.get_mpz_t(), 2)) -
         1 + exponent_;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.exponent_ <= b.exponent_) {
    return {a.mantissa_ + shifted_left(b.mantissa_, b.exponent_ - a.exponent_),
            a.exponent_};
  }
  return {shifted_left(a.mantissa_, a.exponent_ - b.exponent_) + b.mantissa_,
          b.exponent_};
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return {a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_};
}

Dyadic Dyadic::scaled(std::int64_t k) const {
  if (is_zero()) return {};
  Dyadic r = *this;
  r.exponent_ += k;
  return r;
}

Dyadic Dyadic::floor_to(int precision) const {
  if (exponent_ >= -precision) return *this;
  mpz_class q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(),
                  static_cast<mp_bitcnt_t>(-precision - exponent_));
  return {q, -precision};
}

Dyadic Dyadic::ceil_to(int precision) const {
  if (exponent_ >= -precision) return *this;
  mpz_class q;
  mpz_cdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(),
                  static_cast<mp_bitcnt_t>(-precision - exponent_));
  return {q, -precision};
}

mpz_class Dyadic::floor() const {
  if (exponent_ >= 0) return shifted_left(mantissa_, exponent_);
  mpz_class q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(),
                  static_cast<mp_bitcnt_t>(-exponent_));
  return q;
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  int sa = a.sign();
  int sb = b.sign();
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  // Same sign: a cheap magnitude test settles most cases.
  auto ma = a.magnitude();
  auto mb = b.magnitude();
  if (ma != mb) return sa > 0 ? ma <=> mb : mb <=> ma;
  // Align the mantissas; only the one with the larger exponent shifts.
  int c = 0;
  if (a.exponent_ == b.exponent_) {
    c = cmp(a.mantissa_, b.mantissa_);
  } else if (a.exponent_ > b.exponent_) {
    c = cmp(shifted_left(a.mantissa_, a.exponent_ - b.exponent_), b.mantissa_);
  } else {
    c = cmp(a.mantissa_, shifted_left(b.mantissa_, b.exponent_ - a.exponent_));
  }
  return c <=> 0;
}

mpq_class Dyadic::to_rational() const {
  mpq_class q;
  if (exponent_ >= 0) {
    q = mpq_class(shifted_left(mantissa_, exponent_));
  } else {
    q = mpq_class(mantissa_, shifted_left(mpz_class(1), -exponent_));
    q.canonicalize();
  }
  return q;
}

double Dyadic::to_double() const {
  if (is_zero()) return 0.0;
  long e = 0;
  double d = mpz_get_d_2exp(&e, mantissa_.get_mpz_t());
  return std::ldexp(d, static_cast<int>(std::clamp<std::int64_t>(
                           e + exponent_, -100000, 100000)));
}

std::string Dyadic::to_string() const {
  if (exponent_ == 0) return mantissa_.get_str();
  return mantissa_.get_str() + "*2^" + std::to_string(exponent_);
}

std::string Dyadic::to_decimal(int digits) const {
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpq_class scaled = to_rational() * ten_pow + mpq_class(1, 2);
  mpz_class rounded;
  mpz_fdiv_q(rounded.get_mpz_t(), scaled.get_num_mpz_t(),
             scaled.get_den_mpz_t());
  bool negative = rounded < 0;
  std::string body = mpz_class(::abs(rounded)).get_str();
  if (digits > 0) {
    if (body.size() <= static_cast<std::size_t>(digits)) {
      body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
    }
    body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  }
  return negative ? "-" + body : body;
}

Dyadic Dyadic::floor_of(const mpq_class& q, int precision) {
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  if (precision >= 0) {
    num = shifted_left(num, precision);
  } else {
    den = shifted_left(den, -precision);
  }
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return {r, -precision};
}

Dyadic Dyadic::ceil_of(const mpq_class& q, int precision) {
  return -floor_of(-q, precision);
}

Dyadic Dyadic::from_double(double value) {
  if (!std::isfinite(value)) throw DomainError("non-finite double");
  if (value == 0.0) return {};
  int e = 0;
  double frac = std::frexp(value, &e);
  auto m = static_cast<std::int64_t>(std::ldexp(frac, 53));
  return {mpz_class(static_cast<long>(m)), e - 53};
}

mpq_class parse_rational(std::string_view raw) {
  std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty number");
  auto bad = [&] { return std::invalid_argument("malformed number '" + text + "'"); };

  if (auto star = text.find("*2^"); star != std::string::npos) {
    mpz_class m;
    if (m.set_str(text.substr(0, star), 10) != 0) throw bad();
    std::int64_t e = 0;
    try {
      std::size_t used = 0;
      e = std::stoll(text.substr(star + 3), &used);
      if (used != text.size() - star - 3) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
    return Dyadic(m, e).to_rational();
  }
  if (text.find('/') != std::string::npos) {
    mpq_class q;
    auto slash = text.find('/');
    mpz_class num, den;
    if (num.set_str(text.substr(0, slash), 10) != 0 ||
        den.set_str(text.substr(slash + 1), 10) != 0 || den == 0) {
      throw bad();
    }
    q = mpq_class(num, den);
    q.canonicalize();
    return q;
  }

  // Decimal: [sign] digits [. digits] [e [sign] digits]
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) throw bad();
  long exp10 = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw bad();
    try {
      std::size_t used = 0;
      exp10 = std::stol(text.substr(i + 1), &used);
      if (used != text.size() - i - 1) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  mpz_class num(digits, 10);
  if (negative) num = -num;
  long p = exp10 - frac_digits;
  mpz_class pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(p)));
  mpq_class q = p >= 0 ? mpq_class(num * pow) : mpq_class(num, pow);
  q.canonicalize();
  return q;
}

Dyadic Dyadic::parse(std::string_view text) {
  mpq_class q = parse_rational(text);
  if (!is_power_of_two(q.get_den())) {
    throw std::invalid_argument("'" + std::string(text) +
                                "' is not a dyadic rational");
  }
  auto shift = static_cast<std::int64_t>(mpz_scan1(q.get_den_mpz_t(), 0));
  return {q.get_num(), -shift};
}

namespace {

Dyadic div_rounded(const Dyadic& a, const Dyadic& b, int precision,
                   bool ceiling) {
  if (b.is_zero()) throw DomainError("division by zero");
  std::int64_t s = a.exponent() - b.exponent() + precision;
  mpz_class num = a.mantissa();
  mpz_class den = b.mantissa();
  if (s >= 0) {
    num = shifted_left(num, s);
  } else {
    den = shifted_left(den, -s);
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  mpz_class q;
  if (ceiling) {
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  } else {
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  }
  return {q, -precision};
}

}  // namespace

Dyadic div_floor(const Dyadic& a, const Dyadic& b, int precision) {
  return div_rounded(a, b, precision, false);
}

Dyadic div_ceil(const Dyadic& a, const Dyadic& b, int precision) {
  return div_rounded(a, b, precision, true);
}

//---------------------------------------------------------------------------//
// DyadicInterval
//---------------------------------------------------------------------------//

DyadicInterval::DyadicInterval(Dyadic point) : lo_(point), hi_(std::move(point)) {}

DyadicInterval::DyadicInterval(Dyadic lo, Dyadic hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (hi_ < lo_) {
    throw std::invalid_argument("interval with lo > hi: [" + lo_.to_string() +
                                ", " + hi_.to_string() + "]");
  }
}

bool DyadicInterval::within(int precision) const {
  return width() <= Dyadic(1).scaled(-precision);
}

std::string DyadicInterval::to_string() const {
  return "[" + lo_.to_string() + ", " + hi_.to_string() + "]";
}

std::string DyadicInterval::to_decimal(int digits) const {
  std::ostringstream os;
  os << midpoint().to_decimal(digits) << " ± ";
  double radius = width().scaled(-1).to_double();
  os.precision(3);
  os << radius;
  return os.str();
}

DyadicInterval hull(const DyadicInterval& a, const DyadicInterval& b) {
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b) {
  return {a.lo() + b.lo(), a.hi() + b.hi()};
}

DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b) {
  return {a.lo() - b.hi(), a.hi() - b.lo()};
}

DyadicInterval operator-(const DyadicInterval& a) { return {-a.hi(), -a.lo()}; }

DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b) {
  if (a.lo().sign() >= 0 && b.lo().sign() >= 0) {
    return {a.lo() * b.lo(), a.hi() * b.hi()};
  }
  Dyadic p[] = {a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(),
                a.hi() * b.hi()};
  auto [mn, mx] = std::minmax_element(std::begin(p), std::end(p));
  return {*mn, *mx};
}

DyadicInterval abs(const DyadicInterval& a) {
  if (a.lo().sign() >= 0) return a;
  if (a.hi().sign() <= 0) return -a;
  return {Dyadic{}, std::max(-a.lo(), a.hi())};
}

DyadicInterval add(const DyadicInterval& a, const DyadicInterval& b) { return a + b; }
DyadicInterval sub(const DyadicInterval& a, const DyadicInterval& b) { return a - b; }
DyadicInterval mul(const DyadicInterval& a, const DyadicInterval& b) { return a * b; }
DyadicInterval neg(const DyadicInterval& a) { return -a; }

DyadicInterval scaled(const DyadicInterval& a, std::int64_t k) {
  return {a.lo().scaled(k), a.hi().scaled(k)};
}

DyadicInterval round_outward(const DyadicInterval& a, int precision) {
  return {a.lo().floor_to(precision), a.hi().ceil_to(precision)};
}

DyadicInterval divide(const DyadicInterval& a, const DyadicInterval& b,
                      int precision) {
  if (b.contains(Dyadic{})) throw DomainError("interval division by zero");
  if (b.is_point()) {
    if (b.lo().sign() > 0) {
      return {div_floor(a.lo(), b.lo(), precision),
              div_ceil(a.hi(), b.lo(), precision)};
    }
    return {div_floor(a.hi(), b.lo(), precision),
            div_ceil(a.lo(), b.lo(), precision)};
  }
  const Dyadic* num[] = {&a.lo(), &a.hi()};
  const Dyadic* den[] = {&b.lo(), &b.hi()};
  std::optional<Dyadic> lo;
  std::optional<Dyadic> hi;
  for (auto* n : num) {
    for (auto* d : den) {
      Dyadic f = div_floor(*n, *d, precision);
      Dyadic c = div_ceil(*n, *d, precision);
      if (!lo || f < *lo) lo = f;
      if (!hi || c > *hi) hi = c;
    }
  }
  return {*lo, *hi};
}

Ordering compare_strict(const DyadicInterval& a, const DyadicInterval& b) {
  if (a.hi() < b.lo()) return Ordering::LT;
  if (a.lo() > b.hi()) return Ordering::GT;
  return Ordering::OVERLAP;
}

std::vector<int> PrecisionLadder::rungs() const {
  std::vector<int> out;
  for (int p = std::max(1, start); p < cap; p *= 2) out.push_back(p);
  out.push_back(cap);
  return out;
}

Ordering decide_strict(
    const std::function<std::pair<DyadicInterval, DyadicInterval>(int)>& enclose,
    const PrecisionLadder& ladder) {
  for (int p : ladder.rungs()) {
    auto [a, b] = enclose(p);
    auto o = compare_strict(a, b);
    if (o != Ordering::OVERLAP) return o;
  }
  throw UndecidedComparison("strict comparison undecided at 2^-" +
                            std::to_string(ladder.cap));
}

//---------------------------------------------------------------------------//
// Elementary functions
//---------------------------------------------------------------------------//

namespace {

Dyadic pow2(std::int64_t k) { return Dyadic(1).scaled(k); }

DyadicInterval mul_round(const DyadicInterval& a, const DyadicInterval& b,
                         int w) {
  return round_outward(a * b, w);
}

DyadicInterval div_int(const DyadicInterval& a, long k, int w) {
  return divide(a, DyadicInterval(Dyadic(k)), w);
}

/// Largest absolute value in the interval.
Dyadic max_abs(const DyadicInterval& a) {
  return std::max(a.lo().abs(), a.hi().abs());
}

/// Adds the symmetric error term [-r, r].
DyadicInterval widen(const DyadicInterval& a, const Dyadic& r) {
  return {a.lo() - r, a.hi() + r};
}

/// Retries `compute(w)` with growing working precision until the result
/// is at most 2^-precision wide.
template <class F>
DyadicInterval refine_until(int precision, int start, F&& compute) {
  for (int w = start;; w += std::max(32, w / 2)) {
    DyadicInterval r = compute(w);
    if (r.within(precision)) return r;
    if (w > 64 * (precision + 64) + 4096) {
      throw std::runtime_error("enclosure failed to converge");
    }
  }
}

/// atanh(z) = z + z^3/3 + ... for |z| <= 1/3, enclosed at working precision w.
DyadicInterval atanh_series(const DyadicInterval& z, int w) {
  DyadicInterval zz = mul_round(z, z, w + 4);
  DyadicInterval power = z;
  DyadicInterval sum = z;
  Dyadic stop = pow2(-(w + 2));
  for (long j = 1;; ++j) {
    power = mul_round(power, zz, w + 4);
    sum = sum + div_int(power, 2 * j + 1, w + 4);
    if (max_abs(power) < stop) {
      // tail <= |z|^(2j+3) / (1 - z^2) <= |power| for |z| <= 1/3
      return widen(sum, max_abs(power));
    }
  }
}

/// atan(1/m) for integer m >= 2.
DyadicInterval atan_inverse(long m, int w) {
  DyadicInterval term = divide(DyadicInterval(Dyadic(1)), Dyadic(m), w + 8);
  DyadicInterval sum = term;
  Dyadic stop = pow2(-(w + 6));
  for (long j = 1;; ++j) {
    term = div_int(div_int(term, m, w + 8), m, w + 8);
    auto t = div_int(term, 2 * j + 1, w + 8);
    sum = (j % 2 == 1) ? sum - t : sum + t;
    if (max_abs(t) < stop) return widen(sum, max_abs(t));
  }
}

struct ConstantCache {
  std::mutex mutex;
  int precision = -1;
  DyadicInterval value;

  template <class F>
  DyadicInterval get(int precision_wanted, F&& compute) {
    std::lock_guard<std::mutex> lock(mutex);
    if (precision < precision_wanted + 8) {
      int p = ((precision_wanted + 8) / 64 + 1) * 64 + 64;
      value = refine_until(p, p + 16, compute);
      precision = p;
    }
    return round_outward(value, precision_wanted + 4);
  }
};

DyadicInterval exp_point(const Dyadic& x, int precision) {
  if (x.is_zero()) return Dyadic(1);
  std::int64_t s = std::max<std::int64_t>(0, x.magnitude() + 2);
  Dyadic r = x.scaled(-s);
  // Result magnitude is about x / ln 2 bits; reserve that much headroom.
  auto growth = static_cast<int>(std::max(0.0, x.to_double() * 1.4427) + 2);
  return refine_until(precision, precision + static_cast<int>(s) + growth + 16,
                      [&](int w) {
    int ws = w + static_cast<int>(s);
    DyadicInterval term(Dyadic(1));
    DyadicInterval sum(Dyadic(1));
    Dyadic stop = pow2(-(ws + 2));
    for (long k = 1;; ++k) {
      term = div_int(mul_round(term, DyadicInterval(r), ws + 4), k, ws + 4);
      sum = sum + term;
      if (max_abs(term) < stop) {
        sum = widen(sum, max_abs(term));
        break;
      }
    }
    for (std::int64_t i = 0; i < s; ++i) sum = mul_round(sum, sum, ws);
    return round_outward(sum, precision + 2);
  });
}

DyadicInterval ln_point(const Dyadic& x, int precision) {
  if (x.sign() <= 0) throw DomainError("logarithm of nonpositive number");
  if (x == Dyadic(1)) return Dyadic{};
  std::int64_t k = x.magnitude();
  Dyadic y = x.scaled(-k);
  if (y >= Dyadic(3).scaled(-1)) {
    y = y.scaled(-1);
    ++k;
  }
  int kbits = 0;
  for (auto m = std::abs(k); m > 0; m >>= 1) ++kbits;
  return refine_until(precision, precision + kbits + 16, [&](int w) {
    DyadicInterval z = divide(DyadicInterval(y - Dyadic(1)),
                              DyadicInterval(y + Dyadic(1)), w + 4);
    DyadicInterval ln_y = scaled(atanh_series(z, w + 2), 1);
    DyadicInterval result = ln_y;
    if (k != 0) {
      result = result + DyadicInterval(Dyadic(static_cast<long>(k))) *
                            ln2_enclosure(w + kbits + 2);
    }
    return round_outward(result, precision + 2);
  });
}

Dyadic sqrt_floor(const Dyadic& x, int precision) {
  mpz_class n = x.scaled(2 * static_cast<std::int64_t>(precision)).floor();
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), n.get_mpz_t());
  return Dyadic(s, -precision);
}

Dyadic sqrt_ceil(const Dyadic& x, int precision) {
  Dyadic y = x.scaled(2 * static_cast<std::int64_t>(precision));
  mpz_class c = y.floor();
  if (Dyadic(c, 0) < y) c += 1;
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), c.get_mpz_t());
  if (s * s < c) s += 1;
  return {s, -precision};
}

}  // namespace

DyadicInterval ln2_enclosure(int precision) {
  static ConstantCache cache;
  return cache.get(precision, [](int w) {
    auto third = divide(DyadicInterval(Dyadic(1)), Dyadic(3), w + 8);
    return scaled(atanh_series(third, w + 4), 1);
  });
}

DyadicInterval pi_enclosure(int precision) {
  static ConstantCache cache;
  return cache.get(precision, [](int w) {
    return scaled(atan_inverse(5, w + 8), 4) -
           scaled(atan_inverse(239, w + 8), 2);
  });
}

DyadicInterval sqrt_enclosure(const DyadicInterval& a, int precision) {
  if (a.lo().sign() < 0) throw DomainError("square root of negative number");
  int p = precision + 1;
  return {sqrt_floor(a.lo(), p), sqrt_ceil(a.hi(), p)};
}

DyadicInterval exp_enclosure(const DyadicInterval& a, int precision) {
  auto lo = exp_point(a.lo(), precision + 1);
  if (a.is_point()) return lo;
  return {lo.lo(), exp_point(a.hi(), precision + 1).hi()};
}

DyadicInterval ln_enclosure(const DyadicInterval& a, int precision) {
  if (a.lo().sign() <= 0) throw DomainError("logarithm of nonpositive number");
  auto lo = ln_point(a.lo(), precision + 1);
  if (a.is_point()) return lo;
  return {lo.lo(), ln_point(a.hi(), precision + 1).hi()};
}

DyadicInterval sin_pi_enclosure(const Dyadic& y, int precision) {
  // Exact reduction of y modulo 2, then symmetry into [0, 1/2].
  Dyadic r = y - Dyadic(y.scaled(-1).floor(), 1);
  bool negate = false;
  if (r >= Dyadic(1)) {
    r -= Dyadic(1);
    negate = true;
  }
  const Dyadic half = Dyadic(1).scaled(-1);
  if (r > half) r = Dyadic(1) - r;
  DyadicInterval out;
  if (r.is_zero()) {
    out = Dyadic{};
  } else if (r == half) {
    out = Dyadic(1);
  } else {
    out = refine_until(precision, precision + 8, [&](int w) {
      DyadicInterval x = round_outward(pi_enclosure(w + 4) * DyadicInterval(r), w + 4);
      DyadicInterval xx = mul_round(x, x, w + 4);
      DyadicInterval term = x;
      DyadicInterval sum = x;
      Dyadic stop = pow2(-(w + 2));
      for (long k = 1;; ++k) {
        term = -div_int(mul_round(term, xx, w + 4), (2 * k) * (2 * k + 1), w + 4);
        sum = sum + term;
        if (max_abs(term) < stop) {
          sum = widen(sum, max_abs(term));
          break;
        }
      }
      return round_outward(sum, precision + 2);
    });
  }
  return negate ? -out : out;
}

//---------------------------------------------------------------------------//
// Real
//---------------------------------------------------------------------------//

Real::Real(Dyadic value) : exact_(value.to_rational()) {}

Real Real::rational(mpq_class value) {
  value.canonicalize();
  Real r;
  r.exact_ = std::move(value);
  return r;
}

Real Real::from_oracle(Oracle oracle) {
  Real r;
  r.exact_.reset();
  r.oracle_ = std::make_shared<const Oracle>(std::move(oracle));
  return r;
}

DyadicInterval Real::enclose(int precision) const {
  if (exact_) {
    const mpq_class& q = *exact_;
    if (is_power_of_two(q.get_den())) {
      auto shift = static_cast<std::int64_t>(mpz_scan1(q.get_den_mpz_t(), 0));
      return Dyadic(q.get_num(), -shift);
    }
    return {Dyadic::floor_of(q, precision), Dyadic::ceil_of(q, precision)};
  }
  return (*oracle_)(precision);
}

Real operator+(const Real& a, const Real& b) {
  if (a.exact_ && b.exact_) return Real::rational(*a.exact_ + *b.exact_);
  return Real::from_oracle([a, b](int p) {
    return a.enclose(p + 1) + b.enclose(p + 1);
  });
}

Real operator-(const Real& a, const Real& b) { return a + (-b); }

Real Real::operator-() const {
  if (exact_) return rational(-*exact_);
  Real self = *this;
  return from_oracle([self](int p) { return -self.enclose(p); });
}

std::string Real::to_string() const {
  if (exact_) return exact_->get_str();
  return enclose(64).to_decimal(18);
}

}  // namespace fairbits
