#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace fairbits {

/// Raised when an operation is evaluated outside its mathematical domain
/// (square root of a negative number, logarithm of a nonpositive one, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A strict comparison could not be decided before the precision cap.
class UndecidedComparison : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact dyadic rational mantissa * 2^exponent, kept canonical: the mantissa
/// is odd, or zero with exponent 0.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long value);  // NOLINT(google-explicit-constructor)
  Dyadic(mpz_class mantissa, std::int64_t exponent);

  /// Parses "m*2^e", "m*2^-e", a plain integer, "p/q" with q a power of two,
  /// or a finite decimal string whose value is dyadic ("0.375", "-1.5e-1" is
  /// not dyadic and is rejected).
  static Dyadic parse(std::string_view text);
  /// Nearest-below dyadic at 2^-precision for any rational.
  static Dyadic floor_of(const mpq_class& q, int precision);
  static Dyadic ceil_of(const mpq_class& q, int precision);
  /// Exact conversion of a finite double.
  static Dyadic from_double(double value);

  const mpz_class& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }

  int sign() const { return sgn(mantissa_); }
  bool is_zero() const { return sign() == 0; }
  /// floor(log2 |x|); undefined for zero.
  std::int64_t magnitude() const;

  Dyadic operator-() const { return {-mantissa_, exponent_}; }
  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }
  Dyadic& operator-=(const Dyadic& b) { return *this = *this - b; }
  Dyadic& operator*=(const Dyadic& b) { return *this = *this * b; }

  /// Multiplication by 2^k (exact).
  Dyadic scaled(std::int64_t k) const;
  Dyadic abs() const { return {::abs(mantissa_), exponent_}; }
  /// Largest multiple of 2^-precision not above / smallest not below.
  Dyadic floor_to(int precision) const;
  Dyadic ceil_to(int precision) const;
  /// floor as an integer.
  mpz_class floor() const;

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  mpq_class to_rational() const;
  double to_double() const;
  /// "m*2^e" (or "m" when e = 0); round-trips through parse().
  std::string to_string() const;
  /// Decimal rendering rounded to `digits` fractional digits.
  std::string to_decimal(int digits) const;

 private:
  void canonicalize();

  mpz_class mantissa_{0};
  std::int64_t exponent_ = 0;
};

/// Parses an exact rational: "m*2^e", "p/q", an integer, or a finite
/// decimal with optional exponent ("0.975", "1e-3").
mpq_class parse_rational(std::string_view text);

/// floor(a / b * 2^precision) * 2^-precision and its ceiling twin; b != 0.
Dyadic div_floor(const Dyadic& a, const Dyadic& b, int precision);
Dyadic div_ceil(const Dyadic& a, const Dyadic& b, int precision);

/// Closed interval with dyadic endpoints, lo <= hi.
class DyadicInterval {
 public:
  DyadicInterval() = default;
  DyadicInterval(Dyadic point);  // NOLINT(google-explicit-constructor)
  DyadicInterval(Dyadic lo, Dyadic hi);

  const Dyadic& lo() const { return lo_; }
  const Dyadic& hi() const { return hi_; }
  Dyadic width() const { return hi_ - lo_; }
  Dyadic midpoint() const { return (lo_ + hi_).scaled(-1); }
  bool is_point() const { return lo_ == hi_; }
  bool contains(const Dyadic& x) const { return lo_ <= x && x <= hi_; }
  bool contains(const DyadicInterval& o) const {
    return lo_ <= o.lo_ && o.hi_ <= hi_;
  }
  /// width <= 2^-precision
  bool within(int precision) const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

  std::string to_string() const;
  /// "mid ± radius" in decimal.
  std::string to_decimal(int digits) const;

 private:
  Dyadic lo_;
  Dyadic hi_;
};

DyadicInterval hull(const DyadicInterval& a, const DyadicInterval& b);

DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval operator-(const DyadicInterval& a);
DyadicInterval abs(const DyadicInterval& a);
DyadicInterval add(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval sub(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval mul(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval neg(const DyadicInterval& a);
DyadicInterval scaled(const DyadicInterval& a, std::int64_t k);

/// Endpoints rounded outward to multiples of 2^-precision.
DyadicInterval round_outward(const DyadicInterval& a, int precision);
/// Outward-rounded quotient; the divisor must not contain zero.
DyadicInterval divide(const DyadicInterval& a, const DyadicInterval& b,
                      int precision);

enum class Ordering { LT, GT, OVERLAP };

/// LT iff a.hi < b.lo, GT iff a.lo > b.hi, otherwise OVERLAP.
Ordering compare_strict(const DyadicInterval& a, const DyadicInterval& b);

/// Refine-and-retry schedule 4, 8, 16, ... capped at `cap` bits.
struct PrecisionLadder {
  int start = 4;
  int cap = 256;

  /// start, 2*start, ... with the cap itself as the last rung.
  std::vector<int> rungs() const;
};

/// Runs `enclose(p)` up the ladder until compare_strict is decided.
/// Throws UndecidedComparison at the cap.
Ordering decide_strict(
    const std::function<std::pair<DyadicInterval, DyadicInterval>(int)>& enclose,
    const PrecisionLadder& ladder = {});

// Validated elementary functions. Each result contains the exact image of
// the argument interval, widened by at most 2^-precision.
DyadicInterval sqrt_enclosure(const DyadicInterval& a, int precision);
DyadicInterval exp_enclosure(const DyadicInterval& a, int precision);
DyadicInterval ln_enclosure(const DyadicInterval& a, int precision);
/// sin(pi * y) for a dyadic point y.
DyadicInterval sin_pi_enclosure(const Dyadic& y, int precision);
DyadicInterval pi_enclosure(int precision);
DyadicInterval ln2_enclosure(int precision);

/// A real number given by an enclosure oracle: enclose(n) has width at
/// most 2^-n and always contains the value. Rationals are kept exact.
class Real {
 public:
  using Oracle = std::function<DyadicInterval(int)>;

  Real() : Real(Dyadic{}) {}
  Real(Dyadic value);  // NOLINT(google-explicit-constructor)
  Real(long value) : Real(Dyadic{value}) {}  // NOLINT(google-explicit-constructor)
  static Real rational(mpq_class value);
  static Real from_oracle(Oracle oracle);

  DyadicInterval enclose(int precision) const;
  /// Set when the value is a known rational.
  const std::optional<mpq_class>& exact() const { return exact_; }

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  Real operator-() const;

  std::string to_string() const;

 private:
  std::optional<mpq_class> exact_;
  std::shared_ptr<const Oracle> oracle_;
};

}  // namespace fairbits
