#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fairbits/bitsource.hpp"
#include "fairbits/dyadic.hpp"

namespace fairbits {

/// The drawn uniform variate sits on a jump or flat of the CDF (a null
/// event); the caller should discard its bits and draw again.
class ResampleSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed distribution table.
class TableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A distribution on the reals presented by its semi-inverses
///   F_<(t) = sup{s : F(s) < t},   F_>(t) = sup{s : F(s) <= t}
/// where F(s) = mu((-inf, s]).
///
/// eval_lower/eval_upper take an interval T inside [0, 1] and enclose the
/// closure of the image of T ∩ (0,1); both semi-inverses are monotone, so
/// this is the hull of the one-sided limits at the endpoints. nullopt means
/// the image is unbounded (T touches 0 or 1 and the support is unbounded).
/// For a point T the result is at most 2^-n wide.
class SemiInverseCdf {
 public:
  virtual ~SemiInverseCdf() = default;

  virtual std::optional<DyadicInterval> eval_lower(const DyadicInterval& t,
                                                   int n) const = 0;
  virtual std::optional<DyadicInterval> eval_upper(const DyadicInterval& t,
                                                   int n) const = 0;
  /// Enclosure of F(s), at most 2^-n wide except where F jumps at s.
  virtual DyadicInterval cdf(const Dyadic& s, int n) const = 0;
  virtual std::optional<DyadicInterval> support_hint() const { return std::nullopt; }
  virtual std::string name() const = 0;
};

using Distribution = std::shared_ptr<const SemiInverseCdf>;

Distribution make_uniform();
Distribution make_dirac(Real r);
Distribution make_gaussian();
Distribution make_cantor();

struct TableRow {
  Dyadic x;
  Dyadic f;
};

/// Piecewise-linear CDF through the rows, zero left of the first row. A
/// positive first F is an atom at the first x. Throws TableError unless x is
/// strictly increasing, F is nondecreasing in [0,1] and the last F is 1.
Distribution cdf_from_table(std::vector<TableRow> rows);

/// CSV with header `x,F`; values as "m*2^e" or exactly dyadic decimals.
/// Lines starting with '#' are metadata and skipped.
std::vector<TableRow> load_table_csv(const std::string& path);
std::vector<TableRow> parse_table_csv(const std::string& text);

/// Validated standard normal CDF and quantile. The quantile returns an
/// enclosure of width <= 2^-n of Phi^-1(t) for dyadic t in (0,1).
DyadicInterval gaussian_cdf(const Dyadic& x, int n);
DyadicInterval gaussian_quantile(const Dyadic& t, int n);

struct RealSample {
  DyadicInterval value;
  int precision = 0;
  std::uint64_t bits_used = 0;
  std::uint64_t resamples = 0;
};

/// One inverse-transform draw F_<(t) whose uniform variate t is revealed
/// bit by bit only as far as the requested precision needs. Bits are taken
/// from an owned stream or from a borrowed one.
class LazySample {
 public:
  /// Borrows `source`, which must outlive the sample.
  LazySample(Distribution mu, BitStream* source, int precision_cap = 256);
  LazySample(Distribution mu, BitStream owned, int precision_cap = 256);
  LazySample(const LazySample&) = delete;
  LazySample& operator=(const LazySample&) = delete;
  LazySample(LazySample&&) = default;
  LazySample& operator=(LazySample&&) = default;

  /// Enclosure of width <= 2^-n. Throws ResampleSignal when the variate
  /// stays ambiguous past the cap; the sample is then spent.
  const DyadicInterval& enclose(int n);
  const DyadicInterval& current() const { return value_; }
  std::uint64_t bits_used() const { return prefix_.size(); }
  const Word& prefix() const { return prefix_; }

 private:
  BitStream& stream();

  Distribution mu_;
  std::variant<BitStream, BitStream*> source_;
  int cap_;
  Word prefix_;
  DyadicInterval value_;
  bool have_value_ = false;
};

/// Draws until a sample resolves to width <= 2^-n, counting discarded
/// draws in `resamples`.
RealSample sample_real(const Distribution& mu, BitStream& s, int n,
                       int precision_cap = 256);

}  // namespace fairbits
