#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairbits/bitsource.hpp"
#include "fairbits/dyadic.hpp"

namespace fairbits {

/// Inconsistent or malformed cylinder weights; names the offending word.
class WeightsError : public std::invalid_argument {
 public:
  WeightsError(const std::string& what, Word cylinder)
      : std::invalid_argument(what), cylinder_(std::move(cylinder)) {}
  const Word& cylinder() const { return cylinder_; }

 private:
  Word cylinder_;
};

/// The input stayed on the boundary of a partition cell until the input
/// cap. Carries the input prefix read so far, the output already emitted,
/// and the enclosure of the cell endpoint it could not separate from.
class RealizerStall : public std::runtime_error {
 public:
  RealizerStall(const std::string& what, Word input, Word output, DyadicInterval endpoint)
      : std::runtime_error(what),
        input_(std::move(input)),
        output_(std::move(output)),
        endpoint_(std::move(endpoint)) {}
  const Word& input() const { return input_; }
  const Word& output() const { return output_; }
  const DyadicInterval& endpoint() const { return endpoint_; }

 private:
  Word input_;
  Word output_;
  DyadicInterval endpoint_;
};

/// A Borel measure on Cantor space by its cylinder masses weight(w) =
/// mu(w∘C), either as an exact table to some depth or as an enclosure
/// oracle. Tables are extended below their depth by fair splitting.
class CylinderWeights {
 public:
  using Oracle = std::function<DyadicInterval(const Word& w, int n)>;

  /// Exact table. Every word of the maximal length d must be present;
  /// shorter words are derived from their children and, if listed, must
  /// match. Throws WeightsError.
  static CylinderWeights table(const std::map<Word, mpq_class>& weights);
  /// All cylinders of length n get 2^-n.
  static CylinderWeights fair();
  /// weight(w) enclosed to 2^-n; assumed consistent, checked lazily.
  static CylinderWeights functional(Oracle oracle);
  /// i.i.d. bits with P(bit = 0) = p.
  static CylinderWeights bernoulli(const mpq_class& p);

  /// JSON object from bit strings to rationals, e.g. {"0":"1/3","1":"2/3"}.
  static CylinderWeights from_json(const std::string& text);

  Real weight(const Word& w) const;
  /// Table depth; nullopt for functional weights.
  std::optional<std::size_t> depth() const { return depth_; }
  bool is_exact() const { return !oracle_; }

 private:
  std::map<Word, mpq_class> table_;
  std::optional<std::size_t> depth_;
  std::shared_ptr<const Oracle> oracle_;
};

/// Open cell I_w = (a, b) with b - a = weight(w).
struct PartitionCell {
  Word word;
  Real a;
  Real b;
};

/// Cells for all words of length n in lexicographic order, with
///   I_w = (sum_{v < w} weight(v), sum_{v <= w} weight(v)).
/// Functional weights are checked for weight(w0) + weight(w1) = weight(w)
/// up to enclosure width at `check_precision`. Throws WeightsError.
std::vector<PartitionCell> interval_partition(const CylinderWeights& g, std::size_t n,
                                              int check_precision = 64);

/// Left endpoint of I_w, summing weight(v 0) over the prefixes v 1 of w.
Real cell_left(const CylinderWeights& g, const Word& w);

struct PushResult {
  Word output;
  Word input;  // bits read from the stream
};

/// Emits m output bits: bit k is decided once rho_b of the input prefix
/// lies strictly inside one of the two child cells of the output so far,
/// reading more input bits only while neither containment is certified.
/// Throws RealizerStall after `input_cap` input bits.
PushResult push_bits(const CylinderWeights& g, BitStream& s, std::size_t m,
                     std::size_t input_cap = 256);

}  // namespace fairbits
