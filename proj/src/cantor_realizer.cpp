#include "fairbits/cantor_realizer.hpp"

#include <json.hpp>

namespace fairbits {

namespace {

std::string name_of(const Word& w) { return w.empty() ? "(empty word)" : w.to_string(); }

constexpr std::size_t kMaxTableDepth = 24;

}  // namespace

CylinderWeights CylinderWeights::table(const std::map<Word, mpq_class>& weights) {
  std::size_t d = 0;
  for (const auto& [w, q] : weights) {
    d = std::max(d, w.size());
    if (q < 0 || q > 1) throw WeightsError("weight of " + name_of(w) + " outside [0,1]", w);
  }
  if (d > kMaxTableDepth) {
    throw WeightsError("weight table deeper than " + std::to_string(kMaxTableDepth), Word{});
  }
  CylinderWeights g;
  g.depth_ = d;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << d); ++k) {
    Word w = Word::from_index(k, d);
    auto it = weights.find(w);
    if (it == weights.end()) throw WeightsError("missing weight for cylinder " + name_of(w), w);
    g.table_[w] = it->second;
  }
  for (std::size_t len = d; len-- > 0;) {
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << len); ++k) {
      Word w = Word::from_index(k, len);
      mpq_class sum = g.table_.at(w.with(0)) + g.table_.at(w.with(1));
      auto it = weights.find(w);
      if (it != weights.end() && it->second != sum) {
        throw WeightsError("inconsistent weights at cylinder " + name_of(w) + ": listed " +
                               it->second.get_str() + ", children sum to " + sum.get_str(),
                           w);
      }
      g.table_[w] = sum;
    }
  }
  if (g.table_.at(Word{}) != 1) {
    throw WeightsError("total weight is " + g.table_.at(Word{}).get_str() + ", not 1", Word{});
  }
  return g;
}

CylinderWeights CylinderWeights::fair() { return table({{Word{}, mpq_class(1)}}); }

CylinderWeights CylinderWeights::functional(Oracle oracle) {
  CylinderWeights g;
  g.oracle_ = std::make_shared<const Oracle>(std::move(oracle));
  return g;
}

CylinderWeights CylinderWeights::bernoulli(const mpq_class& p) {
  if (p < 0 || p > 1) throw WeightsError("bit probability outside [0,1]", Word{});
  return functional([p](const Word& w, int n) {
    mpq_class q = 1;
    for (std::size_t i = 0; i < w.size(); ++i) q *= w[i] == 0 ? p : mpq_class(1 - p);
    return Real::rational(q).enclose(n);
  });
}

CylinderWeights CylinderWeights::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw WeightsError(std::string("weights JSON: ") + e.what(), Word{});
  }
  if (!doc.is_object()) throw WeightsError("weights JSON must be an object", Word{});
  std::map<Word, mpq_class> weights;
  for (const auto& [key, value] : doc.items()) {
    Word w;
    try {
      w = Word::parse(key);
    } catch (const std::invalid_argument&) {
      throw WeightsError("weights JSON key '" + key + "' is not a bit string", Word{});
    }
    try {
      if (value.is_string()) {
        weights[w] = parse_rational(value.get<std::string>());
      } else if (value.is_number_integer()) {
        weights[w] = mpq_class(value.get<long>());
      } else {
        throw std::invalid_argument("not an exact rational");
      }
    } catch (const std::invalid_argument&) {
      throw WeightsError("weight of cylinder " + name_of(w) + " is not an exact rational", w);
    }
  }
  return table(weights);
}

Real CylinderWeights::weight(const Word& w) const {
  if (oracle_) {
    auto oracle = oracle_;
    return Real::from_oracle([oracle, w](int n) { return (*oracle)(w, n); });
  }
  if (w.size() <= *depth_) return Real::rational(table_.at(w));
  // Fair splitting below the table.
  mpq_class q = table_.at(w.prefix(*depth_));
  q /= mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(w.size() - *depth_));
  return Real::rational(q);
}

Real cell_left(const CylinderWeights& g, const Word& w) {
  Real left;
  Word v;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 1) left = left + g.weight(v.with(0));
    v.push_back(w[i]);
  }
  return left;
}

std::vector<PartitionCell> interval_partition(const CylinderWeights& g, std::size_t n,
                                              int check_precision) {
  if (n > kMaxTableDepth) throw std::invalid_argument("partition depth too large");
  if (!g.is_exact()) {
    if (compare_strict(g.weight(Word{}).enclose(check_precision), Dyadic(1)) !=
        Ordering::OVERLAP) {
      throw WeightsError("total weight is not 1", Word{});
    }
    for (std::size_t len = 0; len < n; ++len) {
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << len); ++k) {
        Word w = Word::from_index(k, len);
        auto a = g.weight(w.with(0)).enclose(check_precision + 1);
        auto b = g.weight(w.with(1)).enclose(check_precision + 1);
        if (compare_strict(a, Dyadic{}) == Ordering::LT ||
            compare_strict(b, Dyadic{}) == Ordering::LT ||
            compare_strict(a + b, g.weight(w).enclose(check_precision)) != Ordering::OVERLAP) {
          throw WeightsError("inconsistent weights at cylinder " + name_of(w), w);
        }
      }
    }
  }
  std::vector<PartitionCell> cells;
  cells.reserve(std::size_t{1} << n);
  Real left;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
    Word w = Word::from_index(k, n);
    Real right = left + g.weight(w);
    cells.push_back({w, left, right});
    left = right;
  }
  return cells;
}

PushResult push_bits(const CylinderWeights& g, BitStream& s, std::size_t m,
                     std::size_t input_cap) {
  PushResult r;
  DyadicInterval x(Dyadic{}, Dyadic(1));
  Real left;
  Real right = 1;
  for (std::size_t k = 0; k < m; ++k) {
    const Real cut = left + g.weight(r.output.with(0));
    for (;;) {
      const int p = static_cast<int>(r.input.size()) + 8;
      const DyadicInterval a = left.enclose(p);
      const DyadicInterval c = cut.enclose(p);
      const DyadicInterval b = right.enclose(p);
      if (compare_strict(a, x) == Ordering::LT && compare_strict(x, c) == Ordering::LT) {
        r.output.push_back(0);
        right = cut;
        break;
      }
      if (compare_strict(c, x) == Ordering::LT && compare_strict(x, b) == Ordering::LT) {
        r.output.push_back(1);
        left = cut;
        break;
      }
      if (r.input.size() >= input_cap) {
        // Report the endpoint the input could not be separated from.
        DyadicInterval edge = c;
        if (compare_strict(a, x) != Ordering::LT) edge = a;
        if (compare_strict(x, b) != Ordering::LT) edge = b;
        throw RealizerStall("input " + r.input.to_string().substr(0, 64) +
                                (r.input.size() > 64 ? "..." : "") +
                                " stays on a cell boundary near " + edge.to_decimal(12) +
                                " after " + std::to_string(r.input.size()) + " bits",
                            r.input, r.output, edge);
      }
      r.input.push_back(s.next_bit());
      x = rho_b_enclosure(r.input);
    }
  }
  return r;
}

}  // namespace fairbits
