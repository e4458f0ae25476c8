#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairbits/dyadic.hpp"

namespace fairbits {

/// The OS entropy source failed.
class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scripted stream ran out of bits.
class StreamExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite bit string, element of {0,1}^n; names the cylinder w∘C.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> bits);
  /// From a string of '0'/'1' characters; throws std::invalid_argument.
  static Word parse(std::string_view text);
  /// The k-th word of length n in lexicographic order.
  static Word from_index(std::uint64_t index, std::size_t length);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  void push_back(int bit);
  Word with(int bit) const;
  Word prefix(std::size_t n) const;
  bool is_prefix_of(const Word& other) const;
  /// Lexicographic rank among words of the same length.
  std::uint64_t index() const;

  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Binary-expansion map restricted to a prefix:
/// [sum w_j 2^-(j+1), sum w_j 2^-(j+1) + 2^-|w|].
DyadicInterval rho_b_enclosure(const Word& w);

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Consumable source of fair bits.
///
/// Seeded streams are counter based: bit i of the stream keyed by
/// (seed, stream id) is a pure function of those three numbers, so replaying
/// a stream from a copy reproduces it exactly and child streams need no
/// coordination. A stream has a single consumer.
class BitStream {
 public:
  static BitStream seeded(std::uint64_t seed);
  static BitStream entropy();
  /// Replays `prefix`, then repeats `cycle` forever. An empty cycle makes
  /// the stream finite: drawing past the prefix throws StreamExhausted.
  static BitStream scripted(Word prefix, Word cycle = {});

  int next_bit();
  /// Draws n bits in order.
  Word take(std::size_t n);
  std::uint64_t consumed() const { return consumed_; }

  /// Independent substream k. Seeded streams derive the key (seed, id')
  /// from a separate key domain; entropy streams return a fresh entropy
  /// stream. Scripted streams have no children.
  BitStream child(std::uint64_t k) const;

  bool is_seeded() const { return std::holds_alternative<Seeded>(source_); }
  std::optional<std::uint64_t> seed() const;

 private:
  struct Seeded {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t block = ~std::uint64_t{0};
    std::array<std::uint32_t, 4> buffer{};
  };
  struct Entropy {
    std::shared_ptr<void> device;
    std::uint64_t word = 0;
    int remaining = 0;
  };
  struct Scripted {
    Word prefix;
    Word cycle;
  };

  explicit BitStream(std::variant<Seeded, Entropy, Scripted> source)
      : source_(std::move(source)) {}

  std::variant<Seeded, Entropy, Scripted> source_;
  std::uint64_t consumed_ = 0;
};

}  // namespace fairbits
