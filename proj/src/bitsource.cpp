#include "fairbits/bitsource.hpp"

#include <algorithm>
#include <random>

namespace fairbits {

//---------------------------------------------------------------------------//
// Word
//---------------------------------------------------------------------------//

Word::Word(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw std::invalid_argument("word bits must be 0 or 1");
  }
}

Word Word::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("not a bit string: '" + std::string(text) +
                                  "'");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Word(std::move(bits));
}

Word Word::from_index(std::uint64_t index, std::size_t length) {
  std::vector<std::uint8_t> bits(length);
  for (std::size_t i = 0; i < length; ++i) {
    bits[length - 1 - i] = static_cast<std::uint8_t>((index >> i) & 1U);
  }
  return Word(std::move(bits));
}

void Word::push_back(int bit) { bits_.push_back(static_cast<std::uint8_t>(bit & 1)); }

Word Word::with(int bit) const {
  Word w = *this;
  w.push_back(bit);
  return w;
}

Word Word::prefix(std::size_t n) const {
  return Word(std::vector<std::uint8_t>(bits_.begin(),
                                        bits_.begin() + static_cast<long>(n)));
}

bool Word::is_prefix_of(const Word& other) const {
  return size() <= other.size() &&
         std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

std::uint64_t Word::index() const {
  std::uint64_t k = 0;
  for (auto b : bits_) k = (k << 1U) | b;
  return k;
}

std::string Word::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

DyadicInterval rho_b_enclosure(const Word& w) {
  mpz_class m = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m <<= 1;
    m += w[i];
  }
  auto n = static_cast<std::int64_t>(w.size());
  Dyadic lo(m, -n);
  return {lo, lo + Dyadic(1).scaled(-n)};
}

//---------------------------------------------------------------------------//
// Philox
//---------------------------------------------------------------------------//

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53U;
  constexpr std::uint32_t kM1 = 0xCD9E8D57U;
  constexpr std::uint32_t kW0 = 0x9E3779B9U;
  constexpr std::uint32_t kW1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32U);
    auto lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32U);
    auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

// Child ids live in their own domain: the root stream has id 0, and every
// derived id has this tag folded in before mixing.
constexpr std::uint64_t kChildDomain = 0x6368696c64737472ULL;  // "childstr"

}  // namespace

//---------------------------------------------------------------------------//
// BitStream
//---------------------------------------------------------------------------//

BitStream BitStream::seeded(std::uint64_t seed) {
  return BitStream(Seeded{seed, 0, ~std::uint64_t{0}, {}});
}

BitStream BitStream::entropy() {
  try {
    auto device = std::make_shared<std::random_device>();
    return BitStream(Entropy{std::static_pointer_cast<void>(device), 0, 0});
  } catch (const std::exception& e) {
    throw EntropyError(std::string("cannot open entropy source: ") + e.what());
  }
}

BitStream BitStream::scripted(Word prefix, Word cycle) {
  return BitStream(Scripted{std::move(prefix), std::move(cycle)});
}

std::optional<std::uint64_t> BitStream::seed() const {
  if (auto* s = std::get_if<Seeded>(&source_)) return s->seed;
  return std::nullopt;
}

int BitStream::next_bit() {
  std::uint64_t i = consumed_;
  int bit = 0;
  if (auto* s = std::get_if<Seeded>(&source_)) {
    std::uint64_t block = i >> 7U;
    if (block != s->block) {
      s->buffer = philox4x32(
          {static_cast<std::uint32_t>(block),
           static_cast<std::uint32_t>(block >> 32U),
           static_cast<std::uint32_t>(s->stream_id),
           static_cast<std::uint32_t>(s->stream_id >> 32U)},
          {static_cast<std::uint32_t>(s->seed),
           static_cast<std::uint32_t>(s->seed >> 32U)});
      s->block = block;
    }
    bit = static_cast<int>((s->buffer[(i >> 5U) & 3U] >> (i & 31U)) & 1U);
  } else if (auto* e = std::get_if<Entropy>(&source_)) {
    if (e->remaining == 0) {
      try {
        auto& device = *std::static_pointer_cast<std::random_device>(e->device);
        e->word = (std::uint64_t{device()} << 32U) | device();
      } catch (const std::exception& ex) {
        throw EntropyError(std::string("entropy source failed: ") + ex.what());
      }
      e->remaining = 64;
    }
    bit = static_cast<int>(e->word & 1U);
    e->word >>= 1U;
    --e->remaining;
  } else {
    auto& sc = std::get<Scripted>(source_);
    if (i < sc.prefix.size()) {
      bit = sc.prefix[i];
    } else if (sc.cycle.empty()) {
      throw StreamExhausted("scripted stream exhausted after " +
                            std::to_string(i) + " bits");
    } else {
      bit = sc.cycle[(i - sc.prefix.size()) % sc.cycle.size()];
    }
  }
  ++consumed_;
  return bit;
}

Word BitStream::take(std::size_t n) {
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(next_bit());
  return w;
}

BitStream BitStream::child(std::uint64_t k) const {
  if (auto* s = std::get_if<Seeded>(&source_)) {
    std::uint64_t id = splitmix64(splitmix64(s->stream_id ^ kChildDomain) + k);
    if (id == 0) id = kChildDomain;
    return BitStream(Seeded{s->seed, id, ~std::uint64_t{0}, {}});
  }
  if (std::holds_alternative<Entropy>(source_)) return entropy();
  throw std::logic_error("scripted streams have no substreams");
}

}  // namespace fairbits
