#include "fairbits/wiener.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <mutex>

namespace fairbits {

ModulusFamily::Bound ModulusFamily::bind(const DyadicInterval& c, int n) const {
  return [this, c, n](const DyadicInterval& h) { return omega(h, c, n); };
}

namespace {

const Dyadic kOne(1);

/// h ln(1/h) for a point h in [0,1], cached: path code asks for the same
/// few grid lags over and over.
DyadicInterval h_log_inverse(const Dyadic& h, int w) {
  if (h.is_zero() || h == kOne) return Dyadic{};
  static std::mutex mutex;
  static std::map<std::pair<Dyadic, int>, DyadicInterval> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::pair{h, w};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  DyadicInterval v = round_outward(-(DyadicInterval(h) * ln_enclosure(DyadicInterval(h), w + 4)), w);
  if (cache.size() > 100000) cache.clear();
  cache.emplace(key, v);
  return v;
}

DyadicInterval inverse_e(int w) {
  static std::mutex mutex;
  static std::map<int, DyadicInterval> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[w];
  if (slot == DyadicInterval{}) slot = exp_enclosure(DyadicInterval(Dyadic(-1)), w);
  return slot;
}

struct LevyParams {
  DyadicInterval c;
  DyadicInterval tau;    // 1/(Ec)
  DyadicInterval y;      // y_c
  DyadicInterval slope;  // c ln(c) / y_c
  DyadicInterval inv_e;
  int w = 0;

  LevyParams(const DyadicInterval& c_in, int work) : c(c_in), w(work) {
    if (c.lo() < kOne) throw DomainError("Levy modulus needs c >= 1, got " + c.to_string());
    inv_e = inverse_e(w + 8);
    tau = divide(inv_e, c, w + 8);
    DyadicInterval lnc = ln_enclosure(c, w + 8);
    DyadicInterval ratio = divide(scaled(DyadicInterval(kOne) + lnc, 1), c, w + 8);
    y = sqrt_enclosure(ratio, w + 8);
    slope = divide(round_outward(c * lnc, w + 8), y, w + 8);
  }

  /// Left branch over h-range [a, b] with b <= tau.hi.
  DyadicInterval left(const Dyadic& a, const Dyadic& b) const {
    // h ln(1/h) increases up to 1/e; guard the upper end against rounding
    // slop past the peak.
    Dyadic f_lo = h_log_inverse(a, w + 8).lo();
    Dyadic f_hi = h_log_inverse(b, w + 8).hi();
    if (b >= Dyadic(23).scaled(-6)) f_hi = std::max(f_hi, inv_e.hi());
    DyadicInterval arg = scaled(DyadicInterval(c.lo() * std::max(Dyadic{}, f_lo), c.hi() * f_hi), 1);
    return sqrt_enclosure(round_outward(arg, w + 8), w + 4);
  }

  DyadicInterval right(const DyadicInterval& h) const {
    return round_outward(y + (h - tau) * slope, w + 4);
  }

  DyadicInterval eval(const DyadicInterval& h) const {
    if (h.lo().sign() < 0 || h.hi() > kOne) {
      throw DomainError("modulus argument outside [0,1]: " + h.to_string());
    }
    if (h.hi().is_zero()) return Dyadic{};
    std::optional<DyadicInterval> out;
    if (h.lo() <= tau.hi()) {
      out = left(h.lo(), std::min(h.hi(), tau.hi()));
    }
    if (h.hi() >= tau.lo()) {
      auto r = right(DyadicInterval(std::max(h.lo(), tau.lo()), h.hi()));
      out = out ? hull(*out, r) : r;
    }
    return round_outward(*out, w + 2);
  }
};

}  // namespace

DyadicInterval LevyModulus::omega(const DyadicInterval& h, const DyadicInterval& c,
                                  int n) const {
  for (int w = n + 16;; w += 32) {
    LevyParams params(c, w);
    DyadicInterval v = params.eval(h);
    if (v.within(n) || !h.is_point() || !c.is_point() ||
        compare_strict(h, params.tau) == Ordering::OVERLAP || w > n + 1024) {
      return v;
    }
  }
}

ModulusFamily::Bound LevyModulus::bind(const DyadicInterval& c, int n) const {
  auto params = std::make_shared<const LevyParams>(c, n + 16);
  return [params](const DyadicInterval& h) { return params->eval(h); };
}

const ModulusFamily& levy_family() {
  static const LevyModulus levy;
  return levy;
}

DyadicInterval levy_omega(const DyadicInterval& h, const DyadicInterval& c, int n) {
  return levy_family().omega(h, c, n);
}

int binary_moc(const ModulusFamily& fam, const DyadicInterval& C, int n,
               int search_cap, int precision_cap) {
  const DyadicInterval target(Dyadic(1).scaled(-n));
  const PrecisionLadder ladder{std::max(4, n + 8), std::max(precision_cap, n + 8)};
  for (int m = 0; m <= search_cap; ++m) {
    Dyadic top = Dyadic(1).scaled(-m);
    DyadicInterval range(Dyadic{}, top);
    for (int p : ladder.rungs()) {
      if (compare_strict(fam.omega(range, C, p), target) == Ordering::LT) return m;
      // A single point above the target already refutes this m.
      if (compare_strict(fam.omega(DyadicInterval(top), C, p), target) == Ordering::GT) break;
    }
  }
  throw std::runtime_error("binary modulus search exceeded 2^-" + std::to_string(search_cap));
}

DyadicInterval sample_c(const Distribution& cdist, BitStream& s, int n,
                        int precision_cap) {
  auto hint = cdist->support_hint();
  if (hint && hint->lo() < kOne) {
    throw DomainError("c-distribution support must lie in [1, inf)");
  }
  DyadicInterval v = sample_real(cdist, s, n, precision_cap).value;
  if (v.hi() < kOne) {
    throw DomainError("c-distribution produced " + v.to_decimal(12) + " < 1");
  }
  // The support bound is exact, so clipping keeps the enclosure sound.
  if (v.lo() < kOne) v = DyadicInterval(kOne, v.hi());
  return v;
}

//---------------------------------------------------------------------------//
// Path sampling
//---------------------------------------------------------------------------//

namespace {

const Distribution& standard_normal() {
  static const Distribution g = make_gaussian();
  return g;
}

class PathBuilder {
 public:
  PathBuilder(int depth, const BitStream& root, int cap)
      : depth_(depth), size_((std::size_t{1} << depth) + 1), root_(root), cap_(cap),
        nodes_(size_) {
    nodes_[0].value = Dyadic{};
    nodes_[0].precision = INT_MAX;
  }

  std::size_t size() const { return size_; }

  /// Level of grid index i >= 1: 0 for the endpoint 1, l for odd multiples
  /// of 2^(depth-l).
  int level(std::size_t i) const {
    if (i == size_ - 1) return 0;
    auto tz = static_cast<int>(__builtin_ctzll(i));
    return depth_ - tz;
  }

  void draw(std::size_t i) {
    Node& node = nodes_[i];
    node.z.emplace(standard_normal(), root_.child(i).child(node.attempts), cap_);
    ++node.attempts;
    node.precision = -1;
  }

  void retire(std::size_t i) {
    if (nodes_[i].z) bits_ += nodes_[i].z->bits_used();
  }

  std::uint64_t bits() const {
    std::uint64_t b = bits_;
    for (const auto& n : nodes_) {
      if (n.z) b += n.z->bits_used();
    }
    return b;
  }

  DyadicInterval enclose(std::size_t i, int p) {
    Node& node = nodes_[i];
    if (node.precision >= p) return node.value;
    const int l = level(i);
    for (int extra = 3;; extra += 8) {
      DyadicInterval z = node.z->enclose(p + extra);
      DyadicInterval v;
      if (l == 0) {
        v = z;
      } else {
        std::size_t half = std::size_t{1} << (depth_ - l);
        DyadicInterval a = enclose(i - half, p + 2);
        DyadicInterval b = enclose(i + half, p + 2);
        v = scaled(a + b, -1) + sigma(l, p + extra + 4) * z;
      }
      v = round_outward(v, p + 3);
      if (v.within(p)) {
        nodes_[i].value = v;
        nodes_[i].precision = p;
        return v;
      }
    }
  }

 private:
  struct Node {
    std::optional<LazySample> z;
    std::uint64_t attempts = 0;
    DyadicInterval value;
    int precision = -1;
  };

  // Bridge standard deviation 2^-(l+1)/2 at level l.
  static DyadicInterval sigma(int l, int p) {
    if ((l + 1) % 2 == 0) return Dyadic(1).scaled(-(l + 1) / 2);
    return scaled(sqrt_enclosure(DyadicInterval(Dyadic(2)), p), -(l + 2) / 2);
  }

  int depth_;
  std::size_t size_;
  BitStream root_;
  int cap_;
  std::vector<Node> nodes_;
  std::uint64_t bits_ = 0;
};

/// omega(k 2^-depth, C) enclosures, refined on demand.
class LagOmega {
 public:
  LagOmega(const ModulusFamily& fam, DyadicInterval C, int depth)
      : fam_(fam), C_(std::move(C)), depth_(depth),
        cache_((std::size_t{1} << depth) + 1) {}

  const DyadicInterval& at(std::size_t lag, int p) {
    int w = std::max(p, 24);
    auto& slot = cache_[lag];
    if (slot.first < w) {
      auto it = bound_.find(w);
      if (it == bound_.end()) it = bound_.emplace(w, fam_.bind(C_, w)).first;
      slot = {w, it->second(DyadicInterval(Dyadic(mpz_class(static_cast<unsigned long>(lag)), -depth_)))};
    }
    return slot.second;
  }

 private:
  const ModulusFamily& fam_;
  DyadicInterval C_;
  int depth_;
  std::vector<std::pair<int, DyadicInterval>> cache_{};
  std::map<int, ModulusFamily::Bound> bound_;
};

std::vector<int> moc_table(const ModulusFamily& fam, const DyadicInterval& C,
                           int levels, int cap) {
  std::vector<int> moc;
  for (int n = 0; n < levels; ++n) moc.push_back(binary_moc(fam, C, n, 4096, cap));
  return moc;
}

}  // namespace

namespace {

/// One attempt at a full path; false when some value ran out of draws.
bool build_path(PathBuilder& b, LagOmega* omega,
                const PrecisionLadder& ladder, std::uint64_t max_attempts,
                PathDiagnostics& diag) {
  // Grid indices in generation order: 1, then level by level.
  std::vector<std::size_t> order;
  const std::size_t last = b.size() - 1;
  const int depth = static_cast<int>(__builtin_ctzll(last));
  order.push_back(last);
  for (int l = 1; l <= depth; ++l) {
    std::size_t step = std::size_t{1} << (depth - l);
    for (std::size_t i = step; i < last; i += 2 * step) order.push_back(i);
  }

  std::vector<std::size_t> accepted{0};
  for (std::size_t i : order) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt == max_attempts) return false;
      b.draw(i);
      if (!omega) break;
      bool ok = true;
      try {
        for (std::size_t t : accepted) {
          std::size_t lag = i > t ? i - t : t - i;
          Ordering o = Ordering::OVERLAP;
          for (int p : ladder.rungs()) {
            DyadicInterval diff = abs(b.enclose(i, p) - b.enclose(t, p));
            o = compare_strict(diff, omega->at(lag, p));
            if (o != Ordering::OVERLAP) break;
          }
          if (o == Ordering::LT) continue;
          ok = false;
          if (o == Ordering::GT) {
            ++diag.rejections;
          } else {
            ++diag.undecided;
          }
          break;
        }
      } catch (const ResampleSignal&) {
        ok = false;
        ++diag.undecided;
      }
      if (ok) break;
      b.retire(i);
    }
    accepted.push_back(i);
  }
  return true;
}

}  // namespace

WienerPath sample_path(const ModulusFamily& fam, const std::optional<DyadicInterval>& C,
                       const BitStream& s, int depth, int n, const PathOptions& opt) {
  if (depth < 0 || depth > 20) throw std::invalid_argument("depth must be in 0..20");
  if (n < 0) throw std::invalid_argument("precision must be nonnegative");
  if (opt.max_attempts == 0) throw std::invalid_argument("max_attempts must be positive");
  WienerPath path;
  path.depth = depth;
  path.precision = n;
  path.cert.family = fam.id();
  path.cert.C = C;

  std::optional<LagOmega> omega;
  if (C) omega.emplace(fam, *C, depth);
  const PrecisionLadder ladder{8, opt.precision_cap};

  std::uint64_t spent = 0;
  for (std::uint64_t restart = 0;; ++restart) {
    PathBuilder b(depth, restart == 0 ? s : s.child(0).child(restart), opt.precision_cap);
    const bool done = build_path(b, omega ? &*omega : nullptr, ladder,
                                 opt.max_attempts, path.diagnostics);
    if (!done) {
      spent += b.bits();
      ++path.diagnostics.restarts;
      continue;
    }
    path.values.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) path.values.push_back(b.enclose(i, n));
    path.diagnostics.bits_used = spent + b.bits();
    break;
  }
  if (C) {
    int levels = opt.moc_levels < 0 ? depth + 1 : opt.moc_levels;
    path.cert.moc = moc_table(fam, *C, levels, opt.precision_cap);
  }
  return path;
}

std::size_t certified_violations(const WienerPath& path, const ModulusFamily& fam,
                                 int n) {
  if (!path.cert.C) return 0;
  LagOmega omega(fam, *path.cert.C, path.depth);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    for (std::size_t j = i + 1; j < path.values.size(); ++j) {
      DyadicInterval diff = abs(path.values[j] - path.values[i]);
      if (compare_strict(diff, omega.at(j - i, n)) == Ordering::GT) ++bad;
    }
  }
  return bad;
}

//---------------------------------------------------------------------------//
// Recovering c(W)
//---------------------------------------------------------------------------//

namespace {

enum class Sign { POS, NEG, UNKNOWN };

class PsiSign {
 public:
  PsiSign(const std::vector<DyadicInterval>& values, const ModulusFamily& fam, int cap)
      : fam_(fam), cap_(cap) {
    const std::size_t size = values.size();
    if (size < 2 || ((size - 1) & (size - 2)) != 0) {
      throw std::invalid_argument("grid must have 2^d + 1 values");
    }
    depth_ = static_cast<int>(__builtin_ctzll(size - 1));
    for (std::size_t k = 1; k < size; ++k) {
      Dyadic lo, hi;
      for (std::size_t i = 0; i + k < size; ++i) {
        DyadicInterval d = abs(values[i + k] - values[i]);
        if (i == 0 || d.lo() > lo) lo = d.lo();
        if (i == 0 || d.hi() > hi) hi = d.hi();
      }
      spread_.emplace_back(lo, hi);
      order_.push_back(k);
    }
  }

  /// Sign of Psi(C) = min_k omega(k 2^-d, C) - spread_k.
  Sign operator()(const Dyadic& C) {
    std::vector<std::size_t> pending = order_;
    for (int w : PrecisionLadder{24, std::max(cap_, 24)}.rungs()) {
      auto om = fam_.bind(DyadicInterval(C), w);
      std::vector<std::size_t> still;
      for (std::size_t k : pending) {
        DyadicInterval h(Dyadic(mpz_class(static_cast<unsigned long>(k)), -depth_));
        Ordering o = compare_strict(spread_[k - 1], om(h));
        if (o == Ordering::GT) {
          // Try the binding lag first next time.
          auto it = std::find(order_.begin(), order_.end(), k);
          std::rotate(order_.begin(), it, it + 1);
          return Sign::NEG;
        }
        if (o == Ordering::OVERLAP) still.push_back(k);
      }
      if (still.empty()) return Sign::POS;
      pending = std::move(still);
    }
    return Sign::UNKNOWN;
  }

 private:
  const ModulusFamily& fam_;
  int cap_;
  int depth_ = 0;
  std::vector<DyadicInterval> spread_;
  std::vector<std::size_t> order_;
};

}  // namespace

CEstimate compute_c(const std::vector<DyadicInterval>& values, const ModulusFamily& fam,
                    int n, int precision_cap) {
  PsiSign sign(values, fam, precision_cap);
  if (sign(kOne) == Sign::POS) return {DyadicInterval(kOne), true};
  Dyadic lo = kOne;
  Dyadic hi(2);
  while (sign(hi) != Sign::POS) {
    lo = hi;
    hi = hi.scaled(1);
    if (hi > Dyadic(1).scaled(40)) throw std::runtime_error("c(W) search exceeded 2^40");
  }
  const Dyadic width = Dyadic(1).scaled(-n);
  while (hi - lo > width) {
    Dyadic mid = (lo + hi).scaled(-1);
    if (sign(mid) == Sign::POS) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {DyadicInterval(lo, hi), false};
}

}  // namespace fairbits
