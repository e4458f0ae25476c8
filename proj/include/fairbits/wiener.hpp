#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairbits/bitsource.hpp"
#include "fairbits/dyadic.hpp"
#include "fairbits/measures.hpp"

namespace fairbits {

/// One-parameter family of moduli of continuity omega(h, c),
/// h in [0,1], c >= 1.
class ModulusFamily {
 public:
  using Bound = std::function<DyadicInterval(const DyadicInterval& h)>;

  virtual ~ModulusFamily() = default;
  virtual std::string id() const = 0;
  /// Outward enclosure of {omega(h', c') : h' in h, c' in c}.
  virtual DyadicInterval omega(const DyadicInterval& h, const DyadicInterval& c,
                               int n) const = 0;
  /// omega(., c) at working precision n, for many h with the same c.
  virtual Bound bind(const DyadicInterval& c, int n) const;
};

/// The Levy family, with E = exp(1) and y_c = sqrt(2 ln(Ec) / c):
///   omega(h, c) = sqrt(2 c h ln(1/h))                  for h <= 1/(Ec)
///               = y_c + (h - 1/(Ec)) c ln(c) / y_c     for h >= 1/(Ec)
/// The two branches do not meet at h = 1/(Ec) unless c = E; an argument
/// straddling the branch point gets the hull of both.
class LevyModulus final : public ModulusFamily {
 public:
  std::string id() const override { return "levy"; }
  DyadicInterval omega(const DyadicInterval& h, const DyadicInterval& c,
                       int n) const override;
  Bound bind(const DyadicInterval& c, int n) const override;
};

const ModulusFamily& levy_family();

DyadicInterval levy_omega(const DyadicInterval& h, const DyadicInterval& c, int n);

/// Least m with sup_{h <= 2^-m} omega(h, C) < 2^-n certified. The family
/// need not be monotone in h (the Levy branches jump down for c > E), so the
/// sup over [0, 2^-m] is what makes the answer a binary modulus.
int binary_moc(const ModulusFamily& fam, const DyadicInterval& C, int n,
               int search_cap = 4096, int precision_cap = 256);

/// Inverse-transform draw of the parameter; enforces support >= 1.
DyadicInterval sample_c(const Distribution& cdist, BitStream& s, int n,
                        int precision_cap = 256);

struct Certificate {
  std::string family;
  std::optional<DyadicInterval> C;  // nullopt: rejection disabled
  std::vector<int> moc;             // moc[n] for n = 0..size-1
};

struct PathDiagnostics {
  std::uint64_t rejections = 0;  // certified violations, value redrawn
  std::uint64_t undecided = 0;   // comparisons stuck at the cap, redrawn
  std::uint64_t restarts = 0;    // whole-path restarts after a dead end
  std::uint64_t bits_used = 0;
};

/// W on the grid k 2^-depth, k = 0..2^depth.
struct WienerPath {
  int depth = 0;
  int precision = 0;
  std::vector<DyadicInterval> values;
  Certificate cert;
  PathDiagnostics diagnostics;
};

struct PathOptions {
  int precision_cap = 256;
  /// moc entries to certify; negative means depth + 1 entries.
  int moc_levels = -1;
  /// Draws allowed for one grid value before the accepted values are taken
  /// to leave it no room and the whole path restarts.
  std::uint64_t max_attempts = 256;
};

/// Level-by-level generation: W(0) = 0, W(1) ~ N(0,1), and each new
/// midpoint s of a level-l interval [a,b] from the bridge law
/// N((W(a)+W(b))/2, 2^-(l+1)). Each new value must satisfy
/// |W(s) - W(t)| < omega(|s-t|, C) strictly against every accepted t, or it
/// is redrawn. Draw r at grid index k reads child stream (k, r) of `s`, and
/// every value stays lazily refinable until it is returned at width 2^-n.
/// The values accepted so far can exclude every new value (omega is not
/// subadditive), so after opt.max_attempts draws at one index the path
/// restarts; restart q >= 1 reads child (0, q) of `s` in place of `s`.
WienerPath sample_path(const ModulusFamily& fam,
                       const std::optional<DyadicInterval>& C, const BitStream& s,
                       int depth, int n, const PathOptions& opt = {});

/// Number of grid pairs where |W(s)-W(t)| > omega(|s-t|, C) is certified
/// at precision n.
std::size_t certified_violations(const WienerPath& path, const ModulusFamily& fam,
                                 int n);

struct CEstimate {
  DyadicInterval c;
  bool at_floor = false;  // Psi(1, W) > 0 already
};

/// Recovers c(W) on the grid: with
///   Psi(C) = min_{s != t} omega(|s-t|, C) - |W(s) - W(t)|,
/// doubles C from 1 until Psi(C) > 0 is certified, then bisects to width
/// 2^-n, keeping Psi > 0 certified at the upper end. The grid sees fewer
/// pairs than [0,1], so this under-approximates the continuous c(W).
CEstimate compute_c(const std::vector<DyadicInterval>& values,
                    const ModulusFamily& fam, int n, int precision_cap = 256);

}  // namespace fairbits
