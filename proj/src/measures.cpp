#include "fairbits/measures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fairbits {

namespace {

DyadicInterval round_rational(const mpq_class& lo, const mpq_class& hi, int n) {
  return {Dyadic::floor_of(lo, n), Dyadic::ceil_of(hi, n)};
}

bool is_zero(const Dyadic& t) { return t.is_zero(); }
bool is_one(const Dyadic& t) { return t == Dyadic(1); }

void check_unit(const DyadicInterval& t) {
  if (t.lo().sign() < 0 || t.hi() > Dyadic(1)) {
    throw DomainError("semi-inverse argument outside [0,1]: " + t.to_string());
  }
}

//---------------------------------------------------------------------------//

class Uniform final : public SemiInverseCdf {
 public:
  std::optional<DyadicInterval> eval_lower(const DyadicInterval& t, int) const override {
    check_unit(t);
    return t;
  }
  std::optional<DyadicInterval> eval_upper(const DyadicInterval& t, int) const override {
    check_unit(t);
    return t;
  }
  DyadicInterval cdf(const Dyadic& s, int) const override {
    return std::clamp(s, Dyadic{}, Dyadic(1));
  }
  std::optional<DyadicInterval> support_hint() const override {
    return DyadicInterval(Dyadic{}, Dyadic(1));
  }
  std::string name() const override { return "uniform"; }
};

class Dirac final : public SemiInverseCdf {
 public:
  explicit Dirac(Real r) : r_(std::move(r)) {}

  std::optional<DyadicInterval> eval_lower(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return r_.enclose(n);
  }
  std::optional<DyadicInterval> eval_upper(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return r_.enclose(n);
  }
  DyadicInterval cdf(const Dyadic& s, int) const override {
    if (r_.exact()) {
      return s.to_rational() < *r_.exact() ? Dyadic{} : Dyadic(1);
    }
    try {
      auto o = decide_strict([&](int p) { return std::pair{DyadicInterval(s), r_.enclose(p)}; });
      return o == Ordering::LT ? Dyadic{} : Dyadic(1);
    } catch (const UndecidedComparison&) {
      return {Dyadic{}, Dyadic(1)};
    }
  }
  std::optional<DyadicInterval> support_hint() const override { return r_.enclose(64); }
  std::string name() const override { return "dirac:" + r_.to_string(); }

 private:
  Real r_;
};

class Gaussian final : public SemiInverseCdf {
 public:
  std::optional<DyadicInterval> eval_lower(const DyadicInterval& t, int n) const override {
    check_unit(t);
    if (is_zero(t.lo()) || is_one(t.hi())) return std::nullopt;
    auto lo = gaussian_quantile(t.lo(), n);
    if (t.is_point()) return lo;
    return DyadicInterval(lo.lo(), gaussian_quantile(t.hi(), n).hi());
  }
  std::optional<DyadicInterval> eval_upper(const DyadicInterval& t, int n) const override {
    return eval_lower(t, n);  // continuous and strictly increasing CDF
  }
  DyadicInterval cdf(const Dyadic& s, int n) const override { return gaussian_cdf(s, n); }
  std::string name() const override { return "gaussian"; }
};

/// Cantor distribution: the binary digits of t become ternary digits 2b.
/// A dyadic t = 0.b_1...b_{k-1}1 has two expansions; the one ending in
/// 0111... gives F_<, the terminating one gives F_>.
class Cantor final : public SemiInverseCdf {
 public:
  std::optional<DyadicInterval> eval_lower(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return round_rational(lower_at(t.lo()), lower_at(t.hi()), n);
  }
  std::optional<DyadicInterval> eval_upper(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return round_rational(upper_at(t.lo()), upper_at(t.hi()), n);
  }

  // Devil's staircase: ternary digits of s up to the first 1 become binary
  // digits; after that F is constant.
  DyadicInterval cdf(const Dyadic& s, int n) const override {
    if (s.sign() <= 0) return Dyadic{};
    if (s >= Dyadic(1)) return Dyadic(1);
    mpq_class x = s.to_rational();
    mpz_class acc = 0;
    for (int j = 1; j <= n + 1; ++j) {
      x *= 3;
      mpz_class d = x.get_num() / x.get_den();
      x -= d;
      acc <<= 1;
      if (d == 1) {
        acc += 1;
        return Dyadic(acc, -j);
      }
      if (d == 2) acc += 1;
      if (x == 0) return Dyadic(acc, -j);
    }
    Dyadic lo(acc, -(n + 1));
    return {lo, lo + Dyadic(1).scaled(-(n + 1))};
  }
  std::optional<DyadicInterval> support_hint() const override {
    return DyadicInterval(Dyadic{}, Dyadic(1));
  }
  std::string name() const override { return "cantor"; }

 private:
  // sum_{j<k} 2 b_j 3^-j for the digits of t = m 2^-k, plus 3^-k times
  // `tail_ones` (1 for F_<, 2 for F_>).
  static mpq_class digits_value(const Dyadic& t, int tail) {
    if (t.is_zero()) return 0;
    if (t == Dyadic(1)) return 1;
    auto k = static_cast<std::size_t>(-t.exponent());
    const mpz_class& m = t.mantissa();
    mpz_class num = 0;
    mpz_class pow3 = 1;
    for (std::size_t j = 1; j < k; ++j) {
      num *= 3;
      pow3 *= 3;
      if (mpz_tstbit(m.get_mpz_t(), k - j)) num += 2;
    }
    num = num * 3 + tail;
    pow3 *= 3;
    mpq_class v(num, pow3);
    v.canonicalize();
    return v;
  }
  static mpq_class lower_at(const Dyadic& t) { return digits_value(t, 1); }
  static mpq_class upper_at(const Dyadic& t) { return digits_value(t, 2); }
};

class Table final : public SemiInverseCdf {
 public:
  explicit Table(std::vector<TableRow> rows) {
    if (rows.empty()) throw TableError("distribution table is empty");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      auto where = "row " + std::to_string(i + 1) + " (x=" + r.x.to_string() + ")";
      if (r.f.sign() < 0 || r.f > Dyadic(1)) throw TableError(where + ": F outside [0,1]");
      if (i > 0 && !(rows[i - 1].x < r.x)) throw TableError(where + ": x not strictly increasing");
      if (i > 0 && r.f < rows[i - 1].f) throw TableError(where + ": F decreasing");
    }
    if (rows.back().f != Dyadic(1)) throw TableError("last row must have F = 1");
    for (const auto& r : rows) {
      x_.push_back(r.x.to_rational());
      f_.push_back(r.f.to_rational());
    }
  }

  std::optional<DyadicInterval> eval_lower(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return round_rational(lower(t.lo().to_rational()), lower(t.hi().to_rational()), n);
  }
  std::optional<DyadicInterval> eval_upper(const DyadicInterval& t, int n) const override {
    check_unit(t);
    return round_rational(upper(t.lo().to_rational()), upper(t.hi().to_rational()), n);
  }
  DyadicInterval cdf(const Dyadic& s, int n) const override {
    mpq_class v = s.to_rational();
    if (v < x_.front()) return Dyadic{};
    if (v >= x_.back()) return Dyadic(1);
    auto j = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), v) - x_.begin());
    std::size_t i = j - 1;
    mpq_class f = f_[i] + (v - x_[i]) * (f_[j] - f_[i]) / (x_[j] - x_[i]);
    return round_rational(f, f, n);
  }
  std::optional<DyadicInterval> support_hint() const override {
    return DyadicInterval(Dyadic::floor_of(x_.front(), 64), Dyadic::ceil_of(x_.back(), 64));
  }
  std::string name() const override { return "table"; }

 private:
  mpq_class interpolate(std::size_t i, const mpq_class& t) const {
    return x_[i] + (t - f_[i]) * (x_[i + 1] - x_[i]) / (f_[i + 1] - f_[i]);
  }
  // sup{s : F(s) < t}
  mpq_class lower(const mpq_class& t) const {
    if (t <= f_.front()) return x_.front();
    auto j = static_cast<std::size_t>(std::lower_bound(f_.begin(), f_.end(), t) - f_.begin());
    return interpolate(j - 1, t);
  }
  // sup{s : F(s) <= t}, with its left limit at t = 1
  mpq_class upper(const mpq_class& t) const {
    if (t < f_.front()) return x_.front();
    auto j = static_cast<std::size_t>(std::upper_bound(f_.begin(), f_.end(), t) - f_.begin());
    if (j == f_.size()) {
      return x_[static_cast<std::size_t>(std::lower_bound(f_.begin(), f_.end(), t) - f_.begin())];
    }
    return interpolate(j - 1, t);
  }

  std::vector<mpq_class> x_;
  std::vector<mpq_class> f_;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Distribution make_uniform() { return std::make_shared<Uniform>(); }
Distribution make_dirac(Real r) { return std::make_shared<Dirac>(std::move(r)); }
Distribution make_gaussian() { return std::make_shared<Gaussian>(); }
Distribution make_cantor() { return std::make_shared<Cantor>(); }
Distribution cdf_from_table(std::vector<TableRow> rows) {
  return std::make_shared<Table>(std::move(rows));
}

std::vector<TableRow> parse_table_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TableRow> rows;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      std::string compact;
      for (char c : line) {
        if (c != ' ') compact.push_back(c);
      }
      if (compact != "x,F") throw TableError("table header must be 'x,F'");
      header = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw TableError("line " + std::to_string(lineno) + ": expected 'x,F'");
    }
    try {
      rows.push_back({Dyadic::parse(line.substr(0, comma)), Dyadic::parse(line.substr(comma + 1))});
    } catch (const std::invalid_argument& e) {
      throw TableError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw TableError("table header must be 'x,F'");
  return rows;
}

std::vector<TableRow> load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open table '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_table_csv(buf.str());
}

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//

LazySample::LazySample(Distribution mu, BitStream* source, int precision_cap)
    : mu_(std::move(mu)), source_(source), cap_(precision_cap) {}

LazySample::LazySample(Distribution mu, BitStream owned, int precision_cap)
    : mu_(std::move(mu)), source_(std::move(owned)), cap_(precision_cap) {}

BitStream& LazySample::stream() {
  if (auto* p = std::get_if<BitStream*>(&source_)) return **p;
  return std::get<BitStream>(source_);
}

const DyadicInterval& LazySample::enclose(int n) {
  if (have_value_ && value_.within(n)) return value_;
  const std::size_t limit = static_cast<std::size_t>(cap_ + std::max(n, 0));
  std::size_t k = std::max(prefix_.size(), static_cast<std::size_t>(std::max(n, 0) + 2));
  k = std::min(k, limit);
  for (;;) {
    while (prefix_.size() < k) prefix_.push_back(stream().next_bit());
    auto e = mu_->eval_lower(rho_b_enclosure(prefix_), n + 2);
    if (e && e->within(n)) {
      value_ = *e;
      have_value_ = true;
      return value_;
    }
    if (k >= limit) {
      throw ResampleSignal("variate " + prefix_.to_string().substr(0, 64) +
                           "... unresolved after " + std::to_string(k) + " bits");
    }
    std::size_t extra = 1;
    if (e) {
      extra = static_cast<std::size_t>(
          std::max<std::int64_t>(1, e->width().magnitude() + n + 2));
    }
    k = std::min(limit, k + extra);
  }
}

RealSample sample_real(const Distribution& mu, BitStream& s, int n,
                       int precision_cap) {
  if (n < 0) throw std::invalid_argument("precision must be nonnegative");
  RealSample out;
  out.precision = n;
  for (;;) {
    LazySample draw(mu, &s, precision_cap);
    try {
      out.value = draw.enclose(n);
      out.bits_used += draw.bits_used();
      return out;
    } catch (const ResampleSignal&) {
      out.bits_used += draw.bits_used();
      if (++out.resamples > 1000) throw;
    }
  }
}

}  // namespace fairbits
