#include "validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include "fairbits/cantor_realizer.hpp"
#include "fairbits/oracle.hpp"
#include "fairbits/wiener.hpp"

namespace fairbits::validate {

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Dyadic frac(long num, int log2den) { return Dyadic(num).scaled(-log2den); }

double round6(double x) { return std::round(x * 1e6) / 1e6; }

Json ks_json(const KsResult& r) {
  return {{"D", round6(r.statistic)}, {"p", round6(r.p_value)}, {"n", r.n}};
}

CylinderWeights thirds() {
  return CylinderWeights::table({{Word::parse("0"), mpq_class(1, 3)},
                                 {Word::parse("1"), mpq_class(2, 3)}});
}

// Stream ids of the checks under the context root.
enum StreamId : std::uint64_t {
  kRealizer = 1,
  kPartiality,
  kInverse,
  kStructure,
  kModulus,
  kCertificates,
  kMarginals,
  kRoundTrip,
  kOracles,
};

struct PathDraw {
  DyadicInterval C;
  WienerPath path;
};

/// Path i draws C from child 2i and the path from child 2i+1.
std::vector<PathDraw> draw_paths(const Context& ctx, const BitStream& s, std::size_t count,
                                 int depth, int n, const std::optional<DyadicInterval>& fixed_c) {
  std::vector<PathDraw> out(count);
  parallel_for(count, ctx.threads, [&](std::size_t i) {
    DyadicInterval C = fixed_c ? *fixed_c : [&] {
      auto cs = s.child(2 * i);
      return sample_c(ctx.cdist, cs, n, ctx.precision_cap);
    }();
    PathOptions opt;
    opt.precision_cap = ctx.precision_cap;
    out[i] = {C, sample_path(levy_family(), C, s.child(2 * i + 1), depth, n, opt)};
  });
  return out;
}

}  // namespace

std::size_t Context::count(std::size_t full) const {
  return std::max<std::size_t>(20, static_cast<std::size_t>(std::llround(full * scale)));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mutex;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Check realizer_pushforward(const Context& ctx) {
  Timer timer;
  Check c{"realizer_pushforward"};
  const BitStream s = ctx.root.child(kRealizer);
  const std::size_t runs = ctx.count(100000);
  const std::size_t depth = 3;
  auto tables_stream = s.child(0);
  c.passed = true;
  Json tables = Json::array();
  for (int t = 0; t < 5; ++t) {
    std::map<Word, mpq_class> weights;
    std::vector<long> raw(8);
    long total = 0;
    for (auto& v : raw) {
      v = 1;
      for (int b = 0; b < 6; ++b) v += static_cast<long>(tables_stream.next_bit()) << b;
      total += v;
    }
    for (std::uint64_t k = 0; k < 8; ++k) weights[Word::from_index(k, depth)] = mpq_class(raw[k], total);
    for (auto& [w, q] : weights) q.canonicalize();
    auto g = CylinderWeights::table(weights);

    // Runs are split into blocks with their own streams for parallelism.
    const std::size_t blocks = 16;
    std::vector<std::map<Word, std::size_t>> counts(blocks);
    parallel_for(blocks, ctx.threads, [&](std::size_t b) {
      auto in = s.child(1 + static_cast<std::uint64_t>(t)).child(b);
      for (std::size_t i = b; i < runs; i += blocks) ++counts[b][push_bits(g, in, depth).output];
    });
    double worst = 0;
    for (const auto& [w, q] : weights) {
      std::size_t hits = 0;
      for (const auto& m : counts) {
        if (auto it = m.find(w); it != m.end()) hits += it->second;
      }
      const double p = q.get_d();
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(runs));
      worst = std::max(worst, std::abs(static_cast<double>(hits) / runs - p) / sigma);
    }
    c.passed = c.passed && worst <= 4.0;
    tables.push_back({{"max_sigma", round6(worst)}});
  }
  c.detail = {{"runs_per_table", runs}, {"tables", tables}};
  c.seconds = timer.seconds();
  return c;
}

Check partiality_witness(const Context& ctx) {
  Check c{"partiality_witness"};
  const auto g = thirds();
  PrecisionLadder ladder;
  ladder.cap = ctx.precision_cap;
  Json rungs = Json::array();
  bool stalls = true;
  for (int rung : ladder.rungs()) {
    auto s = BitStream::scripted({}, Word::parse("01"));
    bool stalled = false;
    try {
      push_bits(g, s, 1, static_cast<std::size_t>(rung));
    } catch (const RealizerStall& e) {
      stalled = e.input().size() == static_cast<std::size_t>(rung) &&
                e.endpoint().lo().to_rational() <= mpq_class(1, 3) &&
                e.endpoint().hi().to_rational() >= mpq_class(1, 3);
    }
    stalls = stalls && stalled;
    rungs.push_back(rung);
  }
  const std::size_t seeds = 1000;
  std::size_t terminated = 0;
  const BitStream s = ctx.root.child(kPartiality);
  for (std::size_t i = 0; i < seeds; ++i) {
    auto in = s.child(i);
    try {
      push_bits(g, in, 8, static_cast<std::size_t>(ctx.precision_cap));
      ++terminated;
    } catch (const RealizerStall&) {
    }
  }
  c.passed = stalls && terminated == seeds;
  c.detail = {{"stalls_at_every_rung", stalls},
              {"rungs", rungs},
              {"random_inputs", seeds},
              {"terminated", terminated}};
  return c;
}

Check inverse_transform(const Context& ctx) {
  Timer timer;
  Check c{"inverse_transform"};
  const BitStream s = ctx.root.child(kInverse);
  const std::size_t samples = ctx.count(10000);
  const int reps = 20;
  const int n = 16;
  Json per = Json::object();
  c.passed = true;
  std::uint64_t dist_id = 0;
  for (const auto& mu : {make_uniform(), make_gaussian(), make_cantor()}) {
    std::vector<double> pvalues(reps);
    parallel_for(reps, ctx.threads, [&](std::size_t r) {
      auto in = s.child(dist_id).child(r);
      std::vector<Dyadic> xs;
      xs.reserve(samples);
      for (std::size_t i = 0; i < samples; ++i) {
        xs.push_back(sample_real(mu, in, n, ctx.precision_cap).value.midpoint());
      }
      pvalues[r] = ks_test(xs, *mu).p_value;
    });
    int passes = 0;
    Json ps = Json::array();
    for (double p : pvalues) {
      passes += p > kAlpha;
      ps.push_back(round6(p));
    }
    c.passed = c.passed && passes >= 19;
    per[mu->name()] = {{"passes", passes}, {"p_values", ps}};
    ++dist_id;
  }
  const mpq_class r(1, 3);
  auto dirac = make_dirac(Real::rational(r));
  auto in = s.child(dist_id);
  std::size_t contained = 0;
  const std::size_t dirac_samples = ctx.count(1000) * reps;
  for (std::size_t i = 0; i < dirac_samples; ++i) {
    auto v = sample_real(dirac, in, n, ctx.precision_cap).value;
    contained += v.lo().to_rational() <= r && r <= v.hi().to_rational();
  }
  c.passed = c.passed && contained == dirac_samples;
  per["dirac:1/3"] = {{"samples", dirac_samples}, {"contain_r", contained}};
  c.detail = {{"samples", samples}, {"repetitions", reps}, {"precision", n},
              {"distributions", per}};
  c.seconds = timer.seconds();
  return c;
}

Check semi_inverse_structure(const Context&) {
  Check c{"semi_inverse_structure"};
  const int n = 16;
  Json per = Json::object();
  c.passed = true;
  for (const auto& mu : {make_uniform(), make_gaussian(), make_cantor(),
                         make_dirac(Real::rational(mpq_class(1, 3)))}) {
    std::size_t order = 0;
    std::size_t monotone = 0;
    std::optional<DyadicInterval> prev_lo, prev_hi;
    for (long k = 0; k < 256; ++k) {
      DyadicInterval t(frac(2 * k + 1, 9));
      auto lo = *mu->eval_lower(t, n);
      auto hi = *mu->eval_upper(t, n);
      order += compare_strict(lo, hi) == Ordering::GT;
      if (prev_lo) {
        monotone += compare_strict(*prev_lo, lo) == Ordering::GT;
        monotone += compare_strict(*prev_hi, hi) == Ordering::GT;
      }
      prev_lo = lo;
      prev_hi = hi;
    }
    c.passed = c.passed && order == 0 && monotone == 0;
    per[mu->name()] = {{"order_violations", order}, {"monotonicity_violations", monotone}};
  }
  c.detail = {{"grid_points", 256}, {"precision", n}, {"distributions", per}};
  return c;
}

Check levy_modulus(const Context&) {
  Check c{"levy_modulus"};
  bool zero = true;
  for (long cc : {1, 2, 3, 10, 1000}) {
    zero = zero && levy_omega(DyadicInterval(Dyadic{}), Dyadic(cc), 40) == DyadicInterval(Dyadic{});
  }
  // Oracle: sqrt(2 h ln(1/h)) at h = 1/4 in long double.
  const long double ref = std::sqrt(std::log(4.0L) / 2);
  auto v = levy_omega(frac(1, 2), Dyadic(1), 16);
  const bool quarter = v.width() <= frac(1, 16) &&
                       static_cast<long double>(v.lo().to_double()) <= ref + 1e-15L &&
                       ref - 1e-15L <= static_cast<long double>(v.hi().to_double());
  const int moc = binary_moc(levy_family(), Dyadic(1), 0);
  c.passed = zero && quarter && moc == 2;
  c.detail = {{"omega_zero_exact", zero},
              {"omega_quarter", v.to_decimal(8)},
              {"omega_quarter_ok", quarter},
              {"binary_moc_1_0", moc}};
  return c;
}

Check certificate_soundness(const Context& ctx) {
  Timer timer;
  Check c{"certificate_soundness"};
  const int depth = 6;
  const long N = 1L << depth;
  const auto paths = draw_paths(ctx, ctx.root.child(kCertificates), ctx.count(1000), depth, 20,
                                std::nullopt);
  std::vector<std::size_t> violations(paths.size(), 0);
  parallel_for(paths.size(), ctx.threads, [&](std::size_t i) {
    const auto& [C, path] = paths[i];
    for (long lag = 1; lag <= N; ++lag) {
      auto w = levy_omega(frac(lag, depth), C, 64);
      for (long a = 0; a + lag <= N; ++a) {
        auto diff = abs(path.values[a + lag] - path.values[a]);
        violations[i] += compare_strict(diff, w) == Ordering::GT;
      }
    }
  });
  std::size_t total = 0;
  std::uint64_t rejections = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    total += violations[i];
    rejections += paths[i].path.diagnostics.rejections;
  }
  c.passed = total == 0;
  c.detail = {{"paths", paths.size()},
              {"depth", depth},
              {"pairs_checked", paths.size() * static_cast<std::size_t>(N * (N + 1) / 2)},
              {"violations", total},
              {"rejections", rejections}};
  c.seconds = timer.seconds();
  return c;
}

Check marginal_fidelity(const Context& ctx) {
  Timer timer;
  Check c{"marginal_fidelity"};
  const int depth = 6;
  const std::size_t count = ctx.count(5000);
  const BitStream s = ctx.root.child(kMarginals);
  const auto paths = draw_paths(ctx, s.child(0), count, depth, 20, std::nullopt);
  auto at = [&](long k) {
    std::vector<double> v;
    for (const auto& p : paths) v.push_back(p.path.values[k].midpoint().to_double());
    return v;
  };
  const auto w1 = at(64);
  const auto whalf = at(32);
  const auto ks1 = ks_test(w1, normal_cdf, 1.0);
  const auto kshalf = ks_test(whalf, normal_cdf, 0.5);

  // Levy-Ciesielski reference with N = 10 at the same times.
  const std::vector<Dyadic> ts = {frac(1, 2), frac(1, 1), frac(3, 2)};
  std::vector<std::vector<double>> ref(ts.size(), std::vector<double>(count));
  const BitStream lc = s.child(1);
  parallel_for(count, ctx.threads, [&](std::size_t i) {
    auto v = levy_ciesielski(10, lc.child(i), ts, 20);
    for (std::size_t j = 0; j < ts.size(); ++j) ref[j][i] = v[j].midpoint().to_double();
  });
  Json two = Json::object();
  bool agree = true;
  const long idx[] = {16, 32, 48};
  for (std::size_t j = 0; j < ts.size(); ++j) {
    auto r = ks_two_sample(at(idx[j]), ref[j]);
    agree = agree && r.p_value > kAlpha;
    two["t=" + std::to_string(idx[j]) + "/64"] = ks_json(r);
  }
  double var = 0;
  for (double x : w1) var += x * x;
  var /= static_cast<double>(count);
  std::uint64_t rejections = 0;
  for (const auto& p : paths) rejections += p.path.diagnostics.rejections;
  c.passed = ks1.p_value > kAlpha && kshalf.p_value > kAlpha && agree;
  c.detail = {{"paths", count},
              {"W(1)_vs_N(0,1)", ks_json(ks1)},
              {"W(1/2)_vs_N(0,1/2)", ks_json(kshalf)},
              {"two_sample_vs_levy_ciesielski", two},
              {"W(1)_second_moment", round6(var)},
              {"rejections_per_path", round6(static_cast<double>(rejections) / count)}};
  c.seconds = timer.seconds();
  return c;
}

Check round_trip(const Context& ctx) {
  Timer timer;
  Check c{"round_trip"};
  const DyadicInterval two(Dyadic(2));
  const auto paths = draw_paths(ctx, ctx.root.child(kRoundTrip), ctx.count(1000), 6, 20, two);
  std::vector<CEstimate> est(paths.size(), CEstimate{two, false});
  parallel_for(paths.size(), ctx.threads, [&](std::size_t i) {
    est[i] = compute_c(paths[i].path.values, levy_family(), 16, ctx.precision_cap);
  });
  std::size_t exceed = 0;
  std::size_t floor = 0;
  Dyadic worst(1);
  for (const auto& e : est) {
    exceed += e.c.lo() > Dyadic(2);
    floor += e.at_floor;
    worst = std::max(worst, e.c.lo());
  }
  c.passed = exceed == 0;
  c.detail = {{"paths", paths.size()},
              {"C", 2},
              {"certified_exceed", exceed},
              {"max_lower_end", round6(worst.to_double())},
              {"at_floor", floor}};
  c.seconds = timer.seconds();
  return c;
}

Check oracle_sanity(const Context& ctx) {
  Timer timer;
  Check c{"oracle_sanity"};
  const BitStream s = ctx.root.child(kOracles);
  const std::size_t donsker_runs = ctx.count(5000);
  std::vector<double> d1(donsker_runs);
  parallel_for(donsker_runs, ctx.threads, [&](std::size_t i) {
    auto in = s.child(0).child(i);
    d1[i] = donsker(10000, in, {Dyadic(1)})[0].midpoint().to_double();
  });
  const std::size_t lc_runs = ctx.count(10000);
  std::vector<double> l1(lc_runs);
  parallel_for(lc_runs, ctx.threads, [&](std::size_t i) {
    l1[i] = levy_ciesielski(10, s.child(1).child(i), {Dyadic(1)}, 20)[0].midpoint().to_double();
  });
  const auto ksd = ks_test(d1, normal_cdf, 1.0);
  const auto ksl = ks_test(l1, normal_cdf, 1.0);

  // Partial sums on D_n stop changing once N >= n.
  std::size_t mismatches = 0;
  std::size_t compared = 0;
  for (int n = 0; n <= 8; ++n) {
    std::vector<Dyadic> ts;
    for (long k = 0; k <= (1L << n); ++k) ts.push_back(frac(k, n));
    for (std::uint64_t r = 0; r < 10; ++r) {
      auto in = s.child(2).child(static_cast<std::uint64_t>(n) * 100 + r);
      auto base = levy_ciesielski(n, in, ts, 30);
      for (int N : {n + 1, n + 4, 14}) {
        auto other = levy_ciesielski(N, in, ts, 30);
        for (std::size_t k = 0; k < ts.size(); ++k) mismatches += !(other[k] == base[k]);
        compared += ts.size();
      }
    }
  }
  c.passed = ksd.p_value > kAlpha && ksl.p_value > kAlpha && mismatches == 0;
  c.detail = {{"donsker_N1e4_W(1)", ks_json(ksd)},
              {"levy_ciesielski_N10_W(1)", ks_json(ksl)},
              {"schauder_values_compared", compared},
              {"schauder_mismatches", mismatches}};
  c.seconds = timer.seconds();
  return c;
}

std::vector<Check> run_suite(const std::string& suite, const Context& ctx) {
  if (suite == "marginals") {
    return {inverse_transform(ctx), semi_inverse_structure(ctx), marginal_fidelity(ctx),
            oracle_sanity(ctx)};
  }
  if (suite == "certificates") {
    return {levy_modulus(ctx), certificate_soundness(ctx), round_trip(ctx)};
  }
  if (suite == "realizer") {
    return {realizer_pushforward(ctx), partiality_witness(ctx)};
  }
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

Json report(const std::string& suite, const std::vector<Check>& checks) {
  Json out = {{"suite", suite}, {"alpha", kAlpha}};
  Json list = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  out["checks"] = list;
  out["passed"] = all;
  return out;
}

}  // namespace fairbits::validate
