// fairbits: command-line front end.
//
// Exit codes: 0 success, 1 usage or validation error, 2 a statistical
// suite failed. All randomness comes from one root stream (seeded by
// --seed, OS entropy otherwise); subcommand k uses child k of the root and
// item i of a run uses child i of that.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fairbits/cantor_realizer.hpp"
#include "fairbits/oracle.hpp"
#include "fairbits/wiener.hpp"
#include "validate.hpp"

#ifndef FAIRBITS_DATA_DIR
#define FAIRBITS_DATA_DIR "data"
#endif

using namespace fairbits;
using Json = nlohmann::ordered_json;

namespace {

enum Subcommand : std::uint64_t {
  kSampleReal = 1,
  kPush,
  kSamplePath,
  kOracle,
  kEstimateCdist,
  kValidate,
};

struct Global {
  std::optional<std::uint64_t> seed;
  int precision_cap = 256;
  std::string format = "json";
  int threads = 1;
  bool report_bits = false;

  BitStream root() const { return seed ? BitStream::seeded(*seed) : BitStream::entropy(); }
};

/// Bad input from the user; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json dyadic_json(const Dyadic& d) { return {{"m", d.mantissa().get_str()}, {"e", d.exponent()}}; }

Json interval_json(const DyadicInterval& v) {
  return {{"lo", dyadic_json(v.lo())}, {"hi", dyadic_json(v.hi())}};
}

/// Decimal digits enough to show a width of 2^-n.
int digits_for(int n) { return std::max(1, static_cast<int>(n * 0.30103) + 2); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Dyadic parse_dyadic(const std::string& text) {
  try {
    return Dyadic::parse(text);
  } catch (const std::exception&) {
    throw UsageError("'" + text + "' is not a dyadic rational");
  }
}

Distribution parse_distribution(const std::string& spec) {
  if (spec == "uniform") return make_uniform();
  if (spec == "gaussian") return make_gaussian();
  if (spec == "cantor") return make_cantor();
  if (spec.rfind("dirac:", 0) == 0) return make_dirac(Real::rational(parse_rational(spec.substr(6))));
  if (spec.rfind("table:", 0) == 0) return cdf_from_table(load_table_csv(spec.substr(6)));
  throw UsageError("unknown distribution '" + spec + "'");
}

/// --c-dist accepts dirac:<C> or a table file.
Distribution parse_cdist(const std::string& spec) {
  if (spec.rfind("dirac:", 0) == 0 || spec.rfind("table:", 0) == 0) return parse_distribution(spec);
  return cdf_from_table(load_table_csv(spec));
}

std::vector<Dyadic> parse_times(const std::string& list) {
  std::vector<Dyadic> ts;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Dyadic t = parse_dyadic(item);
    if (t.sign() < 0 || t > Dyadic(1)) throw UsageError("time " + item + " outside [0,1]");
    ts.push_back(t);
  }
  if (ts.empty()) throw UsageError("--t needs at least one time");
  return ts;
}

void check_precision(int n, const Global& g) {
  if (n < 0) throw UsageError("precision must be nonnegative");
  if (n > g.precision_cap) {
    throw UsageError("precision " + std::to_string(n) + " exceeds the cap " +
                     std::to_string(g.precision_cap));
  }
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

void report_bits(const Global& g, std::uint64_t bits) {
  if (g.report_bits) std::cerr << "bits_consumed=" << bits << "\n";
}

//---------------------------------------------------------------------------//

struct SampleRealArgs {
  std::string dist;
  int precision = 16;
  std::size_t count = 1;
};

int run_sample_real(const Global& g, const SampleRealArgs& a) {
  check_precision(a.precision, g);
  auto mu = parse_distribution(a.dist);
  const BitStream sub = g.root().child(kSampleReal);
  std::vector<RealSample> out(a.count);
  validate::parallel_for(a.count, g.threads, [&](std::size_t i) {
    auto s = sub.child(i);
    out[i] = sample_real(mu, s, a.precision, g.precision_cap);
  });
  std::uint64_t bits = 0;
  for (const auto& r : out) bits += r.bits_used;
  const int digits = digits_for(a.precision);
  if (g.format == "csv") {
    std::cout << "index,lo,hi,decimal,bits_used,resamples\n";
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::cout << i << "," << out[i].value.lo().to_string() << "," << out[i].value.hi().to_string()
                << "," << out[i].value.to_decimal(digits) << "," << out[i].bits_used << ","
                << out[i].resamples << "\n";
    }
  } else {
    Json samples = Json::array();
    for (std::size_t i = 0; i < out.size(); ++i) {
      Json s = interval_json(out[i].value);
      s["decimal"] = out[i].value.to_decimal(digits);
      s["bits_used"] = out[i].bits_used;
      s["resamples"] = out[i].resamples;
      samples.push_back(s);
    }
    emit({{"dist", mu->name()}, {"precision", a.precision}, {"samples", samples}});
  }
  report_bits(g, bits);
  return 0;
}

//---------------------------------------------------------------------------//

struct PushArgs {
  std::string weights;
  std::size_t depth = 1;
  std::size_t count = 1;
};

int run_push(const Global& g, const PushArgs& a) {
  auto weights = CylinderWeights::from_json(read_file(a.weights));
  interval_partition(weights, std::min<std::size_t>(a.depth, weights.depth().value_or(a.depth)));
  const BitStream sub = g.root().child(kPush);
  struct Item {
    std::optional<PushResult> ok;
    std::optional<RealizerStall> stall;
  };
  std::vector<Item> out(a.count);
  validate::parallel_for(a.count, g.threads, [&](std::size_t i) {
    auto s = sub.child(i);
    try {
      out[i].ok = push_bits(weights, s, a.depth, static_cast<std::size_t>(g.precision_cap));
    } catch (const RealizerStall& e) {
      out[i].stall = e;
    }
  });
  std::uint64_t bits = 0;
  for (const auto& it : out) bits += it.ok ? it.ok->input.size() : it.stall->input().size();
  if (g.format == "csv") {
    std::cout << "index,word,input_bits,stalled\n";
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].ok) {
        std::cout << i << "," << out[i].ok->output.to_string() << "," << out[i].ok->input.size()
                  << ",0\n";
      } else {
        std::cout << i << "," << out[i].stall->output().to_string() << ","
                  << out[i].stall->input().size() << ",1\n";
      }
    }
  } else {
    Json items = Json::array();
    for (const auto& it : out) {
      if (it.ok) {
        items.push_back({{"word", it.ok->output.to_string()}, {"input_bits", it.ok->input.size()}});
      } else {
        items.push_back({{"word", it.stall->output().to_string()},
                         {"input_bits", it.stall->input().size()},
                         {"stall", {{"input", it.stall->input().to_string()},
                                    {"endpoint", interval_json(it.stall->endpoint())}}}});
      }
    }
    emit({{"depth", a.depth}, {"outputs", items}});
  }
  report_bits(g, bits);
  return 0;
}

//---------------------------------------------------------------------------//

struct PathArgs {
  int depth = 6;
  int precision = 20;
  std::string cdist;
  std::size_t count = 1;
  std::string emit;
};

Json path_json(const WienerPath& p) {
  Json values = Json::array();
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    values.push_back({{"t", std::to_string(k) + "/2^" + std::to_string(p.depth)},
                      {"lo", dyadic_json(p.values[k].lo())},
                      {"hi", dyadic_json(p.values[k].hi())}});
  }
  Json cert = {{"family", p.cert.family},
               {"C", p.cert.C ? interval_json(*p.cert.C) : Json(nullptr)},
               {"moc", p.cert.moc}};
  return {{"depth", p.depth},
          {"grid", "dyadic"},
          {"values", values},
          {"cert", cert},
          {"diagnostics",
           {{"rejections", p.diagnostics.rejections},
            {"undecided", p.diagnostics.undecided},
            {"restarts", p.diagnostics.restarts},
            {"bits_used", p.diagnostics.bits_used}}}};
}

int run_sample_path(const Global& g, const PathArgs& a) {
  check_precision(a.precision, g);
  if (a.depth < 0 || a.depth > 16) throw UsageError("depth must be in 0..16");
  auto cdist = parse_cdist(a.cdist);
  const BitStream sub = g.root().child(kSamplePath);
  std::vector<WienerPath> paths(a.count);
  std::vector<std::uint64_t> cbits(a.count, 0);
  validate::parallel_for(a.count, g.threads, [&](std::size_t i) {
    auto cs = sub.child(2 * i);
    DyadicInterval C = sample_c(cdist, cs, a.precision, g.precision_cap);
    cbits[i] = cs.consumed();
    PathOptions opt;
    opt.precision_cap = g.precision_cap;
    paths[i] = sample_path(levy_family(), C, sub.child(2 * i + 1), a.depth, a.precision, opt);
  });
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < a.count; ++i) bits += cbits[i] + paths[i].diagnostics.bits_used;
  const std::string format = a.emit.empty() ? g.format : a.emit;
  if (format == "csv") {
    const int digits = digits_for(a.precision);
    std::cout << "path,k,t,lo,hi,mid\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      for (std::size_t k = 0; k < paths[i].values.size(); ++k) {
        const auto& v = paths[i].values[k];
        std::cout << i << "," << k << ","
                  << Dyadic(mpz_class(static_cast<unsigned long>(k)), -a.depth).to_decimal(a.depth)
                  << "," << v.lo().to_string() << "," << v.hi().to_string() << ","
                  << v.midpoint().to_decimal(digits) << "\n";
      }
    }
  } else {
    Json list = Json::array();
    for (const auto& p : paths) list.push_back(path_json(p));
    emit({{"paths", list}});
  }
  report_bits(g, bits);
  return 0;
}

//---------------------------------------------------------------------------//

struct OracleArgs {
  std::string construction;
  std::uint64_t n = 10;
  std::string t = "1";
  std::size_t count = 1;
  int precision = 20;
};

int run_oracle(const Global& g, const OracleArgs& a) {
  check_precision(a.precision, g);
  const auto ts = parse_times(a.t);
  const BitStream sub = g.root().child(kOracle);
  std::vector<std::vector<DyadicInterval>> runs(a.count);
  std::vector<std::uint64_t> bits(a.count, 0);
  if (a.construction != "donsker" && a.n > 64) throw UsageError("--n above 64 for " + a.construction);
  validate::parallel_for(a.count, g.threads, [&](std::size_t i) {
    auto s = sub.child(i);
    if (a.construction == "schauder") {
      runs[i] = levy_ciesielski(static_cast<int>(a.n), s, ts, a.precision, &bits[i]);
    } else if (a.construction == "kl") {
      runs[i] = karhunen_loeve(static_cast<int>(a.n), s, ts, a.precision, &bits[i]);
    } else {
      runs[i] = donsker(a.n, s, ts, a.precision);
      bits[i] = s.consumed();
    }
  });
  std::uint64_t total = 0;
  for (auto b : bits) total += b;
  const int digits = digits_for(a.precision);
  if (g.format == "csv") {
    std::cout << "run,t,lo,hi,mid\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (std::size_t k = 0; k < ts.size(); ++k) {
        std::cout << i << "," << ts[k].to_string() << "," << runs[i][k].lo().to_string() << ","
                  << runs[i][k].hi().to_string() << "," << runs[i][k].midpoint().to_decimal(digits)
                  << "\n";
      }
    }
  } else {
    Json times = Json::array();
    for (const auto& t : ts) times.push_back(dyadic_json(t));
    Json list = Json::array();
    for (const auto& r : runs) {
      Json vals = Json::array();
      for (const auto& v : r) vals.push_back(interval_json(v));
      list.push_back(vals);
    }
    emit({{"construction", a.construction}, {"N", a.n}, {"t", times}, {"runs", list}});
  }
  report_bits(g, total);
  return 0;
}

//---------------------------------------------------------------------------//

struct CdistArgs {
  std::size_t paths = 1000;
  int depth = 6;
  std::string out;
};

int run_estimate_cdist(const Global& g, const CdistArgs& a) {
  if (a.depth < 1 || a.depth > 12) throw UsageError("depth must be in 1..12");
  const std::string tag = g.seed ? std::to_string(*g.seed) : "entropy";
  auto r = estimate_c_distribution(a.paths, a.depth, g.root().child(kEstimateCdist), tag, g.threads);
  std::ofstream out(a.out);
  if (!out) throw UsageError("cannot write " + a.out);
  out << r.csv;
  if (2 * r.floor_hits > a.paths) {
    std::cerr << "warning: " << r.floor_hits << " of " << a.paths
              << " paths hit the c >= 1 floor; the family may not fit the process\n";
  }
  emit({{"out", a.out},
        {"paths", a.paths},
        {"depth", a.depth},
        {"rows", r.rows.size()},
        {"floor_hits", r.floor_hits},
        {"median", r.values[r.values.size() / 2].to_decimal(6)}});
  return 0;
}

//---------------------------------------------------------------------------//

struct ValidateArgs {
  std::string suite;
  std::string cdist = std::string(FAIRBITS_DATA_DIR) + "/c_distribution.csv";
  double scale = 1.0;
};

int run_validate(const Global& g, const ValidateArgs& a) {
  validate::Context ctx;
  ctx.root = g.root().child(kValidate);
  ctx.threads = g.threads;
  ctx.precision_cap = g.precision_cap;
  ctx.scale = a.scale;
  ctx.cdist = parse_cdist(a.cdist);
  auto checks = validate::run_suite(a.suite, ctx);
  for (const auto& c : checks) {
    std::cerr << c.name << ": " << (c.passed ? "pass" : "FAIL") << " (" << c.seconds << " s)\n";
  }
  auto rep = validate::report(a.suite, checks);
  emit(rep);
  return rep["passed"].get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact sampling of continuous data from fair coin flips"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Deterministic seed (entropy if absent)");
  app.add_option("--precision-cap", g.precision_cap, "Precision cap in bits")
      ->check(CLI::Range(8, 4096));
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 256));
  app.add_flag("--report-bits", g.report_bits, "Print consumed bit count to stderr");

  SampleRealArgs sr;
  auto* c_sr = app.add_subcommand("sample-real", "Inverse-transform samples of a distribution");
  c_sr->add_option("--dist", sr.dist, "uniform|gaussian|cantor|dirac:<r>|table:<file>")->required();
  c_sr->add_option("--precision", sr.precision, "Output width 2^-n");
  c_sr->add_option("--count", sr.count, "Number of samples");

  PushArgs pa;
  auto* c_push = app.add_subcommand("push", "Push fair bits onto a cylinder-weighted measure");
  c_push->add_option("--weights", pa.weights, "Weights JSON file")->required();
  c_push->add_option("--depth", pa.depth, "Output word length");
  c_push->add_option("--count", pa.count, "Number of runs");

  PathArgs pp;
  auto* c_path = app.add_subcommand("sample-path", "Brownian paths with a modulus certificate");
  c_path->add_option("--depth", pp.depth, "Grid depth");
  c_path->add_option("--precision", pp.precision, "Value width 2^-n");
  c_path->add_option("--c-dist", pp.cdist, "Table file or dirac:<C>")->required();
  c_path->add_option("--count", pp.count, "Number of paths");
  c_path->add_option("--emit", pp.emit, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  OracleArgs oa;
  auto* c_oracle = app.add_subcommand("oracle", "Reference Brownian constructions");
  c_oracle->add_option("construction", oa.construction, "schauder|kl|donsker")
      ->required()
      ->check(CLI::IsMember({"schauder", "kl", "donsker"}));
  c_oracle->add_option("--n", oa.n, "Truncation level or walk length");
  c_oracle->add_option("--t", oa.t, "Comma-separated dyadic times");
  c_oracle->add_option("--count", oa.count, "Number of runs");
  c_oracle->add_option("--precision", oa.precision, "Value width 2^-n");

  CdistArgs ca;
  auto* c_cd = app.add_subcommand("estimate-cdist", "Tabulate the distribution of c(W)");
  c_cd->add_option("--paths", ca.paths, "Number of paths");
  c_cd->add_option("--depth", ca.depth, "Grid depth");
  c_cd->add_option("--out", ca.out, "Output CSV")->required();

  ValidateArgs va;
  auto* c_val = app.add_subcommand("validate", "Run a statistical acceptance suite");
  c_val->add_option("--suite", va.suite, "marginals|certificates|realizer")
      ->required()
      ->check(CLI::IsMember({"marginals", "certificates", "realizer"}));
  c_val->add_option("--c-dist", va.cdist, "c-distribution table");
  c_val->add_option("--scale", va.scale, "Sample-count multiplier")->check(CLI::Range(0.001, 100.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*c_sr) return run_sample_real(g, sr);
    if (*c_push) return run_push(g, pa);
    if (*c_path) return run_sample_path(g, pp);
    if (*c_oracle) return run_oracle(g, oa);
    if (*c_cd) return run_estimate_cdist(g, ca);
    if (*c_val) return run_validate(g, va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const WeightsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
