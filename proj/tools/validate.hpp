#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairbits/bitsource.hpp"
#include "fairbits/measures.hpp"

namespace fairbits::validate {

using Json = nlohmann::ordered_json;

constexpr double kAlpha = 0.01;

struct Check {
  std::string name;
  bool passed = false;
  Json detail = Json::object();
  double seconds = 0;  // wall time, kept out of the JSON report
};

struct Context {
  BitStream root = BitStream::seeded(0);
  int threads = 1;
  int precision_cap = 256;
  /// Tabulated c-distribution for path checks.
  Distribution cdist;
  /// Multiplies every sample count; 1 is the full acceptance scale.
  double scale = 1.0;

  std::size_t count(std::size_t full) const;
};

/// Runs fn(i) for i in [0, n) over `threads` workers. Work is split by
/// index, so results stored per index do not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

Check realizer_pushforward(const Context& ctx);
Check partiality_witness(const Context& ctx);
Check inverse_transform(const Context& ctx);
Check semi_inverse_structure(const Context& ctx);
Check levy_modulus(const Context& ctx);
Check certificate_soundness(const Context& ctx);
Check marginal_fidelity(const Context& ctx);
Check round_trip(const Context& ctx);
Check oracle_sanity(const Context& ctx);

/// Named groups of the checks above: "marginals", "certificates", "realizer".
std::vector<Check> run_suite(const std::string& suite, const Context& ctx);
Json report(const std::string& suite, const std::vector<Check>& checks);

}  // namespace fairbits::validate
