#include "switchgrid/model/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace switchgrid {

bool ValidationReport::ok() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ValidationEntry& e) { return e.passed || e.warning_only; });
}

const ValidationEntry* ValidationReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    list.push_back({{"name", e.name}, {"pass", e.passed}, {"warning_only", e.warning_only},
                    {"witness", e.witness}});
  }
  return {{"ok", ok()}, {"samples", samples}, {"seed", seed}, {"entries", list}};
}

namespace {

double sample_range(const MarketModel& m) {
  const auto& d = m.descriptor;
  if (d.contains("cap")) return 2.0 * d.at("cap").get<double>();
  if (d.contains("x") && d.at("x").is_array() && !d.at("x").empty()) {
    return 1.5 * d.at("x").back().get<double>();
  }
  return 50.0;
}

class Recorder {
 public:
  explicit Recorder(ValidationReport& r) : report_(r) {}

  // Returns the entry so the caller can record the first failure only.
  ValidationEntry& open(std::string name, bool warning_only = false) {
    report_.entries.push_back({std::move(name), true, warning_only, {}});
    return report_.entries.back();
  }

  static void fail(ValidationEntry& e, std::string witness) {
    if (!e.passed) return;
    e.passed = false;
    e.witness = std::move(witness);
  }

 private:
  ValidationReport& report_;
};

}  // namespace

ValidationReport validate_spec(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed) {
  ValidationReport report;
  report.samples = std::max<std::size_t>(samples, 1);
  report.seed = seed;
  report.entries.reserve(16);
  Recorder rec(report);

  std::mt19937_64 rng(seed);
  const double big_t = spec.horizon;
  const double xr = sample_range(spec.market);
  std::uniform_real_distribution<double> ut(0.0, big_t);
  std::uniform_real_distribution<double> ux(0.0, xr);
  const auto& b = spec.market.drift;
  const auto& s = spec.market.volatility;

  auto& drift0 = rec.open("drift_zero_at_origin");
  auto& vol0 = rec.open("volatility_zero_at_origin");
  auto& lip = rec.open("lipschitz");
  auto& bounded = rec.open("bounded", !spec.market.sup_bound.has_value());
  if (!spec.market.sup_bound) {
    Recorder::fail(bounded, "no sup bound declared; coefficients are unbounded");
  }
  const double c1 = spec.market.lipschitz_const;
  for (std::size_t k = 0; k < report.samples; ++k) {
    const double t = ut(rng);
    const double x1 = ux(rng);
    const double x2 = ux(rng);
    if (std::abs(b(t, 0.0)) > 1e-14) Recorder::fail(drift0, fmt::format("t={} b(t,0)={}", t, b(t, 0.0)));
    if (std::abs(s(t, 0.0)) > 1e-14) {
      Recorder::fail(vol0, fmt::format("t={} sigma(t,0)={}", t, s(t, 0.0)));
    }
    const double lhs = std::abs(b(t, x1) - b(t, x2)) + std::abs(s(t, x1) - s(t, x2));
    if (lhs > c1 * std::abs(x1 - x2) * (1.0 + 1e-9) + 1e-14) {
      Recorder::fail(lip, fmt::format("t={} x1={} x2={} lhs={} bound={}", t, x1, x2, lhs,
                                      c1 * std::abs(x1 - x2)));
    }
    if (spec.market.sup_bound) {
      const double mag = std::abs(b(t, x1)) + std::abs(s(t, x1));
      if (mag > *spec.market.sup_bound * (1.0 + 1e-12)) {
        Recorder::fail(bounded, fmt::format("t={} x={} |b|+|sigma|={} C4={}", t, x1, mag,
                                            *spec.market.sup_bound));
      }
    }
  }

  auto& c0 = rec.open("cost_zero_at_zero");
  if (spec.cost(0) != 0.0) Recorder::fail(c0, fmt::format("c(0)={}", spec.cost(0)));
  auto& cpos = rec.open("cost_positive");
  for (int dz = -spec.cost.max_trade(); dz <= spec.cost.max_trade(); ++dz) {
    if (dz != 0 && !(spec.cost(dz) > 0.0)) Recorder::fail(cpos, fmt::format("c({})={}", dz, spec.cost(dz)));
  }
  auto& csub = rec.open("cost_subadditive");
  if (const auto sub = is_subadditive(spec.cost); !sub.subadditive) {
    const auto [z1, z2] = *sub.witness;
    Recorder::fail(csub, fmt::format("z1={} z2={} c(z1)+c(z2)={} c(z1+z2)={}", z1, z2,
                                     spec.cost(z1) + spec.cost(z2), spec.cost(z1 + z2)));
  }

  const auto& u = spec.utility;
  auto& u0 = rec.open("utility_zero_at_zero");
  if (u(0.0) != 0.0) Recorder::fail(u0, fmt::format("U(0)={}", u(0.0)));
  auto& uinc = rec.open("utility_increasing");
  auto& ucon = rec.open("utility_concave");
  auto& uneg = rec.open("utility_zero_below_zero");
  std::uniform_real_distribution<double> uw(0.0, 100.0);
  for (std::size_t k = 0; k < report.samples; ++k) {
    double a = uw(rng);
    double c = uw(rng);
    if (a > c) std::swap(a, c);
    if (a < c && !(u(a) < u(c))) Recorder::fail(uinc, fmt::format("U({})={} U({})={}", a, u(a), c, u(c)));
    const double mid = u(0.5 * (a + c));
    if (mid < 0.5 * (u(a) + u(c)) - 1e-12) {
      Recorder::fail(ucon, fmt::format("a={} b={} U(mid)={} mean={}", a, c, mid, 0.5 * (u(a) + u(c))));
    }
    if (u(-a - 1e-9) != 0.0) Recorder::fail(uneg, fmt::format("U({})={}", -a - 1e-9, u(-a - 1e-9)));
  }

  auto& k0 = rec.open("positions_contain_zero");
  if (!spec.positions.contains(0)) {
    Recorder::fail(k0, fmt::format("c2={} c3={}", spec.positions.c2, spec.positions.c3));
  }

  auto& nondeg = rec.open("nondegeneracy", true);
  std::uniform_real_distribution<double> ux_pos(1e-6, xr);
  for (std::size_t k = 0; k < report.samples; ++k) {
    const double t = ut(rng);
    const double x = ux_pos(rng);
    for (int z = spec.positions.lowest(); z <= spec.positions.highest(); ++z) {
      if (z == 0) continue;
      if (!(z * b(t, x) < 0.0) && s(t, x) == 0.0) {
        Recorder::fail(nondeg, fmt::format("t={} x={} z={} zb={} sigma=0", t, x, z, z * b(t, x)));
      }
    }
  }
  return report;
}

}  // namespace switchgrid
