#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "conflab/concentration.hpp"
#include "conflab/disk.hpp"
#include "conflab/metric.hpp"
#include "conflab/mobius.hpp"
#include "conflab/sphere.hpp"

namespace conflab::io {

using Json = nlohmann::json;

namespace detail {

// JSON has no NaN or infinity; those go out as null and come back as NaN.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw Error(ErrorCode::InvalidArgument, "expected a number, got " + j.dump());
  return j.get<double>();
}

inline Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

inline std::vector<double> numbers(const Json& j, std::size_t expected) {
  if (!j.is_array() || j.size() != expected)
    throw Error(ErrorCode::InvalidArgument,
                "expected an array of " + std::to_string(expected) + " values");
  std::vector<double> out;
  out.reserve(expected);
  for (const Json& x : j) out.push_back(number(x));
  return out;
}

template <class Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "malformed " + what + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SphereField

inline Json to_json(const GridField& g) {
  return {{"chart", to_string(g.chart)}, {"half_width", g.half_width}, {"n", g.n}, {"values", detail::numbers(g.values)}};
}

inline GridField grid_from_json(const Json& j) {
  return detail::guarded("chart record", [&] {
    GridField g(chart_from_string(j.at("chart").get<std::string>()), j.at("half_width").get<double>(),
                j.at("n").get<int>());
    g.values = detail::numbers(j.at("values"), g.values.size());
    return g;
  });
}

inline Json to_json(const SphereField& f) {
  return {{"label", f.label}, {"charts", Json::array({to_json(f.north), to_json(f.south)})}};
}

inline SphereField sphere_field_from_json(const Json& j) {
  return detail::guarded("sphere field", [&] {
    SphereField f;
    f.label = j.value("label", "");
    bool seen[2] = {false, false};
    for (const Json& c : j.at("charts")) {
      GridField g = grid_from_json(c);
      seen[g.chart == ChartId::North ? 0 : 1] = true;
      f.chart(g.chart) = std::move(g);
    }
    if (!seen[0] || !seen[1]) throw Error(ErrorCode::InvalidArgument, "sphere field needs both charts");
    if (f.north.n != f.south.n || f.north.half_width != f.south.half_width)
      throw Error(ErrorCode::InconsistentAtlas, "charts disagree on grid size or half width");
    return f;
  });
}

// ---------------------------------------------------------------------------
// Metrics

/// The sampled exponent plus the provenance tag.
inline Json metric_to_json(const ConformalMetric& g) {
  Json j = to_json(g.field());
  j["provenance"] = g.provenance();
  return j;
}

inline ConformalMetric metric_from_json(const Json& j) {
  SphereField f = sphere_field_from_json(j);
  return ConformalMetric::from_field(std::move(f), j.value("provenance", "custom"));
}

// ---------------------------------------------------------------------------
// Mobius transforms: {"a": [re, im], "b": ..., "c": ..., "d": ...}

inline Json to_json(const MobiusTransform& m) {
  auto pair = [](Complex z) { return Json::array({z.real(), z.imag()}); };
  return {{"a", pair(m.a())}, {"b", pair(m.b())}, {"c", pair(m.c())}, {"d", pair(m.d())}};
}

inline MobiusTransform mobius_from_json(const Json& j) {
  return detail::guarded("Mobius record", [&] {
    auto entry = [&](const char* key) {
      const auto v = detail::numbers(j.at(key), 2);
      return Complex(v[0], v[1]);
    };
    return MobiusTransform(entry("a"), entry("b"), entry("c"), entry("d"));
  });
}

// ---------------------------------------------------------------------------
// Disk fields

inline Json to_json(const DiskField& f) {
  return {{"n", f.n}, {"radius", f.radius}, {"values", detail::numbers(f.values)}};
}

inline DiskField disk_field_from_json(const Json& j) {
  return detail::guarded("disk field", [&] {
    DiskField f(j.at("n").get<int>(), j.at("radius").get<double>());
    f.values = detail::numbers(j.at("values"), f.values.size());
    return f;
  });
}

// ---------------------------------------------------------------------------
// Analysis results

inline Json to_json(const SpherePoint& p) { return Json::array({p.x1(), p.x2(), p.x3()}); }

inline Json to_json(const FunctionalReport& r) {
  return {{"area", r.area},       {"entropy", r.entropy}, {"dev1", r.dev1},
          {"devp", r.devp},       {"p", r.p},             {"total_curvature", r.total_curvature},
          {"gauss_bonnet_residual", r.gauss_bonnet_residual()}};
}

inline Json to_json(const NormalizationResult& r) {
  return {{"sigma", to_json(r.sigma)},
          {"u_prime_sup", detail::number(r.u_prime_sup)},
          {"rho_after", detail::number(r.rho_after)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"center_norm", detail::number(r.center_norm)}};
}

/// Scalars only; v' goes out separately as a disk field.
inline Json to_json(const BubbleReport& r) {
  return {{"center", to_json(r.center)},
          {"t", r.t},
          {"rho", detail::number(r.rho)},
          {"mass", r.mass},
          {"bubble_deviation", r.bubble_deviation},
          {"pde_residual", r.pde_residual},
          {"peak", Json::array({r.peak_x, r.peak_y})}};
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

inline Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return detail::guarded(path.string(), [&] { return Json::parse(text); });
}

// ---------------------------------------------------------------------------
// CSV

namespace csv {

/// Shortest text that parses back to the same double; nan/inf spelled out.
inline std::string real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

inline std::string text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline const char* kFunctionalHeader = "label,k,n,area,entropy,dev1,devp,p,gauss_bonnet_residual";
inline const char* kEstimateHeader = "op,params,lhs,rhs_bound,constant_estimate,holds,n";
inline const char* kDiagnosticsHeader =
    "family,k,n,epsilon1,area,entropy,dev1,rho_before,rho_after,u_prime_sup,diameter,bubble_deviation,error";

inline std::string row(const std::string& label, double k, int n, const FunctionalReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", text(label), real(k), n, real(r.area), real(r.entropy),
                     real(r.dev1), real(r.devp), real(r.p), real(r.gauss_bonnet_residual()));
}

inline std::string row(const EstimateReport& r) {
  const char* holds = !r.holds ? "" : (*r.holds ? "true" : "false");
  return fmt::format("{},{},{},{},{},{},{}", text(r.op), text(r.params), real(r.lhs), real(r.rhs_bound),
                     real(r.constant_estimate), holds, r.n);
}

inline std::string row(const DiagnosticsRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", text(r.family), real(r.k), r.n, real(r.epsilon1),
                     real(r.area), real(r.entropy), real(r.dev1), real(r.rho_before), real(r.rho_after),
                     real(r.u_prime_sup), real(r.diameter), real(r.bubble_deviation), text(r.error));
}

template <class Rows, class Fn>
std::string table(const char* header, const Rows& rows, Fn&& fn) {
  std::string out = std::string(header) + "\n";
  for (const auto& r : rows) out += fn(r) + "\n";
  return out;
}

/// Splits one CSV line, honouring double quotes.
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace csv

}  // namespace conflab::io
