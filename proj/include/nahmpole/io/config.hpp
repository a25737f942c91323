// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nahmpole/core_domain.hpp"
#include "nahmpole/io/field_file.hpp"

namespace nahmpole {

enum class Command { Model, Ode, Spectrum, SolveSurface, SolveCylinder, SolvePlane, Verify, Distance, Study };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Model: return "model";
    case Command::Ode: return "ode";
    case Command::Spectrum: return "spectrum";
    case Command::SolveSurface: return "solve-surface";
    case Command::SolveCylinder: return "solve-cylinder";
    case Command::SolvePlane: return "solve-plane";
    case Command::Verify: return "verify";
    case Command::Distance: return "distance";
    case Command::Study: return "study";
  }
  return "unknown";
}

inline std::optional<Command> command_from_string(const std::string& s) {
  for (auto c : {Command::Model, Command::Ode, Command::Spectrum, Command::SolveSurface, Command::SolveCylinder,
                 Command::SolvePlane, Command::Verify, Command::Distance, Command::Study}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

/// Validated run configuration. `entries` keeps the resolved key=value pairs for report echoing.
struct RunConfig {
  Command command = Command::Ode;
  std::string source = "<memory>";
  std::filesystem::path base_dir = ".";

  // Domain.
  DomainSpec domain;
  bool has_domain = false;
  std::vector<std::size_t> resolution;
  GradingParams grading;

  // Higgs data: constants, polynomial coefficients (lowest degree first) or torus field files.
  double K = 0.0, alpha_sq = 1.0, beta_sq = 0.0, g0_sq = 1.0;
  std::optional<std::vector<Complex>> poly;
  std::vector<KnotPoint> knots;
  std::string K_file, alpha_sq_file, beta_sq_file;

  // Solver.
  double tol = 1e-10;
  std::optional<double> lambda;
  int max_iterations = 3000;
  double A = 1.0, A1 = 1.0, A2 = 1.0, eps = 0.5;
  std::string method = "monotone";
  bool from_above = false;
  bool polish = true;

  // Command parameters.
  int order = 1;
  int mode = 0;
  int count = 4;
  std::size_t samples = 33;
  std::size_t hemisphere_resolution = 256;
  std::string input, input2;
  double h0 = 1.0;
  std::size_t layers = 4;
  double fit_height = 0.3;
  double residual_floor = 0.25;  // verify: residual maxima use nodes with y >= this height
  double subharmonic_threshold = 0.0;
  std::string family;
  std::vector<std::size_t> resolutions;
  std::string encoding = "binary";

  // Outputs.
  std::string out = ".";
  std::string prefix;

  std::vector<std::pair<std::string, std::string>> entries;
};

namespace detail {

enum class ValueKind { Text, Real, Integer, Count, List, Bool, Complexes, Knot, Path };

struct KeySpec {
  ValueKind kind;
  bool repeatable = false;
};

inline const std::map<std::string, KeySpec>& config_schema() {
  static const std::map<std::string, KeySpec> s = {
      {"command", {ValueKind::Text}},       {"domain", {ValueKind::Text}},
      {"extents", {ValueKind::List}},       {"y_min", {ValueKind::Real}},
      {"y_max", {ValueKind::Real}},         {"center", {ValueKind::List}},
      {"resolution", {ValueKind::List}},    {"y_grading", {ValueKind::Real}},
      {"radial_grading", {ValueKind::Real}}, {"horizontal_grading", {ValueKind::Real}},
      {"K", {ValueKind::Real}},             {"alpha_sq", {ValueKind::Real}},
      {"beta_sq", {ValueKind::Real}},       {"g0_sq", {ValueKind::Real}},
      {"poly", {ValueKind::Complexes}},     {"knot", {ValueKind::Knot, true}},
      {"K_file", {ValueKind::Path}},        {"alpha_sq_file", {ValueKind::Path}},
      {"beta_sq_file", {ValueKind::Path}},  {"tol", {ValueKind::Real}},
      {"lambda", {ValueKind::Real}},        {"max_iterations", {ValueKind::Count}},
      {"A", {ValueKind::Real}},             {"A1", {ValueKind::Real}},
      {"A2", {ValueKind::Real}},            {"eps", {ValueKind::Real}},
      {"method", {ValueKind::Text}},        {"from_above", {ValueKind::Bool}},
      {"polish", {ValueKind::Bool}},        {"order", {ValueKind::Integer}},
      {"mode", {ValueKind::Integer}},       {"count", {ValueKind::Count}},
      {"samples", {ValueKind::Count}},      {"hemisphere_resolution", {ValueKind::Count}},
      {"input", {ValueKind::Path}},         {"input2", {ValueKind::Path}},
      {"h0", {ValueKind::Real}},            {"layers", {ValueKind::Count}},
      {"fit_height", {ValueKind::Real}},      {"residual_floor", {ValueKind::Real}},    {"subharmonic_threshold", {ValueKind::Real}},
      {"family", {ValueKind::Text}},        {"resolutions", {ValueKind::List}},
      {"encoding", {ValueKind::Text}},      {"out", {ValueKind::Text}},
      {"prefix", {ValueKind::Text}},
  };
  return s;
}

class ConfigParser {
 public:
  ConfigParser(std::string source, std::filesystem::path base) : source_(std::move(source)), base_(std::move(base)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw InputError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double real(int line, const std::string& key, const std::string& v) const {
    double x = 0.0;
    if (!parse_double(v, x) || !std::isfinite(x)) fail(line, "malformed number '" + v + "' for key '" + key + "'");
    return x;
  }

  long integer(int line, const std::string& key, const std::string& v) const {
    const double x = real(line, key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) fail(line, key + " must be an integer");
    return static_cast<long>(x);
  }

  std::vector<double> list(int line, const std::string& key, const std::string& v) const {
    std::vector<double> out;
    for (const auto& tok : split(v, ',')) out.push_back(real(line, key, trim(tok)));
    return out;
  }

  std::vector<std::size_t> counts(int line, const std::string& key, const std::string& v) const {
    std::vector<std::size_t> out;
    for (double x : list(line, key, v)) {
      if (x < 1.0 || x != std::floor(x)) fail(line, key + " entries must be positive integers");
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  }

  /// "a, b, c" with each entry real or "re:im".
  std::vector<Complex> complexes(int line, const std::string& key, const std::string& v) const {
    std::vector<Complex> out;
    for (const auto& tok : split(v, ',')) {
      const auto parts = split(trim(tok), ':');
      if (parts.size() == 1) {
        out.emplace_back(real(line, key, trim(parts[0])), 0.0);
      } else if (parts.size() == 2) {
        out.emplace_back(real(line, key, trim(parts[0])), real(line, key, trim(parts[1])));
      } else {
        fail(line, "malformed complex number '" + trim(tok) + "' for key '" + key + "'");
      }
    }
    return out;
  }

  /// "x, x3, order".
  KnotPoint knot(int line, const std::string& v) const {
    const auto parts = split(v, ',');
    if (parts.size() != 3) fail(line, "knot needs 'x, x3, order'");
    KnotPoint k;
    k.position = {real(line, "knot", trim(parts[0])), real(line, "knot", trim(parts[1]))};
    double o = 0.0;
    if (!parse_double(parts[2], o)) fail(line, "malformed number '" + trim(parts[2]) + "' for key 'knot'");
    if (!(o >= 1.0) || o != std::floor(o)) fail(line, "order must be a positive integer");
    k.order = static_cast<int>(o);
    return k;
  }

  std::string path(int line, const std::string& v) const {
    std::filesystem::path p(v);
    if (p.is_relative()) p = base_ / p;
    if (!std::filesystem::exists(p)) fail(line, "file '" + v + "' does not exist");
    return p.string();
  }

  bool boolean(int line, const std::string& key, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(line, "malformed boolean '" + v + "' for key '" + key + "'");
  }

 private:
  std::string source_;
  std::filesystem::path base_;
};

}  // namespace detail

/// Parses key=value lines ('#' starts a comment). Errors carry "source:line:".
/// `command_override` supplies the command when the caller already knows it (CLI subcommand).
inline RunConfig parse_config_text(const std::string& text, const std::string& source = "<memory>",
                                   const std::filesystem::path& base = ".",
                                   std::optional<Command> command_override = std::nullopt) {
  detail::ConfigParser P(source, base);
  RunConfig c;
  c.source = source;
  c.base_dir = base;
  std::map<std::string, int> seen;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  int domain_line = 0, resolution_line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) P.fail(line, "expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string v = detail::trim(body.substr(eq + 1));
    const auto& schema = detail::config_schema();
    const auto it = schema.find(key);
    if (it == schema.end()) P.fail(line, "unknown key '" + key + "'");
    if (!it->second.repeatable && seen.count(key)) P.fail(line, "duplicate key '" + key + "'");
    if (v.empty()) P.fail(line, "empty value for key '" + key + "'");
    seen[key] = line;
    c.entries.emplace_back(key, v);

    if (key == "command") {
      const auto cmd = command_from_string(v);
      if (!cmd) P.fail(line, "unknown command '" + v + "'");
      if (command_override && *cmd != *command_override) {
        P.fail(line, "config command '" + v + "' conflicts with subcommand '" + to_string(*command_override) + "'");
      }
      c.command = *cmd;
    } else if (key == "domain") {
      try {
        c.domain.kind = domain_kind_from_string(v);
      } catch (const InputError&) {
        P.fail(line, "unknown domain kind '" + v + "'");
      }
      c.has_domain = true;
      domain_line = line;
    } else if (key == "extents") {
      c.domain.extents = P.list(line, key, v);
    } else if (key == "y_min") {
      c.domain.y_min = P.real(line, key, v);
    } else if (key == "y_max") {
      c.domain.y_max = P.real(line, key, v);
    } else if (key == "center") {
      const auto xs = P.list(line, key, v);
      if (xs.size() != 2) P.fail(line, "center needs two coordinates");
      c.domain.center = {xs[0], xs[1]};
    } else if (key == "resolution") {
      c.resolution = P.counts(line, key, v);
      resolution_line = line;
    } else if (key == "y_grading") {
      c.grading.y_exponent = P.real(line, key, v);
    } else if (key == "radial_grading") {
      c.grading.radial_exponent = P.real(line, key, v);
    } else if (key == "horizontal_grading") {
      c.grading.horizontal_exponent = P.real(line, key, v);
    } else if (key == "K") {
      c.K = P.real(line, key, v);
    } else if (key == "alpha_sq") {
      c.alpha_sq = P.real(line, key, v);
    } else if (key == "beta_sq") {
      c.beta_sq = P.real(line, key, v);
    } else if (key == "g0_sq") {
      c.g0_sq = P.real(line, key, v);
      if (!(c.g0_sq > 0.0)) P.fail(line, "g0_sq must be positive");
    } else if (key == "poly") {
      c.poly = P.complexes(line, key, v);
    } else if (key == "knot") {
      c.knots.push_back(P.knot(line, v));
    } else if (key == "K_file") {
      c.K_file = P.path(line, v);
    } else if (key == "alpha_sq_file") {
      c.alpha_sq_file = P.path(line, v);
    } else if (key == "beta_sq_file") {
      c.beta_sq_file = P.path(line, v);
    } else if (key == "tol") {
      c.tol = P.real(line, key, v);
      if (!(c.tol > 1e-14 && c.tol < 1e-2)) P.fail(line, "tolerance out of range (1e-14, 1e-2)");
    } else if (key == "lambda") {
      c.lambda = P.real(line, key, v);
      if (!(*c.lambda >= 0.0)) P.fail(line, "lambda must be nonnegative");
    } else if (key == "max_iterations") {
      c.max_iterations = static_cast<int>(P.integer(line, key, v));
      if (c.max_iterations < 1) P.fail(line, "max_iterations must be positive");
    } else if (key == "A" || key == "A1" || key == "A2") {
      const double x = P.real(line, key, v);
      if (!(x > 0.0)) P.fail(line, "barrier constant " + key + " must be positive");
      (key == "A" ? c.A : key == "A1" ? c.A1 : c.A2) = x;
    } else if (key == "eps") {
      c.eps = P.real(line, key, v);
      if (!(c.eps > 0.0 && c.eps < 1.0)) P.fail(line, "eps must lie in (0, 1)");
    } else if (key == "method") {
      if (v != "monotone" && v != "newton") P.fail(line, "method must be 'monotone' or 'newton'");
      c.method = v;
    } else if (key == "from_above") {
      c.from_above = P.boolean(line, key, v);
    } else if (key == "polish") {
      c.polish = P.boolean(line, key, v);
    } else if (key == "order") {
      double o = 0.0;
      if (!detail::parse_double(v, o)) P.fail(line, "malformed number '" + v + "' for key 'order'");
      if (!(o >= 0.0) || o != std::floor(o) || o > 64) P.fail(line, "order must be a nonnegative integer");
      c.order = static_cast<int>(o);
    } else if (key == "mode") {
      c.mode = static_cast<int>(P.integer(line, key, v));
    } else if (key == "count") {
      c.count = static_cast<int>(P.integer(line, key, v));
    } else if (key == "samples") {
      c.samples = static_cast<std::size_t>(P.integer(line, key, v));
      if (c.samples < 2) P.fail(line, "samples must be at least 2");
    } else if (key == "hemisphere_resolution") {
      c.hemisphere_resolution = static_cast<std::size_t>(P.integer(line, key, v));
    } else if (key == "input") {
      c.input = P.path(line, v);
    } else if (key == "input2") {
      c.input2 = P.path(line, v);
    } else if (key == "h0") {
      c.h0 = P.real(line, key, v);
      if (!(c.h0 > 0.0)) P.fail(line, "h0 must be positive");
    } else if (key == "layers") {
      c.layers = static_cast<std::size_t>(P.integer(line, key, v));
    } else if (key == "fit_height") {
      c.fit_height = P.real(line, key, v);
      if (!(c.fit_height > 0.0)) P.fail(line, "fit_height must be positive");
    } else if (key == "residual_floor") {
      c.residual_floor = P.real(line, key, v);
      if (!(c.residual_floor >= 0.0)) P.fail(line, "residual_floor must be nonnegative");
    } else if (key == "subharmonic_threshold") {
      c.subharmonic_threshold = P.real(line, key, v);
    } else if (key == "family") {
      if (v != "knot" && v != "cylinder") P.fail(line, "family must be 'knot' or 'cylinder'");
      c.family = v;
    } else if (key == "resolutions") {
      c.resolutions = P.counts(line, key, v);
    } else if (key == "encoding") {
      if (v != "binary" && v != "text") P.fail(line, "encoding must be 'binary' or 'text'");
      c.encoding = v;
    } else if (key == "out") {
      c.out = v;
    } else if (key == "prefix") {
      c.prefix = v;
    }
  }
  const int end = line + 1;
  if (command_override) {
    c.command = *command_override;
    if (!seen.count("command")) c.entries.insert(c.entries.begin(), {"command", to_string(c.command)});
  } else if (!seen.count("command")) {
    P.fail(end, "missing required key 'command'");
  }
  if (c.poly && c.knots.empty()) {
    int deg = static_cast<int>(c.poly->size()) - 1;
    while (deg > 0 && (*c.poly)[static_cast<std::size_t>(deg)] == Complex{0.0, 0.0}) --deg;
    if (deg > 0) P.fail(end, "polynomial of degree " + std::to_string(deg) + " needs its knots listed");
  }

  auto need = [&](const char* key) {
    if (!seen.count(key)) P.fail(end, std::string("missing required key '") + key + "' for command " + to_string(c.command));
  };
  switch (c.command) {
    case Command::SolveSurface:
    case Command::SolveCylinder:
    case Command::SolvePlane:
      need("domain");
      need("resolution");
      break;
    case Command::Verify: need("input"); break;
    case Command::Distance:
      need("input");
      need("input2");
      break;
    case Command::Study:
      need("family");
      need("domain");
      break;
    default: break;
  }
  if (c.command == Command::SolvePlane && !c.poly) need("poly");
  if (c.has_domain && !c.resolution.empty()) {
    std::size_t axes = 0;
    switch (c.domain.kind) {
      case DomainKind::OdeLine: axes = 1; break;
      case DomainKind::LimitSurface:
      case DomainKind::AxisymSlab: axes = 2; break;
      case DomainKind::TorusHalfCylinder:
      case DomainKind::PlaneHalfSpace: axes = 3; break;
    }
    if (c.resolution.size() != axes) {
      P.fail(resolution_line, "resolution needs " + std::to_string(axes) + " entries for domain " +
                                  to_string(c.domain.kind));
    }
  }
  (void)domain_line;
  c.domain.knots = c.knots;
  c.domain.far_field_degree = 0;
  for (const auto& k : c.knots) c.domain.far_field_degree += k.order;
  return c;
}

/// Every key with its resolved value (defaults included), in schema order, so a run can be replayed.
inline std::vector<std::pair<std::string, std::string>> resolved_config(const RunConfig& c) {
  auto num = [](double v) {
    for (int p = 15; p <= 17; ++p) {
      std::ostringstream os;
      os << std::setprecision(p) << v;
      if (p == 17 || std::stod(os.str()) == v) return os.str();
    }
    return std::string();
  };
  auto list = [&](const auto& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + num(static_cast<double>(xs[k]));
    return s;
  };
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](const std::string& k, const std::string& v) {
    if (!v.empty()) out.emplace_back(k, v);
  };
  add("command", to_string(c.command));
  if (c.has_domain) {
    add("domain", to_string(c.domain.kind));
    add("extents", list(c.domain.extents));
    add("y_min", num(c.domain.y_min));
    add("y_max", num(c.domain.y_max));
    add("center", num(c.domain.center.real()) + "," + num(c.domain.center.imag()));
  }
  add("resolution", list(c.resolution));
  add("y_grading", num(c.grading.y_exponent));
  add("radial_grading", num(c.grading.radial_exponent));
  add("horizontal_grading", num(c.grading.horizontal_exponent));
  add("K", num(c.K));
  add("alpha_sq", num(c.alpha_sq));
  add("beta_sq", num(c.beta_sq));
  add("g0_sq", num(c.g0_sq));
  if (c.poly) {
    std::string s;
    for (std::size_t k = 0; k < c.poly->size(); ++k) {
      s += (k ? "," : "") + num((*c.poly)[k].real()) + ":" + num((*c.poly)[k].imag());
    }
    add("poly", s);
  }
  for (const auto& k : c.knots) {
    add("knot", num(k.position.real()) + "," + num(k.position.imag()) + "," + std::to_string(k.order));
  }
  add("K_file", c.K_file);
  add("alpha_sq_file", c.alpha_sq_file);
  add("beta_sq_file", c.beta_sq_file);
  add("tol", num(c.tol));
  if (c.lambda) add("lambda", num(*c.lambda));
  add("max_iterations", std::to_string(c.max_iterations));
  add("A", num(c.A));
  add("A1", num(c.A1));
  add("A2", num(c.A2));
  add("eps", num(c.eps));
  add("method", c.method);
  add("from_above", c.from_above ? "true" : "false");
  add("polish", c.polish ? "true" : "false");
  add("order", std::to_string(c.order));
  add("mode", std::to_string(c.mode));
  add("count", std::to_string(c.count));
  add("samples", std::to_string(c.samples));
  add("hemisphere_resolution", std::to_string(c.hemisphere_resolution));
  add("input", c.input);
  add("input2", c.input2);
  add("h0", num(c.h0));
  add("layers", std::to_string(c.layers));
  add("fit_height", num(c.fit_height));
  add("residual_floor", num(c.residual_floor));
  add("subharmonic_threshold", num(c.subharmonic_threshold));
  add("family", c.family);
  add("resolutions", list(c.resolutions));
  add("encoding", c.encoding);
  add("out", c.out);
  add("prefix", c.prefix);
  return out;
}

inline RunConfig parse_config(const std::string& path, std::optional<Command> command_override = std::nullopt) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const auto base = std::filesystem::path(path).parent_path();
  return parse_config_text(ss.str(), path, base.empty() ? std::filesystem::path(".") : base, command_override);
}

}  // namespace nahmpole
