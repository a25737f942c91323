// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "nahmpole/core_domain.hpp"

namespace nahmpole {

enum class FieldEncoding { Binary, Text };

inline constexpr int kFieldFileVersion = 1;

/// On-disk field: header (version, domain kind, dims, coordinates) and a row-major payload.
struct FieldFile {
  int version = kFieldFileVersion;
  DomainKind domain = DomainKind::OdeLine;
  std::vector<std::size_t> dims;
  std::vector<std::vector<double>> coords;
  std::vector<double> values;
  FieldEncoding encoding = FieldEncoding::Binary;
};

namespace detail {

inline std::string join_numbers(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Strict decimal parse of a whole token.
inline bool parse_double(const std::string& tok, double& out) {
  const std::string t = trim(tok);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    double v = 0.0;
    if (!parse_double(tok, v)) throw InputError("malformed number '" + trim(tok) + "' in " + what);
    out.push_back(v);
  }
  return out;
}

inline void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline FieldFile to_field_file(const ScalarField& f, FieldEncoding enc = FieldEncoding::Binary) {
  FieldFile ff;
  const GradedGrid& g = f.grid_ref();
  ff.domain = g.kind();
  ff.dims = g.dims();
  for (const auto& ax : g.axes()) ff.coords.push_back(ax.nodes);
  ff.values = f.values();
  ff.encoding = enc;
  return ff;
}

inline void write_field_file(const std::string& path, const FieldFile& ff) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os << "EBF1\n";
  os << "version=" << ff.version << "\n";
  os << "domain=" << to_string(ff.domain) << "\n";
  os << "dims=";
  for (std::size_t k = 0; k < ff.dims.size(); ++k) os << (k ? "," : "") << ff.dims[k];
  os << "\ncoords=";
  for (std::size_t a = 0; a < ff.coords.size(); ++a) os << (a ? ";" : "") << detail::join_numbers(ff.coords[a]);
  os << "\ndata=" << (ff.encoding == FieldEncoding::Binary ? "binary-le-f64" : "text") << "\n";
  if (ff.encoding == FieldEncoding::Binary) {
    for (double v : ff.values) detail::put_le(os, v);
  } else {
    os << std::setprecision(17);
    for (double v : ff.values) os << v << "\n";
  }
  if (!os) throw InputError("write to '" + path + "' failed");
}

inline void write_field(const std::string& path, const ScalarField& f, FieldEncoding enc = FieldEncoding::Binary) {
  write_field_file(path, to_field_file(f, enc));
}

inline FieldFile read_field_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open field file '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != "EBF1") throw InputError("'" + path + "' is not a field file (missing EBF1)");
  FieldFile ff;
  bool have_version = false, have_domain = false, have_dims = false, have_coords = false, have_data = false;
  while (!have_data && std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("malformed header line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "version") {
      double v = 0.0;
      if (!detail::parse_double(val, v)) throw InputError("malformed field file version '" + val + "'");
      if (v != kFieldFileVersion) throw InputError("field file version mismatch: found " + val + ", expected 1");
      ff.version = kFieldFileVersion;
      have_version = true;
    } else if (key == "domain") {
      ff.domain = domain_kind_from_string(val);
      have_domain = true;
    } else if (key == "dims") {
      for (double d : detail::parse_number_list(val, "dims")) {
        if (!(d >= 1.0) || d != std::floor(d)) throw InputError("dims must be positive integers");
        ff.dims.push_back(static_cast<std::size_t>(d));
      }
      have_dims = true;
    } else if (key == "coords") {
      for (const auto& part : detail::split(val, ';')) ff.coords.push_back(detail::parse_number_list(part, "coords"));
      have_coords = true;
    } else if (key == "data") {
      if (val == "binary-le-f64") {
        ff.encoding = FieldEncoding::Binary;
      } else if (val == "text") {
        ff.encoding = FieldEncoding::Text;
      } else {
        throw InputError("unknown data encoding '" + val + "'");
      }
      have_data = true;
    } else {
      throw InputError("unknown header key '" + key + "'");
    }
  }
  if (!have_version || !have_domain || !have_dims || !have_coords || !have_data) {
    throw InputError("incomplete field file header in '" + path + "'");
  }
  if (ff.coords.size() != ff.dims.size()) throw InputError("header mismatch: coords and dims have different ranks");
  for (std::size_t a = 0; a < ff.dims.size(); ++a) {
    if (ff.coords[a].size() != ff.dims[a]) throw InputError("header mismatch: coords do not match dims");
  }
  const std::size_t n = std::accumulate(ff.dims.begin(), ff.dims.end(), std::size_t{1}, std::multiplies<>());
  ff.values.reserve(n);
  if (ff.encoding == FieldEncoding::Binary) {
    std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::size_t have = buf.size() / 8;
    if (have < n) throw InputError("payload short by " + std::to_string(n - have) + " values");
    if (buf.size() != 8 * n) throw InputError("payload longer than the header dims");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    for (std::size_t k = 0; k < n; ++k) ff.values.push_back(detail::get_le(p + 8 * k));
  } else {
    while (std::getline(is, line)) {
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      double v = 0.0;
      if (!detail::parse_double(t, v)) throw InputError("malformed payload value '" + t + "'");
      ff.values.push_back(v);
    }
    if (ff.values.size() < n) throw InputError("payload short by " + std::to_string(n - ff.values.size()) + " values");
    if (ff.values.size() > n) throw InputError("payload longer than the header dims");
  }
  return ff;
}

/// Rebuilds the grid stored in a field header. Periodic axes are assumed uniform.
inline GridPtr grid_from_field_file(const FieldFile& ff) {
  DomainSpec spec;
  spec.kind = ff.domain;
  std::vector<Axis> axes;
  auto bounded = [](AxisKind kind, const std::vector<double>& x) {
    Axis ax;
    ax.kind = kind;
    ax.nodes = x;
    ax.map = {GradingMap::Type::Explicit, x.front(), x.back(), 1.0};
    return ax;
  };
  auto periodic = [](const std::vector<double>& x) {
    if (x.size() < 2) throw InputError("periodic axis needs at least two nodes");
    Axis ax;
    ax.kind = AxisKind::Periodic;
    ax.nodes = x;
    ax.period = (x[1] - x[0]) * static_cast<double>(x.size());
    ax.map = {GradingMap::Type::Uniform, x.front(), x.front() + ax.period, 1.0};
    return ax;
  };
  std::size_t expected = 0;
  switch (ff.domain) {
    case DomainKind::OdeLine: expected = 1; break;
    case DomainKind::LimitSurface:
    case DomainKind::AxisymSlab: expected = 2; break;
    case DomainKind::TorusHalfCylinder:
    case DomainKind::PlaneHalfSpace: expected = 3; break;
  }
  if (ff.dims.size() != expected) throw InputError("header mismatch: wrong rank for domain " + to_string(ff.domain));
  for (const auto& c : ff.coords) {
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (!(c[k] > c[k - 1])) throw InputError("header coordinates must be strictly increasing");
    }
  }
  switch (ff.domain) {
    case DomainKind::OdeLine: axes.push_back(bounded(AxisKind::Bounded, ff.coords[0])); break;
    case DomainKind::LimitSurface:
      axes.push_back(periodic(ff.coords[0]));
      axes.push_back(periodic(ff.coords[1]));
      spec.extents = {axes[0].period, axes[1].period};
      break;
    case DomainKind::AxisymSlab:
      axes.push_back(bounded(AxisKind::Radial, ff.coords[0]));
      axes.push_back(bounded(AxisKind::Bounded, ff.coords[1]));
      spec.extents = {ff.coords[0].back()};
      break;
    case DomainKind::TorusHalfCylinder:
      axes.push_back(periodic(ff.coords[0]));
      axes.push_back(periodic(ff.coords[1]));
      axes.push_back(bounded(AxisKind::Bounded, ff.coords[2]));
      spec.extents = {axes[0].period, axes[1].period};
      break;
    case DomainKind::PlaneHalfSpace: {
      const auto& x = ff.coords[0];
      const auto& x3 = ff.coords[1];
      axes.push_back(bounded(AxisKind::Bounded, x));
      axes.push_back(bounded(AxisKind::Bounded, x3));
      axes.push_back(bounded(AxisKind::Bounded, ff.coords[2]));
      spec.center = {0.5 * (x.front() + x.back()), 0.5 * (x3.front() + x3.back())};
      spec.extents = {0.5 * (x.back() - x.front()), 0.5 * (x3.back() - x3.front())};
      break;
    }
  }
  if (ff.domain != DomainKind::LimitSurface) {
    spec.y_min = axes.back().nodes.front();
    spec.y_max = axes.back().nodes.back();
  }
  return std::make_shared<const GradedGrid>(spec, std::move(axes), GradingParams{});
}

inline ScalarField read_field(const std::string& path) {
  FieldFile ff = read_field_file(path);
  GridPtr g = grid_from_field_file(ff);
  return ScalarField(g, std::move(ff.values));
}

/// Same node coordinates, bit for bit.
inline bool same_grid(const GradedGrid& a, const GradedGrid& b) {
  if (a.kind() != b.kind() || a.dimension() != b.dimension()) return false;
  for (std::size_t k = 0; k < a.dimension(); ++k) {
    if (a.axis(k).nodes != b.axis(k).nodes) return false;
  }
  return true;
}

}  // namespace nahmpole
