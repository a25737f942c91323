// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nahmpole/cli_io.hpp"

using namespace nahmpole;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nahmpole_cli_io" / name;
  fs::create_directories(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

ScalarField random_field(const GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return ScalarField::sample(g, [&](std::size_t) { return dist(rng) * std::exp(10.0 * dist(rng)); });
}

GridPtr plane_grid(std::size_t n) {
  DomainSpec s;
  s.kind = DomainKind::PlaneHalfSpace;
  s.extents = {1.5, 0.75};
  s.center = {0.25, -0.5};
  s.y_max = 2.0;
  GradingParams gp;
  gp.horizontal_exponent = 1.5;
  return build_grid(s, {n, n, n}, gp);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, MinimalOdeConfigIsValid) {
  const RunConfig c = parse_config_text("command = ode\ntol = 1e-10\n");
  EXPECT_EQ(c.command, Command::Ode);
  EXPECT_DOUBLE_EQ(c.tol, 1e-10);
}

TEST(Config, FractionalKnotOrderRejected) {
  const std::string e = error_of("command = solve-plane\nknot = 0, 0, 0.5\n");
  EXPECT_NE(e.find("order must be a positive integer"), std::string::npos) << e;
  EXPECT_NE(e.find(":2:"), std::string::npos) << e;
}

TEST(Config, ToleranceOutOfRange) {
  EXPECT_NE(error_of("command = ode\ntol = 1\n").find("tolerance out of range"), std::string::npos);
  EXPECT_NE(error_of("command = ode\ntol = 1e-15\n").find("tolerance out of range"), std::string::npos);
}

TEST(Config, FirstErrorCarriesLineNumber) {
  const std::string unknown = error_of("command = ode\n# comment\n\nbogus = 3\n");
  EXPECT_NE(unknown.find(":4: unknown key 'bogus'"), std::string::npos) << unknown;
  const std::string malformed = error_of("command = ode\ny_max = 1.5x\n");
  EXPECT_NE(malformed.find(":2: malformed number '1.5x'"), std::string::npos) << malformed;
  const std::string missing = error_of("tol = 1e-10\n");
  EXPECT_NE(missing.find("missing required key 'command'"), std::string::npos) << missing;
  const std::string needs_input = error_of("command = verify\n");
  EXPECT_NE(needs_input.find("missing required key 'input'"), std::string::npos) << needs_input;
}

TEST(Config, ReferencedFilesMustExist) {
  const std::string e = error_of("command = verify\ninput = /nonexistent/field.ebf\n");
  EXPECT_NE(e.find("does not exist"), std::string::npos) << e;
}

TEST(Config, ResolutionMatchesDomainRank) {
  const std::string e = error_of("command = solve-cylinder\ndomain = TorusHalfCylinder\nresolution = 8, 8\n");
  EXPECT_NE(e.find("resolution needs 3 entries"), std::string::npos) << e;
}

TEST(Config, CommandOverrideAndConflict) {
  EXPECT_EQ(parse_config_text("tol = 1e-9\n", "x", ".", Command::Ode).command, Command::Ode);
  EXPECT_THROW(parse_config_text("command = ode\n", "x", ".", Command::Study), InputError);
}

TEST(Config, ResolvedConfigReparsesToSameValues) {
  const RunConfig a = parse_config_text(
      "command = solve-plane\ndomain = PlaneHalfSpace\nextents = 2, 1\ncenter = 0.1, 0.2\n"
      "resolution = 16, 16, 16\npoly = -0.04:0.5, 0, 1\nknot = 0.2, 0, 1\nknot = -0.2, 0, 1\ntol = 3e-11\n");
  std::string text;
  for (const auto& [k, v] : resolved_config(a)) text += k + " = " + v + "\n";
  const RunConfig b = parse_config_text(text);
  EXPECT_EQ(resolved_config(a), resolved_config(b));
  ASSERT_TRUE(b.poly.has_value());
  EXPECT_EQ((*b.poly)[0], Complex(-0.04, 0.5));
  EXPECT_EQ(b.knots.size(), 2u);
  EXPECT_EQ(b.domain.far_field_degree, 2);
  EXPECT_EQ(b.tol, 3e-11);
}

TEST(FieldFile, BinaryRoundTripIsBitIdentical) {
  const GridPtr g = plane_grid(64);
  const ScalarField f = random_field(g, 7);
  const std::string path = (scratch("binary") / "f.ebf").string();
  write_field(path, f);
  const ScalarField h = read_field(path);
  ASSERT_EQ(h.size(), f.size());
  EXPECT_EQ(std::memcmp(h.values().data(), f.values().data(), f.size() * sizeof(double)), 0);
  EXPECT_TRUE(same_grid(f.grid_ref(), h.grid_ref()));
  EXPECT_EQ(h.grid_ref().kind(), DomainKind::PlaneHalfSpace);
}

TEST(FieldFile, TruncatedPayloadReportsShortfall) {
  const GridPtr g = plane_grid(8);
  const std::string path = (scratch("truncated") / "f.ebf").string();
  write_field(path, random_field(g, 1));
  fs::resize_file(path, fs::file_size(path) - 3 * 8);
  try {
    read_field_file(path);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("payload short by 3 values"), std::string::npos) << e.what();
  }
}

TEST(FieldFile, TextAndBinaryAgree) {
  const GridPtr g = plane_grid(12);
  ScalarField f = ScalarField::sample(g, [&](std::size_t i) { return std::sin(3.0 * g->y(i)) + g->z(i).real(); });
  const fs::path dir = scratch("cross");
  write_field((dir / "b.ebf").string(), f, FieldEncoding::Binary);
  write_field((dir / "t.ebf").string(), f, FieldEncoding::Text);
  const ScalarField b = read_field((dir / "b.ebf").string());
  const ScalarField t = read_field((dir / "t.ebf").string());
  double diff = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) diff = std::max(diff, std::abs(b[i] - t[i]));
  EXPECT_LE(diff, 1e-15);
  EXPECT_EQ(read_field_file((dir / "t.ebf").string()).encoding, FieldEncoding::Text);
}

TEST(FieldFile, HeaderErrors) {
  const fs::path dir = scratch("header");
  auto write_text = [&](const std::string& name, const std::string& body) {
    std::ofstream((dir / name).string()) << body;
    return (dir / name).string();
  };
  const std::string v2 = write_text("v2.ebf", "EBF1\nversion=2\ndomain=OdeLine\ndims=2\ncoords=0,1\ndata=text\n1\n2\n");
  EXPECT_THROW(
      {
        try {
          read_field_file(v2);
        } catch (const InputError& e) {
          EXPECT_NE(std::string(e.what()).find("version mismatch"), std::string::npos);
          throw;
        }
      },
      InputError);
  const std::string dims = write_text("dims.ebf", "EBF1\nversion=1\ndomain=OdeLine\ndims=3\ncoords=0,1\ndata=text\n1\n2\n");
  EXPECT_THROW(read_field_file(dims), InputError);
  const std::string longer = write_text("long.ebf", "EBF1\nversion=1\ndomain=OdeLine\ndims=2\ncoords=0,1\ndata=text\n1\n2\n3\n");
  EXPECT_THROW(read_field_file(longer), InputError);
  const std::string magic = write_text("magic.ebf", "EBF0\n");
  EXPECT_THROW(read_field_file(magic), InputError);
}

TEST(FieldFile, PeriodicAndRadialGridsReconstruct) {
  DomainSpec s;
  s.kind = DomainKind::TorusHalfCylinder;
  s.extents = {1.0, 0.5};
  s.y_max = 3.0;
  const GridPtr torus = build_grid(s, {8, 12, 16});
  const std::string path = (scratch("grids") / "torus.ebf").string();
  write_field(path, ScalarField(torus, 1.0));
  const ScalarField t = read_field(path);
  EXPECT_TRUE(same_grid(*torus, t.grid_ref()));
  EXPECT_NEAR(t.grid_ref().axis(1).period, 0.5, 1e-15);

  DomainSpec a;
  a.kind = DomainKind::AxisymSlab;
  a.extents = {2.0};
  a.y_max = 1.0;
  const GridPtr slab = build_grid(a, {9, 10});
  write_field(path, ScalarField(slab, 2.0));
  EXPECT_TRUE(same_grid(*slab, read_field(path).grid_ref()));
}

TEST(Run, OdeReportContainsAcceptanceNumbers) {
  RunConfig c = parse_config_text("command = ode\ntol = 1e-10\nsamples = 4\n");
  c.out = scratch("ode").string();
  const RunOutcome o = run(c);
  EXPECT_EQ(o.exit_code, 0);
  EXPECT_EQ(o.report.get("ode.rate_ok"), "true");
  EXPECT_EQ(o.report.get("config.tol"), "1e-10");
  const std::string text = slurp(o.report_path);
  EXPECT_NE(text.find("```table ode_profile"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 10), "status=ok\n");
}

TEST(Run, DistanceOfSolutionWithItselfVanishes) {
  const fs::path dir = scratch("distance");
  RunConfig solve = parse_config_text(
      "command = solve-plane\ndomain = AxisymSlab\nextents = 2\ny_max = 2\nresolution = 16, 16\npoly = 0, 1\n"
      "knot = 0, 0, 1\n");
  solve.out = dir.string();
  const RunOutcome s = run(solve);
  ASSERT_EQ(s.exit_code, 0) << s.report.get("error");
  const std::string u = (dir / "u.ebf").string();
  RunConfig dist = parse_config_text("command = distance\ninput = " + u + "\ninput2 = " + u + "\n");
  dist.out = dir.string();
  const RunOutcome d = run(dist);
  EXPECT_EQ(d.exit_code, 0);
  EXPECT_LE(std::stod(d.report.get("distance.sup_sigma")), 1e-12);
  EXPECT_EQ(d.report.get("distance.sigma_nonnegative"), "true");
}

TEST(Run, ErrorsMapToExitCodes) {
  const fs::path dir = scratch("codes");
  RunConfig bad_domain = parse_config_text(
      "command = solve-cylinder\ndomain = AxisymSlab\nextents = 2\nresolution = 16, 16\n");
  bad_domain.out = dir.string();
  const RunOutcome a = run(bad_domain);
  EXPECT_EQ(a.exit_code, 1);
  EXPECT_TRUE(slurp(a.report_path).ends_with("status=fail\n"));

  RunConfig starved = parse_config_text(
      "command = solve-plane\ndomain = AxisymSlab\nextents = 2\ny_max = 2\nresolution = 16, 16\npoly = 0, 1\n"
      "knot = 0, 0, 1\nmax_iterations = 2\npolish = false\n");
  starved.out = dir.string();
  EXPECT_EQ(run(starved).exit_code, 2);

  RunConfig solve = parse_config_text(
      "command = solve-plane\ndomain = AxisymSlab\nextents = 2\ny_max = 2\nresolution = 16, 16\npoly = 1\n");
  solve.out = dir.string();
  ASSERT_EQ(run(solve).exit_code, 0);
  const std::string u = (dir / "u.ebf").string();
  RunConfig strict = parse_config_text("command = distance\ninput = " + u + "\ninput2 = " + u +
                                       "\nsubharmonic_threshold = -1\n");
  strict.out = dir.string();
  const RunOutcome c = run(strict);
  EXPECT_EQ(c.exit_code, 3);
  EXPECT_EQ(c.report.get("distance.subharmonic"), "false");
}

TEST(Run, OverridesAreValidatedAndEchoed) {
  const RunConfig base = parse_config_text("command = ode\ntol = 1e-10\n");
  const RunConfig c = apply_overrides(base, {{"tol", "1e-11"}, {"out", "x"}});
  EXPECT_EQ(c.tol, 1e-11);
  EXPECT_EQ(c.out, "x");
  EXPECT_THROW(apply_overrides(base, {{"tol", "1"}}), InputError);
}
