#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "wcons/cli.hpp"
#include "wcons/io.hpp"
#include "wcons/plot.hpp"

using namespace wcons;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() /
                   ("wcons_io_" + std::to_string(::getpid()) + "_" + tag + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ParseError parse_error_of(const std::string& doc) {
  try {
    io::parse_scenario(doc);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError(ErrorCode::IoError, "", "");
}

json dirac_pair(const fs::path& out) {
  return json{{"schema_version", 1},
              {"name", "pair"},
              {"agents", json::array({json{{"kind", "empirical"}, {"atoms", {0.0}}, {"weights", {1.0}}},
                                      json{{"kind", "empirical"}, {"atoms", {2.0}}, {"weights", {1.0}}}})},
              {"topology", json{{"kind", "static"}, {"edges", json::array({json::array({0, 1})})}}},
              {"grid", json{{"size", 256}}},
              {"output_dir", out.string()}};
}

json path3_gaussian(const fs::path& out) {
  return json{{"schema_version", 1},
              {"name", "path3"},
              {"agents", json::array({json{{"kind", "gaussian"}, {"mean", 0}, {"variance", 1}},
                                      json{{"kind", "gaussian"}, {"mean", 2}, {"variance", 4}},
                                      json{{"kind", "gaussian"}, {"mean", 4}, {"variance", 9}}})},
              {"topology", json{{"kind", "static"}, {"edges", json::array({{0, 1}, {1, 2}})}}},
              {"representation", "gaussian_closed_form"},
              {"stop", json{{"epsilon", 1e-10}, {"max_steps", 200}}},
              {"output_dir", out.string()}};
}

std::vector<std::string> csv_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::stringstream ss(csv);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  return lines;
}

/// Minimal XML structure check: every element closes in order.
bool well_formed_xml(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = doc.find('<', pos)) != std::string::npos) {
    const auto end = doc.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = doc.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

std::vector<std::pair<double, double>> polyline_points(const std::string& svg) {
  const std::regex re("<polyline[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  std::vector<std::pair<double, double>> pts;
  std::stringstream ss(m[1].str());
  for (std::string tok; ss >> tok;) {
    const auto comma = tok.find(',');
    pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return pts;
}

struct Cli {
  int code;
  std::string out, err;
};

Cli cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("parse_scenario examples") {
  const auto dir = fresh_dir("parse");
  const auto s = io::parse_scenario(dirac_pair(dir).dump());
  CHECK(s.agents.size() == 2);
  CHECK(s.schedule.size() == 2);
  CHECK(s.config.grid == GridSpec{256});
  CHECK(s.name == "pair");

  SUBCASE("negative variance is a forwarded validation error") {
    auto doc = path3_gaussian(dir);
    doc["agents"][1]["variance"] = -1;
    const auto e = parse_error_of(doc.dump());
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(e.cause() == ErrorCode::NonPositiveVariance);
    CHECK(e.where() == "agents[1]");
  }

  SUBCASE("random schedule without a seed") {
    auto doc = dirac_pair(dir);
    doc["topology"] = json{{"kind", "random"}, {"base_edges", json::array({{0, 1}})}, {"probability", 0.5}};
    const auto e = parse_error_of(doc.dump());
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(e.where() == "topology.seed");

    doc["seed"] = 7;
    const auto seeded = io::parse_scenario(doc.dump());
    CHECK(std::get<RandomSchedule>(seeded.schedule.kind()).seed == 7);
    doc["topology"]["seed"] = 11;
    CHECK(std::get<RandomSchedule>(io::parse_scenario(doc.dump()).schedule.kind()).seed == 11);
  }

  SUBCASE("unknown fields are errors") {
    auto doc = dirac_pair(dir);
    doc["colour"] = "blue";
    auto e = parse_error_of(doc.dump());
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(e.where() == "$.colour");

    doc = dirac_pair(dir);
    doc["agents"][0]["mass"] = 1;
    e = parse_error_of(doc.dump());
    CHECK(e.where() == "agents[0].mass");
  }

  SUBCASE("syntax errors report the line") {
    const auto e = parse_error_of("{\n  \"schema_version\": 1,\n  \"name\": \"x\",,\n}");
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.where() == "line 3");
  }

  SUBCASE("required fields and versions") {
    auto doc = dirac_pair(dir);
    doc.erase("schema_version");
    CHECK(parse_error_of(doc.dump()).where() == "$.schema_version");
    doc["schema_version"] = 2;
    CHECK(parse_error_of(doc.dump()).code() == ErrorCode::SchemaError);
    doc = dirac_pair(dir);
    doc.erase("topology");
    CHECK(parse_error_of(doc.dump()).where() == "$.topology");
    doc = dirac_pair(dir);
    doc["agents"] = json::array();
    CHECK(parse_error_of(doc.dump()).cause() == ErrorCode::SizeMismatch);
  }

  SUBCASE("agent count must agree across sections") {
    auto doc = dirac_pair(dir);
    doc["topology"]["n"] = 3;
    const auto e = parse_error_of(doc.dump());
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(e.cause() == ErrorCode::SizeMismatch);
    doc["topology"]["n"] = 2;
    doc["topology"]["edges"] = json::array({{0, 5}});
    CHECK(parse_error_of(doc.dump()).cause() == ErrorCode::OutOfDomain);
  }

  SUBCASE("closed form requires Gaussian agents") {
    auto doc = dirac_pair(dir);
    doc["representation"] = "gaussian_closed_form";
    CHECK(parse_error_of(doc.dump()).cause() == ErrorCode::RepresentationMismatch);
  }

  SUBCASE("weight schemes") {
    auto doc = dirac_pair(dir);
    doc["weights"] = json{{"scheme", "lazy_uniform"}, {"self_weight", 0.25}};
    CHECK(std::get<LazyUniformScheme>(io::parse_scenario(doc.dump()).config.scheme).self_weight == 0.25);
    doc["weights"] = json{{"scheme", "explicit"}, {"matrices", json::array({json::array({{0.75, 0.25}, {0.25, 0.75}})})}};
    const auto ex = std::get<ExplicitScheme>(io::parse_scenario(doc.dump()).config.scheme);
    REQUIRE(ex.matrices.size() == 1);
    CHECK(ex.matrices[0](0, 1) == 0.25);
    doc["weights"] = json{{"scheme", "explicit"}, {"matrices", json::array({json::array({{0.5, 0.6}, {0.25, 0.75}})})}};
    CHECK(parse_error_of(doc.dump()).cause() == ErrorCode::WeightSumMismatch);
  }

  SUBCASE("file references resolve against the scenario directory") {
    io::write_atomic(dir / "agent.json", R"({"kind":"gaussian","mean":3,"variance":2})");
    auto doc = dirac_pair(dir);
    doc["agents"][1] = json{{"kind", "file"}, {"path", "agent.json"}};
    io::write_atomic(dir / "scenario.json", doc.dump());
    const auto loaded = io::load_scenario(dir / "scenario.json");
    CHECK(std::get<Gaussian1D>(loaded.agents[1]).mean == 3.0);
    doc["agents"][1]["path"] = "missing.json";
    io::write_atomic(dir / "scenario.json", doc.dump());
    try {
      io::load_scenario(dir / "scenario.json");
      FAIL("expected a schema error");
    } catch (const ParseError& e) {
      CHECK(e.code() == ErrorCode::SchemaError);
      CHECK(e.where() == "agents[1].path");
    }
  }
}

TEST_CASE("scenario hash normalizes formatting") {
  const auto dir = fresh_dir("hash");
  const auto doc = dirac_pair(dir);
  const auto compact = io::parse_scenario(doc.dump());
  const auto pretty = io::parse_scenario(doc.dump(4));
  CHECK(compact.scenario_hash == pretty.scenario_hash);
  auto changed = doc;
  changed["grid"]["size"] = 512;
  CHECK(io::parse_scenario(changed.dump()).scenario_hash != compact.scenario_hash);
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("measure records round trip exactly") {
  test::Rng rng(31);
  const GridSpec g{64, 1e-4};
  for (int rep = 0; rep < 30; ++rep) {
    // Validation sorts empirical atoms, so compare against the canonical form.
    const Measure m =
        validate(rep % 3 == 2 ? Measure(to_quantile(test::random_measure(rng), g)) : test::random_measure(rng));
    const auto back = io::measure_from_json(json::parse(io::measure_to_json(m).dump()));
    CHECK(back.index() == m.index());
    CHECK(io::measure_to_json(back) == io::measure_to_json(m));
  }
  for (int rep = 0; rep < 1000; ++rep) {
    const double x = std::ldexp(test::uniform(rng, -1, 1), static_cast<int>(test::uniform_index(rng, 0, 200)) - 100);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("measure argument shorthands") {
  CHECK(std::get<Gaussian1D>(io::parse_measure_spec("N(0,1)")).variance == 1.0);
  CHECK(std::get<EmpiricalMeasure>(io::parse_measure_spec("delta(2.5)")).atoms == std::vector<double>{2.5});
  CHECK(std::get<Gaussian1D>(io::parse_measure_spec(R"({"kind":"gaussian","mean":1,"variance":2})")).mean == 1.0);
  CHECK_THROWS_AS(io::parse_measure_spec("N(0)"), ParseError);
  CHECK_THROWS_AS(io::parse_measure_spec("Q(1,2)"), ParseError);
  CHECK_THROWS_AS(io::parse_measure_spec("N(0,x)"), ParseError);
}

TEST_CASE("run_scenario examples") {
  SUBCASE("two Diracs meet after one step") {
    const auto dir = fresh_dir("pair");
    const auto art = io::run_scenario(io::parse_scenario(dirac_pair(dir).dump()));
    const auto lines = csv_lines(io::read_file(art.diagnostics_csv));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "t,lyapunov,diameter,dist_to_limit");
    CHECK(lines[1] == "0,4,2,1");
    CHECK(lines[2].rfind("1,0,0,", 0) == 0);
    CHECK(art.terminated_by == Termination::Converged);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "final_measures.json"));
  }

  SUBCASE("identical agents give a single row") {
    const auto dir = fresh_dir("same");
    auto doc = path3_gaussian(dir);
    for (auto& a : doc["agents"]) a = json{{"kind", "gaussian"}, {"mean", 1}, {"variance", 2}};
    const auto art = io::run_scenario(io::parse_scenario(doc.dump()));
    CHECK(csv_lines(io::read_file(art.diagnostics_csv)).size() == 2);
    CHECK(art.steps == 0);
    CHECK(art.plots.empty());
  }

  SUBCASE("disconnected network hits the step limit") {
    const auto dir = fresh_dir("split");
    auto doc = dirac_pair(dir);
    doc["agents"].push_back(json{{"kind", "empirical"}, {"atoms", {10.0}}});
    doc["agents"].push_back(json{{"kind", "empirical"}, {"atoms", {14.0}}});
    doc["topology"]["edges"] = json::array({{0, 1}, {2, 3}});
    doc["stop"] = json{{"max_steps", 25}};
    const auto art = io::run_scenario(io::parse_scenario(doc.dump()));
    const auto manifest = json::parse(io::read_file(art.manifest));
    CHECK(manifest["terminated_by"] == "max_steps");
    CHECK(manifest["steps"] == 25);
    CHECK(manifest["version"] == std::string(io::version()));
    CHECK(manifest.size() == 4);
  }
}

TEST_CASE("runs are deterministic and persist faithfully") {
  const auto dir = fresh_dir("det");
  auto doc = dirac_pair(dir);
  doc["agents"] = json::array({json{{"kind", "gaussian"}, {"mean", -1}, {"variance", 0.5}},
                               json{{"kind", "empirical"}, {"atoms", {0.0, 3.0}}, {"weights", {0.25, 0.75}}},
                               json{{"kind", "gaussian"}, {"mean", 4}, {"variance", 2}}});
  doc["topology"] = json{{"kind", "random"}, {"base_edges", json::array({{0, 1}, {1, 2}, {0, 2}})},
                         {"probability", 0.6}, {"seed", 99}};
  doc["stop"] = json{{"epsilon", 1e-6}, {"max_steps", 300}};
  const auto s = io::parse_scenario(doc.dump());
  const auto first = io::run_scenario(s);
  const auto csv1 = io::read_file(first.diagnostics_csv);
  const auto man1 = io::read_file(first.manifest);
  const auto again = io::run_scenario(io::parse_scenario(doc.dump()));
  CHECK(io::read_file(again.diagnostics_csv) == csv1);
  CHECK(io::read_file(again.manifest) == man1);

  CHECK(csv_lines(csv1).size() == first.steps + 2);  // header plus one row per step, t = 0 included

  const auto finals = io::final_measures_from_json(json::parse(io::read_file(first.final_measures)));
  REQUIRE(finals.size() == 3);
  for (std::size_t i = 0; i < finals.size(); ++i) {
    const auto& mem = std::get<QuantileMeasure>(first.result.final_state.agents[i]);
    CHECK(quantile_distance(std::get<QuantileMeasure>(finals[i]), mem, WassersteinOrder{2.0}) == 0.0);
  }
}

TEST_CASE("WCONS_OUT_DIR overrides the output directory") {
  const auto dir = fresh_dir("scenario_out");
  const auto env = fresh_dir("env_out");
  ::setenv("WCONS_OUT_DIR", env.c_str(), 1);
  const auto art = io::run_scenario(io::parse_scenario(dirac_pair(dir).dump()));
  ::unsetenv("WCONS_OUT_DIR");
  CHECK(art.diagnostics_csv.parent_path() == env);
  CHECK(fs::exists(env / "diagnostics.csv"));
  CHECK_FALSE(fs::exists(dir / "diagnostics.csv"));
}

TEST_CASE("emit_plot") {
  SUBCASE("geometric decay is a straight line on a log axis") {
    std::string csv = "t,lyapunov,diameter,dist_to_limit\n";
    for (int t = 0; t <= 40; ++t) {
      const double d = std::pow(2.0 / 3.0, t);
      csv += std::to_string(t) + "," + io::format_double(d * d) + "," + io::format_double(d) + ",\n";
    }
    const auto svg = emit_plot(csv, PlotKind::Diameter, true);
    CHECK(well_formed_xml(svg));
    CHECK(svg.find("step t") != std::string::npos);
    CHECK(svg.find(">diameter<") != std::string::npos);
    const auto pts = polyline_points(svg);
    REQUIRE(pts.size() == 41);
    const auto [xa, ya] = pts.front();
    const auto [xb, yb] = pts.back();
    for (const auto& [x, y] : pts) {
      const double on_line = ya + (yb - ya) * (x - xa) / (xb - xa);
      CHECK(std::abs(y - on_line) <= 0.01);
    }
  }

  SUBCASE("empty input") {
    CHECK_THROWS_WITH_AS(emit_plot("", PlotKind::Diameter, false), doctest::Contains("EmptyData"), Error);
    CHECK_THROWS_WITH_AS(emit_plot("t,lyapunov,diameter,dist_to_limit\n", PlotKind::Lyapunov, true),
                         doctest::Contains("EmptyData"), Error);
    CHECK_THROWS_AS(emit_plot("a,b\n1,2\n", PlotKind::Diameter, false), ParseError);
  }

  SUBCASE("real path-3 run produces well-formed SVG files") {
    const auto dir = fresh_dir("plot");
    const auto art = io::run_scenario(io::parse_scenario(path3_gaussian(dir).dump()));
    REQUIRE(art.plots.size() == 2);
    for (const auto& p : art.plots) {
      REQUIRE(fs::exists(p));
      const auto svg = io::read_file(p);
      CHECK(svg.rfind("<?xml", 0) == 0);
      CHECK(well_formed_xml(svg));
    }
    const auto linear = emit_plot(io::read_file(art.diagnostics_csv), PlotKind::Lyapunov, false);
    CHECK(well_formed_xml(linear));
  }
}

TEST_CASE("cli_dispatch") {
  const auto dir = fresh_dir("cli");
  const auto scenario = dir / "pair.json";
  io::write_atomic(scenario, dirac_pair(dir / "out").dump(2));

  const auto d = cli({"distance", "N(0,1)", "N(2,4)", "--p", "2"});
  CHECK(d.code == kExitOk);
  CHECK(d.out == "2.23606797750\n");

  CHECK(cli({"distance", "delta(0)", "delta(3)", "--grid", "64"}).out == "3.00000000000\n");
  CHECK(cli({"validate", scenario.string()}).code == kExitOk);

  const auto unknown = cli({"frobnicate"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"distance", "N(0,1)"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);

  CHECK(cli({"distance", "N(0,-1)", "N(0,1)"}).code == kExitValidation);
  auto bad = dirac_pair(dir);
  bad["extra"] = 1;
  io::write_atomic(dir / "bad.json", bad.dump());
  CHECK(cli({"validate", (dir / "bad.json").string()}).code == kExitValidation);
  CHECK(cli({"validate", (dir / "absent.json").string()}).code == kExitRuntime);

  const auto b = cli({"barycenter", "N(0,1)", "N(2,9)", "--weights", "0.5,0.5"});
  CHECK(b.code == kExitOk);
  CHECK(b.out == "gaussian mean=1.00000000000 variance=4.00000000000\n");
  CHECK(cli({"barycenter", "N(0,1)", "N(2,9)", "--weights", "0.5,0.6"}).code == kExitValidation);
  const auto bj = cli({"barycenter", "delta(0)", "delta(4)", "--weights", "0.25,0.75", "--json"});
  CHECK(json::parse(bj.out) == json{{"kind", "empirical"}, {"atoms", {3.0}}, {"weights", {1.0}}});

  const auto sp = cli({"spectral", scenario.string()});
  CHECK(sp.code == kExitOk);
  CHECK(sp.out.find("second_largest: 0.00000000000") != std::string::npos);

  const auto r = cli({"run", scenario.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("terminated_by: converged") != std::string::npos);
  const auto csv = (dir / "out" / "diagnostics.csv").string();
  const auto svg = (dir / "plot.svg").string();
  CHECK(cli({"plot", csv, "--kind", "lyapunov", "--log", "-o", svg}).code == kExitOk);
  CHECK(well_formed_xml(io::read_file(svg)));
  CHECK(cli({"plot", csv, "--kind", "entropy"}).code == kExitValidation);
}
