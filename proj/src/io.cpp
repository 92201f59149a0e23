#include "wcons/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <system_error>

#include "wcons/plot.hpp"

namespace wcons::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view version() noexcept { return WCONS_VERSION; }

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& detail) {
  throw ParseError(ErrorCode::SchemaError, where, detail, ErrorCode::SchemaError);
}

[[noreturn]] void invalid(const std::string& where, const Error& e) {
  throw ParseError(ErrorCode::ValidationError, where, e.what(), e.code());
}

std::string join(const std::string& path, std::string_view key) { return path + "." + std::string(key); }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& object_at(const json& j, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  return j;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) schema(join(path, key), "unknown field");
}

const json& require(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) schema(join(path, key), "missing required field");
  return *it;
}

const json* optional_field(const json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

std::uint64_t unsigned_int(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) schema(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) schema(path, "expected a boolean");
  return j.get<bool>();
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array");
  return j;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array_at(j, path).size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

GridSpec grid_from_json(const json& j, const std::string& path) {
  only_keys(object_at(j, path), path, {"size", "clip"});
  const auto size = unsigned_int(require(j, path, "size"), join(path, "size"));
  double clip = GridSpec::kDefaultClip;
  if (const auto* c = optional_field(j, "clip")) clip = number(*c, join(path, "clip"));
  try {
    return GridSpec(static_cast<std::size_t>(size), clip);
  } catch (const Error& e) {
    invalid(path, e);
  }
}

json grid_to_json(const GridSpec& g) { return json{{"size", g.size()}, {"clip", g.clip()}}; }

json parse_document(std::string_view text_in) {
  try {
    return json::parse(text_in);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text_in.size());
    const auto line = 1 + std::count(text_in.begin(), text_in.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(ErrorCode::SyntaxError, "line " + std::to_string(line), e.what(), ErrorCode::SyntaxError);
  }
}

std::vector<Edge> edges_from_json(const json& j, const std::string& path) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < array_at(j, path).size(); ++i) {
    const auto p = index(path, i);
    const auto& e = array_at(j[i], p);
    if (e.size() != 2) schema(p, "an edge is a pair of agent indices");
    out.emplace_back(unsigned_int(e[0], index(p, 0)), unsigned_int(e[1], index(p, 1)));
  }
  return out;
}

NetworkSnapshot snapshot(std::size_t n, const std::vector<Edge>& edges, const std::string& path) {
  try {
    return NetworkSnapshot(n, edges);
  } catch (const Error& e) {
    invalid(path, e);
  }
}

TopologySchedule topology_from_json(const json& j, std::size_t n, std::optional<std::uint64_t> top_seed) {
  const std::string path = "topology";
  object_at(j, path);
  const auto kind = text(require(j, path, "kind"), join(path, "kind"));
  if (const auto* declared = optional_field(j, "n")) {
    if (unsigned_int(*declared, join(path, "n")) != n)
      invalid(join(path, "n"), Error(ErrorCode::SizeMismatch, "topology size differs from the number of agents"));
  }
  if (kind == "static") {
    only_keys(j, path, {"kind", "n", "edges"});
    const auto p = join(path, "edges");
    return TopologySchedule(StaticSchedule{snapshot(n, edges_from_json(require(j, path, "edges"), p), p)});
  }
  if (kind == "periodic") {
    only_keys(j, path, {"kind", "n", "snapshots"});
    const auto p = join(path, "snapshots");
    const auto& snaps = array_at(require(j, path, "snapshots"), p);
    if (snaps.empty()) schema(p, "a periodic schedule needs at least one snapshot");
    std::vector<NetworkSnapshot> out;
    for (std::size_t i = 0; i < snaps.size(); ++i)
      out.push_back(snapshot(n, edges_from_json(snaps[i], index(p, i)), index(p, i)));
    return TopologySchedule(PeriodicSchedule{std::move(out)});
  }
  if (kind == "random") {
    only_keys(j, path, {"kind", "n", "base_edges", "probability", "seed"});
    const auto p = join(path, "base_edges");
    auto base = snapshot(n, edges_from_json(require(j, path, "base_edges"), p), p);
    const double prob = number(require(j, path, "probability"), join(path, "probability"));
    if (!(prob >= 0.0 && prob <= 1.0))
      invalid(join(path, "probability"), Error(ErrorCode::OutOfDomain, "probability must lie in [0,1]"));
    std::optional<std::uint64_t> seed = top_seed;
    if (const auto* s = optional_field(j, "seed")) seed = unsigned_int(*s, join(path, "seed"));
    if (!seed) schema(join(path, "seed"), "a random schedule needs a seed");
    return TopologySchedule(RandomSchedule{std::move(base), prob, *seed});
  }
  schema(join(path, "kind"), "expected static, periodic or random");
}

WeightScheme scheme_from_json(const json& j, std::size_t n) {
  const std::string path = "weights";
  object_at(j, path);
  const auto scheme = text(require(j, path, "scheme"), join(path, "scheme"));
  if (scheme == "metropolis") {
    only_keys(j, path, {"scheme"});
    return MetropolisScheme{};
  }
  if (scheme == "lazy_uniform") {
    only_keys(j, path, {"scheme", "self_weight"});
    LazyUniformScheme s;
    if (const auto* w = optional_field(j, "self_weight")) s.self_weight = number(*w, join(path, "self_weight"));
    if (!(s.self_weight > 0.0 && s.self_weight < 1.0))
      invalid(join(path, "self_weight"), Error(ErrorCode::OutOfDomain, "self weight must lie in (0,1)"));
    return s;
  }
  if (scheme == "explicit") {
    only_keys(j, path, {"scheme", "matrices"});
    const auto p = join(path, "matrices");
    const auto& ms = array_at(require(j, path, "matrices"), p);
    if (ms.empty()) schema(p, "at least one matrix is required");
    ExplicitScheme out;
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto pm = index(p, m);
      const auto& rows = array_at(ms[m], pm);
      if (rows.size() != n) invalid(pm, Error(ErrorCode::SizeMismatch, "matrix must have one row per agent"));
      std::vector<double> flat;
      for (std::size_t r = 0; r < n; ++r) {
        const auto row = numbers(rows[r], index(pm, r));
        if (row.size() != n) invalid(index(pm, r), Error(ErrorCode::SizeMismatch, "row length differs from agent count"));
        flat.insert(flat.end(), row.begin(), row.end());
      }
      try {
        out.matrices.emplace_back(n, std::move(flat));
      } catch (const Error& e) {
        invalid(pm, e);
      }
    }
    return out;
  }
  schema(join(path, "scheme"), "expected metropolis, lazy_uniform or explicit");
}

Representation representation_from_json(const json& j) {
  const auto r = text(j, "representation");
  if (r == "quantile") return Representation::Quantile;
  if (r == "gaussian_closed_form") return Representation::GaussianClosedForm;
  schema("representation", "expected quantile or gaussian_closed_form");
}

/// Agent spec resolved to a measure record (file references are inlined).
json resolve_agent(const json& j, const std::string& path, const fs::path& base_dir) {
  object_at(j, path);
  const auto* kind = optional_field(j, "kind");
  if (!kind || !kind->is_string() || kind->get<std::string>() != "file") return j;
  only_keys(j, path, {"kind", "path"});
  const fs::path rel = text(require(j, path, "path"), join(path, "path"));
  const fs::path file = rel.is_absolute() ? rel : base_dir / rel;
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) schema(join(path, "path"), "referenced file does not exist: " + file.string());
  const auto content = read_file(file);
  json inner;
  try {
    inner = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ParseError(ErrorCode::SyntaxError, file.string(), e.what(), ErrorCode::SyntaxError);
  }
  if (inner.is_object() && inner.contains("kind") && inner["kind"] == "file")
    schema(join(path, "path"), "file references cannot be nested");
  return inner;
}

}  // namespace

json measure_to_json(const Measure& m) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EmpiricalMeasure>) {
          return json{{"kind", "empirical"}, {"atoms", x.atoms}, {"weights", x.weights}};
        } else if constexpr (std::is_same_v<T, Gaussian1D>) {
          return json{{"kind", "gaussian"}, {"mean", x.mean}, {"variance", x.variance}};
        } else {
          return json{{"kind", "quantile"}, {"grid", grid_to_json(x.grid)}, {"values", x.values}};
        }
      },
      m);
}

Measure measure_from_json(const json& j, const std::string& path) {
  object_at(j, path);
  const auto kind = text(require(j, path, "kind"), join(path, "kind"));
  Measure m;
  if (kind == "empirical") {
    only_keys(j, path, {"kind", "atoms", "weights"});
    EmpiricalMeasure e;
    e.atoms = numbers(require(j, path, "atoms"), join(path, "atoms"));
    if (const auto* w = optional_field(j, "weights")) {
      e.weights = numbers(*w, join(path, "weights"));
    } else if (!e.atoms.empty()) {
      e.weights.assign(e.atoms.size(), 1.0 / static_cast<double>(e.atoms.size()));
    }
    m = std::move(e);
  } else if (kind == "gaussian") {
    only_keys(j, path, {"kind", "mean", "variance"});
    m = Gaussian1D{number(require(j, path, "mean"), join(path, "mean")),
                   number(require(j, path, "variance"), join(path, "variance"))};
  } else if (kind == "quantile") {
    only_keys(j, path, {"kind", "grid", "values"});
    const auto g = grid_from_json(require(j, path, "grid"), join(path, "grid"));
    m = QuantileMeasure{g, numbers(require(j, path, "values"), join(path, "values"))};
  } else {
    schema(join(path, "kind"), "expected empirical, gaussian or quantile");
  }
  try {
    return validate(std::move(m));
  } catch (const Error& e) {
    invalid(path, e);
  }
}

Measure parse_measure_spec(std::string_view spec) {
  const std::string s(spec);
  std::error_code ec;
  if (!s.empty() && s.front() != '{' && fs::is_regular_file(s, ec))
    return measure_from_json(parse_document(read_file(s)), s);
  if (!s.empty() && s.front() == '{') return measure_from_json(parse_document(s), "measure");

  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw ParseError(ErrorCode::SchemaError, s, "expected a file, inline JSON, N(mean,variance) or delta(x)",
                     ErrorCode::SchemaError);
  const std::string head = s.substr(0, open);
  std::vector<double> args;
  std::stringstream body(s.substr(open + 1, s.size() - open - 2));
  for (std::string item; std::getline(body, item, ',');) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    while (end && *end == ' ') ++end;
    if (item.empty() || end == item.c_str() || *end != '\0')
      throw ParseError(ErrorCode::SchemaError, s, "malformed number '" + item + "'", ErrorCode::SchemaError);
    args.push_back(v);
  }
  try {
    if ((head == "N" || head == "gaussian") && args.size() == 2) return validate(Gaussian1D{args[0], args[1]});
    if ((head == "delta" || head == "dirac") && args.size() == 1) return validate(dirac(args[0]));
  } catch (const Error& e) {
    invalid(s, e);
  }
  throw ParseError(ErrorCode::SchemaError, s, "expected N(mean,variance) or delta(x)", ErrorCode::SchemaError);
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  return ss.str();
}

void write_atomic(const fs::path& file, std::string_view content) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move result into " + file.string());
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(std::string_view text_in, const fs::path& base_dir) {
  json doc = parse_document(text_in);
  const std::string root = "$";
  if (!doc.is_object()) schema(root, "a scenario is a JSON object");
  only_keys(doc, root,
            {"schema_version", "name", "seed", "agents", "topology", "weights", "order", "grid", "stop",
             "representation", "output_dir", "plots"});

  const auto ver = unsigned_int(require(doc, root, "schema_version"), "schema_version");
  if (ver != static_cast<std::uint64_t>(kSchemaVersion))
    schema("schema_version", "unsupported version " + std::to_string(ver));

  const auto name = text(require(doc, root, "name"), "name");
  if (name.empty()) schema("name", "must not be empty");

  std::optional<std::uint64_t> seed;
  if (const auto* s = optional_field(doc, "seed")) seed = unsigned_int(*s, "seed");

  require(doc, root, "agents");
  auto& agents_json = doc["agents"];
  array_at(agents_json, "agents");
  if (agents_json.empty()) invalid("agents", Error(ErrorCode::SizeMismatch, "at least one agent is required"));
  std::vector<Measure> agents;
  for (std::size_t i = 0; i < agents_json.size(); ++i) {
    const auto p = index("agents", i);
    agents_json[i] = resolve_agent(agents_json[i], p, base_dir);
    agents.push_back(measure_from_json(agents_json[i], p));
  }
  const std::size_t n = agents.size();

  auto schedule = topology_from_json(require(doc, root, "topology"), n, seed);

  ConsensusConfig cfg;
  if (const auto* w = optional_field(doc, "weights")) cfg.scheme = scheme_from_json(*w, n);
  if (const auto* o = optional_field(doc, "order")) {
    try {
      cfg.order = WassersteinOrder{number(*o, "order")};
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      invalid("order", e);
    }
  }
  if (const auto* g = optional_field(doc, "grid")) cfg.grid = grid_from_json(*g, "grid");
  if (const auto* s = optional_field(doc, "stop")) {
    only_keys(object_at(*s, "stop"), "stop", {"epsilon", "max_steps"});
    if (const auto* e = optional_field(*s, "epsilon")) cfg.stop.epsilon = number(*e, "stop.epsilon");
    if (const auto* m = optional_field(*s, "max_steps"))
      cfg.stop.max_steps = static_cast<std::size_t>(unsigned_int(*m, "stop.max_steps"));
    if (!(cfg.stop.epsilon > 0.0) || cfg.stop.max_steps == 0)
      invalid("stop", Error(ErrorCode::OutOfDomain, "stop rule needs epsilon > 0 and max_steps >= 1"));
  }
  if (const auto* r = optional_field(doc, "representation")) cfg.representation = representation_from_json(*r);

  fs::path out_dir = fs::path("out") / name;
  if (const auto* o = optional_field(doc, "output_dir")) out_dir = text(*o, "output_dir");
  bool plots = true;
  if (const auto* p = optional_field(doc, "plots")) plots = boolean(*p, "plots");

  try {
    prepare(ConsensusState{0, agents}, cfg);
  } catch (const Error& e) {
    invalid("representation", e);
  }

  return Scenario{.name = name,
                  .agents = std::move(agents),
                  .schedule = std::move(schedule),
                  .config = cfg,
                  .output_dir = out_dir,
                  .seed = seed,
                  .plots = plots,
                  .scenario_hash = fnv1a_hex(doc.dump())};
}

Scenario load_scenario(const fs::path& file) { return parse_scenario(read_file(file), file.parent_path()); }

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records) {
  std::string out = "t,lyapunov,diameter,dist_to_limit\n";
  for (const auto& r : records) {
    out += std::to_string(r.t);
    out += ',';
    out += format_double(r.lyapunov);
    out += ',';
    out += format_double(r.diameter);
    out += ',';
    if (r.dist_to_limit) out += format_double(*r.dist_to_limit);
    out += '\n';
  }
  return out;
}

json final_measures_json(const ConsensusState& state) {
  json list = json::array();
  for (std::size_t i = 0; i < state.agents.size(); ++i)
    list.push_back(json{{"agent", i}, {"measure", measure_to_json(state.agents[i])}});
  return list;
}

std::vector<Measure> final_measures_from_json(const json& j) {
  const std::string root = "final_measures";
  array_at(j, root);
  std::vector<Measure> out(j.size());
  std::vector<bool> seen(j.size(), false);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = index(root, i);
    only_keys(object_at(j[i], p), p, {"agent", "measure"});
    const auto agent = unsigned_int(require(j[i], p, "agent"), join(p, "agent"));
    if (agent >= j.size() || seen[agent]) schema(join(p, "agent"), "agent indices must be a permutation of 0..n-1");
    seen[agent] = true;
    out[agent] = measure_from_json(require(j[i], p, "measure"), join(p, "measure"));
  }
  return out;
}

fs::path resolve_output_dir(const Scenario& s) {
  if (const char* env = std::getenv("WCONS_OUT_DIR"); env && *env) return fs::path(env);
  return s.output_dir;
}

RunArtifacts run_scenario(const Scenario& s) {
  const fs::path dir = resolve_output_dir(s);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());

  RunArtifacts art;
  art.result = run(ConsensusState{0, s.agents}, s.schedule, s.config);
  art.scenario_hash = s.scenario_hash;
  art.terminated_by = art.result.terminated_by;
  art.steps = art.result.final_state.t;

  const auto csv = diagnostics_csv(art.result.diagnostics);
  art.diagnostics_csv = dir / "diagnostics.csv";
  write_atomic(art.diagnostics_csv, csv);

  art.final_measures = dir / "final_measures.json";
  write_atomic(art.final_measures, final_measures_json(art.result.final_state).dump(2) + "\n");

  const json manifest{{"scenario_hash", art.scenario_hash},
                      {"version", std::string(version())},
                      {"terminated_by", std::string(to_string(art.terminated_by))},
                      {"steps", art.steps}};
  art.manifest = dir / "manifest.json";
  write_atomic(art.manifest, manifest.dump(2) + "\n");

  if (s.plots) {
    for (const auto kind : {PlotKind::Diameter, PlotKind::Lyapunov}) {
      std::string svg;
      try {
        svg = emit_plot(csv, kind, true);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyData) throw;
        continue;  // nothing positive to draw on a log axis
      }
      const auto file = dir / (std::string(to_string(kind)) + ".svg");
      write_atomic(file, svg);
      art.plots.push_back(file);
    }
  }
  return art;
}

}  // namespace wcons::io
