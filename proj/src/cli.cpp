#include "wcons/cli.hpp"

#include <cstdio>
#include <filesystem>

#include "CLI11.hpp"
#include "wcons/barycenter.hpp"
#include "wcons/io.hpp"
#include "wcons/plot.hpp"

namespace wcons {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.12g", v);
  return buf;
}

bool is_validation(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFinite:
    case ErrorCode::NegativeWeight:
    case ErrorCode::WeightSumMismatch:
    case ErrorCode::NonPositiveVariance:
    case ErrorCode::NonMonotoneQuantiles:
    case ErrorCode::OutOfDomain:
    case ErrorCode::GridMismatch:
    case ErrorCode::LengthMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotSPD:
    case ErrorCode::UnsupportedOrder:
    case ErrorCode::SizeMismatch:
    case ErrorCode::SparsityMismatch:
    case ErrorCode::RepresentationMismatch:
    case ErrorCode::SyntaxError:
    case ErrorCode::SchemaError:
    case ErrorCode::ValidationError: return true;
    default: return false;
  }
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

struct Options {
  std::string scenario;
  std::string measure_a, measure_b;
  std::vector<std::string> measures;
  std::vector<double> weights;
  double p = 2.0;
  std::size_t grid = 4096;
  double clip = GridSpec::kDefaultClip;
  bool json = false;
  std::size_t window = 0;
  std::size_t horizon = 1000;
  std::string csv, kind = "diameter", output;
  bool log_scale = false;
};

int cmd_run(const Options& o, std::ostream& out) {
  const auto s = io::load_scenario(o.scenario);
  const auto art = io::run_scenario(s);
  out << "scenario: " << s.name << "\n"
      << "terminated_by: " << to_string(art.terminated_by) << "\n"
      << "steps: " << art.steps << "\n"
      << "final_diameter: " << num(art.result.diagnostics.back().diameter) << "\n"
      << "diagnostics: " << art.diagnostics_csv.string() << "\n"
      << "final_measures: " << art.final_measures.string() << "\n"
      << "manifest: " << art.manifest.string() << "\n";
  for (const auto& p : art.plots) out << "plot: " << p.string() << "\n";
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto s = io::load_scenario(o.scenario);
  out << "ok: " << s.name << " (" << s.agents.size() << " agents, hash " << s.scenario_hash << ")\n";
  return kExitOk;
}

int cmd_distance(const Options& o, std::ostream& out) {
  const auto a = io::parse_measure_spec(o.measure_a);
  const auto b = io::parse_measure_spec(o.measure_b);
  out << num(wasserstein(a, b, WassersteinOrder{o.p}, GridSpec{o.grid, o.clip})) << "\n";
  return kExitOk;
}

int cmd_barycenter(const Options& o, std::ostream& out) {
  std::vector<Measure> ms;
  for (const auto& spec : o.measures) ms.push_back(io::parse_measure_spec(spec));
  const auto w = o.weights.empty() ? WeightVector::uniform(ms.size()) : WeightVector(o.weights);
  if (w.size() != ms.size()) throw Error(ErrorCode::LengthMismatch, "one weight per measure is required");
  const WassersteinOrder ord{o.p};
  const GridSpec grid{o.grid, o.clip};

  const auto all = [&](auto tag) {
    using T = decltype(tag);
    return std::all_of(ms.begin(), ms.end(), [](const Measure& m) { return std::holds_alternative<T>(m); });
  };
  Measure bar;
  if (all(Gaussian1D{}) && ord.is_two()) {
    std::vector<Gaussian1D> gs;
    for (const auto& m : ms) gs.push_back(std::get<Gaussian1D>(m));
    bar = barycenter_gaussian_1d(gs, w);
  } else if (all(EmpiricalMeasure{})) {
    std::vector<EmpiricalMeasure> es;
    for (const auto& m : ms) es.push_back(std::get<EmpiricalMeasure>(m));
    bar = barycenter_empirical_1d(es, w, grid, ord);
  } else {
    std::vector<QuantileMeasure> qs;
    for (const auto& m : ms) qs.push_back(to_quantile(m, grid));
    bar = barycenter_quantile(qs, w, ord);
  }

  if (o.json) {
    out << io::measure_to_json(bar).dump() << "\n";
    return kExitOk;
  }
  if (const auto* g = std::get_if<Gaussian1D>(&bar)) {
    out << "gaussian mean=" << num(g->mean) << " variance=" << num(g->variance) << "\n";
  } else if (const auto* e = std::get_if<EmpiricalMeasure>(&bar)) {
    out << "empirical atoms=" << e->atoms.size() << "\n";
    for (std::size_t i = 0; i < e->atoms.size(); ++i) out << num(e->atoms[i]) << " " << num(e->weights[i]) << "\n";
  } else {
    out << "quantile grid=" << grid.size() << "\n";
    for (int k = 1; k <= 9; ++k) {
      const double u = k / 10.0;
      out << num(u) << " " << num(quantile(bar, u)) << "\n";
    }
  }
  return kExitOk;
}

void print_report(std::ostream& out, const std::string& label, const NetworkSnapshot& g, const WeightMatrix& w) {
  const auto r = spectral_report(w);
  out << label << ": connected=" << yes_no(is_connected(g)) << " doubly_stochastic=" << yes_no(r.is_doubly_stochastic)
      << "\n  moduli:";
  for (double m : r.moduli) out << " " << num(m);
  out << "\n  second_largest: " << num(r.second_largest) << "\n";
}

int cmd_spectral(const Options& o, std::ostream& out) {
  const auto s = io::load_scenario(o.scenario);
  const auto& cfg = s.config;
  std::size_t window = 1;
  out << "agents: " << s.agents.size() << "\n";
  if (const auto* st = std::get_if<StaticSchedule>(&s.schedule.kind())) {
    out << "schedule: static\n";
    print_report(out, "snapshot 0", st->graph, weights_at(cfg, st->graph, 0));
  } else if (const auto* per = std::get_if<PeriodicSchedule>(&s.schedule.kind())) {
    out << "schedule: periodic (period " << per->snapshots.size() << ")\n";
    for (std::size_t k = 0; k < per->snapshots.size(); ++k)
      print_report(out, "snapshot " + std::to_string(k), per->snapshots[k], weights_at(cfg, per->snapshots[k], k));
    window = per->snapshots.size();
  } else {
    const auto& rnd = std::get<RandomSchedule>(s.schedule.kind());
    out << "schedule: random (probability " << num(rnd.probability) << ", seed " << rnd.seed << ")\n";
    print_report(out, "base graph", rnd.base, weights_at(cfg, rnd.base, 0));
    window = 10;
  }
  if (o.window > 0) window = o.window;
  out << "jointly_connected(window=" << window << ", horizon=" << o.horizon
      << "): " << yes_no(jointly_connected(s.schedule, window, o.horizon)) << "\n";
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const auto svg = emit_plot(io::read_file(o.csv), parse_plot_kind(o.kind), o.log_scale);
  if (o.output.empty()) {
    out << svg;
  } else {
    io::write_atomic(o.output, svg);
    out << "wrote " << o.output << "\n";
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus of probability measures in Wasserstein space", "wcons"};
  app.set_version_flag("--version", std::string(io::version()));
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run a scenario and write diagnostics, final measures and manifest");
  run->add_option("scenario", o.scenario, "Scenario JSON file")->required();

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario without running it");
  validate->add_option("scenario", o.scenario, "Scenario JSON file")->required();

  auto* distance = app.add_subcommand("distance", "Wasserstein distance between two measures");
  distance->add_option("measureA", o.measure_a, "File, inline JSON, N(mean,var) or delta(x)")->required();
  distance->add_option("measureB", o.measure_b, "File, inline JSON, N(mean,var) or delta(x)")->required();
  distance->add_option("--p", o.p, "Order p >= 2")->capture_default_str();
  distance->add_option("--grid", o.grid, "Quantile grid size")->capture_default_str();
  distance->add_option("--clip", o.clip, "Quantile domain clip")->capture_default_str();

  auto* bary = app.add_subcommand("barycenter", "Weighted Wasserstein barycenter of measures");
  bary->add_option("measures", o.measures, "Measures (file, inline JSON, N(mean,var) or delta(x))")->required();
  bary->add_option("--weights", o.weights, "Comma-separated weights summing to 1 (default uniform)")
      ->delimiter(',');
  bary->add_option("--p", o.p, "Order p >= 2")->capture_default_str();
  bary->add_option("--grid", o.grid, "Quantile grid size")->capture_default_str();
  bary->add_option("--clip", o.clip, "Quantile domain clip")->capture_default_str();
  bary->add_flag("--json", o.json, "Print the barycenter as a JSON measure record");

  auto* spectral = app.add_subcommand("spectral", "Spectral report of the scenario's weight matrices");
  spectral->add_option("scenario", o.scenario, "Scenario JSON file")->required();
  spectral->add_option("--window", o.window, "Joint connectivity window (default from schedule)");
  spectral->add_option("--horizon", o.horizon, "Joint connectivity horizon")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "SVG chart of a diagnostics CSV column");
  plot->add_option("csv", o.csv, "diagnostics.csv")->required();
  plot->add_option("--kind", o.kind, "diameter or lyapunov")->capture_default_str();
  plot->add_flag("--log", o.log_scale, "Logarithmic y axis");
  plot->add_option("-o,--output", o.output, "Write the SVG here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << io::version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
    if (distance->parsed()) return cmd_distance(o, out);
    if (bary->parsed()) return cmd_barycenter(o, out);
    if (spectral->parsed()) return cmd_spectral(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
  } catch (const ParseError& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << (is_validation(e.code()) ? "invalid: " : "error: ") << e.what() << "\n";
    return is_validation(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args, out, err);
}

}  // namespace wcons
