#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpm/core_data.hpp"
#include "gpm/econometrics.hpp"
#include "gpm/error.hpp"
#include "gpm/evo_game.hpp"
#include "gpm/index_builder.hpp"
#include "gpm/io.hpp"
#include "gpm/parzen_fusion.hpp"
#include "gpm/svg.hpp"
#include "gpm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kFooter = R"(Exit codes:
  0  success
  2  usage    bad flags, unknown subcommand
  3  io       file missing, unreadable or unwritable
  4  schema   missing column or JSON key
  5  parse    malformed number or document
  6  balance  unbalanced or duplicated panel cells
  7  domain   argument outside its valid range
  8  rank     collinear or absorbed regressors
  9  numeric  non-finite result or integration blow-up
Errors are printed to stderr as one line:
  error: code=<n> kind=<kind> msg="<text>"
Environment:
  GPM_THREADS  cap on worker threads (default: hardware concurrency))";

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    gpm::io::write_file_atomic(path, content);
}

json parse_json_file(const std::string& path) {
  const auto text = gpm::io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    gpm::fail(gpm::ErrorKind::parse, path + ": " + e.what());
  }
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
  try {
    return gpm::io::parse_double_list(s);
  } catch (const gpm::Error& e) {
    gpm::fail(gpm::ErrorKind::usage, std::string(what) + ": " + e.what());
  }
}

// --------------------------------------------------------------------------
// index

struct IndexOpts {
  std::string panel, system, method = "topsis", out, weights_out;
  bool per_year = false;
};

int run_index(const IndexOpts& o) {
  const auto system = gpm::index::parse_indicator_system(parse_json_file(o.system));
  std::vector<std::string> vars;
  for (const auto& ind : system) vars.push_back(ind.variable);
  const auto panel = gpm::load_panel_csv(o.panel, vars);
  const auto res = gpm::index::build_index(
      panel, system, gpm::index::parse_aggregation(o.method),
      o.per_year ? gpm::index::Pooling::per_year : gpm::index::Pooling::pooled);
  emit(o.out, gpm::index::format_scores_csv(res));
  std::string sidecar = o.weights_out;
  if (sidecar.empty() && !o.out.empty() && o.out != "-")
    sidecar = fs::path(o.out).replace_extension(".weights.json").string();
  if (!sidecar.empty()) gpm::io::write_file_atomic(sidecar, json_text(gpm::index::weights_json(res)));

  std::fprintf(stderr, "%-40s %10s\n", "indicator", "weight");
  for (std::size_t j = 0; j < res.indicator_names.size(); ++j)
    std::fprintf(stderr, "%-40s %10.6f\n", res.indicator_names[j].c_str(),
                 res.weights(static_cast<Eigen::Index>(j)));
  std::fprintf(stderr, "%zu scores (%s)\n", static_cast<std::size_t>(res.scores.size()),
               gpm::index::to_string(res.method));
  return 0;
}

// --------------------------------------------------------------------------
// regress

struct RegressOpts {
  std::string model, panel, dep, vars, weights, threshold_var, focal, moderator, out;
  double trim = 0.05;
  std::optional<int> from, to;
  bool time_effects = false;
  bool no_entity_effects = false;
};

gpm::SpatialWeights load_weights(const std::string& path,
                                 const std::vector<std::string>& order) {
  const auto text = gpm::io::read_file(path);
  const auto first = text.substr(0, text.find('\n'));
  if (first.rfind("entity,lat,lon", 0) == 0 || first.rfind("\xEF\xBB\xBF" "entity,lat,lon", 0) == 0) {
    const auto coords = gpm::parse_coords_csv(text, path);
    const auto pts = gpm::align_coords(coords, order);
    return gpm::build_inverse_distance_weights(pts, true);
  }
  return gpm::parse_weights_matrix_csv(text, order);
}

json threshold_json(const gpm::econ::ThresholdFit& f) {
  json j = gpm::econ::to_json(f.table);
  j["threshold_var"] = f.threshold_var;
  j["focal_var"] = f.focal_var;
  j["gamma"] = f.gamma;
  j["trim_bounds"] = {f.trim_lower, f.trim_upper};
  j["regimes"] = {{{"regime", "low"}, {"coef", f.low_coef}, {"se", f.low_se}},
                  {{"regime", "high"}, {"coef", f.high_coef}, {"se", f.high_se}}};
  json prof = json::array();
  for (std::size_t i = 0; i < f.grid.size(); ++i)
    prof.push_back({{"gamma", f.grid[i]},
                    {"ssr", std::isfinite(f.ssr_profile[i]) ? json(f.ssr_profile[i]) : json(nullptr)}});
  j["ssr_profile"] = prof;
  j["diagnostics"] = f.diagnostics;
  return j;
}

int run_regress(const RegressOpts& o) {
  std::vector<std::string> need{o.dep};
  const auto vars = split_names(o.vars);
  need.insert(need.end(), vars.begin(), vars.end());
  if (!o.threshold_var.empty()) need.push_back(o.threshold_var);
  if (!o.moderator.empty()) need.push_back(o.moderator);
  if (!o.focal.empty()) need.push_back(o.focal);
  std::sort(need.begin(), need.end());
  need.erase(std::unique(need.begin(), need.end()), need.end());
  auto panel = gpm::load_panel_csv(o.panel, need);
  if (o.from || o.to)
    panel = panel.filter_years(o.from.value_or(panel.years().front()),
                               o.to.value_or(panel.years().back()));

  gpm::econ::RegressionSpec spec;
  spec.dependent = o.dep;
  spec.regressors = vars;
  spec.entity_effects = !o.no_entity_effects;
  spec.time_effects = o.time_effects;

  json out;
  std::string text;
  if (o.model == "fe") {
    const auto t = gpm::econ::fit_fixed_effects(panel, spec);
    out = gpm::econ::to_json(t);
    text = gpm::econ::format_table(t);
  } else if (o.model == "sdm") {
    if (o.weights.empty()) gpm::fail(gpm::ErrorKind::usage, "sdm needs --weights");
    spec.entity_effects = true;
    spec.time_effects = true;
    const auto W = load_weights(o.weights, panel.entities());
    const auto f = gpm::econ::fit_sdm(panel, spec, W);
    out = gpm::econ::to_json(f.table);
    out["rho"] = f.rho;
    out["sigma2"] = f.sigma2;
    out["log_likelihood"] = f.log_likelihood;
    out["rho_bounds"] = {f.rho_lower, f.rho_upper};
    text = gpm::econ::format_table(f.table);
  } else if (o.model == "threshold") {
    if (o.threshold_var.empty() || o.focal.empty())
      gpm::fail(gpm::ErrorKind::usage, "threshold needs --threshold-var and --focal");
    const auto f = gpm::econ::fit_threshold(panel, spec, o.threshold_var, o.focal, o.trim);
    out = threshold_json(f);
    text = gpm::econ::format_table(f.table);
    for (const auto& d : f.diagnostics) text += "note: " + d + "\n";
  } else if (o.model == "moderation") {
    if (o.focal.empty() || o.moderator.empty())
      gpm::fail(gpm::ErrorKind::usage, "moderation needs --focal and --moderator");
    std::vector<std::string> controls;
    for (const auto& v : vars)
      if (v != o.focal && v != o.moderator) controls.push_back(v);
    const auto f = gpm::econ::fit_moderation(panel, o.dep, o.focal, o.moderator, controls);
    out["interaction"] = f.interaction_name;
    out["models"] = {gpm::econ::to_json(f.direct), gpm::econ::to_json(f.moderator),
                     gpm::econ::to_json(f.full)};
    text = gpm::econ::format_table(f.direct) + "\n" + gpm::econ::format_table(f.moderator) +
           "\n" + gpm::econ::format_table(f.full);
  } else {
    gpm::fail(gpm::ErrorKind::usage, "unknown model '" + o.model + "'");
  }
  out["sample"] = {{"from", panel.years().front()}, {"to", panel.years().back()},
                   {"entities", panel.n_entities()}};
  emit(o.out, json_text(out));
  std::fputs(text.c_str(), o.out.empty() || o.out == "-" ? stderr : stdout);
  return 0;
}

// --------------------------------------------------------------------------
// fusion

struct FusionOpts {
  std::string model, observe, out;
  std::size_t cls = 0;
};

int run_fusion_run(const FusionOpts& o) {
  const auto model = gpm::fusion::model_from_json(parse_json_file(o.model));
  const auto obs = parse_numbers(o.observe, "--observe");
  const auto d = gpm::fusion::fuse_decision(model, obs);
  emit(o.out, json_text(gpm::fusion::to_json(d, model)));
  std::fprintf(stderr, "%-32s %14s %14s\n", "class", "log density", "score");
  for (std::size_t i = 0; i < model.classes.size(); ++i)
    std::fprintf(stderr, "%-32s %14.6g %14.6g%s\n", model.classes[i].label.c_str(),
                 d.log_densities[i], d.scores[i], d.chosen == i ? "  <- chosen" : "");
  if (d.no_evidence()) std::fputs("no evidence: every score is zero\n", stderr);
  return 0;
}

int run_fusion_train(const FusionOpts& o) {
  const auto model = gpm::fusion::model_from_json(parse_json_file(o.model));
  const auto obs = parse_numbers(o.observe, "--observe");
  const auto next = gpm::fusion::append_observation(model, o.cls, obs);
  emit(o.out.empty() ? o.model : o.out, json_text(gpm::fusion::to_json(next)));
  std::fprintf(stderr, "class %zu (%s): %zu samples\n", o.cls,
               next.classes[o.cls].label.c_str(), next.classes[o.cls].samples.size());
  return 0;
}

// --------------------------------------------------------------------------
// game

struct GameOpts {
  std::string params, init = "0,0,0", out, svg;
  double t_end = 50, dt = 0.01;
  std::size_t sample_every = 1;
};

gpm::game::GamePayoffParams load_params(const std::string& path) {
  if (path.empty()) return gpm::game::default_preset();
  return gpm::game::params_from_json(parse_json_file(path));
}

int run_game_equilibria(const GameOpts& o) {
  const auto p = load_params(o.params);
  const auto set = gpm::game::find_equilibria(p);
  json j;
  j["params"] = gpm::game::to_json(p);
  j["equilibria"] = json::array();
  for (const auto& r : set.points) j["equilibria"].push_back(gpm::game::to_json(r));
  j["diagnostics"] = set.diagnostics;
  json mism = json::array();
  for (const auto& v : gpm::game::sign_violations(p))
    mism.push_back({{"vertex", "E" + std::to_string(v.vertex + 1)},
                    {"slot", v.slot + 1},
                    {"tabulated_sign", v.expected > 0 ? "+" : "-"},
                    {"value", v.value}});
  j["tabulated_sign_mismatches"] = mism;
  emit(o.out, json_text(j));

  std::fprintf(stderr, "%-6s %-26s %-38s %s\n", "name", "point", "eigenvalues", "stability");
  for (const auto& r : set.points) {
    char pt[64], ev[96];
    std::snprintf(pt, sizeof pt, "(%.4g, %.4g, %.4g)", r.point.x, r.point.y, r.point.z);
    std::snprintf(ev, sizeof ev, "%.4g, %.4g, %.4g", r.eigenvalues[0].real(),
                  r.eigenvalues[1].real(), r.eigenvalues[2].real());
    std::fprintf(stderr, "%-6s %-26s %-38s %s\n", r.name.c_str(), pt, ev,
                 gpm::game::to_string(r.classification));
  }
  for (const auto& d : set.diagnostics) std::fprintf(stderr, "note: %s\n", d.c_str());
  return 0;
}

int run_game_simulate(const GameOpts& o) {
  const auto p = load_params(o.params);
  const auto v = parse_numbers(o.init, "--init");
  if (v.size() != 3) gpm::fail(gpm::ErrorKind::usage, "--init needs three values x,y,z");
  const auto tr = gpm::game::simulate_trajectory({v[0], v[1], v[2]}, p, o.t_end, o.dt,
                                                 o.sample_every);
  emit(o.out, gpm::game::format_trajectory_csv(tr));
  if (!o.svg.empty()) gpm::io::write_file_atomic(o.svg, gpm::svg::emit_svg(tr));
  const auto& last = tr.states.back();
  std::fprintf(stderr, "%zu samples, t = %g: x = %.6f  y = %.6f  z = %.6f\n", tr.t.size(),
               tr.t.back(), last.x, last.y, last.z);
  return 0;
}

// --------------------------------------------------------------------------
// demo

int run_demo(std::uint64_t seed, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) gpm::fail(gpm::ErrorKind::io, "cannot create directory: " + dir);
  const fs::path d(dir);
  const auto panel = gpm::synth::demo_panel(seed);
  gpm::write_panel_csv(panel, d / "panel.csv");
  gpm::io::write_file_atomic(d / "dei_system.json",
                             json_text(gpm::index::to_json(gpm::synth::demo_dei_system())));
  gpm::io::write_file_atomic(d / "rural_system.json",
                             json_text(gpm::index::to_json(gpm::synth::demo_rural_system())));
  gpm::io::write_file_atomic(d / "coords.csv",
                             gpm::format_coords_csv(gpm::hainan_preset_coords()));
  gpm::io::write_file_atomic(d / "preset.json",
                             json_text(gpm::game::to_json(gpm::game::default_preset())));
  gpm::io::write_file_atomic(d / "fusion_model.json",
                             json_text(gpm::fusion::to_json(gpm::synth::demo_fusion_model(panel))));
  std::fprintf(stderr, "wrote demo inputs to %s (%zu entities x %zu years, seed %llu)\n",
               dir.c_str(), panel.n_entities(), panel.n_years(),
               static_cast<unsigned long long>(seed));
  return 0;
}

void print_error(int code, const char* kind, const std::string& msg) {
  std::string esc;
  for (char c : msg) {
    if (c == '"' || c == '\\') esc += '\\';
    if (c == '\n') {
      esc += "\\n";
      continue;
    }
    esc += c;
  }
  std::fprintf(stderr, "error: code=%d kind=%s msg=\"%s\"\n", code, kind, esc.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gpm: composite indices, panel econometrics, Parzen decision fusion "
               "and a three-player evolutionary game"};
  app.footer(kFooter);
  app.require_subcommand(1);

  IndexOpts io;
  auto* index = app.add_subcommand("index", "Composite index construction");
  index->require_subcommand(1);
  auto* build = index->add_subcommand("build", "Entropy-weighted composite score per entity-year");
  build->add_option("--panel", io.panel, "Long-format panel CSV (entity,year,...)")->required();
  build->add_option("--system", io.system, "Indicator system JSON")->required();
  build->add_option("--method", io.method, "topsis | weighted-sum")->capture_default_str();
  build->add_flag("--per-year", io.per_year, "Normalize and weight each year separately");
  build->add_option("--out", io.out, "Score CSV (entity,year,score); '-' for stdout");
  build->add_option("--weights-out", io.weights_out,
                    "Weights sidecar JSON (default: --out with extension .weights.json)");

  RegressOpts ro;
  auto* regress = app.add_subcommand("regress", "Panel regressions");
  regress->require_subcommand(1);
  auto add_regress = [&](const char* name, const char* desc) {
    auto* c = regress->add_subcommand(name, desc);
    c->add_option("--panel", ro.panel, "Panel CSV")->required();
    c->add_option("--dep", ro.dep, "Dependent variable")->required();
    c->add_option("--vars", ro.vars, "Comma-separated regressors")->required();
    c->add_option("--from", ro.from, "First year of the sample");
    c->add_option("--to", ro.to, "Last year of the sample");
    c->add_option("--out", ro.out, "Coefficient JSON ('-' or omitted: stdout)");
    c->callback([&ro, name] { ro.model = name; });
    return c;
  };
  auto* fe = add_regress("fe", "Fixed-effects within estimator");
  fe->add_flag("--time-effects", ro.time_effects, "Add year effects");
  fe->add_flag("--no-entity-effects", ro.no_entity_effects, "Drop entity effects");
  auto* sdm = add_regress("sdm", "Two-way fixed-effects spatial Durbin model (ML)");
  sdm->add_option("--weights", ro.weights,
                  "Coordinates CSV (entity,lat,lon) or square weights matrix CSV")->required();
  auto* thr = add_regress("threshold", "Single-threshold fixed-effects regression");
  thr->add_option("--threshold-var", ro.threshold_var, "Threshold variable")->required();
  thr->add_option("--focal", ro.focal, "Regressor whose slope switches")->required();
  thr->add_option("--trim", ro.trim, "Trim fraction at each end of the grid")->capture_default_str();
  auto* mod = add_regress("moderation", "Three-model moderation analysis (pooled OLS)");
  mod->add_option("--focal", ro.focal, "Focal regressor")->required();
  mod->add_option("--moderator", ro.moderator, "Moderator variable")->required();

  FusionOpts fo;
  auto* fusion = app.add_subcommand("fusion", "Parzen-window expected-utility decision fusion");
  fusion->require_subcommand(1);
  auto* frun = fusion->add_subcommand("run", "Score an observation against every class");
  frun->add_option("--model", fo.model, "Model JSON")->required();
  frun->add_option("--observe", fo.observe, "Comma-separated feature values")->required();
  frun->add_option("--out", fo.out, "Decision JSON ('-' or omitted: stdout)");
  auto* ftrain = fusion->add_subcommand("train", "Append a labelled observation to a class");
  ftrain->add_option("--model", fo.model, "Model JSON")->required();
  ftrain->add_option("--class", fo.cls, "Class index (0-based)")->required();
  ftrain->add_option("--observe", fo.observe, "Comma-separated feature values")->required();
  ftrain->add_option("--out", fo.out, "Updated model JSON (default: overwrite --model)");

  GameOpts go;
  auto* game = app.add_subcommand("game", "Three-player evolutionary game");
  game->require_subcommand(1);
  auto* geq = game->add_subcommand("equilibria", "Enumerate equilibria and classify stability");
  geq->add_option("--params", go.params, "Payoff parameter JSON (default: built-in preset)");
  geq->add_option("--out", go.out, "Report JSON ('-' or omitted: stdout)");
  auto* gsim = game->add_subcommand("simulate", "Integrate the replicator dynamics (RK4)");
  gsim->add_option("--params", go.params, "Payoff parameter JSON (default: built-in preset)");
  gsim->add_option("--init", go.init, "Initial state x,y,z")->capture_default_str();
  gsim->add_option("--t-end", go.t_end, "End time")->capture_default_str();
  gsim->add_option("--dt", go.dt, "Step size")->capture_default_str();
  gsim->add_option("--sample-every", go.sample_every, "Record every k-th step")->capture_default_str();
  gsim->add_option("--out", go.out, "Trajectory CSV t,x,y,z ('-' or omitted: stdout)");
  gsim->add_option("--svg", go.svg, "Also write an SVG line chart");

  std::uint64_t seed = 20240601;
  std::string out_dir = "demo";
  auto* demo = app.add_subcommand("demo", "Synthetic Hainan-style inputs");
  demo->require_subcommand(1);
  auto* gen = demo->add_subcommand("generate", "Write a seeded demo panel and configs");
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(gpm::exit_code(gpm::ErrorKind::usage), "usage", e.what());
    return gpm::exit_code(gpm::ErrorKind::usage);
  }

  try {
    if (*build) return run_index(io);
    if (*regress) return run_regress(ro);
    if (*frun) return run_fusion_run(fo);
    if (*ftrain) return run_fusion_train(fo);
    if (*geq) return run_game_equilibria(go);
    if (*gsim) return run_game_simulate(go);
    if (*gen) return run_demo(seed, out_dir);
  } catch (const gpm::Error& e) {
    print_error(gpm::exit_code(e.kind()), gpm::to_string(e.kind()), e.what());
    return gpm::exit_code(e.kind());
  } catch (const std::exception& e) {
    print_error(gpm::exit_code(gpm::ErrorKind::numeric), "internal", e.what());
    return gpm::exit_code(gpm::ErrorKind::numeric);
  }
  print_error(2, "usage", "no subcommand");
  return 2;
}
