// qubitlab: simulate TLS-limited qubit stability data and run the analysis
// pipelines (curve fits, readout metrics, stability reports, junction aging,
// sigma-T1 benchmarking) from the command line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlab/qlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFitFailure = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string units = "si";
  bool override_admission = false;
};

bool lab_units(const CommonArgs& args) { return args.units == "lab"; }

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw qlab::IoError("cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw qlab::ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qlab::IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Manifest skeleton with the deterministic core filled in; outputs appended
// by the command handlers before writing.
qlab::RunManifest start_manifest(const std::string& command,
                                 const CommonArgs& args,
                                 const std::vector<fs::path>& inputs,
                                 std::uint64_t seed) {
  qlab::RunManifest m;
  m.command_line = command;
  m.seed = seed;
  if (!args.config_path.empty())
    m.config_digest = qlab::file_digest(args.config_path);
  for (const auto& p : inputs) m.input_digests[p.string()] = qlab::file_digest(p);
  qlab::finalize_manifest(m);
  return m;
}

void finish_manifest(qlab::RunManifest& m, const fs::path& out_dir) {
  std::sort(m.outputs.begin(), m.outputs.end());
  qlab::write_manifest(out_dir / "manifest.json", m);
}

std::uint64_t pick_seed(const CommonArgs& args, const json& config) {
  if (args.seed) return *args.seed;
  if (config.contains("seed")) return config["seed"].get<std::uint64_t>();
  return 0;  // deterministic default, recorded in the manifest
}

json fit_report_json(const std::string& model, const qlab::FitResult& fit,
                     const std::string& manifest_id) {
  json j;
  j["model"] = model;
  j["params"] = fit.params;
  j["stderr"] = fit.stderrs;
  j["residual_norm"] = fit.residual_norm;
  j["converged"] = fit.converged;
  j["flags"] = fit.flags;
  j["manifest"] = manifest_id;
  return j;
}

// ---------------------------------------------------------------------------
// simulate subcommands
// ---------------------------------------------------------------------------

int run_simulate_tls(const CommonArgs& args) {
  const json config = load_json(args.config_path);
  const std::uint64_t seed = pick_seed(args, config);
  auto manifest = start_manifest("simulate tls", args, {}, seed);

  const auto ecfg = qlab::ensemble_config_from_json(config);
  const double duration = config.value("duration_s", 95.0 * 3600.0);
  const double cadence = config.value("cadence_s", 60.0);
  const auto ensemble = qlab::sample_ensemble(ecfg, seed, 0);
  const auto trace = qlab::simulate_t1_trace(ensemble, duration, cadence, seed, 1);

  const fs::path out(args.out_dir);
  qlab::io::write_trace_csv(out / "t1_trace.csv", trace,
                            {{"manifest", manifest.manifest_id}});
  json logged = config;
  logged["seed"] = seed;
  logged["manifest"] = manifest.manifest_id;
  write_json_file(out / "generator_config.json", logged);
  manifest.outputs = {"t1_trace.csv", "generator_config.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_simulate_decay(const CommonArgs& args) {
  const json config = load_json(args.config_path);
  const std::uint64_t seed = pick_seed(args, config);
  auto manifest = start_manifest("simulate decay", args, {}, seed);

  const double t1 = config.at("t1_s").get<double>();
  const auto noise = qlab::noise_config_from_json(
      config.value("noise", json::object()), false);
  std::vector<double> grid;
  if (config.contains("delays_s"))
    grid = config.at("delays_s").get<std::vector<double>>();
  else
    grid = qlab::default_decay_grid(t1, config.value("n_points", 40));
  const auto curve = qlab::simulate_decay_curve(
      t1, grid, noise, seed, config.value("amplitude", 1.0),
      config.value("offset", 0.0));

  const fs::path out(args.out_dir);
  qlab::io::write_decay_csv(out / "decay.csv", curve,
                            {{"manifest", manifest.manifest_id}});
  json logged = config;
  logged["seed"] = seed;
  logged["manifest"] = manifest.manifest_id;
  write_json_file(out / "generator_config.json", logged);
  manifest.outputs = {"decay.csv", "generator_config.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_simulate_ramsey(const CommonArgs& args) {
  const json config = load_json(args.config_path);
  const std::uint64_t seed = pick_seed(args, config);
  auto manifest = start_manifest("simulate ramsey", args, {}, seed);

  const double t2 = config.at("t2_star_s").get<double>();
  const double detuning = config.at("detuning_hz").get<double>();
  const double t_max = config.at("t_max_s").get<double>();
  const double offset = config.value("qubit_offset_hz", 0.0);
  const auto noise = qlab::noise_config_from_json(
      config.value("noise", json::object()), false);
  std::optional<std::vector<double>> grid;
  if (config.contains("f_nyquist_hz"))
    grid = qlab::default_ramsey_grid(t_max,
                                     config.at("f_nyquist_hz").get<double>());
  const auto curve = qlab::simulate_ramsey_curve(
      offset, t2, detuning, t_max, noise, seed, grid ? &*grid : nullptr,
      config.value("amplitude", 0.5), config.value("offset", 0.5));

  const fs::path out(args.out_dir);
  qlab::io::write_ramsey_csv(out / "ramsey.csv", curve,
                             {{"manifest", manifest.manifest_id}});
  json logged = config;
  logged["seed"] = seed;
  logged["manifest"] = manifest.manifest_id;
  write_json_file(out / "generator_config.json", logged);
  manifest.outputs = {"ramsey.csv", "ramsey.csv.json", "generator_config.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_simulate_singleshot(const CommonArgs& args) {
  const json config = load_json(args.config_path);
  const std::uint64_t seed = pick_seed(args, config);
  auto manifest = start_manifest("simulate singleshot", args, {}, seed);

  const double separation = config.at("separation").get<double>();
  const auto noise = qlab::noise_config_from_json(
      config.value("noise", json::object()), true);
  const auto shots = qlab::simulate_single_shot(separation, noise, seed);

  const fs::path out(args.out_dir);
  qlab::io::write_iq_csv(out / "iq.csv", shots,
                         {{"manifest", manifest.manifest_id}});
  json logged = config;
  logged["seed"] = seed;
  logged["manifest"] = manifest.manifest_id;
  write_json_file(out / "generator_config.json", logged);
  manifest.outputs = {"iq.csv", "generator_config.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze subcommands
// ---------------------------------------------------------------------------

int run_fit_decay(const CommonArgs& args, const std::string& input) {
  auto manifest = start_manifest("analyze fit-decay", args, {input}, 0);
  const auto curve = qlab::io::read_decay_csv(input);
  const auto fit = qlab::fit_exponential(curve);
  json report = fit_report_json("exponential_decay", fit, manifest.manifest_id);
  if (lab_units(args) && fit.params.count("t1"))
    report["params_lab"]["t1_us"] = fit.params.at("t1") * 1e6;
  const fs::path out(args.out_dir);
  write_json_file(out / "fit_decay.json", report);
  manifest.outputs = {"fit_decay.json"};
  finish_manifest(manifest, out);
  return fit.converged ? kExitOk : kExitFitFailure;
}

int run_fit_ramsey(const CommonArgs& args, const std::string& input) {
  std::vector<fs::path> inputs{input, qlab::io::ramsey_sidecar_path(input)};
  auto manifest = start_manifest("analyze fit-ramsey", args, inputs, 0);
  const auto curve = qlab::io::read_ramsey_csv(input);
  const auto fit = qlab::fit_damped_cosine(curve);
  json report = fit_report_json("damped_cosine", fit, manifest.manifest_id);
  report["set_detuning_hz"] = curve.set_detuning_hz;
  if (fit.params.count("f_ramsey"))
    report["f_offset_hz"] =
        std::fabs(fit.params.at("f_ramsey")) - curve.set_detuning_hz;
  if (lab_units(args)) {
    report["params_lab"]["t2_star_us"] = fit.params.at("t2_star") * 1e6;
    report["params_lab"]["f_ramsey_khz"] = fit.params.at("f_ramsey") * 1e-3;
  }
  const fs::path out(args.out_dir);
  write_json_file(out / "fit_ramsey.json", report);
  manifest.outputs = {"fit_ramsey.json"};
  finish_manifest(manifest, out);
  return fit.converged ? kExitOk : kExitFitFailure;
}

// QDA decision boundary traced column by column for the scatter plot.
qlab::plot::Series trace_boundary(const qlab::DiscriminationModel& model,
                                  double x_lo, double x_hi, double y_lo,
                                  double y_hi) {
  qlab::plot::Series boundary;
  boundary.label = "decision boundary";
  boundary.color = "#222222";
  boundary.points_only = true;
  const int nx = 160, ny = 200;
  for (int ix = 0; ix <= nx; ++ix) {
    const double x = x_lo + (x_hi - x_lo) * ix / nx;
    double prev_diff = 0.0;
    bool have_prev = false;
    for (int iy = 0; iy <= ny; ++iy) {
      const double y = y_lo + (y_hi - y_lo) * iy / ny;
      const double diff =
          qlab::qda_score(model, 1, x, y) - qlab::qda_score(model, 0, x, y);
      if (have_prev && ((prev_diff < 0) != (diff < 0))) {
        // sign change: bisect
        double a = y_lo + (y_hi - y_lo) * (iy - 1) / ny, b = y;
        for (int it = 0; it < 20; ++it) {
          const double mid = 0.5 * (a + b);
          const double d = qlab::qda_score(model, 1, x, mid) -
                           qlab::qda_score(model, 0, x, mid);
          if ((d < 0) == (prev_diff < 0))
            a = mid;
          else
            b = mid;
        }
        boundary.x.push_back(x);
        boundary.y.push_back(0.5 * (a + b));
      }
      prev_diff = diff;
      have_prev = true;
    }
  }
  return boundary;
}

int run_readout(const CommonArgs& args, const std::string& input,
                double f_q_hz) {
  auto manifest = start_manifest("analyze readout", args, {input}, 0);
  const auto shots = qlab::io::read_iq_csv(input);
  const auto model = qlab::fit_discriminator(shots);
  const auto metrics = qlab::compute_metrics(shots, model, f_q_hz);

  json report;
  report["delta_m"] = metrics.delta_m;
  report["fidelity"] = metrics.fidelity;
  report["confusion"] = {
      {metrics.confusion[0][0], metrics.confusion[0][1]},
      {metrics.confusion[1][0], metrics.confusion[1][1]}};
  report["t_eff_mk"] = std::isnan(metrics.t_eff_k)
                           ? json(nullptr)
                           : json(metrics.t_eff_k * 1e3);
  report["f_q_hz"] = f_q_hz;
  report["flags"] = metrics.flags;
  report["manifest"] = manifest.manifest_id;

  const fs::path out(args.out_dir);
  write_json_file(out / "readout.json", report);

  qlab::plot::Figure fig;
  fig.title = "single-shot IQ";
  fig.x_label = "I (arb.)";
  fig.y_label = "Q (arb.)";
  qlab::plot::Series s0{"prepared |0>", {}, {}, "#1f6fb4", true};
  qlab::plot::Series s1{"prepared |1>", {}, {}, "#d62728", true};
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& shot : shots.shots) {
    auto& s = shot.prepared_state == 0 ? s0 : s1;
    s.x.push_back(shot.i);
    s.y.push_back(shot.q);
    x_lo = std::min(x_lo, shot.i);
    x_hi = std::max(x_hi, shot.i);
    y_lo = std::min(y_lo, shot.q);
    y_hi = std::max(y_hi, shot.q);
  }
  fig.series = {s0, s1, trace_boundary(model, x_lo, x_hi, y_lo, y_hi)};
  qlab::plot::write_svg(out / "iq_scatter.svg", {fig});

  manifest.outputs = {"readout.json", "iq_scatter.svg", "iq_scatter.svg.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_stability(const CommonArgs& args, const std::string& traces_dir) {
  std::vector<fs::path> inputs;
  if (!fs::is_directory(traces_dir))
    throw qlab::IoError("not a directory: " + traces_dir);
  for (const auto& entry : fs::directory_iterator(traces_dir))
    if (entry.path().extension() == ".csv") inputs.push_back(entry.path());
  std::sort(inputs.begin(), inputs.end());
  auto manifest = start_manifest("analyze stability", args, inputs, 0);

  struct TraceAnalysis {
    std::string label;
    qlab::TimeTrace trace;
    json summary;
    std::optional<qlab::DropoutReport> dropout;
  };
  std::vector<TraceAnalysis> analyses;
  json skipped = json::array();
  for (const auto& path : inputs) {
    TraceAnalysis ta;
    ta.label = path.stem().string();
    try {
      ta.trace = qlab::io::read_trace_csv(path);
    } catch (const qlab::Error& e) {
      skipped.push_back({{"file", path.string()}, {"reason", e.what()}});
      continue;
    }
    analyses.push_back(std::move(ta));
  }
  if (analyses.empty())
    throw qlab::ValidationError(
        "no datasets admitted: no parseable trace CSVs in " + traces_dir);

  const bool lab = lab_units(args);
  for (auto& ta : analyses) {
    const auto& values = ta.trace.values;
    json s;
    s["kind"] = qlab::to_string(ta.trace.kind);
    s["n_samples"] = values.size();
    s["span_hours"] =
        (ta.trace.timestamps.back() - ta.trace.timestamps.front()) / 3600.0;
    const bool coherence_kind = ta.trace.kind == qlab::ParameterKind::t1 ||
                                ta.trace.kind == qlab::ParameterKind::t2_star;
    if (coherence_kind && values.size() >= 100) {
      const auto summary = qlab::distribution_summary(values);
      const double scale = lab ? 1e6 : 1.0;
      const char* suffix = lab ? "_us" : "_s";
      s[std::string("mean") + suffix] = summary.mean * scale;
      s[std::string("std") + suffix] = summary.stddev * scale;
      s["sample_skewness"] = summary.sample_skewness;
      s["rician"] = {{"nu", summary.params.nu},
                     {"sigma", summary.params.sigma},
                     {"t_max", summary.params.t_max},
                     {"ks_statistic", summary.ks_statistic}};
      s["fit_flags"] = summary.fit.flags;
      ta.dropout = qlab::detect_dropouts(ta.trace, summary.mean, summary.stddev);
      json intervals = json::array();
      for (const auto& iv : ta.dropout->intervals)
        intervals.push_back({{"t_start_s", iv.t_start}, {"t_end_s", iv.t_end}});
      s["dropouts"] = {{"threshold", ta.dropout->threshold * scale},
                       {"affected_fraction", ta.dropout->affected_fraction},
                       {"intervals", intervals}};
    } else {
      const double m = qlab::mean(values);
      s["mean"] = m;
      if (values.size() >= 2) s["std"] = qlab::stddev(values);
      if (values.size() >= 3) s["sample_skewness"] = qlab::skewness(values);
    }
    ta.summary = s;
  }

  std::map<std::string, qlab::TimeTrace> trace_map;
  std::map<std::string, qlab::DropoutReport> report_map;
  for (const auto& ta : analyses) {
    if (ta.dropout) {
      trace_map[ta.label] = ta.trace;
      report_map[ta.label] = *ta.dropout;
    }
  }
  const auto coincidence = qlab::coincidence_report(trace_map, report_map);

  json report;
  report["traces"] = json::object();
  for (const auto& ta : analyses) report["traces"][ta.label] = ta.summary;
  report["skipped"] = skipped;
  json pairs = json::array();
  for (const auto& p : coincidence.pairs)
    pairs.push_back({{"from", p.from},
                     {"to", p.to},
                     {"overlap", p.overlap},
                     {"flagged", p.flagged}});
  report["coincidence"] = {{"pairs", pairs},
                           {"flag_threshold", coincidence.flag_threshold}};
  report["manifest"] = manifest.manifest_id;

  const fs::path out(args.out_dir);
  write_json_file(out / "stability.json", report);

  std::vector<qlab::plot::Figure> panels;
  for (const auto& ta : analyses) {
    qlab::plot::Figure fig;
    fig.title = ta.label;
    fig.x_label = "t (s)";
    fig.y_label = std::string(qlab::to_string(ta.trace.kind)) + " (" +
                  ta.trace.unit + ")";
    qlab::plot::Series series{ta.label, ta.trace.timestamps, ta.trace.values,
                              "#1f6fb4", false};
    fig.series.push_back(series);
    if (ta.dropout) {
      fig.h_line = ta.dropout->threshold;
      for (const auto& iv : ta.dropout->intervals)
        fig.bands.push_back({iv.t_start, iv.t_end});
    }
    panels.push_back(fig);
  }
  qlab::plot::write_svg(out / "trace_panels.svg", panels);

  manifest.outputs = {"stability.json", "trace_panels.svg",
                      "trace_panels.svg.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_aging(const CommonArgs& args, const std::string& input) {
  const json config = load_json(args.config_path);
  const double t_c = config.value("t_c_k", 0.0);
  const double delta = config.contains("delta_j")
                           ? config.at("delta_j").get<double>()
                           : qlab::bcs_gap_j(t_c);
  if (!(delta > 0.0))
    throw qlab::ValidationError("aging config: need t_c_k or delta_j");

  std::vector<fs::path> inputs;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.path().extension() == ".json") inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
  } else {
    inputs.push_back(input);
  }
  if (inputs.empty())
    throw qlab::ValidationError("no datasets admitted: no cooldown JSON in " +
                                input);
  auto manifest = start_manifest("analyze aging", args, inputs, 0);

  const json qubits_cfg = config.value("qubits", json::object());
  json report;
  report["delta_j"] = delta;
  report["qubits"] = json::object();
  const bool lab = lab_units(args);

  std::vector<qlab::plot::Figure> panels(4);
  panels[0].title = "mean T1 per cooldown";
  panels[0].x_label = "elapsed (days)";
  panels[0].y_label = lab ? "T1 (us)" : "T1 (s)";
  panels[1].title = "qubit frequency shift";
  panels[1].x_label = "elapsed (days)";
  panels[1].y_label = lab ? "delta f_q (MHz)" : "delta f_q (Hz)";
  panels[2].title = "junction resistance change";
  panels[2].x_label = "elapsed (days)";
  panels[2].y_label = "delta R_N / R_N";
  panels[3].title = "readout frequency shift";
  panels[3].x_label = "elapsed (days)";
  panels[3].y_label = lab ? "delta f_r (MHz)" : "delta f_r (Hz)";
  const char* colors[] = {"#1f6fb4", "#d62728", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

  int color_idx = 0;
  for (const auto& path : inputs) {
    const std::string label = path.stem().string();
    if (!qubits_cfg.contains(label))
      throw qlab::ValidationError("aging config: missing entry for qubit '" +
                                  label + "' (field qubits." + label + ")");
    const json& qc = qubits_cfg.at(label);
    const double anharmonicity = qc.at("anharmonicity_hz").get<double>();
    const double e_c = qlab::PhysicalConstants::h * anharmonicity;

    const auto records = qlab::io::read_cooldown_json(path);
    const auto summary = qlab::cooldown_report(label, records, e_c, delta);

    json entries = json::array();
    qlab::plot::Series t1_series{label, {}, {}, colors[color_idx % 8], true};
    qlab::plot::Series fq_series = t1_series, rn_series = t1_series,
                       fr_series = t1_series;
    for (const auto& e : summary.entries) {
      json je;
      je["index"] = e.cooldown_index;
      je["elapsed_days"] = e.elapsed_days;
      if (e.delta_f_q_hz) {
        je[lab ? "delta_f_q_mhz" : "delta_f_q_hz"] =
            *e.delta_f_q_hz * (lab ? 1e-6 : 1.0);
        fq_series.x.push_back(e.elapsed_days);
        fq_series.y.push_back(*e.delta_f_q_hz * (lab ? 1e-6 : 1.0));
      }
      if (e.delta_rn_over_rn) {
        je["delta_rn_over_rn"] = *e.delta_rn_over_rn;
        rn_series.x.push_back(e.elapsed_days);
        rn_series.y.push_back(*e.delta_rn_over_rn);
      }
      if (e.delta_f_r_hz) {
        je[lab ? "delta_f_r_mhz" : "delta_f_r_hz"] =
            *e.delta_f_r_hz * (lab ? 1e-6 : 1.0);
        fr_series.x.push_back(e.elapsed_days);
        fr_series.y.push_back(*e.delta_f_r_hz * (lab ? 1e-6 : 1.0));
      }
      if (e.mean_t1_s) {
        je[lab ? "mean_t1_us" : "mean_t1_s"] = *e.mean_t1_s * (lab ? 1e6 : 1.0);
        t1_series.x.push_back(e.elapsed_days);
        t1_series.y.push_back(*e.mean_t1_s * (lab ? 1e6 : 1.0));
      }
      entries.push_back(je);
    }
    json jq;
    jq["entries"] = entries;
    jq["notes"] = summary.notes;

    // pulling/bare decomposition when a bare-resonance model is available
    if (qc.contains("f_r_bare_hz") || qc.contains("l_tot_m")) {
      qlab::ResonatorModel model;
      model.f_r_bare_hz = qc.value("f_r_bare_hz", 0.0);
      model.g_hz = qc.value("g_hz", 0.0);
      model.l_tot_m = qc.value("l_tot_m", 0.0);
      model.eps_eff = qc.value("eps_eff", 0.0);
      try {
        const auto decomp = qlab::decompose_fr_shift(records, model, e_c, delta);
        json shares = json::array();
        for (const auto& s : decomp.shares)
          shares.push_back({{"index", s.cooldown_index},
                            {"elapsed_days", s.elapsed_days},
                            {"observed_shift_hz", s.observed_shift_hz},
                            {"pulling_share_hz", s.pulling_share_hz},
                            {"bare_share_hz", s.bare_share_hz}});
        jq["fr_decomposition"] = {{"method", decomp.method},
                                  {"f_r_bare_hz", decomp.f_r_bare_hz},
                                  {"g_ref_hz", decomp.g_ref_hz},
                                  {"shares", shares},
                                  {"notes", decomp.notes}};
      } catch (const qlab::Error& e) {
        jq["fr_decomposition_error"] = e.what();
      }
    }
    report["qubits"][label] = jq;
    panels[0].series.push_back(t1_series);
    panels[1].series.push_back(fq_series);
    panels[2].series.push_back(rn_series);
    panels[3].series.push_back(fr_series);
    ++color_idx;
  }
  report["manifest"] = manifest.manifest_id;

  const fs::path out(args.out_dir);
  write_json_file(out / "aging.json", report);
  qlab::plot::write_svg(out / "cooldown_panels.svg", panels);
  manifest.outputs = {"aging.json", "cooldown_panels.svg",
                      "cooldown_panels.svg.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

int run_benchmark(const CommonArgs& args, const std::string& points_path) {
  auto manifest = start_manifest("analyze benchmark", args, {points_path}, 0);
  const json doc = load_json(points_path);
  if (!doc.is_array())
    throw qlab::ValidationError(points_path + ": expected a JSON array of points");
  std::vector<qlab::ScalingPoint> points;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const json& obj = doc[k];
    const std::string where =
        points_path + " entry " + std::to_string(k + 1);
    qlab::ScalingPoint p;
    p.label = obj.value("label", "point" + std::to_string(k + 1));
    bool have_mean = false, have_std = false;
    for (const auto& [key, value] : obj.items()) {
      if (key == "label") continue;
      if (key == "n_samples") {
        p.n_samples = value.get<long>();
        continue;
      }
      if (key == "span_hours") {
        p.span_hours = value.get<double>();
        continue;
      }
      const auto [base, factor] = qlab::io::split_unit_suffix(key, where);
      if (base == "mean_t1") {
        p.mean_t1_s = factor * value.get<double>();
        have_mean = true;
      } else if (base == "std_t1") {
        p.std_t1_s = factor * value.get<double>();
        have_std = true;
      } else if (base == "std_t1_stderr") {
        p.std_t1_stderr_s = factor * value.get<double>();
      } else {
        throw qlab::ValidationError(where + ": unexpected field '" + key + "'");
      }
    }
    if (!have_mean || !have_std)
      throw qlab::ValidationError(where + ": missing mean_t1_s or std_t1_s");
    points.push_back(p);
  }
  if (points.empty())
    throw qlab::ValidationError("no datasets admitted: empty points file");

  const auto fit = qlab::fit_scaling_law(points, args.override_admission);

  json report;
  report["a_si"] = fit.a;                       // s^{-1/2}
  report["a_stderr_si"] = fit.a_stderr;
  report["a_per_sqrt_us"] = fit.a * 1e-3;       // us^{-1/2}
  report["a_stderr_per_sqrt_us"] = fit.a_stderr * 1e-3;
  report["free_exponent"] = fit.free_exponent;
  report["free_exponent_stderr"] = fit.free_exponent_stderr;
  report["n_admitted"] = fit.n_admitted;
  report["rejected"] = fit.rejected;
  report["manifest"] = manifest.manifest_id;

  const fs::path out(args.out_dir);
  write_json_file(out / "benchmark.json", report);

  const bool lab = lab_units(args);
  const double tscale = lab ? 1e6 : 1.0;
  qlab::plot::Figure fig;
  fig.title = "sigma_T1 vs <T1>";
  fig.x_label = lab ? "<T1> (us)" : "<T1> (s)";
  fig.y_label = lab ? "sigma_T1 (us)" : "sigma_T1 (s)";
  fig.log_x = true;
  fig.log_y = true;
  qlab::plot::Series data{"datasets", {}, {}, "#d62728", true};
  double t_lo = 1e300, t_hi = 0;
  for (const auto& p : points) {
    if (!args.override_admission && !qlab::admissible(p)) continue;
    data.x.push_back(p.mean_t1_s * tscale);
    data.y.push_back(p.std_t1_s * tscale);
    t_lo = std::min(t_lo, p.mean_t1_s);
    t_hi = std::max(t_hi, p.mean_t1_s);
  }
  qlab::plot::Series line{"a <T1>^1.5", {}, {}, "#1f6fb4", false};
  for (int i = 0; i <= 64; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, i / 64.0);
    line.x.push_back(t * tscale);
    line.y.push_back(fit.a * std::pow(t, 1.5) * tscale);
  }
  fig.series = {data, line};
  qlab::plot::write_svg(out / "scaling.svg", {fig});

  manifest.outputs = {"benchmark.json", "scaling.svg", "scaling.svg.json"};
  finish_manifest(manifest, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qubitlab: transmon stability simulation and analysis"};
  app.set_version_flag("--version", std::string(qlab::kToolVersion));
  app.require_subcommand(1);

  CommonArgs args;
  std::string input, traces_dir, points_path;
  double f_q_hz = 0.0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* config_opt =
        cmd->add_option("--config", args.config_path, "config JSON path");
    if (needs_config) config_opt->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "RNG seed (default 0, recorded)");
    cmd->add_option("--jobs", args.jobs, "worker pool size (0 = hardware)");
    cmd->add_option("--units", args.units, "report units: si or lab")
        ->check(CLI::IsMember({"si", "lab"}));
  };

  auto* simulate = app.add_subcommand("simulate", "generate synthetic data");
  simulate->require_subcommand(1);
  auto* sim_tls = simulate->add_subcommand("tls", "TLS-limited T1 trace");
  add_common(sim_tls, true);
  auto* sim_decay = simulate->add_subcommand("decay", "lifetime curve");
  add_common(sim_decay, true);
  auto* sim_ramsey = simulate->add_subcommand("ramsey", "Ramsey fringe");
  add_common(sim_ramsey, true);
  auto* sim_ss = simulate->add_subcommand("singleshot", "IQ shot set");
  add_common(sim_ss, true);

  auto* analyze = app.add_subcommand("analyze", "run analysis pipelines");
  analyze->require_subcommand(1);
  auto* an_decay = analyze->add_subcommand("fit-decay", "exponential T1 fit");
  add_common(an_decay, false);
  an_decay->add_option("--input", input, "decay CSV")->required();
  auto* an_ramsey = analyze->add_subcommand("fit-ramsey", "damped cosine fit");
  add_common(an_ramsey, false);
  an_ramsey->add_option("--input", input, "ramsey CSV")->required();
  auto* an_readout = analyze->add_subcommand("readout", "IQ discrimination");
  add_common(an_readout, false);
  an_readout->add_option("--input", input, "IQ CSV")->required();
  an_readout->add_option("--fq-hz", f_q_hz, "qubit frequency (Hz)")->required();
  auto* an_stability = analyze->add_subcommand("stability", "trace analytics");
  add_common(an_stability, false);
  an_stability->add_option("--traces", traces_dir, "directory of trace CSVs")
      ->required();
  auto* an_aging = analyze->add_subcommand("aging", "cross-cooldown analysis");
  add_common(an_aging, true);
  an_aging->add_option("--input", input, "cooldown JSON file or directory")
      ->required();
  auto* an_benchmark =
      analyze->add_subcommand("benchmark", "sigma_T1 scaling fit");
  add_common(an_benchmark, false);
  an_benchmark->add_option("--points", points_path, "scaling points JSON")
      ->required();
  an_benchmark->add_flag("--override-admission", args.override_admission,
                         "admit points failing the >500 samples / >=10 h rule");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_tls->parsed()) return run_simulate_tls(args);
    if (sim_decay->parsed()) return run_simulate_decay(args);
    if (sim_ramsey->parsed()) return run_simulate_ramsey(args);
    if (sim_ss->parsed()) return run_simulate_singleshot(args);
    if (an_decay->parsed()) return run_fit_decay(args, input);
    if (an_ramsey->parsed()) return run_fit_ramsey(args, input);
    if (an_readout->parsed()) return run_readout(args, input, f_q_hz);
    if (an_stability->parsed()) return run_stability(args, traces_dir);
    if (an_aging->parsed()) return run_aging(args, input);
    if (an_benchmark->parsed()) return run_benchmark(args, points_path);
  } catch (const qlab::ValidationError& e) {
    json err{{"error", "validation"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitValidation;
  } catch (const qlab::IoError& e) {
    json err{{"error", "io"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitIo;
  } catch (const qlab::Error& e) {
    json err{{"error", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
