#include "vaporsim/cli.hpp"

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vaporsim/atoms.hpp"
#include "vaporsim/diffusion.hpp"
#include "vaporsim/errors.hpp"
#include "vaporsim/kvfile.hpp"
#include "vaporsim/memory.hpp"
#include "vaporsim/pumping.hpp"
#include "vaporsim/runio.hpp"
#include "vaporsim/spectrofit.hpp"

namespace vaporsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* k_tool_version = "0.1.0";

std::string trimmed(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

std::vector<double> linspace(double lo, double hi, long n) {
  if (n < 2) throw ConfigError("a sweep grid needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// "15.2" -> "15p2" so numeric values can tag file names.
std::string file_tag(double v) {
  std::string s = format_plot(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

struct BufferSpec {
  BufferKind kind = BufferKind::N2;
  double pressure_torr = 0.0;
};

BufferSpec parse_buffer_spec(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2)
    throw ConfigError("buffer spec must be kind:pressure_torr, got '" + text +
                      "'");
  BufferSpec out;
  out.kind = buffer_kind_from_string(trimmed(parts[0]));
  const std::string pressure = trimmed(parts[1]);
  try {
    std::size_t used = 0;
    out.pressure_torr = std::stod(pressure, &used);
    if (used != pressure.size()) throw std::invalid_argument(pressure);
  } catch (const std::exception&) {
    throw ConfigError("buffer pressure is not a number in '" + text + "'");
  }
  return out;
}

struct Calibrations {
  double kappa = k_coupling_cal;
  double stark = k_stark_shift_cal;
  double pump_rate = k_default_pump_rate_per_ns;
};

struct RunContext {
  KvFile cfg;
  std::string subcommand;
  std::string dest;
  long seed = 1;
  Calibrations cal;
  std::vector<std::string> outputs;
  json extra = json::object();
};

// Every config key must be read by the time a handler starts computing;
// anything left over is a typo or a key for a different subcommand.
void reject_unknown_keys(const KvFile& cfg) {
  const auto leftover = cfg.unconsumed_keys();
  if (!leftover.empty())
    throw ConfigError("unknown config key: " + leftover.front());
}

VaporCell cell_from_config(KvFile& cfg, const AtomData& data) {
  VaporCell cell;
  cell.line = data.line(line_label_from_string(cfg.get_string("line", "D2")));
  const BufferSpec spec = parse_buffer_spec(cfg.get_string("buffer", "N2:10"));
  cell.buffer = data.buffer(spec.kind, spec.pressure_torr);
  cell.temperature_k = cfg.get_double("temperature_k", 343.15);
  cell.length_cm = cfg.get_double("cell_length_cm", 7.5);
  cell.radius_cm = cfg.get_double("cell_radius_cm", 1.0);
  return cell;
}

std::string canonical_config_text(const KvFile& cfg) {
  std::ostringstream out;
  for (const auto& [key, value] : cfg.entries())
    out << key << " = " << value << "\n";
  return out.str();
}

void write_output(RunContext& ctx, const std::string& name,
                  const std::string& content) {
  write_text_file((fs::path(ctx.dest) / name).string(), content);
  ctx.outputs.push_back(name);
}

// The manifest pins everything a byte-identical re-execution needs: the
// resolved config, its hash, the data file hash and the effective seed and
// calibration constants. No timestamps, so a rerun reproduces it exactly.
void write_manifest(RunContext& ctx) {
  json m;
  m["calibrations"] = {{"kappa_cal", ctx.cal.kappa},
                       {"pump_rate_per_ns", ctx.cal.pump_rate},
                       {"stark_cal", ctx.cal.stark},
                       {"stark_phase", k_stark_phase}};
  json cfgj = json::object();
  for (const auto& [key, value] : ctx.cfg.entries()) cfgj[key] = value;
  m["config"] = cfgj;
  m["config_hash"] = fnv1a_hex(canonical_config_text(ctx.cfg));
  m["data_file_hash"] = fnv1a_hex(read_text_file(default_data_file()));
  m["outputs"] = ctx.outputs;
  m["schema_version"] = 1;
  m["seed"] = ctx.seed;
  m["subcommand"] = ctx.subcommand;
  m["tool"] = "vaporsim";
  m["tool_version"] = k_tool_version;
  for (const auto& [key, value] : ctx.extra.items()) m[key] = value;
  write_text_file((fs::path(ctx.dest) / "manifest.json").string(),
                  m.dump(2) + "\n");
}

void cmd_pumping_curve(RunContext& ctx) {
  KvFile& cfg = ctx.cfg;
  const AtomData data = AtomData::load_file(default_data_file());

  const std::vector<double> temps =
      linspace(cfg.get_double("t_min_k", 323.15),
               cfg.get_double("t_max_k", 413.15), cfg.get_int("t_steps", 10));

  PumpConfig pump;
  pump.pump_rate_per_ns = ctx.cal.pump_rate;
  pump.ground_relaxation_per_ns =
      cfg.get_double("ground_relaxation_per_ns", 1e-5);
  const double length = cfg.get_double("cell_length_cm", 7.5);
  const double radius = cfg.get_double("cell_radius_cm", 1.0);
  const long mc_photons = cfg.get_int("mc_photons", 0);

  std::vector<BufferSpec> buffers;
  for (const std::string& tok :
       split(cfg.get_string("buffers", "N2:10,Ne:20"), ','))
    buffers.push_back(parse_buffer_spec(trimmed(tok)));
  std::vector<LineLabel> lines;
  for (const std::string& tok : split(cfg.get_string("lines", "D1"), ','))
    lines.push_back(line_label_from_string(trimmed(tok)));
  reject_unknown_keys(cfg);

  std::uint64_t mc_calls = 0;
  for (const BufferSpec& spec : buffers) {
    const BufferGas gas = data.buffer(spec.kind, spec.pressure_torr);
    for (const LineLabel line : lines) {
      pump.pump_line = line;
      const PolarizationCurve curve =
          polarization_curve(data, temps, gas, pump, length, radius);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < temps.size(); ++i)
        rows.push_back({curve.temperatures_k[i], curve.polarization[i],
                        curve.multiplicity[i], curve.quench[i]});
      const HeaderLines header = {
          {"buffer", to_string(spec.kind)},
          {"pressure_torr", format_plot(spec.pressure_torr)},
          {"pump_line", to_string(line)},
          {"pump_rate_per_ns", format_full(ctx.cal.pump_rate)},
          {"cell_length_cm", format_plot(length)},
          {"cell_radius_cm", format_plot(radius)}};
      write_output(ctx,
                   "pumping_" + to_string(spec.kind) + "_" +
                       file_tag(spec.pressure_torr) + "_" + to_string(line) +
                       ".csv",
                   csv_text(header, {"T_K", "P", "M", "q"}, rows));

      if (mc_photons > 0) {
        // Monte Carlo cross-check of the trapping model at thermal
        // populations and zero quenching, one independent stream per row.
        VaporCell cell;
        cell.line = data.line(line);
        cell.buffer = gas;
        cell.length_cm = length;
        cell.radius_cm = radius;
        const GroundPopulations thermal = GroundPopulations::thermal();
        std::vector<std::vector<double>> trows;
        for (const double t : temps) {
          cell.temperature_k = t;
          const TrappingModelResult analytic =
              multiplicity_analytic(cell, thermal, 0.0);
          const TrappingModelResult mc = multiplicity_monte_carlo(
              cell, thermal, 0.0, static_cast<int>(mc_photons),
              static_cast<std::uint64_t>(ctx.seed) + 7919u * mc_calls++);
          trows.push_back({t, analytic.multiplicity, mc.multiplicity,
                           mc.mc_stderr});
        }
        const HeaderLines theader = {
            {"buffer", to_string(spec.kind)},
            {"pressure_torr", format_plot(spec.pressure_torr)},
            {"line", to_string(line)},
            {"photons", std::to_string(mc_photons)},
            {"quench", "0"}};
        write_output(ctx,
                     "trapping_" + to_string(spec.kind) + "_" +
                         file_tag(spec.pressure_torr) + "_" + to_string(line) +
                         ".csv",
                     csv_text(theader, {"T_K", "M_analytic", "M_mc", "M_mc_se"},
                              trows));
      }
    }
  }
}

void cmd_memory_sweep(RunContext& ctx) {
  KvFile& cfg = ctx.cfg;
  const AtomData data = AtomData::load_file(default_data_file());
  const VaporCell cell = cell_from_config(cfg, data);

  const double polarization = cfg.get_double("polarization", 0.999);
  const GroundPopulations pops = GroundPopulations::polarized(polarization);

  ControlPulseTrain ctrl;
  ctrl.bandwidth_ghz = cfg.get_double("bandwidth_ghz", 1.2);
  ctrl.readout_delay_ns = cfg.get_double("readout_delay_ns", 0.0);

  SolveOptions opts;
  opts.fwm_on = cfg.get_bool("fwm_on", true);
  opts.stark_on = cfg.get_bool("stark_on", true);
  opts.kappa_cal = ctx.cal.kappa;
  opts.stark_cal = ctx.cal.stark;
  opts.spinwave_decay_per_ns = cfg.get_double("spinwave_decay_per_ns", 0.0);
  opts.nz = static_cast<int>(cfg.get_int("nz", k_default_nz));
  opts.ntau = static_cast<int>(cfg.get_int("ntau", k_default_ntau));
  opts.backward_retrieval = cfg.get_bool("backward_retrieval", false);
  opts.grid_check = cfg.get_bool("grid_check", true);

  std::vector<double> omegas;
  if (cfg.has("omegas_ghz")) {
    if (cfg.has("omega_min_ghz") || cfg.has("omega_max_ghz") ||
        cfg.has("omega_steps"))
      throw ConfigError(
          "omegas_ghz conflicts with the omega_min/omega_max/omega_steps "
          "grid");
    omegas = cfg.get_double_list("omegas_ghz");
    if (omegas.empty())
      throw ConfigError("omegas_ghz must list at least one value");
  } else {
    omegas = linspace(cfg.get_double("omega_min_ghz", 0.5),
                      cfg.get_double("omega_max_ghz", 9.0),
                      cfg.get_int("omega_steps", 18));
  }
  std::vector<double> detunings{15.2};
  if (cfg.has("detunings_ghz")) {
    detunings = cfg.get_double_list("detunings_ghz");
    if (detunings.empty())
      throw ConfigError("detunings_ghz must list at least one value");
  }
  const bool companion = cfg.get_bool("nofwm_companion", false);
  const std::string line_name = cfg.get_string("line", "D2");
  reject_unknown_keys(cfg);

  const std::vector<RabiSweepCurve> curves =
      detuning_comparison(cell, pops, ctrl, detunings, omegas, opts);
  std::vector<RabiSweepCurve> nofwm;
  if (companion) {
    SolveOptions off = opts;
    off.fwm_on = false;
    nofwm = detuning_comparison(cell, pops, ctrl, detunings, omegas, off);
  }

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const RabiSweepCurve& curve = curves[ci];
    std::vector<std::string> columns = {
        "omega_GHz",  "delta_GHz",          "T_K",
        "d",          "eta",                "eta_readin",
        "anti_stokes_energy", "converged_flag"};
    if (companion) columns.push_back("eta_nofwm");
    std::vector<std::vector<double>> rows;
    for (std::size_t ri = 0; ri < curve.rows.size(); ++ri) {
      const RabiSweepRow& row = curve.rows[ri];
      std::vector<double> r = {row.omega_ghz,
                               curve.detuning_ghz,
                               curve.temperature_k,
                               curve.optical_depth,
                               row.eta,
                               row.eta_readin,
                               row.anti_stokes_energy,
                               row.converged ? 1.0 : 0.0};
      if (companion) r.push_back(nofwm[ci].rows[ri].eta);
      rows.push_back(std::move(r));
    }
    const HeaderLines header = {
        {"buffer", to_string(cell.buffer.kind)},
        {"pressure_torr", format_plot(cell.buffer.pressure_torr)},
        {"line", line_name},
        {"polarization", format_plot(polarization)},
        {"fwm_on", opts.fwm_on ? "true" : "false"},
        {"stark_on", opts.stark_on ? "true" : "false"},
        {"kappa_cal", format_full(ctx.cal.kappa)},
        {"stark_cal", format_full(ctx.cal.stark)}};
    write_output(ctx,
                 "memory_sweep_d" + file_tag(curve.detuning_ghz) + ".csv",
                 csv_text(header, columns, rows));
  }
}

void cmd_synth(RunContext& ctx) {
  KvFile& cfg = ctx.cfg;
  const std::string kind = cfg.get_string("kind", "spectrum");
  if (kind == "spectrum") {
    const AtomData data = AtomData::load_file(default_data_file());
    const VaporCell cell = cell_from_config(cfg, data);
    SpectrumFit truth;
    truth.polarization = cfg.get_double("polarization", 0.999);
    truth.temperature_k = cell.temperature_k;
    truth.optical_depth =
        cfg.has("optical_depth")
            ? cfg.get_double("optical_depth", 0.0)
            : centroid_optical_depth(
                  cell, GroundPopulations::polarized(truth.polarization));
    truth.baseline_slope_per_ghz = cfg.get_double("baseline_slope_per_ghz", 0.0);
    truth.baseline_offset = cfg.get_double("baseline_offset", 1.0);
    const double noise = cfg.get_double("noise_sigma", 0.01);
    const std::vector<double> grid =
        linspace(cfg.get_double("f_min_ghz", -8.0),
                 cfg.get_double("f_max_ghz", 8.0), cfg.get_int("points", 1201));
    const std::string line_name = cfg.get_string("line", "D2");
    reject_unknown_keys(cfg);
    const SpectrumTrace trace = synthesize_scan_from_fit(
        cell, truth, noise, static_cast<std::uint64_t>(ctx.seed), grid);
    const HeaderLines header = {
        {"buffer", to_string(cell.buffer.kind)},
        {"pressure_torr", format_plot(cell.buffer.pressure_torr)},
        {"line", line_name},
        {"temperature_k", format_plot(cell.temperature_k)},
        {"cell_length_cm", format_plot(cell.length_cm)},
        {"cell_radius_cm", format_plot(cell.radius_cm)},
        {"seed", std::to_string(ctx.seed)}};
    write_output(ctx, "trace.txt", trace_text(trace, header));
    ctx.extra["truth"] = {
        {"baseline_offset", truth.baseline_offset},
        {"baseline_slope_per_ghz", truth.baseline_slope_per_ghz},
        {"noise_sigma", noise},
        {"optical_depth", truth.optical_depth},
        {"polarization", truth.polarization},
        {"temperature_k", truth.temperature_k}};
  } else if (kind == "image_series") {
    const double d = cfg.get_double("d_cm2_per_s", 15.0);
    const double gamma0 = cfg.get_double("gamma0_per_ms", 0.1);
    HoleProfile hole;
    hole.depth = cfg.get_double("hole_depth", 0.8);
    hole.radius_mm = cfg.get_double("hole_radius_mm", 6.0);
    hole.center_x_mm = cfg.get_double("center_x_mm", 0.0);
    hole.center_y_mm = cfg.get_double("center_y_mm", 0.0);
    ImageGrid grid;
    grid.nx = static_cast<int>(cfg.get_int("nx", 64));
    grid.ny = static_cast<int>(cfg.get_int("ny", 64));
    grid.pixel_pitch_mm = cfg.get_double("pixel_pitch_mm", 1.0);
    const long frames = cfg.get_int("frames", 32);
    const double t0 = cfg.get_double("t_start_ms", 0.0);
    const double dt = cfg.get_double("t_step_ms", 0.5);
    if (frames < 4) throw ConfigError("frames must be at least 4");
    if (dt <= 0.0) throw ConfigError("t_step_ms must be positive");
    const double noise = cfg.get_double("noise_sigma", 0.01);
    reject_unknown_keys(cfg);
    std::vector<double> times(static_cast<std::size_t>(frames));
    for (long i = 0; i < frames; ++i)
      times[static_cast<std::size_t>(i)] = t0 + dt * static_cast<double>(i);
    const ImageSeries series =
        synthesize_hole_series(d, gamma0, hole, grid, times, noise,
                               static_cast<std::uint64_t>(ctx.seed));
    const HeaderLines annotations = {{"d_cm2_per_s", format_full(d)},
                                     {"gamma0_per_ms", format_full(gamma0)},
                                     {"noise_sigma", format_full(noise)},
                                     {"seed", std::to_string(ctx.seed)}};
    write_image_series((fs::path(ctx.dest) / "series").string(), series,
                       annotations);
    ctx.outputs.push_back("series/series.json");
    ctx.extra["truth"] = {{"d_cm2_per_s", d}, {"gamma0_per_ms", gamma0}};
  } else {
    throw ConfigError("kind must be 'spectrum' or 'image_series', got '" +
                      kind + "'");
  }
}

void cmd_fit(RunContext& ctx) {
  KvFile& cfg = ctx.cfg;
  const std::string input = cfg.require_string("input");
  std::string mode = cfg.get_string("mode", "auto");
  if (mode == "auto") {
    const bool json_like =
        input.size() >= 5 && input.compare(input.size() - 5, 5, ".json") == 0;
    mode = (fs::is_directory(input) || json_like) ? "diffusion" : "spectrum";
  }
  if (mode == "spectrum") {
    const AtomData data = AtomData::load_file(default_data_file());
    const VaporCell cell = cell_from_config(cfg, data);
    SpectrumFit guess;
    guess.optical_depth = cfg.get_double("guess_optical_depth", 5.0);
    guess.polarization = cfg.get_double("guess_polarization", 0.7);
    guess.temperature_k =
        cfg.get_double("guess_temperature_k", cell.temperature_k);
    guess.baseline_slope_per_ghz = cfg.get_double("guess_baseline_slope", 0.0);
    guess.baseline_offset = cfg.get_double("guess_baseline_offset", 1.0);
    reject_unknown_keys(cfg);
    const SpectrumTrace trace = read_trace_file(input);
    const SpectrumFit fit = fit_scan(cell, trace, guess);
    json out;
    out["at_bound"] = fit.at_bound;
    out["baseline_offset"] = fit.baseline_offset;
    out["baseline_slope_per_ghz"] = fit.baseline_slope_per_ghz;
    json cov = json::array();
    for (int r = 0; r < fit.covariance.rows(); ++r) {
      json rowj = json::array();
      for (int c = 0; c < fit.covariance.cols(); ++c)
        rowj.push_back(fit.covariance(r, c));
      cov.push_back(rowj);
    }
    out["covariance"] = cov;
    out["covariance_order"] = {"optical_depth", "polarization",
                               "temperature_k", "baseline_slope_per_ghz",
                               "baseline_offset"};
    out["input"] = input;
    out["iterations"] = fit.iterations;
    out["optical_depth"] = fit.optical_depth;
    out["polarization"] = fit.polarization;
    out["residual_rms"] = fit.residual_rms;
    out["temperature_k"] = fit.temperature_k;
    write_output(ctx, "fit_spectrum.json", out.dump(2) + "\n");
  } else if (mode == "diffusion") {
    const double k_min = cfg.get_double("k_min_per_mm", 0.09);
    const double k_max = cfg.get_double("k_max_per_mm", 0.6);
    const double noise_floor = cfg.get_double("noise_floor", 0.04);
    const double pressure = cfg.get_double("pressure_torr", 10.0);
    const bool quadrants = cfg.get_bool("quadrants", false);
    reject_unknown_keys(cfg);
    const ImageSeries series = read_image_series(input);
    const std::vector<ModeDecay> decays =
        fit_mode_decays(transverse_fft(series), series.timestamps_ms, k_min,
                        k_max, noise_floor);
    const DiffusionFit fit = fit_diffusion(decays, pressure);
    json out;
    out["d0_cm2_per_s"] = fit.d0_cm2_per_s;
    out["d_cm2_per_s"] = fit.d_cm2_per_s;
    out["d_hi_cm2_per_s"] = fit.d_hi_cm2_per_s;
    out["d_lo_cm2_per_s"] = fit.d_lo_cm2_per_s;
    out["gamma0_per_ms"] = fit.gamma0_per_ms;
    out["input"] = input;
    json modes = json::array();
    for (const ModeDecay& m : decays)
      modes.push_back({{"gamma_per_ms", m.fitted_gamma_per_ms},
                       {"k_perp_per_mm", m.k_perp_per_mm},
                       {"log_fit", m.log_fit},
                       {"r2", m.fit_r2}});
    out["modes"] = modes;
    out["pressure_torr"] = fit.pressure_torr;
    if (quadrants) {
      const DiffusionFit q =
          quadrant_error_estimate(series, k_min, k_max, pressure, noise_floor);
      out["quadrants"] = {{"d_cm2_per_s", q.d_cm2_per_s},
                          {"d_hi_cm2_per_s", q.d_hi_cm2_per_s},
                          {"d_lo_cm2_per_s", q.d_lo_cm2_per_s},
                          {"gamma0_per_ms", q.gamma0_per_ms}};
    }
    write_output(ctx, "fit_diffusion.json", out.dump(2) + "\n");
  } else {
    throw ConfigError("mode must be auto, spectrum or diffusion, got '" +
                      mode + "'");
  }
}

void run_subcommand(const std::string& sub, KvFile cfg,
                    const std::string& outdir_flag) {
  RunContext ctx{std::move(cfg)};
  ctx.subcommand = sub;
  ctx.seed = ctx.cfg.get_int("seed", 1);
  // The --output-dir flag is a runtime destination only; it never enters the
  // recorded config, so a rerun into a fresh directory stays byte-identical.
  const std::string cfg_dir = ctx.cfg.get_string("output_dir", ".");
  ctx.dest = outdir_flag.empty() ? cfg_dir : outdir_flag;
  ctx.cal.kappa = ctx.cfg.get_double("kappa_cal", k_coupling_cal);
  ctx.cal.stark = ctx.cfg.get_double("stark_cal", k_stark_shift_cal);
  ctx.cal.pump_rate =
      ctx.cfg.get_double("pump_rate", k_default_pump_rate_per_ns);
  fs::create_directories(ctx.dest);

  if (sub == "pumping-curve") {
    cmd_pumping_curve(ctx);
  } else if (sub == "memory-sweep") {
    cmd_memory_sweep(ctx);
  } else if (sub == "synth") {
    cmd_synth(ctx);
  } else if (sub == "fit") {
    cmd_fit(ctx);
  } else {
    throw ConfigError("unknown subcommand '" + sub + "'");
  }
  reject_unknown_keys(ctx.cfg);
  write_manifest(ctx);
}

void cmd_rerun(const std::string& manifest_path,
               const std::string& outdir_flag) {
  const std::string text = read_text_file(manifest_path);
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path + ": not a valid manifest: " + e.what());
  }
  std::string sub;
  std::ostringstream cfg_text;
  try {
    sub = manifest.at("subcommand").get<std::string>();
    for (const auto& [key, value] : manifest.at("config").items())
      cfg_text << key << " = " << value.get<std::string>() << "\n";
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path + ": not a valid manifest: " + e.what());
  }
  run_subcommand(sub, KvFile::parse_text(cfg_text.str(), manifest_path),
                 outdir_flag);
}

struct SubFlags {
  std::string config_path;
  std::string output_dir;
  std::string seed_text;
  std::vector<std::string> overrides;
};

KvFile resolve_config(const SubFlags& flags) {
  KvFile cfg = flags.config_path.empty()
                   ? KvFile::parse_text("", "<command line>")
                   : KvFile::parse_file(flags.config_path);
  for (const std::string& kv : flags.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    cfg.set(trimmed(kv.substr(0, eq)), trimmed(kv.substr(eq + 1)));
  }
  if (!flags.seed_text.empty()) cfg.set("seed", flags.seed_text);
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"vapour-cell memory toolkit: pumping, storage and fitting "
               "drivers"};
  app.name("vaporsim");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"pumping-curve", "optical pumping polarization and trapping curves"},
      {"memory-sweep", "memory efficiency over control power and detuning"},
      {"synth", "synthetic spectrum scans and diffusion image series"},
      {"fit", "fit a spectrum trace or a diffusion image series"}};
  std::map<std::string, SubFlags> flags;
  for (const auto& [name, desc] : subs) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    SubFlags& f = flags[name];
    cmd->add_option("--config", f.config_path, "key = value configuration file");
    cmd->add_option("--set", f.overrides, "override one config key, KEY=VALUE");
    cmd->add_option("--seed", f.seed_text, "override the seed config key");
    cmd->add_option("--output-dir", f.output_dir, "directory for output files");
  }
  SubFlags rerun_flags;
  CLI::App* rerun =
      app.add_subcommand("rerun", "re-execute a recorded run from its manifest");
  rerun
      ->add_option("--manifest", rerun_flags.config_path,
                   "manifest.json of the run to repeat")
      ->required();
  rerun->add_option("--output-dir", rerun_flags.output_dir,
                    "directory for output files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (rerun->parsed()) {
      cmd_rerun(rerun_flags.config_path, rerun_flags.output_dir);
    } else {
      for (const auto& [name, desc] : subs) {
        if (app.get_subcommand(name)->parsed())
          run_subcommand(name, resolve_config(flags[name]),
                         flags[name].output_dir);
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace vaporsim
