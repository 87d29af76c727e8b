// qplas: simulate time-tag streams, analyze them, and evaluate the HOM and
// transmission-spectrum models from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "recipes.hpp"

using namespace qplas;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kConfig = 3, kIo = 4, kAnalysis = 5 };

struct UsageError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path + "'");
  return ss.str();
}

io::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return io::parse_config(read_text(path));
}

TimePs cli_time(const std::string& text, const char* flag) {
  try {
    return io::detail::parse_time(text, 0, flag);
  } catch (const io::ConfigError&) {
    throw UsageError(std::string(flag) + ": expected a duration such as 60s or 1.5ns, got '" + text + "'");
  }
}

Channel cli_channel(int c) {
  if (c < 0 || c > 255) throw UsageError("channel " + std::to_string(c) + " out of range 0..255");
  return static_cast<Channel>(c);
}

ChannelSet cli_channels(const std::vector<int>& cs) {
  ChannelSet s;
  for (int c : cs) s.add(cli_channel(c));
  return s;
}

WavepacketShape cli_shape(const std::string& s) {
  try {
    return io::detail::parse_shape(s, 0, "--shape");
  } catch (const io::ConfigError&) {
    throw UsageError("--shape: expected double_exponential, exponential_decay or gaussian, got '" + s + "'");
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    try {
      io::write_file_atomic(path, text);
    } catch (const io::TagFileError& e) {
      throw IoError(e.what());
    }
  }
}

void report(const std::vector<std::string>& lines) {
  for (const auto& l : lines) std::cerr << l << '\n';
}

std::string fmt(double x) { return io::csv_number(x); }

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config, output, duration;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a, bool seed_given) {
  auto c = load_config(a.config);
  if (!a.duration.empty()) c.duration = cli_time(a.duration, "--duration");
  if (seed_given) c.seed = a.seed;
  const auto run = run_experiment(io::to_setup(c), c.duration, c.seed);
  const auto stream = run.merged();
  try {
    io::write_tags(a.output, stream);
  } catch (const io::TagFileError& e) {
    throw IoError(e.what());
  }
  std::cerr << "wrote " << stream.size() << " tags over " << io::detail::format_time(c.duration) << " to " << a.output
            << " (pairs " << run.stats.true_pairs << ", multipair " << run.stats.multipair_extras
            << ", background " << run.stats.background_signal + run.stats.background_idler << ")\n";
  return kOk;
}

struct AnalyzeArgs {
  std::string input, output, config;
  std::string bin, window, from, to;
  std::vector<int> herald{0}, a{1}, b{2}, signal{1, 2}, herald_pair{0, 3};
  std::vector<double> bins{1.0};
  bool autocorrelation = false;
  std::string fit;
};

TimeTagStream load_tags(const std::string& path) { return io::read_tags(path); }

int run_g2(const AnalyzeArgs& x) {
  const auto c = load_config(x.config);
  const TimePs w = x.window.empty() ? c.analysis.triple_window : cli_time(x.window, "--window");
  const auto stream = load_tags(x.input);
  io::CsvTable t(x.autocorrelation ? std::vector<std::string>{"g2", "error"}
                                   : std::vector<std::string>{"g2", "error", "heralds", "doubles_a", "doubles_b",
                                                              "triples"});
  if (x.autocorrelation) {
    const auto g = auto_g2_zero(stream, cli_channels(x.a), cli_channels(x.b), w);
    t.add_row({fmt(g.value), fmt(g.error)});
  } else {
    const auto n = heralded_counts(stream, cli_channels(x.herald), cli_channels(x.a), cli_channels(x.b), -w, w);
    const auto g = heralded_g2_from_counts(n);
    t.add_row({fmt(g.value), fmt(g.error), std::to_string(n.heralds), std::to_string(n.doubles_a),
               std::to_string(n.doubles_b), std::to_string(n.triples)});
  }
  emit(t.str(), x.output);
  return kOk;
}

int run_cs(const AnalyzeArgs& x) {
  const auto c = load_config(x.config);
  const auto stream = load_tags(x.input);
  io::CsvTable t({"bin_ns", "tau_ns", "value", "error"});
  std::vector<std::string> summary;
  for (double bin_ns : x.bins) {
    CauchySchwarzOptions opt;
    opt.herald_pair = cli_channels(x.herald_pair);
    opt.reemit_pair = cli_channels(x.signal);
    opt.bin_width = cli_time(fmt(bin_ns) + "ns", "--bins");
    opt.tau_min = -(x.window.empty() ? c.analysis.window : cli_time(x.window, "--window"));
    opt.tau_max = -opt.tau_min;
    opt.auto_half_window = c.analysis.auto_window;
    const auto r = cauchy_schwarz(stream, opt);
    for (std::size_t k = 0; k < r.size(); ++k)
      t.add_row({fmt(bin_ns), fmt(r.tau[k]), fmt(r.values[k]), fmt(r.errors[k])});
    const auto p = r.peak_index();
    summary.push_back("bin " + fmt(bin_ns) + " ns: peak C = " + fmt(r.values[p]) + " +- " + fmt(r.errors[p]) +
                      " at " + fmt(r.tau[p]) + " ns (g_ii(0) " + fmt(r.g_ii0.value) + ", g_rr(0) " +
                      fmt(r.g_rr0.value) + ")");
  }
  emit(t.str(), x.output);
  report(summary);
  return kOk;
}

int run_waveform(const AnalyzeArgs& x) {
  const auto c = load_config(x.config);
  const TimePs bin = x.bin.empty() ? c.analysis.bin_width : cli_time(x.bin, "--bin");
  const TimePs lo = cli_time(x.from, "--from"), hi = cli_time(x.to, "--to");
  const auto w = reconstruct_waveform(load_tags(x.input), cli_channels(x.herald), cli_channels(x.signal), bin, lo, hi);
  io::CsvTable t({"tau_ns", "counts", "error"});
  for (std::size_t k = 0; k < w.size(); ++k) t.add_row({fmt(w.bin_center(k)), fmt(w.counts[k]), fmt(w.errors[k])});
  emit(t.str(), x.output);
  if (!x.fit.empty()) {
    const auto f = fit_waveform(w, cli_shape(x.fit));
    report({"fitted " + x.fit + ": fwhm " + fmt(f.amplitude.fwhm) + " +- " + fmt(f.fwhm_error) + " ns, offset " +
            fmt(f.amplitude.offset) + " +- " + fmt(f.offset_error) + " ns, baseline " + fmt(f.baseline) +
            " per bin, reduced chi2 " + fmt(f.reduced_chi2)});
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct HomArgs {
  std::string shape = "double_exponential", input, output;
  double fwhm = 50.0, delay = 0.0, max_detuning = 20.0, counts = 0.0, transmittance = 1.0;
  std::size_t points = 81;
  std::uint64_t seed = 1;
};

int run_hom_curve(const HomArgs& h) {
  const BiphotonAmplitude amp{cli_shape(h.shape), h.fwhm, 0.0};
  amp.validate();
  const auto grid = detuning_grid(h.max_detuning, h.points);
  const auto curve = h.counts > 0.0
                         ? simulate_hom_curve(amp, grid, h.delay, {h.counts, h.transmittance}, {h.seed, 5})
                         : hom_curve(amp, grid, h.delay);
  io::CsvTable t({"detuning_mhz", "coincidence"});
  for (std::size_t k = 0; k < grid.size(); ++k) t.add_row({fmt(grid[k]), fmt(curve.values[k])});
  emit(t.str(), h.output);
  return kOk;
}

int run_hom_fit(const HomArgs& h) {
  const auto data = io::parse_numeric_csv(read_text(h.input));
  const auto cd = data.column("optical_delay_ns"), cv = data.column("visibility");
  const auto ce = data.header.size() > 2 ? data.column("error") : cv;
  std::vector<VisibilityPoint> pts;
  for (const auto& r : data.rows) pts.push_back({r[cd], r[cv], ce == cv ? 0.0 : r[ce]});
  const auto f = fit_coherence_time(pts, cli_shape(h.shape));
  io::CsvTable t({"fwhm_ns", "error", "residual_norm"});
  t.add_row(std::vector<double>{f.fwhm, f.error, f.residual_norm});
  emit(t.str(), h.output);
  return kOk;
}

// ---------------------------------------------------------------------------

struct SpectrumArgs {
  spectrum::ArrayGeometry geom{};
  double from = 600.0, to = 1000.0, step = 1.0;
  std::string preset = "measured", input, output, interface = "air", polarization = "TM";
  std::vector<double> fano;  // center, peak, fwhm, q
  double theta_from = 0.0, theta_to = 10.0, theta_step = 1.0;
  std::vector<std::string> orders{"1,0", "0,1", "-1,0", "0,-1"};
};

spectrum::FanoParams fano_params(const SpectrumArgs& s) {
  if (!s.fano.empty()) {
    if (s.fano.size() != 4) throw UsageError("--params needs center,peak,fwhm,q");
    return {s.fano[0], s.fano[1], s.fano[2], s.fano[3]};
  }
  if (s.preset == "measured") return spectrum::measured_sample_resonance();
  if (s.preset == "designed") return spectrum::designed_sample_resonance();
  throw UsageError("--preset: expected measured or designed, got '" + s.preset + "'");
}

int run_bethe(const SpectrumArgs& s) {
  s.geom.validate();
  io::CsvTable t({"wavelength_nm", "transmittance"});
  for (double l : spectrum::wavelength_grid(s.from, s.to, s.step))
    t.add_row(std::vector<double>{l, spectrum::bethe_transmittance(s.geom, l)});
  emit(t.str(), s.output);
  return kOk;
}

int run_resonance(const SpectrumArgs& s) {
  using namespace spectrum;
  s.geom.validate();
  Interface side;
  if (s.interface == "air") side = Interface::Air;
  else if (s.interface == "glass") side = Interface::Glass;
  else throw UsageError("--interface: expected air or glass");
  Polarization pol;
  if (s.polarization == "TM") pol = Polarization::TM;
  else if (s.polarization == "TE") pol = Polarization::TE;
  else throw UsageError("--polarization: expected TM or TE");
  std::vector<DiffractionOrder> orders;
  for (const auto& o : s.orders) {
    DiffractionOrder d;
    char comma = 0;
    std::istringstream in(o);
    if (!(in >> d.i >> comma >> d.j) || comma != ',' || !(in >> std::ws).eof())
      throw UsageError("--order: expected i,j, got '" + o + "'");
    orders.push_back(d);
  }
  if (!(s.theta_step > 0.0) || s.theta_to < s.theta_from) throw UsageError("bad --theta range");
  io::CsvTable t({"theta_deg", "order", "wavelength_nm"});
  const auto n = static_cast<long>(std::floor((s.theta_to - s.theta_from) / s.theta_step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double theta = s.theta_from + static_cast<double>(k) * s.theta_step;
    for (const auto& o : orders)
      t.add_row({fmt(theta), o.label(),
                 fmt(spp_resonance_wavelength(s.geom, gold_table(), side, theta, pol, o).wavelength)});
  }
  emit(t.str(), s.output);
  return kOk;
}

int run_fano(const SpectrumArgs& s) {
  const auto spec = spectrum::fano_spectrum(s.geom, fano_params(s), spectrum::wavelength_grid(s.from, s.to, s.step));
  io::CsvTable t({"wavelength_nm", "transmittance", "resonance", "diffraction"});
  for (std::size_t k = 0; k < spec.wavelengths.size(); ++k)
    t.add_row(std::vector<double>{spec.wavelengths[k], spec.total[k], spec.resonance[k], spec.diffraction[k]});
  emit(t.str(), s.output);
  return kOk;
}

int run_spectrum_fit(const SpectrumArgs& s) {
  const auto data = io::parse_numeric_csv(read_text(s.input));
  const auto cl = data.column("wavelength_nm"), ct = data.column("transmittance");
  std::vector<spectrum::SpectrumPoint> pts;
  for (const auto& r : data.rows) pts.push_back({r[cl], r[ct]});
  const auto f = spectrum::fit_fano(s.geom, pts);
  io::CsvTable t({"parameter", "value", "error"});
  t.add_row({"center_nm", fmt(f.params.center), fmt(f.errors.center)});
  t.add_row({"peak_transmittance", fmt(f.params.peak_transmittance), fmt(f.errors.peak_transmittance)});
  t.add_row({"fwhm_nm", fmt(f.params.fwhm), fmt(f.errors.fwhm)});
  t.add_row({"q", fmt(f.params.q), fmt(f.errors.q)});
  t.add_row({"peak_wavelength_nm", fmt(f.params.peak_wavelength()), ""});
  t.add_row({"residual_norm", fmt(f.residual_norm), ""});
  emit(t.str(), s.output);
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReproArgs {
  std::string config, output, duration;
  std::uint64_t seed = 1;
  double transmittance = 0.34;
};

int run_repro(const std::string& which, const ReproArgs& r) {
  auto c = load_config(r.config);
  c.seed = r.seed;
  auto duration = [&](TimePs fallback) { return r.duration.empty() ? fallback : cli_time(r.duration, "--duration"); };
  const auto out = [&] {
    if (which == "fig3") return tools::repro_cauchy_schwarz(c, duration(c.duration));
    if (which == "fig4") return tools::repro_waveforms(c, duration(900 * kPsPerSecond));
    if (which == "fig5") return tools::repro_hom(r.seed, r.transmittance);
    if (which == "table1") return tools::repro_g2_table(c, duration(c.duration));
    throw UsageError("unknown recipe '" + which + "'");
  }();
  emit(out.table.str(), r.output);
  report(out.summary);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyze heralded single photons reemitted by a plasmonic hole array"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a time-tag stream");
  simulate->add_option("--config", sim.config, "Experiment config file");
  simulate->add_option("--duration", sim.duration, "Acquisition time, e.g. 60s (overrides the config)");
  auto* sim_seed = simulate->add_option("--seed", sim.seed, "RNG seed (overrides the config)");
  simulate->add_option("-o,--output", sim.output, "Output tag file")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Analyze a time-tag file");
  analyze->require_subcommand(1);
  auto common = [&](CLI::App* s) {
    s->add_option("input", an.input, "Tag file")->required();
    s->add_option("--config", an.config, "Config supplying analysis defaults");
    s->add_option("-o,--output", an.output, "Output CSV (default stdout)");
  };
  auto* g2 = analyze->add_subcommand("g2", "Zero-delay second-order coherence");
  common(g2);
  g2->add_option("--window", an.window, "Coincidence half-window, e.g. 150ns");
  g2->add_option("--herald", an.herald, "Herald channel(s)");
  g2->add_option("--a", an.a, "First signal output channel(s)");
  g2->add_option("--b", an.b, "Second signal output channel(s)");
  g2->add_flag("--unheralded", an.autocorrelation, "Plain autocorrelation between --a and --b");
  auto* cs = analyze->add_subcommand("cs", "Cauchy-Schwarz ratio against delay");
  common(cs);
  cs->add_option("--bins", an.bins, "Bin widths in ns, e.g. 1,2,4,8")->delimiter(',');
  cs->add_option("--window", an.window, "Delay range half-width");
  cs->add_option("--herald-pair", an.herald_pair, "The two idler channels")->delimiter(',');
  cs->add_option("--signal-pair", an.signal, "The two signal channels")->delimiter(',');
  auto* wf = analyze->add_subcommand("waveform", "Heralded temporal waveform");
  common(wf);
  an.from = "-150ns";
  an.to = "250ns";
  wf->add_option("--herald", an.herald, "Herald channel(s)")->delimiter(',');
  wf->add_option("--signal", an.signal, "Signal channel(s)")->delimiter(',');
  wf->add_option("--bin", an.bin, "Bin width, e.g. 1ns");
  wf->add_option("--from", an.from, "Window start relative to the herald");
  wf->add_option("--to", an.to, "Window end relative to the herald");
  wf->add_option("--fit", an.fit, "Fit a wavepacket shape and report its width");

  HomArgs hm;
  auto* hom = app.add_subcommand("hom", "Two-photon interference model");
  hom->require_subcommand(1);
  auto* curve = hom->add_subcommand("curve", "Coincidence probability against detuning");
  curve->add_option("--shape", hm.shape, "Wavepacket shape");
  curve->add_option("--fwhm", hm.fwhm, "Wavepacket FWHM in ns");
  curve->add_option("--delay", hm.delay, "Optical delay in ns");
  curve->add_option("--max-detuning", hm.max_detuning, "Half-span of the detuning grid in MHz");
  curve->add_option("--points", hm.points, "Grid points");
  curve->add_option("--counts", hm.counts, "Simulate Poisson counts with this many at P = 1/2");
  curve->add_option("--transmittance", hm.transmittance, "Arm transmittance for simulated counts");
  curve->add_option("--seed", hm.seed, "RNG seed for simulated counts");
  curve->add_option("-o,--output", hm.output, "Output CSV (default stdout)");
  auto* hfit = hom->add_subcommand("fit", "Fit coherence time to visibility against delay");
  hfit->add_option("input", hm.input, "CSV with optical_delay_ns, visibility[, error]")->required();
  hfit->add_option("--shape", hm.shape, "Wavepacket shape");
  hfit->add_option("-o,--output", hm.output, "Output CSV (default stdout)");

  SpectrumArgs sp;
  auto* spec = app.add_subcommand("spectrum", "Hole-array transmission models");
  spec->require_subcommand(1);
  auto geometry = [&](CLI::App* s) {
    s->add_option("--pitch", sp.geom.pitch, "Array pitch in nm");
    s->add_option("--diameter", sp.geom.hole_diameter, "Hole diameter in nm");
    s->add_option("--thickness", sp.geom.film_thickness, "Film thickness in nm");
    s->add_option("-o,--output", sp.output, "Output CSV (default stdout)");
  };
  auto grid = [&](CLI::App* s) {
    s->add_option("--from", sp.from, "First wavelength in nm");
    s->add_option("--to", sp.to, "Last wavelength in nm");
    s->add_option("--step", sp.step, "Wavelength step in nm");
  };
  auto* bethe = spec->add_subcommand("bethe", "Non-resonant aperture transmittance");
  geometry(bethe);
  grid(bethe);
  auto* res = spec->add_subcommand("resonance", "Surface plasmon resonance wavelengths against incidence angle");
  geometry(res);
  res->add_option("--interface", sp.interface, "air or glass");
  res->add_option("--polarization", sp.polarization, "TM or TE");
  res->add_option("--theta-from", sp.theta_from, "First angle in degrees");
  res->add_option("--theta-to", sp.theta_to, "Last angle in degrees");
  res->add_option("--theta-step", sp.theta_step, "Angle step in degrees");
  res->add_option("--order", sp.orders, "Diffraction order i,j (repeatable)");
  auto* fano = spec->add_subcommand("fano", "Fano transmission spectrum");
  geometry(fano);
  grid(fano);
  fano->add_option("--preset", sp.preset, "measured or designed");
  fano->add_option("--params", sp.fano, "center,peak,fwhm,q")->delimiter(',');
  auto* sfit = spec->add_subcommand("fit", "Fit a Fano resonance to a measured spectrum");
  geometry(sfit);
  sfit->add_option("input", sp.input, "CSV with wavelength_nm, transmittance")->required();

  std::string show_path;
  auto* show = app.add_subcommand("config", "Print the effective configuration with every key");
  show->add_option("--config", show_path, "Config file to resolve (default: built-in defaults)");

  ReproArgs rp;
  std::string recipe;
  auto* repro = app.add_subcommand("repro", "Fixed-seed end-to-end recipes");
  repro->add_option("recipe", recipe, "fig3, fig4, fig5 or table1")->required();
  repro->add_option("--config", rp.config, "Experiment config file");
  repro->add_option("--seed", rp.seed, "RNG seed");
  repro->add_option("--duration", rp.duration, "Acquisition time per run");
  repro->add_option("--transmittance", rp.transmittance, "Sample transmittance for the HOM recipe");
  repro->add_option("-o,--output", rp.output, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, sim_seed->count() > 0);
    if (*show) {
      std::cout << io::serialize_config(load_config(show_path));
      return kOk;
    }
    if (*g2) return run_g2(an);
    if (*cs) return run_cs(an);
    if (*wf) return run_waveform(an);
    if (*curve) return run_hom_curve(hm);
    if (*hfit) return run_hom_fit(hm);
    if (*bethe) return run_bethe(sp);
    if (*res) return run_resonance(sp);
    if (*fano) return run_fano(sp);
    if (*sfit) return run_spectrum_fit(sp);
    if (*repro) return run_repro(recipe, rp);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const io::TagFileError& e) {
    std::cerr << "tag file error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "analysis error: " << e.what() << '\n';
    return kAnalysis;
  }
  return kUsage;
}
