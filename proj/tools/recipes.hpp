#pragma once

// End-to-end recipes behind `qplas repro`. Each returns a CSV table plus a few
// human-readable summary lines; all randomness is keyed on the given seed.

#include <string>
#include <vector>

#include "qplas/qplas.hpp"

namespace qplas::tools {

struct RecipeOutput {
  io::CsvTable table;
  std::vector<std::string> summary;
};

inline std::string fmt(double x) { return io::csv_number(x); }

inline ExperimentSetup arm_setup(io::ExperimentConfig c, bool reemitted) {
  c.sample.enabled = reemitted;
  return io::to_setup(c);
}

inline const char* arm_name(bool reemitted) { return reemitted ? "reemitted" : "incident"; }

/// Cauchy-Schwarz curves at 1, 2, 4 and 8 ns bins for both arms.
inline RecipeOutput repro_cauchy_schwarz(io::ExperimentConfig c, TimePs duration) {
  c.idler_split = true;
  RecipeOutput out{io::CsvTable({"arm", "bin_ns", "tau_ns", "value", "error"}), {}};
  for (bool reemitted : {false, true}) {
    const auto stream = run_experiment(arm_setup(c, reemitted), duration, c.seed).merged();
    for (TimePs bin : {1000, 2000, 4000, 8000}) {
      CauchySchwarzOptions opt;
      opt.bin_width = bin;
      opt.tau_min = -c.analysis.window;
      opt.tau_max = c.analysis.window;
      opt.auto_half_window = c.analysis.auto_window;
      const auto r = cauchy_schwarz(stream, opt);
      for (std::size_t k = 0; k < r.size(); ++k)
        out.table.add_row({arm_name(reemitted), fmt(ps_to_ns(bin)), fmt(r.tau[k]), fmt(r.values[k]), fmt(r.errors[k])});
      const auto p = r.peak_index();
      out.summary.push_back(std::string(arm_name(reemitted)) + " bin " + fmt(ps_to_ns(bin)) + " ns: peak C = " +
                            fmt(r.values[p]) + " +- " + fmt(r.errors[p]) + " at " + fmt(r.tau[p]) + " ns");
    }
  }
  return out;
}

struct ShapeCase {
  const char* name;
  io::ModulationSpec modulation;
  WavepacketShape fit_shape;
};

inline std::vector<ShapeCase> waveform_cases() {
  io::ModulationSpec none, step, gauss;
  step.kind = ModulationKind::Heaviside;
  gauss.kind = ModulationKind::Gaussian;
  gauss.fwhm = 40.0;
  return {{"double_exponential", none, WavepacketShape::DoubleExponential},
          {"exponential_decay", step, WavepacketShape::ExponentialDecay},
          {"gaussian", gauss, WavepacketShape::Gaussian}};
}

/// Heralded waveforms of the three shapes, incident and reemitted.
inline RecipeOutput repro_waveforms(io::ExperimentConfig c, TimePs duration) {
  RecipeOutput out{io::CsvTable({"shape", "arm", "tau_ns", "counts", "error"}), {}};
  for (const auto& sc : waveform_cases()) {
    c.modulation = sc.modulation;
    TemporalWaveform w[2];
    for (bool reemitted : {false, true}) {
      const auto stream = run_experiment(arm_setup(c, reemitted), duration, c.seed).merged();
      w[reemitted] = reconstruct_waveform(stream, {channels::kHerald}, {channels::kReemitA, channels::kReemitB},
                                          c.analysis.bin_width, -150'000, 250'000);
      for (std::size_t k = 0; k < w[reemitted].size(); ++k)
        out.table.add_row({sc.name, arm_name(reemitted), fmt(w[reemitted].bin_center(k)), fmt(w[reemitted].counts[k]),
                           fmt(w[reemitted].errors[k])});
    }
    std::string line = std::string(sc.name) + ": similarity " + fmt(cosine_similarity(w[0], w[1]));
    const auto fit = fit_waveform(w[0], sc.fit_shape);
    line += ", incident fitted fwhm " + fmt(fit.amplitude.fwhm) + " +- " + fmt(fit.fwhm_error) + " ns";
    out.summary.push_back(line);
  }
  return out;
}

/// HOM coincidence curves at two optical delays and visibility against delay,
/// incident and reemitted (the latter corrected for sample transmittance).
inline RecipeOutput repro_hom(std::uint64_t seed, double transmittance) {
  RecipeOutput out{io::CsvTable({"kind", "arm", "optical_delay_ns", "detuning_mhz", "value", "error"}), {}};
  const BiphotonAmplitude amp{WavepacketShape::DoubleExponential, 50.0, 0.0};
  const auto grid = detuning_grid(20.0, 81);
  const RngSpec root{seed, 5};
  std::uint64_t tag = 0;
  for (double delay : {8.0, 42.5}) {
    HomCurve curves[2];
    for (bool reemitted : {false, true}) {
      const HomMeasurement m{20000.0, reemitted ? transmittance : 1.0};
      curves[reemitted] = simulate_hom_curve(amp, grid, delay, m, root.derive(++tag));
      const double scale = 2.0 * m.counts_at_half * m.transmittance;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = curves[reemitted].values[k];
        out.table.add_row({"hom", arm_name(reemitted), fmt(delay), fmt(grid[k]), fmt(v),
                           fmt(std::sqrt(std::max(v * scale, 1.0)) / scale)});
      }
    }
    const auto model = hom_curve(amp, grid, delay);
    for (std::size_t k = 0; k < grid.size(); ++k)
      out.table.add_row({"hom", "model", fmt(delay), fmt(grid[k]), fmt(model.values[k]), "0"});
    out.summary.push_back("delay " + fmt(delay) + " ns: similarity " + fmt(hom_similarity(curves[0], curves[1])));
  }
  const std::vector<double> delays{0.0, 8.0, 20.0, 42.5, 60.0, 90.0, 130.0};
  for (bool reemitted : {false, true}) {
    const auto pts =
        simulate_visibility_points(amp, delays, {20000.0, reemitted ? transmittance : 1.0}, root.derive(++tag));
    for (const auto& p : pts)
      out.table.add_row({"visibility", arm_name(reemitted), fmt(p.optical_delay), "", fmt(p.visibility), fmt(p.error)});
    const auto fit = fit_coherence_time(pts, WavepacketShape::DoubleExponential);
    out.summary.push_back(std::string(arm_name(reemitted)) + ": coherence fwhm " + fmt(fit.fwhm) + " +- " +
                          fmt(fit.error) + " ns");
  }
  return out;
}

/// Heralded g2(0) for unshaped and step-shaped photons, incident and reemitted.
inline RecipeOutput repro_g2_table(io::ExperimentConfig c, TimePs duration) {
  RecipeOutput out{io::CsvTable({"waveform", "arm", "g2", "error", "heralds", "doubles_a", "doubles_b", "triples"}), {}};
  for (const auto& sc : waveform_cases()) {
    if (sc.modulation.kind == ModulationKind::Gaussian) continue;
    c.modulation = sc.modulation;
    for (bool reemitted : {false, true}) {
      const auto stream = run_experiment(arm_setup(c, reemitted), duration, c.seed).merged();
      const auto n = heralded_counts(stream, {channels::kHerald}, {channels::kReemitA}, {channels::kReemitB},
                                     -c.analysis.triple_window, c.analysis.triple_window);
      const auto g = heralded_g2_from_counts(n);
      out.table.add_row({sc.name, arm_name(reemitted), fmt(g.value), fmt(g.error), std::to_string(n.heralds),
                         std::to_string(n.doubles_a), std::to_string(n.doubles_b), std::to_string(n.triples)});
      out.summary.push_back(std::string(sc.name) + " " + arm_name(reemitted) + ": g2(0) = " + fmt(g.value) + " +- " +
                            fmt(g.error));
    }
  }
  return out;
}

}  // namespace qplas::tools
