#include <gtest/gtest.h>

#include "qplas/qplas.hpp"

using namespace qplas;

namespace {
std::vector<std::uint8_t> simulate_bytes(const io::ExperimentConfig& c, TimePs duration) {
  return io::encode_tags(run_experiment(io::to_setup(c), duration, c.seed).merged());
}
}  // namespace

TEST(Pipeline, SameSeedByteIdentical) {
  auto c = io::parse_config("experiment.idler_split = true\nmodulation.kind = gaussian\n");
  c.seed = 7;
  const auto a = simulate_bytes(c, 3 * kPsPerSecond);
  EXPECT_EQ(a, simulate_bytes(c, 3 * kPsPerSecond));
  c.seed = 8;
  EXPECT_NE(a, simulate_bytes(c, 3 * kPsPerSecond));
}

TEST(Pipeline, AnalysisOutputDeterministic) {
  const auto c = io::parse_config("experiment.idler_split = true\n");
  const auto s = run_experiment(io::to_setup(c), 2 * kPsPerSecond, 3).merged();
  const auto r1 = cauchy_schwarz(s, {});
  const auto r2 = cauchy_schwarz(io::decode_tags(io::encode_tags(s)), {});
  EXPECT_EQ(io::curve_table(r1.tau, r1.values, r1.errors).str(), io::curve_table(r2.tau, r2.values, r2.errors).str());
}

TEST(Pipeline, IncidentAndReemittedWaveformsAlike) {
  auto c = io::ExperimentConfig{};
  c.source.pair_rate = 20000.0;
  auto setup = io::to_setup(c);
  const auto reemitted = run_experiment(setup, 10 * kPsPerSecond, 4).merged();
  setup.sample_in_path = false;
  const auto incident = run_experiment(setup, 10 * kPsPerSecond, 4).merged();
  const auto wi = reconstruct_waveform(incident, {0}, {1, 2}, 4000, -300'000, 300'000);
  const auto wr = reconstruct_waveform(reemitted, {0}, {1, 2}, 4000, -300'000, 300'000);
  EXPECT_GE(cosine_similarity(wi, wr), 0.99);
}
