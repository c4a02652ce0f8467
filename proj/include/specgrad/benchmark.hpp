#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "specgrad/time_frequency.hpp"

namespace specgrad {

struct BenchConfig {
  std::vector<int> depths{1, 3, 5, 7};
  int batch_size = 2;
  int batches = 2;
  int repeats = 8;        // timed repetitions per arm
  int warmup_batches = 3; // untimed, amortizes allocator effects
  double dummy_audio_seconds = 4.0;
  double sample_rate = 32000.0;
  StftConfig stft{512, 256, 32000.0, Window::kHann, /*return_decibel=*/true, 2.0};
  std::uint64_t seed = 0x5eedf00d;
  bool parallel = false;
};

struct BenchRecord {
  std::string config_name;
  int depth = 0;
  bool with_preprocessing = false;
  int batch_size = 0;
  int batches = 0;
  double wall_time_total_s = 0.0;
  double median_batch_s = 0.0;
  double p10_batch_s = 0.0;
  double p90_batch_s = 0.0;
  std::int64_t param_count = 0;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::map<int, double> ratio;      // per depth: median with / median without
  std::map<int, double> overhead_s; // per depth: median with - median without
  double timer_resolution_s = 0.0;
  bool timer_reliable = true;
};

// Times forward passes of (preprocessing + net) against (net on precomputed
// spectrograms) for every configured depth. Dummy audio is generated once,
// before any timing, from the seed; the precomputed arm never pays for
// preprocessing inside its timer.
BenchReport run_benchmark(const BenchConfig& cfg);

// Columns: depth, arm, batch_size, median_s, p10_s, p90_s, ratio.
void write_csv(const BenchReport& report, std::ostream& out);

// One JSON object per record.
void write_jsonl(const BenchReport& report, std::ostream& out);

}  // namespace specgrad
