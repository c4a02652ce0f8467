#include "specgrad/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "specgrad/convnet.hpp"
#include "specgrad/errors.hpp"
#include "specgrad/rng.hpp"

namespace specgrad {

namespace {

using Clock = std::chrono::steady_clock;

volatile double g_sink = 0.0;  // keeps timed outputs from being optimized away

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

double measure_timer_resolution() {
  double best = 1.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto start = Clock::now();
    auto next = start;
    do {
      next = Clock::now();
    } while (next == start);
    best = std::min(best, seconds_between(start, next));
  }
  return best;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

Tensor make_dummy_audio(int batch, std::int64_t samples, std::uint64_t seed) {
  Tensor audio(Shape{batch, std::int64_t(1), samples});
  CounterRng rng(seed, 7);
  for (std::int64_t i = 0; i < audio.numel(); ++i) {
    audio[i] = static_cast<float>(rng.uniform(static_cast<std::uint64_t>(i)) - 0.5);
  }
  return audio;
}

// (batch, 1, samples) -> (batch, 1, n_bins, n_frames)
Tensor preprocess_batch(const Tensor& audio, const DftKernelBank& bank, const StftConfig& cfg) {
  const std::int64_t batch = audio.dim(0);
  const std::int64_t samples = audio.dim(2);
  const std::int64_t frames = stft_frame_count(samples, cfg.n_dft, cfg.n_hop);
  Tensor out(Shape{batch, std::int64_t(1), bank.n_bins, frames});
  for (std::int64_t b = 0; b < batch; ++b) {
    Tensor item(Shape{std::int64_t(1), samples},
                std::vector<float>(audio.data() + b * samples, audio.data() + (b + 1) * samples));
    StftOutput<float> stft = stft_conv(item, bank, cfg);
    Tensor power = power_spectrogram(stft.real, stft.imag, cfg.power_exponent);
    if (cfg.return_decibel) {
      power = amplitude_to_decibel(power);
    }
    std::copy(power.data(), power.data() + power.numel(),
              out.data() + b * bank.n_bins * frames);
  }
  return out;
}

}  // namespace

BenchReport run_benchmark(const BenchConfig& cfg) {
  if (cfg.depths.empty()) {
    throw ConfigError("benchmark: depth list is empty");
  }
  if (cfg.batch_size < 1 || cfg.batches < 1 || cfg.repeats < 1 || cfg.warmup_batches < 0) {
    throw ConfigError("benchmark: batch_size, batches and repeats must be >= 1");
  }
  if (cfg.dummy_audio_seconds <= 0.0 || cfg.sample_rate <= 0.0) {
    throw ConfigError("benchmark: audio length and sample rate must be positive");
  }
  validate(cfg.stft);

  const std::int64_t samples =
      static_cast<std::int64_t>(std::llround(cfg.dummy_audio_seconds * cfg.sample_rate));
  if (samples < cfg.stft.n_dft) {
    throw ConfigError("benchmark: dummy audio shorter than n_dft");
  }

  const Tensor audio = make_dummy_audio(cfg.batch_size, samples, cfg.seed);
  const DftKernelBank bank = build_dft_kernels<float>(cfg.stft);
  const Tensor precomputed = preprocess_batch(audio, bank, cfg.stft);
  const std::int64_t n_bins = precomputed.dim(2);
  const std::int64_t n_frames = precomputed.dim(3);

  BenchReport report;
  report.timer_resolution_s = measure_timer_resolution();

  double min_median = std::numeric_limits<double>::infinity();
  for (int depth : cfg.depths) {
    ConvNet net(build_bench_net(depth, n_bins, n_frames));
    net.randomize_weights(cfg.seed + static_cast<std::uint64_t>(depth));

    auto run_with = [&] {
      Tensor spec = preprocess_batch(audio, bank, cfg.stft);
      Tensor y = net.forward(spec, cfg.parallel);
      g_sink = g_sink + y[0];
    };
    auto run_without = [&] {
      Tensor y = net.forward(precomputed, cfg.parallel);
      g_sink = g_sink + y[0];
    };

    for (int i = 0; i < cfg.warmup_batches; ++i) {
      run_with();
      run_without();
    }

    std::vector<double> with_times, without_times;
    with_times.reserve(static_cast<std::size_t>(cfg.repeats * cfg.batches));
    without_times.reserve(static_cast<std::size_t>(cfg.repeats * cfg.batches));
    double with_total = 0.0, without_total = 0.0;
    // Arms interleave per repeat so slow drift hits both equally.
    for (int r = 0; r < cfg.repeats; ++r) {
      for (int b = 0; b < cfg.batches; ++b) {
        const auto t0 = Clock::now();
        run_with();
        const auto t1 = Clock::now();
        with_times.push_back(seconds_between(t0, t1));
        with_total += with_times.back();
      }
      for (int b = 0; b < cfg.batches; ++b) {
        const auto t0 = Clock::now();
        run_without();
        const auto t1 = Clock::now();
        without_times.push_back(seconds_between(t0, t1));
        without_total += without_times.back();
      }
    }

    const std::string suffix = cfg.parallel ? "+parallel" : "";
    BenchRecord with_rec{"depth" + std::to_string(depth) + "+preprocessing" + suffix,
                         depth,
                         true,
                         cfg.batch_size,
                         cfg.batches,
                         with_total,
                         quantile(with_times, 0.5),
                         quantile(with_times, 0.1),
                         quantile(with_times, 0.9),
                         net.param_count()};
    BenchRecord without_rec{"depth" + std::to_string(depth) + "+precomputed" + suffix,
                            depth,
                            false,
                            cfg.batch_size,
                            cfg.batches,
                            without_total,
                            quantile(without_times, 0.5),
                            quantile(without_times, 0.1),
                            quantile(without_times, 0.9),
                            net.param_count()};
    report.ratio[depth] = with_rec.median_batch_s / without_rec.median_batch_s;
    report.overhead_s[depth] = with_rec.median_batch_s - without_rec.median_batch_s;
    min_median = std::min({min_median, with_rec.median_batch_s, without_rec.median_batch_s});
    report.records.push_back(std::move(with_rec));
    report.records.push_back(std::move(without_rec));
  }

  report.timer_reliable = report.timer_resolution_s < 0.01 * min_median;
  return report;
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << "depth,arm,batch_size,median_s,p10_s,p90_s,ratio\n";
  for (const BenchRecord& rec : report.records) {
    out << rec.depth << ',' << (rec.with_preprocessing ? "with" : "without") << ','
        << rec.batch_size << ',' << rec.median_batch_s << ',' << rec.p10_batch_s << ','
        << rec.p90_batch_s << ',' << report.ratio.at(rec.depth) << '\n';
  }
}

void write_jsonl(const BenchReport& report, std::ostream& out) {
  for (const BenchRecord& rec : report.records) {
    nlohmann::json j{{"config_name", rec.config_name},
                     {"depth", rec.depth},
                     {"with_preprocessing", rec.with_preprocessing},
                     {"batch_size", rec.batch_size},
                     {"batches", rec.batches},
                     {"wall_time_total_s", rec.wall_time_total_s},
                     {"median_batch_s", rec.median_batch_s},
                     {"p10_batch_s", rec.p10_batch_s},
                     {"p90_batch_s", rec.p90_batch_s},
                     {"param_count", rec.param_count},
                     {"ratio", report.ratio.at(rec.depth)},
                     {"overhead_s", report.overhead_s.at(rec.depth)},
                     {"timer_reliable", report.timer_reliable}};
    out << j.dump() << '\n';
  }
}

}  // namespace specgrad
