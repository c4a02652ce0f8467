// Command-line front end: spectrograms and mel-spectrograms from WAV files,
// filterbank export, gradient checking, and the preprocessing-overhead
// benchmark. Exit codes: 0 success, 1 check/benchmark failure, 2 usage error,
// 3 I/O error.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specgrad/audio_io.hpp"
#include "specgrad/benchmark.hpp"
#include "specgrad/convnet.hpp"
#include "specgrad/gradients.hpp"
#include "specgrad/norm_augment.hpp"
#include "specgrad/time_frequency.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct StftFlags {
  int n_dft = 512;
  int n_hop = -1;  // -1: default to n_dft / 2
  std::string window = "hann";
  bool decibel = false;
  double power = 2.0;
  double expect_sr = -1.0;  // reject files whose rate differs when set
};

void add_stft_flags(CLI::App* cmd, StftFlags& flags) {
  cmd->add_option("--n_dft", flags.n_dft, "DFT window length in samples (power of two)")
      ->capture_default_str();
  cmd->add_option("--n_hop", flags.n_hop, "hop in samples (default n_dft/2)");
  cmd->add_option("--window", flags.window, "analysis window")
      ->check(CLI::IsMember({"hann", "rect"}))
      ->capture_default_str();
  cmd->add_flag("--db", flags.decibel, "decibel-scale the output");
  cmd->add_option("--power", flags.power, "spectrogram power exponent")->capture_default_str();
  cmd->add_option("--sr", flags.expect_sr,
                  "expected sample rate; mismatching input files are rejected");
}

specgrad::StftConfig to_config(const StftFlags& flags, double sample_rate) {
  specgrad::StftConfig cfg;
  cfg.n_dft = flags.n_dft;
  cfg.n_hop = flags.n_hop < 0 ? flags.n_dft / 2 : flags.n_hop;
  cfg.sample_rate = sample_rate;
  cfg.window = flags.window == "rect" ? specgrad::Window::kRectangular : specgrad::Window::kHann;
  cfg.return_decibel = flags.decibel;
  cfg.power_exponent = flags.power;
  specgrad::validate(cfg);
  return cfg;
}

specgrad::AudioBuffer load_audio(const std::string& path, const StftFlags& flags) {
  specgrad::AudioBuffer audio = specgrad::read_wav(path);
  if (flags.expect_sr > 0.0 && audio.sample_rate != flags.expect_sr) {
    throw specgrad::ConfigError("--sr: file " + path + " has sample rate " +
                                std::to_string(audio.sample_rate) + ", expected " +
                                std::to_string(flags.expect_sr) + " (resampling not supported)");
  }
  return audio;
}

void print_tensor_summary(const specgrad::Tensor& t) {
  float lo = t[0], hi = t[0];
  for (std::int64_t i = 1; i < t.numel(); ++i) {
    lo = std::min(lo, t[i]);
    hi = std::max(hi, t[i]);
  }
  std::cout << "shape=" << t.shape().to_string() << " min=" << lo << " max=" << hi << "\n";
}

specgrad::FilterScale parse_scale(const std::string& name) {
  static const std::map<std::string, specgrad::FilterScale> table{
      {"mel", specgrad::FilterScale::kMel},
      {"log", specgrad::FilterScale::kLog},
      {"linear", specgrad::FilterScale::kLinear},
      {"random", specgrad::FilterScale::kRandom}};
  return table.at(name);
}

void trim(std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  const auto end = s.find_last_not_of(" \t\r");
  s = begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
}

// Flat key=value configuration with '#' comments. Keys name the subcommand's
// long options; values for options already given on the command line are
// ignored, so explicit flags always win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw specgrad::IoError("cannot open config file " + path);
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw specgrad::ConfigError("--config: line " + std::to_string(line_no) +
                                  " is not a key=value pair");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    trim(key);
    trim(value);
    CLI::Option* option = cmd->get_option_no_throw("--" + key);
    if (option == nullptr) {
      throw specgrad::ConfigError("--config: unknown key '" + key + "' at line " +
                                  std::to_string(line_no));
    }
    if (option->count() > 0) continue;
    option->add_result(value);
    option->run_callback();
  }
}

int cmd_spectrogram(const std::string& input, const std::string& output,
                    const StftFlags& flags) {
  specgrad::AudioBuffer audio = load_audio(input, flags);
  specgrad::StftConfig cfg = to_config(flags, audio.sample_rate);
  specgrad::DftKernelBank bank = specgrad::build_dft_kernels<float>(cfg);
  specgrad::StftOutput<float> stft = specgrad::stft_conv(audio.samples, bank, cfg);
  specgrad::Tensor out = specgrad::power_spectrogram(stft.real, stft.imag, cfg.power_exponent);
  if (cfg.return_decibel) {
    out = specgrad::amplitude_to_decibel(out);
  }
  specgrad::write_tensor(output, out);
  print_tensor_summary(out);
  std::cout << "wrote " << output << "\n";
  return kExitOk;
}

struct MelFlags {
  int n_mels = 128;
  double fmin = 0.0;
  double fmax = -1.0;  // -1: default to sr/2
  std::string scale = "mel";
  std::uint64_t seed = 0;
};

void add_mel_flags(CLI::App* cmd, MelFlags& flags) {
  cmd->add_option("--n_mels", flags.n_mels, "number of filterbank bands")->capture_default_str();
  cmd->add_option("--fmin", flags.fmin, "lowest filter frequency in Hz")->capture_default_str();
  cmd->add_option("--fmax", flags.fmax, "highest filter frequency in Hz (default sr/2)");
  cmd->add_option("--scale", flags.scale, "filterbank frequency scale")
      ->check(CLI::IsMember({"mel", "log", "linear", "random"}))
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "seed for the random scale")->capture_default_str();
}

specgrad::FilterbankConfig to_fb_config(const MelFlags& flags, int n_dft, double sample_rate) {
  specgrad::FilterbankConfig fb;
  fb.scale = parse_scale(flags.scale);
  fb.n_bands = flags.n_mels;
  fb.n_bins = n_dft / 2 + 1;
  fb.sample_rate = sample_rate;
  fb.fmin = flags.fmin;
  fb.fmax = flags.fmax < 0.0 ? sample_rate / 2.0 : flags.fmax;
  fb.seed = flags.seed;
  return fb;
}

int cmd_melspectrogram(const std::string& input, const std::string& output,
                       const StftFlags& flags, const MelFlags& mel_flags) {
  specgrad::AudioBuffer audio = load_audio(input, flags);
  specgrad::StftConfig cfg = to_config(flags, audio.sample_rate);
  specgrad::Filterbank fb =
      specgrad::build_filterbank<float>(to_fb_config(mel_flags, cfg.n_dft, audio.sample_rate));
  for (const std::string& warning : fb.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  specgrad::DftKernelBank bank = specgrad::build_dft_kernels<float>(cfg);
  specgrad::Tensor out = specgrad::melspectrogram(audio.samples, bank, fb, cfg);
  specgrad::write_tensor(output, out);
  print_tensor_summary(out);
  std::cout << "wrote " << output << "\n";
  return kExitOk;
}

int cmd_filterbank(const std::string& output, int n_dft, double sample_rate,
                   const MelFlags& mel_flags) {
  if (!specgrad::is_power_of_two(n_dft)) {
    throw specgrad::ConfigError("--n_dft must be a power of two, got " + std::to_string(n_dft));
  }
  specgrad::Filterbank fb =
      specgrad::build_filterbank<float>(to_fb_config(mel_flags, n_dft, sample_rate));
  for (const std::string& warning : fb.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  specgrad::write_tensor(output, fb.weights);
  print_tensor_summary(fb.weights);
  std::cout << "wrote " << output << "\n";
  return kExitOk;
}

struct GradcheckFlags {
  int precision = 64;
  std::uint64_t seed = 1;
  double threshold = -1.0;  // -1: 1e-6 for 64-bit, 1e-3 for 32-bit
  int n_dft = 8;
  int samples = 32;
  int channels = 1;
  int n_mels = 4;
};

template <class T>
specgrad::TensorT<T> random_tensor(specgrad::Shape shape, specgrad::CounterRng& rng,
                                   std::uint64_t& cursor, double lo, double hi) {
  specgrad::TensorT<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    t[i] = static_cast<T>(lo + (hi - lo) * rng.uniform(cursor++));
  }
  return t;
}

template <class T>
double weighted_sum(const specgrad::TensorT<T>& values, const specgrad::TensorT<T>& weights) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < values.numel(); ++i) {
    acc += static_cast<double>(values[i]) * static_cast<double>(weights[i]);
  }
  return acc;
}

struct GradcheckRow {
  std::string name;
  specgrad::FdReport report;
};

// Every suite uses loss = sum(upstream .* forward(x)) with a fixed random
// upstream, so the analytic gradient is exactly the backward pass of that
// upstream.
template <class T>
std::vector<GradcheckRow> run_gradcheck_suites(const GradcheckFlags& flags) {
  using specgrad::Shape;
  using specgrad::TensorT;
  std::vector<GradcheckRow> rows;
  specgrad::CounterRng rng(flags.seed);
  std::uint64_t cursor = 0;

  specgrad::StftConfig cfg;
  cfg.n_dft = flags.n_dft;
  cfg.n_hop = std::max(1, flags.n_dft / 4);
  cfg.sample_rate = 8000.0;
  cfg.window = specgrad::Window::kHann;
  cfg.power_exponent = 2.0;
  specgrad::validate(cfg);
  if (flags.samples < flags.n_dft) {
    throw specgrad::ConfigError("--samples must be >= --n_dft");
  }

  const auto bank = specgrad::build_dft_kernels<T>(cfg);
  const std::int64_t n_frames =
      specgrad::stft_frame_count(flags.samples, cfg.n_dft, cfg.n_hop);
  const Shape spec_shape{flags.channels, bank.n_bins, n_frames};

  auto audio = random_tensor<T>(Shape{flags.channels, flags.samples}, rng, cursor, -1.0, 1.0);
  auto up_real = random_tensor<T>(spec_shape, rng, cursor, -1.0, 1.0);
  auto up_imag = random_tensor<T>(spec_shape, rng, cursor, -1.0, 1.0);

  // stft_conv
  {
    auto grads = specgrad::stft_backward(audio, bank, cfg, up_real, up_imag);
    auto loss = [&](const TensorT<T>& x) {
      auto out = specgrad::stft_conv(x, bank, cfg);
      return weighted_sum(out.real, up_real) + weighted_sum(out.imag, up_imag);
    };
    rows.push_back({"stft/d_audio", specgrad::finite_difference_check<T>(
                                        loss, audio, grads.d_input, 0.0, 256, flags.seed)});
    auto loss_cos = [&](const TensorT<T>& cos_kernels) {
      specgrad::DftKernelBankT<T> b{cos_kernels, bank.sin_kernels, bank.n_dft, bank.n_bins};
      auto out = specgrad::stft_conv(audio, b, cfg);
      return weighted_sum(out.real, up_real) + weighted_sum(out.imag, up_imag);
    };
    rows.push_back({"stft/d_cos_kernels",
                    specgrad::finite_difference_check<T>(loss_cos, bank.cos_kernels,
                                                         grads.d_params.at("cos_kernels"), 0.0,
                                                         256, flags.seed)});
    auto loss_sin = [&](const TensorT<T>& sin_kernels) {
      specgrad::DftKernelBankT<T> b{bank.cos_kernels, sin_kernels, bank.n_dft, bank.n_bins};
      auto out = specgrad::stft_conv(audio, b, cfg);
      return weighted_sum(out.real, up_real) + weighted_sum(out.imag, up_imag);
    };
    rows.push_back({"stft/d_sin_kernels",
                    specgrad::finite_difference_check<T>(loss_sin, bank.sin_kernels,
                                                         grads.d_params.at("sin_kernels"), 0.0,
                                                         256, flags.seed)});
  }

  // apply_filterbank
  specgrad::FilterbankConfig fb_cfg;
  fb_cfg.scale = specgrad::FilterScale::kMel;
  fb_cfg.n_bands = flags.n_mels;
  fb_cfg.n_bins = bank.n_bins;
  fb_cfg.sample_rate = cfg.sample_rate;
  fb_cfg.fmin = 0.0;
  fb_cfg.fmax = cfg.sample_rate / 2.0;
  auto fb = specgrad::build_filterbank<T>(fb_cfg);
  const Shape mel_shape{flags.channels, flags.n_mels, n_frames};
  {
    auto power = random_tensor<T>(spec_shape, rng, cursor, 0.1, 2.0);
    auto up_mel = random_tensor<T>(mel_shape, rng, cursor, -1.0, 1.0);
    auto grads = specgrad::filterbank_backward(fb, power, up_mel);
    auto loss_w = [&](const TensorT<T>& weights) {
      specgrad::FilterbankT<T> f{weights, fb.config, {}, {}};
      return weighted_sum(specgrad::apply_filterbank(f, power), up_mel);
    };
    rows.push_back({"filterbank/d_weights",
                    specgrad::finite_difference_check<T>(
                        loss_w, fb.weights, grads.d_params.at("filterbank_weights"), 0.0, 256,
                        flags.seed)});
    auto loss_s = [&](const TensorT<T>& spec) {
      return weighted_sum(specgrad::apply_filterbank(fb, spec), up_mel);
    };
    rows.push_back({"filterbank/d_input", specgrad::finite_difference_check<T>(
                                               loss_s, power, grads.d_input, 0.0, 256,
                                               flags.seed)});
  }

  // amplitude_to_decibel, on values away from both the floor and the clamp
  {
    auto t = random_tensor<T>(spec_shape, rng, cursor, 0.1, 10.0);
    auto up = random_tensor<T>(spec_shape, rng, cursor, -1.0, 1.0);
    auto analytic = specgrad::decibel_backward(t, up);
    auto loss = [&](const TensorT<T>& x) {
      return weighted_sum(specgrad::amplitude_to_decibel(x), up);
    };
    rows.push_back({"decibel/d_input", specgrad::finite_difference_check<T>(
                                           loss, t, analytic, 0.0, 256, flags.seed)});
  }

  // composed pipeline: stft -> power -> filterbank -> weighted sum
  {
    auto up_mel = random_tensor<T>(mel_shape, rng, cursor, -1.0, 1.0);
    auto forward_from = [&](const TensorT<T>& x, const specgrad::DftKernelBankT<T>& b,
                            const specgrad::FilterbankT<T>& f) {
      auto out = specgrad::stft_conv(x, b, cfg);
      auto power = specgrad::power_spectrogram(out.real, out.imag, cfg.power_exponent);
      return weighted_sum(specgrad::apply_filterbank(f, power), up_mel);
    };
    auto stft = specgrad::stft_conv(audio, bank, cfg);
    auto power = specgrad::power_spectrogram(stft.real, stft.imag, cfg.power_exponent);
    auto fb_grads = specgrad::filterbank_backward(fb, power, up_mel);
    auto [d_real, d_imag] = specgrad::power_spectrogram_backward(
        stft.real, stft.imag, cfg.power_exponent, fb_grads.d_input);
    auto stft_grads = specgrad::stft_backward(audio, bank, cfg, d_real, d_imag);

    auto loss_audio = [&](const TensorT<T>& x) { return forward_from(x, bank, fb); };
    rows.push_back({"composed/d_audio",
                    specgrad::finite_difference_check<T>(loss_audio, audio, stft_grads.d_input,
                                                         0.0, 256, flags.seed)});
    auto loss_cos = [&](const TensorT<T>& cos_kernels) {
      specgrad::DftKernelBankT<T> b{cos_kernels, bank.sin_kernels, bank.n_dft, bank.n_bins};
      return forward_from(audio, b, fb);
    };
    rows.push_back({"composed/d_cos_kernels",
                    specgrad::finite_difference_check<T>(
                        loss_cos, bank.cos_kernels, stft_grads.d_params.at("cos_kernels"), 0.0,
                        256, flags.seed)});
    auto loss_w = [&](const TensorT<T>& weights) {
      specgrad::FilterbankT<T> f{weights, fb.config, {}, {}};
      return forward_from(audio, bank, f);
    };
    rows.push_back({"composed/d_fb_weights",
                    specgrad::finite_difference_check<T>(
                        loss_w, fb.weights, fb_grads.d_params.at("filterbank_weights"), 0.0, 256,
                        flags.seed)});
  }

  return rows;
}

int cmd_gradcheck(const GradcheckFlags& flags) {
  const double threshold =
      flags.threshold >= 0.0 ? flags.threshold : (flags.precision == 64 ? 1e-6 : 1e-3);
  std::vector<GradcheckRow> rows = flags.precision == 64
                                       ? run_gradcheck_suites<double>(flags)
                                       : run_gradcheck_suites<float>(flags);
  bool ok = true;
  std::printf("%-24s %-14s %s\n", "check", "max_rel_err", "result");
  for (const GradcheckRow& row : rows) {
    const bool pass = row.report.forward_finite && row.report.max_rel_err <= threshold;
    ok = ok && pass;
    std::printf("%-24s %-14.3e %s\n", row.name.c_str(), row.report.max_rel_err,
                pass ? "ok" : "FAIL");
    if (!pass) {
      std::printf("  worst coordinate %lld: analytic=%.9e numeric=%.9e\n",
                  static_cast<long long>(row.report.worst_index), row.report.worst_analytic,
                  row.report.worst_numeric);
    }
  }
  std::printf("threshold %.3e (%d-bit)\n", threshold, flags.precision);
  return ok ? kExitOk : kExitCheckFailed;
}

struct BenchFlags {
  specgrad::BenchConfig cfg;
  std::string csv_path;
  std::string jsonl_path;
  bool full_scale = false;
  bool force = false;
};

int cmd_bench(BenchFlags& flags, bool batch_size_given) {
  if (flags.full_scale) {
    flags.cfg.dummy_audio_seconds = 30.0;
    flags.cfg.sample_rate = 32000.0;
    if (!batch_size_given) flags.cfg.batch_size = 16;
  }
  const std::int64_t ref_params =
      specgrad::param_count(specgrad::build_reference_net(257, 124));
  std::printf("reference net (257 bins): %lld parameters\n",
              static_cast<long long>(ref_params));

  specgrad::BenchReport report = specgrad::run_benchmark(flags.cfg);

  std::printf("%-7s %-14s %-14s %-10s %-12s\n", "depth", "with_s/batch", "without_s/batch",
              "ratio", "overhead_s");
  for (std::size_t i = 0; i + 1 < report.records.size(); i += 2) {
    const auto& with_rec = report.records[i];
    const auto& without_rec = report.records[i + 1];
    std::printf("%-7d %-14.4f %-14.4f %-10.4f %-12.4f\n", with_rec.depth,
                with_rec.median_batch_s, without_rec.median_batch_s,
                report.ratio.at(with_rec.depth), report.overhead_s.at(with_rec.depth));
  }
  std::printf("timer resolution %.2e s (%s)\n", report.timer_resolution_s,
              report.timer_reliable ? "reliable" : "UNRELIABLE");

  auto write_report = [](const std::string& path, auto writer) {
    const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw specgrad::IoError("cannot open " + tmp);
      writer(out);
      if (!out) {
        std::filesystem::remove(tmp);
        throw specgrad::IoError("failed writing " + tmp);
      }
    }
    std::filesystem::rename(tmp, path);
    std::cout << "wrote " << path << "\n";
  };
  if (!flags.csv_path.empty()) {
    write_report(flags.csv_path,
                 [&](std::ostream& out) { specgrad::write_csv(report, out); });
  }
  if (!flags.jsonl_path.empty()) {
    write_report(flags.jsonl_path,
                 [&](std::ostream& out) { specgrad::write_jsonl(report, out); });
  }
  if (!report.timer_reliable && !flags.force) {
    std::cerr << "timer resolution too coarse for per-batch times; rerun with --force to keep "
                 "the report\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable audio preprocessing toolkit"};
  app.require_subcommand(1);
  std::string config_path;

  // spectrogram
  auto* spec_cmd = app.add_subcommand("spectrogram", "compute a spectrogram from a WAV file");
  std::string spec_input, spec_output;
  StftFlags spec_flags;
  spec_cmd->add_option("input", spec_input, "input WAV file")->required();
  spec_cmd->add_option("--out", spec_output, "output tensor file (KTF1)")->required();
  add_stft_flags(spec_cmd, spec_flags);
  spec_cmd->add_option("--config", config_path, "read options from a key=value file");

  // melspectrogram
  auto* mel_cmd =
      app.add_subcommand("melspectrogram", "compute a mel-spectrogram from a WAV file");
  std::string mel_input, mel_output;
  StftFlags mel_stft_flags;
  MelFlags mel_flags;
  mel_cmd->add_option("input", mel_input, "input WAV file")->required();
  mel_cmd->add_option("--out", mel_output, "output tensor file (KTF1)")->required();
  add_stft_flags(mel_cmd, mel_stft_flags);
  add_mel_flags(mel_cmd, mel_flags);
  mel_cmd->add_option("--config", config_path, "read options from a key=value file");

  // filterbank
  auto* fb_cmd = app.add_subcommand("filterbank", "build a filterbank matrix and export it");
  std::string fb_output;
  int fb_n_dft = 512;
  double fb_sr = 22050.0;
  MelFlags fb_flags;
  fb_cmd->add_option("--out", fb_output, "output tensor file (KTF1)")->required();
  fb_cmd->add_option("--n_dft", fb_n_dft, "DFT size the filterbank will be applied to")
      ->capture_default_str();
  fb_cmd->add_option("--sr", fb_sr, "sample rate in Hz")->capture_default_str();
  add_mel_flags(fb_cmd, fb_flags);
  fb_cmd->add_option("--config", config_path, "read options from a key=value file");

  // gradcheck
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "verify analytic gradients with finite differences");
  GradcheckFlags grad_flags;
  grad_cmd->add_option("--precision", grad_flags.precision, "scalar precision")
      ->check(CLI::IsMember({32, 64}))
      ->capture_default_str();
  grad_cmd->add_option("--seed", grad_flags.seed, "seed for test instances")
      ->capture_default_str();
  grad_cmd->add_option("--threshold", grad_flags.threshold,
                       "max relative error allowed (default 1e-6 for 64-bit, 1e-3 for 32-bit)");
  grad_cmd->add_option("--n_dft", grad_flags.n_dft, "DFT size of the test instance")
      ->capture_default_str();
  grad_cmd->add_option("--samples", grad_flags.samples, "audio length of the test instance")
      ->capture_default_str();
  grad_cmd->add_option("--channels", grad_flags.channels, "channels of the test instance")
      ->capture_default_str();
  grad_cmd->add_option("--n_mels", grad_flags.n_mels, "filterbank bands of the test instance")
      ->capture_default_str();
  grad_cmd->add_option("--config", config_path, "read options from a key=value file");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time forward passes with and without "
                                                "on-the-fly preprocessing");
  BenchFlags bench_flags;
  bench_cmd->add_option("--depths", bench_flags.cfg.depths, "conv layer counts to sweep")
      ->delimiter(',')
      ->capture_default_str();
  auto* batch_opt = bench_cmd->add_option("--batch_size", bench_flags.cfg.batch_size,
                                          "items per batch")->capture_default_str();
  bench_cmd->add_option("--batches", bench_flags.cfg.batches, "batches per timed repeat")
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench_flags.cfg.repeats, "timed repeats per arm")
      ->capture_default_str();
  bench_cmd->add_option("--seconds", bench_flags.cfg.dummy_audio_seconds,
                        "dummy clip length in seconds")
      ->capture_default_str();
  bench_cmd->add_option("--sr", bench_flags.cfg.sample_rate, "dummy clip sample rate")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_flags.cfg.seed, "seed for dummy data and weights")
      ->capture_default_str();
  bench_cmd->add_option("--csv", bench_flags.csv_path, "write the report as CSV");
  bench_cmd->add_option("--jsonl", bench_flags.jsonl_path,
                        "write the report as line-delimited JSON");
  bench_cmd->add_flag("--parallel", bench_flags.cfg.parallel,
                      "evaluate batch items on separate threads (reported separately)");
  bench_cmd->add_flag("--full_scale", bench_flags.full_scale,
                      "use 30-second clips at 32 kHz and batch size 16");
  bench_cmd->add_flag("--force", bench_flags.force, "keep going when the timer is unreliable");
  bench_cmd->add_option("--config", config_path, "read options from a key=value file");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      for (CLI::App* sub : app.get_subcommands()) {
        apply_config_file(sub, config_path);
      }
    }
    if (*spec_cmd) return cmd_spectrogram(spec_input, spec_output, spec_flags);
    if (*mel_cmd) return cmd_melspectrogram(mel_input, mel_output, mel_stft_flags, mel_flags);
    if (*fb_cmd) return cmd_filterbank(fb_output, fb_n_dft, fb_sr, fb_flags);
    if (*grad_cmd) return cmd_gradcheck(grad_flags);
    if (*bench_cmd) return cmd_bench(bench_flags, batch_opt->count() > 0);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const specgrad::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {  // DomainError, ConfigError
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
