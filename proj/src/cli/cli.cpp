#include "domino/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "domino/counting.hpp"
#include "domino/errors.hpp"
#include "domino/metrics.hpp"
#include "domino/noise.hpp"
#include "domino/trainer.hpp"

namespace domino::cli {

namespace fs = std::filesystem;
using imaging::Image;

namespace {

// Training knobs shared by denoise and benchmark.
struct TrainFlags {
  std::uint64_t seed = 0;
  int channels = 48;
  int epoch_len = 500;
  int patience = 30;
  long max_iters = 100000;
  double lr = 1e-4;
  int check_interval = 250;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Run seed");
    cmd->add_option("--channels", channels, "Feature channels per stage")->check(CLI::PositiveNumber);
    cmd->add_option("--epoch-len", epoch_len, "Iterations per epoch")->check(CLI::PositiveNumber);
    cmd->add_option("--patience", patience, "Epochs (or checks) without improvement before halting")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--check-interval", check_interval, "n2f-domino validation interval")
        ->check(CLI::PositiveNumber);
  }

  trainer::DenoiseConfig config() const {
    trainer::DenoiseConfig cfg;
    cfg.seed = seed;
    cfg.channels = channels;
    cfg.epoch_len = epoch_len;
    cfg.patience = patience;
    cfg.max_iterations = max_iters;
    cfg.learning_rate = lr;
    cfg.n2f_check_interval = check_interval;
    return cfg;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- denoise

struct DenoiseArgs {
  std::string in;
  std::string out;
  std::string mode = "dd";
  std::string report;
  std::string save_weights;
  bool timing = false;
  TrainFlags train;
};

int cmd_denoise(const DenoiseArgs& a, std::ostream& out) {
  trainer::DenoiseConfig cfg = a.train.config();
  cfg.mode = trainer::parse_mode(a.mode);
  cfg.validate();
  const Image noisy = imaging::load_image(a.in);
  const auto t0 = std::chrono::steady_clock::now();
  trainer::DenoiseResult result = trainer::run(noisy, cfg);
  if (a.timing) result.report.wall_time_s = seconds_since(t0);

  imaging::save_image(result.image, a.out);
  if (!a.report.empty()) {
    imaging::write_file_atomically(a.report, result.report.to_json().dump(2) + "\n");
  }
  if (!a.save_weights.empty()) nnet::save_checkpoint(result.network, a.save_weights);
  if (result.report.unresolved_pixels > 0) {
    out << "warning: " << result.report.unresolved_pixels
        << " pixels were never observed and keep their noisy value\n";
  }
  out << "iterations=" << result.report.iterations << " epochs=" << result.report.epochs
      << " halted=" << (result.report.halting_epoch ? "yes" : "no") << "\n";
  return kOk;
}

// -------------------------------------------------------------- add-noise

struct NoiseArgs {
  std::string in;
  std::string out;
  std::string kind = "gaussian";
  std::optional<double> sigma;
  std::optional<double> peak;
  std::uint64_t seed = 0;
};

int cmd_add_noise(const NoiseArgs& a, std::ostream& err) {
  imaging::NoiseSpec spec;
  if (a.kind == "gaussian") {
    if (!a.sigma) {
      err << "add-noise: --kind gaussian requires --sigma\n";
      return kInvalidArgs;
    }
    if (*a.sigma < 0) throw PreconditionError("--sigma must be non-negative");
    spec = imaging::NoiseSpec::gaussian(*a.sigma, derive_seed(a.seed, Stream::noise));
  } else {
    if (!a.peak) {
      err << "add-noise: --kind poisson requires --peak\n";
      return kInvalidArgs;
    }
    if (!(*a.peak > 0)) throw PreconditionError("--peak must be positive");
    spec = imaging::NoiseSpec::poisson(*a.peak, derive_seed(a.seed, Stream::noise));
  }
  const Image img = imaging::load_image(a.in);
  imaging::save_image(imaging::add_noise(img, spec), a.out);
  return kOk;
}

// ------------------------------------------------------------------- tile

struct TileArgs {
  std::string in;
  std::string out_even;
  std::string out_odd;
  std::string dump;
  std::string strategy = "domino";
  std::uint64_t seed = 0;
};

int cmd_tile(const TileArgs& a, std::ostream& err) {
  using tiling::Parity;
  const Image img = imaging::load_image(a.in);
  Image even;
  Image odd;
  if (a.strategy == "domino") {
    const tiling::DominoPair pair = tiling::pixel_domino_tilings(img);
    even = pair.filled.even;
    odd = pair.filled.odd;
    if (!a.dump.empty()) {
      std::ostringstream csv;
      for (const auto& d : pair.even_tiling.pairs) {
        csv << d.first.i << ',' << d.first.j << ',' << d.second.i << ',' << d.second.j << '\n';
      }
      imaging::write_file_atomically(a.dump, csv.str());
    }
  } else {
    if (!a.dump.empty()) {
      err << "tile: --dump-tiling is only available with --strategy domino\n";
      return kInvalidArgs;
    }
    if (a.strategy == "avg") {
      even = tiling::fill_avg_neighbor(img, Parity::even);
      odd = tiling::fill_avg_neighbor(img, Parity::odd);
    } else if (a.strategy == "rand") {
      const auto s = derive_seed(a.seed, Stream::random_fill);
      even = tiling::fill_random_neighbor(img, Parity::even, s);
      odd = tiling::fill_random_neighbor(img, Parity::odd, s + 1);
    } else {
      even = tiling::fill_best_neighbor(img, Parity::even);
      odd = tiling::fill_best_neighbor(img, Parity::odd);
    }
  }
  even.set_bit_depth(img.bit_depth());
  odd.set_bit_depth(img.bit_depth());
  imaging::save_image(even, a.out_even);
  imaging::save_image(odd, a.out_odd);
  return kOk;
}

// ------------------------------------------------------------------ count

int cmd_count(int rows, int cols, std::ostream& out, std::ostream& err) {
  if (rows < 1 || cols < 1) {
    err << "count: --rows and --cols must be positive\n";
    return kInvalidArgs;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f", std::round(tiling::count_tilings_formula(rows, cols)));
  out << "formula=" << buf << "\n";
  if (tiling::exact_count_supported(rows, cols)) {
    out << "exact=" << tiling::count_tilings_exact(rows, cols) << "\n";
  } else {
    out << "exact=unsupported\n";
  }
  return kOk;
}

// -------------------------------------------------------------- benchmark

struct BenchArgs {
  std::string clean_dir;
  std::vector<double> sigmas;
  std::vector<std::string> methods;
  std::string out_csv;
  TrainFlags train;
};

trainer::DenoiseConfig method_config(const std::string& method, trainer::DenoiseConfig cfg) {
  using trainer::ValidationFill;
  if (method == "dd") return cfg;
  if (method == "n2f-domino") {
    cfg.mode = trainer::Mode::n2f_domino;
  } else if (method == "avg-nbr") {
    cfg.validation_fill = ValidationFill::avg_neighbor;
  } else if (method == "rand-nbr") {
    cfg.validation_fill = ValidationFill::random_neighbor;
  } else if (method == "best-nbr") {
    cfg.validation_fill = ValidationFill::best_neighbor;
  } else {
    throw PreconditionError("unknown method: " + method);
  }
  return cfg;
}

std::string format_row(const std::string& image, const std::string& method, double noise, double psnr,
                       double ssim, double seconds) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%g,%.4f,%.6f,%.3f\n", image.c_str(), method.c_str(), noise, psnr,
                ssim, seconds);
  return buf;
}

int cmd_benchmark(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.clean_dir)) {
    err << "benchmark: not a directory: " << a.clean_dir << "\n";
    return kInvalidArgs;
  }
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(a.clean_dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm")) images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) {
    err << "benchmark: no .png or .pgm images in " << a.clean_dir << "\n";
    return kInvalidArgs;
  }
  const trainer::DenoiseConfig base = a.train.config();
  for (const auto& m : a.methods) method_config(m, base).validate();

  struct Sum {
    double psnr = 0.0;
    double ssim = 0.0;
    double seconds = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, double>, Sum> means;
  std::string csv = "image,method,noise,psnr,ssim,seconds\n";
  for (std::size_t ii = 0; ii < images.size(); ++ii) {
    const Image clean = imaging::load_image(images[ii]);
    for (std::size_t si = 0; si < a.sigmas.size(); ++si) {
      const double sigma = a.sigmas[si];
      const auto noise_seed = derive_seed(base.seed, Stream::noise, ii * a.sigmas.size() + si);
      const Image noisy = imaging::add_noise(clean, imaging::NoiseSpec::gaussian(sigma, noise_seed));
      for (const auto& method : a.methods) {
        const auto t0 = std::chrono::steady_clock::now();
        const trainer::DenoiseResult r = trainer::run(noisy, method_config(method, base));
        const double secs = seconds_since(t0);
        const double p = imaging::psnr(r.image, clean);
        const double s = imaging::ssim(r.image, clean);
        csv += format_row(images[ii].filename().string(), method, sigma, p, s, secs);
        Sum& acc = means[{method, sigma}];
        acc.psnr += p;
        acc.ssim += s;
        acc.seconds += secs;
        ++acc.n;
        out << images[ii].filename().string() << " " << method << " sigma=" << sigma << " psnr=" << p << "\n";
      }
    }
  }
  for (const auto& method : a.methods) {
    for (double sigma : a.sigmas) {
      const Sum& acc = means[{method, sigma}];
      csv += format_row("mean", method, sigma, acc.psnr / acc.n, acc.ssim / acc.n, acc.seconds / acc.n);
    }
  }
  imaging::write_file_atomically(a.out_csv, csv);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot image denoising with pixel domino tilings", "domino"};
  app.require_subcommand(1);

  DenoiseArgs dn;
  auto* denoise = app.add_subcommand("denoise", "Denoise one image");
  denoise->add_option("--in", dn.in, "Noisy input image")->required();
  denoise->add_option("--out", dn.out, "Output image (.png or .pgm)")->required();
  denoise->add_option("--mode", dn.mode, "dd or n2f-domino")
      ->check(CLI::IsMember({"dd", "n2f-domino"}));
  denoise->add_option("--report", dn.report, "Write the run report as JSON");
  denoise->add_option("--save-weights", dn.save_weights, "Write the final network weights");
  denoise->add_flag("--timing", dn.timing, "Include wall time in the report");
  dn.train.attach(denoise);

  NoiseArgs nz;
  auto* noise = app.add_subcommand("add-noise", "Synthesize a noisy image");
  noise->add_option("--in", nz.in, "Clean input image")->required();
  noise->add_option("--out", nz.out, "Output image")->required();
  noise->add_option("--kind", nz.kind, "gaussian or poisson")->check(CLI::IsMember({"gaussian", "poisson"}));
  noise->add_option("--sigma", nz.sigma, "Gaussian standard deviation on the 0-255 scale");
  noise->add_option("--peak", nz.peak, "Poisson peak");
  noise->add_option("--seed", nz.seed, "Noise seed");

  TileArgs tl;
  auto* tile = app.add_subcommand("tile", "Write the two filled images of one image");
  tile->add_option("--in", tl.in, "Input image")->required();
  tile->add_option("--out-even", tl.out_even, "Image keeping even pixels")->required();
  tile->add_option("--out-odd", tl.out_odd, "Image keeping odd pixels")->required();
  tile->add_option("--dump-tiling", tl.dump, "CSV of the even tiling, rows i,j,k,l");
  tile->add_option("--strategy", tl.strategy, "domino, avg, rand or best")
      ->check(CLI::IsMember({"domino", "avg", "rand", "best"}));
  tile->add_option("--seed", tl.seed, "Seed for --strategy rand");

  int rows = 0;
  int cols = 0;
  auto* count = app.add_subcommand("count", "Count domino tilings of a rows x cols grid");
  count->add_option("--rows", rows, "Grid rows")->required();
  count->add_option("--cols", cols, "Grid columns")->required();

  BenchArgs bn;
  auto* bench = app.add_subcommand("benchmark", "Denoise a directory of clean images at several noise levels");
  bench->add_option("--clean-dir", bn.clean_dir, "Directory of clean .png/.pgm images")->required();
  bench->add_option("--sigma", bn.sigmas, "Gaussian noise levels")->required()->delimiter(',');
  bench->add_option("--methods", bn.methods, "dd, n2f-domino, avg-nbr, rand-nbr, best-nbr")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"dd", "n2f-domino", "avg-nbr", "rand-nbr", "best-nbr"}));
  bench->add_option("--out-csv", bn.out_csv, "Output CSV")->required();
  bn.train.attach(bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidArgs;
  }

  try {
    if (*denoise) return cmd_denoise(dn, out);
    if (*noise) return cmd_add_noise(nz, err);
    if (*tile) return cmd_tile(tl, err);
    if (*count) return cmd_count(rows, cols, out, err);
    if (*bench) return cmd_benchmark(bn, out, err);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidArgs;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidArgs;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericAbort;
  }
  return kInvalidArgs;
}

}  // namespace domino::cli
