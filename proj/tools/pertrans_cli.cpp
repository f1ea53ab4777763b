// pertrans: command-line front end.
//
//   pertrans transform --in spectrum.csv --k 30 [--out features.csv] [--full] [--diagram d.csv]
//   pertrans classify  --spectra X.csv --labels y.csv --k 30 --classifier rf --scheme logo --out-prefix run
//   pertrans simulate  --out-dir sim --size 30 --noise gaussian --sd 0.1
//   pertrans denoise   --out-dir den --size 30 --noise gaussian --sd 0.1 --k 10,25,50
//   pertrans bench     --sizes 30,42,60 --k 10 --out bench.csv
//
// Exit status: 0 success, 1 invalid input or arguments, 2 I/O failure.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pertrans/pertrans.hpp"

namespace {

using namespace pertrans;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct SimulationFlags {
  std::size_t size = 30;
  double baseline = 0.0;
  std::size_t n_peaks = 50;
  std::size_t n_mz = 3466;
  std::string noise = "gaussian";
  double sd = 0.1;
  double lambda = 5.0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--size", size, "Pixels per image side (>= 8)")->capture_default_str();
    cmd.add_option("--baseline", baseline, "Constant intensity added to every pixel")->capture_default_str();
    cmd.add_option("--n-peaks", n_peaks, "Number of simulated peaks, split between the two shapes")
        ->capture_default_str();
    cmd.add_option("--n-mz", n_mz, "Length of the geometric m/z axis over [500, 2000]")->capture_default_str();
    cmd.add_option("--noise", noise, "Noise model")
        ->check(CLI::IsMember({"none", "gaussian", "poisson"}))
        ->capture_default_str();
    cmd.add_option("--sd", sd, "Gaussian noise standard deviation")->capture_default_str();
    cmd.add_option("--lambda", lambda, "Poisson noise rate")->capture_default_str();
  }

  SimulationSpec spec(std::uint64_t seed) const {
    SimulationSpec s;
    s.size = size;
    s.baseline = baseline;
    s.n_peaks = n_peaks;
    s.n_mz = n_mz;
    s.seed = seed;
    if (noise == "gaussian")
      s.noise = NoiseModel::gaussian(sd);
    else if (noise == "poisson")
      s.noise = NoiseModel::poisson(lambda);
    s.validate();
    return s;
  }
};

struct Options {
  std::size_t threads = 0;
  std::uint64_t seed = 1234;

  // transform
  std::string in_path, out_path, diagram_path;
  double k = 30.0;
  bool full = false;

  // classify
  std::string spectra_path, labels_path, out_prefix = "pertrans", classifier = "rf", scheme = "logo",
                                          matrix_path;
  std::size_t n_trees = 1000;

  // simulate / denoise / bench
  SimulationFlags sim;
  std::string out_dir = ".";
  std::vector<double> k_levels{10, 25, 50};
  std::vector<std::size_t> sizes{30, 42, 60};
  std::size_t repeats = 1;
};

void progress(const std::string& message) { std::cerr << "[pertrans] " << message << '\n'; }

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

/// Writes to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  auto out = detail::open_out(path);
  write(out);
  detail::finish_write(out, path);
}

std::string k_label(double k) { return detail::format_double(k); }

// ---------------------------------------------------------------- transform

void run_transform(const Options& o) {
  top_k_count(0, o.k);
  const auto spectrum = load_spectrum_csv(o.in_path);
  const auto triples = transform(spectrum);
  const auto kept = filter_top_k(reduce(triples), o.k);
  progress(std::to_string(triples.size()) + " maxima, " + std::to_string(kept.size()) + " kept at k=" +
           k_label(o.k));
  emit(o.out_path, [&](std::ostream& out) {
    if (!o.full) {
      write_features_csv(std::span<const PersistencePair>(kept), spectrum.mz(), out);
      return;
    }
    std::vector<FeatureTriple> full;
    for (const auto& p : kept)
      for (const auto& t : triples)
        if (t.position == p.position) full.push_back(t);
    write_features_csv(std::span<const FeatureTriple>(full), spectrum.mz(), out);
  });
  if (!o.diagram_path.empty())
    emit(o.diagram_path, [&](std::ostream& out) { write_diagram_csv(to_diagram(triples), out); });
}

// ---------------------------------------------------------------- classify

void print_report(const CVReport& r, std::ostream& out) {
  out << std::left << std::setw(16) << "fold" << std::setw(24) << "test groups" << std::right
      << std::setw(8) << "n_train" << std::setw(8) << "n_test" << std::setw(12) << "bal_acc" << '\n';
  for (const auto& f : r.folds) {
    std::string groups;
    for (const auto& g : f.test_groups) groups += (groups.empty() ? "" : " ") + g;
    out << std::left << std::setw(16) << f.name << std::setw(24) << groups << std::right << std::setw(8)
        << f.n_train << std::setw(8) << f.n_test << std::setw(12);
    if (f.skipped)
      out << "skipped";
    else
      out << std::fixed << std::setprecision(3) << f.balanced_accuracy;
    out << '\n';
  }
  out << std::fixed << std::setprecision(3) << "mean " << r.mean << "  min " << r.min << "  max " << r.max
      << "  median " << r.median << "  std " << r.std << '\n';
  out.unsetf(std::ios::floatfield);
}

void run_classify(const Options& o) {
  top_k_count(0, o.k);
  const auto threads = resolve_threads(o.threads);
  progress("loading " + o.spectra_path);
  const auto data = load_dataset_csv(o.spectra_path, o.labels_path);
  progress(std::to_string(data.size()) + " spectra x " + std::to_string(data.width()) + " m/z values");

  if (!o.matrix_path.empty()) {
    const auto z = build_matrix(data, o.k, threads);
    emit(o.matrix_path, [&](std::ostream& out) { write_feature_matrix_csv(z, out); });
  }

  ClassifierConfig cfg;
  cfg.kind = o.classifier == "lr" ? ClassifierKind::Logistic : ClassifierKind::RandomForest;
  cfg.forest.n_trees = o.n_trees;
  cfg.forest.seed = o.seed;
  const auto scheme = o.scheme == "ab" ? CvScheme::TwoFoldAB : CvScheme::LeaveOneGroupOut;
  const auto report = group_cv(data, scheme, cfg, o.k, threads);
  for (const auto& w : report.warnings) progress("warning: " + w);

  const auto folds_path = o.out_prefix + "_folds.csv";
  emit(folds_path, [&](std::ostream& out) {
    out << "fold,test_groups,n_train,n_test,balanced_accuracy,skipped\n";
    for (const auto& f : report.folds) {
      std::string groups;
      for (const auto& g : f.test_groups) groups += (groups.empty() ? "" : ";") + g;
      out << f.name << ',' << groups << ',' << f.n_train << ',' << f.n_test << ','
          << (f.skipped ? std::string() : detail::format_double(f.balanced_accuracy)) << ','
          << (f.skipped ? 1 : 0) << '\n';
    }
  });
  const auto summary_path = o.out_prefix + "_summary.csv";
  emit(summary_path, [&](std::ostream& out) {
    out << "classifier,scheme,k,mean,min,max,median,std\n";
    out << o.classifier << ',' << o.scheme << ',' << detail::format_double(o.k) << ','
        << detail::format_double(report.mean) << ',' << detail::format_double(report.min) << ','
        << detail::format_double(report.max) << ',' << detail::format_double(report.median) << ','
        << detail::format_double(report.std) << '\n';
  });
  print_report(report, std::cout);
  progress("wrote " + folds_path + " and " + summary_path);
}

// ---------------------------------------------------------------- simulate / denoise

void write_mask_pgm(const std::vector<std::uint8_t>& mask, std::size_t size, const std::string& path) {
  Grid g(size, size);
  for (std::size_t i = 0; i < mask.size(); ++i) g.values[i] = mask[i] == kBackground ? 0.0 : 1.0;
  write_pgm(g, path);
}

void run_simulate(const Options& o) {
  const auto spec = o.sim.spec(o.seed);
  const auto threads = resolve_threads(o.threads);
  ensure_dir(o.out_dir);
  const auto truth = generate_ground_truth(spec);
  const auto noisy = simulate_noisy(spec, truth, threads);
  write_pgm(mean_image(truth.image), join_path(o.out_dir, "ground_truth.pgm"));
  write_pgm(mean_image(noisy), join_path(o.out_dir, "noisy.pgm"));
  write_mask_pgm(truth.mask, spec.size, join_path(o.out_dir, "mask.pgm"));
  progress(std::to_string(spec.size) + "x" + std::to_string(spec.size) + " image, " +
           std::to_string(truth.image.mz().size()) + " m/z values, " +
           std::to_string(truth.peak_positions.size()) + " peaks; wrote " + o.out_dir);
}

void run_denoise(const Options& o) {
  const auto spec = o.sim.spec(o.seed);
  for (double k : o.k_levels) top_k_count(0, k);
  const auto threads = resolve_threads(o.threads);
  ensure_dir(o.out_dir);
  const auto truth = generate_ground_truth(spec);
  const auto noisy = simulate_noisy(spec, truth, threads);
  write_pgm(mean_image(truth.image), join_path(o.out_dir, "ground_truth.pgm"));
  write_pgm(mean_image(noisy), join_path(o.out_dir, "noisy.pgm"));

  std::ostringstream timing;
  timing << "k,seconds,iou\n";
  for (double k : o.k_levels) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = denoised_mean_image(noisy, k, threads);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    write_pgm(grid, join_path(o.out_dir, "denoised_k" + k_label(k) + ".pgm"));
    const double iou = mask_iou(grid, truth.mask);
    timing << k_label(k) << ',' << detail::format_double(dt.count()) << ',' << detail::format_double(iou)
           << '\n';
    progress("k=" + k_label(k) + ": " + detail::format_double(dt.count()) + " s, IoU " +
             detail::format_double(iou));
  }
  emit(join_path(o.out_dir, "timing.csv"), [&](std::ostream& out) { out << timing.str(); });
}

void run_bench(const Options& o) {
  const auto spec = o.sim.spec(o.seed);
  top_k_count(0, o.k);
  const auto rows = bench_denoise(o.sizes, spec, o.k, resolve_threads(o.threads), o.repeats);
  emit(o.out_path, [&](std::ostream& out) { write_bench_csv(rows, out); });
  for (const auto& r : rows)
    progress(std::to_string(r.size) + "x" + std::to_string(r.size) + ": " + detail::format_double(r.seconds) +
             " s, ratio " + detail::format_double(r.ratio) + " (pixels x" +
             detail::format_double(r.pixel_ratio) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Persistence transformation of spectra: peak features, denoising and classification"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all available cores)")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master random seed")->capture_default_str();
  };
  auto k_option = [&](CLI::App* cmd) {
    cmd->add_option("--k", o.k, "Percentage of most persistent peaks to keep, in (0, 100]")
        ->capture_default_str();
  };

  auto* tr = app.add_subcommand("transform", "Persistence features of one spectrum (CSV: mz,intensity)");
  tr->add_option("--in", o.in_path, "Input spectrum CSV")->required();
  k_option(tr);
  tr->add_option("--out", o.out_path, "Feature CSV (default: standard output)");
  tr->add_flag("--full", o.full, "Emit position,mz,birth,death,persistence instead of position,mz,persistence");
  tr->add_option("--diagram", o.diagram_path, "Also write the persistence diagram (birth,death) CSV");
  common(tr);

  auto* cl = app.add_subcommand("classify", "Group cross-validation on persistence features");
  cl->add_option("--spectra", o.spectra_path, "Spectra CSV: m/z header row, one spectrum per row")->required();
  cl->add_option("--labels", o.labels_path, "Labels CSV: label,group per spectrum")->required();
  k_option(cl);
  cl->add_option("--classifier", o.classifier, "lr (logistic regression) or rf (random forest)")
      ->check(CLI::IsMember({"lr", "rf"}))
      ->capture_default_str();
  cl->add_option("--scheme", o.scheme, "logo (leave one group out) or ab (two-fold by group halves)")
      ->check(CLI::IsMember({"logo", "ab"}))
      ->capture_default_str();
  cl->add_option("--n-trees", o.n_trees, "Random forest size")->capture_default_str();
  cl->add_option("--out-prefix", o.out_prefix, "Writes <prefix>_folds.csv and <prefix>_summary.csv")
      ->capture_default_str();
  cl->add_option("--export-matrix", o.matrix_path, "Also write the full-data feature matrix CSV");
  common(cl);

  auto* si = app.add_subcommand("simulate", "Synthetic image: ground-truth, noisy and mask PGMs");
  o.sim.attach(*si);
  si->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  common(si);

  auto* de = app.add_subcommand("denoise", "Simulate, denoise at several k, write PGMs and timing.csv");
  o.sim.attach(*de);
  de->add_option("--k", o.k_levels, "Comma-separated k percentages")->delimiter(',')->capture_default_str();
  de->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  common(de);

  auto* be = app.add_subcommand("bench", "Denoising wall-clock time across image sizes");
  o.sim.attach(*be);
  be->add_option("--sizes", o.sizes, "Comma-separated image sides")->delimiter(',')->capture_default_str();
  k_option(be);
  be->add_option("--repeats", o.repeats, "Timing repeats per size (best is kept)")->capture_default_str();
  be->add_option("--out", o.out_path, "Timing CSV (default: standard output)");
  common(be);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*tr) run_transform(o);
    else if (*cl) run_classify(o);
    else if (*si) run_simulate(o);
    else if (*de) run_denoise(o);
    else if (*be) run_bench(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
