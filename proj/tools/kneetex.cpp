// kneetex: texture-descriptor pipeline for knee radiographs.
//
// Subcommands cover the full workflow: synthesize or ingest a cohort,
// extract per-ROI Hurst/entropy features, screen them with Welch t-tests,
// search all 4095 feature subsets by cross-validated SVM AUC, and emit
// plot-ready CSVs (ROC, 2-D projection, pairwise scatters). Outputs carry
// `# key=value` headers that fully determine their content; thread count is
// never recorded because it never changes a byte.

#include "kneetex/eval.hpp"
#include "kneetex/image_io.hpp"
#include "kneetex/landmarks_io.hpp"
#include "kneetex/pipeline.hpp"
#include "kneetex/reports.hpp"
#include "kneetex/search.hpp"
#include "kneetex/stats.hpp"
#include "kneetex/synth.hpp"
#include "kneetex/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kneetex;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  int folds = 5;
  int repeats = 100;
  double svm_c = 1.0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_cv = true) {
  cmd->add_option("--seed", opts.seed, "base seed for all derived streams")
      ->capture_default_str();
  if (with_cv) {
    cmd->add_option("--folds", opts.folds, "cross-validation folds")
        ->check(CLI::Range(2, 64))
        ->capture_default_str();
    cmd->add_option("--repeats", opts.repeats, "cross-validation repeats")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--svm-c", opts.svm_c, "SVM soft-margin parameter")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  cmd->add_option("--threads", opts.threads, "worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

// Masks are written either as the decimal subset number or as feature names
// joined with '+', e.g. "H_F0+E_T3".
std::uint32_t parse_mask(const std::string& text) {
  if (text.empty()) throw InputError("mask: empty");
  if (text.find_first_not_of("0123456789") == std::string::npos) {
    unsigned long value = 0;
    try {
      value = std::stoul(text);
    } catch (const std::exception&) {
      throw InputError("mask: " + text + " is not a valid subset number");
    }
    if (value < 1 || value > kMaskCount)
      throw InputError("mask: " + text + " outside [1, 4095]");
    return static_cast<std::uint32_t>(value);
  }
  std::uint32_t mask = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t plus = text.find('+', start);
    const std::string name = text.substr(start, plus == std::string::npos
                                                    ? std::string::npos
                                                    : plus - start);
    bool found = false;
    for (int f = 0; f < kFeatureCount; ++f) {
      if (name == kFeatureNames[static_cast<std::size_t>(f)]) {
        mask |= 1u << f;
        found = true;
        break;
      }
    }
    if (!found) throw InputError("mask: unknown feature '" + name + "'");
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return mask;
}

CvSpec cv_spec(const CommonOpts& opts) {
  CvSpec spec;
  spec.folds = opts.folds;
  spec.repeats = opts.repeats;
  spec.base_seed = opts.seed;
  return spec;
}

HeaderPairs cv_header(const CommonOpts& opts) {
  return {{"seed", std::to_string(opts.seed)},
          {"folds", std::to_string(opts.folds)},
          {"repeats", std::to_string(opts.repeats)},
          {"svm_c", fmt_g9(opts.svm_c)}};
}

const SubjectRecord& pick_record(const std::vector<SubjectRecord>& records,
                                 const std::string& subject) {
  if (subject.empty()) return records.front();
  for (const SubjectRecord& rec : records)
    if (rec.id == subject) return rec;
  throw InputError("subject '" + subject + "' not found in landmarks file");
}

// Trains on the full standardized cohort; used by `project` and `roc --model`.
LinearModel train_full(const FeatureMatrix& fm, std::uint32_t mask, double svm_c,
                       std::uint64_t seed) {
  std::vector<int> cols;
  for (int f = 0; f < kFeatureCount; ++f)
    if (mask & (1u << f)) cols.push_back(f);

  Eigen::MatrixXd sub(fm.rows(), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    sub.col(static_cast<Eigen::Index>(c)) = fm.values.col(cols[c]);
    names.emplace_back(kFeatureNames[static_cast<std::size_t>(cols[c])]);
  }
  Eigen::VectorXi y(fm.rows());
  for (Eigen::Index i = 0; i < fm.rows(); ++i) y[i] = fm.labels[i] == 1 ? 1 : -1;

  const Standardizer st = standardize_fit(sub);
  SvmOptions opts;
  opts.C = svm_c;
  opts.seed = seed;
  LinearModel model = svm_train(st.apply(sub), y, opts);
  model.standardizer = st;
  model.feature_names = std::move(names);
  return model;
}

int run_layout(const std::string& landmarks_path, const std::string& subject,
               const std::string& out, const std::string& overlay) {
  const auto records = read_landmarks_json(landmarks_path);
  const SubjectRecord& rec = pick_record(records, subject);

  LandmarkSet lm = rec.landmarks;
  ImageU16 image;
  const bool needs_image = !overlay.empty();
  if (needs_image) {
    image = read_image(fs::path(landmarks_path).parent_path() / rec.image_path);
    lm = mirror_for_laterality(lm, static_cast<int>(image.cols()));
    if (rec.landmarks.laterality != Laterality::Left) image = flip_horizontal(image);
  } else if (rec.landmarks.laterality != Laterality::Left) {
    // Without the image we cannot mirror; emit the layout in native pose.
    throw InputError("layout: subject " + rec.id +
                     " is a right knee; an --overlay image is required to mirror it");
  }

  const RoiLayout layout = roi_layout(lm);
  write_layout_csv(out, layout,
                   {{"subject", rec.id},
                    {"laterality", to_string(rec.landmarks.laterality)},
                    {"pixel_spacing_mm", fmt_g9(lm.pixel_spacing_mm)}});
  std::cout << "layout: wrote " << out << "\n";

  if (!overlay.empty()) {
    write_overlay_svg(overlay, image, layout, lm);
    std::cout << "layout: wrote " << overlay << "\n";
  }
  return 0;
}

int run_extract(const std::string& landmarks_path, const std::string& out,
                std::string failures_path) {
  std::vector<std::string> skipped;
  const FeatureMatrix fm = extract_cohort(landmarks_path, Laterality::Left, &skipped);
  if (fm.rows() == 0)
    throw InputError("extract: no subject could be processed (" +
                     std::to_string(skipped.size()) + " failures)");
  write_features_csv(out, fm,
                     {{"landmarks", fs::path(landmarks_path).filename().string()},
                      {"subjects", std::to_string(fm.rows())},
                      {"failures", std::to_string(skipped.size())}});
  std::cout << "extract: " << fm.rows() << " subjects -> " << out << "\n";

  if (failures_path.empty()) failures_path = out + ".failures.txt";
  if (!skipped.empty()) {
    std::ofstream os(failures_path);
    if (!os) throw InputError("cannot write " + failures_path);
    for (const std::string& msg : skipped) os << msg << "\n";
    std::cout << "extract: " << skipped.size() << " subject(s) failed, see "
              << failures_path << "\n";
  }
  return 0;
}

int run_screen(const std::string& features, const std::string& out,
               const std::string& grid) {
  const FeatureMatrix fm = read_features_csv(features);
  const auto rows = screen_features(fm);
  write_screen_csv(out, rows,
                   {{"features", fs::path(features).filename().string()},
                    {"n_case", std::to_string(fm.count_label(1))},
                    {"n_control", std::to_string(fm.count_label(0))}});
  std::cout << "screen: wrote " << out << "\n";
  if (!grid.empty()) {
    std::ofstream os(grid);
    if (!os) throw InputError("cannot write " + grid);
    os << screen_grid_text(rows);
    std::cout << "screen: wrote " << grid << "\n";
  }
  return 0;
}

int run_search(const std::string& features, const std::string& out,
               const CommonOpts& common, std::uint32_t mask_from, std::uint32_t mask_to,
               bool progress) {
  const FeatureMatrix fm = read_features_csv(features);
  const auto t0 = std::chrono::steady_clock::now();
  std::function<void(std::uint32_t)> report;
  const std::uint32_t total = mask_to - mask_from + 1;
  if (progress) {
    report = [total](std::uint32_t done) {
      if (done % 256 == 0 || done == total)
        std::fprintf(stderr, "search: %u/%u masks\n", done, total);
    };
  }
  const auto results = search_all(fm, cv_spec(common), common.svm_c, common.threads,
                                  mask_from, mask_to, RepeatAuc::PooledFolds, report);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  HeaderPairs header = cv_header(common);
  header.emplace_back("mask_from", std::to_string(mask_from));
  header.emplace_back("mask_to", std::to_string(mask_to));
  write_search_csv(out, results, header);
  std::cout << "search: " << results.size() << " subsets in " << fmt_g9(elapsed)
            << " s -> " << out << "\n";
  return 0;
}

int run_best(const std::string& search_path, const std::string& out) {
  const auto rows = read_search_csv(search_path);
  const auto best = best_per_cardinality(rows);
  write_best_csv(out, best, {{"search", fs::path(search_path).filename().string()}});
  std::cout << "best-per-n: wrote " << out << "\n";
  return 0;
}

int run_roc(const std::string& features, const std::string& mask_text,
            const CommonOpts& common, int repeat, const std::string& out,
            const std::string& cv_report) {
  const FeatureMatrix fm = read_features_csv(features);
  const std::uint32_t mask = parse_mask(mask_text);
  const CvSpec spec = cv_spec(common);

  HeaderPairs header = cv_header(common);
  header.emplace_back("mask", std::to_string(mask));
  header.emplace_back("features_used", mask_feature_names(mask));

  const Eigen::VectorXd scores =
      cv_pooled_scores(fm, mask, spec, common.svm_c, repeat);
  const RocCurve curve = roc_curve(scores, fm.labels);
  {
    HeaderPairs roc_header = header;
    roc_header.emplace_back("repeat", std::to_string(repeat));
    write_roc_csv(out, curve, roc_header);
  }
  std::cout << "roc: auc " << fmt_g9(curve.area) << " -> " << out << "\n";

  if (!cv_report.empty()) {
    const CvResult cv = cv_auc(fm, mask, spec, common.svm_c);
    write_cv_report_csv(cv_report, cv, header);
    std::cout << "roc: cv mean " << fmt_g9(cv.mean_auc) << " sd " << fmt_g9(cv.std_auc)
              << " over " << cv.repeats << " repeats -> " << cv_report << "\n";
  }
  return 0;
}

int run_project(const std::string& features, const std::string& mask_text,
                const CommonOpts& common, const std::string& out,
                const std::string& model_out) {
  const FeatureMatrix fm = read_features_csv(features);
  const std::uint32_t mask = parse_mask(mask_text);
  const LinearModel model = train_full(fm, mask, common.svm_c, common.seed);
  const Projection proj = project_2d(fm, mask, model);

  HeaderPairs header = {{"seed", std::to_string(common.seed)},
                        {"svm_c", fmt_g9(common.svm_c)},
                        {"mask", std::to_string(mask)},
                        {"features_used", mask_feature_names(mask)},
                        {"converged", model.converged ? "1" : "0"}};
  write_projection_csv(out, fm, proj, header);
  std::cout << "project: wrote " << out << "\n";
  if (!model_out.empty()) {
    write_model_json(model_out, model);
    std::cout << "project: wrote " << model_out << "\n";
  }
  return 0;
}

int run_pairs(const std::string& features, const std::string& mask_text,
              const std::string& out_dir) {
  const FeatureMatrix fm = read_features_csv(features);
  const std::uint32_t mask = parse_mask(mask_text);
  const auto written = write_pairs_csvs(
      out_dir, fm, mask,
      {{"mask", std::to_string(mask)}, {"features_used", mask_feature_names(mask)}});
  std::cout << "pairs: wrote " << written.size() << " files to " << out_dir << "\n";
  return 0;
}

CohortSpec preset_spec(const std::string& preset, std::uint64_t seed) {
  if (preset == "null") return CohortSpec::null_cohort(seed);
  if (preset == "planted3") return CohortSpec::planted_three(seed);
  if (preset == "planted2") return CohortSpec::planted_pair(seed);
  throw InputError("synth: unknown preset '" + preset + "'");
}

int run_synth(const std::string& preset, const std::string& mode, std::uint64_t seed,
              int n_case, int n_control, double noise_sd, int patch_size,
              double spacing, const std::string& out, const std::string& out_dir) {
  CohortSpec spec = preset_spec(preset, seed);
  if (n_case > 0) spec.n_case = n_case;
  if (n_control > 0) spec.n_control = n_control;
  if (noise_sd >= 0.0) spec.noise_sd = noise_sd;
  if (patch_size > 0) spec.patch_size = patch_size;
  if (spacing > 0.0) spec.pixel_spacing_mm = spacing;
  spec.validate();

  if (mode == "fast") {
    if (out.empty()) throw InputError("synth: fast mode needs --out <features.csv>");
    const FeatureMatrix fm = planted_cohort_features(spec);
    write_features_csv(out, fm,
                       {{"preset", preset},
                        {"seed", std::to_string(seed)},
                        {"n_case", std::to_string(spec.n_case)},
                        {"n_control", std::to_string(spec.n_control)},
                        {"noise_sd", fmt_g9(spec.noise_sd)}});
    write_ground_truth_json(out + ".truth.json", spec);
    std::cout << "synth: " << fm.rows() << " subjects -> " << out << "\n";
    return 0;
  }
  if (mode == "images") {
    if (out_dir.empty()) throw InputError("synth: images mode needs --out-dir <dir>");
    write_image_cohort(spec, out_dir);
    std::cout << "synth: " << spec.subjects() << " radiographs -> " << out_dir << "\n";
    return 0;
  }
  throw InputError("synth: mode must be 'fast' or 'images'");
}

int run_bench(int size, int iters, const std::string& out) {
  const Patch patch = fbm_patch(0.5, size, 1);

  // Best-of-iters after one warmup call: both descriptors are deterministic,
  // so the fastest observed run is the cost with scheduler noise removed.
  double h_sink = hurst(patch) + entropy(patch.pixels);
  const auto time_best = [&](auto&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < iters; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      h_sink += fn();
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double hurst_s = time_best([&] { return hurst(patch); });
  const double entropy_s = time_best([&] { return entropy(patch.pixels); });
  const double ratio = entropy_s > 0.0 ? hurst_s / entropy_s : 0.0;

  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw InputError("cannot write " + out);
    write_report_header(os, {{"size", std::to_string(size)},
                             {"iters", std::to_string(iters)}});
    os << "descriptor,seconds_per_call\n";
    os << "hurst," << fmt_g9(hurst_s) << "\n";
    os << "entropy," << fmt_g9(entropy_s) << "\n";
    os << "# hurst_over_entropy=" << fmt_g9(ratio) << "\n";
    if (!os) throw InputError("write failed: " + out);
  }
  std::cout << "bench: " << size << "x" << size << "  hurst " << fmt_g9(hurst_s)
            << " s  entropy " << fmt_g9(entropy_s) << " s  ratio " << fmt_g9(ratio)
            << "x (sink " << fmt_g9(h_sink) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kneetex: knee radiograph texture pipeline"};
  app.set_version_flag("--version", std::string("kneetex ") + kVersion);
  app.require_subcommand(1);

  // layout
  auto* layout = app.add_subcommand("layout", "ROI rectangles for one subject");
  std::string layout_landmarks, layout_subject, layout_out = "layout.csv", layout_overlay;
  layout->add_option("--landmarks", layout_landmarks, "landmark JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  layout->add_option("--subject", layout_subject, "subject id, default: first record");
  layout->add_option("--out", layout_out, "layout CSV path")->capture_default_str();
  layout->add_option("--overlay", layout_overlay, "also write an SVG overlay here");

  // extract
  auto* extract = app.add_subcommand("extract", "features.csv from a landmark cohort");
  std::string extract_landmarks, extract_out = "features.csv", extract_failures;
  extract->add_option("--landmarks", extract_landmarks, "landmark JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("--out", extract_out, "feature CSV path")->capture_default_str();
  extract->add_option("--failures", extract_failures,
                      "sidecar for failed subjects, default <out>.failures.txt");

  // screen
  auto* screen = app.add_subcommand("screen", "per-feature Welch t-tests");
  std::string screen_features_path, screen_out = "screen.csv", screen_grid;
  screen->add_option("--features", screen_features_path, "feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  screen->add_option("--out", screen_out, "screening CSV path")->capture_default_str();
  screen->add_option("--grid", screen_grid, "also write the per-ROI text table here");

  // search
  auto* search = app.add_subcommand("search", "CV AUC of every feature subset");
  std::string search_features, search_out = "search.csv";
  CommonOpts search_common;
  std::uint32_t mask_from = 1, mask_to = kMaskCount;
  bool search_progress = false;
  search->add_option("--features", search_features, "feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  search->add_option("--out", search_out, "search CSV path")->capture_default_str();
  add_common(search, search_common);
  search->add_option("--mask-from", mask_from, "first subset mask")
      ->check(CLI::Range(1u, kMaskCount))
      ->capture_default_str();
  search->add_option("--mask-to", mask_to, "last subset mask")
      ->check(CLI::Range(1u, kMaskCount))
      ->capture_default_str();
  search->add_flag("--progress", search_progress, "report progress on stderr");

  // best-per-n
  auto* best = app.add_subcommand("best-per-n", "best subset per cardinality");
  std::string best_search, best_out = "best_per_n.csv";
  best->add_option("--search", best_search, "full 4095-row search CSV")
      ->required()
      ->check(CLI::ExistingFile);
  best->add_option("--out", best_out, "output CSV path")->capture_default_str();

  // roc
  auto* roc = app.add_subcommand("roc", "pooled out-of-fold ROC for one subset");
  std::string roc_features, roc_mask, roc_out = "roc.csv", roc_cv_report;
  CommonOpts roc_common;
  int roc_repeat = 0;
  roc->add_option("--features", roc_features, "feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  roc->add_option("--mask", roc_mask, "subset as number or names, e.g. H_F0+E_T3")
      ->required();
  roc->add_option("--out", roc_out, "ROC CSV path")->capture_default_str();
  roc->add_option("--repeat", roc_repeat, "repeat index used for the fold split")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  roc->add_option("--cv-report", roc_cv_report,
                  "also write per-repeat CV AUCs (uses --repeats) here");
  add_common(roc, roc_common);

  // project
  auto* project = app.add_subcommand("project", "2-D SVM-driven projection");
  std::string project_features, project_mask, project_out = "projection.csv",
              project_model;
  CommonOpts project_common;
  project->add_option("--features", project_features, "feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  project->add_option("--mask", project_mask, "subset as number or names")->required();
  project->add_option("--out", project_out, "projection CSV path")->capture_default_str();
  project->add_option("--model", project_model, "also write the trained model JSON here");
  add_common(project, project_common);

  // pairs
  auto* pairs = app.add_subcommand("pairs", "pairwise scatter CSVs for a subset");
  std::string pairs_features, pairs_mask, pairs_dir = "pairs";
  pairs->add_option("--features", pairs_features, "feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  pairs->add_option("--mask", pairs_mask, "subset as number or names")->required();
  pairs->add_option("--out-dir", pairs_dir, "output directory")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic cohorts with known truth");
  std::string synth_preset = "planted3", synth_mode = "fast", synth_out, synth_dir;
  std::uint64_t synth_seed = 0;
  int synth_n_case = 0, synth_n_control = 0, synth_patch = 0;
  double synth_noise = -1.0, synth_spacing = 0.0;
  synth->add_option("--preset", synth_preset, "null | planted3 | planted2")
      ->capture_default_str();
  synth->add_option("--mode", synth_mode, "fast (feature CSV) | images (radiographs)")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "cohort seed")->capture_default_str();
  synth->add_option("--n-case", synth_n_case, "override case count");
  synth->add_option("--n-control", synth_n_control, "override control count");
  synth->add_option("--noise-sd", synth_noise, "override per-subject jitter");
  synth->add_option("--patch-size", synth_patch, "images mode ROI size, px");
  synth->add_option("--spacing", synth_spacing, "pixel spacing, mm");
  synth->add_option("--out", synth_out, "fast mode: features.csv path");
  synth->add_option("--out-dir", synth_dir, "images mode: cohort directory");

  // bench
  auto* bench = app.add_subcommand("bench", "time the two descriptors");
  int bench_size = 512, bench_iters = 5;
  std::string bench_out;
  bench->add_option("--size", bench_size, "square patch side, px")
      ->check(CLI::Range(16, 4096))
      ->capture_default_str();
  bench->add_option("--iters", bench_iters, "calls per descriptor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--out", bench_out, "also write timings CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 1;
  }

  try {
    if (*layout) return run_layout(layout_landmarks, layout_subject, layout_out,
                                   layout_overlay);
    if (*extract) return run_extract(extract_landmarks, extract_out, extract_failures);
    if (*screen) return run_screen(screen_features_path, screen_out, screen_grid);
    if (*search) {
      if (mask_from > mask_to) throw InputError("search: --mask-from exceeds --mask-to");
      return run_search(search_features, search_out, search_common, mask_from, mask_to,
                        search_progress);
    }
    if (*best) return run_best(best_search, best_out);
    if (*roc) return run_roc(roc_features, roc_mask, roc_common, roc_repeat, roc_out,
                             roc_cv_report);
    if (*project) return run_project(project_features, project_mask, project_common,
                                     project_out, project_model);
    if (*pairs) return run_pairs(pairs_features, pairs_mask, pairs_dir);
    if (*synth) return run_synth(synth_preset, synth_mode, synth_seed, synth_n_case,
                                 synth_n_control, synth_noise, synth_patch,
                                 synth_spacing, synth_out, synth_dir);
    if (*bench) return run_bench(bench_size, bench_iters, bench_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
