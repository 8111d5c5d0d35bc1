#include "vifuse/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vifuse/commask.hpp"
#include "vifuse/errors.hpp"
#include "vifuse/fris.hpp"

#ifndef VIFUSE_VERSION
#define VIFUSE_VERSION "0.0.0"
#endif

namespace vifuse::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kImageExtensions{".png", ".pgm", ".ppm"};

struct LoadedPair {
  Image ir;
  Image vi;
  ChromaPlanes vi_chroma;
  bool vi_color = false;
};

LoadedPair load_pair(const fs::path& ir_path, const fs::path& vi_path) {
  LoadedPair pair;
  pair.ir = to_luminance(load_image(ir_path)).first;
  const ColorImage vi = load_image(vi_path);
  pair.vi_color = !vi.is_gray();
  auto [lum, chroma] = to_luminance(vi);
  pair.vi = std::move(lum);
  pair.vi_chroma = std::move(chroma);
  if (!pair.ir.same_shape(pair.vi)) {
    throw std::invalid_argument("input sizes differ: infrared " + shape_string(pair.ir) +
                                " vs visible " + shape_string(pair.vi));
  }
  return pair;
}

void save_fused(const Image& fused, const LoadedPair& pair, const fs::path& path) {
  if (pair.vi_color) {
    save_image(recompose(fused, pair.vi_chroma), path);
  } else {
    save_image(fused, path);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Table in the column order EN SD SF AG SCD VIF Qabf SSIM.
std::string render_table(const std::vector<std::pair<std::string, MetricsReport>>& rows,
                         const std::string& first_column, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    out << first_column;
    for (const char* name : MetricsReport::kNames) out << ',' << name;
    out << '\n';
    for (const auto& [label, m] : rows) {
      out << metrics_csv_row(label, m) << '\n';
    }
    return out.str();
  }
  out << "| " << first_column << " | EN | SD | SF | AG | SCD | VIF | Qabf | SSIM |\n";
  out << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [label, m] : rows) {
    out << "| " << label;
    for (double v : m.values()) out << " | " << format_value(v);
    out << " |\n";
  }
  return out.str();
}

std::optional<fs::path> find_with_stem(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".png", ".pgm", ".ppm", ".PNG", ".PGM", ".PPM"}) {
    fs::path candidate = dir / (stem + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

int patch_size_for(const RunConfig& cfg, const Image& img) {
  return cfg.k.value_or(default_patch_size(img.width(), img.height()));
}

}  // namespace

std::string engine_version() { return VIFUSE_VERSION; }

std::uint64_t stable_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json RunConfig::to_json() const {
  const LossWeights& w = fuser.weights;
  nlohmann::json j{
      {"alpha", w.alpha},
      {"lambda1", w.lambda1},
      {"lambda2", w.lambda2},
      {"eps", w.eps},
      {"edge_sign", w.edge_sign},
      {"step", fuser.step_size},
      {"iters", fuser.max_iters},
      {"tol", fuser.rel_tol},
      {"init", to_string(fuser.init)},
      {"betas", {fuser.beta1, fuser.beta2}},
      {"project_each_step", fuser.project_each_step},
      {"seed", seed},
      {"baseline_weights",
       {{"w1", baseline.w1},
        {"w2", baseline.w2},
        {"xi", baseline.xi},
        {"beta", baseline.beta},
        {"gamma", baseline.gamma}}},
  };
  j["k"] = k ? nlohmann::json(*k) : nlohmann::json("default");
  return j;
}

MetricsReport BenchReport::mean(const std::string& method) const {
  std::array<double, 8> sum{};
  std::size_t count = 0;
  for (const Row& row : rows) {
    if (row.method != method) continue;
    const auto v = row.metrics.values();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    ++count;
  }
  if (count > 0) {
    for (double& s : sum) s /= static_cast<double>(count);
  }
  return MetricsReport::from_values(sum);
}

void cmd_fuse(const fs::path& ir, const fs::path& vi, const fs::path& out, const RunConfig& cfg) {
  const LoadedPair pair = load_pair(ir, vi);
  const FuseResult result = fuse(pair.ir, pair.vi, cfg.fuser);

  // Everything that can fail is computed before the first file is written.
  std::string metrics_text;
  if (!cfg.metrics_path.empty()) {
    const MetricsReport m = metrics_all(result.fused, pair.ir, pair.vi);
    if (!fs::exists(cfg.metrics_path)) metrics_text = metrics_csv_header() + "\n";
    metrics_text += metrics_csv_row(out.string(), m) + "\n";
  }
  std::string trace_text;
  if (!cfg.trace_path.empty()) {
    std::ostringstream trace;
    result.trace.write_csv(trace);
    trace_text = trace.str();
  }

  save_fused(result.fused, pair, out);
  if (!cfg.trace_path.empty()) write_text(cfg.trace_path, trace_text);
  if (!cfg.metrics_path.empty()) {
    std::ofstream csv(cfg.metrics_path, std::ios::app | std::ios::binary);
    if (!csv) throw IoError("cannot open " + cfg.metrics_path.string());
    csv << metrics_text;
    if (!csv) throw IoError("write failed: " + cfg.metrics_path.string());
  }
}

void cmd_ref(const fs::path& ir, const fs::path& vi, const fs::path& out_dir,
             const RunConfig& cfg) {
  const LoadedPair pair = load_pair(ir, vi);
  const LossWeights& w = cfg.fuser.weights;
  const ReferenceBundle bundle = synthesize_reference(pair.ir, pair.vi, w.alpha, w.edge_sign);
  ensure_directory(out_dir);

  Image edge_vis = bundle.i_edge;
  for (double& v : edge_vis.pixels()) v = (v + 1.0) / 2.0;
  save_image(edge_vis, out_dir / "i_edge.png");
  save_image(bundle.i_en, out_dir / "i_en.png");
  save_image(bundle.i_eq, out_dir / "i_eq.png");
  save_image(bundle.i_ref, out_dir / "i_ref.png");
}

void cmd_mask(const fs::path& ir, const fs::path& vi, const fs::path& out_dir,
              const RunConfig& cfg) {
  const ColorImage ir_color = load_image(ir);
  const ColorImage vi_color = load_image(vi);
  const Image& shape = ir_color.channels[0];
  require_same_shape(shape, vi_color.channels[0], "mask");
  const MaskPair masks = gen_mask_pair(shape.width(), shape.height(), patch_size_for(cfg, shape),
                                       cfg.seed);

  auto masked = [](const ColorImage& img, const Image& mask) {
    ColorImage out = img;
    for (Image& plane : out.channels) {
      for (std::size_t i = 0; i < plane.size(); ++i) plane[i] *= mask[i];
    }
    return out;
  };
  auto save_like = [](const ColorImage& img, const fs::path& path) {
    if (img.is_gray()) {
      save_image(img.channels[0], path);
    } else {
      save_image(img, path);
    }
  };

  ensure_directory(out_dir);
  save_image(masks.m_ir, out_dir / "m_ir.pgm");
  save_image(masks.m_vi, out_dir / "m_vi.pgm");
  save_like(masked(ir_color, masks.m_ir), out_dir / "ir_masked.png");
  save_like(masked(vi_color, masks.m_vi), out_dir / "vi_masked.png");
  const nlohmann::json sidecar{{"seed", masks.seed},
                               {"k", masks.patch.size},
                               {"x0", masks.patch.x0},
                               {"y0", masks.patch.y0},
                               {"width", shape.width()},
                               {"height", shape.height()}};
  write_text(out_dir / "mask.json", sidecar.dump(2) + "\n");
}

BenchReport cmd_bench(const fs::path& pairs_dir, const fs::path& out_dir, const RunConfig& cfg,
                      std::ostream& err) {
  const fs::path ir_dir = pairs_dir / "ir";
  const fs::path vi_dir = pairs_dir / "vi";
  if (!fs::is_directory(ir_dir) || !fs::is_directory(vi_dir)) {
    throw IoError("expected ir/ and vi/ subdirectories under " + pairs_dir.string());
  }

  BenchReport report;
  report.version = engine_version();
  report.config = cfg.to_json();
  report.methods.push_back("angular");
  if (cfg.baselines) {
    for (auto kind : {BaselineKind::kLinear, BaselineKind::kModalPrior, BaselineKind::kMultiModal,
                      BaselineKind::kMaxPreserve}) {
      report.methods.push_back(to_string(kind));
    }
  }
  if (cfg.masked) report.methods.push_back("angular_masked");

  std::vector<std::pair<std::string, fs::path>> candidates;
  for (const auto& entry : fs::directory_iterator(ir_dir)) {
    if (!entry.is_regular_file()) continue;
    if (kImageExtensions.count(lower(entry.path().extension().string())) == 0) continue;
    candidates.emplace_back(entry.path().stem().string(), entry.path());
  }
  std::sort(candidates.begin(), candidates.end());

  struct Job {
    std::string stem;
    fs::path ir;
    fs::path vi;
  };
  std::vector<Job> jobs;
  for (const auto& [stem, ir_path] : candidates) {
    if (auto vi_path = find_with_stem(vi_dir, stem)) {
      jobs.push_back({stem, ir_path, *vi_path});
    } else {
      err << "warning: no visible image for '" << stem << "', skipped\n";
      report.skipped.push_back(stem);
    }
  }
  if (jobs.empty()) throw IoError("no image pairs found under " + pairs_dir.string());

  ensure_directory(out_dir);
  for (const auto& method : report.methods) ensure_directory(out_dir / method);

  struct Outcome {
    std::vector<BenchReport::Row> rows;
    std::string error;
  };
  std::vector<Outcome> outcomes(jobs.size());

  auto run_job = [&](const Job& job) -> Outcome {
    Outcome outcome;
    const LoadedPair pair = load_pair(job.ir, job.vi);
    for (const auto& method : report.methods) {
      FuseResult result;
      if (method == "angular") {
        result = fuse(pair.ir, pair.vi, cfg.fuser);
      } else if (method == "angular_masked") {
        const MaskPair masks =
            gen_mask_pair(pair.ir.width(), pair.ir.height(), patch_size_for(cfg, pair.ir),
                          cfg.seed ^ stable_hash(job.stem));
        result = fuse_masked(pair.ir, pair.vi, masks, cfg.fuser);
      } else {
        const BaselineObjective objective(parse_baseline_kind(method), pair.ir, pair.vi,
                                          cfg.baseline);
        result = minimize(objective, pair.ir, pair.vi, cfg.fuser);
      }
      const std::string rel = method + "/" + job.stem + ".png";
      save_fused(result.fused, pair, out_dir / rel);
      outcome.rows.push_back({method, job.stem, rel, metrics_all(result.fused, pair.ir, pair.vi)});
    }
    return outcome;
  };

  unsigned workers = cfg.jobs != 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        outcomes[i] = run_job(jobs[i]);
      } catch (const std::exception& e) {
        outcomes[i].rows.clear();
        outcomes[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Results are emitted in sorted stem order regardless of completion order.
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcomes[i].error.empty()) {
      err << "warning: pair '" << jobs[i].stem << "' skipped: " << outcomes[i].error << "\n";
      report.skipped.push_back(jobs[i].stem);
    }
  }
  for (const auto& method : report.methods) {
    for (const auto& outcome : outcomes) {
      for (const auto& row : outcome.rows) {
        if (row.method == method) report.rows.push_back(row);
      }
    }
  }
  if (report.rows.empty()) throw IoError("no image pair could be processed");

  std::ostringstream csv;
  csv << metrics_csv_header() << '\n';
  std::vector<std::pair<std::string, MetricsReport>> summary;
  for (const auto& method : report.methods) {
    for (const auto& row : report.rows) {
      if (row.method == method) csv << metrics_csv_row(row.path, row.metrics) << '\n';
    }
    const MetricsReport m = report.mean(method);
    csv << metrics_csv_row(method + "/mean", m) << '\n';
    summary.emplace_back(method, m);
  }
  write_text(out_dir / "metrics.csv", csv.str());

  const bool markdown = cfg.format == TableFormat::kMarkdown;
  write_text(out_dir / (markdown ? "summary.md" : "summary.csv"),
             render_table(summary, "method", cfg.format));

  nlohmann::json meta{
      {"engine_version", report.version},
      {"config", report.config},
      {"methods", report.methods},
      {"pairs", report.rows.size() / report.methods.size()},
      {"skipped", report.skipped},
      {"note",
       "metrics use standard fusion-literature definitions computed on the 0-255 scale; "
       "absolute values are only approximately comparable with other implementations"},
  };
  for (const auto& [method, m] : summary) {
    nlohmann::json row;
    const auto v = m.values();
    for (std::size_t i = 0; i < v.size(); ++i) row[MetricsReport::kNames[i]] = v[i];
    meta["mean"][method] = row;
  }
  write_text(out_dir / "report.json", meta.dump(2) + "\n");
  return report;
}

void cmd_metrics(const fs::path& fused, const fs::path& ir, const fs::path& vi,
                 const RunConfig& cfg, std::ostream& out) {
  const LoadedPair pair = load_pair(ir, vi);
  const Image f = to_luminance(load_image(fused)).first;
  require_same_shape(f, pair.ir, "metrics");
  const MetricsReport m = metrics_all(f, pair.ir, pair.vi);
  const std::string table = render_table({{fused.string(), m}}, "path", cfg.format);
  if (cfg.out_path.empty()) {
    out << table;
    return;
  }
  const bool fresh = !fs::exists(cfg.out_path);
  std::ofstream csv(cfg.out_path, std::ios::app | std::ios::binary);
  if (!csv) throw IoError("cannot open " + cfg.out_path.string());
  if (cfg.format == TableFormat::kCsv && !fresh) {
    csv << metrics_csv_row(fused.string(), m) << '\n';
  } else {
    csv << table;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visible-infrared variational image fusion", "vifuse"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key = value file; flags override its values");

  RunConfig cfg;
  std::string init = to_string(cfg.fuser.init);
  std::string format = "csv";
  std::int64_t k_flag = 0;
  LossWeights& w = cfg.fuser.weights;

  app.add_option("--alpha", w.alpha, "Blend weight of the enhanced image in the reference")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--lambda1", w.lambda1, "Gradient magnitude loss weight")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lambda2", w.lambda2, "Gradient direction loss weight")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--eps", w.eps, "Cosine similarity guard")->check(CLI::PositiveNumber);
  app.add_option("--step", cfg.fuser.step_size, "Adam step size")->check(CLI::PositiveNumber);
  app.add_option("--iters", cfg.fuser.max_iters, "Maximum iterations")->check(CLI::PositiveNumber);
  app.add_option("--tol", cfg.fuser.rel_tol, "Relative loss change stopping tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--init", init, "Initialization")
      ->check(CLI::IsMember({"reference", "max", "average"}));
  app.add_option("--edge-sign", w.edge_sign, "Sign of the injected Laplacian")
      ->check(CLI::IsMember({-1, 1}));
  app.add_option("--k", k_flag, "Mask patch side (default: half the shorter side)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--jobs", cfg.jobs, "Worker threads for bench (default: CPU count)");
  app.add_option("--trace", cfg.trace_path, "Write the per-iteration loss trace CSV here");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "markdown"}));

  std::string a, b, c, d;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse one infrared/visible pair");
  fuse_cmd->add_option("ir", a, "Infrared image")->required();
  fuse_cmd->add_option("vi", b, "Visible image")->required();
  fuse_cmd->add_option("out", c, "Fused output image")->required();
  fuse_cmd->add_option("--metrics", cfg.metrics_path, "Append a metrics CSV row to this file");

  CLI::App* ref_cmd = app.add_subcommand("ref", "Write the reference synthesis planes");
  ref_cmd->add_option("ir", a, "Infrared image")->required();
  ref_cmd->add_option("vi", b, "Visible image")->required();
  ref_cmd->add_option("out_dir", c, "Output directory")->required();

  CLI::App* mask_cmd = app.add_subcommand("mask", "Write complementary masks and masked inputs");
  mask_cmd->add_option("ir", a, "Infrared image")->required();
  mask_cmd->add_option("vi", b, "Visible image")->required();
  mask_cmd->add_option("out_dir", c, "Output directory")->required();

  CLI::App* bench_cmd = app.add_subcommand("bench", "Fuse and score a directory of pairs");
  bench_cmd->add_option("pairs_dir", a, "Directory with ir/ and vi/ subdirectories")->required();
  bench_cmd->add_option("out_dir", b, "Output directory")->required();
  bench_cmd->add_flag("--baselines", cfg.baselines, "Also run the four baseline objectives");
  bench_cmd->add_flag("--masked", cfg.masked, "Also run the complementary-mask protocol");

  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Score an externally fused image");
  metrics_cmd->add_option("fused", a, "Fused image")->required();
  metrics_cmd->add_option("ir", b, "Infrared image")->required();
  metrics_cmd->add_option("vi", c, "Visible image")->required();
  metrics_cmd->add_option("--out", cfg.out_path, "Append to this file instead of stdout");

  for (CLI::App* sub : {fuse_cmd, ref_cmd, mask_cmd, bench_cmd, metrics_cmd}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    cfg.fuser.init = parse_init_mode(init);
    cfg.format = format == "markdown" ? TableFormat::kMarkdown : TableFormat::kCsv;
    if (k_flag > 0) cfg.k = static_cast<int>(k_flag);
    cfg.fuser.validate();

    if (*fuse_cmd) {
      cmd_fuse(a, b, c, cfg);
    } else if (*ref_cmd) {
      cmd_ref(a, b, c, cfg);
    } else if (*mask_cmd) {
      cmd_mask(a, b, c, cfg);
    } else if (*bench_cmd) {
      cmd_bench(a, b, cfg, err);
    } else if (*metrics_cmd) {
      cmd_metrics(a, b, c, cfg, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace vifuse::cli
