#include "coocnet/checkpoint.hpp"
#include "coocnet/cli.hpp"
#include "coocnet/error.hpp"
#include "coocnet/experiments.hpp"
#include "coocnet/imaging.hpp"
#include "coocnet/parallel.hpp"
#include "coocnet/rng.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

namespace coocnet::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Options shared by every subcommand. Flag values are kept as text and run
// through set_option after the config file, so both paths parse identically.
struct CommonFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::map<std::string, std::string> raw;
  bool symmetric = false;

  void attach(CLI::App* app, bool with_training) {
    app->add_option("--config", config, "Flat key = value config file")->check(CLI::ExistingFile);
    add(app, "seed", "Base random seed");
    add(app, "workers", "Worker threads for extraction, evaluation and batch gradients");
    add(app, "bins", "Co-occurrence bins per axis (power of two)");
    add(app, "offset", "Pixel offset as dy,dx");
    app->add_flag("--symmetric", symmetric, "Count each pair in both orders");
    if (with_training) {
      add(app, "epochs", "Training epochs");
      add(app, "batch-size", "Mini-batch size");
      add(app, "lr", "Adam learning rate");
      add(app, "qualities", "JPEG quality factors, comma separated");
    }
  }

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option("--" + key, raw[key], help);
  }

  RunConfig resolve(const CLI::App* app) const {
    RunConfig cfg;
    if (!config.empty()) apply_config_file(cfg, config);
    for (const auto& [key, value] : raw) {
      if (app->count("--" + key) > 0) set_option(cfg, key, value);
    }
    if (app->count("--symmetric") > 0) cfg.cooc.symmetric = symmetric;
    if (!config.empty()) cfg.paths["config"] = config;
    return cfg;
  }
};

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  fs::path out = base;
  out.replace_extension();
  out += suffix;
  return out;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void log_epoch(const harness::EpochRecord& r) {
  std::printf("epoch %3d  train_loss %.6f  train_acc %.4f", r.epoch, r.train_loss, r.train_acc);
  if (r.val_loss) std::printf("  val_loss %.6f  val_acc %.4f", *r.val_loss, *r.val_acc);
  std::printf("\n");
  std::fflush(stdout);
}

ordered_json failures_json(const std::vector<cooc::ExtractFailure>& failures) {
  ordered_json out = ordered_json::array();
  for (const auto& f : failures) out.push_back({{"path", f.path}, {"error", f.message}});
  return out;
}

void print_failures(const std::vector<cooc::ExtractFailure>& failures) {
  for (const auto& f : failures) std::fprintf(stderr, "skipped %s: %s\n", f.path.c_str(), f.message.c_str());
}

// ---------------------------------------------------------------------------

void cmd_manifest(const fs::path& root, const fs::path& out, RunConfig cfg) {
  cfg.paths["root"] = root.string();
  cfg.paths["output"] = out.string();
  const auto manifest = harness::build_manifest(root);
  harness::write_manifest(out, manifest);
  auto meta = run_metadata("manifest", cfg);
  meta["records"] = manifest.size();
  write_json(with_suffix(out, ".run.json"), meta);
  std::printf("%zu records -> %s\n", manifest.size(), out.string().c_str());
}

void cmd_extract(const fs::path& manifest_path, const fs::path& out_dir, RunConfig cfg) {
  cfg.paths["manifest"] = manifest_path.string();
  cfg.paths["output"] = out_dir.string();
  const auto manifest = harness::read_manifest(manifest_path);
  const auto records = harness::image_records(manifest, manifest.all_indices());
  const auto batch = cooc::batch_extract(records, cfg.cooc, {cfg.workers, std::nullopt});

  fs::create_directories(out_dir / "tensors");
  std::string index;
  for (const auto& sample : batch.samples) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.cooc", sample.record_index);
    const fs::path rel = fs::path("tensors") / name;
    cooc::write_tensor_cache(out_dir / rel, sample.tensor, cfg.cooc);
    const auto& r = manifest.records[sample.record_index];
    ordered_json line{{"path", r.path},
                      {"label", std::string(to_string(r.label))},
                      {"category", r.category},
                      {"split", std::string(harness::to_string(r.split))},
                      {"tensor", rel.generic_string()}};
    index += line.dump() + "\n";
  }
  write_text(out_dir / "index.jsonl", index);
  print_failures(batch.failures);

  auto meta = run_metadata("extract", cfg);
  meta["extracted"] = batch.samples.size();
  meta["failures"] = failures_json(batch.failures);
  write_json(out_dir / "run.json", meta);
  std::printf("%zu tensors -> %s (%zu failures)\n", batch.samples.size(), out_dir.string().c_str(),
              batch.failures.size());
  if (batch.samples.empty()) throw Error(Errc::EmptyManifest, "no image could be extracted");
}

// Tensor files of an extract directory, keyed by image path.
std::unordered_map<std::string, fs::path> read_cache_index(const fs::path& dir) {
  std::unordered_map<std::string, fs::path> out;
  std::istringstream in(read_all(dir / "index.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out[j.at("path").get<std::string>()] = dir / j.at("tensor").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidManifest, "bad cache index line: " + std::string(e.what()));
    }
  }
  return out;
}

void cmd_train(const fs::path& manifest_path, const fs::path& checkpoint_path, const std::string& cache_dir,
               RunConfig cfg) {
  cfg.paths["manifest"] = manifest_path.string();
  cfg.paths["checkpoint"] = checkpoint_path.string();
  if (!cache_dir.empty()) cfg.paths["cache"] = cache_dir;
  const auto spec = network_spec(cfg);
  auto tcfg = train_config(cfg);
  tcfg.on_epoch = log_epoch;

  const auto manifest = harness::ensure_split(harness::read_manifest(manifest_path), cfg.seed);
  harness::TrainResult result;
  if (cache_dir.empty()) {
    result = harness::train(manifest, spec, tcfg);
  } else {
    const auto files = read_cache_index(cache_dir);
    harness::CachedFeatures features(cfg.cooc);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (const auto& r : manifest.records) {
      if (r.split != harness::Split::Train && r.split != harness::Split::Val) continue;
      const auto it = files.find(r.path);
      if (it == files.end()) throw Error(Errc::FileNotFound, "no cached tensor for " + r.path);
      (r.split == harness::Split::Train ? train_idx : val_idx).push_back(features.size());
      features.add({r.path, r.label, r.category}, it->second);
    }
    result = harness::train(features, train_idx, val_idx, spec, tcfg);
  }
  print_failures(result.extraction_failures);

  net::Checkpoint checkpoint{spec, result.best_params, checkpoint_metadata(cfg)};
  checkpoint.metadata["train.best_epoch"] = std::to_string(result.best_epoch);
  net::save_checkpoint(checkpoint_path, checkpoint);
  harness::write_manifest(with_suffix(checkpoint_path, ".split.jsonl"), manifest);
  write_text(with_suffix(checkpoint_path, ".history.csv"), harness::history_csv(result.metrics.history));

  auto report = run_metadata("train", cfg);
  report["best_epoch"] = result.best_epoch;
  report["steps"] = result.steps;
  report["metrics"] = harness::to_json(result.metrics);
  report["failures"] = failures_json(result.extraction_failures);
  write_json(with_suffix(checkpoint_path, ".report.json"), report);
  std::printf("best epoch %d, accuracy %.4f -> %s\n", result.best_epoch, result.metrics.accuracy,
              checkpoint_path.string().c_str());
}

struct LoadedModel {
  net::Checkpoint checkpoint;
  cooc::CoOccConfig cooc;
};

LoadedModel load_model(const fs::path& path, RunConfig& cfg) {
  LoadedModel m{net::load_checkpoint(path), {}};
  m.cooc = cooc_from_metadata(m.checkpoint.metadata, m.checkpoint.spec.bins);
  cfg.cooc = m.cooc;
  cfg.paths["checkpoint"] = path.string();
  return m;
}

void cmd_eval(const fs::path& checkpoint_path, const fs::path& manifest_path, const std::string& split_name,
              const std::string& output, RunConfig cfg) {
  cfg.paths["manifest"] = manifest_path.string();
  const auto model = load_model(checkpoint_path, cfg);
  auto manifest = harness::read_manifest(manifest_path);

  harness::Metrics metrics;
  if (split_name == "all") {
    const auto extracted = harness::extract_features(manifest, manifest.all_indices(), model.cooc,
                                                     {cfg.workers, std::nullopt});
    print_failures(extracted.failures);
    const net::Network<float> network(model.checkpoint.spec);
    metrics = harness::evaluate(network, model.checkpoint.params, extracted.features,
                                harness::iota_indices(extracted.features.size()), cfg.workers);
  } else {
    const auto split = harness::parse_split(split_name);
    if (!split || *split == harness::Split::Unassigned) {
      throw Error(Errc::InvalidConfig, "split must be train, val, test or all");
    }
    manifest = harness::ensure_split(manifest, cfg.seed);
    metrics = harness::evaluate(model.checkpoint.params, model.checkpoint.spec, manifest, *split, model.cooc,
                                cfg.workers);
  }

  auto report = run_metadata("eval", cfg);
  report["split"] = split_name;
  report["metrics"] = harness::to_json(metrics);
  if (!output.empty()) write_json(output, report);
  std::printf("%s\n", report.dump(2).c_str());
}

void cmd_predict(const fs::path& checkpoint_path, const std::vector<std::string>& images, RunConfig cfg) {
  const auto model = load_model(checkpoint_path, cfg);
  std::fprintf(stderr, "%s\n", run_metadata("predict", cfg).dump().c_str());

  const net::Network<float> network(model.checkpoint.spec);
  std::vector<float> probability(images.size());
  std::vector<std::unique_ptr<net::Workspace<float>>> ws(static_cast<std::size_t>(cfg.workers));
  parallel_for(images.size(), cfg.workers, [&](std::size_t i, int worker) {
    auto& w = ws[static_cast<std::size_t>(worker)];
    if (!w) w = network.make_workspace();
    const auto tensor = cooc::cooccur_tensor(imaging::load_image(images[i]), model.cooc);
    probability[i] = network.forward(model.checkpoint.params, tensor.data, *w);
  });
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::printf("%s\t%.6f\t%s\n", images[i].c_str(), static_cast<double>(probability[i]),
                std::string(to_string(harness::classify(probability[i]))).c_str());
  }
}

void cmd_synth(const fs::path& out_dir, int count, int size, int gan_categories, RunConfig cfg) {
  if (count < 1) throw Error(Errc::InvalidConfig, "count must be >= 1");
  if (gan_categories < 1) throw Error(Errc::InvalidConfig, "gan-categories must be >= 1");
  cfg.paths["output"] = out_dir.string();
  struct Job {
    fs::path path;
    imaging::SynthClass cls;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i);
    jobs.push_back({out_dir / "real" / "noisy" / name, imaging::SynthClass::Noisy,
                    derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(i))});
    const std::string category = gan_categories == 1 ? "smooth" : "smooth" + std::to_string(i % gan_categories);
    jobs.push_back({out_dir / "gan" / category / name, imaging::SynthClass::Smooth,
                    derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(i) + 1)});
  }
  for (const auto& job : jobs) fs::create_directories(job.path.parent_path());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i, int) {
    imaging::save_image(jobs[i].path, imaging::synth_sample(jobs[i].cls, jobs[i].seed, size, size));
  });

  auto meta = run_metadata("synth", cfg);
  meta["count_per_class"] = count;
  meta["size"] = size;
  meta["gan_categories"] = gan_categories;
  write_json(out_dir / "run.json", meta);
  std::printf("%zu images -> %s\n", jobs.size(), out_dir.string().c_str());
}

void cmd_xdataset(const fs::path& train_path, const fs::path& test_path, const std::string& output, RunConfig cfg) {
  cfg.paths["train_manifest"] = train_path.string();
  cfg.paths["test_manifest"] = test_path.string();
  auto tcfg = train_config(cfg);
  tcfg.on_epoch = log_epoch;
  const auto result = harness::cross_dataset(harness::read_manifest(train_path), harness::read_manifest(test_path),
                                             network_spec(cfg), tcfg);
  print_failures(result.training.extraction_failures);
  auto report = run_metadata("xdataset", cfg);
  report["train_accuracy"] = result.training.metrics.accuracy;
  report["training"] = harness::to_json(result.training.metrics);
  report["test"] = harness::to_json(result.test);
  if (!output.empty()) write_json(output, report);
  std::printf("train %s -> test %s: accuracy %.4f\n", train_path.string().c_str(), test_path.string().c_str(),
              result.test.accuracy);
}

void cmd_loco(const fs::path& manifest_path, const std::string& output, RunConfig cfg) {
  cfg.paths["manifest"] = manifest_path.string();
  auto tcfg = train_config(cfg);
  tcfg.on_epoch = log_epoch;
  const auto table = harness::leave_one_category_out(harness::read_manifest(manifest_path), network_spec(cfg), tcfg);

  auto report = run_metadata("loco", cfg);
  report["rows"] = ordered_json::array();
  std::printf("category\ttrain\ttest_gan\ttest_real\taccuracy\n");
  for (const auto& row : table.rows) {
    std::printf("%s\t%zu\t%zu\t%zu\t%.2f\n", row.category.c_str(), row.train_count, row.test_gan, row.test_real,
                100.0 * row.metrics.accuracy);
    report["rows"].push_back({{"category", row.category},
                              {"train_count", row.train_count},
                              {"test_gan", row.test_gan},
                              {"test_real", row.test_real},
                              {"metrics", harness::to_json(row.metrics)}});
  }
  std::printf("average\t\t\t\t%.2f\n", 100.0 * table.average);
  report["average"] = table.average;
  if (!output.empty()) write_json(output, report);
}

void cmd_jpeg(const fs::path& manifest_path, const std::string& output, RunConfig cfg) {
  cfg.paths["manifest"] = manifest_path.string();
  auto tcfg = train_config(cfg);
  tcfg.on_epoch = log_epoch;
  const auto result =
      harness::jpeg_robustness(harness::read_manifest(manifest_path), network_spec(cfg), tcfg, cfg.qualities);

  auto report = run_metadata("jpeg", cfg);
  report["original_accuracy"] = result.original_accuracy;
  report["trained_on_original"] = ordered_json::object();
  report["trained_on_compressed"] = ordered_json::object();
  std::printf("original test accuracy %.2f\n", 100.0 * result.original_accuracy);
  std::printf("QF\ttrained_on_original\ttrained_on_compressed\n");
  for (auto it = cfg.qualities.begin(); it != cfg.qualities.end(); ++it) {
    const auto& a = result.trained_on_original.at(*it);
    const auto& b = result.trained_on_compressed.at(*it);
    std::printf("%d\t%.2f\t%.2f\n", *it, 100.0 * a.accuracy, 100.0 * b.accuracy);
    report["trained_on_original"][std::to_string(*it)] = harness::to_json(a);
    report["trained_on_compressed"][std::to_string(*it)] = harness::to_json(b);
  }
  if (!output.empty()) write_json(output, report);
}

int exit_code_for(Errc code) {
  if (is_numerical(code)) return kExitNumerical;
  if (code == Errc::InvalidConfig) return kExitUsage;
  return kExitData;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Detect GAN-generated images from pixel co-occurrence matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", COOCNET_VERSION);

  std::string root, out, manifest, checkpoint, cache, split = "test", output, train_manifest, test_manifest;
  std::vector<std::string> images;
  int count = 100, size = 64, gan_categories = 1;

  struct Sub {
    CLI::App* app;
    CommonFlags flags;
  };
  std::map<std::string, Sub> subs;
  auto add = [&](const std::string& name, const std::string& help, bool training) -> CLI::App* {
    auto* sub = app.add_subcommand(name, help);
    subs[name].app = sub;
    subs[name].flags.attach(sub, training);
    return sub;
  };

  auto* m = add("manifest", "Build a JSON Lines manifest from <root>/<label>/<category>/ images", false);
  m->add_option("root", root, "Dataset root")->required();
  m->add_option("-o,--out", out, "Output manifest")->required();

  auto* e = add("extract", "Precompute co-occurrence tensors into a cache directory", false);
  e->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  e->add_option("-o,--out", out, "Output directory")->required();

  auto* t = add("train", "Split, train and save the best checkpoint", true);
  t->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  t->add_option("-o,--out", checkpoint, "Output checkpoint")->required();
  t->add_option("--cache", cache, "Tensor cache directory written by extract")->check(CLI::ExistingDirectory);

  auto* v = add("eval", "Evaluate a checkpoint on a manifest split", false);
  v->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  v->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  v->add_option("--split", split, "train, val, test or all");
  v->add_option("-o,--out", output, "Write the report here as well");

  auto* p = add("predict", "Print <path> <probability> <label> per image", false);
  p->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  p->add_option("images", images, "Image files")->required();

  auto* s = add("synth", "Write a labelled synthetic dataset tree", false);
  s->add_option("out", out, "Output directory")->required();
  s->add_option("--count", count, "Images per class");
  s->add_option("--size", size, "Image width and height");
  s->add_option("--gan-categories", gan_categories, "Number of gan categories");

  auto* x = add("xdataset", "Train on one manifest, test on another", true);
  x->add_option("train", train_manifest, "Training manifest")->required()->check(CLI::ExistingFile);
  x->add_option("test", test_manifest, "Test manifest")->required()->check(CLI::ExistingFile);
  x->add_option("-o,--out", output, "Report file");

  auto* l = add("loco", "Leave-one-category-out table", true);
  l->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  l->add_option("-o,--out", output, "Report file");

  auto* j = add("jpeg", "JPEG recompression robustness, both scenarios", true);
  j->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  j->add_option("-o,--out", output, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub.app->parsed()) name = n;
  }
  const Sub& sub = subs.at(name);

  RunConfig cfg;
  try {
    cfg = sub.flags.resolve(sub.app);
    validate(cfg);
  } catch (const Error& err) {
    std::fprintf(stderr, "coocnet %s: %s\n", name.c_str(), err.what());
    return err.code() == Errc::FileNotFound ? kExitData : kExitUsage;
  }

  try {
    if (name == "manifest") cmd_manifest(root, out, cfg);
    else if (name == "extract") cmd_extract(manifest, out, cfg);
    else if (name == "train") cmd_train(manifest, checkpoint, cache, cfg);
    else if (name == "eval") cmd_eval(checkpoint, manifest, split, output, cfg);
    else if (name == "predict") cmd_predict(checkpoint, images, cfg);
    else if (name == "synth") cmd_synth(out, count, size, gan_categories, cfg);
    else if (name == "xdataset") cmd_xdataset(train_manifest, test_manifest, output, cfg);
    else if (name == "loco") cmd_loco(manifest, output, cfg);
    else if (name == "jpeg") cmd_jpeg(manifest, output, cfg);
  } catch (const Error& err) {
    std::fflush(stdout);
    std::fprintf(stderr, "coocnet %s: %s\n", name.c_str(), err.what());
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::fflush(stdout);
    std::fprintf(stderr, "coocnet %s: %s\n", name.c_str(), err.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace coocnet::cli
