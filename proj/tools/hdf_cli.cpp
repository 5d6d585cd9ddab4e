// Copyright 2026 The HDF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hdf: command-line front end for data generation, training, evaluation,
// ablations, loss-landscape slices, embedding export and gradient checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdf/checkpoint.hpp"
#include "hdf/harness/ablation.hpp"
#include "hdf/harness/config.hpp"
#include "hdf/harness/dataset_io.hpp"
#include "hdf/harness/landscape.hpp"
#include "hdf/harness/train.hpp"
#include "hdf/harness/verification.hpp"
#include "hdf/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace hdf;
using harness::RunConfig;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value config file");
    app->add_option("-s,--set", overrides, "override, key=value (repeatable)");
  }

  RunConfig resolve(RunConfig base = {}) const {
    RunConfig cfg = file.empty() ? std::move(base) : harness::load_config(file, std::move(base));
    for (const auto& o : overrides) harness::apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

harness::DatasetBundle load_or_generate(const std::string& dir, const RunConfig& cfg) {
  if (dir.empty()) return harness::generate_bundle(cfg.data);
  harness::DatasetBundle b = harness::read_dataset(dir);
  return b;
}

// Data extents in the config must describe the dataset actually used.
RunConfig adopt_data_spec(RunConfig cfg, const harness::SyntheticSpec& spec) {
  cfg.data = spec;
  cfg.validate();
  return cfg;
}

const harness::Dataset& pick_split(const harness::DatasetBundle& b, const std::string& split) {
  if (split == "train") return b.train;
  if (split == "test") return b.test;
  throw std::invalid_argument("unknown split '" + split + "' (train | test)");
}

// Checkpoints remember the run config and variant they were trained with.
struct LoadedRun {
  model::Checkpoint ck;
  RunConfig cfg;
  model::Variant variant;
};

LoadedRun load_run(const std::string& path, const ConfigArgs& args) {
  LoadedRun r{model::load_checkpoint(path), {}, {}};
  RunConfig base = harness::parse_config(r.ck.meta.value("config", std::string()), RunConfig{}, path + "[config]");
  r.cfg = args.resolve(std::move(base));
  r.variant = model::Variant{r.ck.meta.value("setting", std::string("custom")), r.ck.model, r.ck.meta.value("use_dsm", false)};
  return r;
}

void print_config_warnings(const harness::MetricsReport& m) {
  for (int k : m.absent_classes) std::cerr << "warning: class " << k << " absent from labels; excluded from UAR\n";
}

int cmd_config(const ConfigArgs& args) {
  std::cout << harness::dump_config(args.resolve());
  return 0;
}

int cmd_gen_data(const ConfigArgs& args, const std::string& out) {
  const RunConfig cfg = args.resolve();
  const auto bundle = harness::generate_bundle(cfg.data);
  harness::write_dataset(out, bundle);
  const nlohmann::json j = {{"type", "dataset"}, {"dir", out}, {"train", bundle.train.size()}, {"test", bundle.test.size()}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_train(const ConfigArgs& args, const std::string& data_dir, const std::string& out) {
  RunConfig cfg = args.resolve();
  const auto data = load_or_generate(data_dir, cfg);
  cfg = adopt_data_spec(cfg, data.spec);
  const model::Variant v = harness::resolve_variant(cfg, cfg.train.setting);
  fs::create_directories(out);
  auto epochs = open_out(fs::path(out) / "metrics.jsonl");
  auto steps = open_out(fs::path(out) / "scaling.jsonl");
  open_out(fs::path(out) / "config.txt") << harness::dump_config(cfg);
  const nlohmann::json meta = {{"setting", v.setting}, {"use_dsm", v.use_dsm}, {"seed", cfg.train.seed},
                               {"config", harness::dump_config(cfg)}};
  try {
    const auto res = harness::train(cfg, v, cfg.train.seed, data.train, &data.test, {&epochs, &steps});
    model::save_checkpoint(fs::path(out) / "checkpoint.bin", v.model, res.params, meta);
    const auto& last = res.epochs.back();
    nlohmann::json j = {{"type", "train"}, {"setting", v.setting}, {"seed", cfg.train.seed},
                        {"epochs", res.epochs.size()}, {"steps", res.steps.size()}, {"test", harness::to_json(last.test)}};
    std::cout << j.dump() << "\n";
  } catch (const harness::TrainingAborted& e) {
    nlohmann::json m = meta;
    m["aborted_at_step"] = e.step();
    model::save_checkpoint(fs::path(out) / "checkpoint.bin", v.model, e.last_good(), m);
    std::cerr << "training aborted: " << e.what() << "; last good parameters saved\n";
    return 2;
  }
  return 0;
}

int cmd_eval(const ConfigArgs& args, const std::string& ckpt, const std::string& data_dir, const std::string& split) {
  LoadedRun run = load_run(ckpt, args);
  const auto data = load_or_generate(data_dir, run.cfg);
  model::Model<float> m(run.ck.model, run.ck.params);
  const auto report = harness::evaluate(m, pick_split(data, split));
  print_config_warnings(report);
  nlohmann::json j = harness::to_json(report);
  j["type"] = "eval";
  j["split"] = split;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_ablate(const ConfigArgs& args, const std::string& data_dir, const std::string& out) {
  RunConfig cfg = args.resolve();
  const auto data = load_or_generate(data_dir, cfg);
  cfg = adopt_data_spec(cfg, data.spec);
  fs::create_directories(out);
  auto records = open_out(fs::path(out) / "records.jsonl");
  const auto report = harness::run_ablation(cfg, data, &records, &std::cerr);
  const std::string tables = "Component ablation\n\n" + harness::format_component_table(report) +
                             "\nBranch ablation (all rows trained with DSM)\n\n" + harness::format_branch_table(report);
  open_out(fs::path(out) / "tables.md") << tables;
  std::cout << tables;
  const auto a = report.find("a"), d = report.find("d");
  if (a && d) {
    std::printf("\nmean UAR d - a: %+.2f\n", d->uar_mean - a->uar_mean);
  }
  return 0;
}

int cmd_landscape(const ConfigArgs& args, const std::string& ckpt, const std::string& data_dir, const std::string& split,
                  const std::string& out) {
  LoadedRun run = load_run(ckpt, args);
  const auto data = load_or_generate(data_dir, run.cfg);
  const auto res = harness::landscape_slice(run.ck.model, run.ck.params, run.variant, run.cfg, pick_split(data, split));
  auto os = open_out(out);
  os << "i\tj\talpha\tbeta\tloss\n";
  char line[160];
  for (const auto& p : res.points) {
    std::snprintf(line, sizeof(line), "%zu\t%zu\t%.9g\t%.9g\t%.9g\n", p.i, p.j, p.alpha, p.beta, p.loss);
    os << line;
  }
  const nlohmann::json j = {{"type", "landscape"}, {"resolution", res.resolution}, {"extent", res.extent},
                            {"rows", res.points.size()}, {"center_loss", res.center_loss}, {"flatness", res.flatness}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_export(const ConfigArgs& args, const std::string& ckpt, const std::string& data_dir, const std::string& split,
               const std::string& out) {
  LoadedRun run = load_run(ckpt, args);
  const auto data = load_or_generate(data_dir, run.cfg);
  const auto& ds = pick_split(data, split);
  model::Model<float> m(run.ck.model, run.ck.params);
  const auto emb = harness::compute_embeddings(m, ds);
  const std::size_t d = emb.shape()[1];
  auto os = open_out(out);
  os << "index\tlabel\tsource";
  for (std::size_t k = 0; k < d; ++k) os << "\te" << k;
  os << "\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << i << "\t" << ds.labels[i] << "\t" << ds.sources[i];
    for (std::size_t k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof(buf), "\t%.9g", static_cast<double>(emb[i * d + k]));
      os << buf;
    }
    os << "\n";
  }
  const nlohmann::json j = {{"type", "embeddings"}, {"rows", ds.size()}, {"dim", d}, {"split", split}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_grad_check(const harness::SuiteOptions& opt) {
  const auto cases = harness::run_gradient_suite(opt);
  bool ok = true;
  std::printf("%-16s %9s %9s %12s  %s\n", "case", "instances", "checked", "max rel err", "result");
  for (const auto& c : cases) {
    std::printf("%-16s %9zu %9zu %12.3e  %s\n", c.name.c_str(), c.instances, c.checked, c.max_rel_error,
                c.passed ? "pass" : "FAIL");
    ok = ok && c.passed;
  }
  std::printf("tolerance %.1e: %s\n", opt.tolerance, ok ? "all passed" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneity-robust sequence classification toolkit"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "kernel backend: scalar | avx2 | neon (default: best available)");

  ConfigArgs cfg_args;
  std::string data_dir, out, ckpt, split = "test";

  auto* config = app.add_subcommand("config", "print the resolved configuration with documentation");
  cfg_args.attach(config);

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset directory");
  cfg_args.attach(gen);
  gen->add_option("-o,--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train one setting; writes checkpoint and metrics");
  cfg_args.attach(train);
  train->add_option("-d,--data", data_dir, "dataset directory (default: generate from data.*)");
  train->add_option("-o,--out", out, "run directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  cfg_args.attach(eval);
  eval->add_option("-k,--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("-d,--data", data_dir, "dataset directory (default: regenerate from the checkpoint config)");
  eval->add_option("--split", split, "train | test");

  auto* ablate = app.add_subcommand("ablate", "train every ablation setting over several seeds");
  cfg_args.attach(ablate);
  ablate->add_option("-d,--data", data_dir, "dataset directory (default: generate from data.*)");
  ablate->add_option("-o,--out", out, "output directory")->required();

  auto* land = app.add_subcommand("landscape", "loss over a 2-D slice of parameter space");
  cfg_args.attach(land);
  land->add_option("-k,--checkpoint", ckpt, "checkpoint file")->required();
  land->add_option("-d,--data", data_dir, "dataset directory");
  land->add_option("--split", split, "train | test");
  land->add_option("-o,--out", out, "output TSV")->required();

  auto* exp = app.add_subcommand("export-embeddings", "write normalized embeddings as TSV");
  cfg_args.attach(exp);
  exp->add_option("-k,--checkpoint", ckpt, "checkpoint file")->required();
  exp->add_option("-d,--data", data_dir, "dataset directory");
  exp->add_option("--split", split, "train | test");
  exp->add_option("-o,--out", out, "output TSV")->required();

  harness::SuiteOptions suite;
  auto* gc = app.add_subcommand("grad-check", "finite-difference check of every analytic gradient");
  gc->add_option("--instances", suite.instances, "random instances per case");
  gc->add_option("--seed", suite.seed, "base seed");
  gc->add_option("--tolerance", suite.tolerance, "max relative error");
  gc->add_option("--case", suite.only, "restrict to these cases (repeatable)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (!simd.empty()) {
      if (simd == "scalar") simd::set_backend(simd::Backend::kScalar);
      else if (simd == "avx2") simd::set_backend(simd::Backend::kAvx2);
      else if (simd == "neon") simd::set_backend(simd::Backend::kNeon);
      else throw std::invalid_argument("unknown --simd value '" + simd + "'");
    }
    if (config->parsed()) return cmd_config(cfg_args);
    if (gen->parsed()) return cmd_gen_data(cfg_args, out);
    if (train->parsed()) return cmd_train(cfg_args, data_dir, out);
    if (eval->parsed()) return cmd_eval(cfg_args, ckpt, data_dir, split);
    if (ablate->parsed()) return cmd_ablate(cfg_args, data_dir, out);
    if (land->parsed()) return cmd_landscape(cfg_args, ckpt, data_dir, split, out);
    if (exp->parsed()) return cmd_export(cfg_args, ckpt, data_dir, split, out);
    if (gc->parsed()) return cmd_grad_check(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
