#include "house/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "house/checkpoint.hpp"
#include "house/dataset.hpp"
#include "house/evaluator.hpp"
#include "house/selftest.hpp"

namespace house {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

// Last non-empty path component, lowercased ("data/WN18RR/" -> "wn18rr").
std::string dataset_basename(const std::string& data) {
  std::filesystem::path p(data);
  std::string name = p.filename().string();
  if (name.empty()) name = p.parent_path().filename().string();
  return lowercase(name);
}

[[noreturn]] void fail_range(const std::string& msg) {
  throw CliError(kExitOutOfRange, msg);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_range("config: '" + key + "' needs an integer, got '" + value + "'");
  }
}

std::int64_t parse_int64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_range("config: '" + key + "' needs an integer, got '" + value + "'");
  }
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_range("config: '" + key + "' needs an unsigned integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_range("config: '" + key + "' needs a number, got '" + value + "'");
  }
}

// One mergeable setting: the command-line option that can dominate it and the
// action applying a config-file value.
struct ConfigKey {
  CLI::Option* opt = nullptr;
  std::function<void(const std::string&)> set;
};

using ConfigKeys = std::map<std::string, ConfigKey>;

void apply_config_file(const std::string& path, const ConfigKeys& keys) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitMissingPath, "config file not readable: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError(kExitUnknownFlag, path + ":" + std::to_string(line_no) +
                                           ": expected key=value, got '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    trim(key);
    trim(value);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw CliError(kExitUnknownFlag, path + ":" + std::to_string(line_no) +
                                           ": unknown key '" + key + "'");
    }
    // Flags given on the command line win over the config file.
    if (it->second.opt != nullptr && it->second.opt->count() > 0) continue;
    it->second.set(value);
  }
}

void validate_spec(RunSpec& spec) {
  const auto need_path = [](const std::string& value, const std::string& what) {
    if (value.empty()) {
      throw CliError(kExitMissingPath, what + " is required but was not given");
    }
  };
  TrainConfig& t = spec.train;
  if (t.threads < 1) fail_range("--threads must be >= 1");

  switch (spec.command) {
    case Command::kTestProps:
      if (spec.k < 2) fail_range("--k must be >= 2");
      if (spec.trials < 1) fail_range("--trials must be >= 1");
      return;
    case Command::kGenSynth:
      if (spec.entities < 10) fail_range("--entities must be >= 10");
      need_path(spec.out_dir, "--out (output directory)");
      return;
    case Command::kEval:
      need_path(spec.data, "--data (dataset directory)");
      need_path(spec.checkpoint, "--checkpoint (model file)");
      return;
    case Command::kTrain:
      break;
  }

  need_path(spec.data, "--data (dataset directory)");
  const bool rotation_only =
      spec.variant == Variant::kHouseR || spec.variant == Variant::kHouseRPlus;
  if (rotation_only) {
    if (spec.m_given && spec.m != 0) {
      fail_range(std::string("variant ") + variant_name(spec.variant) +
                 " is rotation-only; --m must be 0");
    }
    spec.m = 0;
  }
  if (spec.k < 2) fail_range("--k must be >= 2");
  if (spec.m < 0) fail_range("--m must be >= 0");
  if (spec.checkpoint.empty()) {
    if (spec.d == 0) {
      const int budget = dataset_budget(dataset_basename(spec.data));
      if (budget <= 0) {
        fail_range("no parameter-budget preset for '" + dataset_basename(spec.data) +
                   "'; pass --d explicitly");
      }
      spec.d = std::max(1, budget / spec.k);
    }
    if (spec.d < 1) fail_range("--d must be >= 1");
  }
  if (t.batch_size < 1) fail_range("--b must be >= 1");
  if (t.negatives < 1) fail_range("--l must be >= 1");
  if (!(t.lr > 0.0) || !std::isfinite(t.lr)) fail_range("--lr must be > 0");
  if (t.alpha < 0.0) fail_range("--alpha must be >= 0");
  if (!(t.gamma > 0.0)) fail_range("--gamma must be > 0");
  if (t.lambda < 0.0) fail_range("--lambda must be >= 0");
  if (t.max_steps < 0) fail_range("--max-steps must be >= 0");
  if (t.valid_every < 1) fail_range("--valid-every must be >= 1");
}

std::filesystem::path ensure_out_dir(const RunSpec& spec) {
  const std::filesystem::path dir = spec.out_dir.empty()
                                        ? std::filesystem::path(".")
                                        : std::filesystem::path(spec.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_split_reports(const Model& model, const Dataset& ds,
                         const FilterIndex& filter, const RunSpec& spec,
                         const std::filesystem::path& dir, std::ostream& out) {
  const int threads = spec.train.threads;
  if (!ds.store.valid.empty()) {
    const MetricsReport r = evaluate(model, ds.store.valid, filter, threads);
    std::ofstream f(dir / "valid_metrics.tsv");
    write_metrics_tsv(f, r, "valid");
    write_metrics_tsv(out, r, "valid");
  }
  if (ds.store.test.empty()) return;
  const MetricsReport r = evaluate(model, ds.store.test, filter, threads);
  {
    std::ofstream f(dir / "test_metrics.tsv");
    write_metrics_tsv(f, r, "test");
    write_metrics_tsv(out, r, "test");
  }
  {
    const auto rel = per_relation_report(model, ds.store.test, filter, threads);
    std::ofstream f(dir / "per_relation.tsv");
    write_per_relation_tsv(f, rel, ds.vocab);
  }
  {
    const auto stats = classify_rmp(ds.store, ds.vocab.num_relations());
    const auto rmp = rmp_report(model, ds.store.test, filter, stats, threads);
    std::ofstream f(dir / "rmp_metrics.tsv");
    write_rmp_tsv(f, rmp);
  }
}

int run_test_props(const RunSpec& spec, std::ostream& out) {
  const auto results = run_property_suite(spec.k, spec.trials, spec.train.seed);
  const bool ok = report_properties(out, results);
  out << (ok ? "all properties passed" : "PROPERTY FAILURES PRESENT") << " (k=" << spec.k
      << ", trials=" << spec.trials << ")\n";
  return ok ? kExitOk : kExitRuntime;
}

int run_gen_synth(const RunSpec& spec, std::ostream& out) {
  PatternMix mix;
  mix.symmetric_pairs_among_n_to_one_heads = spec.stress_rmp;
  const SyntheticKg kg = generate_pattern_kg(spec.entities, mix, spec.train.seed);
  const Dataset ds{kg.vocab, kg.store};
  const std::filesystem::path dir = ensure_out_dir(spec);
  save_dataset(ds, dir);
  out << "wrote synthetic pattern KG to " << dir.string() << ": "
      << ds.vocab.num_entities() << " entities, " << ds.vocab.num_relations()
      << " relations, " << ds.store.train.size() << "/" << ds.store.valid.size() << "/"
      << ds.store.test.size() << " train/valid/test triples\n";
  return kExitOk;
}

Model prepare_train_model(const RunSpec& spec, const Dataset& ds, std::ostream& out) {
  if (!spec.checkpoint.empty()) {
    LoadedCheckpoint lc = load_checkpoint(
        spec.checkpoint,
        spec.variant_given ? std::optional<Variant>(spec.variant) : std::nullopt);
    if (lc.header.digest != vocab_digest(ds.vocab)) {
      throw CliError(kExitRuntime,
                     "checkpoint was trained on a different vocabulary; resuming "
                     "requires the identical dataset");
    }
    if (lc.header.num_entities != ds.vocab.num_entities() ||
        lc.header.num_relations != ds.vocab.num_relations()) {
      throw CliError(kExitRuntime, "checkpoint entity/relation counts do not match "
                                   "the dataset");
    }
    if (spec.d != 0 && spec.d != lc.header.d) {
      fail_range("--d conflicts with the checkpoint (" + std::to_string(lc.header.d) +
                 ")");
    }
    if (spec.k_given && spec.k != lc.header.k) {
      fail_range("--k conflicts with the checkpoint (" + std::to_string(lc.header.k) +
                 ")");
    }
    if (spec.m_given && spec.m != lc.header.m) {
      fail_range("--m conflicts with the checkpoint (" + std::to_string(lc.header.m) +
                 ")");
    }
    out << "resuming from " << spec.checkpoint << "\n";
    return std::move(lc.model);
  }
  ModelConfig mc;
  mc.variant = spec.variant;
  mc.d = spec.d;
  mc.k = spec.k;
  mc.m = spec.m;
  mc.num_entities = ds.vocab.num_entities();
  mc.num_relations = ds.vocab.num_relations();
  mc.seed = spec.train.seed;
  return init_parameters(mc);
}

int run_train(const RunSpec& spec, std::ostream& out) {
  const Dataset ds = load_dataset(spec.data);
  out << "dataset " << spec.data << ": " << ds.vocab.num_entities() << " entities, "
      << ds.vocab.num_relations() << " relations, " << ds.store.train.size() << "/"
      << ds.store.valid.size() << "/" << ds.store.test.size()
      << " train/valid/test triples\n";

  Model model = prepare_train_model(spec, ds, out);
  const ModelConfig mc = model.cfg;
  out << "model " << variant_name(mc.variant) << " d=" << mc.d << " k=" << mc.k
      << " m=" << mc.m << " (" << model.entities.size() << " entity parameters)\n";

  const std::filesystem::path dir = ensure_out_dir(spec);
  std::ofstream log(dir / "train_log.tsv");
  if (!log) {
    throw CliError(kExitMissingPath, "cannot write training log under " + dir.string());
  }
  const TrainResult res = train(std::move(model), ds.store, spec.train, &log);
  out << "trained " << res.steps_run << " steps";
  if (res.best_valid_mrr >= 0.0) {
    out << "; best validation MRR " << res.best_valid_mrr << " at step "
        << res.best_step;
  }
  out << "; final lr " << res.final_lr << "\n";

  const std::filesystem::path ckpt = dir / "model.ckpt";
  save_checkpoint(res.model, ckpt, vocab_digest(ds.vocab));
  out << "checkpoint written to " << ckpt.string() << "\n";

  const FilterIndex filter = FilterIndex::build(ds.store);
  write_split_reports(res.model, ds, filter, spec, dir, out);
  return kExitOk;
}

int run_eval(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  const Dataset ds = load_dataset(spec.data);
  LoadedCheckpoint lc = load_checkpoint(
      spec.checkpoint,
      spec.variant_given ? std::optional<Variant>(spec.variant) : std::nullopt);
  if (lc.header.digest != vocab_digest(ds.vocab)) {
    err << "warning: checkpoint vocabulary digest does not match this dataset; "
           "metrics are meaningful only for the original id assignment\n";
  }
  if (lc.header.num_entities != ds.vocab.num_entities() ||
      lc.header.num_relations != ds.vocab.num_relations()) {
    throw CliError(kExitRuntime,
                   "checkpoint entity/relation counts do not match the dataset");
  }
  out << "model " << variant_name(lc.model.cfg.variant) << " d=" << lc.model.cfg.d
      << " k=" << lc.model.cfg.k << " m=" << lc.model.cfg.m << " from "
      << spec.checkpoint << "\n";
  const std::filesystem::path dir = ensure_out_dir(spec);
  const FilterIndex filter = FilterIndex::build(ds.store);
  write_split_reports(lc.model, ds, filter, spec, dir, out);
  return kExitOk;
}

}  // namespace

int dataset_budget(const std::string& dataset_name) {
  const std::string name = lowercase(dataset_name);
  if (name == "wn18") return 1000;
  if (name == "fb15k") return 1200;
  if (name == "wn18rr") return 800;
  if (name == "fb15k-237") return 600;
  if (name == "yago3-10") return 1000;
  return 0;
}

RunSpec parse_run_spec(const std::vector<std::string>& args) {
  RunSpec spec;
  std::string variant_str;
  std::string config_path;

  CLI::App app{"Knowledge-graph embeddings with Householder rotations and projections"};

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint with filtered ranking");
  CLI::App* props_cmd =
      app.add_subcommand("test-props", "Run the numeric property suite");
  CLI::App* synth_cmd =
      app.add_subcommand("gen-synth", "Generate a synthetic pattern dataset");

  ConfigKeys train_keys, eval_keys;

  // Options shared by train and eval; each subcommand gets its own option
  // objects bound to the same RunSpec fields.
  for (CLI::App* cmd : {train_cmd, eval_cmd}) {
    ConfigKeys& keys = cmd == train_cmd ? train_keys : eval_keys;
    CLI::Option* data = cmd->add_option("--data", spec.data, "dataset directory");
    CLI::Option* ckpt =
        cmd->add_option("--checkpoint", spec.checkpoint,
                        cmd == eval_cmd ? "model checkpoint to evaluate"
                                        : "checkpoint to resume training from");
    CLI::Option* outd = cmd->add_option("--out", spec.out_dir, "output directory");
    CLI::Option* var = cmd->add_option(
        "--variant", variant_str, "house_r | house | house_r_plus | house_plus");
    CLI::Option* thr = cmd->add_option("--threads", spec.train.threads,
                                       "worker threads (1 = deterministic)");
    cmd->add_option("--config", config_path, "key=value file; flags win");
    keys["data"] = {data, [&](const std::string& v) { spec.data = v; }};
    keys["checkpoint"] = {ckpt, [&](const std::string& v) { spec.checkpoint = v; }};
    keys["out"] = {outd, [&](const std::string& v) { spec.out_dir = v; }};
    keys["variant"] = {var, [&](const std::string& v) { variant_str = v; }};
    keys["threads"] = {thr, [&](const std::string& v) {
                         spec.train.threads = parse_int("threads", v);
                       }};
  }

  // Model and optimization flags (train only); names follow the
  // hyperparameter table: b, l, alpha, gamma, lr, k, m, lambda.
  CLI::Option* opt_d =
      train_cmd->add_option("--d", spec.d, "embedding rows (default: preset budget / k)");
  CLI::Option* opt_k = train_cmd->add_option("--k", spec.k, "rotation dimension");
  CLI::Option* opt_m =
      train_cmd->add_option("--m", spec.m, "projections per row and side");
  CLI::Option* opt_b =
      train_cmd->add_option("--b,--batch", spec.train.batch_size, "batch size");
  CLI::Option* opt_l = train_cmd->add_option("--l,--negatives", spec.train.negatives,
                                             "negative samples per positive");
  CLI::Option* opt_alpha =
      train_cmd->add_option("--alpha", spec.train.alpha, "self-adversarial temperature");
  CLI::Option* opt_gamma = train_cmd->add_option("--gamma", spec.train.gamma, "margin");
  CLI::Option* opt_lr = train_cmd->add_option("--lr", spec.train.lr, "learning rate");
  CLI::Option* opt_lambda =
      train_cmd->add_option("--lambda", spec.train.lambda, "entity L2 coefficient");
  CLI::Option* opt_steps =
      train_cmd->add_option("--max-steps", spec.train.max_steps, "training steps");
  CLI::Option* opt_veval = train_cmd->add_option("--valid-every", spec.train.valid_every,
                                                 "steps between validations");
  CLI::Option* opt_seed = train_cmd->add_option("--seed", spec.train.seed, "RNG seed");

  train_keys["d"] = {opt_d, [&](const std::string& v) { spec.d = parse_int("d", v); }};
  train_keys["k"] = {opt_k, [&](const std::string& v) {
                       spec.k = parse_int("k", v);
                       spec.k_given = true;
                     }};
  train_keys["m"] = {opt_m, [&](const std::string& v) {
                       spec.m = parse_int("m", v);
                       spec.m_given = true;
                     }};
  train_keys["b"] = {opt_b, [&](const std::string& v) {
                       spec.train.batch_size = parse_int("b", v);
                     }};
  train_keys["batch"] = {opt_b, [&](const std::string& v) {
                           spec.train.batch_size = parse_int("batch", v);
                         }};
  train_keys["l"] = {opt_l, [&](const std::string& v) {
                       spec.train.negatives = parse_int("l", v);
                     }};
  train_keys["negatives"] = {opt_l, [&](const std::string& v) {
                               spec.train.negatives = parse_int("negatives", v);
                             }};
  train_keys["alpha"] = {opt_alpha, [&](const std::string& v) {
                           spec.train.alpha = parse_double("alpha", v);
                         }};
  train_keys["gamma"] = {opt_gamma, [&](const std::string& v) {
                           spec.train.gamma = parse_double("gamma", v);
                         }};
  train_keys["lr"] = {opt_lr, [&](const std::string& v) {
                        spec.train.lr = parse_double("lr", v);
                      }};
  train_keys["lambda"] = {opt_lambda, [&](const std::string& v) {
                            spec.train.lambda = parse_double("lambda", v);
                          }};
  train_keys["max-steps"] = {opt_steps, [&](const std::string& v) {
                               spec.train.max_steps = parse_int64("max-steps", v);
                             }};
  train_keys["valid-every"] = {opt_veval, [&](const std::string& v) {
                                 spec.train.valid_every = parse_int64("valid-every", v);
                               }};
  train_keys["seed"] = {opt_seed, [&](const std::string& v) {
                          spec.train.seed = parse_uint64("seed", v);
                        }};

  // test-props flags.
  props_cmd->add_option("--k", spec.k, "dimension to exercise");
  props_cmd->add_option("--trials", spec.trials, "trials per property");
  props_cmd->add_option("--seed", spec.train.seed, "RNG seed");

  // gen-synth flags.
  synth_cmd->add_option("--entities", spec.entities, "number of entities (>= 10)");
  synth_cmd->add_option("--out", spec.out_dir, "output directory");
  synth_cmd->add_option("--seed", spec.train.seed, "RNG seed");
  synth_cmd->add_flag("--stress-rmp", spec.stress_rmp,
                      "entangle symmetric pairs with N-to-1 heads");

  // CLI11's argc/argv entry point expects argv[0] to be the program name.
  std::vector<const char*> argv;
  argv.push_back("house");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw CliHelp{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw CliHelp{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ExtrasError& e) {
    throw CliError(kExitUnknownFlag, e.what());
  } catch (const CLI::ConversionError& e) {
    throw CliError(kExitOutOfRange, e.what());
  } catch (const CLI::ValidationError& e) {
    throw CliError(kExitOutOfRange, e.what());
  } catch (const CLI::RequiredError& e) {
    throw CliError(kExitMissingPath, e.what());
  } catch (const CLI::ParseError& e) {
    throw CliError(kExitUnknownFlag, e.what());
  }

  if (train_cmd->parsed()) {
    spec.command = Command::kTrain;
  } else if (eval_cmd->parsed()) {
    spec.command = Command::kEval;
  } else if (props_cmd->parsed()) {
    spec.command = Command::kTestProps;
  } else if (synth_cmd->parsed()) {
    spec.command = Command::kGenSynth;
  } else {
    throw CliHelp{app.help()};
  }

  if (!config_path.empty()) {
    if (spec.command == Command::kTrain) {
      apply_config_file(config_path, train_keys);
    } else if (spec.command == Command::kEval) {
      apply_config_file(config_path, eval_keys);
    }
  }

  if (!variant_str.empty()) {
    try {
      spec.variant = variant_from_name(variant_str);
    } catch (const std::invalid_argument& e) {
      fail_range(e.what());
    }
    spec.variant_given = true;
  }
  spec.k_given = spec.k_given || opt_k->count() > 0;
  spec.m_given = spec.m_given || opt_m->count() > 0;

  validate_spec(spec);
  return spec;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  switch (spec.command) {
    case Command::kTestProps: return run_test_props(spec, out);
    case Command::kGenSynth: return run_gen_synth(spec, out);
    case Command::kTrain: return run_train(spec, out);
    case Command::kEval: return run_eval(spec, out, err);
  }
  throw CliError(kExitUnknownFlag, "unhandled command");
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(std::size_t(argc > 1 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const RunSpec spec = parse_run_spec(args);
    return run(spec, std::cout, std::cerr);
  } catch (const CliHelp& help) {
    std::cout << help.text;
    return kExitOk;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace house
