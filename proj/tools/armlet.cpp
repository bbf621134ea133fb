// armlet: train, evaluate, predict, explain and bench from the command line.
//
// Exit codes: 0 ok, 2 config/path, 3 schema mismatch, 4 metric, 5 argument,
// 1 anything else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "armlet/dataset.hpp"
#include "armlet/error.hpp"
#include "armlet/interpret.hpp"
#include "armlet/metrics.hpp"
#include "armlet/model.hpp"
#include "armlet/persist.hpp"
#include "armlet/synthetic.hpp"
#include "armlet/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace armlet;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kSchemaMismatch = 3, kMetric = 4, kArgument = 5 };

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
    case ErrorKind::kIo:
      return kConfig;
    case ErrorKind::kMetric:
      return kMetric;
    case ErrorKind::kArgument:
      return kArgument;
    default:
      return kFailure;
  }
}

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw CliError(kConfig, flag + " is required");
  if (!fs::exists(path)) throw CliError(kConfig, flag + ": no such file '" + path + "'");
}

json read_json_file(const std::string& path, const std::string& flag) {
  require_file(path, flag);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError(kConfig, flag + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw CliError(kConfig, "cannot write '" + path + "'");
  out << text;
}

// Loads data against a model's embedded schema; any mismatch is exit code 3.
Dataset load_for_model(const Model& model, const std::string& data_path, const std::string& format,
                       const std::string& schema_path) {
  require_file(data_path, "--data");
  if (!schema_path.empty()) {
    require_file(schema_path, "--schema");
    if (!(load_schema(schema_path) == *model.schema()))
      throw CliError(kSchemaMismatch, "--schema does not match the schema stored in the model");
  }
  const auto fmt = format.empty() ? guess_format(data_path) : parse_format(format);
  try {
    LoadReport rep;
    auto data = load_dataset(data_path, model.schema(), fmt, &rep);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    return data;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kData || e.kind() == ErrorKind::kParse)
      throw CliError(kSchemaMismatch, std::string("data does not match the model schema: ") + e.what());
    throw;
  }
}

std::unique_ptr<Model> load_model_arg(const std::string& path) {
  require_file(path, "--model");
  return load_model(path);
}

std::size_t threads() { return env_threads(); }

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string model_kind;
  std::string schema, data, train, valid, test, format;
  std::string model_out = "model.json";
  std::string history, summary;
  std::vector<std::uint64_t> seeds;
  std::uint64_t split_seed = 0;
  std::size_t jobs = 1;
  bool float64 = false;

  // flag overrides
  std::size_t k = 0, o = 0, n_emb = 0, batch_size = 0, patience = 0, max_epochs = 0;
  double alpha = 0.0, lr = 0.0;
  std::uint64_t seed = 0;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  EvalReport test;
  TrainResult result;
  std::string model_path;
  std::string history;
};

std::string seeded_path(const std::string& base, std::uint64_t seed, bool multi) {
  if (!multi) return base;
  fs::path p(base);
  return (p.parent_path() / (p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string()))
      .string();
}

int cmd_train(const TrainArgs& a, const CLI::App& sub) {
  json cfg = json::object();
  if (!a.config.empty()) cfg = read_json_file(a.config, "--config");
  if (!cfg.is_object()) throw CliError(kConfig, "--config must hold a JSON object");

  auto str = [&](const char* flag, const std::string& flag_value, const char* key) {
    if (sub.count(flag)) return flag_value;
    return cfg.contains(key) ? cfg[key].get<std::string>() : flag_value;
  };
  const std::string kind_name = str("--model-kind", a.model_kind.empty() ? "arm" : a.model_kind, "model_kind");
  const std::string schema_path = str("--schema", a.schema, "schema");
  const std::string data_path = str("--data", a.data, "data");
  const std::string train_path = str("--train", a.train, "train");
  const std::string valid_path = str("--valid", a.valid, "valid");
  const std::string test_path = str("--test", a.test, "test");
  const std::string format = str("--format", a.format, "format");
  const std::string model_out = str("--model-out", a.model_out, "model_out");
  const std::string history_path = str("--history", a.history, "history");
  const std::string summary_path = str("--summary", a.summary, "summary");

  ArmConfig acfg;
  TrainConfig tcfg;
  try {
    acfg = config_from_json(cfg);
    tcfg.lr = cfg.value("lr", tcfg.lr);
    tcfg.batch_size = cfg.value("batch_size", tcfg.batch_size);
    tcfg.max_epochs = cfg.value("max_epochs", tcfg.max_epochs);
    tcfg.patience = cfg.value("patience", tcfg.patience);
    tcfg.eval_every = cfg.value("eval_every", tcfg.eval_every);
  } catch (const json::exception& e) {
    throw CliError(kConfig, std::string("--config: ") + e.what());
  }
  if (sub.count("--k")) acfg.heads = a.k;
  if (sub.count("--o")) acfg.neurons = a.o;
  if (sub.count("--n-emb")) acfg.n_e = a.n_emb;
  if (sub.count("--alpha")) acfg.alpha = a.alpha;
  if (sub.count("--lr")) tcfg.lr = a.lr;
  if (sub.count("--batch-size")) tcfg.batch_size = a.batch_size;
  if (sub.count("--patience")) tcfg.patience = a.patience;
  if (sub.count("--max-epochs")) tcfg.max_epochs = a.max_epochs;
  tcfg.threads = threads();
  acfg.validate();
  tcfg.validate();
  const auto kind = parse_model_kind(kind_name);

  std::vector<std::uint64_t> seeds;
  if (sub.count("--seeds")) seeds = a.seeds;
  else if (sub.count("--seed")) seeds = {a.seed};
  else if (cfg.contains("seeds")) seeds = cfg["seeds"].get<std::vector<std::uint64_t>>();
  else if (cfg.contains("seed")) seeds = {cfg["seed"].get<std::uint64_t>()};
  else seeds = {0};
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  const std::uint64_t split_seed = sub.count("--split-seed") ? a.split_seed : cfg.value("split_seed", a.split_seed);

  require_file(schema_path, "--schema");
  for (const auto& [flag, path] : {std::pair<const char*, std::string>{"--model-out", model_out},
                                   {"--history", history_path},
                                   {"--summary", summary_path}}) {
    if (path.empty() || path == "-") continue;
    const auto dir = fs::path(path).parent_path();
    if (!dir.empty() && !fs::is_directory(dir))
      throw CliError(kConfig, std::string(flag) + ": directory '" + dir.string() + "' does not exist");
  }
  auto schema = std::make_shared<const Schema>(load_schema(schema_path));
  auto load = [&](const std::string& path, const std::string& flag) {
    require_file(path, flag);
    const auto fmt = format.empty() ? guess_format(path) : parse_format(format);
    LoadReport rep;
    auto d = load_dataset(path, schema, fmt, &rep);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << flag << ": " << w << '\n';
    return d;
  };
  Dataset train_set, valid_set, test_set;
  if (!data_path.empty()) {
    std::tie(train_set, valid_set, test_set) = split(load(data_path, "--data"), {}, split_seed);
  } else {
    if (train_path.empty()) throw CliError(kConfig, "--train (or --data) is required");
    train_set = load(train_path, "--train");
    valid_set = load(valid_path, "--valid");
    if (!test_path.empty()) test_set = load(test_path, "--test");
  }

  const bool multi = seeds.size() > 1;
  std::vector<SeedOutcome> outcomes(seeds.size());
  std::mutex log_mutex;
  auto run_seed = [&](std::size_t idx) {
    SeedOutcome& out = outcomes[idx];
    out.seed = seeds[idx];
    TrainConfig t = tcfg;
    t.seed = out.seed;
    auto model = make_model(kind, acfg, schema, out.seed);
    std::ostringstream hist;
    out.result = train(*model, train_set, valid_set, t, [&](const HistoryRecord& r) {
      write_history_line(hist, r);
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "seed " << out.seed << " epoch " << r.epoch << " step " << r.step
                << " valid_auc " << r.valid_auc << '\n';
    });
    out.history = hist.str();
    if (!test_set.empty()) out.test = evaluate(*model, test_set, t.threads);
    out.model_path = seeded_path(model_out, out.seed, multi);
    save_model(*model, out.model_path, a.float64 ? Precision::kFloat64 : Precision::kFloat32);
  };
  if (a.jobs <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_seed(i);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    std::size_t next = 0;
    std::vector<std::exception_ptr> errors(seeds.size());
    for (std::size_t w = 0; w < std::min(a.jobs, seeds.size()); ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= seeds.size()) return;
            i = next++;
          }
          try {
            run_seed(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  if (!history_path.empty()) {
    std::string text;
    for (const auto& o : outcomes) text += "# seed " + std::to_string(o.seed) + "\n" + o.history;
    write_text(history_path, text);
  }

  json summary;
  summary["model_kind"] = to_string(kind);
  summary["config"] = config_to_json(acfg);
  json runs = json::array();
  for (const auto& o : outcomes) {
    json r = {{"seed", o.seed},
              {"model", o.model_path},
              {"best_valid_auc", o.result.best_valid_auc},
              {"epochs", o.result.history.empty() ? 0 : o.result.history.back().epoch},
              {"early_stopped", o.result.early_stopped}};
    if (!test_set.empty()) {
      r["test_auc"] = o.test.auc;
      r["test_logloss"] = o.test.logloss;
    }
    runs.push_back(r);
  }
  summary["runs"] = runs;
  if (!test_set.empty()) {
    auto stats = [&](auto get) {
      double mean = 0.0;
      for (const auto& o : outcomes) mean += get(o);
      mean /= static_cast<double>(outcomes.size());
      double var = 0.0;
      for (const auto& o : outcomes) var += (get(o) - mean) * (get(o) - mean);
      const double sd = outcomes.size() > 1 ? std::sqrt(var / static_cast<double>(outcomes.size() - 1)) : 0.0;
      return json{{"mean", mean}, {"std", sd}};
    };
    summary["test_auc"] = stats([](const SeedOutcome& o) { return o.test.auc; });
    summary["test_logloss"] = stats([](const SeedOutcome& o) { return o.test.logloss; });
  }
  for (const auto& o : outcomes) {
    std::printf("seed %llu  valid_auc %.6f", static_cast<unsigned long long>(o.seed), o.result.best_valid_auc);
    if (!test_set.empty()) std::printf("  test_auc %.6f  test_logloss %.6f", o.test.auc, o.test.logloss);
    std::printf("  -> %s\n", o.model_path.c_str());
  }
  if (!test_set.empty())
    std::printf("mean test_auc %.6f (std %.6f)  mean test_logloss %.6f (std %.6f)  over %zu seeds\n",
                summary["test_auc"]["mean"].get<double>(), summary["test_auc"]["std"].get<double>(),
                summary["test_logloss"]["mean"].get<double>(), summary["test_logloss"]["std"].get<double>(),
                outcomes.size());
  if (!summary_path.empty()) write_text(summary_path, summary.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- eval / predict / explain

struct DataArgs {
  std::string config;
  std::string model, data, format, schema, out;
};

// Fills options not given on the command line from --config. A train config
// can be reused: `model_out` stands in for `model` and `test` for `data`.
json merge_data_config(DataArgs& a, const CLI::App& sub) {
  if (a.config.empty()) return json::object();
  const json cfg = read_json_file(a.config, "--config");
  if (!cfg.is_object()) throw CliError(kConfig, "--config must hold a JSON object");
  auto take = [&](const char* flag, std::string& field, std::initializer_list<const char*> keys) {
    if (sub.count(flag)) return;
    for (const char* k : keys)
      if (cfg.contains(k)) {
        field = cfg[k].get<std::string>();
        return;
      }
  };
  take("--model", a.model, {"model", "model_out"});
  take("--data", a.data, {"data", "test"});
  take("--format", a.format, {"format"});
  take("--schema", a.schema, {"schema"});
  take("--out", a.out, {"out", "report"});
  return cfg;
}

int cmd_eval(const DataArgs& a) {
  const auto model = load_model_arg(a.model);
  const auto data = load_for_model(*model, a.data, a.format, a.schema);
  const auto rep = evaluate(*model, data, threads());
  std::printf("auc %.6f  logloss %.6f  n %zu\n", rep.auc, rep.logloss, rep.n);
  const json j = {{"auc", rep.auc}, {"logloss", rep.logloss}, {"n", rep.n}};
  std::printf("%s\n", j.dump().c_str());
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  return kOk;
}

int cmd_predict(const DataArgs& a) {
  const auto model = load_model_arg(a.model);
  const auto data = load_for_model(*model, a.data, a.format, a.schema);
  const auto logits = predict_logits(*model, data.instances, threads());
  std::string text;
  char line[64];
  for (std::size_t i = 0; i < logits.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f\n", i, sigmoid(logits[i]));
    text += line;
  }
  write_text(a.out, text);
  return kOk;
}

int cmd_explain(const DataArgs& a, std::size_t top_n, const std::vector<std::size_t>& ids) {
  const auto model = load_model_arg(a.model);
  const ArmParams* params = model->arm_params();
  if (!params) throw CliError(kArgument, "explain needs an arm or arm_plus model");
  const auto data = load_for_model(*model, a.data, a.format, a.schema);
  std::map<std::size_t, LocalAttribution> local;
  for (auto id : ids) {
    if (id >= data.size())
      throw CliError(kArgument, "--instances: index " + std::to_string(id) + " out of range (" +
                                    std::to_string(data.size()) + " instances)");
    local.emplace(id, local_attribution(data.instances[id], *params));
  }
  const auto global = global_importance(*params);
  const auto catalog = interaction_catalog(data, *params, top_n);
  write_text(a.out, attribution_report_json(*params, global, catalog, local) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string config;
  std::string model;
  std::vector<std::size_t> m_list{4, 8, 16, 32, 64};
  std::size_t batch = 1000;
  std::size_t reps = 5;
  std::size_t cardinality = 10;
  std::uint64_t seed = 0;
  std::size_t k = 4, o = 64, n_emb = 10;
  std::string out;
};

// Coefficient of determination of the least-squares line through (x, y).
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y, double& slope,
                     double& intercept) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  slope = sxy / sxx;
  intercept = my - slope * mx;
  return syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
}

int cmd_bench(BenchArgs a, const CLI::App& sub) {
  if (!a.config.empty()) {
    const json cfg = read_json_file(a.config, "--config");
    auto take = [&](const char* flag, auto& field, const char* key) {
      if (!sub.count(flag) && cfg.contains(key)) field = cfg[key].get<std::decay_t<decltype(field)>>();
    };
    take("--model", a.model, "model");
    take("--m-list", a.m_list, "m_list");
    take("--batch", a.batch, "batch");
    take("--reps", a.reps, "reps");
    take("--seed", a.seed, "seed");
    take("--k", a.k, "K");
    take("--o", a.o, "o");
    take("--n-emb", a.n_emb, "n_e");
    take("--out", a.out, "out");
  }
  if (a.reps < 3) throw CliError(kArgument, "--reps must be >= 3");
  if (a.batch < 1) throw CliError(kArgument, "--batch must be >= 1");
  if (a.m_list.size() < 2) throw CliError(kArgument, "--m-list needs at least two sizes");
  ArmConfig cfg;
  ModelKind kind = ModelKind::kArm;
  if (!a.model.empty()) {
    const auto base = load_model_arg(a.model);
    cfg = base->config();
    kind = base->kind();
  }
  if (a.model.empty() || sub.count("--k")) cfg.heads = a.k;
  if (a.model.empty() || sub.count("--o")) cfg.neurons = a.o;
  if (a.model.empty() || sub.count("--n-emb")) cfg.n_e = a.n_emb;
  cfg.validate();

  json rows = json::array();
  std::vector<double> ms, per_tuple;
  std::printf("%6s %14s %16s %14s\n", "m", "median_s", "per_tuple_us", "tuples_per_s");
  for (auto m : a.m_list) {
    auto schema = std::make_shared<const Schema>(synthetic_schema(std::vector<std::size_t>(m, a.cardinality)));
    auto model = make_model(kind, cfg, schema, a.seed);
    Rng rng(a.seed + m);
    std::vector<Instance> xs(a.batch);
    for (auto& x : xs) {
      x.features.resize(m);
      for (auto& f : x.features) f = {static_cast<std::int32_t>(rng.below(a.cardinality)), 1.0};
    }
    std::vector<double> logits(a.batch);
    std::vector<double> times;
    for (std::size_t r = 0; r < a.reps + 1; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      model->predict(xs, logits);
      const auto t1 = std::chrono::steady_clock::now();
      if (r > 0) times.push_back(std::chrono::duration<double>(t1 - t0).count());  // first rep is warm-up
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    const double tuple_s = median / static_cast<double>(a.batch);
    ms.push_back(static_cast<double>(m));
    per_tuple.push_back(tuple_s);
    rows.push_back({{"m", m}, {"median_seconds", median}, {"per_tuple_seconds", tuple_s},
                    {"tuples_per_second", 1.0 / tuple_s}});
    std::printf("%6zu %14.6f %16.3f %14.1f\n", m, median, tuple_s * 1e6, 1.0 / tuple_s);
  }
  double slope = 0, intercept = 0;
  const double r2 = linear_fit_r2(ms, per_tuple, slope, intercept);
  std::printf("linear fit per_tuple_us = %.4f * m + %.4f   R^2 = %.5f\n", slope * 1e6, intercept * 1e6, r2);
  const json doc = {{"model_kind", to_string(kind)},
                    {"config", config_to_json(cfg)},
                    {"batch", a.batch},
                    {"reps", a.reps},
                    {"rows", rows},
                    {"fit", {{"slope_seconds_per_field", slope}, {"intercept_seconds", intercept}, {"r2", r2}}}};
  if (!a.out.empty()) write_text(a.out, doc.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out,
              const std::string& schema_out) {
  require_file(spec_path, "--spec");
  const auto spec = load_synthetic_spec(spec_path);
  const auto s = generate_synthetic(spec, seed);
  write_text(out, to_indexed(s.data));
  if (!schema_out.empty()) write_text(schema_out, schema_to_json(*s.data.schema) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"armlet: gated exponential-neuron models for tabular data"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train one model per seed and summarise");
  train_cmd->add_option("--config", ta.config, "JSON run config; flags override its keys");
  train_cmd->add_option("--model-kind", ta.model_kind, "arm | arm_plus | lr | fm | fm_plus | dnn");
  train_cmd->add_option("--schema", ta.schema, "schema file");
  train_cmd->add_option("--data", ta.data, "single data file, split 8:1:1");
  train_cmd->add_option("--train", ta.train, "training split");
  train_cmd->add_option("--valid", ta.valid, "validation split");
  train_cmd->add_option("--test", ta.test, "test split");
  train_cmd->add_option("--format", ta.format, "csv | indexed (default: by extension)");
  train_cmd->add_option("--model-out", ta.model_out, "model file (per-seed suffix when several seeds)");
  train_cmd->add_option("--history", ta.history, "history file");
  train_cmd->add_option("--summary", ta.summary, "summary JSON file");
  train_cmd->add_option("--seeds", ta.seeds, "seeds, one run each");
  train_cmd->add_option("--seed", ta.seed, "single seed");
  train_cmd->add_option("--split-seed", ta.split_seed, "seed of the --data split");
  train_cmd->add_option("--jobs", ta.jobs, "seeds trained concurrently");
  train_cmd->add_flag("--float64", ta.float64, "store tensors in 64-bit precision");
  train_cmd->add_option("--k", ta.k, "attention heads");
  train_cmd->add_option("--o", ta.o, "exponential neurons per head");
  train_cmd->add_option("--alpha", ta.alpha, "entmax alpha");
  train_cmd->add_option("--n-emb", ta.n_emb, "embedding size");
  train_cmd->add_option("--lr", ta.lr, "learning rate");
  train_cmd->add_option("--batch-size", ta.batch_size, "batch size");
  train_cmd->add_option("--patience", ta.patience, "early-stopping patience");
  train_cmd->add_option("--max-epochs", ta.max_epochs, "epoch limit");

  DataArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "AUC and logloss of a saved model");
  DataArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "write index,score lines");
  DataArgs xa;
  std::size_t top_n = 8;
  std::vector<std::size_t> instance_ids;
  auto* explain_cmd = app.add_subcommand("explain", "attribution report");
  for (auto [cmd, args] : {std::pair{eval_cmd, &ea}, std::pair{predict_cmd, &pa}, std::pair{explain_cmd, &xa}}) {
    cmd->add_option("--config", args->config, "JSON file with model, data, format, schema, out");
    cmd->add_option("--model", args->model, "model file");
    cmd->add_option("--data", args->data, "data file");
    cmd->add_option("--format", args->format, "csv | indexed (default: by extension)");
    cmd->add_option("--schema", args->schema, "optional schema, checked against the model");
    cmd->add_option("--out", args->out, "output file (default: stdout)");
  }
  explain_cmd->add_option("--top-n", top_n, "interaction terms to keep");
  explain_cmd->add_option("--instances", instance_ids, "instance indices for local attribution");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "inference time per tuple versus field count");
  bench_cmd->add_option("--config", ba.config, "JSON file with m_list, batch, reps, seed, K, o, n_e");
  bench_cmd->add_option("--model", ba.model, "take the config from this model");
  bench_cmd->add_option("--m-list", ba.m_list, "field counts")->delimiter(',');
  bench_cmd->add_option("--batch", ba.batch, "tuples per timed call");
  bench_cmd->add_option("--reps", ba.reps, "timed repetitions (>= 3)");
  bench_cmd->add_option("--cardinality", ba.cardinality, "categories per synthetic field");
  bench_cmd->add_option("--seed", ba.seed, "seed of the synthetic inputs");
  bench_cmd->add_option("--k", ba.k, "attention heads");
  bench_cmd->add_option("--o", ba.o, "exponential neurons per head");
  bench_cmd->add_option("--n-emb", ba.n_emb, "embedding size");
  bench_cmd->add_option("--out", ba.out, "JSON report file");

  std::string spec_path, synth_out = "-", schema_out;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--spec", spec_path, "synthetic spec file");
  synth_cmd->add_option("--seed", synth_seed, "seed");
  synth_cmd->add_option("--out", synth_out, "indexed data output");
  synth_cmd->add_option("--schema-out", schema_out, "schema output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kArgument;
  }

  try {
    if (*train_cmd) return cmd_train(ta, *train_cmd);
    if (*eval_cmd) {
      merge_data_config(ea, *eval_cmd);
      return cmd_eval(ea);
    }
    if (*predict_cmd) {
      merge_data_config(pa, *predict_cmd);
      return cmd_predict(pa);
    }
    if (*explain_cmd) {
      const json cfg = merge_data_config(xa, *explain_cmd);
      if (!explain_cmd->count("--top-n")) top_n = cfg.value("top_n", top_n);
      if (!explain_cmd->count("--instances") && cfg.contains("instances"))
        instance_ids = cfg["instances"].get<std::vector<std::size_t>>();
      return cmd_explain(xa, top_n, instance_ids);
    }
    if (*bench_cmd) return cmd_bench(ba, *bench_cmd);
    if (*synth_cmd) return cmd_synth(spec_path, synth_seed, synth_out, schema_out);
  } catch (const CliError& e) {
    std::cerr << "armlet: " << e.what() << '\n';
    return e.code;
  } catch (const Error& e) {
    std::cerr << "armlet: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "armlet: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "armlet: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
