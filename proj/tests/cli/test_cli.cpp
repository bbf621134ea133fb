#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ARMLET_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// One workspace per process: synthetic data plus a trained two-seed arm model.
struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("armlet_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    write(dir / "spec.json",
          R"({"m": 4, "cardinalities": [4, 4, 4, 4], "terms": [{"fields": [0, 1], "coeff": 2.0}], "bias": 0.0, "n": 1500})");
    REQUIRE(run("synth --spec " + p("spec.json") + " --seed 3 --out " + p("data.txt") +
                " --schema-out " + p("schema.json"))
                .code == 0);
    const auto r = run("train --schema " + p("schema.json") + " --data " + p("data.txt") +
                       " --k 2 --o 3 --n-emb 3 --lr 0.02 --batch-size 64 --seeds 2 1 --max-epochs 3" +
                       " --model-out " + p("m.json") + " --history " + p("hist.txt") + " --summary " +
                       p("summary.json"));
    REQUIRE(r.code == 0);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("synth writes indexed data and a schema") {
  const auto& w = ws();
  std::istringstream in(slurp(w.p("data.txt")));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1500);
  const auto schema = nlohmann::json::parse(slurp(w.p("schema.json")));
  CHECK(schema["fields"].size() == 4);
}

TEST_CASE("train writes per-seed models, history and summary") {
  const auto& w = ws();
  CHECK(fs::exists(w.p("m.seed1.json")));
  CHECK(fs::exists(w.p("m.seed2.json")));
  const auto hist = slurp(w.p("hist.txt"));
  CHECK(hist.find("# seed 1") < hist.find("# seed 2"));
  const auto summary = nlohmann::json::parse(slurp(w.p("summary.json")));
  REQUIRE(summary["runs"].size() == 2);
  CHECK(summary["runs"][0]["seed"] == 1);
  CHECK(summary["test_auc"]["mean"].get<double>() > 0.5);
  CHECK(summary["test_auc"].contains("std"));
}

TEST_CASE("parallel seeds reproduce the sequential run") {
  const auto& w = ws();
  REQUIRE(run("train --schema " + w.p("schema.json") + " --data " + w.p("data.txt") +
              " --k 2 --o 3 --n-emb 3 --lr 0.02 --batch-size 64 --seeds 2 1 --max-epochs 3 --jobs 2" +
              " --model-out " + w.p("par.json") + " --summary " + w.p("par_summary.json"))
              .code == 0);
  const auto a = nlohmann::json::parse(slurp(w.p("summary.json")));
  const auto b = nlohmann::json::parse(slurp(w.p("par_summary.json")));
  CHECK(a["test_auc"] == b["test_auc"]);
  CHECK(slurp(w.p("m.seed1.json")) == slurp(w.p("par.seed1.json")));
}

TEST_CASE("config file with flag overrides") {
  const auto& w = ws();
  write(w.p("cfg.json"), nlohmann::json{{"schema", w.p("schema.json")},
                                        {"data", w.p("data.txt")},
                                        {"model_kind", "lr"},
                                        {"K", 7},
                                        {"max_epochs", 2},
                                        {"model_out", w.p("cfg_model.json")}}
                             .dump());
  REQUIRE(run("train --config " + w.p("cfg.json") + " --model-kind fm --k 1 --o 2 --n-emb 2 --seed 5").code == 0);
  const auto model = nlohmann::json::parse(slurp(w.p("cfg_model.json")));
  CHECK(model["model_kind"] == "fm");
  CHECK(model["config"]["K"] == 1);
}

TEST_CASE("eval prints a summary line and JSON") {
  const auto& w = ws();
  const auto r = run("eval --model " + w.p("m.seed1.json") + " --data " + w.p("data.txt"));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("auc ", 0) == 0);
  const auto json_line = r.out.substr(r.out.find('{'));
  const auto j = nlohmann::json::parse(json_line);
  CHECK(j["n"] == 1500);
  CHECK(j["auc"].get<double>() > 0.5);
}

TEST_CASE("predict writes index,score with six decimals") {
  const auto& w = ws();
  const auto r = run("predict --model " + w.p("m.seed1.json") + " --data " + w.p("data.txt"));
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::stoul(line.substr(0, comma)) == n);
    CHECK(line.size() - comma - 1 == 8);  // 0.xxxxxx
    ++n;
  }
  CHECK(n == 1500);
}

TEST_CASE("explain reports global, terms and requested locals") {
  const auto& w = ws();
  const auto r = run("explain --model " + w.p("m.seed1.json") + " --data " + w.p("data.txt") +
                     " --top-n 2 --instances 0 7");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["global"].size() == 4);
  CHECK(j["terms"].size() <= 2);
  CHECK(j["local"].contains("7"));
}

TEST_CASE("bench reports a fit") {
  const auto& w = ws();
  const auto r = run("bench --m-list 2,4,8 --batch 20 --reps 3 --k 1 --o 4 --n-emb 3 --out " + w.p("bench.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("R^2") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(w.p("bench.json")));
  CHECK(j["rows"].size() == 3);
  for (const auto& row : j["rows"]) CHECK(row["tuples_per_second"].get<double>() > 0.0);
}

TEST_CASE("saved model reproduces the in-memory test AUC") {
  const auto& w = ws();
  std::istringstream in(slurp(w.p("data.txt")));
  std::ofstream tr(w.p("rt_train.txt")), va(w.p("rt_valid.txt")), te(w.p("rt_test.txt"));
  std::string line;
  for (std::size_t i = 0; std::getline(in, line); ++i) (i < 1200 ? tr : i < 1350 ? va : te) << line << '\n';
  tr.close();
  va.close();
  te.close();
  REQUIRE(run("train --schema " + w.p("schema.json") + " --train " + w.p("rt_train.txt") + " --valid " +
              w.p("rt_valid.txt") + " --test " + w.p("rt_test.txt") +
              " --k 2 --o 3 --n-emb 3 --lr 0.02 --batch-size 64 --seed 4 --max-epochs 3 --model-out " +
              w.p("rt.json") + " --summary " + w.p("rt_summary.json"))
              .code == 0);
  const double in_memory = nlohmann::json::parse(slurp(w.p("rt_summary.json")))["runs"][0]["test_auc"];
  write(w.p("rt_eval.json"), nlohmann::json{{"model", w.p("rt.json")}, {"data", w.p("rt_test.txt")}}.dump());
  const auto r = run("eval --config " + w.p("rt_eval.json"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  CHECK(std::abs(j["auc"].get<double>() - in_memory) <= 1e-6);
}

TEST_CASE("explain catalog accounts for every neuron") {
  const auto& w = ws();
  write(w.p("xcfg.json"), nlohmann::json{{"model", w.p("m.seed2.json")}, {"data", w.p("data.txt")}, {"top_n", 1000}}.dump());
  const auto r = run("explain --config " + w.p("xcfg.json"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  double total = 0.0;
  for (const auto& t : j["terms"]) total += t["frequency"].get<double>();
  CHECK(j["terms"].size() == j["catalog"]["distinct_terms"].get<std::size_t>());
  CHECK(total + j["catalog"]["empty_frequency"].get<double>() == doctest::Approx(2.0 * 3.0).epsilon(1e-12));
}

TEST_CASE("bench reads its sizes from a config file") {
  const auto& w = ws();
  write(w.p("bcfg.json"),
        nlohmann::json{{"m_list", {2, 3}}, {"batch", 10}, {"reps", 3}, {"K", 1}, {"o", 2}, {"n_e", 2}}.dump());
  const auto r = run("bench --config " + w.p("bcfg.json") + " --out " + w.p("bcfg_out.json"));
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(w.p("bcfg_out.json")))["rows"].size() == 2);
}

TEST_CASE("exit codes") {
  const auto& w = ws();
  SUBCASE("missing schema names the flag") {
    const std::string cmd = std::string(ARMLET_BIN) + " train --data " + w.p("data.txt") + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    char buf[512] = {};
    const auto n = fread(buf, 1, sizeof buf - 1, pipe);
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(std::string(buf, n).find("--schema") != std::string::npos);
  }
  SUBCASE("config and path errors") {
    CHECK(run("train --schema /nonexistent.json --data " + w.p("data.txt")).code == 2);
    CHECK(run("eval --model /nonexistent.json --data " + w.p("data.txt")).code == 2);
    write(w.p("bad_cfg.json"), "{oops");
    CHECK(run("train --config " + w.p("bad_cfg.json")).code == 2);
    CHECK(run("train --schema " + w.p("schema.json") + " --data " + w.p("data.txt") +
              " --model-out /nonexistent_dir/m.json")
              .code == 2);
    CHECK(run("eval --config /nonexistent.json").code == 2);
  }
  SUBCASE("schema mismatch") {
    write(w.p("wide.txt"), "1 0:1:1 1:1:1 2:1:1 3:1:1 4:1:1\n");
    CHECK(run("eval --model " + w.p("m.seed1.json") + " --data " + w.p("wide.txt")).code == 3);
    write(w.p("other_schema.json"),
          R"({"fields": [{"id": 0, "name": "a", "kind": "categorical", "cardinality": 9}]})");
    CHECK(run("eval --model " + w.p("m.seed1.json") + " --data " + w.p("data.txt") + " --schema " +
              w.p("other_schema.json"))
              .code == 3);
  }
  SUBCASE("empty dataset is a metric error") {
    write(w.p("empty.txt"), "");
    CHECK(run("eval --model " + w.p("m.seed1.json") + " --data " + w.p("empty.txt")).code == 4);
  }
  SUBCASE("argument errors") {
    CHECK(run("bench --reps 2").code == 5);
    CHECK(run("explain --model " + w.p("m.seed1.json") + " --data " + w.p("data.txt") + " --instances 1500").code == 5);
    CHECK(run("train --k notanumber").code == 5);
    CHECK(run("frobnicate").code == 5);
    CHECK(run("--help").code == 0);
  }
}
