// Drives the installed CLI binary through std::system; checks exit codes
// and the minimal generate -> train -> eval -> report flow.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = VQALAB_CLI_PATH;

int run(const std::string& args, std::string* output = nullptr) {
  std::string redirect = " >cli_out.txt 2>&1";
  int rc = std::system((kCli + " " + args + redirect).c_str());
  if (output) {
    std::ifstream in("cli_out.txt");
    std::ostringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Temp {
  fs::path path;
  explicit Temp(const std::string& name) : path("tmp_cli_" + name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  std::string file(const std::string& n) const { return (path / n).string(); }
};

void write_tiny_config(const std::string& path) {
  std::ofstream out(path);
  out << "[generator]\nseed = 4\nn_train = 250\nn_test = 60\n"
      << "[model]\nembed_dim = 16\nhidden_dim = 24\n"
      << "[train]\nepochs = 2\nbatch_size = 32\nseed = 4\n";
}

}  // namespace

TEST_CASE("help exits 0, unknown flags exit 2") {
  std::string out;
  CHECK(run("--help", &out) == 0);
  CHECK(out.find("generate") != std::string::npos);
  CHECK(run("--no-such-flag") == 2);
  CHECK(run("generate") == 2);             // missing required --config
  CHECK(run("bogus-subcommand") == 2);
  CHECK(run("train --config missing.toml --data nowhere") == 1);  // runtime failure
}

TEST_CASE("config show prints the effective configuration") {
  Temp dir("show");
  write_tiny_config(dir.file("cfg.toml"));
  std::string out;
  CHECK(run("config show --config " + dir.file("cfg.toml"), &out) == 0);
  CHECK(out.find("\"n_train\": 250") != std::string::npos);
  CHECK(out.find("\"learning_rate\":") != std::string::npos);

  std::ofstream(dir.file("bad.toml")) << "key = [unclosed\n";
  CHECK(run("config show --config " + dir.file("bad.toml")) == 2);
}

TEST_CASE("environment variables override seed and output dir") {
  Temp dir("env");
  write_tiny_config(dir.file("cfg.toml"));
  std::string out;
  setenv("VQALAB_SEED", "77", 1);
  CHECK(run("config show --config " + dir.file("cfg.toml"), &out) == 0);
  unsetenv("VQALAB_SEED");
  CHECK(out.find("\"seed\": 77") != std::string::npos);

  setenv("VQALAB_OUT_DIR", "elsewhere_dir", 1);
  CHECK(run("config show --config " + dir.file("cfg.toml"), &out) == 0);
  unsetenv("VQALAB_OUT_DIR");
  CHECK(out.find("\"output_dir\": \"elsewhere_dir\"") != std::string::npos);
}

TEST_CASE("morph applied twice with variant 3 restores the normalized text") {
  Temp dir("morph");
  {
    std::ofstream out(dir.file("q.jsonl"));
    out << R"({"question_id": 7, "question": "what color is the flower?"})" << "\n";
  }
  CHECK(run("morph --variant 3 --in " + dir.file("q.jsonl") + " --out " +
            dir.file("v3.jsonl")) == 0);
  CHECK(slurp(dir.file("v3.jsonl")).find("flower the is color what?") !=
        std::string::npos);
  CHECK(run("morph --variant 3 --in " + dir.file("v3.jsonl") + " --out " +
            dir.file("v3v3.jsonl")) == 0);
  CHECK(slurp(dir.file("v3v3.jsonl")).find("what color is the flower?") !=
        std::string::npos);
}

TEST_CASE("generate, train, eval, report flow produces the expected files") {
  Temp dir("flow");
  write_tiny_config(dir.file("cfg.toml"));
  const std::string cfg = " --config " + dir.file("cfg.toml");

  CHECK(run("generate" + cfg + " --out-dir " + dir.file("data")) == 0);
  CHECK(fs::exists(dir.file("data") + "/questions_train.jsonl"));

  CHECK(run("train" + cfg + " --data " + dir.file("data") +
            " --train-input question --out " + dir.file("q.bin")) == 0);
  CHECK(run("train" + cfg + " --data " + dir.file("data") +
            " --train-input variant1 --out " + dir.file("v1.bin")) == 0);

  CHECK(run("eval --checkpoint " + dir.file("q.bin") + " --data " + dir.file("data") +
            " --split test_ood --eval-input question --out " + dir.file("pq.jsonl")) ==
        0);
  CHECK(run("eval --checkpoint " + dir.file("v1.bin") + " --data " + dir.file("data") +
            " --split test_ood --eval-input question --out " + dir.file("pv1.jsonl")) ==
        0);

  CHECK(run("report --baseline " + dir.file("pq.jsonl") + " --target " +
            dir.file("pv1.jsonl") + " --out-dir " + dir.file("rep")) == 0);
  CHECK(fs::exists(dir.file("rep") + "/pair_accuracy.csv"));
  CHECK(fs::exists(dir.file("rep") + "/pair_breakdown.csv"));
  std::string csv = slurp(dir.file("rep") + "/pair_accuracy.csv");
  CHECK(csv.find("baseline,") != std::string::npos);
  CHECK(csv.find("target,") != std::string::npos);
}
