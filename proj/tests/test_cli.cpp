#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "condet/detections.hpp"
#include "condet/labels.hpp"
#include "oracles.hpp"

using namespace condet;
namespace ct = condet::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(ct::cli_path()) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  std::size_t got;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) result.output.append(buffer, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "condet_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts the shipped fixtures") {
  const RunResult result = run_cli("validate --labels " + ct::fixture_path("labels_41.txt") +
                                   " --requirements " + ct::fixture_path("requirements_243.txt"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("labels 41") != std::string::npos);
  CHECK(result.output.find("clauses 243") != std::string::npos);
  CHECK(result.output.find("satisfiable yes") != std::string::npos);
}

TEST_CASE("validate exits 2 on the contradiction fixture and names the clause") {
  const std::string command =
      std::string(ct::cli_path()) + " validate --labels " + ct::fixture_path("labels_small.txt") +
      " --requirements " + ct::fixture_path("contradiction.txt") + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buffer[1024];
  std::size_t got;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, got);
  const int status = pclose(pipe);
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(output.find("clause") != std::string::npos);
  CHECK(output.find("a1") != std::string::npos);
}

TEST_CASE("input errors exit 1") {
  CHECK(run_cli("validate --labels /nonexistent --requirements /nonexistent").exit_code == 1);
  CHECK(run_cli("validate --bogus-flag").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);  // a subcommand is required
}

TEST_CASE("loss reports the anchor-filtered stage-1 mean") {
  const RunResult all = run_cli("loss --labels " + ct::fixture_path("labels_small.txt") +
                                " --requirements " + ct::fixture_path("requirements_small.txt") +
                                " --scores " + ct::fixture_path("scores_small.jsonl"));
  CHECK(all.exit_code == 0);
  CHECK(all.output.find("items 1") != std::string::npos);
  CHECK(all.output.find("kept 1") != std::string::npos);

  const RunResult filtered =
      run_cli("loss --filtered --labels " + ct::fixture_path("labels_small.txt") +
              " --requirements " + ct::fixture_path("requirements_small.txt") + " --scores " +
              ct::fixture_path("scores_small.jsonl"));
  CHECK(filtered.exit_code == 0);
  CHECK(filtered.output.find("kept 1") != std::string::npos);  // 0.9 > 0.5 passes
}

TEST_CASE("export-wcnf writes the byte-exact reference problem") {
  const fs::path dir = scratch_dir();
  const RunResult result = run_cli(
      "export-wcnf --labels " + ct::fixture_path("labels_small.txt") + " --requirements " +
      ct::fixture_path("requirements_small.txt") + " --scores " +
      ct::fixture_path("scores_small.jsonl") + " --scale 10 --out-dir " + (dir / "w").string());
  CHECK(result.exit_code == 0);
  CHECK(slurp(dir / "w" / "frame_000000_0.wcnf") == slurp(ct::fixture_path("wcnf_reference.wcnf")));
}

TEST_CASE("correct guarantees requirement satisfaction, end to end") {
  const fs::path dir = scratch_dir();
  const std::string labels = ct::fixture_path("labels_41.txt");
  const std::string reqs = ct::fixture_path("requirements_243.txt");

  RunResult gen = run_cli("gen --labels " + labels + " --requirements " + reqs +
                          " --out-scores " + (dir / "scores.jsonl").string() + " --out-gt " +
                          (dir / "gt.jsonl").string() + " --out-split " +
                          (dir / "split.json").string() +
                          " --seed 21 --frames 20 --sigma 0.3 --flip 0.1");
  REQUIRE(gen.exit_code == 0);

  RunResult corrected = run_cli("correct --labels " + labels + " --requirements " + reqs +
                                " --scores " + (dir / "scores.jsonl").string() + " --out " +
                                (dir / "corrected.jsonl").string() + " --jobs 2");
  REQUIRE(corrected.exit_code == 0);

  const LabelSpace ls = load_labelspace(labels);
  const RequirementSet rs = load_requirements(reqs, ls);
  const auto frames = load_truth((dir / "corrected.jsonl").string(), ls.size());
  int boxes = 0;
  for (const TruthFrame& frame : frames) {
    for (const LabeledBox& item : frame.boxes) {
      CHECK(eval_boolean(rs, item.labels).satisfied);
      ++boxes;
    }
  }
  CHECK(boxes > 0);
}

TEST_CASE("full pipeline matches the committed golden reports") {
  const fs::path dir = scratch_dir();
  const std::string labels = ct::fixture_path("labels_41.txt");
  const std::string reqs = ct::fixture_path("requirements_243.txt");
  auto path = [&](const char* name) { return (dir / name).string(); };

  REQUIRE(run_cli("gen --labels " + labels + " --requirements " + reqs + " --out-scores " +
                  path("scores.jsonl") + " --out-gt " + path("gt.jsonl") + " --out-split " +
                  path("split.json") +
                  " --seed 5 --frames 60 --min-boxes 1 --max-boxes 3 --sigma 0.15 --flip 0.03")
              .exit_code == 0);

  REQUIRE(run_cli("train --labels " + labels + " --requirements " + reqs + " --scores " +
                  path("scores.jsonl") + " --gt " + path("gt.jsonl") + " --split " +
                  path("split.json") + " --out " + path("model.bin") +
                  " --epochs 8 --hidden 16 --lr 0.1 --batch1 32 --batch2 32 --seed 5"
                  " --apply-out " +
                  path("blended.jsonl") + " --trace " + path("trace.jsonl"))
              .exit_code == 0);

  REQUIRE(run_cli("nms --labels " + labels + " --scores " + path("blended.jsonl") + " --out " +
                  path("nms.jsonl") + " --tau 0.25 --iou 0.5")
              .exit_code == 0);

  REQUIRE(run_cli("correct --labels " + labels + " --requirements " + reqs + " --scores " +
                  path("nms.jsonl") + " --out " + path("corrected.jsonl"))
              .exit_code == 0);

  REQUIRE(run_cli("eval --labels " + labels + " --pred " + path("blended.jsonl") + " --gt " +
                  path("gt.jsonl") + " --metric map --out " + path("map.json"))
              .exit_code == 0);
  REQUIRE(run_cli("eval --labels " + labels + " --pred " + path("corrected.jsonl") + " --gt " +
                  path("gt.jsonl") + " --metric prf1 --out " + path("prf1.json"))
              .exit_code == 0);

  CHECK(slurp(path("map.json")) == slurp(ct::fixture_path("golden/pipeline_map.json")));
  CHECK(slurp(path("prf1.json")) == slurp(ct::fixture_path("golden/pipeline_prf1.json")));
}

TEST_CASE("apply reproduces train --apply-out through the checkpoint") {
  const fs::path dir = scratch_dir();
  const std::string labels = ct::fixture_path("labels_41.txt");
  const std::string reqs = ct::fixture_path("requirements_243.txt");
  auto path = [&](const char* name) { return (dir / name).string(); };

  REQUIRE(run_cli("gen --labels " + labels + " --requirements " + reqs + " --out-scores " +
                  path("scores.jsonl") + " --out-gt " + path("gt.jsonl") + " --out-split " +
                  path("split.json") + " --seed 31 --frames 12 --sigma 0.2")
              .exit_code == 0);
  REQUIRE(run_cli("train --labels " + labels + " --requirements " + reqs + " --scores " +
                  path("scores.jsonl") + " --gt " + path("gt.jsonl") + " --split " +
                  path("split.json") + " --out " + path("model.bin") +
                  " --epochs 2 --hidden 8 --seed 3 --apply-out " + path("blended_direct.jsonl"))
              .exit_code == 0);
  REQUIRE(run_cli("apply --labels " + labels + " --model " + path("model.bin") + " --scores " +
                  path("scores.jsonl") + " --out " + path("blended_via_ckpt.jsonl") + " --jobs 2")
              .exit_code == 0);
  CHECK(slurp(path("blended_direct.jsonl")) == slurp(path("blended_via_ckpt.jsonl")));

  REQUIRE(run_cli("apply --labels " + labels + " --model " + path("model.bin") + " --scores " +
                  path("scores.jsonl") + " --out " + path("corrector.jsonl") +
                  " --which corrector")
              .exit_code == 0);
  CHECK(slurp(path("corrector.jsonl")) != slurp(path("blended_via_ckpt.jsonl")));
}

}  // TEST_SUITE
