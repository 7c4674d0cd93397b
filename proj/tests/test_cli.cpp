#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(GAITCLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("gaitrec_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kToyFlags =
    " --conv1-ch 2 --conv34-ch 2 --conv56-ch 2 --fc-out 4 --gru-hidden 3 --bins 4";

}  // namespace

TEST_CASE("synth then preprocess produce a rebased manifest") {
  fs::path dir = temp_dir("pre");
  std::string data = (dir / "data").string();
  std::string manifest = (dir / "data/manifest.csv").string();
  CHECK(run("synth --out " + data + " --manifest " + manifest +
            " --ids 2 --views 2 --seqs 2 --frames 3") == 0);
  std::string norm = (dir / "norm").string();
  CHECK(run("preprocess --manifest " + manifest + " --out " + norm) == 0);
  CHECK(fs::exists(fs::path(norm) / "manifest.csv"));
}

TEST_CASE("data errors exit with code 2") {
  fs::path dir = temp_dir("data_err");
  std::ofstream(dir / "bad.csv") << "path,subject\nx,1\n";
  CHECK(run("preprocess --manifest " + (dir / "bad.csv").string() + " --out " +
            (dir / "out").string()) == 2);
  CHECK(run("train --stage 1 --manifest " + (dir / "missing.csv").string() +
            " --out " + (dir / "m.ckpt").string()) == 2);
}

TEST_CASE("stage 2 without a stage-1 checkpoint exits with code 3") {
  fs::path dir = temp_dir("prereq");
  std::string manifest = (dir / "manifest.csv").string();
  REQUIRE(run("synth --out " + dir.string() + " --manifest " + manifest +
              " --ids 2 --views 2 --seqs 3 --frames 3") == 0);
  CHECK(run("train --stage 2 --manifest " + manifest + " --out " +
            (dir / "s2.ckpt").string() + kToyFlags) == 3);
  CHECK(run("train --stage 2 --manifest " + manifest + " --resume " +
            (dir / "nope.ckpt").string() + " --out " + (dir / "s2.ckpt").string() +
            kToyFlags) == 3);
}

TEST_CASE("training is deterministic per seed and writes a log") {
  fs::path dir = temp_dir("train");
  std::string manifest = (dir / "manifest.csv").string();
  REQUIRE(run("synth --out " + dir.string() + " --manifest " + manifest +
              " --ids 2 --views 2 --seqs 3 --frames 3") == 0);
  std::string args = "train --stage 1 --manifest " + manifest + kToyFlags +
                     " --steps 2 --batch-ids 2 --seqs-per-id 2 --seed 5 --log " +
                     (dir / "log.csv").string();
  REQUIRE(run(args + " --out " + (dir / "a.ckpt").string()) == 0);
  REQUIRE(run(args + " --out " + (dir / "b.ckpt").string()) == 0);
  CHECK(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"));
  std::string log = slurp(dir / "log.csv");
  CHECK(log.find("step,loss,easy,semi_hard,hard") == 0);
}

TEST_CASE("config files feed the trainer and unknown keys are rejected") {
  fs::path dir = temp_dir("config");
  std::string manifest = (dir / "manifest.csv").string();
  REQUIRE(run("synth --out " + dir.string() + " --manifest " + manifest +
              " --ids 2 --views 2 --seqs 3 --frames 3") == 0);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# toy run\n[network]\nconv1_ch = 2\nconv34_ch = 2\nconv56_ch = 2\n"
        << "fc_out = 4\ngru_hidden = 3\nbins = 4\n[train]\nsteps = 1\n"
        << "batch_ids = 2\nseqs_per_id = 2\nmanifest = " << manifest << "\n";
  }
  CHECK(run("train --stage 1 --config " + (dir / "run.cfg").string() + " --out " +
            (dir / "cfg.ckpt").string()) == 0);
  CHECK(fs::exists(dir / "cfg.ckpt"));

  std::ofstream(dir / "bad.cfg") << "stepz = 3\n";
  CHECK(run("train --stage 1 --config " + (dir / "bad.cfg").string() +
            " --manifest " + manifest + " --out " + (dir / "x.ckpt").string()) == 2);
}

TEST_CASE("checkpoint and protocol failures use exit codes 5 and 4") {
  fs::path dir = temp_dir("codes");
  std::string manifest = (dir / "manifest.csv").string();
  REQUIRE(run("synth --out " + dir.string() + " --manifest " + manifest +
              " --ids 2 --views 2 --seqs 3 --frames 3") == 0);
  std::string ckpt = (dir / "s1.ckpt").string();
  REQUIRE(run("train --stage 1 --manifest " + manifest + kToyFlags +
              " --steps 1 --batch-ids 2 --seqs-per-id 2 --out " + ckpt) == 0);

  // truncated checkpoint -> 5
  std::string bytes = slurp(ckpt);
  std::ofstream(dir / "cut.ckpt", std::ios::binary)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  CHECK(run("embed --checkpoint " + (dir / "cut.ckpt").string() + " --manifest " +
            manifest + " --out " + (dir / "e.csv").string()) == 5);

  // CASIA-B protocol on a 2-subject manifest has no test subjects -> 4
  CHECK(run("eval --checkpoint " + ckpt + " --manifest " + manifest +
            " --protocol casia-b-nm --out " + (dir / "r.json").string()) == 4);

  // a working eval on the custom split
  CHECK(run("eval --checkpoint " + ckpt + " --manifest " + manifest +
            " --protocol custom --include-identical-views --out " +
            (dir / "ok.json").string()) == 0);
  CHECK(slurp(dir / "ok.json").find("rank1") != std::string::npos);

  // embed works and is rerun-stable
  REQUIRE(run("embed --checkpoint " + ckpt + " --manifest " + manifest +
              " --out " + (dir / "e1.csv").string()) == 0);
  REQUIRE(run("embed --checkpoint " + ckpt + " --manifest " + manifest +
              " --out " + (dir / "e2.csv").string()) == 0);
  CHECK(slurp(dir / "e1.csv") == slurp(dir / "e2.csv"));
}
