#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = logitmat::lab::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("logitmat_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::vector<std::string> kSmall{"--dataset", "synthetic", "--users", "60",  "--items",
                                      "40",        "--density", "0.2",     "--seed", "5"};
const std::vector<std::string> kFast{"--steps", "5000", "--epochs", "5"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({"badcmd"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"train", "--learning-rate", "-1", "--output", "x"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  for (const char* sub : {"ingest", "synth", "train", "eval", "compare", "gradcheck", "sweep"})
    CHECK(help.out.find(sub) != std::string::npos);
  CHECK(run({"train", "--help"}).code == 0);
}

TEST_CASE("runtime errors exit 1") {
  TempDir dir("errors");
  const Run r = run({"train", "--input", dir / "absent.csv", "--output", dir / "m.bin"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error (io)") != std::string::npos);
  CHECK(run({"compare", "--algorithms", "nope", "--dataset", "synthetic"}).code == 1);
}

TEST_CASE("train is byte-for-byte reproducible") {
  TempDir dir("train");
  for (const std::string algo : {"logitmat", "classic-mf"}) {
    auto args = cat(cat({"train", "--algorithm", algo}, kSmall), kFast);
    REQUIRE(run(cat(args, {"--output", dir / "a.bin", "--export-csv", dir / "a.csv"})).code == 0);
    REQUIRE(run(cat(args, {"--output", dir / "b.bin", "--export-csv", dir / "b.csv"})).code == 0);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    auto reseeded = args;
    *std::find(reseeded.begin(), reseeded.end(), "5") = "6";
    REQUIRE(run(cat(reseeded, {"--output", dir / "c.bin"})).code == 0);
    CHECK(slurp(dir / "a.bin") != slurp(dir / "c.bin"));
  }
}

TEST_CASE("every subcommand is deterministic") {
  TempDir a("det_a"), b("det_b");
  auto script = [&](const TempDir& d) {
    std::vector<std::string> outputs;
    auto step = [&](std::vector<std::string> args, const std::string& file) {
      REQUIRE(run(args).code == 0);
      outputs.push_back(slurp(d / file));
    };
    step({"synth", "--users", "50", "--items", "30", "--density", "0.2", "--seed", "2", "--output",
          d / "synth.csv"},
         "synth.csv");
    const std::vector<std::string> input{"--input", d / "synth.csv"};
    step(cat({"ingest", "--output", d / "all.csv", "--train-out", d / "train.csv", "--test-out",
              d / "test.csv", "--seed", "2"},
             input),
         "all.csv");
    outputs.push_back(slurp(d / "train.csv"));
    const std::vector<std::string> split{"--train-file", d / "train.csv", "--test-file", d / "test.csv"};
    step(cat(cat({"train", "--output", d / "m.bin", "--history-out", d / "h.csv"}, split), kFast), "m.bin");
    step(cat({"eval", "--model", d / "m.bin", "--output", d / "eval.csv", "--predictions-out",
              d / "pred.csv"},
             split),
         "eval.csv");
    outputs.push_back(slurp(d / "pred.csv"));
    step(cat(cat({"compare", "--output", d / "cmp.csv"}, split), kFast), "cmp.csv");
    step({"gradcheck", "--trials", "20", "--output", d / "grad.csv"}, "grad.csv");
    step(cat(cat({"sweep", "--rates", "0.01,0.02", "--algorithms", "logitmat,global-mean", "--output",
                  d / "sweep.csv", "--svg", d / "sweep.svg"},
                 split),
             kFast),
         "sweep.csv");
    outputs.push_back(slurp(d / "sweep.svg"));
    return outputs;
  };
  const auto first = script(a);
  const auto second = script(b);
  REQUIRE(first.size() == second.size());
  for (std::size_t k = 0; k < first.size(); ++k) {
    CAPTURE(k);
    CHECK(!first[k].empty());
    if (k == 0 || k == 1 || k == 2 || k == 4 || k == 6)
      CHECK(first[k] == second[k]);
  }
  // Paths differ between the two runs, so compare the outputs that mention them up to the path.
  auto unpath = [&](std::string s) {
    for (const auto* d : {&a, &b}) {
      const std::string p = d->path.string();
      for (auto pos = s.find(p); pos != std::string::npos; pos = s.find(p)) s.replace(pos, p.size(), "<dir>");
    }
    return s;
  };
  for (std::size_t k : {3u, 5u, 7u, 8u}) CHECK(unpath(first[k]) == unpath(second[k]));
}

TEST_CASE("gradcheck") {
  TempDir dir("grad");
  const Run r = run({"gradcheck", "--trials", "100", "--output", dir / "g.csv"});
  CHECK(r.code == 0);
  const auto rows = lines(slurp(dir / "g.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "target,max_relative_error");
  CHECK(run({"gradcheck", "--eps", "0.01"}).code == 2);
}

TEST_CASE("sweep table shape") {
  TempDir dir("sweep");
  auto args = cat(cat({"sweep", "--rates", "0.005,0.01,0.02", "--algorithms",
                       "uniform-random,logitmat,global-mean", "--output", dir / "s.csv"},
                      kSmall),
                  kFast);
  REQUIRE(run(args).code == 0);
  const auto rows = lines(slurp(dir / "s.csv"));
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == "learning_rate,algorithm,mae,matthew_degree");
  const std::vector<std::string> expected_prefix{"0.005,global-mean,", "0.005,logitmat,",
                                                 "0.005,uniform-random,", "0.01,global-mean,",
                                                 "0.01,logitmat,",        "0.01,uniform-random,",
                                                 "0.02,global-mean,",     "0.02,logitmat,",
                                                 "0.02,uniform-random,"};
  for (std::size_t k = 0; k < expected_prefix.size(); ++k)
    CHECK(rows[k + 1].rfind(expected_prefix[k], 0) == 0);
  CHECK(run(cat(cat({"sweep", "--rates", "0.02,0.01"}, kSmall), kFast)).code == 1);
}

TEST_CASE("config file precedence") {
  TempDir dir("config");
  {
    std::ofstream cfg(dir / "lab.conf");
    cfg << "# shared settings\nsteps=5000\nepochs=5\nlatent-dim=3\nseed=9\n"
           "dataset=synthetic\nusers=60\nitems=40\ndensity=0.2\n";
  }
  REQUIRE(run({"train", "--config", dir / "lab.conf", "--output", dir / "a.bin"}).code == 0);
  REQUIRE(run({"train", "--steps", "5000", "--epochs", "5", "--latent-dim", "3", "--seed", "9",
               "--dataset", "synthetic", "--users", "60", "--items", "40", "--density", "0.2",
               "--output", dir / "b.bin"})
              .code == 0);
  CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));

  REQUIRE(run({"train", "--config", dir / "lab.conf", "--seed", "10", "--output", dir / "c.bin"}).code == 0);
  REQUIRE(run({"train", "--steps", "5000", "--latent-dim", "3", "--seed", "10", "--dataset", "synthetic",
               "--users", "60", "--items", "40", "--density", "0.2", "--output", dir / "d.bin"})
              .code == 0);
  CHECK(slurp(dir / "c.bin") == slurp(dir / "d.bin"));
  CHECK(slurp(dir / "a.bin") != slurp(dir / "c.bin"));

  // Keys the subcommand lacks are ignored, so one file can serve every subcommand.
  CHECK(run({"gradcheck", "--config", dir / "lab.conf", "--trials", "5"}).code == 0);
  {
    std::ofstream bad(dir / "bad.conf");
    bad << "steps 5000\n";
  }
  // A broken config file is a usage problem, not a runtime one.
  CHECK(run({"train", "--config", dir / "bad.conf", "--output", dir / "e.bin"}).code == 2);
}

TEST_CASE("relative inputs resolve under LOGITMAT_DATA_DIR") {
  TempDir dir("datadir");
  REQUIRE(run({"synth", "--users", "30", "--items", "20", "--density", "0.3", "--output", dir / "r.csv"}).code == 0);
  REQUIRE(setenv("LOGITMAT_DATA_DIR", dir.path.c_str(), 1) == 0);
  const Run r = run({"ingest", "--input", "r.csv", "--output", dir / "copy.csv"});
  unsetenv("LOGITMAT_DATA_DIR");
  CHECK(r.code == 0);
  CHECK(slurp(dir / "copy.csv") == slurp(dir / "r.csv"));
  CHECK(run({"ingest", "--input", "r.csv", "--output", dir / "copy2.csv"}).code == 1);
  CHECK(run({"ingest", "--input", "r.csv", "--data-dir", dir.path.string(), "--output", dir / "copy3.csv"}).code == 0);
}
