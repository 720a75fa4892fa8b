#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ebdiff/cli.hpp"
#include "ebdiff/config.hpp"
#include "ebdiff/errors.hpp"
#include "ebdiff/experiment.hpp"

using namespace ebdiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ebdiff_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

const char* kSmall =
    "nodes = 6\n"
    "dim = 2\n"
    "horizon = 120\n"
    "replicas = 70\n"
    "topology = rgg\n"
    "topology_radius = 0.6\n"
    "algorithms = ATC, NONCOOP, EB-ATC\n"
    "deltas = 0.001, 0.01\n"
    "seed = 4\n";

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal file keeps defaults") {
    auto c = parse("replicas = 3\n");
    CHECK(c.replicas == 3);
    CHECK(c.nodes == 60);
    CHECK(c.dim == 10);
    CHECK(c.mu == 0.05);
    CHECK(c.algorithms.size() == 5);
  }
  SUBCASE("full-scale defaults echo in the resolved listing") {
    const auto resolved = default_config().resolved();
    std::map<std::string, std::string> kv(resolved.begin(), resolved.end());
    CHECK(kv["nodes"] == "60");
    CHECK(kv["dim"] == "10");
    CHECK(kv["replicas"] == "200");
    CHECK(kv["horizon"] == "1000");
  }
  SUBCASE("comments, blanks and algorithm variants") {
    auto c = parse("# header\n\nnodes = 4  # trailing\nalgorithms = EB-ATC:0.05, EB-ATC:0=0.1;50=0.01\n");
    CHECK(c.nodes == 4);
    REQUIRE(c.algorithms.size() == 2);
    CHECK(c.algorithms[0].label() == "EB-ATC(delta=0.05)");
    CHECK(c.algorithms[0].slug() == "ebatc_d0.05");
    CHECK_FALSE(c.algorithms[1].schedule->is_constant());
    CHECK(c.algorithms[1].schedule->at(60) == 0.01);
  }
  SUBCASE("errors carry the line number") {
    try {
      parse("nodes = 5\nbogus_key = 1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    try {
      parse("nodes = 5\n\nno equals sign here\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("nodes = 5\nnodes = 6\n"), ParseError);
    CHECK_THROWS_AS(parse("nodes = five\n"), ParseError);
    CHECK_THROWS_AS(parse("algorithms = RLS\n"), ParseError);
  }
  SUBCASE("validation lists every violation") {
    try {
      parse("replicas = 0\nmu = -1\n");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string w = e.what();
      CHECK(w.find("replicas") != std::string::npos);
      CHECK(w.find("mu") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("dim = 2\nregressor_cov_diag = 1, 2, 3\n"), ValidationError);
    CHECK_THROWS_AS(parse("noise_db_min = -5\nnoise_db_max = -10\n"), ValidationError);
  }
  SUBCASE("hash ignores the output directory") {
    auto a = parse("nodes = 5\nout = x\n");
    auto b = parse("nodes = 5\nout = y\n");
    auto c = parse("nodes = 6\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
  }
}

TEST_CASE("experiment runner") {
  SUBCASE("EB-ATC with zero threshold reproduces ATC") {
    auto c = parse("nodes = 5\ndim = 2\nhorizon = 80\nreplicas = 5\ntopology_radius = 0.7\n"
                   "algorithms = ATC, EB-ATC:0\n");
    auto r = run_experiment(c);
    CHECK(r.algorithms[0].curves.msd_linear == r.algorithms[1].curves.msd_linear);
  }
  SUBCASE("single node: ATC equals NONCOOP") {
    auto c = parse("nodes = 1\ndim = 3\nhorizon = 80\nreplicas = 5\ntopology = complete\n"
                   "algorithms = ATC, NONCOOP\n");
    auto r = run_experiment(c);
    CHECK(r.algorithms[0].curves.msd_linear == r.algorithms[1].curves.msd_linear);
  }
  SUBCASE("streams are paired across algorithm sets") {
    auto c1 = parse(std::string(kSmall));
    auto c2 = c1;
    c2.algorithms = parse_algorithms("NONCOOP", {});
    auto r1 = run_experiment(c1);
    auto r2 = run_experiment(c2);
    CHECK(r1.manifest.stream_checksums == r2.manifest.stream_checksums);
    CHECK(r1.manifest.replica_seeds == r2.manifest.replica_seeds);
    CHECK(r1.find(Algorithm::kNonCoop)->curves.msd_linear ==
          r2.find(Algorithm::kNonCoop)->curves.msd_linear);
    CHECK(r1.find(Algorithm::kEbAtc, 0.01) != nullptr);
    CHECK(r1.find(Algorithm::kEbAtc, 0.5) == nullptr);
  }
  SUBCASE("divergence aborts with a partial result") {
    auto c = parse("nodes = 3\ndim = 2\nhorizon = 3000\nreplicas = 2\ntopology = path\nmu = 5\n"
                   "algorithms = NONCOOP\n");
    try {
      run_experiment(c);
      FAIL("expected ExperimentAborted");
    } catch (const ExperimentAborted& e) {
      CHECK(e.partial().manifest.completed_replicas == 0);
      CHECK_FALSE(e.partial().manifest.abort_reason.empty());
    }
  }
}

TEST_CASE("outputs are independent of the thread count") {
  auto c = parse(std::string(kSmall) + "trace = true\n");
  RunOptions one, four;
  one.collect_trace = four.collect_trace = true;
  four.threads = 4;
  auto r1 = run_experiment(c, one);
  auto r4 = run_experiment(c, four);
  auto d1 = scratch("t1"), d4 = scratch("t4");
  write_outputs(d1.string(), r1);
  write_outputs(d4.string(), r4);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(d1)) {
    const auto name = entry.path().filename().string();
    if (name == "manifest.txt") continue;
    CAPTURE(name);
    CHECK(slurp(entry.path()) == slurp(d4 / name));
    ++compared;
  }
  CHECK(compared == 3 * 4 + 3);

  const auto manifest = slurp(d1 / "manifest.txt");
  for (const char* key : {"version=ebdiff", "config_hash=", "config.nodes=6", "seed_scheme=",
                          "replicas_completed=70", "wall_clock_seconds=", "replica.69.seed=",
                          "replica.69.stream_checksum=", "file=summary.csv", "file=curves_atc.csv"})
    CHECK(manifest.find(key) != std::string::npos);
}

TEST_CASE("bound comparison") {
  SUBCASE("rejects a mean-unstable step size") {
    auto c = parse("nodes = 3\ndim = 2\nhorizon = 50\nreplicas = 2\ntopology = path\nmu = 2.5\n"
                   "regressor_cov_diag = 1, 1\nalgorithms = EB-ATC:0.01\n");
    CHECK_THROWS_AS(run_bound_comparison(c), UnstableConfiguration);
  }
  SUBCASE("rejects networks beyond the F cap") {
    auto c = parse("nodes = 10\ndim = 10\nhorizon = 50\nreplicas = 2\ntopology = path\n"
                   "algorithms = EB-ATC:0.01\n");
    CHECK_THROWS_AS(run_bound_comparison(c), DimensionCapExceeded);
  }
  SUBCASE("small path network stays under both bounds") {
    auto c = parse("nodes = 3\ndim = 2\nhorizon = 600\nreplicas = 100\ntopology = path\nmu = 0.35\n"
                   "regressor_cov_diag = 1, 1\nalgorithms = ATC, NONCOOP, EB-ATC:0.01\n");
    auto r = run_bound_comparison(c);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
      CAPTURE(row.spec.label());
      CAPTURE(row.empirical_mean_error);
      CAPTURE(row.mean_error_bound);
      // ATC's bound is zero; its empirical value is Monte Carlo noise only
      if (row.spec.algorithm == Algorithm::kEbAtc) CHECK(row.mean_slack() >= 0.0);
      else CHECK(row.empirical_mean_error < 0.01);
      REQUIRE(row.msd_bound.has_value());
      CHECK(row.msd_slack() >= 0.0);
    }
    auto dir = scratch("cmp");
    write_comparison(dir.string(), r);
    CHECK(fs::exists(dir / "comparison.csv"));
    CHECK(fs::exists(dir / "stability.txt"));
  }
}

TEST_CASE("command line") {
  auto dir = scratch("cli");
  auto good = write_file(dir / "good.cfg", std::string(kSmall) + "replicas = 3\n");
  // kSmall already sets replicas; use a separate file for the duplicate check
  auto small = write_file(dir / "small.cfg", "nodes = 4\ndim = 2\nhorizon = 60\nreplicas = 3\n"
                                             "topology = path\nalgorithms = ATC, EB-ATC:0.01\n");
  auto spread = write_file(dir / "spread.cfg", "nodes = 3\ndim = 2\ntopology = path\nmu = 0.2\n"
                                               "regressor_cov_diag = 1, 6\nalgorithms = EB-ATC:0.01\n");
  auto bad = write_file(dir / "bad.cfg", "nodes = -4\n");
  auto diverge = write_file(dir / "diverge.cfg", "nodes = 3\ndim = 2\nhorizon = 3000\nreplicas = 2\n"
                                                 "topology = path\nmu = 5\nalgorithms = NONCOOP\n");
  std::string out, err;

  CHECK(cli({"validate", small.string()}, &out) == 0);
  CHECK(out.find("ok:") == 0);
  CHECK(cli({"validate", good.string()}, nullptr, &err) == 1);  // duplicate key
  CHECK(err.find("line 10") != std::string::npos);
  CHECK(cli({"validate", bad.string()}) == 1);
  CHECK(cli({"validate", (dir / "missing.cfg").string()}) == 1);
  CHECK(cli({"frobnicate"}) == 1);
  CHECK(cli({"--help"}, &out) == 0);
  CHECK(out.find("simulate") != std::string::npos);

  CHECK(cli({"analyze", spread.string(), "--out", (dir / "an").string()}, &out) == 0);
  CHECK(out.find("node1.msd_interval_empty=true") != std::string::npos);
  CHECK(fs::exists(dir / "an" / "stability.txt"));
  CHECK(fs::exists(dir / "an" / "bounds_ebatc_d0.01.txt"));

  CHECK(cli({"simulate", small.string(), "--out", (dir / "sim").string(), "--threads", "2"}) == 0);
  CHECK(fs::exists(dir / "sim" / "curves_ebatc_d0.01.csv"));
  CHECK(cli({"simulate", small.string(), "--out", (dir / "sim2").string(), "--seed", "99"}) == 0);
  CHECK(slurp(dir / "sim" / "summary.csv") != slurp(dir / "sim2" / "summary.csv"));
  CHECK(cli({"simulate", small.string(), "--threads", "0"}) == 1);

  CHECK(cli({"simulate", diverge.string(), "--out", (dir / "div").string()}, nullptr, &err) == 2);
  CHECK(err.find("aborted") != std::string::npos);
  CHECK(fs::exists(dir / "div" / "manifest.txt"));
}
