#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lipsmooth/pipeline.hpp"

using namespace lipsmooth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_disk_config() {
  RunConfig cfg;
  cfg.shape = "disk";
  cfg.m_schedule = {16, 32};
  cfg.chart_res = 33;
  return cfg;
}

}  // namespace

TEST_CASE("run config validation") {
  RunConfig cfg = small_disk_config();
  cfg.validate();
  RunConfig bad = cfg;
  bad.m_schedule = {32, 16};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.shape = "";
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.spec_path = "also.dom";
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.cap_res = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("approximate emits byte-identical reports on identical configs") {
  RunConfig cfg = small_disk_config();
  fs::path d1 = fs::temp_directory_path() / "lipsmooth_det_a";
  fs::path d2 = fs::temp_directory_path() / "lipsmooth_det_b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  cfg.out_dir = d1.string();
  std::ostringstream log1, log2;
  CHECK(cmd_approximate(cfg, log1) == 0);
  cfg.out_dir = d2.string();
  CHECK(cmd_approximate(cfg, log2) == 0);
  CHECK(log1.str() == log2.str());
  for (const char* f : {"report.csv", "report.json", "m0.json"}) {
    std::string a = slurp(d1 / f), b = slurp(d2 / f);
    CHECK(a == b);
    CHECK(!a.empty());
  }
  // chart dumps as well
  CHECK(slurp(d1 / "charts_m32_outer.bin") == slurp(d2 / "charts_m32_outer.bin"));
}

TEST_CASE("verify with --only runs exactly the requested suite") {
  RunConfig cfg = small_disk_config();
  cfg.only = {"sandwich"};
  PipelineContext ctx(cfg);
  std::vector<Check> checks = run_verification(ctx, cfg.only);
  REQUIRE(checks.size() == 1);
  CHECK(checks[0].name == "sandwich");
  CHECK(checks[0].pass);
}

TEST_CASE("pipeline context caches triples and extractions") {
  RunConfig cfg = small_disk_config();
  PipelineContext ctx(cfg);
  const DefiningTriple& t1 = ctx.triple(16);
  const DefiningTriple& t2 = ctx.triple(16);
  CHECK(&t1 == &t2);
  const auto& e1 = ctx.extraction(32, true);
  const auto& e2 = ctx.extraction(32, true);
  CHECK(&e1 == &e2);
  CHECK(static_cast<int>(e1.size()) == ctx.atlas().size());
}

#ifdef LIPSMOOTH_CLI
TEST_CASE("cli exit codes: usage errors and spec parse errors give 2") {
  fs::path tmp = fs::temp_directory_path() / "lipsmooth_cli_t";
  fs::create_directories(tmp);
  std::string cli = LIPSMOOTH_CLI;
  auto run = [&](const std::string& args) {
    std::string cmd = cli + " " + args + " > " + (tmp / "out.txt").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(run("bogus-subcommand") == 2);
  CHECK(run("approximate") == 2);  // neither shape nor spec
  CHECK(run("approximate --shape no_such_shape --m 8") == 2);
  // a spec file with a syntax error reports its location and exits 2
  std::ofstream(tmp / "bad.dom") << "dim 2\nlipschitz 1\nradius 0.5\ndiameter 2\n"
                                 << "chart\n base 0 0\n rot 1 0 0 1\n expr sqrt(\n";
  CHECK(run("approximate --spec " + (tmp / "bad.dom").string() + " --m 8") == 2);
  std::string err = slurp(tmp / "out.txt");
  CHECK(err.find("line 8") != std::string::npos);
}
#endif
