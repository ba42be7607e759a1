#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lipsmooth/pipeline.hpp"

using namespace lipsmooth;

namespace {

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& m_list) {
  cmd->add_option("--shape", cfg.shape, "built-in shape spec, e.g. disk or disk:radius=2,lip=0.2");
  cmd->add_option("--spec", cfg.spec_path, "domain-spec text file");
  cmd->add_option("--m", m_list, "comma-separated mollification schedule (default 16,32,64,128)");
  cmd->add_option("--chart-res", cfg.chart_res, "extraction grid nodes per axis");
  cmd->add_option("--vol-res", cfg.vol_res, "volume-counting grid spacing (0 = auto)");
  cmd->add_option("--cap-res", cfg.cap_res, "capacity grid spacing as a fraction of r");
  cmd->add_option("--eps0", cfg.eps0, "chart margin override (default R/8)");
  cmd->add_option("--out", cfg.out_dir, "output directory for artifacts");
  cmd->add_option("--only", cfg.only, "verification suites to run (verify only)");
  cmd->add_flag("--json", cfg.json, "emit JSON to stdout instead of CSV summaries");
}

std::vector<int> parse_schedule(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error("bad m value '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smooth inner/outer approximation of bounded Lipschitz domains"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string m_list = "16,32,64,128";
  CLI::App* approx = app.add_subcommand("approximate", "build the m-schedule approximations");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suites");
  CLI::App* capacity = app.add_subcommand("capacity", "isocapacitary K tables and comparisons");
  add_common(approx, cfg, m_list);
  add_common(verify, cfg, m_list);
  add_common(capacity, cfg, m_list);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.m_schedule = parse_schedule(m_list);
    if (app.got_subcommand(approx)) return cmd_approximate(cfg, std::cout);
    if (app.got_subcommand(verify)) return cmd_verify(cfg, std::cout);
    if (app.got_subcommand(capacity)) return cmd_capacity(cfg, std::cout);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
