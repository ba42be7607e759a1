#ifndef LIPSMOOTH_PIPELINE_HPP
#define LIPSMOOTH_PIPELINE_HPP

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "lipsmooth/capacity.hpp"
#include "lipsmooth/curvature.hpp"
#include "lipsmooth/defining.hpp"
#include "lipsmooth/domfile.hpp"
#include "lipsmooth/metrics.hpp"
#include "lipsmooth/shapes.hpp"

namespace lipsmooth {

struct RunConfig {
  std::string shape;      // shape spec text, e.g. "disk" or "disk:radius=2,lip=0.2"
  std::string spec_path;  // .dom file (alternative to shape)
  std::vector<int> m_schedule = {16, 32, 64, 128};
  int chart_res = 129;
  double vol_res = 0;           // lebesgue counting spacing; 0 = auto (L/m per row)
  double cap_res = 1.0 / 128.0; // capacity grid h as a fraction of r
  double eps0 = 0;              // 0 = R/8
  double cover_beta = 0.7;
  std::string out_dir;
  std::vector<std::string> only;  // verify-suite filter
  bool json = false;

  void validate() const;
};

// Shared state for a run: the atlas, partition, detected m0, and caches of
// defining triples and extractions keyed by m.
class PipelineContext {
 public:
  explicit PipelineContext(const RunConfig& cfg);

  const RunConfig& cfg() const { return cfg_; }
  const DomainAtlas& atlas() const { return atlas_; }
  const BumpFamily& bumps() const { return bumps_; }
  const M0Report& m0() const { return m0_; }

  const DefiningTriple& triple(int m);
  const std::vector<ExtractedChart>& extraction(int m, bool outer);

 private:
  RunConfig cfg_;
  DomainAtlas atlas_;
  BumpFamily bumps_;
  M0Report m0_;
  std::map<int, std::shared_ptr<DefiningTriple>> triples_;
  std::map<std::pair<int, bool>, std::shared_ptr<std::vector<ExtractedChart>>> extractions_;
};

struct Check {
  std::string name;
  bool pass = false;
  double measured = 0;
  double bound = 0;
  std::string note;
};

// individual verification suites (used by cmd_verify and the acceptance run)
Check check_atlas(PipelineContext& ctx);
Check check_mollifier(PipelineContext& ctx);
Check check_partition(PipelineContext& ctx);
Check check_sandwich(PipelineContext& ctx, long samples = 100000);
Check check_band(PipelineContext& ctx);
Check check_chart_sup(PipelineContext& ctx);
Check check_margin(PipelineContext& ctx);
Check check_gradient_bound(PipelineContext& ctx);
Check check_transitions(PipelineContext& ctx);
Check check_hausdorff(PipelineContext& ctx);
Check check_sobolev(PipelineContext& ctx);
Check check_curvature(PipelineContext& ctx);
Check check_characteristic(PipelineContext& ctx);
Check check_lebesgue(PipelineContext& ctx);

std::vector<Check> run_verification(PipelineContext& ctx, const std::vector<std::string>& only);

// builds the full convergence report (reused by cmd_approximate)
ConvergenceReport build_report(PipelineContext& ctx);

// CLI commands; return process exit codes (0 ok, 1 verification failure,
// 2 usage/parse error)
int cmd_approximate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_capacity(const RunConfig& cfg, std::ostream& log);

}  // namespace lipsmooth

#endif
