#ifndef QNOMA_SWEEP_HPP
#define QNOMA_SWEEP_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qnoma/sim.hpp"

namespace qnoma::sweep {

enum class Variable { kOmega, kBandwidth };

const char* variable_name(Variable v);

struct SweepSpec {
  Variable variable = Variable::kOmega;
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  sim::SimConfig base;
  int jobs = 0;  // 0 = hardware concurrency
  void validate() const;
};

struct SweepRow {
  std::string variable;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string mode;
  bool failed = false;
  std::optional<double> mean_psnr_db;
  int stall_count = 0;
  std::optional<double> join_time_slots;
  double mean_rate_bps = 0.0;

  bool operator==(const SweepRow&) const = default;
};

// Both scheduler modes over grid x seeds. The baseline does not depend on
// omega, so for the omega sweep it runs once per seed and its row is
// replicated at every grid value. Rows sorted by (value, seed, mode); failed
// runs are marked and the sweep continues. Execution may be parallel; the
// output is identical to a sequential sweep.
std::vector<SweepRow> sweep(const SweepSpec& spec);

// CSV with the fixed header
// variable,value,seed,mode,mean_psnr_db,stall_count,join_time_slots,mean_rate_bps
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void emit_csv_file(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> parse_csv(std::istream& in);

// Self-contained SVG: seed-averaged PSNR and stall count vs the swept
// variable, one series per mode per panel.
void emit_chart(const std::vector<SweepRow>& rows, std::ostream& out);
void emit_chart_file(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace qnoma::sweep

#endif  // QNOMA_SWEEP_HPP
