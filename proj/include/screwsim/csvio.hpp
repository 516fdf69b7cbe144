#pragma once

#include <screwsim/engine.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace screwsim {

// %.17g: enough digits to round-trip the double exactly, so re-reading a
// trajectory feeds the classifier bitwise-identical states.
std::string format_double(double x);

// One row per (time, agent); the optional w/b/c column groups follow layout.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples,
                          const ColumnLayout& layout);

// MetricsRecord rows; metrics absent for the law are left as empty cells.
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& metrics);

struct TrajectoryData {
  std::vector<TrajectorySample> samples;
  ColumnLayout layout;
};

// Inverse of write_trajectory_csv; the layout is recovered from the header.
// Throws SchemaError on malformed input.
TrajectoryData read_trajectory_csv(std::istream& is);

// Parseable "key: value" block describing a classification verdict.
std::string verdict_text(const EquilibriumVerdict& v);

// verdict.txt payload: the verdict block plus run integrity lines.
std::string run_summary_text(const SimResult& res);

}  // namespace screwsim
