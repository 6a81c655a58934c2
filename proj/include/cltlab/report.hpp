#pragma once

#include <string>
#include <vector>

#include "cltlab/config.hpp"
#include "cltlab/harness.hpp"
#include "cltlab/mixing.hpp"

namespace cltlab {

enum class OutputFormat { Csv, Json };

// Shortest round-trip decimal for a double; fixed formatting so identical
// runs produce byte-identical files.
std::string format_double(double v);

// Resolves the bundle directory: `dir` as given when free (or force), else
// with "-1", "-2", ... appended. Creates it and returns the actual path.
std::string prepare_bundle_dir(const std::string& dir, bool force);

// Bundle layout: config.json, per-n statistic samples (CSV or samples.json),
// distances.csv, summary.json. Returns the bundle path actually used.
std::string write_bundle(const std::string& out_dir, const ExperimentConfig& config,
                         const std::string& config_text, const CltResult& result,
                         OutputFormat format, bool force);

// diagnostics.csv in long format: n,metric,value.
void write_diagnostics(const std::string& dir, const DiagnosticsReport& report);

void write_mixing_profile(const std::string& path, const MixingProfile& profile);

void write_probe_report(const std::string& path, const ProbeReport& report);

// Single-column path CSV; the header cell carries the spec hash and seed.
void write_path_csv(const std::string& path, const PathSample& sample);

}  // namespace cltlab
