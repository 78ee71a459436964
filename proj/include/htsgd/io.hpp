#ifndef HTSGD_IO_HPP
#define HTSGD_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "htsgd/config.hpp"
#include "htsgd/harness.hpp"

namespace htsgd {

// CSV emission (RFC-4180 quoting, LF line endings, 17-digit floats).
std::string metrics_csv(const EnsembleSummary& summary);
std::string tails_csv(const EnsembleSummary& summary);
std::string trajectory_csv(const TrajectoryRecord& record);

nlohmann::json constants_json(const TheoryConstants& c);
nlohmann::json rate_function_json(const RateFunction& rf);
nlohmann::json drift_report_json(const DriftBoundReport& report);
nlohmann::json audit_report_json(const EffectiveNoiseReport& report);

// Full ensemble summary: config echo, constants, rate-function parameters,
// fitted slopes, normalized tail curves, verification verdicts.
nlohmann::json summary_json(const ExperimentConfig& cfg,
                            const EnsembleSummary& summary);

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// Writes out_dir/manifest.json naming every emitted file with its content
// fingerprint plus the config hash.
void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& file_names,
                    const std::string& config_hash);

}  // namespace htsgd

#endif  // HTSGD_IO_HPP
