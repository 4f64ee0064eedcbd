#ifndef NSV_JSON_IO_HPP
#define NSV_JSON_IO_HPP

#include "nsv/geometry.hpp"
#include "nsv/harness.hpp"
#include "nsv/nsa.hpp"
#include "nsv/verifier.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace nsv {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Box bounds <-> [[lo, hi], ...]
Json bounds_to_json(const Box& box);
Box bounds_from_json(const Json& j);

// Condition <-> DNF array [[{coeffs, rhs, relation}, ...], ...] or the
// {"minimal"|"not_minimal"|"maximal"|"not_maximal": k, "outputs": m} sugar.
Json condition_to_json(const OutputCondition& condition);
OutputCondition condition_from_json(const Json& j);

// Sub-requirement lists: {"schema_version", "sub_requirements": [{id, bounds}]}
Json subrequirements_to_json(const std::vector<Box>& cells);
std::vector<Box> subrequirements_from_json(const Json& j);
std::string subrequirements_to_csv(const std::vector<Box>& cells);

// Detector sets: {"schema_version", "params", "detector_ids", "attempts_used"}
Json detectors_to_json(const DetectorSet& ds);
// Boxes are reconstructed by id from the pool the detectors were drawn from.
DetectorSet detectors_from_json(const Json& j, const std::vector<Box>& pool);

// Ground truth keyed by sub-requirement id.
Json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const Json& j);

// Property spec: {"schema_version", "bounds", "condition", "split_dims", "n"}
Json property_to_json(const PropertySpec& p);
PropertySpec property_from_json(const Json& j);

// Experiment report; all wall-clock data lives under the top-level "timing"
// key so reports from equal configs and seeds compare byte-identical once
// that key is dropped.
Json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg);
std::string report_to_csv(const ExperimentReport& report);

// Experiment config (CLI --config).
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

// Adapter protocol files. The query schema is fixed:
// {nnet_path, box, condition, timeout_s}; the verdict file is
// {status: "sat"|"unsat"|"unknown", witness?: [floats]}.
Json adapter_query_to_json(const std::string& nnet_path, const Box& box,
                           const OutputCondition& condition, double timeout_s);
struct AdapterQuery {
    std::string nnet_path;
    Box box{{Interval(0.0, 0.0)}};
    OutputCondition condition;
    double timeout_s = 60.0;
};
AdapterQuery adapter_query_from_json(const Json& j);
Json verdict_file_to_json(const Verdict& v);
// Parses a verdict file; throws ProtocolError on malformed content.
Verdict verdict_file_from_json(const Json& j);

Json load_json(const std::filesystem::path& file);
void save_json(const Json& j, const std::filesystem::path& file);
void save_text(const std::string& text, const std::filesystem::path& file);

// Throws ConfigError when j lacks schema_version or carries a different one.
void require_schema_version(const Json& j, const std::string& what);

} // namespace nsv

#endif
