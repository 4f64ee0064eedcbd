#ifndef NSV_HARNESS_HPP
#define NSV_HARNESS_HPP

#include "nsv/geometry.hpp"
#include "nsv/network.hpp"
#include "nsv/nsa.hpp"
#include "nsv/verifier.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nsv {

// Safety property: input box, unsafe output condition, partition settings.
struct PropertySpec {
    Box box{{Interval(0.0, 0.0)}};
    OutputCondition condition;
    PartitionSpec partition;
};

// Detector-size / radius sweep parameters. Per-repetition seeds are derived
// as master_seed + repetition index and recorded in the report for replay.
struct NsaSweep {
    std::vector<std::size_t> detector_sizes;
    std::vector<double> radii;
    std::size_t repetitions = 1;
    std::uint64_t master_seed = 0;
    std::size_t max_attempts = 0; // 0 = per-run default of 50 * N
};

struct ExperimentConfig {
    std::vector<std::filesystem::path> network_paths;
    PropertySpec property;
    NsaSweep sweep;
    BackendKind backend = BackendKind::Builtin;
    std::optional<ExternalAdapterConfig> adapter;
    std::size_t workers = 1;
    double timeout_s = 60.0;
    std::size_t falsify_samples = 1000;
    std::filesystem::path output_dir;

    void validate() const; // throws ConfigError
};

enum class CellLabel { Safe, Unsafe, Unknown };

std::string to_string(CellLabel label);
CellLabel cell_label_from_string(const std::string& s);

// One sub-requirement's verdicts across all networks plus the aggregate
// label: UNSAFE iff any SAT, SAFE iff all UNSAT, otherwise UNKNOWN.
struct CellResult {
    std::size_t id = 0;
    CellLabel label = CellLabel::Unknown;
    std::vector<Verdict> verdicts; // aligned with the config's network list
};

struct GroundTruth {
    std::vector<Box> cells;          // the partition, ids 0..Z-1
    std::vector<std::string> networks;
    std::vector<CellResult> results; // indexed by cell id

    CellLabel label_of(std::size_t id) const;
    std::vector<Box> cells_with_label(CellLabel label) const;
    std::size_t count_label(CellLabel label) const;
};

// Exhaustive labeling of every sub-requirement against every network:
// sampling falsifier first, then the selected complete backend. Tasks are
// distributed over cfg.workers threads; aggregation is keyed by cell id and
// independent of scheduling.
GroundTruth label_ground_truth(const ExperimentConfig& cfg);
GroundTruth label_ground_truth(const ExperimentConfig& cfg,
                               const std::vector<Network>& networks);

struct ValidationCounts {
    std::size_t tp = 0;      // detectors labeled UNSAFE
    std::size_t fp = 0;      // detectors labeled SAFE
    std::size_t unknown = 0; // excluded from precision

    std::optional<double> precision() const
    {
        if (tp + fp == 0)
            return std::nullopt;
        return static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
};

ValidationCounts validate_detectors(const DetectorSet& ds, const GroundTruth& gt);

// One NSA run within a sweep.
struct ExperimentRun {
    std::size_t detector_size = 0;
    double self_radius = 0.0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> detector_ids;
    std::size_t attempts_used = 0;
    ValidationCounts counts;
    bool failed = false;        // detector generation shortfall
    std::string failure_reason;
};

struct ExperimentAggregate {
    std::size_t detector_size = 0;
    double self_radius = 0.0;
    std::size_t repetitions = 0;
    double mean_tp = 0.0;
    std::optional<double> mean_precision;
};

struct ExperimentReport {
    GroundTruth ground_truth;
    std::vector<ExperimentRun> runs;
    std::vector<ExperimentAggregate> aggregates;
    double label_time_s = 0.0;
    double nsa_time_s = 0.0;
};

// Full pipeline: partition, label, sweep NSA sizes/radii with fresh seeds per
// repetition, validate, aggregate. Writes ground_truth.json, report.json and
// report.csv into cfg.output_dir when it is non-empty.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// 2-D projection of the labeled partition onto two dimensions as an SVG
// document. A projected rectangle is unsafe when any covered cell is unsafe,
// unknown when none is unsafe but one is unlabeled, safe otherwise; cells
// covering a detector are outlined. Output is deterministic.
std::string render_region_map(const GroundTruth& gt, const DetectorSet* detectors,
                              std::pair<std::size_t, std::size_t> dims);

} // namespace nsv

#endif
