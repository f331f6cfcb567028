#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "instab/dominating.hpp"
#include "instab/engine.hpp"
#include "instab/param_set.hpp"

namespace instab {

/// One fully resolved experiment: a sweep entry with its label, or the base
/// configuration when no sweep is given.
struct ExperimentInstance {
    std::string label;
    ParameterSet set;
    EngineConfig engine;
    DominatingConfig dom;
};

/// Parsed and validated experiment description. See the README for the JSON
/// schema; normalized() round-trips through parse_config and reproduces the
/// run exactly, which is what the emitted manifest relies on.
struct ExperimentConfig {
    std::string model_id;
    nlohmann::json model_overrides;  // object, possibly empty

    ParameterSet set;
    EngineConfig engine;  // seed is the experiment root seed
    DominatingConfig dom;
    long n_reps = 10000;  // W replications behind each quantile table
    long replications = 100;

    enum class SweepKey { none, upper, bounds, delta, k_star };
    SweepKey sweep_key = SweepKey::none;
    std::vector<nlohmann::json> sweep_values;

    /// The resolved per-sweep-value instances (a single one without a sweep).
    std::vector<ExperimentInstance> instances() const;

    /// Config document with all defaults made explicit.
    nlohmann::json normalized() const;
};

/// Parses a JSON config document. Unknown keys, missing model id and
/// out-of-range values throw std::invalid_argument naming the key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct SummaryRecord {
    std::string sweep_label;
    long replications = 0;
    long n_unstable = 0;
    long n_failed = 0;
    double proportion = 0.0;
    double mean_drift = 0.0;  // mean f(Y_k)/T_k over clean replications
    double wall_seconds = 0.0;
};

struct RunOptions {
    int workers = 1;
    std::optional<std::uint64_t> seed = std::nullopt;  // root seed override
    // When set, per-replication trajectory_<i>.csv files are written here.
    std::optional<std::string> trajectory_dir = std::nullopt;
};

struct RunResult {
    std::vector<SummaryRecord> summary;
    // verdicts[sweep][replication]; failed replications carry no verdict.
    std::vector<std::vector<std::optional<Verdict>>> verdicts;
};

/// Runs replications * sweep-values instability tests. Replication (s, r)
/// uses seed derive_seed(root, {s, r}); the output is deterministic in the
/// root seed and independent of the worker count.
RunResult run_replications(const ExperimentConfig& cfg,
                           const RunOptions& options = {});

/// Writes summary.csv, timing.csv and manifest.json under out_dir.
/// summary.csv depends only on the root seed; wall-clock goes to timing.csv
/// so the manifest round-trip reproduces summary.csv byte for byte.
void emit_outputs(const ExperimentConfig& cfg, const RunResult& result,
                  const std::string& out_dir);

void write_summary_csv(std::ostream& os, const std::vector<SummaryRecord>& rs);
void write_timing_csv(std::ostream& os, const std::vector<SummaryRecord>& rs);

} // namespace instab
