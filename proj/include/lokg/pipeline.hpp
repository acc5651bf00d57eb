#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lokg/error.hpp"
#include "lokg/metrics.hpp"
#include "lokg/providers.hpp"
#include "lokg/synth.hpp"
#include "lokg/tmp.hpp"

namespace lokg {

// Staged runs over an output directory. Each stage reads the artifacts of
// the previous one:
//   ingest   -> forest.json, filter_report.json
//   mine     -> verdicts.csv, relations.json, mine_stats.json, embeddings.bin, decisions.key
//   build    -> kg.json, kg.graphml, kg_edges.csv
//   metrics  -> metrics.json, nodes.csv, nodes_hierarchy.csv
//   evaluate -> evaluation.json, assessments.csv, journeys.csv
//   report   -> report.json, report.md, metrics_table.csv

struct RunConfig {
    std::filesystem::path dataset;
    std::filesystem::path output_dir = "lokg-out";
    ProviderConfigs providers;
    TmpConfig tmp;
    bool include_intra_journey = false;
    MetricsConfig metrics;
    std::size_t sample_size = 240;
    std::uint64_t evaluation_seed = 42;
    std::size_t jobs = 0;
    double max_failure_fraction = 0.0;
    GeneratorSpec synth;

    /// Throws ConfigError.
    void validate() const;
    /// Everything that can change results; paths and jobs excluded.
    nlohmann::json to_json() const;
    std::string hash() const;
    /// Canonical INI text; parse_config(to_ini()) restores the config.
    std::string to_ini() const;
    /// Pushes `jobs` into the tmp and metrics sections.
    void apply_jobs(std::size_t jobs);
};

/// Reads INI text. Relative paths resolve against `base_dir`. Unknown
/// sections or keys raise ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

struct StageResult {
    std::vector<std::filesystem::path> written;
    nlohmann::json summary;
};

StageResult cmd_ingest(const RunConfig& config, bool dry_run = false);
/// Throws (after writing the ledger) when the failed-pair fraction exceeds
/// max_failure_fraction; the error carries the dominant failure code.
StageResult cmd_mine(const RunConfig& config, bool dry_run = false);
StageResult cmd_build(const RunConfig& config, bool dry_run = false);
StageResult cmd_metrics(const RunConfig& config, bool dry_run = false);
StageResult cmd_evaluate(const RunConfig& config, bool dry_run = false);
/// `reproducible` leaves the timestamp out of the report.
StageResult cmd_report(const RunConfig& config, bool reproducible, bool dry_run = false);
/// All stages in order.
StageResult run_all(const RunConfig& config, bool reproducible);

/// Writes the dataset to `path` and the labels next to it (`<stem>.labels.json`).
StageResult cmd_gen_synth(const GeneratorSpec& spec, const std::filesystem::path& path);

/// 2 for usage, config and schema problems, 1 for everything else.
int exit_code_for(ErrorCode code) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lokg
