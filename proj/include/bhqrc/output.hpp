#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bhqrc/config.hpp"
#include "bhqrc/harness.hpp"

namespace bhqrc {

// A table cell is a JSON scalar: number, string, bool or null (missing).
using Row = std::vector<nlohmann::json>;

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

/// Doubles are printed with %.10g; null and NaN become empty fields.
std::string format_cell(const nlohmann::json& cell);
std::string csv_line(const Row& row);
std::string csv_line(const std::vector<std::string>& fields);

/// CSV with header, or a JSON array of objects keyed by the header.
void write_table(const std::filesystem::path& path, const Table& table, OutputFormat format);

/// Header plus rows of raw string fields (RFC 4180 quoting).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// Per-index capacity table: one row per (point, delay or order).
Table point_table(const ExperimentConfig& config, std::span<const PointResult> results);
/// One row per point with the Δt choice and the max-delay summary.
Table summary_table(const ExperimentConfig& config, std::span<const PointResult> results);
/// Capacity at every Δt of the grid, before optimization.
Table grid_table(const ExperimentConfig& config, std::span<const PointResult> results);

Table spectral_table(std::span<const SpectralRecord> records);
Table svd_summary_table(std::span<const SvdRecord> records);
Table svd_values_table(std::span<const SvdRecord> records);
Table cutoff_table(const PointSpec& point, const CutoffComparison& comparison);

/// Feature matrix dump: a `step` column followed by the feature names.
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
/// Inputs and every target column aligned by step; invalid leading targets are empty.
void write_targets(const std::filesystem::path& path, const TaskConfig& task,
                   std::span<const double> inputs, std::span<const TargetSeries> targets);

/// Sidecar describing an output set: config echo, hash, seeds, M, V, design flags.
nlohmann::json metadata(const ExperimentConfig& config, std::string_view kind,
                        std::size_t observables, const std::vector<std::string>& files);

// Append-only JSON-lines log of finished points, safe to share between
// workers. Re-opening with `resume` keeps complete lines and drops a torn tail.
class ResultJournal {
public:
    ResultJournal(std::filesystem::path path, bool resume);

    std::set<std::string> completed() const;
    void append(const PointResult& result);
    std::vector<PointResult> entries() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::vector<PointResult> entries_;
};

nlohmann::json to_json(const PointResult& result);
PointResult point_result_from_json(const nlohmann::json& j);

struct DriverOptions {
    int workers = 1;
    bool resume = false;
    bool quiet = false;
};

/// Output files written by a command, relative to the output directory.
struct DriverOutcome {
    std::vector<std::string> files;
    std::size_t failures = 0;
};

/// `run` evaluates only the first point of the grids; `sweep` all of them.
DriverOutcome run_benchmark(const ExperimentConfig& config, bool first_point_only,
                            const DriverOptions& options);
DriverOutcome run_spectral(const ExperimentConfig& config, const DriverOptions& options);
DriverOutcome run_svd(const ExperimentConfig& config, const DriverOptions& options);
DriverOutcome run_cutoff_check(const ExperimentConfig& config, const DriverOptions& options);

} // namespace bhqrc
