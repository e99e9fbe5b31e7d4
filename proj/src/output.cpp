#include "bhqrc/output.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace bhqrc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

json measurements_cell(const std::optional<double>& m) { return m ? json(*m) : json("ideal"); }

std::ofstream open_for_write(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

Row point_columns(const ExperimentConfig& config, const PointSpec& p) {
    return {point_id(p),
            std::string(to_string(p.topology)),
            p.j_over_u,
            p.j_over_u / config.lattice.sites,
            p.disorder,
            p.cutoff,
            measurements_cell(p.measurements),
            std::string(to_string(config.task.kind)),
            config.task.degree};
}

const std::vector<std::string> kPointHeader{"point_id", "topology", "j_over_u", "j_over_un", "disorder",
                                            "cutoff", "measurements", "task", "degree"};

std::vector<std::string> with_point_header(std::initializer_list<std::string> rest) {
    std::vector<std::string> h = kPointHeader;
    h.insert(h.end(), rest);
    return h;
}

void progress(const DriverOptions& options, const std::string& message) {
    if (!options.quiet) std::cerr << message << std::endl;
}

std::string stem(const ExperimentConfig& c, std::string_view suffix, OutputFormat format) {
    return c.output.name + std::string(suffix) + (format == OutputFormat::Csv ? ".csv" : ".json");
}

void finish(const ExperimentConfig& config, std::string_view kind, std::size_t observables,
            DriverOutcome& outcome) {
    const std::string meta = config.output.name + ".meta.json";
    outcome.files.push_back(meta);
    auto out = open_for_write(fs::path(config.output.dir) / meta);
    out << metadata(config, kind, observables, outcome.files).dump(2) << '\n';
}

// Runs `job(i)` for i in [0, n) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t n, int workers, Job job) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

std::string format_cell(const json& cell) {
    if (cell.is_null()) return "";
    if (cell.is_string()) return cell.get<std::string>();
    if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
    if (cell.is_number_integer()) return cell.dump();
    if (cell.is_number_float()) {
        const double v = cell.get<double>();
        if (!std::isfinite(v)) return "";
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.10g", v);
        return buffer;
    }
    return cell.dump();
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            line += '"';
            for (char c : f) {
                if (c == '"') line += '"';
                line += c;
            }
            line += '"';
        } else {
            line += f;
        }
    }
    return line;
}

std::string csv_line(const Row& row) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& cell : row) fields.push_back(format_cell(cell));
    return csv_line(fields);
}

void write_table(const fs::path& path, const Table& table, OutputFormat format) {
    auto out = open_for_write(path);
    if (format == OutputFormat::Csv) {
        out << csv_line(table.header) << '\n';
        for (const auto& row : table.rows) out << csv_line(row) << '\n';
        return;
    }
    json array = json::array();
    for (const auto& row : table.rows) {
        json object = json::object();
        for (std::size_t c = 0; c < table.header.size() && c < row.size(); ++c) {
            const auto& cell = row[c];
            object[table.header[c]] =
                cell.is_number_float() && !std::isfinite(cell.get<double>()) ? json(nullptr) : cell;
        }
        array.push_back(std::move(object));
    }
    out << array.dump(1) << '\n';
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

Table point_table(const ExperimentConfig& config, std::span<const PointResult> results) {
    Table t;
    t.header = with_point_header({"index", "dt", "test_capacity", "test_stderr", "train_capacity",
                                  "realizations", "degenerate", "weight_norm", "status"});
    for (const auto& r : results) {
        if (!r.failure.empty()) {
            Row row = point_columns(config, r.point);
            row.insert(row.end(), {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                                   "failed"});
            t.rows.push_back(std::move(row));
            continue;
        }
        for (std::size_t i = 0; i < r.selection.curve.size(); ++i) {
            const auto& p = r.selection.curve[i];
            Row row = point_columns(config, r.point);
            row.insert(row.end(), {p.index, r.selection.dt[i], p.test, p.test_stderr, p.train, p.realizations,
                                   p.degenerate, p.weight_norm, "ok"});
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

Table summary_table(const ExperimentConfig& config, std::span<const PointResult> results) {
    Table t;
    t.header = with_point_header({"objective", "best_dt", "threshold", "max_delay", "below_threshold_at_first",
                                  "realizations", "status", "message"});
    for (const auto& r : results) {
        Row row = point_columns(config, r.point);
        const bool ok = r.failure.empty();
        row.insert(row.end(),
                   {std::string(to_string(config.task.objective)),
                    ok && r.selection.best_dt ? json(*r.selection.best_dt) : json(nullptr),
                    config.task.threshold,
                    ok ? json(r.selection.summary.value) : json(nullptr),
                    ok ? json(r.selection.summary.below_at_first) : json(nullptr),
                    realization_count(config, r.point),
                    ok ? "ok" : "failed",
                    r.failure});
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table grid_table(const ExperimentConfig& config, std::span<const PointResult> results) {
    Table t;
    t.header = with_point_header({"dt", "index", "test_capacity", "test_stderr", "train_capacity"});
    for (const auto& r : results) {
        for (const auto& curve : r.curves) {
            for (const auto& p : curve.points) {
                Row row = point_columns(config, r.point);
                row.insert(row.end(), {curve.dt, p.index, p.test, p.test_stderr, p.train});
                t.rows.push_back(std::move(row));
            }
        }
    }
    return t;
}

Table spectral_table(std::span<const SpectralRecord> records) {
    Table t;
    t.header = {"j_over_un", "j_over_u", "sites", "total", "parity", "sector_dim", "fock_dim", "levels",
                "ratios", "mean_r", "degenerate", "mean_d1", "goe_r", "poisson_r", "goe_d1"};
    for (const auto& r : records) {
        t.rows.push_back({r.j_over_un, r.j_over_u, r.sites, r.total, r.parity, r.sector_dimension,
                          r.fock_dimension, r.gap_ratio.levels, r.gap_ratio.ratios, r.gap_ratio.mean,
                          r.gap_ratio.degenerate, r.information_dimension, kGoeMeanGapRatio,
                          kPoissonMeanGapRatio, r.goe_information_dimension});
    }
    return t;
}

Table svd_summary_table(std::span<const SvdRecord> records) {
    Table t;
    t.header = {"topology", "j_over_u", "dt", "rows", "columns", "largest", "smallest", "threshold", "redundant"};
    for (const auto& r : records) {
        const auto& v = r.spectrum.values;
        t.rows.push_back({std::string(to_string(r.topology)), r.j_over_u, r.dt, r.rows, r.cols, v(0),
                          v(v.size() - 1), r.spectrum.threshold, r.spectrum.redundant});
    }
    return t;
}

Table svd_values_table(std::span<const SvdRecord> records) {
    Table t;
    t.header = {"topology", "j_over_u", "dt", "k", "singular_value", "relative"};
    for (const auto& r : records) {
        const auto& v = r.spectrum.values;
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            t.rows.push_back({std::string(to_string(r.topology)), r.j_over_u, r.dt, k + 1, v(k), v(k) / v(0)});
        }
    }
    return t;
}

Table cutoff_table(const PointSpec& point, const CutoffComparison& comparison) {
    Table t;
    t.header = {"point_id", "j_over_u", "dt", "cutoff", "index", "test_capacity", "max_abs_difference"};
    for (std::size_t c = 0; c < comparison.cutoffs.size(); ++c) {
        for (const auto& p : comparison.curves[c]) {
            t.rows.push_back({point_id(point), point.j_over_u, comparison.dt, comparison.cutoffs[c], p.index,
                              p.test, comparison.max_abs_difference});
        }
    }
    return t;
}

void write_features(const fs::path& path, const FeatureMatrix& features) {
    auto out = open_for_write(path);
    std::vector<std::string> header{"step"};
    header.insert(header.end(), features.columns.begin(), features.columns.end());
    out << csv_line(header) << '\n';
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        Row row{r};
        for (Eigen::Index c = 0; c < features.cols(); ++c) row.push_back(features.values(r, c));
        out << csv_line(row) << '\n';
    }
}

void write_targets(const fs::path& path, const TaskConfig& task, std::span<const double> inputs,
                   std::span<const TargetSeries> targets) {
    auto out = open_for_write(path);
    std::vector<std::string> header{"step", "input"};
    const char* prefix = task.kind == TaskKind::Narma ? "order_" : "delay_";
    for (int index : task.indices()) header.push_back(prefix + std::to_string(index));
    out << csv_line(header) << '\n';
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Row row{k, inputs[k]};
        for (const auto& t : targets) row.push_back(k >= t.first_valid ? json(t.values[k]) : json(nullptr));
        out << csv_line(row) << '\n';
    }
}

json metadata(const ExperimentConfig& config, std::string_view kind, std::size_t observables,
              const std::vector<std::string>& files) {
    json seeds = {{"master", config.seed}};
    for (auto d : {InputDistribution::Uniform01, InputDistribution::Binary01, InputDistribution::UniformTo02}) {
        seeds["inputs_" + std::string(to_string(d))] =
            derive_seed(config.seed, "inputs", static_cast<std::uint64_t>(d));
    }
    seeds["disorder_stream"] = "derive(master, disorder, draw)";
    seeds["noise_stream"] = "derive(master, noise, realization)";
    return {
        {"tool", "bhqrc"},
        {"version", std::string(kVersion)},
        {"kind", std::string(kind)},
        {"config_hash", config_hash(config)},
        {"config", to_json(config)},
        {"seeds", seeds},
        {"observables", observables},
        {"virtual_nodes", config.dynamics.virtual_nodes},
        {"feature_columns", observables * static_cast<std::size_t>(config.dynamics.virtual_nodes) + 1},
        {"files", files},
        {"design",
         {{"parity_sum", "j = 0..tau"},
          {"narma_history", "zero for non-positive steps"},
          {"bias_regularized", true},
          {"features_standardized", false},
          {"capacity_segment", "test"},
          {"delay_summary", "largest index before the first drop below threshold"},
          {"dt_selection", std::string(to_string(config.task.objective)) +
                               ", ties to the smallest dt"},
          {"spectral_window", "parity sector first, then symmetric trim"},
          {"observable_pairs", "i <= j, hopping family first"},
          {"disorder_wrap_edge", "randomized like every other edge"},
          {"energy_axes", "j_over_u and j_over_un = j_over_u / sites both recorded"}}},
    };
}

json to_json(const PointResult& r) {
    const auto curve_json = [](const std::vector<CurvePoint>& points) {
        json a = json::array();
        for (const auto& p : points) {
            a.push_back({{"index", p.index},
                         {"test", number_or_null(p.test)},
                         {"test_stderr", number_or_null(p.test_stderr)},
                         {"train", number_or_null(p.train)},
                         {"realizations", p.realizations},
                         {"degenerate", p.degenerate},
                         {"weight_norm", number_or_null(p.weight_norm)}});
        }
        return a;
    };
    json curves = json::array();
    for (const auto& c : r.curves) curves.push_back({{"dt", c.dt}, {"points", curve_json(c.points)}});
    return {
        {"point_id", point_id(r.point)},
        {"point",
         {{"j_over_u", r.point.j_over_u},
          {"topology", std::string(to_string(r.point.topology))},
          {"disorder", r.point.disorder},
          {"measurements", r.point.measurements ? json(*r.point.measurements) : json(nullptr)},
          {"cutoff", r.point.cutoff}}},
        {"curves", curves},
        {"selection",
         {{"curve", curve_json(r.selection.curve)},
          {"dt", r.selection.dt},
          {"best_dt", r.selection.best_dt ? json(*r.selection.best_dt) : json(nullptr)},
          {"max_delay", r.selection.summary.value},
          {"below_at_first", r.selection.summary.below_at_first}}},
        {"failure", r.failure},
        {"observables", r.observables},
    };
}

PointResult point_result_from_json(const json& j) {
    const auto curve_from = [](const json& a) {
        std::vector<CurvePoint> points;
        for (const auto& p : a) {
            points.push_back({p.at("index").get<int>(), number_or_nan(p.at("test")),
                              number_or_nan(p.at("test_stderr")), number_or_nan(p.at("train")),
                              p.at("realizations").get<int>(), p.at("degenerate").get<int>(),
                              number_or_nan(p.at("weight_norm"))});
        }
        return points;
    };
    PointResult r;
    const auto& p = j.at("point");
    r.point.j_over_u = p.at("j_over_u").get<double>();
    r.point.topology = parse_topology(p.at("topology").get<std::string>());
    r.point.disorder = p.at("disorder").get<double>();
    if (!p.at("measurements").is_null()) r.point.measurements = p.at("measurements").get<double>();
    r.point.cutoff = p.at("cutoff").get<int>();
    for (const auto& c : j.at("curves")) r.curves.push_back({c.at("dt").get<double>(), curve_from(c.at("points"))});
    const auto& s = j.at("selection");
    r.selection.curve = curve_from(s.at("curve"));
    r.selection.dt = s.at("dt").get<std::vector<double>>();
    if (!s.at("best_dt").is_null()) r.selection.best_dt = s.at("best_dt").get<double>();
    r.selection.summary.value = s.at("max_delay").get<int>();
    r.selection.summary.below_at_first = s.at("below_at_first").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    r.observables = j.at("observables").get<std::size_t>();
    return r;
}

ResultJournal::ResultJournal(fs::path path, bool resume) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    if (resume && fs::exists(path_)) {
        std::ifstream in(path_);
        std::string line;
        std::string kept;
        while (std::getline(in, line)) {
            try {
                auto entry = point_result_from_json(json::parse(line));
                // Failed points are retried on resume.
                if (!entry.failure.empty()) continue;
                entries_.push_back(std::move(entry));
                kept += line + '\n';
            } catch (const std::exception&) {
                break; // torn final line from an interrupted run
            }
        }
        std::ofstream(path_, std::ios::trunc) << kept;
    } else {
        std::ofstream(path_, std::ios::trunc);
    }
}

std::set<std::string> ResultJournal::completed() const {
    std::lock_guard lock(mutex_);
    std::set<std::string> ids;
    for (const auto& e : entries_) ids.insert(point_id(e.point));
    return ids;
}

void ResultJournal::append(const PointResult& result) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << to_json(result).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + path_.string());
    entries_.push_back(result);
}

std::vector<PointResult> ResultJournal::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

DriverOutcome run_benchmark(const ExperimentConfig& config, bool first_point_only,
                            const DriverOptions& options) {
    auto points = sweep_points(config);
    if (first_point_only) points.resize(1);
    const fs::path dir(config.output.dir);
    ResultJournal journal(dir / (config.output.name + ".partial.jsonl"), options.resume);
    const auto done = journal.completed();

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!done.count(point_id(points[i]))) pending.push_back(i);
    }
    if (pending.size() < points.size()) {
        progress(options, "resuming: " + std::to_string(points.size() - pending.size()) + " of " +
                              std::to_string(points.size()) + " points already done");
    }
    std::atomic<std::size_t> finished{0};
    parallel_for(pending.size(), options.workers, [&](std::size_t k) {
        const auto& point = points[pending[k]];
        PointResult r = run_point(config, point);
        journal.append(r);
        progress(options, "[" + std::to_string(++finished) + "/" + std::to_string(pending.size()) + "] " +
                              point_id(point) + (r.failure.empty() ? "" : "  FAILED: " + r.failure));
    });

    std::map<std::string, PointResult> by_id;
    for (auto& e : journal.entries()) by_id[point_id(e.point)] = std::move(e);
    std::vector<PointResult> ordered;
    for (const auto& p : points) ordered.push_back(by_id.at(point_id(p)));

    DriverOutcome outcome;
    std::size_t observables = 0;
    for (const auto& r : ordered) {
        outcome.failures += !r.failure.empty();
        observables = std::max(observables, r.observables);
    }
    const auto format = config.output.format;
    const auto emit = [&](std::string_view suffix, const Table& table) {
        const auto name = stem(config, suffix, format);
        write_table(dir / name, table, format);
        outcome.files.push_back(name);
    };
    emit("", point_table(config, ordered));
    emit("_summary", summary_table(config, ordered));
    emit("_grid", grid_table(config, ordered));

    if (config.output.features) {
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            const auto& r = ordered[i];
            if (!r.failure.empty()) continue;
            const auto inputs = task_inputs(config, r.point);
            const double dt = r.selection.best_dt.value_or(config.dynamics.dt.front());
            const auto split = config.protocol.split(r.point.j_over_u);
            const auto features = Reservoir(make_reservoir_spec(config, r.point, dt, 0)).run(inputs, split.wash_out);
            const auto tag = "_" + std::to_string(i);
            write_features(dir / (config.output.name + "_features" + tag + ".csv"), features);
            write_targets(dir / (config.output.name + "_targets" + tag + ".csv"), config.task, inputs,
                          task_targets(config.task, inputs));
            outcome.files.push_back(config.output.name + "_features" + tag + ".csv");
            outcome.files.push_back(config.output.name + "_targets" + tag + ".csv");
        }
    }
    fs::remove(journal.path());
    finish(config, first_point_only ? "run" : "sweep", observables, outcome);
    return outcome;
}

DriverOutcome run_spectral(const ExperimentConfig& config, const DriverOptions& options) {
    const auto& grid = config.spectral.j_over_un;
    std::vector<SpectralRecord> records(grid.size());
    parallel_for(grid.size(), options.workers, [&](std::size_t i) {
        records[i] = spectral_point(config.spectral, grid[i]);
    });
    DriverOutcome outcome;
    const auto name = stem(config, "_spectral", config.output.format);
    write_table(fs::path(config.output.dir) / name, spectral_table(records), config.output.format);
    outcome.files.push_back(name);
    finish(config, "spectral", 0, outcome);
    return outcome;
}

DriverOutcome run_svd(const ExperimentConfig& config, const DriverOptions& options) {
    std::vector<std::pair<PointSpec, double>> jobs;
    for (const auto& p : sweep_points(config))
        for (double dt : config.dynamics.dt) jobs.emplace_back(p, dt);
    std::vector<SvdRecord> records(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
        records[i] = svd_point(config, jobs[i].first, jobs[i].second);
        progress(options, "svd " + point_id(jobs[i].first) + " dt=" + format_cell(jobs[i].second) + ": " +
                              std::to_string(records[i].spectrum.redundant) + " redundant");
    });
    DriverOutcome outcome;
    const auto format = config.output.format;
    const fs::path dir(config.output.dir);
    for (const auto& [suffix, table] : {std::pair{"_svd", svd_summary_table(records)},
                                        std::pair{"_svd_values", svd_values_table(records)}}) {
        const auto name = stem(config, suffix, format);
        write_table(dir / name, table, format);
        outcome.files.push_back(name);
    }
    const std::size_t observables = default_observables(config.lattice.sites).size();
    finish(config, "svd", observables, outcome);
    return outcome;
}

DriverOutcome run_cutoff_check(const ExperimentConfig& config, const DriverOptions& options) {
    std::vector<std::pair<PointSpec, double>> jobs;
    for (const auto& p : sweep_points(config))
        for (double dt : config.dynamics.dt) jobs.emplace_back(p, dt);
    std::vector<CutoffComparison> results(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
        results[i] = cutoff_check(config, jobs[i].first, jobs[i].second);
        progress(options, "cutoff-check " + point_id(jobs[i].first) + " dt=" + format_cell(jobs[i].second) +
                              ": max |dC| = " + format_cell(results[i].max_abs_difference));
    });
    Table table = cutoff_table(PointSpec{}, CutoffComparison{});
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        Table t = cutoff_table(jobs[i].first, results[i]);
        table.rows.insert(table.rows.end(), t.rows.begin(), t.rows.end());
    }
    DriverOutcome outcome;
    const auto name = stem(config, "_cutoff", config.output.format);
    write_table(fs::path(config.output.dir) / name, table, config.output.format);
    outcome.files.push_back(name);
    finish(config, "cutoff-check", default_observables(config.lattice.sites).size(), outcome);
    return outcome;
}

} // namespace bhqrc
