#include "bhqrc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bhqrc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string compact(double value) {
    std::ostringstream out;
    out.precision(12);
    out << value;
    return out.str();
}

FeatureMatrix run_reservoir(const ReservoirSpec& spec, std::span<const double> inputs,
                            std::size_t wash_out) {
    return Reservoir(spec).run(inputs, wash_out);
}

} // namespace

std::string point_id(const PointSpec& point) {
    return std::string(to_string(point.topology)) + "|j=" + compact(point.j_over_u) +
           "|d=" + compact(point.disorder) +
           "|nm=" + (point.measurements ? compact(*point.measurements) : std::string("ideal")) +
           "|nc=" + std::to_string(point.cutoff);
}

std::vector<PointSpec> sweep_points(const ExperimentConfig& config) {
    std::vector<PointSpec> points;
    for (auto topology : config.lattice.topologies)
        for (double disorder : config.lattice.disorder)
            for (const auto& measurements : config.noise.measurements)
                for (double j : config.lattice.j_over_u)
                    points.push_back({j, topology, disorder, measurements, config.lattice.cutoff});
    return points;
}

int reservoir_draws(const ExperimentConfig& config, const PointSpec& point) {
    return point.disorder > 0.0 ? config.lattice.realizations : 1;
}

int realization_count(const ExperimentConfig& config, const PointSpec& point) {
    const int noise = point.measurements ? config.noise.realizations : 1;
    return std::max(reservoir_draws(config, point), noise);
}

ReservoirSpec make_reservoir_spec(const ExperimentConfig& config, const PointSpec& point, double dt,
                                  int draw) {
    ReservoirSpec spec;
    spec.sites = config.lattice.sites;
    spec.cutoff = point.cutoff;
    spec.topology = point.topology;
    spec.dt = dt;
    spec.virtual_nodes = config.dynamics.virtual_nodes;
    spec.injection_site = config.dynamics.injection_site;
    const Topology topology(point.topology, spec.sites);
    if (point.disorder > 0.0) {
        spec.couplings = sample_disordered_couplings(
            point.j_over_u, point.disorder, topology,
            derive_seed(config.seed, "disorder", static_cast<std::uint64_t>(draw)));
    } else {
        spec.couplings = homogeneous_couplings(topology, point.j_over_u);
    }
    return spec;
}

std::vector<double> task_inputs(const ExperimentConfig& config, const PointSpec& point) {
    const auto distribution = input_distribution(config.task.kind);
    const auto length = config.protocol.split(point.j_over_u).total();
    return generate_inputs(distribution, length,
                           derive_seed(config.seed, "inputs", static_cast<std::uint64_t>(distribution)));
}

std::vector<TargetSeries> task_targets(const TaskConfig& task, std::span<const double> inputs) {
    std::vector<TargetSeries> out;
    for (int index : task.indices()) {
        TaskSpec spec;
        spec.kind = task.kind;
        spec.degree = task.degree;
        if (task.kind == TaskKind::Narma) spec.order = index;
        else spec.delay = index;
        out.push_back(make_targets(spec, inputs));
    }
    return out;
}

Curve evaluate_curve(const ExperimentConfig& config, const PointSpec& point, double dt,
                     std::span<const FeatureMatrix> draws, std::span<const TargetSeries> targets) {
    if (draws.empty()) throw std::invalid_argument("evaluate_curve: no feature matrices");
    const auto& indices = config.task.indices();
    if (targets.size() != indices.size()) throw std::invalid_argument("evaluate_curve: target count mismatch");
    const int realizations = realization_count(config, point);
    const SplitProtocol split = config.protocol.split(point.j_over_u);

    Curve curve;
    curve.dt = dt;
    std::vector<std::vector<double>> test(indices.size());
    curve.points.resize(indices.size());
    for (int r = 0; r < realizations; ++r) {
        const FeatureMatrix& ideal = draws[static_cast<std::size_t>(r) % draws.size()];
        const FeatureMatrix features =
            point.measurements
                ? apply_measurement_noise(ideal, point.measurements,
                                          derive_seed(config.seed, "noise", static_cast<std::uint64_t>(r)))
                : ideal;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (targets[i].first_valid > split.wash_out) {
                throw std::invalid_argument("delay " + std::to_string(indices[i]) +
                                            " exceeds the wash-out, targets would be undefined");
            }
            const Evaluation e = evaluate_task(features, targets[i].values, split, config.beta);
            auto& p = curve.points[i];
            test[i].push_back(e.test.value);
            p.train += e.train.value / realizations;
            p.degenerate += e.test.degenerate || e.train.degenerate;
            p.weight_norm += e.model.weights.norm() / realizations;
        }
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto& p = curve.points[i];
        p.index = indices[i];
        p.realizations = realizations;
        const auto& v = test[i];
        const double n = static_cast<double>(v.size());
        p.test = std::accumulate(v.begin(), v.end(), 0.0) / n;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - p.test) * (x - p.test);
            p.test_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        } else {
            p.test_stderr = kNaN;
        }
    }
    return curve;
}

DelaySummary max_delay_above(std::span<const CurvePoint> curve, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
    DelaySummary s;
    if (curve.empty()) return s;
    if (curve.front().test < threshold) {
        s.below_at_first = true;
        return s;
    }
    for (const auto& p : curve) {
        if (p.test < threshold) break;
        s.value = p.index;
    }
    return s;
}

Selection optimize_dt(std::span<const Curve> curves, DtObjective objective, double threshold) {
    if (curves.empty()) throw std::invalid_argument("optimize_dt: empty Δt grid");
    std::vector<std::size_t> order(curves.size());
    std::iota(order.begin(), order.end(), 0);
    // Visiting in increasing Δt and replacing only on strict improvement
    // resolves ties towards the smallest Δt.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return curves[a].dt < curves[b].dt; });
    Selection sel;
    if (objective == DtObjective::MaxDelay) {
        const auto score = [&](const Curve& c) { return max_delay_above(c.points, threshold).value; };
        std::size_t best = order.front();
        auto best_score = score(curves[best]);
        for (std::size_t k : order) {
            const auto s = score(curves[k]);
            if (s > best_score) {
                best = k;
                best_score = s;
            }
        }
        sel.curve = curves[best].points;
        sel.dt.assign(sel.curve.size(), curves[best].dt);
        sel.best_dt = curves[best].dt;
    } else {
        const std::size_t n = curves[order.front()].points.size();
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = order.front();
            for (std::size_t k : order) {
                if (curves[k].points.at(i).test > curves[best].points[i].test) best = k;
            }
            sel.curve.push_back(curves[best].points[i]);
            sel.dt.push_back(curves[best].dt);
        }
    }
    sel.summary = max_delay_above(sel.curve, threshold);
    return sel;
}

PointResult run_point(const ExperimentConfig& config, const PointSpec& point,
                      const FeatureSource& features) {
    PointResult result;
    result.point = point;
    try {
        const auto inputs = task_inputs(config, point);
        const auto targets = task_targets(config.task, inputs);
        const auto split = config.protocol.split(point.j_over_u);
        const auto& source = features ? features : FeatureSource(run_reservoir);
        const int draws = reservoir_draws(config, point);
        for (double dt : config.dynamics.dt) {
            std::vector<FeatureMatrix> matrices;
            for (int d = 0; d < draws; ++d) {
                matrices.push_back(source(make_reservoir_spec(config, point, dt, d), inputs, split.wash_out));
            }
            result.observables = matrices.front().observables();
            result.curves.push_back(evaluate_curve(config, point, dt, matrices, targets));
        }
        result.selection = optimize_dt(result.curves, config.task.objective, config.task.threshold);
    } catch (const std::exception& e) {
        result.failure = e.what();
    }
    return result;
}

RealMatrix parity_sector_basis(const FockBasis& sector, const std::string& parity) {
    auto split = reflection_parity_split(sector);
    if (parity == "odd") return std::move(split.odd);
    if (parity == "even") return std::move(split.even);
    throw std::invalid_argument("parity must be odd or even");
}

std::size_t parity_sector_dimension(int sites, int total, const std::string& parity) {
    return static_cast<std::size_t>(
        parity_sector_basis(FockBasis::number_sector(sites, total), parity).cols());
}

SpectralRecord spectral_point(const SpectralConfig& config, double j_over_un) {
    SpectralRecord rec;
    rec.sites = config.sites;
    rec.total = config.total.value_or(config.sites);
    rec.parity = config.parity;
    rec.j_over_un = j_over_un;
    rec.j_over_u = j_over_un * rec.total;

    const auto sector = FockBasis::number_sector(rec.sites, rec.total);
    const Topology topology(config.topology, rec.sites);
    const RealMatrix h = build_hamiltonian(sector, topology, homogeneous_couplings(topology, rec.j_over_u));
    const RealMatrix p = parity_sector_basis(sector, config.parity);
    rec.sector_dimension = static_cast<std::size_t>(p.cols());
    rec.fock_dimension = sector.size();

    const auto decomposition = eigendecompose(p.transpose() * h * p);
    const auto& e = decomposition.energies;
    rec.gap_ratio = mean_gap_ratio(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())),
                                   config.inner_fraction);
    const std::size_t count = std::min(config.eigenvectors, rec.sector_dimension);
    rec.information_dimension = mean_information_dimension(decomposition, config.epsilon, count, &p);
    rec.goe_information_dimension = goe_reference_information_dimension(static_cast<double>(rec.sector_dimension));
    return rec;
}

SvdRecord svd_point(const ExperimentConfig& config, const PointSpec& point, double dt,
                    const FeatureSource& features) {
    const auto inputs = task_inputs(config, point);
    const auto split = config.protocol.split(point.j_over_u);
    const auto& source = features ? features : FeatureSource(run_reservoir);
    const FeatureMatrix x = source(make_reservoir_spec(config, point, dt, 0), inputs, split.wash_out);
    const auto train = x.values.middleRows(static_cast<Eigen::Index>(split.wash_out),
                                           static_cast<Eigen::Index>(split.train));
    SvdRecord rec;
    rec.topology = point.topology;
    rec.j_over_u = point.j_over_u;
    rec.dt = dt;
    rec.rows = train.rows();
    rec.cols = train.cols();
    rec.spectrum = singular_value_spectrum(train);
    return rec;
}

CutoffComparison cutoff_check(const ExperimentConfig& config, const PointSpec& point, double dt,
                              const FeatureSource& features) {
    CutoffComparison out;
    out.dt = dt;
    out.cutoffs = config.cutoffs;
    ExperimentConfig single = config;
    single.dynamics.dt = {dt};
    for (int cutoff : config.cutoffs) {
        PointSpec p = point;
        p.cutoff = cutoff;
        const PointResult r = run_point(single, p, features);
        if (!r.failure.empty()) {
            throw NumericalError("cutoff " + std::to_string(cutoff) + ": " + r.failure);
        }
        out.curves.push_back(r.curves.front().points);
    }
    for (std::size_t a = 0; a < out.curves.size(); ++a)
        for (std::size_t b = a + 1; b < out.curves.size(); ++b)
            for (std::size_t i = 0; i < out.curves[a].size(); ++i)
                out.max_abs_difference = std::max(
                    out.max_abs_difference, std::abs(out.curves[a][i].test - out.curves[b][i].test));
    return out;
}

} // namespace bhqrc
