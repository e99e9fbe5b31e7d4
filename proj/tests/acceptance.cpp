// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Criteria can be selected by number, e.g. `bhqrc_acceptance 1 2 11`.
// Exit status is the number of failed criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bhqrc/config.hpp"
#include "bhqrc/harness.hpp"
#include "bhqrc/learning.hpp"
#include "bhqrc/reservoir.hpp"
#include "bhqrc/spectral.hpp"
#include "bhqrc/tasks.hpp"

using namespace bhqrc;

namespace {

constexpr double kMott = 1e-3;
constexpr double kChaotic = 0.1;
constexpr double kSuperfluid = 1e3;

using Clock = std::chrono::steady_clock;
const Clock::time_point kStart = Clock::now();

void log(const std::string& message) {
    const double t = std::chrono::duration<double>(Clock::now() - kStart).count();
    std::fprintf(stderr, "[%7.1fs] %s\n", t, message.c_str());
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream o;
    o.precision(precision);
    o << v;
    return o.str();
}

std::string list(const std::vector<double>& v, int precision = 3) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i], precision);
    return s + ")";
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

// Reservoir runs are the only expensive step; every criterion shares them.
class FeatureCache {
public:
    FeatureMatrix operator()(const ReservoirSpec& spec, std::span<const double> inputs, std::size_t wash_out) {
        std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(inputs.data()),
                                                 inputs.size() * sizeof(double)));
        std::ostringstream key;
        key.precision(17);
        key << to_string(spec.topology) << '|' << spec.sites << '|' << spec.cutoff << '|' << spec.dt << '|'
            << spec.virtual_nodes << '|' << spec.injection_site << '|' << wash_out << '|' << h;
        for (double j : spec.couplings.tunneling) key << '|' << j;
        auto it = cache_.find(key.str());
        if (it != cache_.end()) return it->second;
        const auto t0 = Clock::now();
        FeatureMatrix f = Reservoir(spec).run(inputs, wash_out);
        log("  reservoir " + std::string(to_string(spec.topology)) + " J/U=" + fmt(spec.couplings.tunneling.front()) +
            " dt=" + fmt(spec.dt) + " nc=" + std::to_string(spec.cutoff) + " L=" + std::to_string(inputs.size()) +
            " in " + fmt(std::chrono::duration<double>(Clock::now() - t0).count(), 3) + "s");
        return cache_.emplace(key.str(), std::move(f)).first->second;
    }

private:
    std::map<std::string, FeatureMatrix> cache_;
};

FeatureCache g_cache;
FeatureSource g_source = [](const ReservoirSpec& s, std::span<const double> in, std::size_t w) {
    return g_cache(s, in, w);
};

// Default protocol: N=5, n_c=3, V=10, beta=1e-2, 1000/1000, dt in 1..10.
ExperimentConfig base_config(TaskKind kind) {
    ExperimentConfig c = parse_config(nlohmann::json::object());
    c.task.kind = kind;
    if (kind == TaskKind::Narma) c.task.objective = DtObjective::PerIndex;
    return c;
}

PointSpec point_at(double j, TopologyKind topology = TopologyKind::OpenChain) {
    PointSpec p;
    p.j_over_u = j;
    p.topology = topology;
    return p;
}

// Memoized sweeps over the full dt grid.
std::map<std::pair<int, double>, PointResult> g_points;

const PointResult& task_point(TaskKind kind, double j) {
    const auto key = std::pair{static_cast<int>(kind), j};
    auto it = g_points.find(key);
    if (it != g_points.end()) return it->second;
    log(std::string(to_string(kind)) + " at J/U=" + fmt(j) + " over the dt grid");
    PointResult r = run_point(base_config(kind), point_at(j), g_source);
    if (!r.failure.empty()) throw std::runtime_error("point failed: " + r.failure);
    return g_points.emplace(key, std::move(r)).first->second;
}

std::vector<double> tests(const std::vector<CurvePoint>& curve) {
    std::vector<double> v;
    for (const auto& p : curve) v.push_back(p.test);
    return v;
}

const Curve& curve_at(const PointResult& r, double dt) {
    for (const auto& c : r.curves)
        if (c.dt == dt) return c;
    throw std::logic_error("dt not on the grid");
}

// 1 -------------------------------------------------------------------------
Verdict sector_dimensions() {
    const std::size_t d5 = parity_sector_dimension(5, 5, "odd");
    const std::size_t d6 = parity_sector_dimension(6, 6, "odd");
    const std::size_t d7 = parity_sector_dimension(7, 7, "odd");
    return {d5 == 60 && d6 == 226 && d7 == 848,
            "odd sector dims N=5,6,7: " + std::to_string(d5) + ", " + std::to_string(d6) + ", " +
                std::to_string(d7) + " (want 60, 226, 848)"};
}

// 2 -------------------------------------------------------------------------
Verdict rmt_calibration() {
    std::mt19937_64 rng(derive_seed(2024, "goe"));
    std::normal_distribution<double> g;
    RealMatrix a(500, 500);
    for (Eigen::Index i = 0; i < 500; ++i)
        for (Eigen::Index j = 0; j < 500; ++j) a(i, j) = g(rng);
    const RealMatrix goe = (a + a.transpose()) / 2.0;
    const RealVector e = eigendecompose(goe).energies;
    const double r_goe =
        mean_gap_ratio(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), 0.7).mean;

    std::exponential_distribution<double> spacing(1.0);
    std::vector<double> levels{0.0};
    for (int i = 1; i < 10000; ++i) levels.push_back(levels.back() + spacing(rng));
    const double r_poisson = mean_gap_ratio(levels, 1.0).mean;
    const bool ok = std::abs(r_goe - kGoeMeanGapRatio) <= 0.01 && std::abs(r_poisson - kPoissonMeanGapRatio) <= 0.01;
    return {ok, "GOE <r> = " + fmt(r_goe) + " (0.5359 +- 0.01), Poisson <r> = " + fmt(r_poisson) +
                    " (0.3863 +- 0.01)"};
}

// 3 -------------------------------------------------------------------------
Verdict chaos_plateau() {
    SpectralConfig s;
    s.sites = 5;
    s.parity = "odd";
    const auto rec = spectral_point(s, 0.3);
    const double d1_ref = goe_reference_information_dimension(60);
    const bool ok = std::abs(rec.gap_ratio.mean - kGoeMeanGapRatio) <= 0.03 &&
                    std::abs(rec.information_dimension - d1_ref) <= 0.05;
    return {ok, "J/UN=0.3: <r> = " + fmt(rec.gap_ratio.mean) + " (0.5359 +- 0.03), <D1> = " +
                    fmt(rec.information_dimension) + " (" + fmt(d1_ref) + " +- 0.05), " +
                    std::to_string(rec.gap_ratio.ratios) + " ratios"};
}

// 4 -------------------------------------------------------------------------
Verdict mott_collapse() {
    const auto& r = task_point(TaskKind::ShortTermMemory, kMott);
    const auto c = tests(r.selection.curve);
    bool ok = c[0] >= 0.99;
    for (int tau = 1; tau <= 3; ++tau) ok = ok && c[static_cast<std::size_t>(tau)] <= 0.05;
    return {ok, "Mott dt=" + fmt(*r.selection.best_dt) + ": C(0) = " + fmt(c[0], 6) + " (>= 0.99), C(1..3) = " +
                    list({c[1], c[2], c[3]}) + " (<= 0.05)"};
}

// 5 -------------------------------------------------------------------------
Verdict stm_ordering() {
    const auto& mott = task_point(TaskKind::ShortTermMemory, kMott);
    const auto& chaotic = task_point(TaskKind::ShortTermMemory, kChaotic);
    const auto& superfluid = task_point(TaskKind::ShortTermMemory, kSuperfluid);
    const int m = mott.selection.summary.value;
    const int c = chaotic.selection.summary.value;
    const int s = superfluid.selection.summary.value;
    const bool ok = c >= s && s >= m && std::abs(c - 9) <= 2 && std::abs(s - 6) <= 2;
    return {ok, "max delay (C >= 0.8): chaotic " + std::to_string(c) + " @dt=" + fmt(*chaotic.selection.best_dt) +
                    " (9 +- 2), superfluid " + std::to_string(s) + " @dt=" + fmt(*superfluid.selection.best_dt) +
                    " (6 +- 2), Mott " + std::to_string(m) + " @dt=" + fmt(*mott.selection.best_dt)};
}

// 6 -------------------------------------------------------------------------
Verdict parity_reversal() {
    const auto& chaotic = task_point(TaskKind::ParityCheck, kChaotic);
    const auto& superfluid = task_point(TaskKind::ParityCheck, kSuperfluid);
    const int c = chaotic.selection.summary.value;
    const int s = superfluid.selection.summary.value;
    return {s >= c, "PC max delay (C >= 0.8): superfluid " + std::to_string(s) + " @dt=" +
                        fmt(*superfluid.selection.best_dt) + " >= chaotic " + std::to_string(c) + " @dt=" +
                        fmt(*chaotic.selection.best_dt) + "; curves " + list(tests(superfluid.selection.curve), 2) +
                        " vs " + list(tests(chaotic.selection.curve), 2)};
}

// 7 -------------------------------------------------------------------------
Verdict narma_peak() {
    const auto& chaotic = task_point(TaskKind::Narma, kChaotic);
    const auto& mott = task_point(TaskKind::Narma, kMott);
    double c5 = -1.0;
    for (const auto& p : chaotic.selection.curve)
        if (p.index == 5) c5 = p.test;
    double mott_best = 0.0;
    int mott_order = 0;
    for (const auto& p : mott.selection.curve) {
        if (p.test > mott_best) {
            mott_best = p.test;
            mott_order = p.index;
        }
    }
    return {c5 >= 0.9 && mott_best < 0.7,
            "chaotic NARMA(5) C = " + fmt(c5) + " (>= 0.9); Mott best C = " + fmt(mott_best) + " at n=" +
                std::to_string(mott_order) + " (< 0.7); chaotic curve n=2..14 " + list(tests(chaotic.selection.curve), 3)};
}

// 8 -------------------------------------------------------------------------
Verdict noise_convergence() {
    bool ok = true;
    std::string detail;
    for (double j : {kChaotic, kSuperfluid}) {
        const auto& ideal = task_point(TaskKind::ShortTermMemory, j);
        const double dt = *ideal.selection.best_dt;
        auto config = base_config(TaskKind::ShortTermMemory);
        config.noise.realizations = 10;
        const auto inputs = task_inputs(config, point_at(j));
        const auto targets = task_targets(config.task, inputs);
        const auto split = config.protocol.split(j);
        const std::vector<FeatureMatrix> draws{g_source(make_reservoir_spec(config, point_at(j), dt, 0), inputs,
                                                        split.wash_out)};
        std::vector<Curve> noisy;
        for (double nm : {1e2, 1e4, 1e6}) {
            PointSpec p = point_at(j);
            p.measurements = nm;
            noisy.push_back(evaluate_curve(config, p, dt, draws, targets));
        }
        const auto clean = curve_at(ideal, dt).points;
        double worst_gap = 0.0;
        for (std::size_t t = 0; t <= 6; ++t) worst_gap = std::max(worst_gap, std::abs(noisy[2].points[t].test - clean[t].test));
        int violations = 0;
        for (std::size_t t = 0; t < clean.size(); ++t) {
            for (std::size_t k = 0; k + 1 < noisy.size(); ++k) {
                const auto& lo = noisy[k].points[t];
                const auto& hi = noisy[k + 1].points[t];
                if (hi.test < lo.test - std::max(lo.test_stderr, hi.test_stderr)) ++violations;
            }
        }
        ok = ok && worst_gap <= 0.05 && violations == 0;
        detail += (detail.empty() ? "" : "; ") + std::string("J/U=") + fmt(j) + " dt=" + fmt(dt) +
                  ": max |C(1e6)-C_ideal| (tau<=6) = " + fmt(worst_gap, 3) + " (<= 0.05), monotonicity violations " +
                  std::to_string(violations) + ", C(tau=2) at Nm=1e2,1e4,1e6 " +
                  list({noisy[0].points[2].test, noisy[1].points[2].test, noisy[2].points[2].test});
    }
    return {ok, detail};
}

// 9 -------------------------------------------------------------------------
Verdict cutoff_robustness() {
    const auto& ideal = task_point(TaskKind::ShortTermMemory, kChaotic);
    const double dt = *ideal.selection.best_dt;
    auto config = base_config(TaskKind::ShortTermMemory);
    config.cutoffs = {3, 4};
    const auto cmp = cutoff_check(config, point_at(kChaotic), dt, g_source);
    return {cmp.max_abs_difference <= 0.05,
            "J/U=0.1 dt=" + fmt(dt) + ": max |C(nc=3) - C(nc=4)| = " + fmt(cmp.max_abs_difference, 3) +
                " (<= 0.05); nc=4 curve " + list(tests(cmp.curves[1]), 3)};
}

// 10 ------------------------------------------------------------------------
Verdict svd_ordering() {
    const auto& ideal = task_point(TaskKind::ShortTermMemory, kChaotic);
    const double dt = *ideal.selection.best_dt;
    const auto config = base_config(TaskKind::ShortTermMemory);
    std::map<TopologyKind, std::size_t> redundant;
    for (auto t : {TopologyKind::OpenChain, TopologyKind::PeriodicChain, TopologyKind::AllToAll}) {
        redundant[t] = svd_point(config, point_at(kChaotic, t), dt, g_source).spectrum.redundant;
    }
    const auto o = redundant[TopologyKind::OpenChain];
    const auto p = redundant[TopologyKind::PeriodicChain];
    const auto a = redundant[TopologyKind::AllToAll];
    return {a > p && p >= o, "J/U=0.1 dt=" + fmt(dt) + ", values below 1e-10 of largest (of 301): all-to-all " +
                                 std::to_string(a) + " > periodic " + std::to_string(p) + " >= open " +
                                 std::to_string(o)};
}

// 11 ------------------------------------------------------------------------
ComplexMatrix random_density_matrix(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

Verdict invariant_suite() {
    std::vector<std::string> failed;
    std::string detail;
    const auto require = [&](bool ok, const std::string& name, const std::string& info) {
        if (!ok) failed.push_back(name);
        detail += (detail.empty() ? "" : "; ") + name + " " + info;
    };

    // CPTP contract on the full density matrix, every step and every virtual node.
    {
        double worst_trace = 0.0, worst_herm = 0.0, min_eig = 1.0;
        for (auto [sites, cutoff] : {std::pair{3, 2}, std::pair{4, 2}}) {
            const auto basis = FockBasis::product(sites, cutoff);
            const Topology topology(TopologyKind::OpenChain, sites);
            const Propagator u(build_hamiltonian(basis, topology, homogeneous_couplings(topology, kChaotic)), 3.0, 10);
            ReservoirState state(random_density_matrix(static_cast<Eigen::Index>(basis.size()), 1), cutoff + 1);
            const auto inputs = generate_inputs(InputDistribution::Uniform01, 300, 3);
            for (double s : inputs) {
                auto step = inject_and_evolve(state, s, u);
                for (const auto& node : step.nodes) {
                    const auto& rho = node.rho();
                    worst_trace = std::max(worst_trace, std::abs(rho.trace() - Complex(1.0)));
                    worst_herm = std::max(worst_herm, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
                    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(rho).eigenvalues().minCoeff());
                }
                state = std::move(step.state);
            }
        }
        // The production engine re-checks positivity itself; interval 1 checks every step.
        auto config = base_config(TaskKind::ShortTermMemory);
        auto spec = make_reservoir_spec(config, point_at(kChaotic), 10.0, 0);
        spec.positivity_check_interval = 1;
        bool engine_ok = true;
        try {
            Reservoir(spec).run(generate_inputs(InputDistribution::Uniform01, 300, 4), 0);
        } catch (const NumericalError&) {
            engine_ok = false;
        }
        require(worst_trace < 1e-10 && worst_herm < 1e-10 && min_eig >= -1e-9 && engine_ok, "CPTP",
                "(|tr-1| " + fmt(worst_trace, 2) + ", herm " + fmt(worst_herm, 2) + ", min eig " + fmt(min_eig, 2) +
                    ", N=5 engine " + (engine_ok ? "ok" : "violated") + ")");
    }

    // Propagator unitarity and virtual-node consistency at the production size.
    {
        const auto basis = FockBasis::product(5, 3);
        const Topology topology(TopologyKind::OpenChain, 5);
        const Propagator u(build_hamiltonian(basis, topology, homogeneous_couplings(topology, kChaotic)), 10.0, 10);
        const auto n = u.dimension();
        const double unitarity = (u.step().adjoint() * u.step() - ComplexMatrix::Identity(n, n)).norm();
        ComplexMatrix composed = ComplexMatrix::Identity(n, n);
        for (int v = 0; v < 10; ++v) composed = u.step() * composed;
        const double consistency = (composed - u.evolution(10.0)).cwiseAbs().maxCoeff();
        require(unitarity < 1e-10 && consistency < 1e-8, "unitarity",
                "(|U'U-I| " + fmt(unitarity, 2) + ", |U^V - U(dt)| " + fmt(consistency, 2) + ")");
    }

    // Echo state: two initial states, one drive, chaotic regime at the STM dt.
    {
        const double dt = *task_point(TaskKind::ShortTermMemory, kChaotic).selection.best_dt;
        auto config = base_config(TaskKind::ShortTermMemory);
        const auto spec = make_reservoir_spec(config, point_at(kChaotic), dt, 0);
        const Reservoir reservoir(spec);
        const auto inputs = generate_inputs(InputDistribution::Uniform01, 800, 5);
        const auto a = reservoir.run(inputs, 100);
        const ReservoirState mixed(random_density_matrix(1024, 7), 4);
        const auto b = reservoir.run(inputs, 100, &mixed);
        const RealVector diff = (a.values - b.values).cwiseAbs().rowwise().maxCoeff();
        const double after = diff.tail(diff.size() - 100).maxCoeff();
        Eigen::Index settle = 0;
        for (Eigen::Index k = diff.size() - 1; k >= 0; --k) {
            if (diff(k) >= 1e-6) {
                settle = k + 1;
                break;
            }
        }
        std::string decay;
        for (Eigen::Index k : {Eigen::Index{0}, Eigen::Index{100}, Eigen::Index{200}, Eigen::Index{400},
                               diff.size() - 1})
            decay += (decay.empty() ? "" : " ") + std::to_string(k) + ":" + fmt(diff(k), 3);
        const std::string settled = settle < diff.size()
                                        ? "below 1e-6 from step " + std::to_string(settle)
                                        : "not below 1e-6 within " + std::to_string(diff.size()) + " steps";
        require(after < 1e-6, "echo-state",
                "(dt=" + fmt(dt) + ": max row diff after step 100 = " + fmt(after, 3) + ", by step " + decay +
                    ", " + settled + ")");
    }

    // Capacity affine invariance, parity recursion and NARMA boundedness.
    {
        const auto x = generate_inputs(InputDistribution::Uniform01, 5000, 8);
        const auto noise = generate_inputs(InputDistribution::Uniform01, 5000, 9);
        std::vector<double> y(x.size()), z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = x[i] + noise[i];
            z[i] = -7.0 * y[i] + 3.0;
        }
        const double delta = std::abs(capacity(z, x).value - capacity(y, x).value);
        require(delta < 1e-12, "affine", "(|dC| " + fmt(delta, 2) + ")");

        const auto s = generate_inputs(InputDistribution::Binary01, 2000, 10);
        int mismatches = 0;
        auto prev = parity_check_targets(s, 0);
        for (int tau = 1; tau <= 15; ++tau) {
            const auto cur = parity_check_targets(s, tau);
            for (std::size_t k = static_cast<std::size_t>(tau); k < s.size(); ++k) {
                mismatches += cur.values[k] != std::fmod(prev.values[k] + s[k - static_cast<std::size_t>(tau)], 2.0);
            }
            prev = cur;
        }
        require(mismatches == 0, "parity-recursion", "(" + std::to_string(mismatches) + " mismatches)");

        const auto u = generate_inputs(InputDistribution::UniformTo02, 10000, 11);
        double lo = 1.0, hi = 0.0;
        for (int n = 2; n <= 20; ++n) {
            const auto t = narma_targets(u, n);
            lo = std::min(lo, *std::min_element(t.values.begin(), t.values.end()));
            hi = std::max(hi, *std::max_element(t.values.begin(), t.values.end()));
        }
        require(lo > 0.0 && hi < 1.0, "NARMA-bounded", "(range [" + fmt(lo) + ", " + fmt(hi) + "])");
    }

    std::string head = failed.empty() ? "all hold" : "failed:";
    for (const auto& f : failed) head += " " + f;
    return {failed.empty(), head + " | " + detail};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"sector dimensions", sector_dimensions},
        {"RMT calibration", rmt_calibration},
        {"chaos plateau", chaos_plateau},
        {"Mott memory collapse", mott_collapse},
        {"STM regime ordering", stm_ordering},
        {"parity-check regime reversal", parity_reversal},
        {"NARMA chaotic peak", narma_peak},
        {"noise convergence", noise_convergence},
        {"cutoff robustness", cutoff_robustness},
        {"SVD redundancy ordering", svd_ordering},
        {"invariant suite", invariant_suite},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        log("criterion " + std::to_string(number) + ": " + criteria[i].first);
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("criterion %2d %-30s %s  %s\n", number, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return std::min(failures, 100);
}
