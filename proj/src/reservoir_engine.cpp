#include <algorithm>
#include <cmath>
#include <numeric>

#include "bhqrc/reservoir.hpp"

namespace bhqrc {

namespace {

// Lower-triangle packing of a Hermitian block: Re of i >= j, then Im of i > j
// (column-major). Weights double the off-diagonal entries so that
// <pack_weights(Q), pack(S)> = Re Tr[Q S] for Hermitian Q and S.
void pack_hermitian(const ComplexMatrix& s, double* out) {
    const Eigen::Index w = s.rows();
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = j; i < w; ++i) *out++ = s(i, j).real();
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = j + 1; i < w; ++i) *out++ = s(i, j).imag();
}

void pack_weights(const ComplexMatrix& q, double* out) {
    const Eigen::Index w = q.rows();
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = j; i < w; ++i) *out++ = (i == j ? 1.0 : 2.0) * q(i, j).real();
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = j + 1; i < w; ++i) *out++ = 2.0 * q(i, j).imag();
}

constexpr Eigen::Index kFeatureChunk = 128;

} // namespace

struct Reservoir::Impl {
    ReservoirSpec spec;
    FockBasis basis;
    std::vector<int> position_of;
    ObservableSet observables;
    RealMatrix hamiltonian;

    int site_dim = 0;
    Eigen::Index rest_dim = 0;
    int max_rest_total = 0;
    std::vector<Eigen::Index> rest_sorted;     // sorted position -> lexicographic rest index
    std::vector<Eigen::Index> rest_offset;     // per rest total m
    std::vector<Eigen::Index> rest_size;

    // Per full sector k: the contiguous rest window holding the rest sectors
    // reachable from site-0 occupation 1 (sector k-1) and 0 (sector k).
    struct Window {
        int sector = 0;
        Eigen::Index offset = 0;  // into the sorted rest basis
        Eigen::Index occupied = 0; // columns belonging to site-0 occupation 1
        Eigen::Index empty = 0;    // columns belonging to site-0 occupation 0
        Eigen::Index width() const { return occupied + empty; }
    };
    std::vector<Window> windows;

    // Site-0 output occupation n, full sector k: rows of U(dt) in rest sector
    // k-n restricted to the window columns of sector k.
    struct TransferBlock {
        std::size_t window = 0;
        Eigen::Index row_offset = 0;
        ComplexMatrix matrix;
    };
    std::vector<std::vector<TransferBlock>> transfer; // indexed by n

    RealMatrix functionals;          // (V M) x packed window length
    std::vector<Eigen::Index> packed_offset; // per window

    explicit Impl(const ReservoirSpec& s);

    Eigen::Index rest_total(Eigen::Index r) const {
        int total = 0;
        for (int j = 0; j < spec.sites - 1; ++j) {
            total += static_cast<int>(r % site_dim);
            r /= site_dim;
        }
        return total;
    }
};

Reservoir::Impl::Impl(const ReservoirSpec& s)
    : spec(s), basis(FockBasis::product(s.sites, s.cutoff)) {
    if (spec.sites < 2) throw std::invalid_argument("reservoir needs at least 2 sites");
    if (spec.cutoff < 1) throw std::invalid_argument("reservoir cutoff must be >= 1");
    if (spec.virtual_nodes < 1) throw std::invalid_argument("virtual node count must be >= 1");
    if (!(spec.dt >= 0.0)) throw std::invalid_argument("evolution time must be non-negative");
    if (spec.injection_site < 0 || spec.injection_site >= spec.sites) {
        throw std::invalid_argument("injection site out of range");
    }

    // Injection site goes first; the others keep their relative order.
    position_of.assign(static_cast<std::size_t>(spec.sites), 0);
    {
        int next = 1;
        for (int j = 0; j < spec.sites; ++j) {
            position_of[static_cast<std::size_t>(j)] = j == spec.injection_site ? 0 : next++;
        }
    }
    const Topology topology = Topology(spec.topology, spec.sites).relabeled(position_of);
    hamiltonian = build_hamiltonian(basis, topology, spec.couplings);
    observables = default_observables(spec.sites);

    site_dim = spec.cutoff + 1;
    const auto full_dim = static_cast<Eigen::Index>(basis.size());
    rest_dim = full_dim / site_dim;
    max_rest_total = (spec.sites - 1) * spec.cutoff;
    const int max_total = spec.sites * spec.cutoff;

    // Sort the rest basis by total boson number.
    rest_sorted.resize(static_cast<std::size_t>(rest_dim));
    std::iota(rest_sorted.begin(), rest_sorted.end(), Eigen::Index{0});
    std::stable_sort(rest_sorted.begin(), rest_sorted.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return rest_total(a) < rest_total(b); });
    rest_size.assign(static_cast<std::size_t>(max_rest_total + 1), 0);
    for (Eigen::Index r = 0; r < rest_dim; ++r) ++rest_size[static_cast<std::size_t>(rest_total(r))];
    rest_offset.assign(static_cast<std::size_t>(max_rest_total + 1), 0);
    for (int m = 1; m <= max_rest_total; ++m) {
        rest_offset[static_cast<std::size_t>(m)] =
            rest_offset[static_cast<std::size_t>(m - 1)] + rest_size[static_cast<std::size_t>(m - 1)];
    }
    auto rest_valid = [&](int m) { return m >= 0 && m <= max_rest_total; };

    // Full-sector local bases ordered by site-0 occupation a, then sorted rest.
    std::vector<Eigen::Index> full_sector(static_cast<std::size_t>(full_dim));
    for (Eigen::Index f = 0; f < full_dim; ++f) {
        full_sector[static_cast<std::size_t>(f)] = f / rest_dim + rest_total(f % rest_dim);
    }
    for (Eigen::Index f = 0; f < full_dim; ++f) {
        for (Eigen::Index g = 0; g < full_dim; ++g) {
            if (hamiltonian(f, g) != 0.0 &&
                full_sector[static_cast<std::size_t>(f)] != full_sector[static_cast<std::size_t>(g)]) {
                throw NumericalError("Hamiltonian does not conserve the total boson number");
            }
        }
    }
    const int v_count = spec.virtual_nodes;
    const auto m_count = static_cast<Eigen::Index>(observables.size());
    transfer.assign(static_cast<std::size_t>(site_dim), {});

    struct SectorData {
        std::vector<Eigen::Index> members;   // full indices in local order
        std::vector<Eigen::Index> a_offset;  // local offset of site-0 occupation a
        RealVector energies;
        RealMatrix vectors;
    };

    // First pass: windows and packed layout.
    std::vector<SectorData> sectors(static_cast<std::size_t>(max_total + 1));
    Eigen::Index packed_total = 0;
    for (int k = 0; k <= max_total; ++k) {
        SectorData& sd = sectors[static_cast<std::size_t>(k)];
        sd.a_offset.assign(static_cast<std::size_t>(site_dim) + 1, 0);
        for (int a = 0; a < site_dim; ++a) {
            sd.a_offset[static_cast<std::size_t>(a)] = static_cast<Eigen::Index>(sd.members.size());
            const int m = k - a;
            if (!rest_valid(m)) continue;
            for (Eigen::Index q = 0; q < rest_size[static_cast<std::size_t>(m)]; ++q) {
                const Eigen::Index r = rest_sorted[static_cast<std::size_t>(rest_offset[static_cast<std::size_t>(m)] + q)];
                sd.members.push_back(a * rest_dim + r);
            }
        }
        sd.a_offset[static_cast<std::size_t>(site_dim)] = static_cast<Eigen::Index>(sd.members.size());

        Window w;
        w.sector = k;
        w.occupied = rest_valid(k - 1) ? rest_size[static_cast<std::size_t>(k - 1)] : 0;
        w.empty = rest_valid(k) ? rest_size[static_cast<std::size_t>(k)] : 0;
        if (w.width() == 0) continue;
        w.offset = rest_valid(k - 1) ? rest_offset[static_cast<std::size_t>(k - 1)]
                                     : rest_offset[static_cast<std::size_t>(k)];
        windows.push_back(w);
        packed_offset.push_back(packed_total);
        packed_total += w.width() * w.width();
    }
    functionals = RealMatrix::Zero(v_count * m_count, packed_total);

    std::vector<Eigen::Index> local_of_full(static_cast<std::size_t>(full_dim), -1);

    // Second pass: diagonalize each sector, build transfer blocks and functionals.
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const Window& w = windows[wi];
        SectorData& sd = sectors[static_cast<std::size_t>(w.sector)];
        const auto d = static_cast<Eigen::Index>(sd.members.size());
        RealMatrix hk(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                hk(i, j) = hamiltonian(sd.members[static_cast<std::size_t>(i)], sd.members[static_cast<std::size_t>(j)]);
        Eigen::SelfAdjointEigenSolver<RealMatrix> solver(hk);
        if (solver.info() != Eigen::Success) throw NumericalError("sector eigensolver failed");
        sd.energies = solver.eigenvalues();
        sd.vectors = solver.eigenvectors();

        // Local rows of the window columns, ordered occupation 1 then 0.
        std::vector<Eigen::Index> window_rows;
        for (Eigen::Index q = 0; q < w.occupied; ++q) window_rows.push_back(sd.a_offset[1] + q);
        for (Eigen::Index q = 0; q < w.empty; ++q) window_rows.push_back(sd.a_offset[0] + q);
        RealMatrix p(d, w.width()); // Ψᵀ restricted to window columns
        for (Eigen::Index c = 0; c < w.width(); ++c)
            p.col(c) = sd.vectors.row(window_rows[static_cast<std::size_t>(c)]).transpose();

        auto phased = [&](double t) {
            const ComplexVector phase =
                (sd.energies.cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
            return ComplexMatrix(phase.asDiagonal() * p.cast<Complex>());
        };

        // U(dt) restricted to window columns: Ψ e^{-iE dt} Ψᵀ[:, window].
        const ComplexMatrix u_cols = sd.vectors.cast<Complex>() * phased(spec.dt);
        for (int n = 0; n < site_dim; ++n) {
            const int m = w.sector - n;
            if (!rest_valid(m)) continue;
            const Eigen::Index rows = sd.a_offset[static_cast<std::size_t>(n) + 1] -
                                      sd.a_offset[static_cast<std::size_t>(n)];
            if (rows == 0) continue;
            transfer[static_cast<std::size_t>(n)].push_back(
                {wi, rest_offset[static_cast<std::size_t>(m)],
                 u_cols.middleRows(sd.a_offset[static_cast<std::size_t>(n)], rows)});
        }

        // Observables in the sector eigenbasis, then one functional per node.
        std::vector<RealMatrix> eigen_observables;
        eigen_observables.reserve(observables.size());
        for (Eigen::Index i = 0; i < d; ++i) local_of_full[static_cast<std::size_t>(sd.members[static_cast<std::size_t>(i)])] = i;
        for (const auto& o : observables) {
            RealMatrix ok = RealMatrix::Zero(d, d);
            for (Eigen::Index col = 0; col < d; ++col) {
                const Occupation& state = basis.state(static_cast<std::size_t>(sd.members[static_cast<std::size_t>(col)]));
                for (const auto& [target, amplitude] :
                     apply_observable(o, state, spec.cutoff, position_of)) {
                    const Eigen::Index row = local_of_full[static_cast<std::size_t>(*basis.index_of(target))];
                    if (row < 0) throw std::logic_error("observable leaves its number sector");
                    ok(row, col) += amplitude;
                }
            }
            eigen_observables.push_back(sd.vectors.transpose() * ok * sd.vectors);
        }
        for (Eigen::Index i = 0; i < d; ++i) local_of_full[static_cast<std::size_t>(sd.members[static_cast<std::size_t>(i)])] = -1;
        std::vector<double> packed(static_cast<std::size_t>(w.width() * w.width()));
        for (int v = 1; v <= v_count; ++v) {
            const double t = spec.dt * v / v_count;
            const ComplexMatrix x = phased(t);
            const ComplexMatrix x_adj = x.adjoint();
            for (Eigen::Index i = 0; i < m_count; ++i) {
                const RealMatrix& ot = eigen_observables[static_cast<std::size_t>(i)];
                ComplexMatrix y(d, w.width());
                y.real().noalias() = ot * x.real();
                y.imag().noalias() = ot * x.imag();
                const ComplexMatrix q = x_adj * y;
                pack_weights(q, packed.data());
                functionals.row((v - 1) * m_count + i).segment(packed_offset[wi], w.width() * w.width()) =
                    Eigen::Map<const RealVector>(packed.data(), w.width() * w.width()).transpose();
            }
        }
    }
}

Reservoir::Reservoir(const ReservoirSpec& spec) : impl_(std::make_unique<Impl>(spec)) {}
Reservoir::~Reservoir() = default;
Reservoir::Reservoir(Reservoir&&) noexcept = default;
Reservoir& Reservoir::operator=(Reservoir&&) noexcept = default;

const ReservoirSpec& Reservoir::spec() const noexcept { return impl_->spec; }
const ObservableSet& Reservoir::observables() const noexcept { return impl_->observables; }
const FockBasis& Reservoir::basis() const noexcept { return impl_->basis; }
const std::vector<int>& Reservoir::position_of() const noexcept { return impl_->position_of; }
const RealMatrix& Reservoir::hamiltonian() const noexcept { return impl_->hamiltonian; }

FeatureMatrix Reservoir::run(std::span<const double> inputs, std::size_t wash_out,
                             const ReservoirState* initial) const {
    const Impl& im = *impl_;
    const auto steps = static_cast<Eigen::Index>(inputs.size());
    const auto vm = im.functionals.rows();
    const Eigen::Index dr = im.rest_dim;

    FeatureMatrix out;
    out.values.resize(steps, vm + 1);
    out.values.col(vm).setOnes();
    out.wash_out = wash_out;
    out.virtual_nodes = im.spec.virtual_nodes;
    out.columns = feature_column_names(im.observables, im.spec.virtual_nodes);

    ComplexMatrix sigma = ComplexMatrix::Zero(dr, dr);
    if (initial) {
        if (initial->dimension() != static_cast<Eigen::Index>(im.basis.size()) ||
            initial->site_dim() != im.site_dim) {
            throw std::invalid_argument("initial state does not match the reservoir basis");
        }
        const ComplexMatrix reduced = partial_trace_first_site(initial->rho(), im.site_dim);
        for (Eigen::Index p = 0; p < dr; ++p)
            for (Eigen::Index q = 0; q < dr; ++q)
                sigma(p, q) = reduced(im.rest_sorted[static_cast<std::size_t>(p)],
                                      im.rest_sorted[static_cast<std::size_t>(q)]);
    } else {
        sigma(0, 0) = 1.0; // vacuum; the all-empty rest state sorts first
    }

    RealMatrix packed(im.functionals.cols(), kFeatureChunk);
    Eigen::Index chunk_start = 0;
    ComplexMatrix scaled;
    ComplexMatrix window_state;
    ComplexMatrix next(dr, dr);
    ComplexMatrix partial(dr, dr);

    for (Eigen::Index step = 0; step < steps; ++step) {
        const double s = inputs[static_cast<std::size_t>(step)];
        if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("input must lie in [0, 1]");
        const double psi0 = std::sqrt(s);
        const double psi1 = std::sqrt(1.0 - s);

        // Features of this step are linear in D sigma D on each window.
        const Eigen::Index slot = step - chunk_start;
        for (std::size_t wi = 0; wi < im.windows.size(); ++wi) {
            const auto& w = im.windows[wi];
            window_state = sigma.block(w.offset, w.offset, w.width(), w.width());
            window_state.topRows(w.occupied) *= psi1;
            window_state.bottomRows(w.empty) *= psi0;
            window_state.leftCols(w.occupied) *= psi1;
            window_state.rightCols(w.empty) *= psi0;
            pack_hermitian(window_state, packed.col(slot).data() + im.packed_offset[wi]);
        }
        if (slot + 1 == kFeatureChunk || step + 1 == steps) {
            out.values.block(chunk_start, 0, slot + 1, vm).noalias() =
                (im.functionals * packed.leftCols(slot + 1)).transpose();
            chunk_start = step + 1;
        }

        // sigma <- Σ_n W_n sigma W_n†, W_n = Σ_a psi_a <n|U|a>.
        next.setZero();
        for (const auto& blocks : im.transfer) {
            if (blocks.empty()) continue;
            partial.setZero();
            for (const auto& b : blocks) {
                const auto& w = im.windows[b.window];
                scaled = b.matrix;
                scaled.leftCols(w.occupied) *= psi1;
                scaled.rightCols(w.empty) *= psi0;
                partial.middleRows(b.row_offset, scaled.rows()).noalias() +=
                    scaled * sigma.middleRows(w.offset, w.width());
            }
            for (const auto& b : blocks) {
                const auto& w = im.windows[b.window];
                scaled = b.matrix;
                scaled.leftCols(w.occupied) *= psi1;
                scaled.rightCols(w.empty) *= psi0;
                next.middleCols(b.row_offset, scaled.rows()).noalias() +=
                    partial.middleCols(w.offset, w.width()) * scaled.adjoint();
            }
        }
        sigma = 0.5 * (next + next.adjoint());

        const double trace_error = std::abs(sigma.trace() - Complex(1.0));
        if (trace_error > 1e-10) {
            throw NumericalError("reduced state trace drifted by " + std::to_string(trace_error) +
                                 " at step " + std::to_string(step));
        }
        const int interval = im.spec.positivity_check_interval;
        if (interval > 0 && (step + 1) % interval == 0) {
            ReservoirState check(sigma, 1);
            check.enforce_physical();
            sigma = check.rho();
        }
    }
    return out;
}

} // namespace bhqrc
