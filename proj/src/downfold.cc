#include "fermirot/downfold.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace fermirot {

namespace {

bool same_spin(OrbitalIndex a, OrbitalIndex b) { return (a & 1) == (b & 1); }

std::uint64_t mask_of(const std::vector<OrbitalIndex>& v) {
    std::uint64_t m = 0;
    for (OrbitalIndex p : v)
        m |= 1ull << p;
    return m;
}

} // namespace

void DownfoldConfig::validate() const {
    if (num_spinorbitals <= 0 || num_spinorbitals > static_cast<int>(max_orbitals))
        throw Error("downfold: num_spinorbitals out of range");
    if (active.empty() || external.empty())
        throw Error("downfold: active and external spinorbital sets must be nonempty");
    if (mask_of(active) & mask_of(external))
        throw Error("downfold: active and external sets overlap");
    for (OrbitalIndex p : active)
        if (p >= static_cast<OrbitalIndex>(num_spinorbitals))
            throw Error("downfold: active index out of range");
    for (OrbitalIndex p : external)
        if (p >= static_cast<OrbitalIndex>(num_spinorbitals))
            throw Error("downfold: external index out of range");
    if (active_determinants.empty())
        throw Error("downfold: active determinant list is empty");
    if (gradient_threshold <= 0.0 || energy_threshold <= 0.0 || optimizer_tol <= 0.0)
        throw Error("downfold: thresholds must be positive");
}

Pool build_pool(const DownfoldConfig& cfg) {
    cfg.validate();
    std::vector<OrbitalIndex> act = cfg.active;
    std::vector<OrbitalIndex> ext = cfg.external;
    std::sort(act.begin(), act.end());
    std::sort(ext.begin(), ext.end());

    Pool pool;
    for (OrbitalIndex i : act) {
        for (OrbitalIndex x : ext) {
            if (same_spin(i, x))
                pool.ops.push_back(OperatorProduct{1ull << x, 1ull << i});
        }
    }
    for (std::size_t a = 0; a < act.size(); ++a) {
        for (std::size_t b = a + 1; b < act.size(); ++b) {
            const int occ_up = (act[a] % 2 == 0) + (act[b] % 2 == 0);
            for (std::size_t c = 0; c < ext.size(); ++c) {
                for (std::size_t d = c + 1; d < ext.size(); ++d) {
                    const int ext_up = (ext[c] % 2 == 0) + (ext[d] % 2 == 0);
                    if (occ_up != ext_up)
                        continue;
                    pool.ops.push_back(OperatorProduct{(1ull << ext[c]) | (1ull << ext[d]),
                                                       (1ull << act[a]) | (1ull << act[b])});
                }
            }
        }
    }
    return pool;
}

namespace {

OperatorSum transform_impl(const OperatorSum& h, const TransformationSequence& seq,
                           double drop_tol, RotationCache* cache) {
    OperatorSum hbar = h;
    for (const auto& [t, theta] : seq)
        hbar = rotate_sum(hbar, {t, RotationKind::anti_hermitian, theta}, drop_tol, cache);
    return hbar;
}

} // namespace

OperatorSum transform_hamiltonian(const OperatorSum& h, const TransformationSequence& seq,
                                  double drop_tol) {
    return transform_impl(h, seq, drop_tol, nullptr);
}

namespace {

// <psi|[hbar, A]|psi> expanded as <phi|A psi> - <A psi|phi> with phi = hbar|psi>,
// valid for Hermitian hbar (A+ = -A).
double gradient_with_phi(const StateVector& phi, const OperatorProduct& t, const StateVector& psi) {
    const Generator g{t, RotationKind::anti_hermitian, 0.0};
    const OperatorSum a = build_generator_sum(g);
    if (a.empty())
        return 0.0;
    const StateVector chi = apply_operator(a, psi, 0.0);
    complex_t overlap = 0.0;
    for (const auto& [bits, c] : chi.amplitudes())
        overlap += std::conj(phi.amplitude(Determinant{bits})) * c;
    return 2.0 * overlap.real();
}

} // namespace

double gradient(const OperatorSum& hbar, const OperatorProduct& t, const StateVector& psi) {
    const StateVector phi = apply_operator(hbar, psi, 0.0);
    return gradient_with_phi(phi, t, psi);
}

std::pair<OperatorProduct, double> select_operator(const OperatorSum& hbar, const Pool& pool,
                                                   const StateVector& psi, int threads) {
    if (pool.ops.empty())
        throw Error("select_operator: empty pool");
    const StateVector phi = apply_operator(hbar, psi, 0.0);
    std::vector<double> grads(pool.ops.size(), 0.0);
    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(pool.ops.size())));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < pool.ops.size(); ++i)
            grads[i] = gradient_with_phi(phi, pool.ops[i], psi);
    } else {
        std::vector<std::thread> workers;
        const std::size_t n = pool.ops.size();
        for (int w = 0; w < nthreads; ++w) {
            workers.emplace_back([&, w]() {
                for (std::size_t i = static_cast<std::size_t>(w); i < n; i += nthreads)
                    grads[i] = gradient_with_phi(phi, pool.ops[i], psi);
            });
        }
        for (auto& th : workers)
            th.join();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < grads.size(); ++i) {
        if (std::abs(grads[i]) > std::abs(grads[best]))
            best = i;
    }
    return {pool.ops[best], grads[best]};
}

namespace {

// E(theta) for one generator is a 5-term trigonometric polynomial: collect the
// class-resolved expectations of [O,A] and [[O,A],A] once, then evaluating the
// energy at any angle is O(1).
struct ThetaObjective {
    double base = 0.0;
    complex_t s1 = 0.0, d1 = 0.0; // class-1 aggregates
    complex_t s4 = 0.0, d4 = 0.0; // class-4 aggregates

    double energy(double theta) const {
        complex_t e = base;
        e += std::sin(theta) * s1 + (1.0 - std::cos(theta)) * d1;
        e += 0.5 * std::sin(2.0 * theta) * s4 + 0.25 * (1.0 - std::cos(2.0 * theta)) * d4;
        return e.real();
    }
    bool constant() const {
        return std::abs(s1) + std::abs(d1) + std::abs(s4) + std::abs(d4) < 1.0e-15;
    }
};

ThetaObjective make_theta_objective(const OperatorSum& hbar, const OperatorProduct& t,
                                    const StateVector& psi, RotationCache& cache) {
    ThetaObjective obj;
    for (const auto& [p, coeff] : hbar.terms()) {
        obj.base += (coeff * expectation(psi, OperatorSum(p), psi)).real();
        const ClassifiedCommutators& cc = cache.get(p, t, RotationKind::anti_hermitian);
        if (cc.cls == RotationClass::trivial)
            continue;
        const complex_t ec = coeff * expectation(psi, cc.c, psi);
        const complex_t ed = coeff * expectation(psi, cc.d, psi);
        if (cc.cls == RotationClass::class1) {
            obj.s1 += ec;
            obj.d1 += ed;
        } else {
            obj.s4 += ec;
            obj.d4 += ed;
        }
    }
    return obj;
}

double minimize_objective(const ThetaObjective& obj, double tol) {
    if (obj.constant())
        return 0.0;
    constexpr int grid_points = 64;
    const double pi = std::numbers::pi;
    double best_theta = 0.0;
    double best_e = obj.energy(0.0);
    for (int i = 0; i < grid_points; ++i) {
        const double theta = -pi + 2.0 * pi * i / grid_points;
        const double e = obj.energy(theta);
        if (e < best_e) {
            best_e = e;
            best_theta = theta;
        }
    }
    // golden-section refinement around the best grid point
    const double step = 2.0 * pi / grid_points;
    double lo = best_theta - step;
    double hi = best_theta + step;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = obj.energy(x1);
    double f2 = obj.energy(x2);
    for (int it = 0; it < 200; ++it) {
        if (std::abs(f1 - f2) < tol && (hi - lo) < 1.0e-8)
            break;
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = obj.energy(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = obj.energy(x2);
        }
    }
    double theta = (f1 < f2) ? x1 : x2;
    double e = std::min(f1, f2);
    // never worse than the untransformed point
    if (obj.energy(0.0) <= e) {
        theta = 0.0;
    }
    if (theta < -pi)
        theta += 2.0 * pi;
    if (theta >= pi)
        theta -= 2.0 * pi;
    return theta;
}

} // namespace

namespace {

TransformationSequence sweep_impl(const OperatorSum& h, TransformationSequence seq,
                                  const DownfoldConfig& cfg, const StateVector& psi,
                                  RotationCache& cache) {
    if (seq.empty())
        throw Error("sweep: empty transformation sequence");
    OperatorSum prefix = h; // Hbar with rotations 1..j-1 applied
    for (std::size_t j = 0; j < seq.size(); ++j) {
        // state carrying the fixed rotations j+1..n: exp(theta_{j+1} A_{j+1}) ... |psi>
        StateVector chi = psi;
        for (std::size_t m = seq.size(); m-- > j + 1;) {
            const Generator g{seq[m].t, RotationKind::anti_hermitian, seq[m].theta};
            chi = apply_operator(exp_generator(g), chi, 0.0);
        }
        seq[j].theta = minimize_objective(make_theta_objective(prefix, seq[j].t, chi, cache),
                                          cfg.optimizer_tol);
        prefix = rotate_sum(prefix, {seq[j].t, RotationKind::anti_hermitian, seq[j].theta},
                            default_drop_tol, &cache);
    }
    return seq;
}

} // namespace

double optimize_theta(const OperatorSum& hbar, const OperatorProduct& t, const StateVector& psi,
                      double tol) {
    RotationCache cache;
    return minimize_objective(make_theta_objective(hbar, t, psi, cache), tol);
}

TransformationSequence sweep(const OperatorSum& h, TransformationSequence seq,
                             const DownfoldConfig& cfg, const StateVector& psi) {
    RotationCache cache;
    return sweep_impl(h, std::move(seq), cfg, psi, cache);
}

std::pair<double, StateVector> subspace_ground_state(const OperatorSum& hbar,
                                                     const std::vector<Determinant>& active_dets) {
    if (active_dets.empty())
        throw Error("subspace_ground_state: empty determinant list");
    return ground_state(hbar, Basis::from_determinants(active_dets));
}

RankMagnitudeMatrix rank_magnitude_matrix(const OperatorSum& hbar) {
    int dim = 1;
    for (const auto& [p, c] : hbar.terms())
        dim = std::max({dim, p.num_creators() + 1, p.num_annihilators() + 1});
    RankMagnitudeMatrix m;
    m.norms.assign(dim, std::vector<double>(dim, 0.0));
    for (const auto& [p, c] : hbar.terms())
        m.norms[p.num_creators()][p.num_annihilators()] += std::norm(c);
    for (auto& row : m.norms) {
        for (double& v : row)
            v = std::sqrt(v);
    }
    return m;
}

DownfoldReport run_adaptive(const OperatorSum& h, const DownfoldConfig& cfg) {
    cfg.validate();
    const Pool pool = build_pool(cfg);
    const std::size_t max_ops = cfg.max_operators == 0 ? pool.ops.size() : cfg.max_operators;

    DownfoldReport report;
    if (cfg.compute_oracle && cfg.num_spinorbitals <= 14) {
        // exact ground energy in the particle sector of the active determinants
        constexpr std::uint64_t up_mask = 0x5555555555555555ull;
        const std::uint64_t d0 = cfg.active_determinants.front().bits;
        const int n_up = std::popcount(d0 & up_mask);
        const int n_down = std::popcount(d0 & ~up_mask);
        for (const Determinant& d : cfg.active_determinants) {
            if (std::popcount(d.bits & up_mask) != n_up || std::popcount(d.bits & ~up_mask) != n_down)
                throw Error("run_adaptive: active determinants span different particle sectors");
        }
        const Basis sector = Basis::particle_sector(cfg.num_spinorbitals, n_up, n_down);
        report.exact_energy = eigensolve_hermitian(build_dense(h, sector)).eigenvalues(0);
    }

    const auto error_vs_oracle = [&](double e) -> std::optional<double> {
        if (report.exact_energy)
            return e - *report.exact_energy;
        return std::nullopt;
    };

    RotationCache cache;
    OperatorSum hbar = h;
    auto [energy, psi] = subspace_ground_state(hbar, cfg.active_determinants);
    report.iterations.push_back({0, std::nullopt, 0.0, 0.0, energy, error_vs_oracle(energy)});

    report.termination = "max_operators";
    for (std::size_t k = 1; k <= max_ops; ++k) {
        const auto [t, grad] = select_operator(hbar, pool, psi, cfg.threads);
        if (std::abs(grad) < cfg.gradient_threshold) {
            report.termination = "gradient";
            break;
        }
        const double theta =
            minimize_objective(make_theta_objective(hbar, t, psi, cache), cfg.optimizer_tol);
        report.sequence.push_back({t, theta});
        hbar = rotate_sum(hbar, {t, RotationKind::anti_hermitian, theta}, default_drop_tol, &cache);

        if (cfg.sweep == SweepMode::one_pass) {
            double e_before = subspace_ground_state(hbar, cfg.active_determinants).first;
            for (;;) {
                report.sequence = sweep_impl(h, std::move(report.sequence), cfg, psi, cache);
                hbar = transform_impl(h, report.sequence, default_drop_tol, &cache);
                if (!cfg.sweep_to_convergence)
                    break;
                const double e_after = subspace_ground_state(hbar, cfg.active_determinants).first;
                if (std::abs(e_after - e_before) < cfg.energy_threshold)
                    break;
                e_before = e_after;
            }
        }

        const double prev_energy = energy;
        std::tie(energy, psi) = subspace_ground_state(hbar, cfg.active_determinants);
        report.iterations.push_back(
            {k, report.sequence.back().t, report.sequence.back().theta, grad, energy,
             error_vs_oracle(energy)});
        if (std::abs(energy - prev_energy) < cfg.energy_threshold) {
            report.termination = "energy";
            break;
        }
    }

    report.hbar = std::move(hbar);
    report.final_energy = energy;
    report.rank_matrix = rank_magnitude_matrix(report.hbar);
    return report;
}

} // namespace fermirot
