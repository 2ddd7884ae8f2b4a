#include "fermirot/dynamics.h"

#include <algorithm>
#include <cmath>

namespace fermirot {

namespace {
constexpr double herm_tol = 1.0e-12;
}

std::vector<HamiltonianTerm> split_hamiltonian(const OperatorSum& h) {
    std::vector<HamiltonianTerm> pairs;
    std::vector<HamiltonianTerm> numbers;
    for (const auto& [p, c] : h.terms()) {
        if (std::abs(c.imag()) > herm_tol)
            throw Error("split_hamiltonian: coefficient of " + p.str() + " is not real");
        if (p.is_number_product()) {
            numbers.push_back({p, c.real(), true});
            continue;
        }
        const OperatorProduct pd = p.adjoint();
        const complex_t cd = h.coefficient(pd);
        if (std::abs(cd - std::conj(c)) > herm_tol)
            throw Error("split_hamiltonian: " + p.str() + " has no matching adjoint term");
        if (pd < p)
            continue; // partner already emitted
        pairs.push_back({p, c.real(), false});
    }
    pairs.insert(pairs.end(), numbers.begin(), numbers.end());
    return pairs;
}

OperatorSum reassemble_terms(const std::vector<HamiltonianTerm>& terms) {
    TermAccumulator acc;
    for (const auto& term : terms) {
        acc.add(term.t, term.coeff);
        if (!term.self_adjoint)
            acc.add(term.t.adjoint(), term.coeff);
    }
    return acc.build(0.0);
}

TrotterSchedule build_schedule(const std::vector<HamiltonianTerm>& terms, double dt) {
    if (dt <= 0.0)
        throw Error("build_schedule: dt must be positive");
    TrotterSchedule schedule;
    schedule.dt = dt;
    std::vector<TrotterScheduleEntry> half;
    half.reserve(terms.size());
    for (const auto& term : terms) {
        // conjugation by exp(-i H_l dt/2) is e^{+i theta H} (.) e^{-i theta H}
        // with H = T + T+; self-adjoint products have H = 2T, halving theta
        const double theta = term.self_adjoint ? term.coeff * dt / 4.0 : term.coeff * dt / 2.0;
        half.push_back({term.t, theta});
    }
    schedule.substeps.assign(half.rbegin(), half.rend());
    schedule.substeps.insert(schedule.substeps.end(), half.begin(), half.end());
    return schedule;
}

OperatorSum apply_schedule(const OperatorSum& obs, const TrotterSchedule& schedule,
                           double drop_tol) {
    OperatorSum out = obs;
    for (const auto& [t, theta] : schedule.substeps)
        out = rotate_sum(out, {t, RotationKind::hermitian, theta}, drop_tol);
    return out;
}

namespace {

// The evolution loop represents O(t) as a dense coefficient vector over a
// growing table of canonical keys. Each distinct (T, theta) substep is a fixed
// linear map; its columns (the closed form O -> O + f1 [O,H] + f2 [[O,H],H]
// for one source key) are built once through classify_commutators and then
// replayed as sparse multiply-adds. Key discovery order is column-scan order,
// so the whole evolution is deterministic.
struct EngineEntry {
    std::uint32_t row;
    float coef; // integer-valued structure constant
};

struct EngineColumn {
    bool built = false;
    RotationClass cls = RotationClass::trivial;
    std::vector<EngineEntry> c_entries; // [O, H]
    std::vector<EngineEntry> d_entries; // [[O, H], H]
};

class HeisenbergEngine {
  public:
    HeisenbergEngine(const OperatorSum& obs, const TrotterSchedule& schedule,
                     const StateVector& psi0)
        : psi0_(psi0) {
        for (const auto& [t, theta] : schedule.substeps) {
            std::size_t gi = 0;
            for (; gi < generators_.size(); ++gi) {
                if (generators_[gi].t == t && generators_[gi].theta == theta)
                    break;
            }
            if (gi == generators_.size()) {
                GeneratorData gd;
                gd.t = t;
                gd.theta = theta;
                for (RotationClass cls : {RotationClass::class1, RotationClass::class4}) {
                    const auto [f1, f2] = rotation_prefactors(cls, RotationKind::hermitian, theta);
                    gd.f1[static_cast<int>(cls)] = f1;
                    gd.f2[static_cast<int>(cls)] = f2;
                }
                generators_.push_back(std::move(gd));
            }
            substeps_.push_back(gi);
        }
        for (const auto& [p, c] : obs.terms())
            coeffs_[key_index(p)] = c;
        scratch_.resize(coeffs_.size());
    }

    void step(double truncation, double& dropped_weight) {
        for (std::size_t gi : substeps_)
            apply_substep(gi);
        if (truncation > 0.0) {
            for (complex_t& c : coeffs_) {
                const double a = std::abs(c);
                if (a != 0.0 && a < truncation) {
                    dropped_weight += a * a;
                    c = 0.0;
                }
            }
        }
    }

    complex_t observable() const {
        complex_t v = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            v += coeffs_[i] * moments_[i];
        return v;
    }

    std::map<int, double> rank_norms() const {
        std::map<int, double> out;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i] != 0.0)
                out[keys_[i].rank2()] += std::norm(coeffs_[i]);
        }
        for (auto& [r2, v] : out)
            v = std::sqrt(v);
        return out;
    }

    std::size_t term_count(double drop_tol) const {
        std::size_t n = 0;
        for (const complex_t& c : coeffs_)
            n += std::abs(c) >= drop_tol;
        return n;
    }

    double coefficient_norm() const {
        double s = 0.0;
        for (const complex_t& c : coeffs_)
            s += std::norm(c);
        return std::sqrt(s);
    }

    OperatorSum snapshot(double drop_tol) const {
        std::vector<OperatorSum::term_t> terms;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (std::abs(coeffs_[i]) >= drop_tol)
                terms.push_back({keys_[i], coeffs_[i]});
        }
        return OperatorSum::from_terms(std::move(terms), 0.0);
    }

  private:
    struct GeneratorData {
        OperatorProduct t;
        double theta = 0.0;
        complex_t f1[3] = {};
        complex_t f2[3] = {};
        std::vector<EngineColumn> columns;
    };

    std::uint32_t key_index(const OperatorProduct& p) {
        auto [it, inserted] = index_.try_emplace(p, static_cast<std::uint32_t>(keys_.size()));
        if (inserted) {
            keys_.push_back(p);
            coeffs_.push_back(0.0);
            moments_.push_back(moment(p));
        }
        return it->second;
    }

    complex_t moment(const OperatorProduct& p) const {
        complex_t v = 0.0;
        for (const auto& [bits, amp] : psi0_.amplitudes()) {
            if (auto r = apply_product(p, Determinant{bits}))
                v += std::conj(psi0_.amplitude(r->second)) * amp * static_cast<double>(r->first);
        }
        return v;
    }

    void build_column(GeneratorData& g, std::uint32_t col) {
        EngineColumn column;
        const Generator gen{g.t, RotationKind::hermitian, g.theta};
        const ClassifiedCommutators cc = classify_commutators(keys_[col], gen);
        column.cls = cc.cls;
        if (cc.cls != RotationClass::trivial) {
            column.c_entries.reserve(cc.c.size());
            for (const auto& [p, c] : cc.c.terms())
                column.c_entries.push_back({key_index(p), static_cast<float>(c.real())});
            column.d_entries.reserve(cc.d.size());
            for (const auto& [p, c] : cc.d.terms())
                column.d_entries.push_back({key_index(p), static_cast<float>(c.real())});
        }
        column.built = true;
        if (g.columns.size() <= col)
            g.columns.resize(keys_.size());
        g.columns[col] = std::move(column);
    }

    void apply_substep(std::size_t gi) {
        GeneratorData& g = generators_[gi];
        if (g.columns.size() < coeffs_.size())
            g.columns.resize(coeffs_.size());
        scratch_ = coeffs_;
        for (std::uint32_t col = 0; col < scratch_.size(); ++col) {
            const complex_t x = scratch_[col];
            if (x == 0.0)
                continue;
            if (!g.columns[col].built)
                build_column(g, col);
            const EngineColumn& column = g.columns[col];
            if (column.cls == RotationClass::trivial)
                continue;
            const complex_t xc = x * g.f1[static_cast<int>(column.cls)];
            for (const EngineEntry& e : column.c_entries)
                coeffs_[e.row] += xc * static_cast<double>(e.coef);
            const complex_t xd = x * g.f2[static_cast<int>(column.cls)];
            for (const EngineEntry& e : column.d_entries)
                coeffs_[e.row] += xd * static_cast<double>(e.coef);
        }
        // building columns may have appended keys; keep scratch in sync
        scratch_.resize(coeffs_.size());
    }

    StateVector psi0_;
    std::vector<OperatorProduct> keys_;
    std::unordered_map<OperatorProduct, std::uint32_t, ProductHash> index_;
    std::vector<complex_t> coeffs_;
    std::vector<complex_t> moments_; // <psi0| P_i |psi0>
    std::vector<complex_t> scratch_;
    std::vector<GeneratorData> generators_;
    std::vector<std::size_t> substeps_; // generator index per substep
};

} // namespace

DynamicsReport heisenberg_evolve(const OperatorSum& obs, const OperatorSum& h,
                                 const StateVector& psi0, const DynamicsOptions& options) {
    if (options.steps < 1)
        throw Error("heisenberg_evolve: need at least one step");
    if (options.truncation < 0.0)
        throw Error("heisenberg_evolve: truncation must be nonnegative");
    const double dt = options.total_time / options.steps;
    const TrotterSchedule schedule = build_schedule(split_hamiltonian(h), dt);

    HeisenbergEngine engine(obs, schedule, psi0);
    DynamicsReport report;
    double dropped = 0.0;
    const auto sample = [&](double t) {
        report.times.push_back(t);
        report.observable.push_back(engine.observable());
        report.rank_norms.push_back(engine.rank_norms());
        report.term_counts.push_back(engine.term_count(default_drop_tol));
        report.dropped_weight.push_back(dropped);
        report.coefficient_norm.push_back(engine.coefficient_norm());
        if (options.keep_snapshots)
            report.snapshots.push_back(engine.snapshot(default_drop_tol));
    };
    sample(0.0);
    for (int k = 1; k <= options.steps; ++k) {
        engine.step(options.truncation, dropped);
        sample(k * dt);
    }
    return report;
}

StateVector sudden_ionization_state(const StateVector& gs, OrbitalIndex orbital) {
    StateVector out = apply_operator(OperatorSum(OperatorProduct{0, 1ull << orbital}), gs, 0.0);
    if (out.norm() < 1.0e-12)
        throw Error("sudden_ionization_state: annihilation yields the zero vector");
    out.normalize();
    return out;
}

std::vector<RankNormRow> rank_norm_timeline(
    const std::vector<std::pair<double, OperatorSum>>& snapshots) {
    std::vector<RankNormRow> rows;
    for (const auto& [t, op] : snapshots) {
        for (const auto& [r2, part] : rank_partition(op))
            rows.push_back({t, r2, euclidean_norm(part)});
    }
    return rows;
}

std::vector<RankNormRow> rank_norm_timeline(const DynamicsReport& report) {
    std::vector<RankNormRow> rows;
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        for (const auto& [r2, norm] : report.rank_norms[i])
            rows.push_back({report.times[i], r2, norm});
    }
    return rows;
}

std::pair<double, double> compare_exact(const DynamicsReport& report,
                                        const std::vector<complex_t>& oracle_series) {
    if (oracle_series.size() != report.observable.size())
        throw Error("compare_exact: time grids do not match");
    double max_dev = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < oracle_series.size(); ++i) {
        const double dev = std::abs(report.observable[i] - oracle_series[i]);
        max_dev = std::max(max_dev, dev);
        sum += dev;
    }
    const double mean = oracle_series.empty() ? 0.0 : sum / oracle_series.size();
    return {max_dev, mean};
}

} // namespace fermirot
