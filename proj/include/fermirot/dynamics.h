#pragma once

#include <map>
#include <vector>

#include "fermirot/rotations.h"
#include "fermirot/states.h"

namespace fermirot {

/// One Trotter term of a Hermitian sum: coeff * (T + T+) when T is not
/// self-adjoint (each adjoint pair emitted once), coeff * T for self-adjoint
/// number products.
struct HamiltonianTerm {
    OperatorProduct t;
    double coeff = 0.0;
    bool self_adjoint = false;
};

/// Split a Hermitian sum with real coefficients into Trotter terms. Output
/// order: adjoint-pair terms first, then number-product terms, each group
/// sorted by canonical key. Reassembly via reassemble_terms is exact.
std::vector<HamiltonianTerm> split_hamiltonian(const OperatorSum& h);

/// Sum coeff*(T + T+) or coeff*T back into a single operator.
OperatorSum reassemble_terms(const std::vector<HamiltonianTerm>& terms);

struct TrotterScheduleEntry {
    OperatorProduct t;
    double theta = 0.0; // angle fed to the Hermitian closed form e^{i t H} O e^{-i t H}
};

/// Palindromic substep list realizing one second-order step of Heisenberg
/// conjugation by exp(-i H dt): reversed half-step pass then forward
/// half-step pass. Each substep rotates O by e^{+i theta H} (.) e^{-i theta H}
/// with theta = coeff*dt/2 (coeff*dt/4 for self-adjoint terms, where
/// H = T + T+ = 2T).
struct TrotterSchedule {
    std::vector<TrotterScheduleEntry> substeps;
    double dt = 0.0;
};

TrotterSchedule build_schedule(const std::vector<HamiltonianTerm>& terms, double dt);

/// Apply one full schedule (all substeps) to an operator. Reference path used
/// by tests and small drivers; the evolution loop below uses a cached engine
/// that produces the same result.
OperatorSum apply_schedule(const OperatorSum& obs, const TrotterSchedule& schedule,
                           double drop_tol = default_drop_tol);

struct DynamicsOptions {
    double total_time = 1.0;
    int steps = 1;
    double truncation = 0.0;    // screening threshold; dropped weight is accumulated
    bool keep_snapshots = false;
};

struct DynamicsReport {
    std::vector<double> times;                    // k * dt, k = 0..steps
    std::vector<complex_t> observable;            // <psi0| O(t) |psi0>
    std::vector<std::map<int, double>> rank_norms; // doubled rank -> l2 norm, per time
    std::vector<std::size_t> term_counts;
    std::vector<double> dropped_weight;           // cumulative squared dropped weight
    std::vector<double> coefficient_norm;         // l2 norm of the coefficient vector
    std::vector<OperatorSum> snapshots;           // filled when keep_snapshots is set
};

/// Heisenberg evolution of obs under h by symmetric second-order Trotter
/// steps, each substep an exact closed-form rotation. Expectations are taken
/// in psi0.
DynamicsReport heisenberg_evolve(const OperatorSum& obs, const OperatorSum& h,
                                 const StateVector& psi0, const DynamicsOptions& options);

/// Normalized a_orbital |gs>; throws when the annihilation yields (nearly)
/// the zero vector.
StateVector sudden_ionization_state(const StateVector& gs, OrbitalIndex orbital);

struct RankNormRow {
    double time = 0.0;
    int rank2 = 0; // doubled rank
    double norm = 0.0;
};

/// rank_partition + euclidean_norm per snapshot.
std::vector<RankNormRow> rank_norm_timeline(const std::vector<std::pair<double, OperatorSum>>& snapshots);
std::vector<RankNormRow> rank_norm_timeline(const DynamicsReport& report);

/// (max, mean) absolute deviation between the report's observable series and
/// an oracle series on the same time grid.
std::pair<double, double> compare_exact(const DynamicsReport& report,
                                        const std::vector<complex_t>& oracle_series);

} // namespace fermirot
