#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermirot/rotations.h"
#include "fermirot/states.h"

namespace fermirot {

/// Candidate generator products for the adaptive procedure.
struct Pool {
    std::vector<OperatorProduct> ops;
};

struct SequenceEntry {
    OperatorProduct t;
    double theta = 0.0;
};

/// Ordered rotation list realizing
///   Hbar = e^{-t_n A_n} ... e^{-t_1 A_1} H e^{t_1 A_1} ... e^{t_n A_n},
/// applied as a left fold in order j = 1..n.
using TransformationSequence = std::vector<SequenceEntry>;

enum class SweepMode { none, one_pass };

struct DownfoldConfig {
    int num_spinorbitals = 0;
    std::vector<OrbitalIndex> active;
    std::vector<OrbitalIndex> external;
    std::vector<Determinant> active_determinants;
    double gradient_threshold = 1.0e-6;
    double energy_threshold = 1.0e-9;
    std::size_t max_operators = 0; // 0 = pool size
    SweepMode sweep = SweepMode::none;
    bool sweep_to_convergence = false;
    double optimizer_tol = 1.0e-10;
    bool compute_oracle = true;
    int threads = 1;

    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;          // 0 = before any rotation
    std::optional<OperatorProduct> selected;
    double theta = 0.0;
    double gradient = 0.0;              // gradient of the selected operator
    double energy = 0.0;                // subspace ground energy of this iteration's Hbar
    std::optional<double> energy_error; // vs dense oracle when available
};

/// Entry (n, m) holds the l2 norm of all terms with n creators and m
/// annihilators; entries beyond the largest populated block are zero.
struct RankMagnitudeMatrix {
    std::vector<std::vector<double>> norms;
    int dimension() const { return static_cast<int>(norms.size()); }
};

struct DownfoldReport {
    std::vector<IterationRecord> iterations;
    TransformationSequence sequence;
    OperatorSum hbar;
    double final_energy = 0.0;
    std::optional<double> exact_energy;
    RankMagnitudeMatrix rank_matrix;
    std::string termination; // "gradient" | "energy" | "max_operators"
};

/// All spin-conserving singles a^x_i and spin-projection-conserving doubles
/// a^{xy}_{ij} from the active to the external set, in deterministic order
/// (singles first).
Pool build_pool(const DownfoldConfig& cfg);

/// Left fold of rotate_sum over the sequence in order j = 1..n.
OperatorSum transform_hamiltonian(const OperatorSum& h, const TransformationSequence& seq,
                                  double drop_tol = default_drop_tol);

/// Re <psi| [hbar, A] |psi> with A = T - T+.
double gradient(const OperatorSum& hbar, const OperatorProduct& t, const StateVector& psi);

/// Argmax of |gradient| over the pool; ties break to the first pool entry.
std::pair<OperatorProduct, double> select_operator(const OperatorSum& hbar, const Pool& pool,
                                                   const StateVector& psi, int threads = 1);

/// theta in [-pi, pi) minimizing E(theta) = <psi| e^{-theta A} hbar e^{theta A} |psi>,
/// found on a 64-point grid refined by golden-section. E(theta*) <= E(0).
double optimize_theta(const OperatorSum& hbar, const OperatorProduct& t, const StateVector& psi,
                      double tol);

/// One optimization pass, j = 1..n, re-optimizing each theta_j with the others
/// fixed. The total energy in psi is non-increasing.
TransformationSequence sweep(const OperatorSum& h, TransformationSequence seq,
                             const DownfoldConfig& cfg, const StateVector& psi);

/// Lowest eigenpair of hbar projected on the active determinant list.
std::pair<double, StateVector> subspace_ground_state(const OperatorSum& hbar,
                                                     const std::vector<Determinant>& active_dets);

RankMagnitudeMatrix rank_magnitude_matrix(const OperatorSum& hbar);

/// The adaptive block-diagonalization loop: diagonalize in the active
/// determinant space, scan pool gradients, select, optimize, optionally sweep,
/// retransform; stops on the gradient threshold, the energy-change threshold,
/// or the operator cap.
DownfoldReport run_adaptive(const OperatorSum& h, const DownfoldConfig& cfg);

} // namespace fermirot
