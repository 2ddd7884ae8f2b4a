#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fermirot/algebra.h"

namespace fermirot {

/// Occupation-number basis state: bit p set <=> spinorbital p occupied.
struct Determinant {
    std::uint64_t bits = 0;

    friend bool operator==(const Determinant&, const Determinant&) = default;
    friend auto operator<=>(const Determinant&, const Determinant&) = default;
};

/// Sparse linear combination of determinants, keyed by the occupation bitmask.
class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(const Determinant& d, complex_t amplitude = 1.0);

    void add(const Determinant& d, complex_t amplitude);
    complex_t amplitude(const Determinant& d) const;
    const std::map<std::uint64_t, complex_t>& amplitudes() const { return amps_; }
    bool empty() const { return amps_.empty(); }

    double norm() const;
    /// Rescale to unit norm; throws on (near-)zero vectors.
    void normalize();
    /// Remove amplitudes below the drop tolerance.
    void prune(double drop_tol = default_drop_tol);

  private:
    std::map<std::uint64_t, complex_t> amps_;
};

/// An ordered determinant list (ascending bitmask) used for dense builds.
/// Full-Fock bases are capped at 12 spinorbitals and sector bases at 14 so
/// that oracles beyond that are skipped rather than approximated.
class Basis {
  public:
    static Basis full_fock(int num_spinorbitals);
    /// All determinants with the given spin-up/spin-down electron counts under
    /// the even = up, odd = down spinorbital packing.
    static Basis particle_sector(int num_spinorbitals, int n_up, int n_down);
    static Basis from_determinants(std::vector<Determinant> dets);

    const std::vector<Determinant>& determinants() const { return dets_; }
    std::size_t size() const { return dets_.size(); }
    /// Position of d in the list, if present.
    std::optional<std::size_t> index_of(const Determinant& d) const;

  private:
    std::vector<Determinant> dets_;
};

/// Apply a canonical product to a determinant: annihilator block first, then
/// creators, each elementary operator picking up (-1)^(number of occupied
/// orbitals below its index). Returns nullopt when the result vanishes.
std::optional<std::pair<int, Determinant>> apply_product(const OperatorProduct& p,
                                                         const Determinant& d);

/// Linear extension of apply_product.
StateVector apply_operator(const OperatorSum& x, const StateVector& v,
                           double drop_tol = default_drop_tol);

/// <bra| x |ket>.
complex_t expectation(const StateVector& bra, const OperatorSum& x, const StateVector& ket);

/// Matrix M with M(i, j) = <d_i| x |d_j> over the basis list.
Eigen::MatrixXcd build_dense(const OperatorSum& x, const Basis& basis);

struct EigenSystem {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXcd eigenvectors; // orthonormal columns
};

/// Dense Hermitian eigensolver. Rejects inputs with Hermiticity residual
/// above 1e-10.
EigenSystem eigensolve_hermitian(const Eigen::MatrixXcd& m);

/// Lowest eigenpair of a Hermitian sum projected on a basis. The state's
/// global phase is fixed by making its largest-magnitude amplitude real and
/// positive.
std::pair<double, StateVector> ground_state(const OperatorSum& h, const Basis& basis);

/// <psi0| exp(i H t) obs exp(-i H t) |psi0> for each time, via one dense
/// eigendecomposition of h on the basis. psi0 must live inside the basis.
std::vector<complex_t> exact_heisenberg(const OperatorSum& obs, const OperatorSum& h,
                                        const Basis& basis, const StateVector& psi0,
                                        const std::vector<double>& times);

} // namespace fermirot
