#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "fermirot/algebra.h"

namespace fermirot {

/// Molecular integrals in the FCIDUMP convention: spatial orbitals, one-body
/// h_pq (symmetric) and two-body (pq|rs) in chemist notation with 8-fold
/// symmetry. Stored on canonical index keys, which makes the declared
/// symmetries structural; duplicate entries that disagree beyond 1e-8 are
/// reported as warnings.
struct MolecularIntegrals {
    int norb = 0;
    int nelec = 0;
    int ms2 = 0;
    double scalar_energy = 0.0;
    std::vector<double> h;                          // norb x norb, row-major
    std::unordered_map<std::uint64_t, double> eri;  // canonical (pq|rs) keys
    std::vector<std::string> warnings;

    double one_body(int p, int q) const { return h[static_cast<std::size_t>(p) * norb + q]; }
    /// (pq|rs) with 0-based spatial indices, resolved through the 8-fold key.
    double two_body(int p, int q, int r, int s) const;

    static std::uint64_t canonical_key(int p, int q, int r, int s);
};

/// Parse an FCIDUMP file and assemble the spinorbital Hamiltonian
///   E + sum_pq h_pq a+_{p s} a_{q s} + 1/2 sum_pqrs (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}.
/// Spatial orbital p (1-based in the file) maps to spinorbitals 2(p-1) (up)
/// and 2(p-1)+1 (down). Parse errors carry the offending line number.
std::pair<MolecularIntegrals, OperatorSum> load_fcidump(const std::string& path);

/// Same, reading from a stream (used by tests); `name` labels error messages.
std::pair<MolecularIntegrals, OperatorSum> load_fcidump(std::istream& in, const std::string& name);

/// Assemble the spinorbital Hamiltonian from already-loaded integrals.
OperatorSum assemble_hamiltonian(const MolecularIntegrals& ints);

} // namespace fermirot
