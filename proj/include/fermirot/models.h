#pragma once

#include "fermirot/algebra.h"

namespace fermirot {

enum class Spin { up, down };

/// Spinorbital packing used throughout: even = up, odd = down, site-major.
/// Sites are 0-based here; the chain Hamiltonian below matches the 1-based
/// convention "site 1" = site index 0.
inline OrbitalIndex spin_orbital(unsigned site, Spin s) {
    return 2 * site + (s == Spin::down ? 1 : 0);
}

/// Open-boundary Hubbard chain parameters.
struct HubbardSpec {
    unsigned sites = 1;
    double hopping = 1.0; // J
    double onsite = 0.0;  // U
};

/// H = -J sum_{i,sigma} (a+_{i+1,s} a_{i,s} + a+_{i,s} a_{i+1,s})
///     + U sum_i n_{i up} n_{i down}, on 2*L spinorbitals.
OperatorSum hubbard_chain(const HubbardSpec& spec);

/// Two-level Hamiltonian h_pp n_p + h_qq n_q + h_pq (a^p_q + a^q_p).
OperatorSum two_level(double h_pp, double h_qq, double h_pq, OrbitalIndex p, OrbitalIndex q);

} // namespace fermirot
