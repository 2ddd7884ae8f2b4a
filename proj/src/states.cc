#include "fermirot/states.h"

#include <algorithm>
#include <bit>
#include <cmath>

namespace fermirot {

StateVector::StateVector(const Determinant& d, complex_t amplitude) {
    if (amplitude != 0.0)
        amps_[d.bits] = amplitude;
}

void StateVector::add(const Determinant& d, complex_t amplitude) {
    if (amplitude == 0.0)
        return;
    auto [it, inserted] = amps_.try_emplace(d.bits, amplitude);
    if (!inserted)
        it->second += amplitude;
}

complex_t StateVector::amplitude(const Determinant& d) const {
    auto it = amps_.find(d.bits);
    return it == amps_.end() ? complex_t(0.0) : it->second;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& [bits, c] : amps_)
        s += std::norm(c);
    return std::sqrt(s);
}

void StateVector::normalize() {
    const double n = norm();
    if (n < 1.0e-12)
        throw Error("cannot normalize a zero state vector");
    for (auto& [bits, c] : amps_)
        c /= n;
}

void StateVector::prune(double drop_tol) {
    for (auto it = amps_.begin(); it != amps_.end();) {
        if (std::abs(it->second) < drop_tol)
            it = amps_.erase(it);
        else
            ++it;
    }
}

Basis Basis::full_fock(int num_spinorbitals) {
    if (num_spinorbitals < 0 || num_spinorbitals > 12)
        throw Error("full Fock bases are limited to 12 spinorbitals");
    Basis b;
    const std::uint64_t dim = 1ull << num_spinorbitals;
    b.dets_.reserve(dim);
    for (std::uint64_t m = 0; m < dim; ++m)
        b.dets_.push_back({m});
    return b;
}

Basis Basis::particle_sector(int num_spinorbitals, int n_up, int n_down) {
    if (num_spinorbitals < 0 || num_spinorbitals > 14)
        throw Error("sector bases are limited to 14 spinorbitals");
    constexpr std::uint64_t up_mask = 0x5555555555555555ull;
    Basis b;
    const std::uint64_t dim = 1ull << num_spinorbitals;
    for (std::uint64_t m = 0; m < dim; ++m) {
        if (std::popcount(m & up_mask) == n_up && std::popcount(m & ~up_mask) == n_down)
            b.dets_.push_back({m});
    }
    if (b.dets_.empty())
        throw Error("empty particle sector");
    return b;
}

Basis Basis::from_determinants(std::vector<Determinant> dets) {
    std::sort(dets.begin(), dets.end());
    dets.erase(std::unique(dets.begin(), dets.end()), dets.end());
    Basis b;
    b.dets_ = std::move(dets);
    return b;
}

std::optional<std::size_t> Basis::index_of(const Determinant& d) const {
    auto it = std::lower_bound(dets_.begin(), dets_.end(), d);
    if (it != dets_.end() && *it == d)
        return static_cast<std::size_t>(it - dets_.begin());
    return std::nullopt;
}

std::optional<std::pair<int, Determinant>> apply_product(const OperatorProduct& p,
                                                         const Determinant& d) {
    std::uint64_t occ = d.bits;
    int phase = 1;
    // annihilators act first, chronologically from the right of the physical
    // string (ascending index order)
    for (std::uint64_t m = p.ann; m;) {
        const int b = std::countr_zero(m);
        m &= m - 1;
        const std::uint64_t bit = 1ull << b;
        if (!(occ & bit))
            return std::nullopt;
        if (std::popcount(occ & (bit - 1)) & 1)
            phase = -phase;
        occ &= ~bit;
    }
    // creators, chronologically from the right of the creator block
    // (descending index order)
    std::uint64_t m = p.cre;
    while (m) {
        const int b = 63 - std::countl_zero(m);
        const std::uint64_t bit = 1ull << b;
        m &= ~bit;
        if (occ & bit)
            return std::nullopt;
        if (std::popcount(occ & (bit - 1)) & 1)
            phase = -phase;
        occ |= bit;
    }
    return std::pair<int, Determinant>{phase, Determinant{occ}};
}

StateVector apply_operator(const OperatorSum& x, const StateVector& v, double drop_tol) {
    StateVector out;
    for (const auto& [p, c] : x.terms()) {
        for (const auto& [bits, amp] : v.amplitudes()) {
            if (auto r = apply_product(p, Determinant{bits}))
                out.add(r->second, c * amp * static_cast<double>(r->first));
        }
    }
    out.prune(drop_tol);
    return out;
}

complex_t expectation(const StateVector& bra, const OperatorSum& x, const StateVector& ket) {
    complex_t val = 0.0;
    for (const auto& [p, c] : x.terms()) {
        for (const auto& [bits, amp] : ket.amplitudes()) {
            if (auto r = apply_product(p, Determinant{bits}))
                val += std::conj(bra.amplitude(r->second)) * c * amp * static_cast<double>(r->first);
        }
    }
    return val;
}

Eigen::MatrixXcd build_dense(const OperatorSum& x, const Basis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Determinant dj = basis.determinants()[static_cast<std::size_t>(j)];
        for (const auto& [p, c] : x.terms()) {
            if (auto r = apply_product(p, dj)) {
                if (auto i = basis.index_of(r->second))
                    m(static_cast<Eigen::Index>(*i), j) += c * static_cast<double>(r->first);
            }
        }
    }
    return m;
}

EigenSystem eigensolve_hermitian(const Eigen::MatrixXcd& m) {
    const double residual = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (residual > 1.0e-10)
        throw Error("eigensolve_hermitian: input is not Hermitian (residual " +
                    std::to_string(residual) + ")");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success)
        throw Error("eigensolve_hermitian: eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

std::pair<double, StateVector> ground_state(const OperatorSum& h, const Basis& basis) {
    if (basis.size() == 0)
        throw Error("ground_state: empty basis");
    const EigenSystem es = eigensolve_hermitian(build_dense(h, basis));
    Eigen::VectorXcd v = es.eigenvectors.col(0);
    // deterministic global phase: largest-magnitude amplitude real positive
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const complex_t a = v(imax);
    if (std::abs(a) > 0.0)
        v *= std::conj(a) / std::abs(a);
    StateVector psi;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= default_drop_tol)
            psi.add(basis.determinants()[static_cast<std::size_t>(i)], v(i));
    }
    return {es.eigenvalues(0), psi};
}

std::vector<complex_t> exact_heisenberg(const OperatorSum& obs, const OperatorSum& h,
                                        const Basis& basis, const StateVector& psi0,
                                        const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(n);
    for (const auto& [bits, amp] : psi0.amplitudes()) {
        auto i = basis.index_of(Determinant{bits});
        if (!i)
            throw Error("exact_heisenberg: psi0 contains a determinant outside the basis");
        v0(static_cast<Eigen::Index>(*i)) = amp;
    }
    const EigenSystem es = eigensolve_hermitian(build_dense(h, basis));
    const Eigen::MatrixXcd obs_dense = build_dense(obs, basis);
    const Eigen::VectorXcd w0 = es.eigenvectors.adjoint() * v0;
    std::vector<complex_t> out;
    out.reserve(times.size());
    for (double t : times) {
        Eigen::VectorXcd w = w0;
        for (Eigen::Index k = 0; k < n; ++k)
            w(k) *= std::exp(complex_t(0.0, -es.eigenvalues(k) * t));
        const Eigen::VectorXcd psi_t = es.eigenvectors * w;
        out.push_back(psi_t.dot(obs_dense * psi_t));
    }
    return out;
}

} // namespace fermirot
