#include "oracle.h"

namespace fermirot::testing {

Eigen::MatrixXcd dense(const OperatorSum& x, int num_spinorbitals) {
    return build_dense(x, Basis::full_fock(num_spinorbitals));
}

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, complex_t factor) {
    const EigenSystem es = eigensolve_hermitian(h);
    Eigen::VectorXcd phases(es.eigenvalues.size());
    for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
        phases(i) = std::exp(factor * es.eigenvalues(i));
    return es.eigenvectors * phases.asDiagonal() * es.eigenvectors.adjoint();
}

Eigen::MatrixXcd dense_unitary(const Generator& g, int num_spinorbitals) {
    const OperatorSum gsum = build_generator_sum(g);
    const Eigen::MatrixXcd m = dense(gsum, num_spinorbitals);
    if (g.kind == RotationKind::anti_hermitian) {
        // exp(theta A) with A anti-Hermitian: -iA is Hermitian
        const Eigen::MatrixXcd b = complex_t(0.0, -1.0) * m;
        return expm_hermitian(b, complex_t(0.0, g.theta));
    }
    return expm_hermitian(m, complex_t(0.0, -g.theta));
}

Eigen::MatrixXcd conjugate(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& u) {
    return u.adjoint() * m * u;
}

double dense_distance(const OperatorSum& x, const Eigen::MatrixXcd& m, int num_spinorbitals) {
    return (dense(x, num_spinorbitals) - m).norm();
}

std::vector<RawOp> raw_string(const OperatorProduct& p) {
    std::vector<RawOp> raw;
    for (OrbitalIndex i : p.creator_list())
        raw.push_back({i, true});
    const auto ann = p.annihilator_list();
    for (auto it = ann.rbegin(); it != ann.rend(); ++it)
        raw.push_back({*it, false});
    return raw;
}

OperatorSum multiply_via_normal_order(const OperatorSum& x, const OperatorSum& y) {
    TermAccumulator acc;
    for (const auto& [px, cx] : x.terms()) {
        for (const auto& [py, cy] : y.terms()) {
            std::vector<RawOp> raw = raw_string(px);
            const std::vector<RawOp> raw_y = raw_string(py);
            raw.insert(raw.end(), raw_y.begin(), raw_y.end());
            acc.add_scaled(normal_order(std::span<const RawOp>(raw.data(), raw.size()), cx * cy, 0.0),
                           1.0);
        }
    }
    return acc.build();
}

} // namespace fermirot::testing
