#include <doctest.h>

#include <cmath>

#include "fermirot/dynamics.h"
#include "fermirot/models.h"
#include "oracle.h"

using namespace fermirot;
using testing::Rng;

namespace {

constexpr std::uint64_t up_mask = 0x5555555555555555ull;

// one full Trotter step as a dense matrix reference: exp(+iH dt) M exp(-iH dt)
Eigen::MatrixXcd exact_step(const OperatorSum& h, const Eigen::MatrixXcd& m, double dt, int n) {
    const Eigen::MatrixXcd hd = testing::dense(h, n);
    const Eigen::MatrixXcd u = testing::expm_hermitian(hd, complex_t(0.0, -dt)); // exp(-iH dt)
    return u.adjoint() * m * u;
}

} // namespace

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("split_hamiltonian census and ordering") {
    const OperatorSum h = hubbard_chain({2, 1.0, 1.0});
    const auto terms = split_hamiltonian(h);
    REQUIRE(terms.size() == 4); // 2 hopping pairs (one per spin) + 2 on-site products
    CHECK(!terms[0].self_adjoint);
    CHECK(!terms[1].self_adjoint);
    CHECK(terms[2].self_adjoint);
    CHECK(terms[3].self_adjoint);
    CHECK(terms[0].coeff == doctest::Approx(-1.0));
    CHECK(terms[2].coeff == doctest::Approx(1.0));
    CHECK(max_coefficient_difference(reassemble_terms(terms), h) == 0.0);

    // diagonal Hamiltonian: number products only
    const OperatorSum diag = OperatorSum::from_terms({{OperatorProduct{{0}, {0}}, 0.3},
                                                      {OperatorProduct{{1, 2}, {1, 2}}, -0.8}});
    for (const auto& term : split_hamiltonian(diag))
        CHECK(term.self_adjoint);

    CHECK_THROWS_AS(split_hamiltonian(OperatorSum(OperatorProduct{{0}, {1}}, 1.0)), Error);
    CHECK_THROWS_AS(split_hamiltonian(OperatorSum(OperatorProduct{{0}, {0}}, complex_t(0, 1))),
                    Error);
}

TEST_CASE("split_hamiltonian reassembly on random Hermitian sums") {
    Rng rng(211);
    for (int i = 0; i < 20; ++i) {
        const OperatorSum h = rng.hermitian_sum(6, 8);
        CHECK(max_coefficient_difference(reassemble_terms(split_hamiltonian(h)), h) < 1e-14);
    }
}

TEST_CASE("build_schedule palindrome") {
    const auto terms = split_hamiltonian(hubbard_chain({3, 1.0, 1.0}));
    const TrotterSchedule s = build_schedule(terms, 0.1);
    REQUIRE(s.substeps.size() == 2 * terms.size());
    for (std::size_t i = 0; i < s.substeps.size(); ++i) {
        const auto& a = s.substeps[i];
        const auto& b = s.substeps[s.substeps.size() - 1 - i];
        CHECK(a.t == b.t);
        CHECK(a.theta == b.theta);
    }
    // single term: two identical half steps
    const auto one = split_hamiltonian(OperatorSum::from_terms(
        {{OperatorProduct{{0}, {1}}, -1.0}, {OperatorProduct{{1}, {0}}, -1.0}}));
    const TrotterSchedule s1 = build_schedule(one, 0.2);
    REQUIRE(s1.substeps.size() == 2);
    CHECK(s1.substeps[0].t == s1.substeps[1].t);
    CHECK(s1.substeps[0].theta == doctest::Approx(-0.1));
    CHECK_THROWS_AS(build_schedule(one, 0.0), Error);
}

TEST_CASE("one composite step matches exp(+iH dt) M exp(-iH dt) at third order") {
    // generic complex observable pins the conjugation direction
    const int n = 4;
    const OperatorSum h = hubbard_chain({2, 1.0, 1.0});
    Rng rng(223);
    const OperatorSum m = rng.sum(n, 6);
    const Eigen::MatrixXcd md = testing::dense(m, n);

    const auto terms = split_hamiltonian(h);
    const auto deviation = [&](double dt) {
        const OperatorSum stepped = apply_schedule(m, build_schedule(terms, dt), 0.0);
        return (testing::dense(stepped, n) - exact_step(h, md, dt, n)).norm();
    };
    const double d1 = deviation(0.2);
    const double d2 = deviation(0.1);
    CHECK(d1 / d2 > 6.0); // local error O(dt^3): halving dt shrinks it ~8x
    CHECK(d1 / d2 < 10.0);
    CHECK(d2 < 1e-3);
    // dt -> 0: identity up to O(dt)
    CHECK((testing::dense(apply_schedule(m, build_schedule(terms, 1e-6), 0.0), n) - md).norm() <
          1e-4);
}

TEST_CASE("engine agrees with the term-wise reference path") {
    const OperatorSum h = hubbard_chain({3, 1.0, 0.7});
    const OperatorSum obs(OperatorProduct{{0}, {0}});
    auto [e0, gs] = ground_state(h, Basis::particle_sector(6, 2, 2));
    const StateVector psi0 = sudden_ionization_state(gs, 0);

    DynamicsOptions opt;
    opt.total_time = 0.6;
    opt.steps = 3;
    opt.keep_snapshots = true;
    const DynamicsReport report = heisenberg_evolve(obs, h, psi0, opt);

    const TrotterSchedule schedule = build_schedule(split_hamiltonian(h), 0.2);
    OperatorSum ref = obs;
    for (int k = 1; k <= 3; ++k) {
        ref = apply_schedule(ref, schedule, 0.0);
        CHECK(max_coefficient_difference(ref, report.snapshots[static_cast<std::size_t>(k)]) <
              1e-12);
        CHECK(std::abs(expectation(psi0, ref, psi0) -
                       report.observable[static_cast<std::size_t>(k)]) < 1e-12);
    }
}

TEST_CASE("conserved observable stays constant") {
    const OperatorSum h = hubbard_chain({3, 1.0, 1.0});
    TermAccumulator acc;
    for (unsigned site = 0; site < 3; ++site)
        acc.add(OperatorProduct{{spin_orbital(site, Spin::up)}, {spin_orbital(site, Spin::up)}}, 1.0);
    const OperatorSum n_up_total = acc.build();
    REQUIRE(commutator(h, n_up_total).empty());

    auto [e0, gs] = ground_state(h, Basis::particle_sector(6, 2, 1));
    DynamicsOptions opt;
    opt.total_time = 2.0;
    opt.steps = 10;
    const DynamicsReport report = heisenberg_evolve(n_up_total, h, gs, opt);
    for (const complex_t& v : report.observable)
        CHECK(std::abs(v - report.observable.front()) < 1e-12);
}

TEST_CASE("structure preservation along the evolution") {
    const int n = 6;
    const OperatorSum h = hubbard_chain({3, 1.0, 1.0});
    const OperatorSum obs(OperatorProduct{{0}, {0}});
    auto [e0, gs] = ground_state(h, Basis::particle_sector(n, 2, 2));
    const StateVector psi0 = sudden_ionization_state(gs, 0);

    DynamicsOptions opt;
    opt.total_time = 1.5;
    opt.steps = 5;
    opt.keep_snapshots = true;
    const DynamicsReport report = heisenberg_evolve(obs, h, psi0, opt);
    CHECK(report.dropped_weight.back() == 0.0);

    const double frob0 = testing::dense(obs, n).norm();
    const Eigen::VectorXd spectrum0 =
        eigensolve_hermitian(testing::dense(obs, n)).eigenvalues;
    for (const OperatorSum& snap : report.snapshots) {
        CHECK(hermiticity_residual(snap) < 1e-12);
        // per-spin particle-number blocks survive
        for (const auto& [p, c] : snap.terms()) {
            CHECK(std::popcount(p.cre & up_mask) == std::popcount(p.ann & up_mask));
            CHECK(std::popcount(p.cre & ~up_mask) == std::popcount(p.ann & ~up_mask));
        }
        // unitary conjugation: Frobenius norm and spectrum preserved
        CHECK(testing::dense(snap, n).norm() == doctest::Approx(frob0).epsilon(1e-10));
        const Eigen::VectorXd spectrum =
            eigensolve_hermitian(testing::dense(snap, n)).eigenvalues;
        CHECK((spectrum - spectrum0).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("second-order scaling of the deviation") {
    const OperatorSum h = hubbard_chain({3, 1.0, 1.0});
    const OperatorSum obs(OperatorProduct{{0}, {0}});
    const Basis sector = Basis::particle_sector(6, 1, 2);
    auto [e0, gs] = ground_state(h, Basis::particle_sector(6, 2, 2));
    const StateVector psi0 = sudden_ionization_state(gs, 0);

    const auto max_dev = [&](int steps) {
        DynamicsOptions opt;
        opt.total_time = 4.0;
        opt.steps = steps;
        const DynamicsReport report = heisenberg_evolve(obs, h, psi0, opt);
        const auto oracle = exact_heisenberg(obs, h, sector, psi0, report.times);
        return compare_exact(report, oracle).first;
    };
    const double d8 = max_dev(8);
    const double d16 = max_dev(16);
    CHECK(d8 / d16 > 3.0);
    CHECK(d8 / d16 < 5.0);
}

TEST_CASE("truncation accumulates dropped weight") {
    const OperatorSum h = hubbard_chain({3, 1.0, 1.0});
    const OperatorSum obs(OperatorProduct{{0}, {0}});
    auto [e0, gs] = ground_state(h, Basis::particle_sector(6, 2, 2));
    const StateVector psi0 = sudden_ionization_state(gs, 0);
    DynamicsOptions opt;
    opt.total_time = 3.0;
    opt.steps = 12;
    opt.truncation = 1e-3;
    const DynamicsReport report = heisenberg_evolve(obs, h, psi0, opt);
    CHECK(report.dropped_weight.back() > 0.0);
    // cumulative and nondecreasing
    for (std::size_t i = 1; i < report.dropped_weight.size(); ++i)
        CHECK(report.dropped_weight[i] >= report.dropped_weight[i - 1]);
}

TEST_CASE("sudden ionization") {
    CHECK(sudden_ionization_state(StateVector(Determinant{0b1}), 0).amplitudes().count(0) == 1);
    CHECK_THROWS_AS(sudden_ionization_state(StateVector(Determinant{0b10}), 0), Error);

    // 5-site ground state: recorded pre-normalization weight of a_{1 up}
    auto [e5, gs5] = ground_state(hubbard_chain({5, 1.0, 1.0}), Basis::particle_sector(10, 3, 3));
    const StateVector removed = apply_operator(OperatorSum(OperatorProduct{0ull, 1ull}), gs5);
    CHECK(removed.norm() == doctest::Approx(0.801532739930183).epsilon(1e-12));
    CHECK(sudden_ionization_state(gs5, 0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank norm timeline") {
    const OperatorSum h = hubbard_chain({3, 1.0, 1.0});
    const OperatorSum obs(OperatorProduct{{0}, {0}});
    auto [e0, gs] = ground_state(h, Basis::particle_sector(6, 2, 2));
    const StateVector psi0 = sudden_ionization_state(gs, 0);
    DynamicsOptions opt;
    opt.total_time = 2.0;
    opt.steps = 8;
    opt.keep_snapshots = true;
    const DynamicsReport report = heisenberg_evolve(obs, h, psi0, opt);

    // t = 0: all mass at k = 1
    CHECK(report.rank_norms.front().size() == 1);
    CHECK(report.rank_norms.front().at(2) == doctest::Approx(1.0));

    // sum of squared rank norms equals the squared total norm
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        double sum = 0.0;
        for (const auto& [r2, norm] : report.rank_norms[i])
            sum += norm * norm;
        const double total = report.coefficient_norm[i];
        CHECK(sum == doctest::Approx(total * total).epsilon(1e-12));
    }

    // the one-body norm is invariant
    for (const auto& norms : report.rank_norms)
        CHECK(norms.at(2) == doctest::Approx(1.0).epsilon(1e-8));

    // timeline from snapshots agrees with the streamed norms
    std::vector<std::pair<double, OperatorSum>> snaps;
    for (std::size_t i = 0; i < report.times.size(); ++i)
        snaps.push_back({report.times[i], report.snapshots[i]});
    for (const RankNormRow& row : rank_norm_timeline(snaps)) {
        const auto it = std::find(report.times.begin(), report.times.end(), row.time);
        const std::size_t idx = static_cast<std::size_t>(it - report.times.begin());
        CHECK(report.rank_norms[idx].at(row.rank2) == doctest::Approx(row.norm).epsilon(1e-12));
    }
}

TEST_CASE("compare_exact") {
    DynamicsReport r;
    r.times = {0.0, 0.1, 0.2};
    r.observable = {1.0, 0.5, 0.25};
    CHECK(compare_exact(r, {1.0, 0.5, 0.25}) == std::pair{0.0, 0.0});
    auto [mx, mn] = compare_exact(r, {1.0 + 1e-3, 0.5 + 1e-3, 0.25 + 1e-3});
    CHECK(mx == doctest::Approx(1e-3));
    CHECK(mn == doctest::Approx(1e-3));
    CHECK_THROWS_AS(compare_exact(r, {1.0, 0.5}), Error);
}

TEST_SUITE_END();
