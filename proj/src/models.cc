#include "fermirot/models.h"

namespace fermirot {

OperatorSum hubbard_chain(const HubbardSpec& spec) {
    if (spec.sites < 1)
        throw Error("hubbard_chain: need at least one site");
    if (2 * spec.sites > max_orbitals)
        throw Error("hubbard_chain: chain does not fit in the supported orbital range");
    TermAccumulator acc;
    for (unsigned i = 0; i + 1 < spec.sites; ++i) {
        for (Spin s : {Spin::up, Spin::down}) {
            const OrbitalIndex a = spin_orbital(i, s);
            const OrbitalIndex b = spin_orbital(i + 1, s);
            acc.add(OperatorProduct{{b}, {a}}, -spec.hopping);
            acc.add(OperatorProduct{{a}, {b}}, -spec.hopping);
        }
    }
    for (unsigned i = 0; i < spec.sites; ++i) {
        const OrbitalIndex up = spin_orbital(i, Spin::up);
        const OrbitalIndex dn = spin_orbital(i, Spin::down);
        acc.add(OperatorProduct{{up, dn}, {up, dn}}, spec.onsite);
    }
    return acc.build(0.0);
}

OperatorSum two_level(double h_pp, double h_qq, double h_pq, OrbitalIndex p, OrbitalIndex q) {
    if (p == q)
        throw Error("two_level: p and q must be distinct spinorbitals");
    TermAccumulator acc;
    acc.add(OperatorProduct{{p}, {p}}, h_pp);
    acc.add(OperatorProduct{{q}, {q}}, h_qq);
    acc.add(OperatorProduct{{p}, {q}}, h_pq);
    acc.add(OperatorProduct{{q}, {p}}, h_pq);
    return acc.build(0.0);
}

} // namespace fermirot
