#include "fermirot/algebra.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fermirot {

namespace {

std::uint64_t mask_from_list(std::initializer_list<OrbitalIndex> indices) {
    std::uint64_t mask = 0;
    for (OrbitalIndex p : indices) {
        if (p >= max_orbitals)
            throw Error("orbital index " + std::to_string(p) + " exceeds the supported maximum of " +
                        std::to_string(max_orbitals - 1));
        const std::uint64_t bit = 1ull << p;
        if (mask & bit)
            throw Error("repeated index " + std::to_string(p) + " in an operator product list");
        mask |= bit;
    }
    return mask;
}

std::string index_list_str(std::uint64_t mask) {
    std::string s;
    bool first = true;
    for (std::uint64_t m = mask; m;) {
        const int b = std::countr_zero(m);
        m &= m - 1;
        if (!first)
            s += ' ';
        s += std::to_string(b);
        first = false;
    }
    return s;
}

std::string coeff_str(complex_t c) {
    char buf[64];
    if (c.imag() == 0.0) {
        std::snprintf(buf, sizeof(buf), "%.12g", c.real());
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "(%.12g%+.12gi)", c.real(), c.imag());
    return buf;
}

} // namespace

OperatorProduct::OperatorProduct(std::initializer_list<OrbitalIndex> creators,
                                 std::initializer_list<OrbitalIndex> annihilators)
    : cre(mask_from_list(creators)), ann(mask_from_list(annihilators)) {}

std::vector<OrbitalIndex> OperatorProduct::creator_list() const {
    std::vector<OrbitalIndex> v;
    for (std::uint64_t m = cre; m; m &= m - 1)
        v.push_back(static_cast<OrbitalIndex>(std::countr_zero(m)));
    return v;
}

std::vector<OrbitalIndex> OperatorProduct::annihilator_list() const {
    std::vector<OrbitalIndex> v;
    for (std::uint64_t m = ann; m; m &= m - 1)
        v.push_back(static_cast<OrbitalIndex>(std::countr_zero(m)));
    return v;
}

std::string OperatorProduct::str() const {
    if (is_identity())
        return "1";
    return "a^{" + index_list_str(cre) + "}_{" + index_list_str(ann) + "}";
}

OperatorSum::OperatorSum(const OperatorProduct& p, complex_t coeff) {
    if (coeff != 0.0)
        terms_.push_back({p, coeff});
}

OperatorSum OperatorSum::from_terms(std::vector<term_t> terms, double drop_tol) {
    TermAccumulator acc(terms.size());
    for (const auto& [p, c] : terms)
        acc.add(p, c);
    return acc.build(drop_tol);
}

complex_t OperatorSum::coefficient(const OperatorProduct& p) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                               [](const term_t& t, const OperatorProduct& key) { return t.first < key; });
    if (it != terms_.end() && it->first == p)
        return it->second;
    return 0.0;
}

std::string OperatorSum::str() const {
    if (terms_.empty())
        return "0";
    std::string s;
    for (const auto& [p, c] : terms_) {
        if (!s.empty())
            s += " + ";
        s += coeff_str(c) + " " + p.str();
    }
    return s;
}

void TermAccumulator::add_scaled(const OperatorSum& x, complex_t scale) {
    if (scale == 0.0)
        return;
    for (const auto& [p, c] : x.terms())
        map_[p] += scale * c;
}

OperatorSum TermAccumulator::build(double drop_tol) const {
    OperatorSum out;
    out.terms_.reserve(map_.size());
    for (const auto& [p, c] : map_) {
        // exact zeros are always removed, whatever the tolerance
        if (c != 0.0 && std::abs(c) >= drop_tol)
            out.terms_.push_back({p, c});
    }
    std::sort(out.terms_.begin(), out.terms_.end(),
              [](const OperatorSum::term_t& a, const OperatorSum::term_t& b) { return a.first < b.first; });
    return out;
}

namespace {

bool is_canonical_raw(std::span<const RawOp> seq) {
    // creators first (strictly ascending), then annihilators (strictly descending)
    std::size_t i = 0;
    for (; i < seq.size() && seq[i].create; ++i) {
        if (i > 0 && seq[i - 1].create && seq[i - 1].index >= seq[i].index)
            return false;
    }
    for (std::size_t j = i; j < seq.size(); ++j) {
        if (seq[j].create)
            return false;
        if (j > i && seq[j - 1].index <= seq[j].index)
            return false;
    }
    return true;
}

void normal_order_rec(std::vector<RawOp>& seq, complex_t coeff, TermAccumulator& acc) {
    if (coeff == 0.0)
        return;
    // scan for the first adjacent violation
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const RawOp a = seq[i];
        const RawOp b = seq[i + 1];
        if (!a.create && b.create) {
            if (a.index == b.index) {
                // a_p a+_p = 1 - a+_p a_p
                std::vector<RawOp> contracted;
                contracted.reserve(seq.size() - 2);
                contracted.insert(contracted.end(), seq.begin(), seq.begin() + i);
                contracted.insert(contracted.end(), seq.begin() + i + 2, seq.end());
                normal_order_rec(contracted, coeff, acc);
            }
            std::swap(seq[i], seq[i + 1]);
            normal_order_rec(seq, -coeff, acc);
            std::swap(seq[i], seq[i + 1]);
            return;
        }
        if (a.create && b.create && a.index >= b.index) {
            if (a.index == b.index)
                return; // nilpotency
            std::swap(seq[i], seq[i + 1]);
            normal_order_rec(seq, -coeff, acc);
            std::swap(seq[i], seq[i + 1]);
            return;
        }
        if (!a.create && !b.create && a.index <= b.index) {
            if (a.index == b.index)
                return;
            std::swap(seq[i], seq[i + 1]);
            normal_order_rec(seq, -coeff, acc);
            std::swap(seq[i], seq[i + 1]);
            return;
        }
    }
    // canonical: build masks
    std::uint64_t cre = 0, ann = 0;
    for (const RawOp& op : seq) {
        if (op.index >= max_orbitals)
            throw Error("orbital index " + std::to_string(op.index) +
                        " exceeds the supported maximum of " + std::to_string(max_orbitals - 1));
        (op.create ? cre : ann) |= 1ull << op.index;
    }
    acc.add(OperatorProduct{cre, ann}, coeff);
}

} // namespace

OperatorSum normal_order(std::span<const RawOp> raw, complex_t coeff, double drop_tol) {
    TermAccumulator acc;
    if (is_canonical_raw(raw)) {
        std::uint64_t cre = 0, ann = 0;
        for (const RawOp& op : raw) {
            if (op.index >= max_orbitals)
                throw Error("orbital index " + std::to_string(op.index) +
                            " exceeds the supported maximum of " + std::to_string(max_orbitals - 1));
            (op.create ? cre : ann) |= 1ull << op.index;
        }
        acc.add(OperatorProduct{cre, ann}, coeff);
    } else {
        std::vector<RawOp> seq(raw.begin(), raw.end());
        normal_order_rec(seq, coeff, acc);
    }
    return acc.build(drop_tol);
}

OperatorSum normal_order(std::initializer_list<RawOp> raw, complex_t coeff, double drop_tol) {
    return normal_order(std::span<const RawOp>(raw.begin(), raw.size()), coeff, drop_tol);
}

OperatorSum multiply(const OperatorSum& x, const OperatorSum& y, double drop_tol) {
    TermAccumulator acc(x.size() + y.size());
    for (const auto& [px, cx] : x.terms()) {
        for (const auto& [py, cy] : y.terms()) {
            const complex_t c = cx * cy;
            expand_product(px, py, [&](const OperatorProduct& p, int sign) {
                acc.add(p, sign > 0 ? c : -c);
            });
        }
    }
    return acc.build(drop_tol);
}

namespace {

// With disjoint supports two products commute (even * even operator count) or
// anticommute (odd * odd); no contractions are possible either way.
inline bool disjoint_commute(const OperatorProduct& a, const OperatorProduct& b) {
    return ((a.rank2() & 1) == 0) || ((b.rank2() & 1) == 0);
}

} // namespace

OperatorSum commutator(const OperatorSum& x, const OperatorSum& y, double drop_tol) {
    TermAccumulator acc(x.size() + y.size());
    for (const auto& [px, cx] : x.terms()) {
        for (const auto& [py, cy] : y.terms()) {
            const complex_t c = cx * cy;
            if ((px.support() & py.support()) == 0) {
                if (disjoint_commute(px, py))
                    continue;
                // anticommuting pair: [x, y] = 2 x y
                expand_product(px, py, [&](const OperatorProduct& p, int sign) {
                    acc.add(p, sign > 0 ? 2.0 * c : -2.0 * c);
                });
                continue;
            }
            expand_product(px, py, [&](const OperatorProduct& p, int sign) {
                acc.add(p, sign > 0 ? c : -c);
            });
            expand_product(py, px, [&](const OperatorProduct& p, int sign) {
                acc.add(p, sign > 0 ? -c : c);
            });
        }
    }
    return acc.build(drop_tol);
}

OperatorSum adjoint(const OperatorSum& x) {
    std::vector<OperatorSum::term_t> terms;
    terms.reserve(x.size());
    for (const auto& [p, c] : x.terms())
        terms.push_back({p.adjoint(), std::conj(c)});
    return OperatorSum::from_terms(std::move(terms), 0.0);
}

OperatorSum axpy(complex_t alpha, const OperatorSum& x, const OperatorSum& y, double drop_tol) {
    TermAccumulator acc(x.size() + y.size());
    acc.add_scaled(y, 1.0);
    acc.add_scaled(x, alpha);
    return acc.build(drop_tol);
}

OperatorSum operator+(const OperatorSum& x, const OperatorSum& y) { return axpy(1.0, y, x); }

OperatorSum operator-(const OperatorSum& x, const OperatorSum& y) { return axpy(-1.0, y, x); }

OperatorSum operator*(complex_t alpha, const OperatorSum& x) {
    TermAccumulator acc(x.size());
    acc.add_scaled(x, alpha);
    return acc.build(0.0);
}

std::map<int, OperatorSum> rank_partition(const OperatorSum& x) {
    std::map<int, std::vector<OperatorSum::term_t>> buckets;
    for (const auto& term : x.terms())
        buckets[term.first.rank2()].push_back(term);
    std::map<int, OperatorSum> out;
    for (auto& [r2, terms] : buckets)
        out[r2] = OperatorSum::from_terms(std::move(terms), 0.0);
    return out;
}

double euclidean_norm(const OperatorSum& x) {
    double s = 0.0;
    for (const auto& [p, c] : x.terms())
        s += std::norm(c);
    return std::sqrt(s);
}

double hermiticity_residual(const OperatorSum& x) { return euclidean_norm(x - adjoint(x)); }

double max_coefficient_difference(const OperatorSum& x, const OperatorSum& y) {
    double m = 0.0;
    for (const auto& [p, c] : x.terms())
        m = std::max(m, std::abs(c - y.coefficient(p)));
    for (const auto& [p, c] : y.terms())
        m = std::max(m, std::abs(c - x.coefficient(p)));
    return m;
}

} // namespace fermirot
