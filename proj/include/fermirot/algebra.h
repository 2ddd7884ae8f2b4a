#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fermirot/error.h"

namespace fermirot {

using complex_t = std::complex<double>;

/// Spinorbital label. Valid values are 0 <= p < max_orbitals.
using OrbitalIndex = std::uint32_t;

/// Largest spinorbital index + 1 supported by the bitmask representation.
inline constexpr OrbitalIndex max_orbitals = 64;

/// Coefficients with magnitude below this are removed when a sum is canonicalized.
inline constexpr double default_drop_tol = 1.0e-14;

/// A normal-ordered product of fermionic operators over the physical vacuum,
///
///   a+_{p1} a+_{p2} ... a+_{pn} a_{qm} ... a_{q2} a_{q1}
///
/// with p1 < p2 < ... < pn and q1 < q2 < ... < qm. Creators and annihilators
/// are stored as bitmasks (bit p set = index p present), which makes the
/// strictly-ascending invariant structural. An index present in both masks is
/// a number-operator factor n_p. Empty masks encode the identity.
///
/// Under this convention the adjoint is a pure swap of the two masks with
/// sign +1.
struct OperatorProduct {
    std::uint64_t cre = 0;
    std::uint64_t ann = 0;

    OperatorProduct() = default;
    OperatorProduct(std::uint64_t cre_mask, std::uint64_t ann_mask) : cre(cre_mask), ann(ann_mask) {}
    /// Build from index lists (any order, no duplicates within a list).
    OperatorProduct(std::initializer_list<OrbitalIndex> creators,
                    std::initializer_list<OrbitalIndex> annihilators);

    bool is_identity() const { return cre == 0 && ann == 0; }
    /// True when the product is a pure string of number operators (or the identity).
    bool is_number_product() const { return cre == ann; }

    OperatorProduct adjoint() const { return {ann, cre}; }

    std::uint64_t support() const { return cre | ann; }
    int num_creators() const { return std::popcount(cre); }
    int num_annihilators() const { return std::popcount(ann); }
    /// Twice the many-body rank, i.e. the total operator count. Always exact,
    /// also for odd strings whose rank is a half-integer.
    int rank2() const { return num_creators() + num_annihilators(); }

    std::vector<OrbitalIndex> creator_list() const;
    std::vector<OrbitalIndex> annihilator_list() const;

    /// Compact text form, e.g. "a^{2 3}_{0 1}", "n_{4}" for number factors mixed
    /// in as usual indices, "1" for the identity.
    std::string str() const;

    friend bool operator==(const OperatorProduct&, const OperatorProduct&) = default;
    friend auto operator<=>(const OperatorProduct& a, const OperatorProduct& b) {
        if (auto c = a.cre <=> b.cre; c != 0)
            return c;
        return a.ann <=> b.ann;
    }
};

struct ProductHash {
    std::size_t operator()(const OperatorProduct& p) const {
        // splitmix64-style mix of the two masks
        std::uint64_t x = p.cre + 0x9e3779b97f4a7c15ull;
        x ^= p.ann + 0xbf58476d1ce4e5b9ull + (x << 6) + (x >> 2);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return static_cast<std::size_t>(x ^ (x >> 31));
    }
};

/// A finite linear combination of canonical OperatorProducts with complex
/// coefficients. Terms are kept sorted by canonical key (cre, ann) so that
/// iteration order, serialization, and floating-point accumulation are
/// bit-stable across runs. Values are immutable after construction; all
/// arithmetic returns new sums.
class OperatorSum {
  public:
    using term_t = std::pair<OperatorProduct, complex_t>;

    OperatorSum() = default;
    explicit OperatorSum(const OperatorProduct& p, complex_t coeff = 1.0);

    static OperatorSum zero() { return {}; }
    static OperatorSum identity(complex_t coeff = 1.0) { return OperatorSum(OperatorProduct{}, coeff); }
    /// Canonicalize an arbitrary (possibly repeated-key) term list.
    static OperatorSum from_terms(std::vector<term_t> terms, double drop_tol = default_drop_tol);

    const std::vector<term_t>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    /// Coefficient of a canonical key (0 if absent).
    complex_t coefficient(const OperatorProduct& p) const;

    std::string str() const;

    friend bool operator==(const OperatorSum&, const OperatorSum&) = default;

  private:
    std::vector<term_t> terms_; // sorted by canonical key, no zero coefficients
    friend class TermAccumulator;
};

/// Hash-map accumulator used by every arithmetic kernel. Internal accumulation
/// order follows insertion history (deterministic for a fixed binary and
/// input); build() sorts into the canonical key order.
class TermAccumulator {
  public:
    TermAccumulator() = default;
    explicit TermAccumulator(std::size_t expected) { map_.reserve(expected); }

    void add(const OperatorProduct& p, complex_t c) {
        if (c != 0.0)
            map_[p] += c;
    }
    void add_scaled(const OperatorSum& x, complex_t scale);

    OperatorSum build(double drop_tol = default_drop_tol) const;

    void clear() { map_.clear(); }

  private:
    std::unordered_map<OperatorProduct, complex_t, ProductHash> map_;
};

/// One operator of a raw (not normal-ordered) string.
struct RawOp {
    OrbitalIndex index = 0;
    bool create = false;
};

/// Expand the product x*y into canonical terms with integer signs.
/// Every contraction subset of (x.ann & y.cre) yields one candidate term; the
/// callback receives (product, sign) with sign in {-1, +1}. Terms that vanish
/// by nilpotency are skipped. Repeated keys may be emitted (e.g. never here:
/// distinct subsets give distinct keys), so callers accumulate.
template <typename F>
void expand_product(const OperatorProduct& x, const OperatorProduct& y, F&& emit) {
    // Move x's annihilators (ascending index order = right-to-left in the
    // physical string) through y's creators. At an index shared with the
    // current creator set the pair contracts or survives as a number factor;
    // at any other index the operators anticommute.
    auto rec = [&](auto&& self, std::uint64_t s_rest, std::uint64_t kept, std::uint64_t ccur,
                   int sign) -> void {
        if (s_rest == 0) {
            if ((x.cre & ccur) != 0)
                return; // repeated creator
            if ((kept & y.ann) != 0)
                return; // repeated annihilator
            int s = sign;
            // interleave surviving y-creators into x's creator block
            for (std::uint64_t c = ccur; c;) {
                const int b = std::countr_zero(c);
                c &= c - 1;
                if (std::popcount(x.cre >> (b + 1)) & 1)
                    s = -s;
            }
            // interleave x's surviving annihilators into y's annihilator block
            for (std::uint64_t k = kept; k;) {
                const int b = std::countr_zero(k);
                k &= k - 1;
                if (std::popcount(y.ann >> (b + 1)) & 1)
                    s = -s;
            }
            emit(OperatorProduct{x.cre | ccur, kept | y.ann}, s);
            return;
        }
        const int b = std::countr_zero(s_rest);
        const std::uint64_t bit = 1ull << b;
        const std::uint64_t rest = s_rest & (s_rest - 1);
        if (ccur & bit) {
            // contract a_b with a+_b
            const int csign = (std::popcount(ccur & (bit - 1)) & 1) ? -sign : sign;
            self(self, rest, kept, ccur & ~bit, csign);
            // keep the -a+_b a_b part and push a_b further right
            const int ksign = (std::popcount(ccur) & 1) ? -sign : sign;
            self(self, rest, kept | bit, ccur, ksign);
        } else {
            const int ksign = (std::popcount(ccur) & 1) ? -sign : sign;
            self(self, rest, kept | bit, ccur, ksign);
        }
    };
    rec(rec, x.ann, 0ull, y.cre, +1);
}

/// Fully normal order a raw operator string over the physical vacuum using
/// {a_p, a+_q} = delta_pq, {a_p, a_q} = {a+_p, a+_q} = 0.
OperatorSum normal_order(std::span<const RawOp> raw, complex_t coeff = 1.0,
                         double drop_tol = default_drop_tol);
OperatorSum normal_order(std::initializer_list<RawOp> raw, complex_t coeff = 1.0,
                         double drop_tol = default_drop_tol);

/// Exact product, normal ordered and canonical.
OperatorSum multiply(const OperatorSum& x, const OperatorSum& y,
                     double drop_tol = default_drop_tol);

/// multiply(x, y) - multiply(y, x).
OperatorSum commutator(const OperatorSum& x, const OperatorSum& y,
                       double drop_tol = default_drop_tol);

/// Hermitian conjugate: coefficients conjugated, each product's masks swapped.
OperatorSum adjoint(const OperatorSum& x);

/// y + alpha * x.
OperatorSum axpy(complex_t alpha, const OperatorSum& x, const OperatorSum& y,
                 double drop_tol = default_drop_tol);

OperatorSum operator+(const OperatorSum& x, const OperatorSum& y);
OperatorSum operator-(const OperatorSum& x, const OperatorSum& y);
OperatorSum operator*(complex_t alpha, const OperatorSum& x);

/// Split a sum by doubled rank (|creators| + |annihilators|); reassembles to x.
std::map<int, OperatorSum> rank_partition(const OperatorSum& x);

/// l2 norm of the coefficient vector over canonical keys.
double euclidean_norm(const OperatorSum& x);

/// l2 norm of x - adjoint(x); 0 for Hermitian sums.
double hermiticity_residual(const OperatorSum& x);

/// max_p |coeff_x(p) - coeff_y(p)| over the union of keys.
double max_coefficient_difference(const OperatorSum& x, const OperatorSum& y);

} // namespace fermirot
