#pragma once

#include "fermirot/algebra.h"

namespace fermirot {

enum class RotationKind { anti_hermitian, hermitian };

/// A single-product rotation generator. The anti-Hermitian kind conjugates by
/// exp(theta A) with A = T - T+, i.e. O -> exp(-theta A) O exp(theta A); the
/// Hermitian kind implements O -> exp(i theta H) O exp(-i theta H) with
/// H = T + T+. T carries no coefficient: scalar factors on a Hamiltonian term
/// are folded into theta by callers.
struct Generator {
    OperatorProduct t;
    RotationKind kind = RotationKind::anti_hermitian;
    double theta = 0.0;
};

/// Outcome of the closed-form case analysis. The middle product G [O,G] G is
/// either zero (class1) or reproduces +/-[O,G] (class4); trivial means [O,G]
/// itself vanishes and the rotation leaves O unchanged.
enum class RotationClass { trivial, class1, class4 };

/// Classification together with the two commutators every closed form needs.
struct ClassifiedCommutators {
    RotationClass cls = RotationClass::trivial;
    OperatorSum c; // [O, G]
    OperatorSum d; // [[O, G], G]
};

/// A = T - T+ (anti-Hermitian kind; identically zero for pure number products)
/// or H = T + T+ (Hermitian kind). theta is not folded in.
OperatorSum build_generator_sum(const Generator& g);

/// Decide which closed form applies to the product o under g by direct
/// computation of G [O,G] G. Throws StructuralViolation if the middle product
/// matches neither proven outcome. Comparison tolerance 1e-12.
RotationClass classify(const OperatorProduct& o, const Generator& g);

/// classify plus the commutators [O,G] and [[O,G],G] in one pass.
ClassifiedCommutators classify_commutators(const OperatorProduct& o, const Generator& g);

/// Memo table for classify_commutators. The classification and commutators do
/// not depend on theta, so drivers that rotate the same keys by the same
/// generators over and over (adaptive downfolding sweeps, Trotter loops) reuse
/// the entries. Results are identical to the uncached path.
class RotationCache {
  public:
    const ClassifiedCommutators& get(const OperatorProduct& o, const OperatorProduct& t,
                                     RotationKind kind);
    std::size_t size() const { return entries_.size(); }

  private:
    struct Key {
        OperatorProduct o;
        OperatorProduct t;
        RotationKind kind;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = ProductHash{}(k.o);
            h ^= ProductHash{}(k.t) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return h ^ (static_cast<std::size_t>(k.kind) + (h << 1));
        }
    };
    std::unordered_map<Key, ClassifiedCommutators, KeyHash> entries_;
};

/// Scalar prefactors of [O,G] and [[O,G],G] in the closed form for a given
/// class, kind, and angle (the identity coefficient of O itself is always 1).
std::pair<complex_t, complex_t> rotation_prefactors(RotationClass cls, RotationKind kind,
                                                    double theta);

/// Exact transformed operator for a single canonical product.
OperatorSum rotate_product(const OperatorProduct& o, const Generator& g);

/// Term-wise rotation of a sum (conjugation is linear). An optional cache
/// memoizes the per-key classification across calls.
OperatorSum rotate_sum(const OperatorSum& x, const Generator& g,
                       double drop_tol = default_drop_tol, RotationCache* cache = nullptr);

/// d/dtheta of rotate_product at g.theta. Anti-Hermitian generators only.
OperatorSum flow_derivative(const OperatorProduct& o, const Generator& g);

/// Closed-form exponential exp(theta A) = 1 + sin(theta) A + (1 - cos(theta)) A^2.
/// Anti-Hermitian generators only.
OperatorSum exp_generator(const Generator& g);

} // namespace fermirot
