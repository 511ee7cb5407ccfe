#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gkit/bilinear.hpp"
#include "gkit/errors.hpp"
#include "gkit/space.hpp"

namespace gkit {

enum class PartialSide { LeftT, RightS };

/// Partial-integration operator of a bilinear form: LeftT maps e to the
/// functional f -> phi(e, f) (representing vector coeffs' e), RightS maps
/// f to e -> phi(e, f) (vector coeffs f).  Its operator norm, source norm
/// to dual-target norm, equals the norm of the form.
struct PartialOperator {
    MatrixXd matrix;
    SpaceSpec source;
    SpaceSpec target_dual_of;
    PartialSide side = PartialSide::LeftT;

    static PartialOperator from_form(const BilinearForm& phi, PartialSide side) {
        PartialOperator op;
        op.side = side;
        if (side == PartialSide::LeftT) {
            op.matrix = phi.coeffs.transpose();
            op.source = phi.domain_e;
            op.target_dual_of = phi.domain_f;
        } else {
            op.matrix = phi.coeffs;
            op.source = phi.domain_f;
            op.target_dual_of = phi.domain_e;
        }
        return op;
    }

    VectorXd apply(const VectorXd& v) const {
        if (v.size() != source.dim)
            throw DimensionMismatch("PartialOperator::apply: vector does not match source");
        return matrix * v;
    }

    /// Operator norm under the declared source / dual-target norms.
    NormCertificate norm(const NormOptions& opts = {}) const {
        return bilinear_norm(BilinearForm(matrix.transpose(), source, target_dual_of), opts);
    }
};

/// Representing vector of the partial functional phi(v, .) or phi(., v).
inline VectorXd partial_apply(const BilinearForm& phi, PartialSide side, const VectorXd& v) {
    return PartialOperator::from_form(phi, side).apply(v);
}

struct FubiniValues {
    double via_t = 0.0;
    double via_s = 0.0;
    double direct = 0.0;

    double max_spread() const {
        const double lo = std::min({via_t, via_s, direct});
        const double hi = std::max({via_t, via_s, direct});
        return hi - lo;
    }
    double rel_spread() const {
        const double scale = std::max({1.0, std::abs(via_t), std::abs(via_s), std::abs(direct)});
        return max_spread() / scale;
    }
};

/// The two iterated-integration orders against the direct pairing.  All
/// three agree up to rounding; the identity is exact in exact arithmetic.
inline FubiniValues fubini_evaluate(const BilinearForm& phi, const TensorElement& x) {
    if (!(x.space_e == phi.domain_e) || !(x.space_f == phi.domain_f))
        throw DimensionMismatch("fubini_evaluate: tensor element spaces do not match the form");
    FubiniValues out;
    for (const auto& [ve, vf] : x.terms) {
        out.via_t += (phi.coeffs.transpose() * ve).dot(vf); // T path: integrate e first
        out.via_s += (phi.coeffs * vf).dot(ve);             // S path: integrate f first
    }
    out.direct = evaluate(phi, x);
    return out;
}

/// Commutation check of the operator form: pairs (T (x) I)x and
/// (I (x) S)x against the direct value, and verifies on the standard
/// basis that the pairing determines the operator uniquely.  Returns the
/// largest absolute discrepancy observed.
inline double operator_form_check(const BilinearForm& phi, const TensorElement& x) {
    const FubiniValues v = fubini_evaluate(phi, x);
    double dev = std::max(std::abs(v.via_t - v.direct), std::abs(v.via_s - v.direct));

    // uniqueness on the basis: any matrix reproducing the pairing on all
    // basis pairs must equal the partial operator entrywise
    const PartialOperator t = PartialOperator::from_form(phi, PartialSide::LeftT);
    MatrixXd rebuilt(phi.domain_f.dim, phi.domain_e.dim);
    for (int i = 0; i < phi.domain_e.dim; ++i)
        for (int j = 0; j < phi.domain_f.dim; ++j) {
            const TensorElement pair_ij({{VectorXd::Unit(phi.domain_e.dim, i),
                                          VectorXd::Unit(phi.domain_f.dim, j)}},
                                        phi.domain_e, phi.domain_f);
            rebuilt(j, i) = evaluate(phi, pair_ij);
        }
    dev = std::max(dev, (rebuilt - t.matrix).cwiseAbs().maxCoeff());
    return dev;
}

} // namespace gkit
