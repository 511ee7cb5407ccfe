#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "gkit/errors.hpp"
#include "gkit/rng.hpp"

namespace gkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class NormTag { L1, L2, LInf, WeightedL2 };

inline const char* to_string(NormTag t) {
    switch (t) {
        case NormTag::L1: return "l1";
        case NormTag::L2: return "l2";
        case NormTag::LInf: return "linf";
        case NormTag::WeightedL2: return "wl2";
    }
    return "?";
}

/// A finite-dimensional normed space: a dimension plus one of four norm
/// tags.  WeightedL2 carries strictly positive weights and models L2 of
/// a discrete (quadrature) measure; its dual has inverse weights.
struct SpaceSpec {
    int dim = 0;
    NormTag tag = NormTag::L2;
    VectorXd weights; // nonempty iff tag == WeightedL2

    SpaceSpec() = default;
    SpaceSpec(int d, NormTag t) : dim(d), tag(t) { validate(); }
    SpaceSpec(int d, NormTag t, VectorXd w) : dim(d), tag(t), weights(std::move(w)) { validate(); }

    static SpaceSpec l1(int d) { return {d, NormTag::L1}; }
    static SpaceSpec l2(int d) { return {d, NormTag::L2}; }
    static SpaceSpec linf(int d) { return {d, NormTag::LInf}; }
    static SpaceSpec weighted_l2(VectorXd w) {
        return {static_cast<int>(w.size()), NormTag::WeightedL2, std::move(w)};
    }

    void validate() const {
        if (dim < 1) throw InvalidInput("SpaceSpec: dim must be >= 1");
        if (tag == NormTag::WeightedL2) {
            if (weights.size() != dim)
                throw DimensionMismatch("SpaceSpec: weights length != dim");
            for (int i = 0; i < dim; ++i)
                if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
                    throw InvalidInput("SpaceSpec: weights must be strictly positive and finite");
        } else if (weights.size() != 0) {
            throw InvalidInput("SpaceSpec: weights only allowed with the wl2 tag");
        }
    }

    bool is_hilbert() const { return tag == NormTag::L2 || tag == NormTag::WeightedL2; }

    /// Dual space under the standard pairing <y,x> = sum y_i x_i.
    SpaceSpec dual() const {
        switch (tag) {
            case NormTag::L1: return linf(dim);
            case NormTag::LInf: return l1(dim);
            case NormTag::L2: return l2(dim);
            case NormTag::WeightedL2: return weighted_l2(weights.cwiseInverse());
        }
        return l2(dim);
    }

    double norm(const VectorXd& x) const {
        if (x.size() != dim) throw DimensionMismatch("SpaceSpec::norm: vector length != dim");
        switch (tag) {
            case NormTag::L1: return x.lpNorm<1>();
            case NormTag::L2: return x.norm();
            case NormTag::LInf: return x.lpNorm<Eigen::Infinity>();
            case NormTag::WeightedL2: return std::sqrt(x.dot(weights.cwiseProduct(x)));
        }
        return 0.0;
    }

    /// Diagonal scaling that carries this space isometrically onto plain
    /// l2 (identity for L2, sqrt(w) for WeightedL2; only meaningful for
    /// the Hilbertian tags).
    VectorXd sqrt_weights() const {
        if (tag == NormTag::WeightedL2) return weights.cwiseSqrt();
        return VectorXd::Ones(dim);
    }

    /// Largest l2 norm attained on this space's unit ball (norm
    /// equivalence constant used for cheap upper bounds).
    double max_l2_on_ball() const {
        switch (tag) {
            case NormTag::L1: return 1.0;
            case NormTag::L2: return 1.0;
            case NormTag::LInf: return std::sqrt(static_cast<double>(dim));
            case NormTag::WeightedL2: return 1.0 / std::sqrt(weights.minCoeff());
        }
        return 1.0;
    }

    /// Largest l-inf norm attained on this space's unit ball.
    double max_linf_on_ball() const {
        switch (tag) {
            case NormTag::L1: return 1.0;
            case NormTag::L2: return 1.0;
            case NormTag::LInf: return 1.0;
            case NormTag::WeightedL2: return 1.0 / std::sqrt(weights.minCoeff());
        }
        return 1.0;
    }

    bool operator==(const SpaceSpec& o) const {
        return dim == o.dim && tag == o.tag && weights.size() == o.weights.size() &&
               (weights.size() == 0 || weights == o.weights);
    }
};

/// argmax_{||y|| <= 1 in `space`} r.y, the closed-form maximizer of a
/// linear functional over the unit ball.  The attained value is the dual
/// norm of r.
inline VectorXd ball_argmax(const SpaceSpec& space, const VectorXd& r) {
    if (r.size() != space.dim) throw DimensionMismatch("ball_argmax: length mismatch");
    switch (space.tag) {
        case NormTag::L1: {
            int best = 0;
            r.cwiseAbs().maxCoeff(&best);
            VectorXd y = VectorXd::Zero(space.dim);
            y[best] = (r[best] < 0.0) ? -1.0 : 1.0;
            return y;
        }
        case NormTag::LInf: {
            VectorXd y(space.dim);
            for (int i = 0; i < space.dim; ++i) y[i] = (r[i] < 0.0) ? -1.0 : 1.0;
            return y;
        }
        case NormTag::L2: {
            const double n = r.norm();
            if (n == 0.0) return VectorXd::Zero(space.dim);
            return r / n;
        }
        case NormTag::WeightedL2: {
            // maximize r.y over y' D_w y <= 1: y = D_w^{-1} r / dual_norm(r)
            const VectorXd scaled = r.cwiseQuotient(space.weights);
            const double dn = std::sqrt(r.dot(scaled));
            if (dn == 0.0) return VectorXd::Zero(space.dim);
            return scaled / dn;
        }
    }
    return VectorXd::Zero(space.dim);
}

/// A random extreme point of the unit ball (sign vertex for LInf, signed
/// basis vector for L1, uniform sphere point for the Hilbert tags).
inline VectorXd random_extreme_point(const SpaceSpec& space, Rng& rng) {
    switch (space.tag) {
        case NormTag::L1: {
            VectorXd y = VectorXd::Zero(space.dim);
            y[static_cast<int>(rng.next_below(static_cast<std::uint64_t>(space.dim)))] =
                rng.next_sign();
            return y;
        }
        case NormTag::LInf: {
            VectorXd y(space.dim);
            for (int i = 0; i < space.dim; ++i) y[i] = rng.next_sign();
            return y;
        }
        case NormTag::L2:
        case NormTag::WeightedL2: {
            VectorXd y(space.dim);
            for (int i = 0; i < space.dim; ++i) y[i] = rng.next_gaussian();
            const double n = space.norm(y);
            if (n == 0.0) { VectorXd e = VectorXd::Zero(space.dim); e[0] = 1.0 / space.norm(VectorXd::Unit(space.dim, 0)); return e; }
            return y / n;
        }
    }
    return VectorXd::Zero(space.dim);
}

// ---------------------------------------------------------------------------
// Norm certificates
// ---------------------------------------------------------------------------

enum class CertMethod { ExactSVD, ExactSignEnum, NuclearSVD, SampledDual, RepresentationSearch };

inline const char* to_string(CertMethod m) {
    switch (m) {
        case CertMethod::ExactSVD: return "exact_svd";
        case CertMethod::ExactSignEnum: return "exact_sign_enum";
        case CertMethod::NuclearSVD: return "nuclear_svd";
        case CertMethod::SampledDual: return "sampled_dual";
        case CertMethod::RepresentationSearch: return "representation_search";
    }
    return "?";
}

/// Interval answer [lower, upper] for a norm, with the method that
/// produced it and, when available, a witness attaining `lower`.
struct NormCertificate {
    double lower = 0.0;
    double upper = 0.0;
    CertMethod method = CertMethod::SampledDual;
    /// vector pair attaining `lower` (bilinear-norm certificates)
    std::optional<std::pair<VectorXd, VectorXd>> witness;
    /// matrix dual certificate (nuclear-norm path)
    std::optional<MatrixXd> dual_witness;

    bool exact(double rel = 1e-10) const {
        return upper - lower <= rel * std::max(1.0, upper);
    }
};

} // namespace gkit
