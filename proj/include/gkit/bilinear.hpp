#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdint>
#include <mutex>
#include <utility>
#include <vector>

#include "gkit/constants.hpp"
#include "gkit/errors.hpp"
#include "gkit/parallel.hpp"
#include "gkit/rng.hpp"
#include "gkit/space.hpp"

namespace gkit {

/// A continuous bilinear form on a pair of finite-dimensional normed
/// spaces, represented by its coefficient matrix: phi(e, f) = e' A f.
struct BilinearForm {
    MatrixXd coeffs;
    SpaceSpec domain_e;
    SpaceSpec domain_f;

    BilinearForm(MatrixXd a, SpaceSpec e, SpaceSpec f)
        : coeffs(std::move(a)), domain_e(std::move(e)), domain_f(std::move(f)) {
        if (coeffs.rows() != domain_e.dim || coeffs.cols() != domain_f.dim)
            throw DimensionMismatch("BilinearForm: coefficient matrix does not match domains");
        if (!coeffs.allFinite()) throw NonFiniteEntries("BilinearForm: non-finite coefficients");
    }

    BilinearForm scaled(double c) const { return {c * coeffs, domain_e, domain_f}; }
};

/// A finite tensor-product element sum_i e_i (x) f_i.  The representation
/// is not unique; two elements with the same coefficient matrix
/// sum_i e_i f_i' act identically on every bilinear form.
struct TensorElement {
    std::vector<std::pair<VectorXd, VectorXd>> terms;
    SpaceSpec space_e;
    SpaceSpec space_f;

    TensorElement(std::vector<std::pair<VectorXd, VectorXd>> t, SpaceSpec e, SpaceSpec f)
        : terms(std::move(t)), space_e(std::move(e)), space_f(std::move(f)) {
        for (const auto& [ve, vf] : terms) {
            if (ve.size() != space_e.dim || vf.size() != space_f.dim)
                throw DimensionMismatch("TensorElement: term dimensions do not match spaces");
            if (!ve.allFinite() || !vf.allFinite())
                throw NonFiniteEntries("TensorElement: non-finite term entries");
        }
    }

    static TensorElement zero(SpaceSpec e, SpaceSpec f) { return {{}, std::move(e), std::move(f)}; }

    /// Rank-one expansion of a coefficient matrix via its SVD.
    static TensorElement from_matrix(const MatrixXd& m, SpaceSpec e, SpaceSpec f) {
        if (m.rows() != e.dim || m.cols() != f.dim)
            throw DimensionMismatch("TensorElement::from_matrix: matrix does not match spaces");
        Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        std::vector<std::pair<VectorXd, VectorXd>> terms;
        const auto& s = svd.singularValues();
        for (int k = 0; k < s.size(); ++k) {
            if (s[k] <= 0.0) continue;
            terms.emplace_back(s[k] * svd.matrixU().col(k), svd.matrixV().col(k));
        }
        return {std::move(terms), std::move(e), std::move(f)};
    }

    MatrixXd coefficient_matrix() const {
        MatrixXd m = MatrixXd::Zero(space_e.dim, space_f.dim);
        for (const auto& [ve, vf] : terms) m.noalias() += ve * vf.transpose();
        return m;
    }

    /// Cost of this particular representation, sum_i ||e_i|| ||f_i||.
    double representation_cost() const {
        double c = 0.0;
        for (const auto& [ve, vf] : terms) c += space_e.norm(ve) * space_f.norm(vf);
        return c;
    }
};

struct NormOptions {
    int enum_limit = 22;     ///< max dimension of an enumerated sign side (2^(d-1) patterns)
    int dual_samples = 512;  ///< extreme-point draws for sampled-dual lower bounds
    int polish_rounds = 20;  ///< alternating-ascent steps applied to the best sample
    std::uint64_t seed = 0;
    int threads = 1;
};

namespace detail {

/// Maximize value_fn over sign vectors x in {+-1}^d with x[0] fixed to +1
/// (the objective is even).  Every pattern is evaluated from scratch so the
/// returned maximum is bitwise independent of how the range is split across
/// threads; ties break toward the smaller pattern index.
template <class ValueFn>
std::pair<double, VectorXd> sign_enum_max(int d, int threads, ValueFn&& value_fn) {
    const std::uint64_t count = (d >= 1) ? (1ULL << (d - 1)) : 1;
    double best_val = -1.0;
    std::uint64_t best_idx = 0;
    std::mutex merge_mutex;
    detail::parallel_chunks(0, static_cast<long>(count), threads, [&](long lo, long hi) {
        VectorXd x(d);
        double local_val = -1.0;
        std::uint64_t local_idx = 0;
        for (long p = lo; p < hi; ++p) {
            const std::uint64_t bits = static_cast<std::uint64_t>(p);
            x[0] = 1.0;
            for (int i = 1; i < d; ++i) x[i] = ((bits >> (i - 1)) & 1ULL) ? -1.0 : 1.0;
            const double v = value_fn(x);
            if (v > local_val || (v == local_val && static_cast<std::uint64_t>(p) < local_idx)) {
                local_val = v;
                local_idx = static_cast<std::uint64_t>(p);
            }
        }
        std::scoped_lock lock(merge_mutex);
        if (local_val > best_val || (local_val == best_val && local_idx < best_idx)) {
            best_val = local_val;
            best_idx = local_idx;
        }
    });
    VectorXd x(d);
    x[0] = 1.0;
    for (int i = 1; i < d; ++i) x[i] = ((best_idx >> (i - 1)) & 1ULL) ? -1.0 : 1.0;
    return {best_val, x};
}

inline double spectral_norm(const MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

/// Sampled-dual interval for norm pairs with no exact path: the lower
/// bound is the best value over random extreme points polished by
/// alternating closed-form ascent, the upper bound the cheapest norm
/// equivalence through the spectral norm.
inline NormCertificate sampled_dual_norm(const MatrixXd& a, const SpaceSpec& e,
                                         const SpaceSpec& f, const NormOptions& opts) {
    Rng rng = substream(opts.seed, "sampled_dual");
    double best = 0.0;
    VectorXd best_x = VectorXd::Zero(e.dim);
    VectorXd best_y = VectorXd::Zero(f.dim);
    for (int s = 0; s < opts.dual_samples; ++s) {
        VectorXd x = random_extreme_point(e, rng);
        VectorXd y = ball_argmax(f, a.transpose() * x);
        double v = std::abs(x.dot(a * y));
        if (v > best) {
            best = v;
            best_x = x;
            best_y = y;
        }
    }
    for (int r = 0; r < opts.polish_rounds; ++r) {
        best_x = ball_argmax(e, a * best_y);
        best_y = ball_argmax(f, a.transpose() * best_x);
    }
    best = std::max(best, std::abs(best_x.dot(a * best_y)));
    const double upper = e.max_l2_on_ball() * f.max_l2_on_ball() * spectral_norm(a);
    NormCertificate cert;
    cert.lower = best;
    cert.upper = std::max(upper, best);
    cert.method = CertMethod::SampledDual;
    cert.witness = std::make_pair(best_x, best_y);
    return cert;
}

} // namespace detail

/// Norm of a bilinear form, sup |phi(e,f)| over the product of unit
/// balls.  Exact for Hilbertian pairs (largest singular value after
/// weight conjugation), for pairs with an l1 factor (extreme-point
/// reduction), and for l-inf factors within the sign-enumeration limit;
/// remaining cases return a sampled-dual interval.
inline NormCertificate bilinear_norm(const BilinearForm& phi, const NormOptions& opts = {}) {
    const SpaceSpec& e = phi.domain_e;
    const SpaceSpec& f = phi.domain_f;
    const MatrixXd& a = phi.coeffs;

    // l1 factor: the unit ball has only 2*dim extreme points
    if (e.tag == NormTag::L1 || f.tag == NormTag::L1) {
        const bool on_rows = (e.tag == NormTag::L1);
        const SpaceSpec& other = on_rows ? f : e;
        const SpaceSpec other_dual = other.dual();
        const int count = on_rows ? e.dim : f.dim;
        double best = -1.0;
        int best_i = 0;
        for (int i = 0; i < count; ++i) {
            const VectorXd r = on_rows ? VectorXd(a.row(i)) : VectorXd(a.col(i));
            const double v = other_dual.norm(r);
            if (v > best) {
                best = v;
                best_i = i;
            }
        }
        const VectorXd r = on_rows ? VectorXd(a.row(best_i)) : VectorXd(a.col(best_i));
        VectorXd basis = VectorXd::Zero(count);
        basis[best_i] = 1.0;
        const VectorXd opt = ball_argmax(other, r);
        NormCertificate cert;
        cert.lower = cert.upper = best;
        cert.method = CertMethod::ExactSignEnum;
        cert.witness = on_rows ? std::make_pair(basis, opt) : std::make_pair(opt, basis);
        return cert;
    }

    // Hilbertian pair: conjugate the weights away and take sigma_max
    if (e.is_hilbert() && f.is_hilbert()) {
        const VectorXd se = e.sqrt_weights();
        const VectorXd sf = f.sqrt_weights();
        const MatrixXd m = se.cwiseInverse().asDiagonal() * a * sf.cwiseInverse().asDiagonal();
        Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        NormCertificate cert;
        cert.lower = cert.upper = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
        cert.method = CertMethod::ExactSVD;
        if (svd.singularValues().size() > 0) {
            cert.witness = std::make_pair(
                VectorXd(svd.matrixU().col(0).cwiseQuotient(se)),
                VectorXd(svd.matrixV().col(0).cwiseQuotient(sf)));
        }
        return cert;
    }

    // both l-inf: enumerate signs on the smaller side, the other side is
    // optimized in closed form (an l1 norm)
    if (e.tag == NormTag::LInf && f.tag == NormTag::LInf) {
        const bool enum_rows = (e.dim <= f.dim);
        const int d = enum_rows ? e.dim : f.dim;
        if (d > opts.enum_limit)
            throw EnumLimitExceeded("bilinear_norm: sign enumeration over " + std::to_string(d) +
                                    " dimensions exceeds enum_limit=" +
                                    std::to_string(opts.enum_limit));
        const MatrixXd m = enum_rows ? a : MatrixXd(a.transpose());
        auto [val, x] = detail::sign_enum_max(
            d, opts.threads, [&m](const VectorXd& x) { return (m.transpose() * x).lpNorm<1>(); });
        VectorXd y(m.cols());
        const VectorXd r = m.transpose() * x;
        for (int j = 0; j < y.size(); ++j) y[j] = (r[j] < 0.0) ? -1.0 : 1.0;
        NormCertificate cert;
        cert.lower = cert.upper = val;
        cert.method = CertMethod::ExactSignEnum;
        cert.witness = enum_rows ? std::make_pair(x, y) : std::make_pair(y, x);
        return cert;
    }

    // l-inf against a Hilbert factor: still exact by sign enumeration when
    // the l-inf side is small enough, otherwise a sampled interval
    {
        const bool inf_rows = (e.tag == NormTag::LInf);
        const SpaceSpec& inf_side = inf_rows ? e : f;
        const SpaceSpec& hil_side = inf_rows ? f : e;
        if (inf_side.dim <= opts.enum_limit) {
            const MatrixXd base = inf_rows ? a : MatrixXd(a.transpose());
            const MatrixXd m = base * hil_side.sqrt_weights().cwiseInverse().asDiagonal();
            auto [val, x] = detail::sign_enum_max(
                inf_side.dim, opts.threads,
                [&m](const VectorXd& x) { return (m.transpose() * x).norm(); });
            const VectorXd y = ball_argmax(hil_side, base.transpose() * x);
            NormCertificate cert;
            cert.lower = cert.upper = val;
            cert.method = CertMethod::ExactSignEnum;
            cert.witness = inf_rows ? std::make_pair(x, y) : std::make_pair(y, x);
            return cert;
        }
        return detail::sampled_dual_norm(a, e, f, opts);
    }
}

/// phi applied to a tensor element: sum_i phi(e_i, f_i).  This is the
/// value the induced functional takes on the element.
inline double evaluate(const BilinearForm& phi, const TensorElement& x) {
    if (!(x.space_e == phi.domain_e) || !(x.space_f == phi.domain_f))
        throw DimensionMismatch("evaluate: tensor element spaces do not match the form");
    double v = 0.0;
    for (const auto& [ve, vf] : x.terms) v += ve.dot(phi.coeffs * vf);
    return v;
}

/// Projective norm inf { sum ||e_i|| ||f_i|| } of a tensor element.
/// Exact (nuclear norm) for Hilbertian pairs; otherwise a two-sided
/// certificate: representation search from above, dual forms from below.
inline NormCertificate projective_norm(const TensorElement& x, const NormOptions& opts = {}) {
    const SpaceSpec& e = x.space_e;
    const SpaceSpec& f = x.space_f;
    const MatrixXd m = x.coefficient_matrix();

    if (e.is_hilbert() && f.is_hilbert()) {
        const VectorXd se = e.sqrt_weights();
        const VectorXd sf = f.sqrt_weights();
        const MatrixXd conj = se.asDiagonal() * m * sf.asDiagonal();
        Eigen::JacobiSVD<MatrixXd> svd(conj, Eigen::ComputeThinU | Eigen::ComputeThinV);
        NormCertificate cert;
        cert.lower = cert.upper = svd.singularValues().sum();
        cert.method = CertMethod::NuclearSVD;
        // dual certificate: <B, m> equals the nuclear norm while B has
        // bilinear-form norm 1 on (e, f)
        cert.dual_witness = MatrixXd(se.asDiagonal() * (svd.matrixU() * svd.matrixV().transpose()) *
                                     sf.asDiagonal());
        return cert;
    }

    // upper bounds: the given representation, the SVD-derived one, and the
    // entrywise basis expansion
    double upper = x.representation_cost();
    {
        Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double svd_cost = 0.0;
        for (int k = 0; k < svd.singularValues().size(); ++k) {
            const double s = svd.singularValues()[k];
            if (s <= 0.0) continue;
            svd_cost += s * e.norm(svd.matrixU().col(k)) * f.norm(svd.matrixV().col(k));
        }
        upper = std::min(upper, svd_cost);
    }
    {
        double entry_cost = 0.0;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                if (m(i, j) != 0.0)
                    entry_cost += std::abs(m(i, j)) * e.norm(VectorXd::Unit(e.dim, i)) *
                                  f.norm(VectorXd::Unit(f.dim, j));
        upper = std::min(upper, entry_cost);
    }

    // lower bounds by duality: |psi(x)| <= ||x||_pi for any form psi of
    // norm at most 1
    double lower = 0.0;
    std::optional<MatrixXd> best_dual;
    auto consider = [&](const MatrixXd& b, double b_norm_upper) {
        if (b_norm_upper <= 0.0) return;
        const double v = std::abs((b.cwiseProduct(m)).sum()) / b_norm_upper;
        if (v > lower) {
            lower = v;
            best_dual = b / b_norm_upper;
        }
    };

    // injective-norm witness: rank-one duals from the dual unit balls
    try {
        const NormCertificate inj =
            bilinear_norm(BilinearForm(m, e.dual(), f.dual()), opts);
        if (inj.witness) consider(inj.witness->first * inj.witness->second.transpose(), 1.0);
    } catch (const EnumLimitExceeded&) {
        const NormCertificate inj = detail::sampled_dual_norm(m, e.dual(), f.dual(), opts);
        if (inj.witness) consider(inj.witness->first * inj.witness->second.transpose(), 1.0);
    }

    // norming functionals of the given terms
    for (const auto& [ve, vf] : x.terms) {
        if (e.norm(ve) == 0.0 || f.norm(vf) == 0.0) continue;
        const VectorXd u = ball_argmax(e.dual(), ve);
        const VectorXd w = ball_argmax(f.dual(), vf);
        consider(u * w.transpose(), 1.0);
    }

    // a few random dense duals, normalized by an upper bound of their norm
    Rng rng = substream(opts.seed, "projective_dual");
    for (int s = 0; s < 16; ++s) {
        MatrixXd g(m.rows(), m.cols());
        for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) g(i, j) = rng.next_gaussian();
        double g_upper;
        try {
            g_upper = bilinear_norm(BilinearForm(g, e, f), opts).upper;
        } catch (const EnumLimitExceeded&) {
            g_upper = detail::sampled_dual_norm(g, e, f, opts).upper;
        }
        consider(g, g_upper);
    }

    NormCertificate cert;
    cert.lower = lower;
    cert.upper = upper;
    cert.method = CertMethod::RepresentationSearch;
    cert.dual_witness = best_dual;
    return cert;
}

struct GrothendieckCheck {
    bool member = false;
    NormCertificate norm;
};

/// Whether the functional induced by phi has norm at most kg_effective.
/// An interval certificate that straddles the threshold is reported as
/// InexactNorm rather than guessed.
inline GrothendieckCheck is_grothendieck(const BilinearForm& phi, const Constants& constants,
                                         const NormOptions& opts = {}) {
    const NormCertificate cert = bilinear_norm(phi, opts);
    const double kg = constants.kg_effective;
    if (cert.upper <= kg) return {true, cert};
    if (cert.lower > kg) return {false, cert};
    throw InexactNorm("is_grothendieck: certificate [" + std::to_string(cert.lower) + ", " +
                      std::to_string(cert.upper) + "] straddles kg_effective=" +
                      std::to_string(kg));
}

struct TotalVariationReport {
    double tv = 0.0;
    double norm = 0.0;
    double ratio = 1.0;
};

/// Total variation of the discrete bimeasure given by the coefficients of
/// an (l-inf, l-inf) form, against the form norm.  The ratio tv/norm is
/// reported, never asserted bounded.
inline TotalVariationReport total_variation_vs_norm(const BilinearForm& rho,
                                                    const NormOptions& opts = {}) {
    if (rho.domain_e.tag != NormTag::LInf || rho.domain_f.tag != NormTag::LInf)
        throw InvalidInput("total_variation_vs_norm: both domains must carry the l-inf tag");
    TotalVariationReport report;
    report.tv = rho.coeffs.cwiseAbs().sum();
    report.norm = bilinear_norm(rho, opts).upper;
    report.ratio = (report.norm == 0.0) ? 1.0 : report.tv / report.norm;
    return report;
}

} // namespace gkit
