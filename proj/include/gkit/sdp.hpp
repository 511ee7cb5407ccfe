#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gkit/bilinear.hpp"
#include "gkit/constants.hpp"
#include "gkit/errors.hpp"
#include "gkit/parallel.hpp"
#include "gkit/rng.hpp"
#include "gkit/space.hpp"

namespace gkit {

struct SdpOptions {
    int rank = 0;            ///< 0 = auto: ceil(sqrt(2(n+m))) + 1
    int max_iters = 5000;
    int restarts = 8;
    double grad_tol = 1e-8;  ///< Riemannian gradient norm declaring convergence
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Feasible point of the unit-vector relaxation: rows of U and V are
/// unit vectors in R^d and value = sum_ij a_ij <u_i, v_j>.
struct SdpSolution {
    MatrixXd U;
    MatrixXd V;
    double value = 0.0;
    int rank = 0;
    int restarts_used = 0;
    bool converged = false;
};

namespace detail {

inline void normalize_rows_or_keep(MatrixXd& target, const MatrixXd& direction) {
    for (int i = 0; i < target.rows(); ++i) {
        const double n = direction.row(i).norm();
        if (n > 1e-300) target.row(i) = direction.row(i) / n;
        // a vanishing block gradient leaves the row where it is
    }
}

/// Best-ascent run from a fixed initial point.  Each half-step replaces a
/// whole row block by its exact maximizer given the other block, so the
/// objective is nondecreasing; convergence is declared on the joint
/// Riemannian gradient.
inline SdpSolution ascend(const MatrixXd& a, MatrixXd u, MatrixXd v, const SdpOptions& opts) {
    const int d = static_cast<int>(u.cols());
    SdpSolution sol;
    sol.rank = d;
    MatrixXd gu = a * v;
    bool converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        normalize_rows_or_keep(u, gu);
        const MatrixXd gv = a.transpose() * u;
        normalize_rows_or_keep(v, gv);
        gu = a * v;
        // tangential residual of the U block against the refreshed V
        double g2 = 0.0;
        for (int i = 0; i < u.rows(); ++i) {
            const double radial = gu.row(i).dot(u.row(i));
            g2 += (gu.row(i) - radial * u.row(i)).squaredNorm();
        }
        if (std::sqrt(g2) < opts.grad_tol) {
            converged = true;
            break;
        }
    }
    sol.U = std::move(u);
    sol.V = std::move(v);
    sol.value = (a.cwiseProduct(sol.U * sol.V.transpose())).sum();
    sol.converged = converged;
    return sol;
}

inline MatrixXd random_unit_rows(int rows, int cols, Rng& rng) {
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
        const double n = m.row(i).norm();
        if (n > 1e-300)
            m.row(i) /= n;
        else
            m.row(i) = Eigen::RowVectorXd::Unit(cols, 0);
    }
    return m;
}

} // namespace detail

/// Low-rank solve of the Grothendieck relaxation
///   max sum_ij a_ij <u_i, v_j>  over unit vectors u_i, v_j in R^rank.
/// Restart 0 starts from the singular vectors of the matrix, the rest from
/// seeded random points; `extra_starts` may supply further warm starts.
/// The returned value is always a valid lower bound on the relaxation
/// optimum (the iterate stays feasible throughout).
inline SdpSolution sdp_value(const BilinearForm& phi, SdpOptions opts = {},
                             const std::vector<std::pair<MatrixXd, MatrixXd>>& extra_starts = {}) {
    const MatrixXd& a = phi.coeffs;
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    if (opts.rank == 0)
        opts.rank = static_cast<int>(std::ceil(std::sqrt(2.0 * (n + m)))) + 1;
    if (opts.rank < 1) throw InvalidInput("sdp_value: rank must be >= 1");
    if (opts.restarts < 1) opts.restarts = 1;
    const int d = opts.rank;

    for (const auto& ws : extra_starts)
        if (ws.first.rows() != n || ws.second.rows() != m || ws.first.cols() != d ||
            ws.second.cols() != d)
            throw DimensionMismatch("sdp_value: warm start has wrong shape");

    const int total = opts.restarts + static_cast<int>(extra_starts.size());
    std::vector<SdpSolution> results(static_cast<std::size_t>(total));

    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);

    detail::parallel_chunks(0, total, opts.threads, [&](long lo, long hi) {
        for (long r = lo; r < hi; ++r) {
            MatrixXd u0, v0;
            if (r < opts.restarts && r == 0) {
                // spectral initialization
                u0 = MatrixXd::Zero(n, d);
                v0 = MatrixXd::Zero(m, d);
                const int c = std::min<int>(d, static_cast<int>(svd.singularValues().size()));
                u0.leftCols(c) = svd.matrixU().leftCols(c);
                v0.leftCols(c) = svd.matrixV().leftCols(c);
                detail::normalize_rows_or_keep(u0, u0);
                detail::normalize_rows_or_keep(v0, v0);
                for (int i = 0; i < n; ++i)
                    if (u0.row(i).norm() < 0.5) u0.row(i) = Eigen::RowVectorXd::Unit(d, 0);
                for (int j = 0; j < m; ++j)
                    if (v0.row(j).norm() < 0.5) v0.row(j) = Eigen::RowVectorXd::Unit(d, 0);
            } else if (r < opts.restarts) {
                Rng rng = substream(opts.seed, "sdp_restart", static_cast<std::uint64_t>(r));
                u0 = detail::random_unit_rows(n, d, rng);
                v0 = detail::random_unit_rows(m, d, rng);
            } else {
                const auto& ws = extra_starts[static_cast<std::size_t>(r - opts.restarts)];
                u0 = ws.first;
                v0 = ws.second;
            }
            results[static_cast<std::size_t>(r)] = detail::ascend(a, u0, v0, opts);
        }
    });

    // deterministic best-of reduction: max value, ties to the smaller index
    int best = 0;
    for (int r = 1; r < total; ++r)
        if (results[static_cast<std::size_t>(r)].value > results[static_cast<std::size_t>(best)].value)
            best = r;
    SdpSolution sol = std::move(results[static_cast<std::size_t>(best)]);
    sol.restarts_used = total;
    return sol;
}

/// Embed a sign pair on the first coordinate axis as a feasible
/// (rank-one) starting point of the relaxation.
inline std::pair<MatrixXd, MatrixXd> embed_signs(const VectorXd& x, const VectorXd& y, int rank) {
    MatrixXd u = MatrixXd::Zero(x.size(), rank);
    MatrixXd v = MatrixXd::Zero(y.size(), rank);
    for (int i = 0; i < x.size(); ++i) u(i, 0) = (x[i] < 0.0) ? -1.0 : 1.0;
    for (int j = 0; j < y.size(); ++j) v(j, 0) = (y[j] < 0.0) ? -1.0 : 1.0;
    return {std::move(u), std::move(v)};
}

struct RoundedSigns {
    VectorXd x;
    VectorXd y;
    double value = 0.0;
};

/// Random-hyperplane rounding of an SDP solution.  The returned value is
/// attained by an actual sign pair, so it never exceeds the exact
/// (l-inf, l-inf) norm.
inline RoundedSigns round_signs(const SdpSolution& sol, const BilinearForm& phi, int samples,
                                std::uint64_t seed) {
    const MatrixXd& a = phi.coeffs;
    if (sol.U.rows() != a.rows() || sol.V.rows() != a.cols())
        throw DimensionMismatch("round_signs: solution does not match the form");
    const int d = static_cast<int>(sol.U.cols());
    Rng rng = substream(seed, "hyperplane");
    RoundedSigns best;
    best.x = VectorXd::Ones(a.rows());
    best.y = VectorXd::Ones(a.cols());
    best.value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(samples, 1); ++s) {
        VectorXd g(d);
        for (int i = 0; i < d; ++i) g[i] = rng.next_gaussian();
        VectorXd x(a.rows()), y(a.cols());
        const VectorXd ug = sol.U * g;
        const VectorXd vg = sol.V * g;
        for (int i = 0; i < x.size(); ++i) x[i] = (ug[i] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < y.size(); ++j) y[j] = (vg[j] < 0.0) ? -1.0 : 1.0;
        double v = x.dot(a * y);
        if (v < 0.0) {
            y = -y;
            v = -v;
        }
        if (v > best.value) {
            best.x = x;
            best.y = y;
            best.value = v;
        }
    }
    return best;
}

struct GrothendieckRatioReport {
    double ratio = 1.0;
    double sdp_value = 0.0;
    double norm = 0.0;
    bool lower_ok = true;  ///< ratio >= 1 - 1e-9 (relaxation dominates the sign optimum)
    bool upper_ok = true;  ///< ratio <= kg_real_upper + 1e-6; a violation flags a solver/oracle defect
    SdpSolution solution;
    NormCertificate norm_cert;
};

/// Relaxation value over exact sign-enumeration norm for an
/// (l-inf, l-inf) form.  The solver pool includes a warm start embedded
/// from the sign-enumeration witness, so the reported ratio can only dip
/// below 1 by rounding error.
inline GrothendieckRatioReport grothendieck_ratio(const BilinearForm& phi,
                                                  const Constants& constants,
                                                  SdpOptions sdp_opts = {},
                                                  const NormOptions& norm_opts = {}) {
    if (phi.domain_e.tag != NormTag::LInf || phi.domain_f.tag != NormTag::LInf)
        throw NotInfInfDomains("grothendieck_ratio: both domains must carry the l-inf tag");
    GrothendieckRatioReport report;
    report.norm_cert = bilinear_norm(phi, norm_opts);
    report.norm = report.norm_cert.upper;

    if (sdp_opts.rank == 0)
        sdp_opts.rank =
            static_cast<int>(std::ceil(std::sqrt(2.0 * (phi.coeffs.rows() + phi.coeffs.cols())))) + 1;
    std::vector<std::pair<MatrixXd, MatrixXd>> warm;
    if (report.norm_cert.witness)
        warm.push_back(embed_signs(report.norm_cert.witness->first,
                                   report.norm_cert.witness->second, sdp_opts.rank));
    report.solution = sdp_value(phi, sdp_opts, warm);
    report.sdp_value = report.solution.value;

    report.ratio = (report.norm == 0.0) ? 1.0 : report.sdp_value / report.norm;
    report.lower_ok = report.ratio >= 1.0 - 1e-9;
    report.upper_ok = report.ratio <= Constants::kg_real_upper + 1e-6;
    return report;
}

/// Hilbert-space factorization phi(e_i, f_j) = <u_i, v_j> together with
/// the operator norms of e -> U'e and f -> V'f under the declared domain
/// norms.
struct FactorizationWitness {
    MatrixXd U;
    MatrixXd V;
    double norm_a = 0.0;
    double norm_b = 0.0;
    SpaceSpec domain_e;
    SpaceSpec domain_f;
    NormCertificate form_norm;  ///< norm of the factorized form itself

    int rank() const { return static_cast<int>(U.cols()); }

    /// max_ij |<u_i, v_j> - coeffs_ij|
    double reconstruction_error(const MatrixXd& coeffs) const {
        return (U * V.transpose() - coeffs).cwiseAbs().maxCoeff();
    }

    /// Whether this particular witness satisfies norm_a * norm_b <=
    /// kg_effective * ||phi||.  Existence of some witness with that bound
    /// is guaranteed; this one need not attain it.
    bool kg_bound_holds(const Constants& constants) const {
        return norm_a * norm_b <= constants.kg_effective * form_norm.upper + 1e-9;
    }
};

/// Balanced SVD factorization: coeffs = P S Q' gives U = P S^{1/2},
/// V = Q S^{1/2}.  Exact reconstruction; the operator norms are computed
/// for the declared domains (sign enumeration for l-inf factors).
inline FactorizationWitness represent(const BilinearForm& phi, const NormOptions& opts = {}) {
    Eigen::JacobiSVD<MatrixXd> svd(phi.coeffs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd sqrt_s = svd.singularValues().cwiseMax(0.0).cwiseSqrt();
    FactorizationWitness w;
    w.U = svd.matrixU() * sqrt_s.asDiagonal();
    w.V = svd.matrixV() * sqrt_s.asDiagonal();
    w.domain_e = phi.domain_e;
    w.domain_f = phi.domain_f;
    const int d = w.rank();
    w.norm_a = bilinear_norm(BilinearForm(w.U, phi.domain_e, SpaceSpec::l2(d)), opts).upper;
    w.norm_b = bilinear_norm(BilinearForm(w.V, phi.domain_f, SpaceSpec::l2(d)), opts).upper;
    w.form_norm = bilinear_norm(phi, opts);
    return w;
}

} // namespace gkit
