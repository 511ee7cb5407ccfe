#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "gkit/constants.hpp"
#include "gkit/errors.hpp"
#include "gkit/parallel.hpp"
#include "gkit/space.hpp"

namespace gkit {

enum class QuadratureRule { Trapezoid, GaussLegendre, Custom };

inline const char* to_string(QuadratureRule r) {
    switch (r) {
        case QuadratureRule::Trapezoid: return "trapezoid";
        case QuadratureRule::GaussLegendre: return "gauss_legendre";
        case QuadratureRule::Custom: return "custom";
    }
    return "?";
}

/// Quadrature nodes and positive weights on an interval; the weights act
/// as the discrete measure of the weighted-L2 space the kernel operators
/// live on.
struct QuadratureGrid {
    VectorXd points;
    VectorXd weights;
    QuadratureRule rule = QuadratureRule::Custom;
    double a = 0.0;
    double b = 1.0;

    int size() const { return static_cast<int>(points.size()); }

    void validate() const {
        if (points.size() < 1 || points.size() != weights.size())
            throw DimensionMismatch("QuadratureGrid: points/weights size mismatch");
        for (int i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i]) || !std::isfinite(weights[i]) || weights[i] <= 0.0)
                throw InvalidInput("QuadratureGrid: weights must be positive and finite");
            if (i > 0 && !(points[i] > points[i - 1]))
                throw InvalidInput("QuadratureGrid: points must be strictly increasing");
        }
        if (rule != QuadratureRule::Custom) {
            const double len = b - a;
            if (std::abs(weights.sum() - len) > 1e-12 * std::max(1.0, std::abs(len)))
                throw InvalidInput("QuadratureGrid: weights do not sum to the interval length");
            if (points[0] < a - 1e-14 || points[points.size() - 1] > b + 1e-14)
                throw InvalidInput("QuadratureGrid: points outside the interval");
        }
    }

    bool same_geometry(const QuadratureGrid& o) const {
        return points.size() == o.points.size() && points == o.points && weights == o.weights;
    }
};

/// Build an n-point grid on [a, b].  Trapezoid: uniform nodes with halved
/// end weights.  GaussLegendre: Newton iteration on the Legendre
/// polynomial, nodes and weights mapped from [-1, 1].
inline QuadratureGrid make_grid(int n, double a, double b, QuadratureRule rule) {
    if (!(a < b)) throw InvalidInterval("make_grid: need a < b");
    if (n < 2) throw InvalidInput("make_grid: need at least 2 points");
    QuadratureGrid g;
    g.rule = rule;
    g.a = a;
    g.b = b;
    g.points.resize(n);
    g.weights.resize(n);
    if (rule == QuadratureRule::Trapezoid) {
        const double h = (b - a) / (n - 1);
        for (int i = 0; i < n; ++i) {
            g.points[i] = a + h * i;
            g.weights[i] = (i == 0 || i == n - 1) ? h / 2.0 : h;
        }
        g.points[n - 1] = b;
    } else if (rule == QuadratureRule::GaussLegendre) {
        const double xm = 0.5 * (b + a);
        const double xl = 0.5 * (b - a);
        const int m = (n + 1) / 2;
        for (int i = 1; i <= m; ++i) {
            double z = std::cos(M_PI * (i - 0.25) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= 1e-15) break;
            }
            g.points[i - 1] = xm - xl * z;
            g.points[n - i] = xm + xl * z;
            g.weights[i - 1] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
            g.weights[n - i] = g.weights[i - 1];
        }
    } else {
        throw InvalidInput("make_grid: custom grids are constructed from data, not a rule");
    }
    g.validate();
    return g;
}

/// Sampled kernel k(x_i, y_j) over a pair of grids.  The induced operator
/// maps weighted-L2(grid_x) to weighted-L2(grid_y) by
/// (Tf)(y_j) = sum_i w_i k(x_i, y_j) f(x_i).
struct Kernel {
    QuadratureGrid grid_x;
    QuadratureGrid grid_y;
    MatrixXd values; // n_x rows, n_y cols

    void validate() const {
        grid_x.validate();
        grid_y.validate();
        if (values.rows() != grid_x.size() || values.cols() != grid_y.size())
            throw DimensionMismatch("Kernel: value matrix does not match grids");
        if (!values.allFinite()) throw NonFiniteKernelValue("Kernel: non-finite kernel value");
    }

    /// Apply the induced operator to samples of f on grid_x.
    VectorXd apply(const VectorXd& f) const {
        if (f.size() != grid_x.size()) throw DimensionMismatch("Kernel::apply: f does not match grid_x");
        return values.transpose() * grid_x.weights.cwiseProduct(f);
    }
};

/// Sample a pointwise kernel on a grid pair.  Assembly is split by row
/// blocks; entries are independent so the result is bitwise identical for
/// any thread count.
inline Kernel discretize(const std::function<double(double, double)>& k, const QuadratureGrid& gx,
                         const QuadratureGrid& gy, int threads = 1) {
    Kernel ker;
    ker.grid_x = gx;
    ker.grid_y = gy;
    ker.values.resize(gx.size(), gy.size());
    detail::parallel_chunks(0, gx.size(), threads, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i)
            for (int j = 0; j < gy.size(); ++j)
                ker.values(i, j) = k(gx.points[static_cast<int>(i)], gy.points[j]);
    });
    ker.validate();
    return ker;
}

inline Kernel discretize(MatrixXd sampled, const QuadratureGrid& gx, const QuadratureGrid& gy) {
    Kernel ker;
    ker.grid_x = gx;
    ker.grid_y = gy;
    ker.values = std::move(sampled);
    ker.validate();
    return ker;
}

namespace detail {

/// Weight-conjugated operator matrix D_wy^{1/2} values' D_wx^{1/2}; its
/// singular values are those of the operator between the weighted-L2
/// spaces.
inline MatrixXd conjugated_operator(const Kernel& k) {
    return k.grid_y.weights.cwiseSqrt().asDiagonal() * k.values.transpose() *
           k.grid_x.weights.cwiseSqrt().asDiagonal();
}

} // namespace detail

/// L2(w_x) -> L2(w_y) operator norm of the discretized kernel.
inline double operator_norm(const Kernel& k) {
    const MatrixXd m = detail::conjugated_operator(k);
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<MatrixXd> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

/// Hilbert-Schmidt norm (sum_ij w_i w'_j k_ij^2)^{1/2}, the L2 norm of the
/// kernel under the product measure.
inline double hs_norm(const Kernel& k) {
    double acc = 0.0;
    for (int i = 0; i < k.values.rows(); ++i)
        for (int j = 0; j < k.values.cols(); ++j)
            acc += k.grid_x.weights[i] * k.grid_y.weights[j] * k.values(i, j) * k.values(i, j);
    return std::sqrt(acc);
}

struct KernelFubiniValues {
    double order_xy = 0.0; ///< integrate over x first, then y
    double order_yx = 0.0; ///< integrate over y first, then x
};

/// The double integral of k(x,y) f(x) g(y) evaluated in both iterated
/// orders; finite sums commute, so the two agree up to rounding.
inline KernelFubiniValues fubini_kernel_check(const Kernel& k, const VectorXd& f,
                                              const VectorXd& g) {
    if (f.size() != k.grid_x.size() || g.size() != k.grid_y.size())
        throw DimensionMismatch("fubini_kernel_check: f/g do not match the grids");
    KernelFubiniValues out;
    {
        const VectorXd tf = k.values.transpose() * k.grid_x.weights.cwiseProduct(f);
        out.order_xy = k.grid_y.weights.cwiseProduct(g).dot(tf);
    }
    {
        const VectorXd tg = k.values * k.grid_y.weights.cwiseProduct(g);
        out.order_yx = k.grid_x.weights.cwiseProduct(f).dot(tg);
    }
    return out;
}

/// Spectral summary of a kernel on a shared grid.
struct SpectralReport {
    VectorXd eigenvalues; ///< descending
    double hs_norm = 0.0;
    double op_norm = 0.0;
    bool symmetric = false;
    bool psd = false;
    bool kg_applicable = false; ///< op_norm <= kg_effective, so the containment assertion is active
    bool kg_contained = true;   ///< spectrum inside the asserted interval (true when not applicable)
    std::optional<MatrixXd> eigenvectors; ///< columns, matching eigenvalue order
};

/// Eigendecomposition of the conjugated operator matrix plus symmetry /
/// positivity flags.  The containment assertion against kg_effective is
/// only armed when the form norm is itself certified below the threshold.
inline SpectralReport spectral_check(const Kernel& k, const Constants& constants,
                                     bool keep_eigenvectors = false, double tol = 1e-9) {
    if (!k.grid_x.same_geometry(k.grid_y))
        throw AsymmetricGrids("spectral_check: grid_x and grid_y must coincide");
    SpectralReport report;
    report.symmetric = (k.values - k.values.transpose()).cwiseAbs().maxCoeff() <= 1e-10;
    const MatrixXd m = detail::conjugated_operator(k);
    const MatrixXd msym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(msym,
                                                keep_eigenvectors ? Eigen::ComputeEigenvectors
                                                                  : Eigen::EigenvaluesOnly);
    report.eigenvalues = eig.eigenvalues().reverse();
    if (keep_eigenvectors) {
        report.eigenvectors = eig.eigenvectors().rowwise().reverse();
    }

    if (report.symmetric) {
        report.op_norm = std::max(std::abs(report.eigenvalues[0]),
                                  std::abs(report.eigenvalues[report.eigenvalues.size() - 1]));
    } else {
        Eigen::BDCSVD<MatrixXd> svd(m);
        report.op_norm = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
    }
    report.hs_norm = hs_norm(k);

    const double lam_min = report.eigenvalues[report.eigenvalues.size() - 1];
    const double lam_max = report.eigenvalues[0];
    report.psd = report.symmetric && lam_min >= -1e-10 * std::max(lam_max, 0.0);

    const double kg = constants.kg_effective;
    report.kg_applicable = report.op_norm <= kg;
    if (report.kg_applicable) {
        const double lo = report.psd ? -tol : -kg - tol;
        report.kg_contained = (lam_min >= lo) && (lam_max <= kg + tol);
    }
    return report;
}

/// Green's function of -u'' = f with u(0) = u(1) = 0, sampled on a
/// uniform n-point grid: G(x, y) = min(x, y) (1 - max(x, y)).  The grid
/// is trapezoid because the kernel has a kink on the diagonal and the
/// second-difference consistency check needs uniform spacing.
inline Kernel green_1d(int n) {
    if (n < 10) throw InvalidInput("green_1d: n too small (need n >= 10)");
    const QuadratureGrid g = make_grid(n, 0.0, 1.0, QuadratureRule::Trapezoid);
    Kernel ker;
    ker.grid_x = g;
    ker.grid_y = g;
    ker.values.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = g.points[i], y = g.points[j];
            ker.values(i, j) = std::min(x, y) * (1.0 - std::max(x, y));
        }
    return ker;
}

/// Kernel composition (k1 * k2)(x, z) = sum_j w_j k1(x, y_j) k2(y_j, z);
/// requires k1's y-grid and k2's x-grid to coincide exactly.
inline Kernel compose(const Kernel& k1, const Kernel& k2) {
    if (!k1.grid_y.same_geometry(k2.grid_x))
        throw GridMismatch("compose: k1.grid_y and k2.grid_x must coincide");
    Kernel out;
    out.grid_x = k1.grid_x;
    out.grid_y = k2.grid_y;
    out.values = k1.values * k1.grid_y.weights.asDiagonal() * k2.values;
    return out;
}

/// Constant-ledger bound carried by a composition: kg_effective^2 when
/// both factors have form norm within kg_effective, otherwise absent.
inline std::optional<double> compose_ledger_bound(const Kernel& k1, const Kernel& k2,
                                                  const Constants& constants) {
    const double kg = constants.kg_effective;
    if (operator_norm(k1) <= kg && operator_norm(k2) <= kg) return kg * kg;
    return std::nullopt;
}

struct IteratedGroupings {
    double composed = 0.0; ///< pair f and h against the composed kernel
    double iterated = 0.0; ///< innermost-to-outermost iterated integral
    double discrepancy() const { return std::abs(composed - iterated); }
    double rel_discrepancy() const {
        return discrepancy() / std::max({1.0, std::abs(composed), std::abs(iterated)});
    }
};

/// Both groupings of the triple iterated integral of f against the
/// composition: once through the composed kernel, once by nesting the
/// three single integrals.  They agree up to rounding.
inline IteratedGroupings iterated_groupings(const Kernel& k1, const Kernel& k2, const VectorXd& f,
                                            const VectorXd& h) {
    if (!k1.grid_y.same_geometry(k2.grid_x))
        throw GridMismatch("iterated_groupings: k1.grid_y and k2.grid_x must coincide");
    if (f.size() != k1.grid_x.size() || h.size() != k2.grid_y.size())
        throw DimensionMismatch("iterated_groupings: f/h do not match the outer grids");
    IteratedGroupings out;
    {
        const Kernel c = compose(k1, k2);
        const VectorXd t = c.values * c.grid_y.weights.cwiseProduct(h);
        out.composed = c.grid_x.weights.cwiseProduct(f).dot(t);
    }
    {
        const VectorXd t = k1.values.transpose() * k1.grid_x.weights.cwiseProduct(f); // over x
        const VectorXd s = k2.values.transpose() * k2.grid_x.weights.cwiseProduct(t); // over y
        out.iterated = k2.grid_y.weights.cwiseProduct(h).dot(s);
    }
    return out;
}

/// Least-squares slope of log(lambda_j) against log(j) over the 1-based
/// index window [j_lo, j_hi]; only strictly positive eigenvalues enter.
inline double weyl_slope(const VectorXd& eigenvalues_desc, int j_lo = 2, int j_hi = 20) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (int j = j_lo; j <= j_hi && j <= eigenvalues_desc.size(); ++j) {
        const double lam = eigenvalues_desc[j - 1];
        if (lam <= 0.0) continue;
        const double x = std::log(static_cast<double>(j));
        const double y = std::log(lam);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) throw InvalidInput("weyl_slope: not enough positive eigenvalues in the window");
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

// built-in kernel functions selectable by name in the CLI
namespace builtin {

inline double inv1p(double x, double y) { return 1.0 / (1.0 + std::abs(x - y)); }
inline double constant(double, double) { return 1.0; }
inline std::function<double(double, double)> gauss(double sigma) {
    return [sigma](double x, double y) {
        const double d = (x - y) / sigma;
        return std::exp(-d * d);
    };
}

} // namespace builtin
} // namespace gkit
