#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "gkit/bilinear.hpp"
#include "gkit/constants.hpp"
#include "gkit/errors.hpp"
#include "gkit/space.hpp"

namespace gkit {

/// Dense n-linear form with one SpaceSpec per mode, stored row-major
/// (last index fastest).  Alongside the data it tracks an advisory
/// constant ledger: a fresh order-n form starts at power n-1 with scale a
/// cheap upper bound of its norm, and each unit-vector contraction drops
/// the power by one.  The ledger is metadata only; exact norms are always
/// recomputed where requested.
class MultilinearForm {
public:
    MultilinearForm(std::vector<SpaceSpec> spaces, std::vector<double> entries)
        : spaces_(std::move(spaces)), data_(std::move(entries)) {
        validate();
        ledger_power_ = order() - 1;
        ledger_scale_ = default_scale();
    }

    MultilinearForm(std::vector<SpaceSpec> spaces, std::vector<double> entries, int ledger_power,
                    double ledger_scale)
        : spaces_(std::move(spaces)), data_(std::move(entries)), ledger_power_(ledger_power),
          ledger_scale_(ledger_scale) {
        validate();
    }

    static MultilinearForm from_bilinear(const BilinearForm& phi) {
        std::vector<double> flat(static_cast<std::size_t>(phi.coeffs.size()));
        for (int i = 0; i < phi.coeffs.rows(); ++i)
            for (int j = 0; j < phi.coeffs.cols(); ++j)
                flat[static_cast<std::size_t>(i) * static_cast<std::size_t>(phi.coeffs.cols()) +
                     static_cast<std::size_t>(j)] = phi.coeffs(i, j);
        return {{phi.domain_e, phi.domain_f}, std::move(flat)};
    }

    int order() const { return static_cast<int>(spaces_.size()); }
    const std::vector<SpaceSpec>& spaces() const { return spaces_; }
    const SpaceSpec& space(int k) const { return spaces_[static_cast<std::size_t>(k)]; }
    int dim(int k) const { return spaces_[static_cast<std::size_t>(k)].dim; }
    const std::vector<double>& data() const { return data_; }
    std::size_t size() const { return data_.size(); }

    int ledger_power() const { return ledger_power_; }
    double ledger_scale() const { return ledger_scale_; }
    double tracked_bound(const Constants& c) const {
        return std::pow(c.kg_effective, ledger_power_) * ledger_scale_;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    double entry_l1() const {
        double s = 0.0;
        for (double v : data_) s += std::abs(v);
        return s;
    }

    bool all_tag(NormTag t) const {
        for (const auto& s : spaces_)
            if (s.tag != t) return false;
        return true;
    }

    bool all_hilbert() const {
        for (const auto& s : spaces_)
            if (!s.is_hilbert()) return false;
        return true;
    }

private:
    void validate() const {
        const int n = order();
        if (n < 1) throw InvalidInput("MultilinearForm: at least one mode required");
        if (n > 8) throw InvalidInput("MultilinearForm: order capped at 8");
        std::size_t total = 1;
        for (const auto& s : spaces_) {
            s.validate();
            total *= static_cast<std::size_t>(s.dim);
            if (total > 10'000'000)
                throw InvalidInput("MultilinearForm: more than 1e7 entries");
        }
        if (data_.size() != total)
            throw DimensionMismatch("MultilinearForm: entry count does not match dims");
        for (double v : data_)
            if (!std::isfinite(v)) throw NonFiniteEntries("MultilinearForm: non-finite entry");
    }

    double default_scale() const {
        double c = 1.0;
        for (const auto& s : spaces_) c *= s.max_l2_on_ball();
        return frobenius() * c;
    }

    std::vector<SpaceSpec> spaces_;
    std::vector<double> data_;
    int ledger_power_ = 0;
    double ledger_scale_ = 0.0;
};

/// Contract mode k (1-based) with v, producing the (n-1)-linear form
/// mu(.., v at slot k, ..).  The ledger power drops by one and the scale
/// picks up ||v|| in the contracted space's norm.
inline MultilinearForm partial_contract(const MultilinearForm& mu, int k, const VectorXd& v) {
    const int n = mu.order();
    if (k < 1 || k > n) throw IndexOutOfRange("partial_contract: mode index out of range");
    if (n < 2) throw InvalidInput("partial_contract: cannot contract an order-1 form");
    const int ki = k - 1;
    if (v.size() != mu.dim(ki)) throw DimensionMismatch("partial_contract: vector does not match mode");

    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < ki; ++i) outer *= static_cast<std::size_t>(mu.dim(i));
    for (int i = ki + 1; i < n; ++i) inner *= static_cast<std::size_t>(mu.dim(i));
    const std::size_t dk = static_cast<std::size_t>(mu.dim(ki));

    std::vector<double> out(outer * inner, 0.0);
    const std::vector<double>& t = mu.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < dk; ++i) {
            const double vi = v[static_cast<Eigen::Index>(i)];
            if (vi == 0.0) continue;
            const std::size_t src = (o * dk + i) * inner;
            const std::size_t dst = o * inner;
            for (std::size_t in = 0; in < inner; ++in) out[dst + in] += vi * t[src + in];
        }

    std::vector<SpaceSpec> spaces;
    spaces.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i)
        if (i != ki) spaces.push_back(mu.space(i));
    const int power = std::max(mu.ledger_power() - 1, 0);
    const double scale = mu.ledger_scale() * mu.space(ki).norm(v);
    return {std::move(spaces), std::move(out), power, scale};
}

/// Full contraction mu(v_1, ..., v_n) in one pass with a fixed summation
/// order (reference evaluation for the iterated paths).
inline double full_contract(const MultilinearForm& mu, const std::vector<VectorXd>& vectors) {
    const int n = mu.order();
    if (static_cast<int>(vectors.size()) != n)
        throw DimensionMismatch("full_contract: need one vector per mode");
    for (int k = 0; k < n; ++k)
        if (vectors[static_cast<std::size_t>(k)].size() != mu.dim(k))
            throw DimensionMismatch("full_contract: vector length does not match mode");
    const std::vector<double>& t = mu.data();
    double acc = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        double prod = t[flat];
        if (prod != 0.0)
            for (int k = 0; k < n; ++k)
                prod *= vectors[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        acc += prod;
        for (int k = n - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < mu.dim(k)) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return acc;
}

/// Iterated evaluation in the order sigma (1-based permutation): contract
/// mode sigma(1) first, then sigma(2), ..., ending with a scalar.  Equal
/// to the full contraction for every permutation.
inline double permutation_evaluate(const MultilinearForm& mu, const std::vector<int>& sigma,
                                   const std::vector<VectorXd>& vectors) {
    const int n = mu.order();
    if (static_cast<int>(sigma.size()) != n)
        throw InvalidPermutation("permutation_evaluate: permutation length != order");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int s : sigma) {
        if (s < 1 || s > n || seen[static_cast<std::size_t>(s - 1)])
            throw InvalidPermutation("permutation_evaluate: not a permutation of 1..n");
        seen[static_cast<std::size_t>(s - 1)] = true;
    }
    if (static_cast<int>(vectors.size()) != n)
        throw DimensionMismatch("permutation_evaluate: need one vector per mode");

    std::vector<int> remaining(static_cast<std::size_t>(n));
    std::iota(remaining.begin(), remaining.end(), 1);
    MultilinearForm cur = mu;
    for (std::size_t step = 0; step < sigma.size(); ++step) {
        const int mode = sigma[step];
        const auto pos_it = std::find(remaining.begin(), remaining.end(), mode);
        const VectorXd& v = vectors[static_cast<std::size_t>(mode - 1)];
        if (cur.order() == 1) {
            // last mode: the order-1 form is a covector, pair it off
            double acc = 0.0;
            for (int i = 0; i < cur.dim(0); ++i) acc += cur.data()[static_cast<std::size_t>(i)] * v[i];
            return acc;
        }
        const int pos = static_cast<int>(pos_it - remaining.begin()) + 1;
        cur = partial_contract(cur, pos, v);
        remaining.erase(pos_it);
    }
    return 0.0; // unreachable for n >= 1
}

/// All permutations of 1..n in lexicographic order.
inline std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 1);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

namespace detail {

/// Contraction of every mode except `keep` with the given vectors,
/// returning the covector along mode `keep`.
inline VectorXd contract_except(const MultilinearForm& mu, const std::vector<VectorXd>& vectors,
                                int keep) {
    const int n = mu.order();
    VectorXd out = VectorXd::Zero(mu.dim(keep));
    const std::vector<double>& t = mu.data();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        double prod = t[flat];
        if (prod != 0.0)
            for (int k = 0; k < n; ++k)
                if (k != keep) prod *= vectors[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        out[idx[static_cast<std::size_t>(keep)]] += prod;
        for (int k = n - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < mu.dim(k)) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

} // namespace detail

/// Norm of a multilinear form over the product of unit balls.
/// All l-inf: exact by sign enumeration over all modes but the widest,
/// which is optimized in closed form.  All Hilbertian: exact for n = 2
/// (spectral norm), alternating-ascent lower bound plus Frobenius upper
/// bound for n >= 3.  Mixed tags fall back to a sampled interval.
inline NormCertificate multilinear_norm(const MultilinearForm& mu, const NormOptions& opts = {}) {
    const int n = mu.order();

    if (n == 1) {
        // covector: the norm is the dual norm, closed form for every tag
        VectorXd r(mu.dim(0));
        for (int i = 0; i < mu.dim(0); ++i) r[i] = mu.data()[static_cast<std::size_t>(i)];
        NormCertificate cert;
        cert.lower = cert.upper = mu.space(0).dual().norm(r);
        cert.method = mu.space(0).is_hilbert() ? CertMethod::ExactSVD : CertMethod::ExactSignEnum;
        return cert;
    }

    if (n == 2) {
        MatrixXd a(mu.dim(0), mu.dim(1));
        for (int i = 0; i < mu.dim(0); ++i)
            for (int j = 0; j < mu.dim(1); ++j)
                a(i, j) = mu.data()[static_cast<std::size_t>(i) * static_cast<std::size_t>(mu.dim(1)) +
                                    static_cast<std::size_t>(j)];
        return bilinear_norm(BilinearForm(a, mu.space(0), mu.space(1)), opts);
    }

    if (mu.all_tag(NormTag::LInf)) {
        // enumerate signs on every mode except the widest one; the last
        // mode's optimum is the l1 norm of the contracted covector
        int wide = 0;
        for (int k = 1; k < n; ++k)
            if (mu.dim(k) > mu.dim(wide)) wide = k;
        // each mode's vector can have its leading sign fixed (flipping a
        // whole mode negates the contraction, the l1 value is unchanged)
        std::vector<std::pair<int, int>> bit_owner; // (mode, coordinate)
        for (int k = 0; k < n; ++k) {
            if (k == wide) continue;
            for (int c = 1; c < mu.dim(k); ++c) bit_owner.emplace_back(k, c);
        }
        const int nbits = static_cast<int>(bit_owner.size());
        if (nbits > opts.enum_limit - 1)
            throw EnumLimitExceeded("multilinear_norm: sign enumeration over " +
                                    std::to_string(nbits) + " free signs exceeds the limit");
        std::vector<VectorXd> signs(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) signs[static_cast<std::size_t>(k)] = VectorXd::Ones(mu.dim(k));

        double best = 0.0;
        const std::uint64_t count = 1ULL << nbits;
        for (std::uint64_t bits = 0; bits < count; ++bits) {
            for (int b = 0; b < nbits; ++b) {
                const auto [mk, mc] = bit_owner[static_cast<std::size_t>(b)];
                signs[static_cast<std::size_t>(mk)][mc] = ((bits >> b) & 1ULL) ? -1.0 : 1.0;
            }
            const VectorXd c = detail::contract_except(mu, signs, wide);
            best = std::max(best, c.lpNorm<1>());
        }
        NormCertificate cert;
        cert.lower = cert.upper = best;
        cert.method = CertMethod::ExactSignEnum;
        return cert;
    }

    if (mu.all_hilbert()) {
        // conjugate weighted modes to plain l2, then alternating ascent
        std::vector<double> data = mu.data();
        {
            std::vector<int> idx(static_cast<std::size_t>(n), 0);
            for (std::size_t flat = 0; flat < data.size(); ++flat) {
                double s = 1.0;
                for (int k = 0; k < n; ++k)
                    if (mu.space(k).tag == NormTag::WeightedL2)
                        s /= std::sqrt(mu.space(k).weights[idx[static_cast<std::size_t>(k)]]);
                data[flat] *= s;
                for (int k = n - 1; k >= 0; --k) {
                    if (++idx[static_cast<std::size_t>(k)] < mu.dim(k)) break;
                    idx[static_cast<std::size_t>(k)] = 0;
                }
            }
        }
        std::vector<SpaceSpec> l2_spaces;
        for (int k = 0; k < n; ++k) l2_spaces.push_back(SpaceSpec::l2(mu.dim(k)));
        const MultilinearForm conj(std::move(l2_spaces), std::move(data));

        double best = 0.0;
        for (int r = 0; r < 8; ++r) {
            Rng rng = substream(opts.seed, "als_restart", static_cast<std::uint64_t>(r));
            std::vector<VectorXd> v(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k)
                v[static_cast<std::size_t>(k)] = random_extreme_point(SpaceSpec::l2(conj.dim(k)), rng);
            double value = 0.0;
            for (int sweep = 0; sweep < 60; ++sweep) {
                double last = value;
                for (int k = 0; k < n; ++k) {
                    const VectorXd r_k = detail::contract_except(conj, v, k);
                    const double nr = r_k.norm();
                    if (nr > 1e-300) v[static_cast<std::size_t>(k)] = r_k / nr;
                    value = nr;
                }
                if (std::abs(value - last) <= 1e-13 * std::max(1.0, std::abs(value))) break;
            }
            best = std::max(best, value);
        }
        NormCertificate cert;
        cert.lower = best;
        cert.upper = std::max(conj.frobenius(), best);
        cert.method = CertMethod::SampledDual;
        return cert;
    }

    // mixed tags: sampled extreme points with coordinate ascent from below,
    // norm-equivalence bounds from above
    double best = 0.0;
    Rng rng = substream(opts.seed, "multi_sampled");
    for (int s = 0; s < std::max(opts.dual_samples / 8, 16); ++s) {
        std::vector<VectorXd> v(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = random_extreme_point(mu.space(k), rng);
        for (int round = 0; round < 4; ++round)
            for (int k = 0; k < n; ++k)
                v[static_cast<std::size_t>(k)] = ball_argmax(mu.space(k), detail::contract_except(mu, v, k));
        best = std::max(best, std::abs(full_contract(mu, v)));
    }
    double c2 = 1.0, cinf = 1.0;
    for (int k = 0; k < n; ++k) {
        c2 *= mu.space(k).max_l2_on_ball();
        cinf *= mu.space(k).max_linf_on_ball();
    }
    NormCertificate cert;
    cert.lower = best;
    cert.upper = std::max(best, std::min(mu.frobenius() * c2, mu.entry_l1() * cinf));
    cert.method = CertMethod::SampledDual;
    return cert;
}

/// Finite sum of elementary tensors e_1 (x) ... (x) e_n.
struct MultiTensorElement {
    std::vector<std::vector<VectorXd>> terms;

    static MultiTensorElement single(std::vector<VectorXd> vs) { return {{std::move(vs)}}; }
};

/// mu applied to a multi tensor element: the sum of full contractions.
inline double evaluate(const MultilinearForm& mu, const MultiTensorElement& x) {
    double acc = 0.0;
    for (const auto& term : x.terms) acc += full_contract(mu, term);
    return acc;
}

} // namespace gkit
