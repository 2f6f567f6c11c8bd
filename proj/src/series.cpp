#include "ospfock/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace ospfock {

namespace {

double operator_norm(const Eigen::SparseMatrix<Complex>& m) {
    Eigen::MatrixXcd dense(m);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
    return svd.singularValues()(0);
}

bool has_antilinear_part(const OspElement& x) {
    return x.op.conj.size() > 0 && x.op.conj.cwiseAbs().maxCoeff() > 0.0;
}

double binomial(int n, int k) {
    double result = 1.0;
    for (int j = 1; j <= k; ++j) {
        result = result * static_cast<double>(n - k + j) / static_cast<double>(j);
    }
    return result;
}

/// A unit-norm Gaussian combination of the family, redrawn on (measure-zero)
/// exact cancellation so the draw is total.
OspElement random_unit_combination(const TruncatedSpace& one,
                                   const std::vector<OspElement>& family,
                                   Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        OspElement combination = rng.gaussian() * family.front();
        for (std::size_t k = 1; k < family.size(); ++k) {
            combination = combination + rng.gaussian() * family[k];
        }
        if (osp_norm(combination) > 0.0) {
            return normalized(one, combination, 1.0);
        }
    }
    throw std::runtime_error(
        "seminorm_estimate: generating family spans only the zero element");
}

}  // namespace

SeriesResult orbit_series(const FockSpace& fock, const FockVector& v,
                          const CentralElement& u, double t, int n_max) {
    if (u.body.parity != Parity::even) {
        throw std::invalid_argument(
            "orbit_series: direction must be even (odd directions generate no "
            "one-parameter subgroup)");
    }
    if (n_max < 0) {
        throw std::invalid_argument("orbit_series: n_max must be nonnegative");
    }
    const FockOperator op = rho_full(fock, u);
    Eigen::VectorXcd term = to_dense(fock, v);
    const double v_norm = term.norm();
    Eigen::VectorXcd sum = term;
    for (int n = 1; n <= n_max; ++n) {
        term = (t / static_cast<double>(n)) * (op.matrix * term).eval();
        sum += term;
    }
    SeriesResult out;
    out.value = from_dense(fock, sum);
    out.terms_used = n_max;
    out.tail_bound =
        v_norm * exp_tail_bound(std::abs(t) * operator_norm(op.matrix), n_max);
    out.converged = out.tail_bound <= 1e-9 * std::max(1.0, v_norm);
    return out;
}

RadiusEstimate radius_estimate(const FockSpace& fock, const FockVector& v,
                               const CentralElement& u, int n_max) {
    if (n_max < 0) {
        throw std::invalid_argument("radius_estimate: n_max must be nonnegative");
    }
    const double inf = std::numeric_limits<double>::infinity();
    const FockOperator op = rho_full(fock, u);

    // A degree-raising part makes matrix powers disagree with the untruncated
    // operator once intermediate degrees reach the cap; powers remain exact
    // only while starting_degree + 2*(applications-1) <= cap - 2.
    int usable = n_max;
    bool limited = false;
    if (has_antilinear_part(u.body)) {
        const int start = std::max(0, v.max_degree());
        const int depth = std::max(0, (fock.degree_cap() - start) / 2);
        if (n_max > depth) {
            usable = depth;
            limited = true;
        }
    }

    Eigen::VectorXcd term = to_dense(fock, v);
    std::vector<double> growth;  // (||M^n v|| / n!)^(1/n)
    double log_factorial = 0.0;
    for (int n = 1; n <= usable; ++n) {
        term = (op.matrix * term).eval();
        log_factorial += std::log(static_cast<double>(n));
        const double norm = term.norm();
        if (norm == 0.0) {
            return {inf, limited, n};  // the series terminates: entire
        }
        growth.push_back(std::exp((std::log(norm) - log_factorial) / n));
    }
    if (growth.empty()) {
        return {inf, true, 0};  // no exactly represented power at all
    }
    const double peak = *std::max_element(growth.begin(), growth.end());
    // A tail decaying well below its own peak is the root-test signature of a
    // bounded generator (rate -> 0), not of a finite radius.
    if (growth.size() >= 2 && growth.back() < 0.9 * peak &&
        growth.back() <= growth[growth.size() - 2]) {
        return {inf, limited, usable};
    }
    return {1.0 / peak, limited, usable};
}

CentralElement bch(const TruncatedSpace& one, const CentralElement& x,
                   const CentralElement& y, int order) {
    if (order < 1 || order > 4) {
        throw std::invalid_argument("bch: supported orders are 1..4, got " +
                                    std::to_string(order));
    }
    if (x.body.parity != Parity::even || y.body.parity != Parity::even) {
        throw std::invalid_argument("bch: both elements must be even");
    }
    CentralElement result = x + y;
    if (order >= 2) {
        const CentralElement xy = extended_bracket(one, x, y);
        result = result + 0.5 * xy;
        if (order >= 3) {
            const CentralElement xxy = extended_bracket(one, x, xy);
            const CentralElement yyx =
                extended_bracket(one, y, extended_bracket(one, y, x));
            result = result + (1.0 / 12.0) * (xxy + yyx);
            if (order >= 4) {
                result = result + (-1.0 / 24.0) * extended_bracket(one, y, xxy);
            }
        }
    }
    return result;
}

OspElement bch(const TruncatedSpace& one, const OspElement& x,
               const OspElement& y, int order) {
    return bch(one, central_lift(x), central_lift(y), order).body;
}

SeminormEstimate seminorm_estimate(const TruncatedSpace& one,
                                   const FockSpace& fock, const FockVector& v,
                                   int order,
                                   const std::vector<OspElement>& family,
                                   int samples, std::uint64_t seed) {
    if (family.empty()) {
        throw std::invalid_argument(
            "seminorm_estimate: generating family must be nonempty");
    }
    for (const OspElement& generator : family) {
        if (generator.parity != Parity::even) {
            throw std::invalid_argument(
                "seminorm_estimate: generating family must be even");
        }
    }
    if (order < 0) {
        throw std::invalid_argument("seminorm_estimate: order must be nonnegative");
    }
    const Eigen::VectorXcd v0 = to_dense(fock, v);
    if (order == 0) {
        return {0, v0.norm(), samples, seed};  // empty product: the norm itself
    }
    if (samples < 1) {
        throw std::invalid_argument(
            "seminorm_estimate: at least one sample is required");
    }
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        Eigen::VectorXcd w = v0;
        for (int j = 0; j < order; ++j) {
            const OspElement direction = random_unit_combination(one, family, rng);
            const FockOperator op = rho_full(fock, central_lift(direction));
            w = (op.matrix * w).eval();
        }
        best = std::max(best, w.norm());
    }
    return {order, best, samples, seed};
}

IdentityReport check_interpolation_bounds(const TruncatedSpace& one,
                                          const FockSpace& fock,
                                          const FockVector& v,
                                          const OspElement& y_odd,
                                          double slack_tolerance) {
    if (y_odd.parity != Parity::odd) {
        throw std::invalid_argument("check_interpolation_bounds: y must be odd");
    }
    if (!y_odd.certified()) {
        throw std::invalid_argument(
            "check_interpolation_bounds: y must be certified (membership defect " +
            std::to_string(y_odd.residual) + " exceeds the tolerance)");
    }
    const int window = fock.degree_cap() - 4;
    if (v.max_degree() > window) {
        throw std::invalid_argument(
            "check_interpolation_bounds: v must be supported on total degree <= "
            "cap - 4 (the square identity is exact only there)");
    }
    const CentralElement lifted = central_lift(y_odd);
    const Eigen::VectorXcd v0 = to_dense(fock, v);
    const Eigen::VectorXcd first = rho_full(fock, lifted).matrix * v0;
    const Eigen::VectorXcd second =
        rho_full(fock, extended_bracket(one, lifted, lifted)).matrix * v0;
    const double lhs = first.norm();
    const double rhs = std::sqrt(0.5) * std::sqrt(v0.norm()) * std::sqrt(second.norm());
    return make_report("interpolation-bound", lhs - rhs, slack_tolerance, window);
}

IdentityReport seminorm_chain_report(const TruncatedSpace& one,
                                     const FockSpace& fock, const FockVector& v,
                                     const OspElement& y_odd, int order,
                                     const std::vector<OspElement>& family,
                                     int samples, std::uint64_t seed) {
    if (y_odd.parity != Parity::odd) {
        throw std::invalid_argument("seminorm_chain_report: y must be odd");
    }
    if (order < 0) {
        throw std::invalid_argument("seminorm_chain_report: order must be nonnegative");
    }
    const Eigen::VectorXcd v0 = to_dense(fock, v);
    const Eigen::VectorXcd image =
        rho_full(fock, central_lift(y_odd)).matrix * v0;
    const FockVector w = from_dense(fock, image);
    const double lhs =
        seminorm_estimate(one, fock, w, order, family, samples, seed).value;
    double weighted = 0.0;
    for (int k = 0; k <= order + 1; ++k) {
        weighted += binomial(order + 1, k) *
                    seminorm_estimate(one, fock, v, k, family, samples, seed).value;
    }
    const double rhs = osp_norm(y_odd) / (2.0 * std::sqrt(2.0)) * weighted;
    // Both sides are Monte-Carlo lower bounds, so the comparison is recorded
    // but never asserted.
    return make_report("seminorm-chain", lhs - rhs,
                       std::numeric_limits<double>::infinity(),
                       fock.degree_cap() - 2);
}

}  // namespace ospfock
