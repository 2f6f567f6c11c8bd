#include "ospfock/counterexamples.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace ospfock {

namespace {

template <unsigned Points>
void append_cell_with_rule(Grid1D& grid, double lo, double hi) {
    using Rule = boost::math::quadrature::gauss<double, Points>;
    grid.cells.push_back({lo, hi});
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const auto& xs = Rule::abscissa();  // non-negative half of the node set
    const auto& ws = Rule::weights();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0.0) {
            grid.nodes.push_back(mid);
            grid.weights.push_back(half * ws[i]);
            continue;
        }
        grid.nodes.push_back(mid - half * xs[i]);
        grid.weights.push_back(half * ws[i]);
        grid.nodes.push_back(mid + half * xs[i]);
        grid.weights.push_back(half * ws[i]);
    }
}

void append_cell(Grid1D& grid, double lo, double hi, int points) {
    switch (points) {
        case 8: append_cell_with_rule<8>(grid, lo, hi); break;
        case 16: append_cell_with_rule<16>(grid, lo, hi); break;
        case 32: append_cell_with_rule<32>(grid, lo, hi); break;
        default:
            throw std::invalid_argument(
                "grid: supported quadrature orders are 8, 16, 32");
    }
}

struct TailIntegral {
    double value = 0.0;
    bool settled = false;
};

/// Integral over (0, 1] of a function with an integrable singularity at 0:
/// dyadic slices [2^-(k+1), 2^-k] are accumulated until three consecutive
/// slice contributions fall below 1e-13 of the running total. The top slice
/// [1/2, 1] is integrated in the variable w with x = 1 - w^2, which absorbs
/// the half-integer branch that inverse-profile integrands carry at x = 1.
TailIntegral integrate_to_zero(const std::function<double(double)>& f,
                               int max_levels = 320) {
    const Grid1D top = uniform_grid(0.0, std::sqrt(0.5), 2, 16);
    double total =
        integrate(top, [&f](double w) { return 2.0 * w * f(1.0 - w * w); });
    int calm = 0;
    for (int k = 1; k < max_levels; ++k) {
        const double hi = std::ldexp(1.0, -k);
        Grid1D slice;
        slice.refinement_level = k;
        append_cell(slice, 0.5 * hi, 0.75 * hi, 16);
        append_cell(slice, 0.75 * hi, hi, 16);
        const double increment = integrate(slice, f);
        total += increment;
        if (std::abs(increment) <= 1e-13 * std::abs(total)) {
            if (++calm >= 3) return {total, true};
        } else {
            calm = 0;
        }
    }
    return {total, false};
}

double factorial_as_double(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

}  // namespace

Grid1D uniform_grid(double lo, double hi, int cells, int points_per_cell) {
    if (!(hi > lo)) {
        throw std::invalid_argument("uniform_grid: upper end must exceed lower end");
    }
    if (cells < 1) {
        throw std::invalid_argument("uniform_grid: need at least one cell");
    }
    Grid1D grid;
    for (int c = 0; c < cells; ++c) {
        const double a = lo + (hi - lo) * c / cells;
        const double b = lo + (hi - lo) * (c + 1) / cells;
        append_cell(grid, a, b, points_per_cell);
    }
    return grid;
}

Grid1D graded_grid(double hi, int levels, int points_per_cell) {
    if (!(hi > 0.0)) {
        throw std::invalid_argument("graded_grid: upper end must be positive");
    }
    if (levels < 1) {
        throw std::invalid_argument("graded_grid: need at least one level");
    }
    Grid1D grid;
    grid.refinement_level = levels;
    for (int k = levels - 1; k >= 0; --k) {
        append_cell(grid, std::ldexp(hi, -(k + 1)), std::ldexp(hi, -k),
                    points_per_cell);
    }
    return grid;
}

double integrate(const Grid1D& grid, const std::function<double(double)>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        sum += grid.weights[i] * f(grid.nodes[i]);
    }
    return sum;
}

SampledFunction constant_function(double c) {
    return {[c](double) { return c; }, false};
}

SampledFunction log_magnitude_function() {
    return {[](double x) { return std::abs(std::log(x)); }, true};
}

SampledFunction h_function() {
    return {[](double x) { return h_eval(x); }, true};
}

double G_eval(double x) {
    if (x < 0.0) {
        throw std::invalid_argument("G_eval: argument must be nonnegative");
    }
    const double s = std::sqrt(x);
    // 1 - exp(-s)(1 + s), written to avoid the 1 - (1 - ...) cancellation.
    return -std::expm1(-s) - s * std::exp(-s);
}

double G_by_quadrature(double x) {
    if (x < 0.0) {
        throw std::invalid_argument("G_by_quadrature: argument must be nonnegative");
    }
    if (x == 0.0) return 0.0;
    const double s = std::sqrt(x);
    const int cells = std::max(4, static_cast<int>(std::ceil(s)));
    const Grid1D grid = uniform_grid(0.0, s, cells, 16);
    return integrate(grid, [](double u) { return u * std::exp(-u); });
}

double h_eval(double x) {
    if (!(x > 0.0) || x > 1.0) {
        throw std::invalid_argument(
            "h_eval: argument must lie in (0, 1] (the limit at 0 is infinite)");
    }
    if (x == 1.0) return 0.0;
    // Solve exp(-s)(1 + s) = x for s = sqrt(h); phi is strictly decreasing
    // from 1 at s = 0, so a sign-preserving bracket always exists.
    const auto phi = [x](double s) { return std::exp(-s) * (1.0 + s) - x; };
    double lo = 0.0, hi = 1.0;
    while (phi(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    double s = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
        const double derivative = -s * std::exp(-s);
        double trial = derivative != 0.0 ? s - phi(s) / derivative : lo;
        if (!(trial > lo && trial < hi)) trial = 0.5 * (lo + hi);
        if (phi(trial) > 0.0) {
            lo = trial;
        } else {
            hi = trial;
        }
        s = trial;
    }
    return s * s;
}

double moment_integral(int n) {
    if (n < 0 || n > 8) {
        throw std::invalid_argument(
            "moment_integral: supported orders are 0..8 (quadrature conditioning)");
    }
    const TailIntegral result = integrate_to_zero(
        [n](double x) { return std::pow(h_eval(x), n); });
    if (!result.settled) {
        throw std::runtime_error("moment_integral: refinement did not settle");
    }
    return result.value;
}

LpNorm lp_norm(const SampledFunction& f, int order) {
    if (order < 1) {
        throw std::invalid_argument("lp_norm: order must be at least 1");
    }
    const auto power = [&f, order](double x) {
        return std::pow(std::abs(f.eval(x)), order);
    };
    double integral = 0.0;
    if (f.singular_at_zero) {
        const TailIntegral tail = integrate_to_zero(power);
        if (!tail.settled) {
            return {std::numeric_limits<double>::infinity(), true};
        }
        integral = tail.value;
    } else {
        integral = integrate(uniform_grid(0.0, 1.0, 64, 16), power);
    }
    return {std::pow(integral, 1.0 / order), false};
}

BanachNorm banach_norm(const SampledFunction& f, NormScheme scheme, int n_max) {
    if (n_max < 4) {
        throw std::invalid_argument("banach_norm: n_max must be at least 4");
    }
    BanachNorm result;
    double best = -1.0;
    double last_ratio = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const LpNorm fn = lp_norm(f, n);
        if (fn.diverged) {
            return {std::numeric_limits<double>::infinity(), n, false, true};
        }
        double calibration = 0.0;
        if (scheme == NormScheme::h_calibrated) {
            calibration = lp_norm(h_function(), n).value;
        } else {
            calibration = std::pow(factorial_as_double(n), 1.0 / n);
        }
        const double ratio = fn.value / calibration;
        if (ratio > best) {
            best = ratio;
            result.attained_at = n;
        }
        last_ratio = ratio;
    }
    result.value = best;
    result.at_last_order = last_ratio >= best * (1.0 - 1e-9);
    return result;
}

bool factorial_inequality_holds(int n) {
    if (n < 0 || n > 20) {
        throw std::invalid_argument(
            "factorial_inequality_holds: supported for 0 <= n <= 20");
    }
    // (2n)! <= 2^(2n) (n!)^2 is equivalent to C(2n, n) <= 4^n; the central
    // binomial is built by the exact integer recurrence C(2k,k) =
    // C(2k-2,k-1) * 2(2k-1) / k, which stays well inside 64 bits for n <= 20.
    std::uint64_t binom = 1;
    for (int k = 1; k <= n; ++k) {
        binom = binom * 2 * static_cast<std::uint64_t>(2 * k - 1) /
                static_cast<std::uint64_t>(k);
    }
    const std::uint64_t power = std::uint64_t{1} << (2 * n);
    return binom <= power;
}

IdentityReport analytic_bound_check(const SampledFunction& f, int n_max) {
    if (n_max < 4) {
        throw std::invalid_argument("analytic_bound_check: n_max must be at least 4");
    }
    for (int n = 0; n <= 20; ++n) {
        if (!factorial_inequality_holds(n)) {
            throw std::logic_error(
                "analytic_bound_check: exact factorial inequality violated");
        }
    }
    // The domination chain consumes ||f||_{2n} for n <= n_max, so the norm
    // must be certified through calibration order 2 n_max.
    const BanachNorm norm = banach_norm(f, NormScheme::factorial, 2 * n_max);
    if (norm.diverged) {
        throw std::invalid_argument(
            "analytic_bound_check: an L^n norm of the sample diverges");
    }
    if (!(norm.value < 0.5)) {
        throw std::invalid_argument(
            "analytic_bound_check: requires factorial-calibrated norm < 1/2, got " +
            format_double(norm.value));
    }
    double sum = 1.0;  // empty-product term
    for (int n = 1; n <= n_max; ++n) {
        const LpNorm l2n = lp_norm(f, 2 * n);
        sum += std::pow(l2n.value, n) / factorial_as_double(n);
    }
    const double bound = 1.0 / (1.0 - 2.0 * norm.value);
    return make_report("analytic-domination", sum - bound, 1e-8, n_max);
}

DivergenceWitness divergence_witness(double t, double eps, int levels) {
    if (t < 0.0) {
        throw std::invalid_argument("divergence_witness: t must be nonnegative");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("divergence_witness: eps must lie in (0, 1)");
    }
    if (levels < 1) {
        throw std::invalid_argument("divergence_witness: need at least one level");
    }
    DivergenceWitness witness;
    witness.t = t;
    witness.eps = eps;
    const auto integrand = [t](double x) {
        return std::exp(std::min(700.0, t * h_eval(x)));
    };
    double total = 0.0;
    int calm = 0;
    for (int k = 0; k < levels; ++k) {
        const double hi = eps * std::ldexp(1.0, -k);
        Grid1D slice;
        slice.refinement_level = k;
        append_cell(slice, 0.5 * hi, 0.75 * hi, 16);
        append_cell(slice, 0.75 * hi, hi, 16);
        const double increment = integrate(slice, integrand);
        total += increment;
        witness.deltas.push_back(0.5 * hi);
        witness.integrals.push_back(total);
        if (total > witness.threshold) {
            witness.diverged = true;  // stop before exponents can overflow
            return witness;
        }
        calm = increment <= 1e-10 * total ? calm + 1 : 0;
    }
    witness.settled = calm >= 3;
    witness.inconclusive = !witness.settled;
    return witness;
}

std::string witness_csv(const DivergenceWitness& witness) {
    std::string out = "level,delta,integral\n";
    for (std::size_t k = 0; k < witness.integrals.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(witness.deltas[k]);
        out += ',';
        out += format_double(witness.integrals[k]);
        out += '\n';
    }
    return out;
}

}  // namespace ospfock
