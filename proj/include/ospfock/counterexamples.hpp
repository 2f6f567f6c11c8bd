#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ospfock/verify.hpp"

namespace ospfock {

/// Partition of a real interval with per-cell Gauss-Legendre nodes/weights.
/// Invariants: weights are positive and cells tile [lo, hi] without overlap.
struct Grid1D {
    struct Cell {
        double lo;
        double hi;
    };
    std::vector<Cell> cells;
    std::vector<double> nodes;    // flattened, cell-major
    std::vector<double> weights;  // same length as nodes, all positive
    int refinement_level = 0;
};

/// Equal-width cells on [lo, hi]. Throws on hi <= lo or cells < 1.
Grid1D uniform_grid(double lo, double hi, int cells, int points_per_cell = 16);

/// Dyadic cells [hi/2^(k+1), hi/2^k] for k = 0..levels-1, finest first in
/// refinement order, covering (hi/2^levels, hi]. Concentrates nodes toward
/// an integrable singularity at 0.
Grid1D graded_grid(double hi, int levels, int points_per_cell = 16);

double integrate(const Grid1D&, const std::function<double(double)>& f);

/// Evaluation rule on (0, 1] with a declared singularity marker at 0.
struct SampledFunction {
    std::function<double(double)> eval;
    bool singular_at_zero = false;
};

SampledFunction constant_function(double c);
/// x |-> |log x| (singular at 0); its n-th power integrates to n! over [0,1].
SampledFunction log_magnitude_function();
/// The decreasing singular profile h below, as a sampled function.
SampledFunction h_function();

/// Cumulative profile G(x) = (1/2) Integral_0^x exp(-sqrt t) dt, a strictly
/// increasing bijection [0, inf) -> [0, 1). Closed form
/// 1 - exp(-sqrt x)(1 + sqrt x); validated against G_by_quadrature in the
/// test suite. Throws on x < 0.
double G_eval(double x);

/// Independent evaluation of the same integral by substitution t = u^2 and
/// composite Gauss-Legendre quadrature of u exp(-u) over [0, sqrt x].
double G_by_quadrature(double x);

/// Inverse profile h(x) = G^{-1}(1 - x) on (0, 1], solved by safeguarded
/// Newton iteration to relative accuracy 1e-12. Strictly decreasing with
/// h(1) = 0 and h(x) -> inf as x -> 0. Throws outside (0, 1].
double h_eval(double x);

/// Integral_0^1 h(x)^n dx by singularity-graded quadrature; equals the
/// closed form (2n+1)! . Supported for 0 <= n <= 8 (conditioning limit);
/// throws outside that range.
double moment_integral(int n);

/// L^n([0,1]) norm, or an explicit divergence signal when the graded
/// refinement toward the singularity never settles.
struct LpNorm {
    double value = 0.0;  // +inf when diverged
    bool diverged = false;
};

/// (Integral_0^1 |f|^n dx)^(1/n) with dyadic refinement toward 0 when the
/// function declares a singularity there. Throws on order < 1.
LpNorm lp_norm(const SampledFunction& f, int order);

/// Calibration sequence for the sup norm ||f|| = sup_n ||f||_n / c_n:
/// either c_n = ||h||_n (the singular profile itself) or c_n = (n!)^(1/n).
enum class NormScheme { h_calibrated, factorial };

struct BanachNorm {
    double value = 0.0;
    int attained_at = 0;        // order realizing the supremum
    bool at_last_order = false; // sup sat at n_max: not settled, larger n could grow
    bool diverged = false;      // some ||f||_n diverged
};

/// sup_{1 <= n <= n_max} ||f||_n / c_n. Requires n_max >= 4.
BanachNorm banach_norm(const SampledFunction& f, NormScheme scheme, int n_max);

/// (2n)! <= 2^(2n) (n!)^2, decided in exact integer arithmetic via the
/// equivalent central-binomial form C(2n, n) <= 4^n. Supported for
/// 0 <= n <= 20; throws outside.
bool factorial_inequality_holds(int n);

/// Checks the analytic-domination estimate
///   sum_{n <= n_max} ||f||_{2n}^n / n!  <=  1 / (1 - 2 ||f||)  + 1e-8
/// for ||f|| the factorial-calibrated norm (computed through order 2 n_max so
/// every L^{2n} factor is covered). Requires that norm < 1/2 and n_max >= 4;
/// throws otherwise. Also re-asserts the exact factorial inequality for
/// n <= 20 as a hard internal consistency check.
IdentityReport analytic_bound_check(const SampledFunction& f, int n_max);

/// Lower-bound table for Integral_delta^eps exp(t h(x)) dx with delta halved
/// per level. The integral diverges as delta -> 0 for every t > 0; the table
/// witnesses this by strict monotone growth past the threshold. No convergent
/// value for the full integral is ever reported.
struct DivergenceWitness {
    double t = 0.0;
    double eps = 0.0;
    double threshold = 1e6;
    std::vector<double> deltas;     // per level
    std::vector<double> integrals;  // per level, strictly increasing
    bool diverged = false;      // threshold exceeded within the level budget
    bool inconclusive = false;  // budget exhausted, growth still ongoing
    bool settled = false;       // increments vanished (convergent control case)
};

/// Requires t >= 0 (t = 0 is the convergent control), eps in (0, 1),
/// levels >= 1. Integrand exponents are clamped at 700 to keep entries
/// finite; clamping only ever lowers a value, so the table stays a valid
/// lower bound, and it can only engage far above the threshold.
DivergenceWitness divergence_witness(double t, double eps, int levels);

/// Deterministic CSV rendering (level, delta, integral) with shortest
/// round-trip number formatting.
std::string witness_csv(const DivergenceWitness&);

}  // namespace ospfock
