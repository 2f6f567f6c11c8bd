#include "ospfock/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace ospfock {

namespace {

constexpr double kTailTarget = 1e-12;

using SparseM = Eigen::SparseMatrix<Complex>;
using DenseM = Eigen::MatrixXcd;

double max_abs(const SparseM& m) {
    double best = 0.0;
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseM::InnerIterator it(m, col); it; ++it)
            best = std::max(best, std::abs(it.value()));
    return best;
}

std::vector<int> interior_columns(const FockSpace& space, int max_degree) {
    std::vector<int> cols;
    for (int j = 0; j < space.dim(); ++j)
        if (space.basis()[j].total_degree() <= max_degree) cols.push_back(j);
    return cols;
}

void require_interior(const FockSpace& space) {
    if (space.degree_cap() < 6)
        throw SafeInteriorError(
            "no safe interior: second-order identities need degree cap >= 6, "
            "got " + std::to_string(space.degree_cap()));
}

SparseM graded_commutator(const SparseM& a, const SparseM& b, Parity pa,
                          Parity pb) {
    const Complex sign = (pa == Parity::odd && pb == Parity::odd)
                             ? Complex(1.0, 0.0)
                             : Complex(-1.0, 0.0);
    return SparseM((a * b + sign * SparseM(b * a)).pruned());
}

double dense_interior_residual(const FockSpace& space, const DenseM& m,
                               int max_degree, double scale) {
    double best = 0.0;
    for (int col = 0; col < m.cols(); ++col) {
        if (space.basis()[col].total_degree() > max_degree) continue;
        for (int row = 0; row < m.rows(); ++row) {
            if (space.basis()[row].total_degree() > max_degree) continue;
            best = std::max(best, std::abs(m(row, col)));
        }
    }
    return best / scale;
}

IdentityReport hermiticity_report(const FockSpace& space, const std::string& name,
                                  const CentralElement& u, double tolerance) {
    const FockOperator full = rho_full(space, u);
    const double scale = std::max(1.0, max_abs(full.matrix));
    SparseM defect;
    if (u.body.parity == Parity::even) {
        defect = SparseM((full.matrix + SparseM(full.matrix.adjoint())).pruned());
    } else {
        const Complex phase = std::exp(Complex(0.0, -std::atan(1.0)));
        const SparseM rotated = phase * full.matrix;
        defect = SparseM((rotated - SparseM(rotated.adjoint())).pruned());
    }
    const int interior = space.degree_cap() - 2;
    IdentityReport report = make_report(
        name, interior_residual(space, defect, interior, scale), tolerance,
        interior);
    return report;
}

/// Real coordinates of a centrally extended element, used for span fitting.
Eigen::VectorXd vectorize(const CentralElement& u) {
    const auto& lin = u.body.op.lin;
    const auto& conj = u.body.op.conj;
    const Eigen::Index d2 = lin.size();
    Eigen::VectorXd v(4 * d2 + 1);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < d2; ++i) v(at++) = lin(i).real();
    for (Eigen::Index i = 0; i < d2; ++i) v(at++) = lin(i).imag();
    for (Eigen::Index i = 0; i < d2; ++i) v(at++) = conj(i).real();
    for (Eigen::Index i = 0; i < d2; ++i) v(at++) = conj(i).imag();
    v(at) = u.z;
    return v;
}

/// Random real-linear combination of the given generators (all of one
/// parity), with coefficients in [-1, 1].
CentralElement random_combination(const std::vector<const CentralElement*>& gens,
                                  Rng& rng) {
    CentralElement acc = *gens.front();
    acc = (2.0 * rng.uniform() - 1.0) * acc;
    for (std::size_t i = 1; i < gens.size(); ++i)
        acc = acc + (2.0 * rng.uniform() - 1.0) * *gens[i];
    return acc;
}

IdentityReport bracket_compat_report(const TruncatedSpace& one,
                                     const FockSpace& space,
                                     const std::string& name,
                                     const CentralElement& u,
                                     const CentralElement& v,
                                     double tolerance) {
    const FockOperator ru = rho_full(space, u);
    const FockOperator rv = rho_full(space, v);
    const SparseM lhs =
        graded_commutator(ru.matrix, rv.matrix, u.body.parity, v.body.parity);
    const SparseM rhs = rho_full(space, extended_bracket(one, u, v)).matrix;
    const double scale =
        std::max(1.0, max_abs(ru.matrix) * max_abs(rv.matrix));
    const int interior = space.degree_cap() - 4;
    return make_report(name,
                       interior_residual(space, SparseM((lhs - rhs).pruned()),
                                         interior, scale),
                       tolerance, interior);
}

}  // namespace

IdentityReport make_report(std::string name, double residual, double tolerance,
                           int safe_degree) {
    IdentityReport report;
    report.name = std::move(name);
    report.residual = residual;
    report.tolerance = tolerance;
    report.safe_degree = safe_degree;
    report.pass = residual <= tolerance;
    return report;
}

double interior_residual(const FockSpace& space, const SparseM& m,
                         int max_degree, double scale) {
    double best = 0.0;
    for (int col = 0; col < m.outerSize(); ++col) {
        if (space.basis()[col].total_degree() > max_degree) continue;
        for (SparseM::InnerIterator it(m, col); it; ++it) {
            if (space.basis()[it.row()].total_degree() > max_degree) continue;
            best = std::max(best, std::abs(it.value()));
        }
    }
    return best / scale;
}

std::pair<Complex, double> fit_scalar_on_interior(const FockSpace& space,
                                                  const SparseM& m,
                                                  int max_degree, double scale) {
    const std::vector<int> cols = interior_columns(space, max_degree);
    if (cols.empty()) return {Complex(0.0, 0.0), 0.0};
    Complex trace(0.0, 0.0);
    for (const int j : cols) trace += m.coeff(j, j);
    const Complex c = trace / double(cols.size());

    double off_sq = 0.0;
    const std::set<int> interior(cols.begin(), cols.end());
    for (const int col : cols) {
        // Start from the fitted diagonal deficit, then add off-diagonals.
        const Complex diag = m.coeff(col, col) - c;
        off_sq += std::norm(diag);
        for (SparseM::InnerIterator it(m, col); it; ++it) {
            if (it.row() == col || !interior.count(it.row())) continue;
            off_sq += std::norm(it.value());
        }
    }
    return {c, std::sqrt(off_sq) / scale};
}

std::vector<IdentityReport> verify_identities(const TruncatedSpace& one,
                                              const FockSpace& space,
                                              const CentralElement& u,
                                              const CentralElement& u_prime,
                                              const VerifyTolerances& tol) {
    require_interior(space);
    std::vector<IdentityReport> reports;
    const int interior = space.degree_cap() - 4;

    const auto element_checks = [&](const CentralElement& w,
                                    const std::string& label) {
        if (w.body.parity == Parity::even) {
            reports.push_back(hermiticity_report(
                space, "even-skew-hermiticity." + label, w, tol.hermiticity));
        } else {
            reports.push_back(hermiticity_report(
                space, "odd-phase-hermiticity." + label, w, tol.hermiticity));
            const SparseM r = rho_full(space, w).matrix;
            const SparseM rhs =
                rho_full(space, extended_bracket(one, w, w)).matrix;
            const SparseM defect =
                SparseM((SparseM(r * r) - Complex(0.5, 0.0) * rhs).pruned());
            const double scale = std::max(1.0, max_abs(r) * max_abs(r));
            reports.push_back(make_report(
                "odd-square-identity." + label,
                interior_residual(space, defect, interior, scale), tol.square,
                interior));
        }
    };
    element_checks(u, "first");
    element_checks(u_prime, "second");

    // Pair check: the graded commutator minus the body-only bracket action
    // must be the central scalar i*cocycle times the identity.
    const FockOperator ru = rho_full(space, u);
    const FockOperator rv = rho_full(space, u_prime);
    const SparseM lhs = graded_commutator(ru.matrix, rv.matrix, u.body.parity,
                                          u_prime.body.parity);
    const SparseM body_action =
        rho_full(space,
                 central_lift(superbracket(one, u.body, u_prime.body), 0.0))
            .matrix;
    const SparseM defect = SparseM((lhs - body_action).pruned());
    const double scale = std::max(1.0, max_abs(ru.matrix) * max_abs(rv.matrix));
    const auto [fitted, off] =
        fit_scalar_on_interior(space, defect, interior, scale);
    const double omega = cocycle(one, u.body, u_prime.body);
    const Complex reference(0.0, omega);

    IdentityReport off_report =
        make_report("commutator-defect-off-scalar", off, tol.off_scalar, interior);
    off_report.has_scalar = true;
    off_report.fitted_scalar = fitted;
    off_report.reference_scalar = reference;
    off_report.off_scalar = off;
    reports.push_back(off_report);

    IdentityReport match = make_report(
        "commutator-defect-scalar-match",
        std::abs(fitted - reference) / std::max(1.0, std::abs(omega)),
        tol.bracket, interior);
    match.has_scalar = true;
    match.fitted_scalar = fitted;
    match.reference_scalar = reference;
    match.off_scalar = off;
    reports.push_back(match);
    return reports;
}

std::vector<IdentityReport> check_prerep(
    const TruncatedSpace& one, const FockSpace& space,
    const std::vector<CentralElement>& generators, Rng& rng,
    const VerifyTolerances& tol) {
    require_interior(space);
    if (generators.empty())
        throw std::invalid_argument("generator family must be nonempty");

    std::vector<IdentityReport> reports;
    // Structural facts of the truncated model: the space is graded by
    // construction and every operator is a finite matrix.
    reports.push_back(make_report("prerep-graded-domain", 0.0, 0.0,
                                  space.degree_cap()));
    reports.push_back(make_report("prerep-everywhere-defined", 0.0, 0.0,
                                  space.degree_cap()));

    std::vector<const CentralElement*> even, odd;
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const CentralElement& g = generators[i];
        const std::string tag = ".g" + std::to_string(i);
        if (g.body.parity == Parity::even) {
            even.push_back(&g);
            reports.push_back(hermiticity_report(
                space, "prerep-even-skew" + tag, g, tol.hermiticity));
        } else {
            odd.push_back(&g);
            reports.push_back(hermiticity_report(
                space, "prerep-odd-phase-hermitian" + tag, g, tol.hermiticity));
        }
    }

    // Bracket compatibility over random homogeneous combinations.
    constexpr int kSamplesPerKind = 4;
    const auto sweep = [&](const std::vector<const CentralElement*>& a,
                           const std::vector<const CentralElement*>& b,
                           const std::string& kind) {
        if (a.empty() || b.empty()) return;
        double worst = 0.0;
        for (int s = 0; s < kSamplesPerKind; ++s) {
            const CentralElement u = random_combination(a, rng);
            const CentralElement v = random_combination(b, rng);
            const IdentityReport r = bracket_compat_report(
                one, space, "tmp", u, v, tol.bracket);
            worst = std::max(worst, r.residual);
        }
        reports.push_back(make_report("prerep-bracket-compat." + kind, worst,
                                      tol.bracket, space.degree_cap() - 4));
    };
    sweep(even, even, "even-even");
    sweep(even, odd, "even-odd");
    sweep(odd, odd, "odd-odd");

    // Simple connectedness holds trivially for the connected model group;
    // recorded, not computed.
    reports.push_back(make_report("prerep-connectedness-note", 0.0, 0.0,
                                  space.degree_cap()));
    return reports;
}

IdentityReport check_conjugacy(const TruncatedSpace& one, const FockSpace& space,
                               const OspElement& x_odd, const OspElement& y_even,
                               double t, int n_max,
                               const VerifyTolerances& tol, int window) {
    require_interior(space);
    if (window < 0) window = space.degree_cap() - 4;
    if (window > space.degree_cap() - 4)
        throw std::invalid_argument(
            "conjugacy comparison window exceeds the safe interior");
    if (y_even.parity != Parity::even)
        throw std::invalid_argument("conjugation direction must be even");

    const OspElement ty = t * y_even;
    AdjointOrbitResult orbit;
    bool bounded = false;
    for (int n = 2; n <= n_max; ++n) {
        orbit = adjoint_orbit(one, ty, x_odd, n);
        if (orbit.tail_bound <= kTailTarget) {
            bounded = true;
            break;
        }
    }
    if (!bounded)
        throw std::invalid_argument(
            "adjoint series tail bound does not reach 1e-12 within the term "
            "budget; the conjugation direction is too large");

    // Central component of the orbit: the bracket with the running term
    // feeds the cocycle once per order.
    double z = 0.0;
    OspElement term = x_odd;
    for (int n = 1; n <= orbit.terms_used; ++n) {
        z += cocycle(one, ty, term) / double(n);
        term = (1.0 / double(n)) * superbracket(one, ty, term);
    }

    const DenseM ry = DenseM(rho_full(space, central_lift(y_even, 0.0)).matrix);
    const DenseM rx = DenseM(rho_full(space, central_lift(x_odd, 0.0)).matrix);
    const DenseM forward = (t * ry).exp();
    const DenseM backward = (-t * ry).exp();
    const DenseM lhs = forward * rx * backward;
    const DenseM rhs =
        DenseM(rho_full(space, CentralElement{orbit.value, z}).matrix);

    const double scale = std::max(1.0, rx.cwiseAbs().maxCoeff());
    return make_report("conjugacy-invariance",
                       dense_interior_residual(space, lhs - rhs, window, scale),
                       tol.conjugacy, window);
}

RestrictionResult restrict_generators(const TruncatedSpace& one,
                                      const FockSpace& space,
                                      const std::vector<CentralElement>& all,
                                      const std::vector<int>& selection,
                                      Rng& rng, const VerifyTolerances& tol) {
    if (selection.empty())
        throw std::invalid_argument("restriction selection must be nonempty");
    std::set<int> seen;
    for (const int i : selection) {
        if (i < 0 || i >= static_cast<int>(all.size()))
            throw std::invalid_argument("restriction index out of range: " +
                                        std::to_string(i));
        if (!seen.insert(i).second)
            throw std::invalid_argument("restriction index repeated: " +
                                        std::to_string(i));
    }

    RestrictionResult result;
    for (const int i : selection)
        result.generators.push_back(all[static_cast<std::size_t>(i)]);

    // Span matrix of the selection in real coordinates.
    const Eigen::VectorXd probe = vectorize(result.generators.front());
    Eigen::MatrixXd span(probe.size(),
                         static_cast<Eigen::Index>(result.generators.size()));
    for (Eigen::Index j = 0; j < span.cols(); ++j)
        span.col(j) = vectorize(result.generators[static_cast<std::size_t>(j)]);
    const auto solver = span.colPivHouseholderQr();

    double worst = 0.0;
    for (std::size_t a = 0; a < result.generators.size(); ++a) {
        for (std::size_t b = a; b < result.generators.size(); ++b) {
            const CentralElement bracket = extended_bracket(
                one, result.generators[a], result.generators[b]);
            const Eigen::VectorXd target = vectorize(bracket);
            const Eigen::VectorXd coeffs = solver.solve(target);
            const double res = (span * coeffs - target).norm() /
                               std::max(1.0, target.norm());
            worst = std::max(worst, res);
            if (res > tol.closure) {
                std::ostringstream msg;
                msg << "selection is not bracket-closed: the bracket of "
                       "generators "
                    << selection[a] << " and " << selection[b]
                    << " leaves the span (fit residual " << res << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }
    result.reports.push_back(make_report("restriction-bracket-closure", worst,
                                         tol.closure, space.degree_cap()));

    const std::vector<IdentityReport> prerep =
        check_prerep(one, space, result.generators, rng, tol);
    result.reports.insert(result.reports.end(), prerep.begin(), prerep.end());
    return result;
}

}  // namespace ospfock
