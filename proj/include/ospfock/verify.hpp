#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ospfock/fock.hpp"
#include "ospfock/osp.hpp"
#include "ospfock/rng.hpp"

namespace ospfock {

/// Outcome of one numerical identity check. `pass` always equals
/// `residual <= tolerance`. Scalar-defect checks additionally record the
/// fitted scalar c (defect ~ c * Identity), the predicted scalar it is
/// compared against, and the relative off-scalar residual.
struct IdentityReport {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    int safe_degree = 0;
    bool pass = false;

    bool has_scalar = false;
    Complex fitted_scalar{0.0, 0.0};
    Complex reference_scalar{0.0, 0.0};
    double off_scalar = 0.0;
};

IdentityReport make_report(std::string name, double residual, double tolerance,
                           int safe_degree);

/// Raised when the degree cap leaves no interior on which truncated operator
/// compositions are exact (identity checks need cap >= 6).
class SafeInteriorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pinned tolerances for the identity checks.
struct VerifyTolerances {
    double hermiticity = 1e-10;  ///< skew (even) / phase-Hermitian (odd)
    double square = 1e-9;        ///< odd square identity
    double bracket = 1e-9;       ///< commutator vs extended bracket
    double off_scalar = 1e-8;    ///< scalarness of the commutator defect
    double conjugacy = 1e-7;     ///< exponential-conjugation comparison
    double closure = 1e-8;       ///< restriction bracket-closure fit
};

/// Largest entry magnitude of `m` over the sub-block whose row and column
/// monomials both have total degree <= max_degree, divided by `scale`.
double interior_residual(const FockSpace&, const Eigen::SparseMatrix<Complex>&,
                         int max_degree, double scale);

/// Fits defect ~ c * Identity over the interior sub-block: c is the mean
/// diagonal entry; the second component is the Frobenius norm of
/// (defect - c*I) on that sub-block divided by `scale`.
std::pair<Complex, double> fit_scalar_on_interior(
    const FockSpace&, const Eigen::SparseMatrix<Complex>&, int max_degree,
    double scale);

/// Checks, for the pair (u, u'): per element the skew-Hermitian (even body)
/// or phase-Hermitian (odd body) property of the full oscillator matrix and,
/// for odd bodies, the square identity rho(u)^2 = 1/2 rho([u,u]-extended);
/// for the pair, that the graded commutator defect against the body-only
/// bracket is the central scalar i*cocycle times the identity.
/// Requires certified bodies. Throws SafeInteriorError when cap < 6.
std::vector<IdentityReport> verify_identities(const TruncatedSpace&,
                                              const FockSpace&,
                                              const CentralElement& u,
                                              const CentralElement& u_prime,
                                              const VerifyTolerances& = {});

/// Full axiom sweep over a generator family: structural domain facts,
/// skew/phase-Hermiticity per generator, and bracket compatibility on random
/// homogeneous real-linear combinations (deterministic given the generator
/// order and rng state). The simple-connectedness axiom is recorded as
/// skipped (it holds trivially in the connected case).
std::vector<IdentityReport> check_prerep(const TruncatedSpace&, const FockSpace&,
                                         const std::vector<CentralElement>& generators,
                                         Rng& rng, const VerifyTolerances& = {});

/// Compares exp(t*rho(y)) rho(x) exp(-t*rho(y)) with the oscillator action
/// of the adjoint-orbit series of x along t*y (central term included), on
/// the sub-block of degree <= window (default: cap-4). The series length is
/// chosen so the rigorous tail bound is <= 1e-12; throws
/// std::invalid_argument when no n <= n_max achieves that, SafeInteriorError
/// when cap < 6.
///
/// The comparison block is polluted by orbit paths that climb above the cap
/// and return; that pollution scales with a high power of the antilinear
/// size of t*y, so sharp checks use directions with a small antilinear
/// block (see scale_antilinear) and refinement comparisons (cap -> cap+2)
/// must keep `window` fixed.
IdentityReport check_conjugacy(const TruncatedSpace&, const FockSpace&,
                               const OspElement& x_odd, const OspElement& y_even,
                               double t, int n_max = 60,
                               const VerifyTolerances& = {}, int window = -1);

struct RestrictionResult {
    std::vector<CentralElement> generators;  ///< the selected subset, unchanged
    std::vector<IdentityReport> reports;     ///< closure fit + axiom sweep
};

/// Restricts the generator family to the selected indices. Every pairwise
/// extended bracket must lie in the real-linear span of the selection (fit
/// residual <= tol.closure), otherwise std::invalid_argument names the
/// offending pair. The returned generators are the same objects, so their
/// oscillator matrices are literal restrictions.
RestrictionResult restrict_generators(const TruncatedSpace&, const FockSpace&,
                                      const std::vector<CentralElement>& all,
                                      const std::vector<int>& selection,
                                      Rng& rng, const VerifyTolerances& = {});

}  // namespace ospfock
