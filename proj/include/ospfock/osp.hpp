#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ospfock/rng.hpp"

namespace ospfock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Z2 parity. Fermionic one-particle coordinates are even, bosonic ones odd.
enum class Parity : int { even = 0, odd = 1 };

inline Parity parity_sum(Parity a, Parity b) {
    return static_cast<Parity>((static_cast<int>(a) + static_cast<int>(b)) % 2);
}

/// (-1)^{p(a)p(b)}
inline double koszul_sign(Parity a, Parity b) {
    return (a == Parity::odd && b == Parity::odd) ? -1.0 : 1.0;
}

/// Elements whose membership defect is below this are treated as certified.
inline constexpr double kMembershipTol = 1e-10;

/// Rigorous bracket bound for the primed norm: ||[x,y]||' <= 2 ||x||' ||y||'
/// (the primed norm is submultiplicative under composition, and a bracket is
/// a difference of two compositions).
inline constexpr double kBracketBoundConstant = 2.0;

/// Z2-graded truncated one-particle space C^{m_f + m_b}. Coordinates
/// 0 .. m_f-1 are fermionic (parity 0), m_f .. m_f+m_b-1 bosonic (parity 1).
/// The Hermitian inner product is conjugate-linear in the first argument.
class TruncatedSpace {
public:
    TruncatedSpace(int m_f, int m_b);  ///< throws unless m_f >= 1 and m_b >= 1

    int fermionic_modes() const { return m_f_; }
    int bosonic_modes() const { return m_b_; }
    int dim() const { return m_f_ + m_b_; }

    bool fermionic_coord(int j) const { return j < m_f_; }
    int coord_parity(int j) const { return j < m_f_ ? 0 : 1; }

    /// Graded real bilinear form: Re<v,w> on the fermionic block,
    /// Im<v,w> on the bosonic block, zero across blocks.
    double graded_form(const Vector& v, const Vector& w) const;

    /// Multiplication by i.
    Matrix j_plus() const;
    /// -i on fermionic coordinates, +i on bosonic coordinates.
    Matrix j_minus() const;

private:
    int m_f_;
    int m_b_;
};

/// Real-linear operator v |-> lin*v + conj*conj(v).
struct RealLinearOperator {
    Matrix lin;
    Matrix conj;

    static RealLinearOperator zero(int dim);
    static RealLinearOperator identity(int dim);

    Vector apply(const Vector& v) const;
    int dim() const { return static_cast<int>(lin.rows()); }
};

RealLinearOperator operator+(const RealLinearOperator&, const RealLinearOperator&);
RealLinearOperator operator-(const RealLinearOperator&, const RealLinearOperator&);
RealLinearOperator operator*(double, const RealLinearOperator&);

/// Composition (x after y). Antilinear-antilinear products contribute to the
/// linear part, mixed products to the antilinear part.
RealLinearOperator compose(const RealLinearOperator& x, const RealLinearOperator& y);

/// 2d x 2d real matrix of the operator acting on [Re v; Im v].
Eigen::MatrixXd real_embedding(const RealLinearOperator&);

/// Split a real 2d x 2d action into its complex-linear and antilinear parts.
RealLinearOperator decompose(const Eigen::MatrixXd& real_action);

/// Parity-homogeneous element of the truncated orthosymplectic algebra,
/// together with the membership defect observed when it was formed.
struct OspElement {
    RealLinearOperator op;
    Parity parity = Parity::even;
    double residual = 0.0;

    bool certified() const { return residual <= kMembershipTol; }
};

OspElement operator+(const OspElement&, const OspElement&);
OspElement operator-(const OspElement&, const OspElement&);
OspElement operator*(double, const OspElement&);

/// Largest off-parity block entry (an OspElement should keep this ~0).
double parity_defect(const TruncatedSpace&, const Matrix&, Parity);

/// Membership defect: max over ordered pairs (v, w) of real basis vectors
/// {e_j, i e_j} of |(Tv, w) + (-1)^{p(T)p(v)} (v, Tw)| in the graded form.
double osp_residual(const TruncatedSpace&, const RealLinearOperator&, Parity);

/// Orthogonal projection (Frobenius inner product on the real parameters)
/// onto the parity-homogeneous membership subspace.
class OspProjector {
public:
    OspProjector(const TruncatedSpace&, Parity);

    OspElement project(const RealLinearOperator&) const;
    int subspace_dim() const { return static_cast<int>(basis_cols_.cols()); }
    /// Orthonormal basis of the subspace, in a deterministic order.
    std::vector<OspElement> basis() const;
    const TruncatedSpace& space() const { return space_; }
    Parity parity() const { return parity_; }

private:
    TruncatedSpace space_;
    Parity parity_;
    Eigen::MatrixXd basis_cols_;  // 4d^2 x subspace_dim, orthonormal columns
};

OspElement project_to_osp(const TruncatedSpace&, const RealLinearOperator&, Parity);

/// Projected Gaussian element (certified by construction).
OspElement random_osp(const OspProjector&, Rng&);
OspElement random_osp(const TruncatedSpace&, Parity, Rng&);

/// [x, y] = x o y - (-1)^{p(x)p(y)} y o x, with the residual recomputed.
OspElement superbracket(const TruncatedSpace&, const OspElement&, const OspElement&);

/// Primed norm: operator norm of the linear part plus Hilbert-Schmidt norm
/// of the antilinear part over the underlying real space (the latter equals
/// sqrt(2) times the complex Frobenius norm of `conj`).
double osp_norm(const OspElement&);

/// Empirical max of ||[x,y]||' / (||x||'||y||') over `samples` seeded
/// certified pairs. Rescaling the norm by this constant makes the bracket
/// inequality ||[x,y]|| <= ||x|| ||y|| hold on the sampled family.
double bracket_norm_constant(const TruncatedSpace&, std::uint64_t seed, int samples);

inline double osp_norm_scaled(const OspElement& x, double constant) {
    return constant * osp_norm(x);
}

/// Scale an element to a target primed norm (throws on zero input).
OspElement normalized(const TruncatedSpace&, const OspElement&, double target_norm = 1.0);

/// Returns x with its antilinear block scaled by `factor`. Membership is
/// preserved: the linear and antilinear constraints are independent.
OspElement scale_antilinear(const TruncatedSpace&, OspElement x, double factor);

/// 2-cocycle: 0 for mixed parity; -1/2 realtrace(J- o x_conj o y_conj) for
/// equal-parity pairs, with realtrace(L) = 2 Re tr(L) for a complex-linear L.
/// J- (the grading involution times i) appears for both parities: this is the
/// unique trace form that matches the oscillator representation's commutator
/// defect and closes the graded 2-cocycle identity (the bosonic half is
/// unchanged if J- is replaced by J+, so all-even-bosonic probes cannot
/// distinguish the two; the fermionic half fixes the choice).
double cocycle(const TruncatedSpace&, const OspElement&, const OspElement&);

/// Element of the one-dimensional central extension.
struct CentralElement {
    OspElement body;
    double z = 0.0;
};

CentralElement central_lift(OspElement body, double z = 0.0);
CentralElement operator+(const CentralElement&, const CentralElement&);
CentralElement operator*(double, const CentralElement&);

/// [(x, z), (x', z')] = ([x, x'], cocycle(x, x')).
CentralElement extended_bracket(const TruncatedSpace&, const CentralElement&,
                                const CentralElement&);

struct AdjointOrbitResult {
    OspElement value;
    double tail_bound = 0.0;  ///< in the 2x-rescaled (submultiplicative) norm
    int terms_used = 0;
};

/// Partial sum sum_{n<=n_max} ad_y^n(x)/n! for even y, with the rigorous
/// remainder bound sum_{n>n_max} s(y)^n s(x)/n!, s = 2 * primed norm.
AdjointOrbitResult adjoint_orbit(const TruncatedSpace&, const OspElement& y,
                                 const OspElement& x, int n_max);

/// sum_{n > n_after} t^n / n! for t >= 0.
double exp_tail_bound(double t, int n_after);

/// Norm bounds for v = v1 (x) 1 + v2 (x) i in the complexification:
/// lower = max(||v1||, ||v2||), upper = ||v1|| + ||v2|| (primed norms).
std::pair<double, double> complexification_bounds(const OspElement& v1,
                                                  const OspElement& v2);

}  // namespace ospfock
