#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "ospfock/osp.hpp"
#include "ospfock/rng.hpp"

namespace ospfock {

/// Reduced monomial: fermionic occupation bitmask (bit m-1 <=> fermionic mode
/// m present) and bosonic occupation counts per mode. The canonical written
/// form is fermionic factors first in ascending mode order, then bosonic
/// factors in ascending mode order.
struct FockIndex {
    std::uint32_t ferm = 0;
    std::vector<std::uint16_t> bos;

    int ferm_degree() const;
    int bos_degree() const;
    int total_degree() const { return ferm_degree() + bos_degree(); }
    /// Monomial parity is the fermionic factor count mod 2.
    int parity() const { return ferm_degree() % 2; }

    bool operator==(const FockIndex& other) const {
        return ferm == other.ferm && bos == other.bos;
    }
};

/// Strict enumeration order: ascending total degree, then fermionic degree,
/// then the fermionic bitmask as an integer, then the bosonic occupation
/// sequence lexicographically. Fixes a bit-reproducible basis order.
bool graded_lex_less(const FockIndex&, const FockIndex&);

struct GradedLexLess {
    bool operator()(const FockIndex& a, const FockIndex& b) const {
        return graded_lex_less(a, b);
    }
};

/// Truncated graded Fock space: every reduced monomial on m_f fermionic and
/// m_b bosonic modes with total degree at most the cap, enumerated in
/// graded-lexicographic order (the vacuum is index 0).
class FockSpace {
public:
    /// Throws std::invalid_argument unless 1 <= m_f <= 31, m_b >= 1, cap >= 0.
    FockSpace(int m_f, int m_b, int degree_cap);
    FockSpace(const TruncatedSpace& one_particle, int degree_cap);

    int fermionic_modes() const { return m_f_; }
    int bosonic_modes() const { return m_b_; }
    int degree_cap() const { return cap_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<FockIndex>& basis() const { return basis_; }
    const FockIndex& vacuum() const { return basis_.front(); }

    /// Enumeration position, or -1 when the index lies outside the truncation.
    /// Throws std::invalid_argument if the occupation vector has the wrong
    /// number of modes.
    int index_of(const FockIndex&) const;

private:
    int m_f_;
    int m_b_;
    int cap_;
    std::vector<FockIndex> basis_;
    std::map<FockIndex, int, GradedLexLess> positions_;
};

/// Finitely supported complex amplitude map over reduced monomials. Exact
/// zeros are pruned on insertion.
class FockVector {
public:
    using Amplitudes = std::map<FockIndex, Complex, GradedLexLess>;

    FockVector() = default;

    void add(const FockIndex& index, Complex amplitude);
    Complex amplitude(const FockIndex& index) const;
    const Amplitudes& amplitudes() const { return amplitudes_; }
    bool empty() const { return amplitudes_.empty(); }
    std::size_t support_size() const { return amplitudes_.size(); }
    /// Largest total degree in the support (-1 when empty).
    int max_degree() const;

    FockVector& operator+=(const FockVector&);
    FockVector& operator*=(Complex);

private:
    Amplitudes amplitudes_;
};

FockVector operator+(FockVector, const FockVector&);
FockVector operator*(Complex, FockVector);

/// Expands a word of one-particle vectors multilinearly over basis modes and
/// reorders each resulting word into reduced form: fermionic anticommutation
/// signs, commuting bosonic factors, commuting mixed factors, and repeated
/// fermionic modes annihilating the term. No degree cap is applied.
/// Throws std::invalid_argument if a factor has the wrong dimension.
FockVector reduce_monomial(const TruncatedSpace& one_particle,
                           const std::vector<Vector>& factors,
                           Complex coefficient = Complex(1.0, 0.0));

/// Sesquilinear pairing, conjugate-linear in the first argument; reduced
/// monomials form an orthonormal basis by definition.
Complex fock_inner(const FockVector& v, const FockVector& w);

/// Uniform norm bound for the degree-raising quadratic action on the graded
/// component of fermionic degree k and bosonic degree l:
/// 0.5 * sqrt((k+l+1)(k+l+2)).
double grade_raise_coefficient(int k, int l);

/// Action of the complex-linear part of x: second-quantized one-particle
/// operator (number-conserving quadratic with square-root occupation
/// weights). Preserves total degree; shifts (ferm, bos) degrees by (0,0) for
/// even x and by (+1,-1)/(-1,+1) for odd x.
FockVector rho_lin(const FockSpace&, const OspElement& x, const FockVector& v);

/// Action of the antilinear part of x: the degree-raising half of its
/// quadratic, 1/2 [ i sum_{u,r} M_{ur} adag_u adag_r
///                + sum_{t,s} M_{ts} cdag_t cdag_s
///                + i sum_{t,r} M_{tr} cdag_t adag_r
///                + sum_{u,s} M_{us} adag_u cdag_s ]   (M = x.op.conj, blocks
/// indexed fermionic-then-bosonic). Raises total degree by exactly 2 on every
/// graded component. Terms that would exceed the cap are dropped; when
/// `clipped` is non-null it reports whether any term was dropped.
FockVector a_op(const FockSpace&, const OspElement& x, const FockVector& v,
                bool* clipped = nullptr);

/// Sparse matrix of an operator over the enumerated basis, together with the
/// set of (delta ferm-degree, delta bos-degree) grade shifts it realizes and
/// the largest total degree on which its action agrees with the untruncated
/// operator.
struct FockOperator {
    Eigen::SparseMatrix<Complex> matrix;
    std::vector<std::pair<int, int>> degree_shifts;
    int safe_degree = 0;
};

/// Throws std::logic_error if any nonzero entry connects grades whose
/// difference is not a declared shift, or breaks the parity discipline
/// (even operators preserve monomial parity, odd operators flip it).
void validate_grade_structure(const FockSpace&, const FockOperator&,
                              Parity op_parity);

/// Matrix of rho_lin. safe_degree = cap (degree-preserving, never clipped).
FockOperator rho_lin_matrix(const FockSpace&, const OspElement& x);

/// Matrix of a_op. safe_degree = cap - 2 (top two degrees clip).
FockOperator a_matrix(const FockSpace&, const OspElement& x);

/// Superadjoint of a_op: the conjugate transpose of the a_op matrix (legal
/// because the Gram matrix is the identity), times -i when x is odd.
/// safe_degree = cap - 2.
FockOperator a_dagger(const FockSpace&, const OspElement& x);

/// Full oscillator action of a centrally extended element:
/// rho_lin + a_op - a_dagger + i z Identity.
FockOperator rho_full(const FockSpace&, const CentralElement& u);

/// Grade-annotated sparse-triplet text serialization. Deterministic
/// (column-major entry order, hex float literals) and locale-independent;
/// byte-identical across runs for identical inputs.
std::string serialize_fock_operator(const FockSpace&, const FockOperator&);

/// Inverse of serialize_fock_operator. Throws std::invalid_argument on
/// malformed input or a header inconsistent with the given space.
FockOperator parse_fock_operator(const FockSpace&, const std::string&);

/// Text listing of the enumerated basis with grade and parity annotations.
std::string serialize_basis(const FockSpace&);

/// Coordinates of v over the enumerated basis. Throws std::invalid_argument
/// if v has support outside the truncation.
Eigen::VectorXcd to_dense(const FockSpace&, const FockVector&);

/// Inverse of to_dense; exact zeros produce no support.
FockVector from_dense(const FockSpace&, const Eigen::VectorXcd&);

/// Complex-Gaussian amplitudes on every monomial of total degree at most
/// `max_degree` (not normalized).
FockVector random_fock_vector(const FockSpace&, int max_degree, Rng&);

}  // namespace ospfock
