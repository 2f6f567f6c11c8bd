#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ospfock/osp.hpp"

namespace {

using namespace ospfock;

// Real basis of C^d over R in the order used throughout: e_0..e_{d-1},
// then i*e_0..i*e_{d-1}.
Vector real_basis(int d, int i) {
    Vector v = Vector::Zero(d);
    if (i < d) {
        v(i) = 1.0;
    } else {
        v(i - d) = Complex(0.0, 1.0);
    }
    return v;
}

// Gram matrix of the graded form on the real basis.
Eigen::MatrixXd gram_matrix(const TruncatedSpace& space) {
    const int d = space.dim();
    Eigen::MatrixXd g(2 * d, 2 * d);
    for (int i = 0; i < 2 * d; ++i) {
        for (int j = 0; j < 2 * d; ++j) {
            g(i, j) = space.graded_form(real_basis(d, i), real_basis(d, j));
        }
    }
    return g;
}

// Matrix-level membership oracle, independent of osp_residual's pair scan:
// with M the real embedding, G the Gram matrix of the graded form and S the
// diagonal of signs (-1)^{p(T) p(b_i)}, the defect matrix is M^T G + S G M.
double residual_oracle(const TruncatedSpace& space, const RealLinearOperator& op,
                       Parity parity) {
    const int d = space.dim();
    const Eigen::MatrixXd m = real_embedding(op);
    const Eigen::MatrixXd g = gram_matrix(space);
    Eigen::VectorXd signs(2 * d);
    for (int i = 0; i < 2 * d; ++i) {
        const int coord = i < d ? i : i - d;
        const bool flip = parity == Parity::odd && space.coord_parity(coord) == 1;
        signs(i) = flip ? -1.0 : 1.0;
    }
    const Eigen::MatrixXd defect = m.transpose() * g + signs.asDiagonal() * (g * m);
    return defect.cwiseAbs().maxCoeff();
}

RealLinearOperator random_raw(int d, Rng& rng) {
    RealLinearOperator op = RealLinearOperator::zero(d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            op.lin(r, c) = Complex(rng.gaussian(), rng.gaussian());
            op.conj(r, c) = Complex(rng.gaussian(), rng.gaussian());
        }
    }
    return op;
}

Vector random_vector(int d, Rng& rng) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    return v;
}

// Frobenius inner product on the (lin, conj) parameter pair.
double param_dot(const OspElement& a, const OspElement& b) {
    return (a.op.lin.conjugate().cwiseProduct(b.op.lin)).sum().real() +
           (a.op.conj.conjugate().cwiseProduct(b.op.conj)).sum().real();
}

}  // namespace

TEST_SUITE("osp") {

TEST_CASE("truncated space validates mode counts") {
    CHECK_THROWS_AS(TruncatedSpace(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedSpace(1, 0), std::invalid_argument);
    const TruncatedSpace space(2, 3);
    CHECK(space.dim() == 5);
    CHECK(space.fermionic_coord(1));
    CHECK(!space.fermionic_coord(2));
    CHECK(space.coord_parity(0) == 0);
    CHECK(space.coord_parity(4) == 1);
}

TEST_CASE("graded form is block diagonal, symmetric on fermions, alternating on bosons") {
    const TruncatedSpace space(2, 2);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Vector vf = Vector::Zero(4), wf = Vector::Zero(4);
        Vector vb = Vector::Zero(4), wb = Vector::Zero(4);
        for (int j = 0; j < 2; ++j) {
            vf(j) = Complex(rng.gaussian(), rng.gaussian());
            wf(j) = Complex(rng.gaussian(), rng.gaussian());
            vb(j + 2) = Complex(rng.gaussian(), rng.gaussian());
            wb(j + 2) = Complex(rng.gaussian(), rng.gaussian());
        }
        CHECK(space.graded_form(vf, wb) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(space.graded_form(vb, wf) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(space.graded_form(vf, wf) ==
              doctest::Approx(space.graded_form(wf, vf)).epsilon(1e-12));
        CHECK(space.graded_form(vb, wb) ==
              doctest::Approx(-space.graded_form(wb, vb)).epsilon(1e-12));
    }
}

TEST_CASE("gram matrix of the graded form is the expected block pattern") {
    const TruncatedSpace space(1, 2);
    const int d = 3;
    const Eigen::MatrixXd g = gram_matrix(space);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    // fermionic coords: Re<.,.> pairs (e_j, e_j) and (i e_j, i e_j)
    expected(0, 0) = 1.0;
    expected(d + 0, d + 0) = 1.0;
    // bosonic coords: Im<.,.> pairs (e_j, i e_j) = +1 and (i e_j, e_j) = -1
    for (int j = 1; j < d; ++j) {
        expected(j, d + j) = 1.0;
        expected(d + j, j) = -1.0;
    }
    CHECK((g - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("real embedding and decompose are mutually inverse") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 3;
        const RealLinearOperator op = random_raw(d, rng);
        const Eigen::MatrixXd m = real_embedding(op);
        const RealLinearOperator back = decompose(m);
        CHECK((back.lin - op.lin).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.conj - op.conj).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((real_embedding(back) - m).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(decompose(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("real embedding represents the action on stacked real/imaginary parts") {
    Rng rng(13);
    const int d = 4;
    const RealLinearOperator op = random_raw(d, rng);
    const Eigen::MatrixXd m = real_embedding(op);
    for (int trial = 0; trial < 25; ++trial) {
        const Vector v = random_vector(d, rng);
        const Vector image = op.apply(v);
        Eigen::VectorXd stacked(2 * d);
        stacked << v.real(), v.imag();
        const Eigen::VectorXd mapped = m * stacked;
        CHECK((mapped.head(d) - image.real()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((mapped.tail(d) - image.imag()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("antilinear rank-one embedding has Frobenius norm sqrt(2)") {
    // conj = E_00, lin = 0: the real embedding must carry twice the squared
    // complex Frobenius mass.
    RealLinearOperator op = RealLinearOperator::zero(3);
    op.conj(0, 0) = 1.0;
    CHECK(real_embedding(op).norm() == doctest::Approx(std::numbers::sqrt2));
}

TEST_CASE("composition matches pointwise application and real-matrix product") {
    Rng rng(17);
    const int d = 3;
    for (int trial = 0; trial < 20; ++trial) {
        const RealLinearOperator x = random_raw(d, rng);
        const RealLinearOperator y = random_raw(d, rng);
        const RealLinearOperator xy = compose(x, y);
        const Vector v = random_vector(d, rng);
        CHECK((xy.apply(v) - x.apply(y.apply(v))).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::MatrixXd lhs = real_embedding(xy);
        const Eigen::MatrixXd rhs = real_embedding(x) * real_embedding(y);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("membership residual of named elements") {
    const TruncatedSpace space(2, 2);
    const int d = space.dim();

    SUBCASE("multiplication by i on the fermionic block is orthosymplectic") {
        RealLinearOperator op = RealLinearOperator::zero(d);
        op.lin(0, 0) = Complex(0, 1);
        op.lin(1, 1) = Complex(0, 1);
        CHECK(osp_residual(space, op, Parity::even) < 1e-14);
    }

    SUBCASE("multiplication by i everywhere is orthosymplectic") {
        RealLinearOperator op{Complex(0, 1) * Matrix::Identity(d, d),
                              Matrix::Zero(d, d)};
        CHECK(osp_residual(space, op, Parity::even) < 1e-14);
    }

    SUBCASE("orthogonal projection onto the first fermionic mode has defect 2") {
        // Defect at v = w = f_1: (P v, w) + (v, P w) = 1 + 1.
        RealLinearOperator op = RealLinearOperator::zero(d);
        op.lin(0, 0) = 1.0;
        CHECK(osp_residual(space, op, Parity::even) == doctest::Approx(2.0));
    }

    SUBCASE("identity has defect 2") {
        CHECK(osp_residual(space, RealLinearOperator::identity(d), Parity::even) ==
              doctest::Approx(2.0));
    }
}

TEST_CASE("membership residual agrees with the matrix-level oracle") {
    Rng rng(23);
    for (const auto& dims : {std::pair{1, 1}, std::pair{2, 2}, std::pair{1, 2}}) {
        const TruncatedSpace space(dims.first, dims.second);
        for (int trial = 0; trial < 10; ++trial) {
            const RealLinearOperator op = random_raw(space.dim(), rng);
            for (Parity p : {Parity::even, Parity::odd}) {
                CHECK(osp_residual(space, op, p) ==
                      doctest::Approx(residual_oracle(space, op, p)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("projector subspace dimensions match the closed-form count") {
    // even: m_f^2 + m_b^2 + m_f(m_f-1) + m_b(m_b+1); odd: 4 m_f m_b.
    struct Case {
        int m_f, m_b, even, odd;
    };
    for (const Case& c : {Case{1, 1, 4, 4}, Case{2, 2, 16, 16}, Case{1, 2, 11, 8}}) {
        const TruncatedSpace space(c.m_f, c.m_b);
        CHECK(OspProjector(space, Parity::even).subspace_dim() == c.even);
        CHECK(OspProjector(space, Parity::odd).subspace_dim() == c.odd);
    }
}

TEST_CASE("projection is idempotent, certified, and fixes members") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const RealLinearOperator raw = random_raw(space.dim(), rng);
        for (const OspProjector* proj : {&even, &odd}) {
            const OspElement once = proj->project(raw);
            CHECK(once.certified());
            CHECK(once.residual < 1e-12);
            const OspElement twice = proj->project(once.op);
            CHECK((twice.op.lin - once.op.lin).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((twice.op.conj - once.op.conj).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    // A known member projects to itself.
    RealLinearOperator member{Complex(0, 1) * Matrix::Identity(4, 4),
                              Matrix::Zero(4, 4)};
    const OspElement fixed = even.project(member);
    CHECK((fixed.op.lin - member.lin).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fixed.op.conj.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projector basis is orthonormal and certified") {
    const TruncatedSpace space(2, 2);
    for (Parity p : {Parity::even, Parity::odd}) {
        const OspProjector proj(space, p);
        const std::vector<OspElement> basis = proj.basis();
        CHECK(static_cast<int>(basis.size()) == proj.subspace_dim());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            CHECK(basis[i].certified());
            CHECK(parity_defect(space, basis[i].op.lin, p) < 1e-12);
            CHECK(parity_defect(space, basis[i].op.conj, p) < 1e-12);
            for (std::size_t j = 0; j <= i; ++j) {
                const double expected = i == j ? 1.0 : 0.0;
                CHECK(param_dot(basis[i], basis[j]) ==
                      doctest::Approx(expected).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("random elements are deterministic per seed and certified") {
    const TruncatedSpace space(2, 2);
    const OspProjector proj(space, Parity::odd);
    Rng a(99), b(99), c(100);
    const OspElement x = random_osp(proj, a);
    const OspElement y = random_osp(proj, b);
    const OspElement z = random_osp(proj, c);
    CHECK((x.op.lin - y.op.lin).cwiseAbs().maxCoeff() == 0.0);
    CHECK((x.op.conj - y.op.conj).cwiseAbs().maxCoeff() == 0.0);
    CHECK((x.op.lin - z.op.lin).cwiseAbs().maxCoeff() > 1e-3);
    CHECK(x.certified());
    CHECK(osp_norm(x) > 0.1);
}

TEST_CASE("superbracket closes with small residual and correct parity") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const OspElement e1 = random_osp(even, rng);
        const OspElement e2 = random_osp(even, rng);
        const OspElement o1 = random_osp(odd, rng);
        const OspElement o2 = random_osp(odd, rng);

        const OspElement ee = superbracket(space, e1, e2);
        CHECK(ee.parity == Parity::even);
        CHECK(ee.residual <= 1e-9);

        const OspElement eo = superbracket(space, e1, o1);
        CHECK(eo.parity == Parity::odd);
        CHECK(eo.residual <= 1e-9);

        const OspElement oo = superbracket(space, o1, o2);
        CHECK(oo.parity == Parity::even);
        CHECK(oo.residual <= 1e-9);

        // Graded antisymmetry: [x,y] = -(-1)^{p(x)p(y)}[y,x].
        const OspElement oo_rev = superbracket(space, o2, o1);
        CHECK((oo.op.lin - oo_rev.op.lin).cwiseAbs().maxCoeff() < 1e-10);
        const OspElement ee_rev = superbracket(space, e2, e1);
        CHECK((ee.op.lin + ee_rev.op.lin).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("graded Jacobi identity holds on random certified triples") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        // Mix parities across trials.
        const OspElement x = (trial % 2 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
        const OspElement y = (trial % 3 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
        const OspElement z = (trial % 5 == 0) ? random_osp(even, rng) : random_osp(odd, rng);

        const double sxz = koszul_sign(x.parity, z.parity);
        const double syx = koszul_sign(y.parity, x.parity);
        const double szy = koszul_sign(z.parity, y.parity);

        const OspElement t1 = superbracket(space, x, superbracket(space, y, z));
        const OspElement t2 = superbracket(space, y, superbracket(space, z, x));
        const OspElement t3 = superbracket(space, z, superbracket(space, x, y));

        const RealLinearOperator total =
            sxz * t1.op + syx * t2.op + szy * t3.op;
        const double scale = osp_norm(x) * osp_norm(y) * osp_norm(z);
        const double defect =
            (total.lin.cwiseAbs().maxCoeff() + total.conj.cwiseAbs().maxCoeff()) / scale;
        CHECK(defect < 1e-12);
    }
}

TEST_CASE("cocycle vanishes on mixed parity and is graded antisymmetric") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const OspElement e1 = random_osp(even, rng);
        const OspElement e2 = random_osp(even, rng);
        const OspElement o1 = random_osp(odd, rng);
        const OspElement o2 = random_osp(odd, rng);
        CHECK(cocycle(space, e1, o1) == 0.0);
        CHECK(cocycle(space, o1, e1) == 0.0);
        // even-even: antisymmetric; odd-odd: symmetric.
        CHECK(cocycle(space, e1, e2) ==
              doctest::Approx(-cocycle(space, e2, e1)).epsilon(1e-10));
        CHECK(cocycle(space, o1, o2) ==
              doctest::Approx(cocycle(space, o2, o1)).epsilon(1e-10));
    }
}

TEST_CASE("cocycle matches hand-computed traces on one mode of each kind") {
    const TruncatedSpace space(1, 1);

    SUBCASE("even pair supported on the bosonic antilinear entry") {
        // x_conj = diag(0, 1), y_conj = diag(0, i):
        // omega = Im(beta conj(beta')) = Im(1 * (-i)) = -1.
        OspElement x{RealLinearOperator::zero(2), Parity::even, 0.0};
        OspElement y{RealLinearOperator::zero(2), Parity::even, 0.0};
        x.op.conj(1, 1) = 1.0;
        y.op.conj(1, 1) = Complex(0, 1);
        CHECK(cocycle(space, x, y) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(cocycle(space, y, x) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("odd pair supported on the off-diagonal antilinear entries") {
        // x_conj = [[0,1],[2,0]], y_conj = [[0,i],[3i,0]]:
        // omega = Im(c2 conj(d1)) - Im(c1 conj(d2)) = -2 + 3 = 1.
        OspElement x{RealLinearOperator::zero(2), Parity::odd, 0.0};
        OspElement y{RealLinearOperator::zero(2), Parity::odd, 0.0};
        x.op.conj(0, 1) = 1.0;
        x.op.conj(1, 0) = 2.0;
        y.op.conj(0, 1) = Complex(0, 1);
        y.op.conj(1, 0) = Complex(0, 3);
        CHECK(cocycle(space, x, y) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("even pair supported on the fermionic antilinear block") {
        // Two fermionic modes: x_conj = [[0,1],[-1,0]], y_conj = [[0,i],[-i,0]]
        // on the fermionic block. The fermionic half of the trace form carries
        // the grading involution's -i, giving -Im<x_c, y_c>_F = -2 (the
        // opposite involution branch would give +2).
        const TruncatedSpace big(2, 2);
        OspElement x{RealLinearOperator::zero(4), Parity::even, 0.0};
        OspElement y{RealLinearOperator::zero(4), Parity::even, 0.0};
        x.op.conj(0, 1) = 1.0;
        x.op.conj(1, 0) = -1.0;
        y.op.conj(0, 1) = Complex(0, 1);
        y.op.conj(1, 0) = Complex(0, -1);
        CHECK(cocycle(big, x, y) == doctest::Approx(-2.0).epsilon(1e-12));
    }
}

TEST_CASE("cocycle satisfies the graded 2-cocycle identity") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const OspElement x = (trial % 2 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
        const OspElement y = (trial % 3 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
        const OspElement z = (trial % 5 == 0) ? random_osp(even, rng) : random_osp(odd, rng);

        const double sxz = koszul_sign(x.parity, z.parity);
        const double syx = koszul_sign(y.parity, x.parity);
        const double szy = koszul_sign(z.parity, y.parity);

        const double total = sxz * cocycle(space, superbracket(space, x, y), z) +
                             syx * cocycle(space, superbracket(space, y, z), x) +
                             szy * cocycle(space, superbracket(space, z, x), y);
        const double scale = osp_norm(x) * osp_norm(y) * osp_norm(z);
        CHECK(std::abs(total) / scale < 1e-12);
    }
}

TEST_CASE("extended bracket carries the cocycle in the central slot") {
    const TruncatedSpace space(2, 2);
    const OspProjector odd(space, Parity::odd);
    Rng rng(47);
    const OspElement x = random_osp(odd, rng);
    const OspElement y = random_osp(odd, rng);
    const CentralElement u = central_lift(x, 0.7);
    const CentralElement v = central_lift(y, -2.0);
    const CentralElement b = extended_bracket(space, u, v);
    CHECK(b.z == doctest::Approx(cocycle(space, x, y)));
    const OspElement plain = superbracket(space, x, y);
    CHECK((b.body.op.lin - plain.op.lin).cwiseAbs().maxCoeff() < 1e-14);

    const CentralElement sum = u + v;
    CHECK(sum.z == doctest::Approx(-1.3));
    const CentralElement scaled = 2.0 * u;
    CHECK(scaled.z == doctest::Approx(1.4));
}

TEST_CASE("primed norm and the rigorous bracket inequality") {
    const TruncatedSpace space(2, 2);
    const int d = space.dim();

    SUBCASE("norm of elementary pieces") {
        OspElement conj_only{RealLinearOperator::zero(d), Parity::even, 0.0};
        conj_only.op.conj(0, 0) = 3.0;
        CHECK(osp_norm(conj_only) == doctest::Approx(3.0 * std::numbers::sqrt2));
        OspElement lin_only{RealLinearOperator::zero(d), Parity::even, 0.0};
        lin_only.op.lin = Complex(0, 2) * Matrix::Identity(d, d);
        CHECK(osp_norm(lin_only) == doctest::Approx(2.0));
        CHECK(osp_norm_scaled(lin_only, 0.5) == doctest::Approx(1.0));
    }

    SUBCASE("measured bracket constant is at most the rigorous bound") {
        const double c = bracket_norm_constant(space, 12345, 100);
        CHECK(c > 0.1);
        CHECK(c <= kBracketBoundConstant + 1e-9);
        CHECK_THROWS_AS(bracket_norm_constant(space, 1, 0), std::invalid_argument);
    }

    SUBCASE("bracket inequality on fresh samples") {
        const OspProjector even(space, Parity::even);
        const OspProjector odd(space, Parity::odd);
        Rng rng(53);
        for (int trial = 0; trial < 30; ++trial) {
            const OspElement x = (trial % 2 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
            const OspElement y = (trial % 3 == 0) ? random_osp(even, rng) : random_osp(odd, rng);
            const OspElement b = superbracket(space, x, y);
            CHECK(osp_norm(b) <=
                  kBracketBoundConstant * osp_norm(x) * osp_norm(y) * (1.0 + 1e-12));
        }
    }

    SUBCASE("normalization hits the target norm") {
        const OspProjector even(space, Parity::even);
        Rng rng(59);
        const OspElement x = random_osp(even, rng);
        const OspElement unit = normalized(space, x, 1.0);
        CHECK(osp_norm(unit) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(unit.certified());
        const OspElement half = normalized(space, x, 0.5);
        CHECK(osp_norm(half) == doctest::Approx(0.5).epsilon(1e-12));
        OspElement zero{RealLinearOperator::zero(d), Parity::even, 0.0};
        CHECK_THROWS_AS(normalized(space, zero, 1.0), std::invalid_argument);
    }
}

TEST_CASE("exponential tail bound brackets the true remainder") {
    // The reference remainder sums the tail series directly; subtracting a
    // partial sum from e^t would lose all precision once the tail is tiny.
    for (double t : {0.05, 0.3, 1.0, 2.5}) {
        for (int n : {2, 5, 10}) {
            double term = 1.0;
            for (int k = 0; k <= n; ++k) term *= t / static_cast<double>(k + 1);
            double truth = 0.0;
            for (int k = n + 1; term > truth * 1e-18; ++k) {
                truth += term;
                term *= t / static_cast<double>(k + 1);
            }
            const double bound = exp_tail_bound(t, n);
            CHECK(bound >= truth * (1.0 - 1e-12));
            CHECK(bound <= truth * 3.0 + 1e-300);
        }
    }
    CHECK(exp_tail_bound(0.0, 3) == 0.0);
    CHECK(exp_tail_bound(0.25, 20) < 1e-25);
    CHECK_THROWS_AS(exp_tail_bound(-1.0, 2), std::invalid_argument);
}

TEST_CASE("adjoint orbit sums the bracket series with a certified tail") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(61);
    const OspElement y = random_osp(even, rng);
    const OspElement x = random_osp(odd, rng);

    SUBCASE("direction must be even") {
        CHECK_THROWS_AS(adjoint_orbit(space, x, y, 5), std::invalid_argument);
    }

    SUBCASE("order zero returns the argument") {
        const AdjointOrbitResult r = adjoint_orbit(space, y, x, 0);
        CHECK((r.value.op.lin - x.op.lin).cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.terms_used == 1);
        CHECK(r.tail_bound ==
              doctest::Approx(kBracketBoundConstant * osp_norm(x) *
                              exp_tail_bound(kBracketBoundConstant * osp_norm(y), 0)));
    }

    SUBCASE("commuting direction reproduces the argument at any order") {
        const AdjointOrbitResult r = adjoint_orbit(space, y, y, 8);
        CHECK((r.value.op.lin - y.op.lin).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((r.value.op.conj - y.op.conj).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("partial sums converge: deep truncation is within the shallow tail bound") {
        const OspElement ys = normalized(space, y, 0.2);
        const AdjointOrbitResult shallow = adjoint_orbit(space, ys, x, 4);
        const AdjointOrbitResult deep = adjoint_orbit(space, ys, x, 30);
        const OspElement diff = deep.value - shallow.value;
        CHECK(osp_norm(diff) <= shallow.tail_bound * (1.0 + 1e-9));
        CHECK(deep.tail_bound < 1e-12);
        CHECK(deep.value.residual <= 1e-9);
    }
}

TEST_CASE("complexification bounds are the max and the sum of the part norms") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    Rng rng(67);
    const OspElement v1 = random_osp(even, rng);
    const OspElement v2 = random_osp(even, rng);
    const auto [lower, upper] = complexification_bounds(v1, v2);
    CHECK(lower == doctest::Approx(std::max(osp_norm(v1), osp_norm(v2))));
    CHECK(upper == doctest::Approx(osp_norm(v1) + osp_norm(v2)));
    CHECK(lower <= upper);
}

TEST_CASE("element arithmetic guards parity and tracks residual bounds") {
    const TruncatedSpace space(2, 2);
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    Rng rng(71);
    const OspElement e = random_osp(even, rng);
    const OspElement o = random_osp(odd, rng);
    CHECK_THROWS_AS(e + o, std::invalid_argument);
    CHECK_THROWS_AS(e - o, std::invalid_argument);
    const OspElement sum = e + e;
    CHECK(sum.residual >= e.residual);
    const OspElement scaled = -2.0 * e;
    CHECK(scaled.residual == doctest::Approx(2.0 * e.residual));
    CHECK((scaled.op.lin + 2.0 * e.op.lin).cwiseAbs().maxCoeff() < 1e-15);
}

}  // TEST_SUITE
