#include "ospfock/osp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ospfock {

namespace {

constexpr Complex kI{0.0, 1.0};

double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// Real basis of C^d over R: e_0..e_{d-1}, then i e_0..i e_{d-1}.
Vector real_basis_vector(int dim, int idx) {
    Vector v = Vector::Zero(dim);
    if (idx < dim) {
        v(idx) = 1.0;
    } else {
        v(idx - dim) = kI;
    }
    return v;
}

int real_basis_parity(const TruncatedSpace& space, int idx) {
    const int d = space.dim();
    return space.coord_parity(idx < d ? idx : idx - d);
}

// Real parameter layout of a RealLinearOperator: [Re lin, Im lin, Re conj,
// Im conj], each block column-major with d^2 entries.
Eigen::VectorXd pack(const RealLinearOperator& op) {
    const int d = op.dim();
    const int n = d * d;
    Eigen::VectorXd x(4 * n);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            const int e = c * d + r;
            x(e) = op.lin(r, c).real();
            x(n + e) = op.lin(r, c).imag();
            x(2 * n + e) = op.conj(r, c).real();
            x(3 * n + e) = op.conj(r, c).imag();
        }
    }
    return x;
}

RealLinearOperator unpack(const Eigen::VectorXd& x, int d) {
    const int n = d * d;
    RealLinearOperator op = RealLinearOperator::zero(d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            const int e = c * d + r;
            op.lin(r, c) = Complex(x(e), x(n + e));
            op.conj(r, c) = Complex(x(2 * n + e), x(3 * n + e));
        }
    }
    return op;
}

double membership_defect(const TruncatedSpace& space, const RealLinearOperator& op,
                         Parity parity, const Vector& v, int pv, const Vector& w) {
    const double sign = (parity == Parity::odd && pv == 1) ? -1.0 : 1.0;
    return space.graded_form(op.apply(v), w) + sign * space.graded_form(v, op.apply(w));
}

}  // namespace

TruncatedSpace::TruncatedSpace(int m_f, int m_b) : m_f_(m_f), m_b_(m_b) {
    if (m_f < 1 || m_b < 1) {
        throw std::invalid_argument(
            "TruncatedSpace requires at least one fermionic and one bosonic mode");
    }
}

double TruncatedSpace::graded_form(const Vector& v, const Vector& w) const {
    Complex ferm = 0.0;
    Complex bos = 0.0;
    for (int j = 0; j < m_f_; ++j) ferm += std::conj(v(j)) * w(j);
    for (int j = m_f_; j < dim(); ++j) bos += std::conj(v(j)) * w(j);
    return ferm.real() + bos.imag();
}

Matrix TruncatedSpace::j_plus() const {
    return kI * Matrix::Identity(dim(), dim());
}

Matrix TruncatedSpace::j_minus() const {
    Matrix j = Matrix::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) j(i, i) = fermionic_coord(i) ? -kI : kI;
    return j;
}

RealLinearOperator RealLinearOperator::zero(int dim) {
    return {Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
}

RealLinearOperator RealLinearOperator::identity(int dim) {
    return {Matrix::Identity(dim, dim), Matrix::Zero(dim, dim)};
}

Vector RealLinearOperator::apply(const Vector& v) const {
    return lin * v + conj * v.conjugate();
}

RealLinearOperator operator+(const RealLinearOperator& a, const RealLinearOperator& b) {
    return {a.lin + b.lin, a.conj + b.conj};
}

RealLinearOperator operator-(const RealLinearOperator& a, const RealLinearOperator& b) {
    return {a.lin - b.lin, a.conj - b.conj};
}

RealLinearOperator operator*(double s, const RealLinearOperator& a) {
    return {s * a.lin, s * a.conj};
}

RealLinearOperator compose(const RealLinearOperator& x, const RealLinearOperator& y) {
    return {x.lin * y.lin + x.conj * y.conj.conjugate(),
            x.lin * y.conj + x.conj * y.lin.conjugate()};
}

Eigen::MatrixXd real_embedding(const RealLinearOperator& op) {
    const int d = op.dim();
    Eigen::MatrixXd m(2 * d, 2 * d);
    m.topLeftCorner(d, d) = op.lin.real() + op.conj.real();
    m.topRightCorner(d, d) = -op.lin.imag() + op.conj.imag();
    m.bottomLeftCorner(d, d) = op.lin.imag() + op.conj.imag();
    m.bottomRightCorner(d, d) = op.lin.real() - op.conj.real();
    return m;
}

RealLinearOperator decompose(const Eigen::MatrixXd& real_action) {
    if (real_action.rows() != real_action.cols() || real_action.rows() % 2 != 0) {
        throw std::invalid_argument("decompose expects a square 2d x 2d matrix");
    }
    const int d = static_cast<int>(real_action.rows()) / 2;
    RealLinearOperator op = RealLinearOperator::zero(d);
    for (int j = 0; j < d; ++j) {
        Vector te(d), tie(d);
        for (int r = 0; r < d; ++r) {
            te(r) = Complex(real_action(r, j), real_action(d + r, j));
            tie(r) = Complex(real_action(r, d + j), real_action(d + r, d + j));
        }
        op.lin.col(j) = 0.5 * (te - kI * tie);
        op.conj.col(j) = 0.5 * (te + kI * tie);
    }
    return op;
}

OspElement operator+(const OspElement& a, const OspElement& b) {
    if (a.parity != b.parity) {
        throw std::invalid_argument("cannot add elements of different parity");
    }
    return {a.op + b.op, a.parity, a.residual + b.residual};
}

OspElement operator-(const OspElement& a, const OspElement& b) {
    if (a.parity != b.parity) {
        throw std::invalid_argument("cannot subtract elements of different parity");
    }
    return {a.op - b.op, a.parity, a.residual + b.residual};
}

OspElement operator*(double s, const OspElement& a) {
    return {s * a.op, a.parity, std::abs(s) * a.residual};
}

double parity_defect(const TruncatedSpace& space, const Matrix& block, Parity parity) {
    double worst = 0.0;
    const int want = parity == Parity::even ? 0 : 1;
    for (int c = 0; c < space.dim(); ++c) {
        for (int r = 0; r < space.dim(); ++r) {
            const int block_parity = space.coord_parity(r) ^ space.coord_parity(c);
            if (block_parity != want) worst = std::max(worst, std::abs(block(r, c)));
        }
    }
    return worst;
}

double osp_residual(const TruncatedSpace& space, const RealLinearOperator& op,
                    Parity parity) {
    const int d = space.dim();
    std::vector<Vector> basis;
    basis.reserve(2 * d);
    for (int i = 0; i < 2 * d; ++i) basis.push_back(real_basis_vector(d, i));
    std::vector<Vector> images;
    images.reserve(2 * d);
    for (int i = 0; i < 2 * d; ++i) images.push_back(op.apply(basis[i]));

    double worst = 0.0;
    for (int i = 0; i < 2 * d; ++i) {
        const int pv = real_basis_parity(space, i);
        const double sign = (parity == Parity::odd && pv == 1) ? -1.0 : 1.0;
        for (int j = 0; j < 2 * d; ++j) {
            const double defect = space.graded_form(images[i], basis[j]) +
                                  sign * space.graded_form(basis[i], images[j]);
            worst = std::max(worst, std::abs(defect));
        }
    }
    return worst;
}

OspProjector::OspProjector(const TruncatedSpace& space, Parity parity)
    : space_(space), parity_(parity) {
    const int d = space.dim();
    const int params = 4 * d * d;
    const int pairs = 4 * d * d;  // (2d)^2 ordered real-basis pairs

    // One row per membership defect plus one row per forbidden-parity entry.
    std::vector<int> forbidden;
    const int want = parity == Parity::even ? 0 : 1;
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            if ((space.coord_parity(r) ^ space.coord_parity(c)) != want) {
                const int e = c * d + r;
                forbidden.push_back(e);              // Re lin
                forbidden.push_back(d * d + e);      // Im lin
                forbidden.push_back(2 * d * d + e);  // Re conj
                forbidden.push_back(3 * d * d + e);  // Im conj
            }
        }
    }

    Eigen::MatrixXd constraints(pairs + static_cast<int>(forbidden.size()), params);
    constraints.setZero();

    std::vector<Vector> basis;
    basis.reserve(2 * d);
    for (int i = 0; i < 2 * d; ++i) basis.push_back(real_basis_vector(d, i));

    for (int p = 0; p < params; ++p) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(params);
        unit(p) = 1.0;
        const RealLinearOperator op = unpack(unit, d);
        for (int i = 0; i < 2 * d; ++i) {
            const int pv = real_basis_parity(space_, i);
            for (int j = 0; j < 2 * d; ++j) {
                constraints(i * 2 * d + j, p) =
                    membership_defect(space_, op, parity, basis[i], pv, basis[j]);
            }
        }
    }
    for (std::size_t f = 0; f < forbidden.size(); ++f) {
        constraints(pairs + static_cast<int>(f), forbidden[f]) = 1.0;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double cutoff = 1e-8 * std::max(1.0, sigma.size() > 0 ? sigma(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) ++rank;
    }
    basis_cols_ = svd.matrixV().rightCols(params - rank);
}

OspElement OspProjector::project(const RealLinearOperator& op) const {
    const Eigen::VectorXd x = pack(op);
    const Eigen::VectorXd projected = basis_cols_ * (basis_cols_.transpose() * x);
    RealLinearOperator result = unpack(projected, space_.dim());
    const double res = osp_residual(space_, result, parity_);
    return {std::move(result), parity_, res};
}

std::vector<OspElement> OspProjector::basis() const {
    std::vector<OspElement> out;
    out.reserve(subspace_dim());
    for (int c = 0; c < basis_cols_.cols(); ++c) {
        RealLinearOperator op = unpack(basis_cols_.col(c), space_.dim());
        const double res = osp_residual(space_, op, parity_);
        out.push_back({std::move(op), parity_, res});
    }
    return out;
}

OspElement project_to_osp(const TruncatedSpace& space, const RealLinearOperator& op,
                          Parity parity) {
    return OspProjector(space, parity).project(op);
}

OspElement random_osp(const OspProjector& projector, Rng& rng) {
    const int d = projector.space().dim();
    RealLinearOperator raw = RealLinearOperator::zero(d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            raw.lin(r, c) = Complex(rng.gaussian(), rng.gaussian());
            raw.conj(r, c) = Complex(rng.gaussian(), rng.gaussian());
        }
    }
    return projector.project(raw);
}

OspElement random_osp(const TruncatedSpace& space, Parity parity, Rng& rng) {
    return random_osp(OspProjector(space, parity), rng);
}

OspElement superbracket(const TruncatedSpace& space, const OspElement& x,
                        const OspElement& y) {
    const double sign = koszul_sign(x.parity, y.parity);
    RealLinearOperator op = compose(x.op, y.op) - sign * compose(y.op, x.op);
    const Parity parity = parity_sum(x.parity, y.parity);
    const double res = osp_residual(space, op, parity);
    return {std::move(op), parity, res};
}

double osp_norm(const OspElement& x) {
    return operator_norm(x.op.lin) + std::numbers::sqrt2 * x.op.conj.norm();
}

double bracket_norm_constant(const TruncatedSpace& space, std::uint64_t seed,
                             int samples) {
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    const OspProjector even(space, Parity::even);
    const OspProjector odd(space, Parity::odd);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        const OspProjector& pa = (i % 4 == 0 || i % 4 == 2) ? even : odd;
        const OspProjector& pb = (i % 4 < 2) ? even : odd;
        const OspElement x = random_osp(pa, rng);
        const OspElement y = random_osp(pb, rng);
        const double nx = osp_norm(x);
        const double ny = osp_norm(y);
        if (nx < 1e-12 || ny < 1e-12) continue;
        const OspElement b = superbracket(space, x, y);
        worst = std::max(worst, osp_norm(b) / (nx * ny));
    }
    return worst;
}

OspElement normalized(const TruncatedSpace& space, const OspElement& x,
                      double target_norm) {
    const double n = osp_norm(x);
    if (n < 1e-300) throw std::invalid_argument("cannot normalize a zero element");
    OspElement out = (target_norm / n) * x;
    out.residual = osp_residual(space, out.op, out.parity);
    return out;
}

OspElement scale_antilinear(const TruncatedSpace& space, OspElement x,
                            double factor) {
    x.op.conj *= factor;
    x.residual = osp_residual(space, x.op, x.parity);
    return x;
}

double cocycle(const TruncatedSpace& space, const OspElement& x, const OspElement& y) {
    if (x.parity != y.parity) return 0.0;
    const int d = space.dim();
    const RealLinearOperator xc{Matrix::Zero(d, d), x.op.conj};
    const RealLinearOperator yc{Matrix::Zero(d, d), y.op.conj};
    const RealLinearOperator j{space.j_minus(), Matrix::Zero(d, d)};
    const RealLinearOperator composite = compose(j, compose(xc, yc));
    // composite is complex-linear; realtrace(L) = 2 Re tr(L).
    const double realtrace = 2.0 * composite.lin.trace().real();
    return -0.5 * realtrace;
}

CentralElement central_lift(OspElement body, double z) {
    return {std::move(body), z};
}

CentralElement operator+(const CentralElement& a, const CentralElement& b) {
    return {a.body + b.body, a.z + b.z};
}

CentralElement operator*(double s, const CentralElement& a) {
    return {s * a.body, s * a.z};
}

CentralElement extended_bracket(const TruncatedSpace& space, const CentralElement& u,
                                const CentralElement& v) {
    return {superbracket(space, u.body, v.body), cocycle(space, u.body, v.body)};
}

double exp_tail_bound(double t, int n_after) {
    if (t < 0.0) throw std::invalid_argument("exp_tail_bound expects t >= 0");
    if (t == 0.0) return 0.0;
    const int next = n_after + 1;
    const double log_term =
        static_cast<double>(next) * std::log(t) - std::lgamma(static_cast<double>(next) + 1.0);
    if (t < static_cast<double>(next) + 1.0) {
        // Geometric domination of the factorial tail.
        return std::exp(log_term) / (1.0 - t / (static_cast<double>(next) + 1.0));
    }
    // Slowly converging regime: subtract the partial sum from e^t.
    double partial = 0.0;
    double term = 1.0;
    for (int n = 0; n <= n_after; ++n) {
        partial += term;
        term *= t / static_cast<double>(n + 1);
    }
    return std::exp(t) - partial;
}

AdjointOrbitResult adjoint_orbit(const TruncatedSpace& space, const OspElement& y,
                                 const OspElement& x, int n_max) {
    if (y.parity != Parity::even) {
        throw std::invalid_argument("adjoint_orbit requires an even direction");
    }
    if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");

    RealLinearOperator sum = x.op;
    OspElement term = x;
    int used = 1;
    for (int n = 1; n <= n_max; ++n) {
        term = superbracket(space, y, term);
        term.op = (1.0 / static_cast<double>(n)) * term.op;
        sum = sum + term.op;
        ++used;
        if (term.op.lin.norm() + term.op.conj.norm() == 0.0) break;
    }

    const double sy = kBracketBoundConstant * osp_norm(y);
    const double sx = kBracketBoundConstant * osp_norm(x);
    const double tail = sx * exp_tail_bound(sy, n_max);

    const double res = osp_residual(space, sum, x.parity);
    return {{std::move(sum), x.parity, res}, tail, used};
}

std::pair<double, double> complexification_bounds(const OspElement& v1,
                                                  const OspElement& v2) {
    const double n1 = osp_norm(v1);
    const double n2 = osp_norm(v2);
    return {std::max(n1, n2), n1 + n2};
}

}  // namespace ospfock
