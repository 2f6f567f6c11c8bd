#include "ospfock/fock.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ospfock {

namespace {

std::uint32_t low_bits(int mode) { return (std::uint32_t{1} << mode) - 1; }

/// (-1)^{number of occupied fermionic modes below `mode`}.
double ferm_sign(std::uint32_t mask, int mode) {
    return (std::popcount(mask & low_bits(mode)) % 2 == 0) ? 1.0 : -1.0;
}

int checked_degree_cap(int cap) {
    if (cap < 0) throw std::invalid_argument("degree cap must be nonnegative");
    if (cap > 4096) throw std::invalid_argument("degree cap is unreasonably large");
    return cap;
}

/// Appends the bosonic occupation sequences summing to `remaining` over the
/// suffix starting at `mode`, in lexicographically ascending order.
void enumerate_bosonic(std::vector<std::uint16_t>& current, int mode, int modes,
                       int remaining, std::uint32_t ferm,
                       std::vector<FockIndex>& out) {
    if (mode == modes - 1) {
        current[mode] = static_cast<std::uint16_t>(remaining);
        out.push_back(FockIndex{ferm, current});
        return;
    }
    for (int count = 0; count <= remaining; ++count) {
        current[mode] = static_cast<std::uint16_t>(count);
        enumerate_bosonic(current, mode + 1, modes, remaining - count, ferm, out);
    }
}

/// Ascending enumeration of bitmasks over `modes` bits with `bits` set ones
/// (each mask visited in increasing integer order).
std::vector<std::uint32_t> masks_with_popcount(int modes, int bits) {
    std::vector<std::uint32_t> masks;
    if (bits == 0) {
        masks.push_back(0);
        return masks;
    }
    if (bits > modes) return masks;
    std::uint32_t mask = low_bits(bits);
    const std::uint32_t limit = std::uint32_t{1} << modes;
    while (mask < limit) {
        masks.push_back(mask);
        // Gosper's hack: next larger integer with the same popcount.
        const std::uint32_t c = mask & (~mask + 1);
        const std::uint32_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    return masks;
}

void append_hex(std::string& out, double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value,
                                   std::chars_format::hex);
    out.append(buf, res.ptr);
}

double parse_hex(const std::string& token) {
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(),
                                     value, std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw std::invalid_argument("malformed float literal: " + token);
    return value;
}

const std::set<std::pair<int, int>>& allowed_shift_family() {
    static const std::set<std::pair<int, int>> family = {
        {0, 0}, {1, -1}, {-1, 1}, {2, 0}, {-2, 0},
        {0, 2}, {0, -2}, {1, 1},  {-1, -1}};
    return family;
}

std::vector<std::pair<int, int>> realized_shifts(
    const FockSpace& space, const Eigen::SparseMatrix<Complex>& m) {
    std::set<std::pair<int, int>> shifts;
    for (int col = 0; col < m.outerSize(); ++col) {
        const FockIndex& src = space.basis()[col];
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(m, col); it; ++it) {
            if (it.value() == Complex(0.0, 0.0)) continue;
            const FockIndex& dst = space.basis()[it.row()];
            shifts.emplace(dst.ferm_degree() - src.ferm_degree(),
                           dst.bos_degree() - src.bos_degree());
        }
    }
    return {shifts.begin(), shifts.end()};
}

int safe_degree_from_shifts(const FockSpace& space,
                            const std::vector<std::pair<int, int>>& shifts) {
    int max_reach = 0;
    for (const auto& [dk, dl] : shifts)
        max_reach = std::max(max_reach, std::abs(dk + dl));
    return space.degree_cap() - max_reach;
}

FockOperator finalize_operator(const FockSpace& space,
                               Eigen::SparseMatrix<Complex> matrix,
                               Parity op_parity) {
    FockOperator op;
    op.matrix = std::move(matrix);
    op.matrix.makeCompressed();
    op.degree_shifts = realized_shifts(space, op.matrix);
    for (const auto& shift : op.degree_shifts)
        if (!allowed_shift_family().count(shift))
            throw std::logic_error("operator realizes a forbidden grade shift");
    op.safe_degree = safe_degree_from_shifts(space, op.degree_shifts);
    validate_grade_structure(space, op, op_parity);
    return op;
}

/// Applies `fn(column)` for every column, in parallel when worthwhile. The
/// caller's writes must be column-local so the result is deterministic.
template <typename F>
void for_each_column(int columns, F&& fn) {
    const unsigned hardware = std::thread::hardware_concurrency();
    const int workers =
        static_cast<int>(std::min<unsigned>(hardware == 0 ? 1 : hardware, 8));
    if (columns < 128 || workers <= 1) {
        for (int j = 0; j < columns; ++j) fn(j);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int j = next.fetch_add(1); j < columns; j = next.fetch_add(1))
                fn(j);
        });
    for (auto& t : pool) t.join();
}

using ColumnAction =
    std::function<FockVector(const FockSpace&, const OspElement&, const FockIndex&)>;

Eigen::SparseMatrix<Complex> assemble(const FockSpace& space, const OspElement& x,
                                      const ColumnAction& action) {
    const int n = space.dim();
    std::vector<std::vector<Eigen::Triplet<Complex>>> per_column(
        static_cast<std::size_t>(n));
    for_each_column(n, [&](int j) {
        const FockVector image = action(space, x, space.basis()[j]);
        auto& slot = per_column[static_cast<std::size_t>(j)];
        slot.reserve(image.support_size());
        for (const auto& [index, amplitude] : image.amplitudes()) {
            const int row = space.index_of(index);
            if (row < 0)
                throw std::logic_error("operator image escaped the truncation");
            slot.emplace_back(row, j, amplitude);
        }
    });
    std::vector<Eigen::Triplet<Complex>> triplets;
    for (const auto& slot : per_column)
        triplets.insert(triplets.end(), slot.begin(), slot.end());
    Eigen::SparseMatrix<Complex> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

void check_one_particle_dim(const FockSpace& space, const OspElement& x) {
    const int d = space.fermionic_modes() + space.bosonic_modes();
    if (x.op.lin.rows() != d || x.op.lin.cols() != d ||
        x.op.conj.rows() != d || x.op.conj.cols() != d)
        throw std::invalid_argument(
            "element dimension does not match the one-particle space");
}

/// Number-conserving quadratic action on a single reduced monomial.
FockVector rho_lin_on_monomial(const FockSpace& space, const OspElement& x,
                               const FockIndex& mu, Complex scale) {
    const int m_f = space.fermionic_modes();
    const int m_b = space.bosonic_modes();
    const Matrix& L = x.op.lin;
    FockVector out;
    for (int col = 0; col < m_f + m_b; ++col) {
        for (int row = 0; row < m_f + m_b; ++row) {
            const Complex entry = L(row, col);
            if (entry == Complex(0.0, 0.0)) continue;
            const Complex coeff = scale * entry;
            if (col < m_f) {
                const int s = col;
                if (!(mu.ferm >> s & 1u)) continue;
                if (row < m_f) {
                    const int t = row;
                    if (t == s) {
                        out.add(mu, coeff);
                        continue;
                    }
                    const std::uint32_t without = mu.ferm & ~(std::uint32_t{1} << s);
                    if (without >> t & 1u) continue;
                    const double sign =
                        ferm_sign(mu.ferm, s) * ferm_sign(without, t);
                    FockIndex target = mu;
                    target.ferm = without | (std::uint32_t{1} << t);
                    out.add(target, coeff * sign);
                } else {
                    const int u = row - m_f;
                    const double sign = ferm_sign(mu.ferm, s);
                    FockIndex target = mu;
                    target.ferm &= ~(std::uint32_t{1} << s);
                    const double weight = std::sqrt(double(target.bos[u]) + 1.0);
                    target.bos[u] = static_cast<std::uint16_t>(target.bos[u] + 1);
                    out.add(target, coeff * sign * weight);
                }
            } else {
                const int r = col - m_f;
                if (mu.bos[r] == 0) continue;
                if (row < m_f) {
                    const int t = row;
                    if (mu.ferm >> t & 1u) continue;
                    FockIndex target = mu;
                    const double weight = std::sqrt(double(target.bos[r]));
                    target.bos[r] = static_cast<std::uint16_t>(target.bos[r] - 1);
                    const double sign = ferm_sign(target.ferm, t);
                    target.ferm |= std::uint32_t{1} << t;
                    out.add(target, coeff * sign * weight);
                } else {
                    const int u = row - m_f;
                    if (u == r) {
                        out.add(mu, coeff * double(mu.bos[r]));
                        continue;
                    }
                    FockIndex target = mu;
                    const double weight = std::sqrt(
                        double(target.bos[r]) * (double(target.bos[u]) + 1.0));
                    target.bos[r] = static_cast<std::uint16_t>(target.bos[r] - 1);
                    target.bos[u] = static_cast<std::uint16_t>(target.bos[u] + 1);
                    out.add(target, coeff * weight);
                }
            }
        }
    }
    return out;
}

/// Degree-raising quadratic action on a single reduced monomial; drops terms
/// that would exceed the cap and reports the drop.
FockVector a_on_monomial(const FockSpace& space, const OspElement& x,
                         const FockIndex& mu, Complex scale, bool* clipped) {
    const int m_f = space.fermionic_modes();
    const int m_b = space.bosonic_modes();
    const Matrix& M = x.op.conj;
    FockVector out;
    const bool fits = mu.total_degree() + 2 <= space.degree_cap();
    for (int col = 0; col < m_f + m_b; ++col) {
        for (int row = 0; row < m_f + m_b; ++row) {
            const Complex entry = M(row, col);
            if (entry == Complex(0.0, 0.0)) continue;
            // Creation-pair coefficient: 1/2, with an extra i when the
            // second (inner) creation slot is bosonic.
            const bool inner_bosonic = col >= m_f;
            const Complex coeff = scale * entry *
                                  (inner_bosonic ? Complex(0.0, 0.5)
                                                 : Complex(0.5, 0.0));
            FockIndex target = mu;
            double amplitude = 1.0;
            // Inner creation (input slot `col`).
            if (col < m_f) {
                const int s = col;
                if (target.ferm >> s & 1u) continue;
                amplitude *= ferm_sign(target.ferm, s);
                target.ferm |= std::uint32_t{1} << s;
            } else {
                const int r = col - m_f;
                amplitude *= std::sqrt(double(target.bos[r]) + 1.0);
                target.bos[r] = static_cast<std::uint16_t>(target.bos[r] + 1);
            }
            // Outer creation (output slot `row`).
            if (row < m_f) {
                const int t = row;
                if (target.ferm >> t & 1u) continue;
                amplitude *= ferm_sign(target.ferm, t);
                target.ferm |= std::uint32_t{1} << t;
            } else {
                const int u = row - m_f;
                amplitude *= std::sqrt(double(target.bos[u]) + 1.0);
                target.bos[u] = static_cast<std::uint16_t>(target.bos[u] + 1);
            }
            if (!fits) {
                if (clipped != nullptr) *clipped = true;
                continue;
            }
            out.add(target, coeff * amplitude);
        }
    }
    return out;
}

}  // namespace

int FockIndex::ferm_degree() const { return std::popcount(ferm); }

int FockIndex::bos_degree() const {
    int total = 0;
    for (const std::uint16_t s : bos) total += s;
    return total;
}

bool graded_lex_less(const FockIndex& a, const FockIndex& b) {
    const int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db;
    const int ka = a.ferm_degree(), kb = b.ferm_degree();
    if (ka != kb) return ka < kb;
    if (a.ferm != b.ferm) return a.ferm < b.ferm;
    return std::lexicographical_compare(a.bos.begin(), a.bos.end(),
                                        b.bos.begin(), b.bos.end());
}

FockSpace::FockSpace(int m_f, int m_b, int degree_cap)
    : m_f_(m_f), m_b_(m_b), cap_(checked_degree_cap(degree_cap)) {
    if (m_f < 1 || m_f > 31)
        throw std::invalid_argument("fermionic mode count must be in [1, 31]");
    if (m_b < 1) throw std::invalid_argument("need at least one bosonic mode");
    std::vector<std::uint16_t> occupations(static_cast<std::size_t>(m_b), 0);
    for (int degree = 0; degree <= cap_; ++degree) {
        for (int k = 0; k <= std::min(m_f_, degree); ++k) {
            const int l = degree - k;
            for (const std::uint32_t mask : masks_with_popcount(m_f_, k))
                enumerate_bosonic(occupations, 0, m_b_, l, mask, basis_);
        }
    }
    for (int i = 0; i < static_cast<int>(basis_.size()); ++i)
        positions_.emplace(basis_[static_cast<std::size_t>(i)], i);
}

FockSpace::FockSpace(const TruncatedSpace& one_particle, int degree_cap)
    : FockSpace(one_particle.fermionic_modes(), one_particle.bosonic_modes(),
                degree_cap) {}

int FockSpace::index_of(const FockIndex& index) const {
    if (static_cast<int>(index.bos.size()) != m_b_)
        throw std::invalid_argument("occupation vector has wrong mode count");
    const auto it = positions_.find(index);
    return it == positions_.end() ? -1 : it->second;
}

void FockVector::add(const FockIndex& index, Complex amplitude) {
    if (amplitude == Complex(0.0, 0.0)) return;
    const auto [it, inserted] = amplitudes_.emplace(index, amplitude);
    if (!inserted) {
        it->second += amplitude;
        if (it->second == Complex(0.0, 0.0)) amplitudes_.erase(it);
    }
}

Complex FockVector::amplitude(const FockIndex& index) const {
    const auto it = amplitudes_.find(index);
    return it == amplitudes_.end() ? Complex(0.0, 0.0) : it->second;
}

int FockVector::max_degree() const {
    int degree = -1;
    for (const auto& [index, amplitude] : amplitudes_)
        degree = std::max(degree, index.total_degree());
    return degree;
}

FockVector& FockVector::operator+=(const FockVector& other) {
    for (const auto& [index, amplitude] : other.amplitudes_) add(index, amplitude);
    return *this;
}

FockVector& FockVector::operator*=(Complex scale) {
    if (scale == Complex(0.0, 0.0)) {
        amplitudes_.clear();
        return *this;
    }
    for (auto& [index, amplitude] : amplitudes_) amplitude *= scale;
    return *this;
}

FockVector operator+(FockVector lhs, const FockVector& rhs) {
    lhs += rhs;
    return lhs;
}

FockVector operator*(Complex scale, FockVector v) {
    v *= scale;
    return v;
}

FockVector reduce_monomial(const TruncatedSpace& one_particle,
                           const std::vector<Vector>& factors,
                           Complex coefficient) {
    const int m_f = one_particle.fermionic_modes();
    const int m_b = one_particle.bosonic_modes();
    for (const Vector& factor : factors)
        if (factor.size() != m_f + m_b)
            throw std::invalid_argument(
                "factor dimension does not match the one-particle space");

    FockVector acc;
    acc.add(FockIndex{0, std::vector<std::uint16_t>(
                             static_cast<std::size_t>(m_b), 0)},
            coefficient);
    for (const Vector& factor : factors) {
        FockVector next;
        for (const auto& [index, amplitude] : acc.amplitudes()) {
            for (int j = 0; j < m_f + m_b; ++j) {
                const Complex component = factor(j);
                if (component == Complex(0.0, 0.0)) continue;
                if (j < m_f) {
                    // Append fermionic mode j: dies on repetition; the factor
                    // commutes past every bosonic factor and anticommutes
                    // past each fermionic factor with a larger mode.
                    if (index.ferm >> j & 1u) continue;
                    const int above =
                        std::popcount(index.ferm & ~low_bits(j + 1));
                    const double sign = (above % 2 == 0) ? 1.0 : -1.0;
                    FockIndex target = index;
                    target.ferm |= std::uint32_t{1} << j;
                    next.add(target, amplitude * component * sign);
                } else {
                    FockIndex target = index;
                    const int u = j - m_f;
                    target.bos[u] = static_cast<std::uint16_t>(target.bos[u] + 1);
                    next.add(target, amplitude * component);
                }
            }
        }
        acc = std::move(next);
    }
    return acc;
}

Complex fock_inner(const FockVector& v, const FockVector& w) {
    // Iterate the smaller support.
    const FockVector& small = v.support_size() <= w.support_size() ? v : w;
    const bool small_is_v = &small == &v;
    Complex total(0.0, 0.0);
    for (const auto& [index, amplitude] : small.amplitudes()) {
        const Complex other =
            small_is_v ? w.amplitude(index) : v.amplitude(index);
        if (other == Complex(0.0, 0.0)) continue;
        total += small_is_v ? std::conj(amplitude) * other
                            : std::conj(other) * amplitude;
    }
    return total;
}

double grade_raise_coefficient(int k, int l) {
    if (k < 0 || l < 0)
        throw std::invalid_argument("grades must be nonnegative");
    const double n = static_cast<double>(k + l);
    return 0.5 * std::sqrt((n + 1.0) * (n + 2.0));
}

FockVector rho_lin(const FockSpace& space, const OspElement& x,
                   const FockVector& v) {
    check_one_particle_dim(space, x);
    FockVector out;
    for (const auto& [index, amplitude] : v.amplitudes())
        out += rho_lin_on_monomial(space, x, index, amplitude);
    return out;
}

FockVector a_op(const FockSpace& space, const OspElement& x, const FockVector& v,
                bool* clipped) {
    check_one_particle_dim(space, x);
    if (clipped != nullptr) *clipped = false;
    FockVector out;
    for (const auto& [index, amplitude] : v.amplitudes())
        out += a_on_monomial(space, x, index, amplitude, clipped);
    return out;
}

void validate_grade_structure(const FockSpace& space, const FockOperator& op,
                              Parity op_parity) {
    const auto& m = op.matrix;
    if (m.rows() != space.dim() || m.cols() != space.dim())
        throw std::logic_error("operator dimension does not match the space");
    const std::set<std::pair<int, int>> shifts(op.degree_shifts.begin(),
                                               op.degree_shifts.end());
    for (int col = 0; col < m.outerSize(); ++col) {
        const FockIndex& src = space.basis()[col];
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(m, col); it; ++it) {
            if (it.value() == Complex(0.0, 0.0)) continue;
            const FockIndex& dst = space.basis()[it.row()];
            const std::pair<int, int> shift{
                dst.ferm_degree() - src.ferm_degree(),
                dst.bos_degree() - src.bos_degree()};
            if (!shifts.count(shift))
                throw std::logic_error("matrix entry realizes an undeclared shift");
            const bool flips = dst.parity() != src.parity();
            if (flips != (op_parity == Parity::odd))
                throw std::logic_error("matrix entry breaks parity discipline");
        }
    }
}

FockOperator rho_lin_matrix(const FockSpace& space, const OspElement& x) {
    check_one_particle_dim(space, x);
    auto action = [](const FockSpace& s, const OspElement& e,
                     const FockIndex& mu) {
        return rho_lin_on_monomial(s, e, mu, Complex(1.0, 0.0));
    };
    return finalize_operator(space, assemble(space, x, action), x.parity);
}

FockOperator a_matrix(const FockSpace& space, const OspElement& x) {
    check_one_particle_dim(space, x);
    auto action = [](const FockSpace& s, const OspElement& e,
                     const FockIndex& mu) {
        return a_on_monomial(s, e, mu, Complex(1.0, 0.0), nullptr);
    };
    FockOperator op = finalize_operator(space, assemble(space, x, action), x.parity);
    // The top two degrees lose raising terms to the cap.
    op.safe_degree = space.degree_cap() - 2;
    return op;
}

FockOperator a_dagger(const FockSpace& space, const OspElement& x) {
    const FockOperator a = a_matrix(space, x);
    Eigen::SparseMatrix<Complex> adj = a.matrix.adjoint();
    if (x.parity == Parity::odd) adj = (Complex(0.0, -1.0) * adj).eval();
    FockOperator op = finalize_operator(space, std::move(adj), x.parity);
    op.safe_degree = space.degree_cap() - 2;
    return op;
}

FockOperator rho_full(const FockSpace& space, const CentralElement& u) {
    check_one_particle_dim(space, u.body);
    const FockOperator lin = rho_lin_matrix(space, u.body);
    const FockOperator raise = a_matrix(space, u.body);
    Eigen::SparseMatrix<Complex> lower = raise.matrix.adjoint();
    if (u.body.parity == Parity::odd)
        lower = (Complex(0.0, -1.0) * lower).eval();

    Eigen::SparseMatrix<Complex> total =
        lin.matrix + raise.matrix - lower;
    if (u.z != 0.0) {
        Eigen::SparseMatrix<Complex> central(space.dim(), space.dim());
        central.setIdentity();
        total += (Complex(0.0, u.z) * central).eval();
    }
    FockOperator op = finalize_operator(space, std::move(total), u.body.parity);
    // Exactness is limited by the clipped raising half whenever the
    // antilinear part contributes.
    bool has_raise = false;
    for (const auto& [dk, dl] : op.degree_shifts)
        if (std::abs(dk + dl) == 2) has_raise = true;
    op.safe_degree = has_raise ? space.degree_cap() - 2 : space.degree_cap();
    return op;
}

std::string serialize_fock_operator(const FockSpace& space,
                                    const FockOperator& op) {
    std::string out;
    out += "ospfock-operator v1\n";
    out += "modes " + std::to_string(space.fermionic_modes()) + " " +
           std::to_string(space.bosonic_modes()) + "\n";
    out += "degree-cap " + std::to_string(space.degree_cap()) + "\n";
    out += "dim " + std::to_string(space.dim()) + "\n";
    out += "safe-degree " + std::to_string(op.safe_degree) + "\n";
    out += "shifts " + std::to_string(op.degree_shifts.size());
    for (const auto& [dk, dl] : op.degree_shifts)
        out += " " + std::to_string(dk) + "," + std::to_string(dl);
    out += "\n";
    out += "nnz " + std::to_string(op.matrix.nonZeros()) + "\n";
    for (int col = 0; col < op.matrix.outerSize(); ++col) {
        const FockIndex& src = space.basis()[col];
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(op.matrix, col); it;
             ++it) {
            const FockIndex& dst = space.basis()[it.row()];
            out += "entry " + std::to_string(col) + " " +
                   std::to_string(it.row()) + " ";
            append_hex(out, it.value().real());
            out += " ";
            append_hex(out, it.value().imag());
            out += " " + std::to_string(src.ferm_degree()) + "," +
                   std::to_string(src.bos_degree()) + " " +
                   std::to_string(dst.ferm_degree()) + "," +
                   std::to_string(dst.bos_degree()) + "\n";
        }
    }
    out += "end\n";
    return out;
}

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

int parse_int(const std::string& token) {
    int value = 0;
    const auto res =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw std::invalid_argument("malformed integer: " + token);
    return value;
}

std::pair<int, int> parse_shift(const std::string& token) {
    const auto comma = token.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("malformed grade pair: " + token);
    return {parse_int(token.substr(0, comma)), parse_int(token.substr(comma + 1))};
}

}  // namespace

FockOperator parse_fock_operator(const FockSpace& space,
                                 const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw std::invalid_argument("truncated operator serialization");
        return tokens_of(line);
    };

    auto header = next_line();
    if (header.size() != 2 || header[0] != "ospfock-operator" || header[1] != "v1")
        throw std::invalid_argument("unrecognized operator header");
    auto modes = next_line();
    if (modes.size() != 3 || modes[0] != "modes" ||
        parse_int(modes[1]) != space.fermionic_modes() ||
        parse_int(modes[2]) != space.bosonic_modes())
        throw std::invalid_argument("mode counts do not match the space");
    auto cap = next_line();
    if (cap.size() != 2 || cap[0] != "degree-cap" ||
        parse_int(cap[1]) != space.degree_cap())
        throw std::invalid_argument("degree cap does not match the space");
    auto dim = next_line();
    if (dim.size() != 2 || dim[0] != "dim" || parse_int(dim[1]) != space.dim())
        throw std::invalid_argument("dimension does not match the space");
    auto safe = next_line();
    if (safe.size() != 2 || safe[0] != "safe-degree")
        throw std::invalid_argument("missing safe-degree line");

    FockOperator op;
    op.safe_degree = parse_int(safe[1]);
    auto shifts = next_line();
    if (shifts.size() < 2 || shifts[0] != "shifts")
        throw std::invalid_argument("missing shifts line");
    const int shift_count = parse_int(shifts[1]);
    if (static_cast<int>(shifts.size()) != 2 + shift_count)
        throw std::invalid_argument("shift count disagrees with the list");
    for (int i = 0; i < shift_count; ++i)
        op.degree_shifts.push_back(parse_shift(shifts[static_cast<std::size_t>(2 + i)]));

    auto nnz = next_line();
    if (nnz.size() != 2 || nnz[0] != "nnz")
        throw std::invalid_argument("missing nnz line");
    const int entries = parse_int(nnz[1]);

    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(static_cast<std::size_t>(entries));
    for (int i = 0; i < entries; ++i) {
        auto tokens = next_line();
        if (tokens.size() != 7 || tokens[0] != "entry")
            throw std::invalid_argument("malformed entry line");
        const int col = parse_int(tokens[1]);
        const int row = parse_int(tokens[2]);
        if (col < 0 || col >= space.dim() || row < 0 || row >= space.dim())
            throw std::invalid_argument("entry position out of range");
        const double re = parse_hex(tokens[3]);
        const double im = parse_hex(tokens[4]);
        const FockIndex& src = space.basis()[col];
        const FockIndex& dst = space.basis()[row];
        if (parse_shift(tokens[5]) !=
                std::pair<int, int>{src.ferm_degree(), src.bos_degree()} ||
            parse_shift(tokens[6]) !=
                std::pair<int, int>{dst.ferm_degree(), dst.bos_degree()})
            throw std::invalid_argument("grade annotation disagrees with basis");
        triplets.emplace_back(row, col, Complex(re, im));
    }
    auto tail = next_line();
    if (tail.size() != 1 || tail[0] != "end")
        throw std::invalid_argument("missing end marker");

    op.matrix.resize(space.dim(), space.dim());
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    return op;
}

Eigen::VectorXcd to_dense(const FockSpace& space, const FockVector& v) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(space.dim());
    for (const auto& [index, amplitude] : v.amplitudes()) {
        const int at = space.index_of(index);
        if (at < 0)
            throw std::invalid_argument(
                "vector has support outside the truncation");
        out(at) = amplitude;
    }
    return out;
}

FockVector from_dense(const FockSpace& space, const Eigen::VectorXcd& w) {
    if (w.size() != space.dim())
        throw std::invalid_argument("coordinate count does not match the space");
    FockVector out;
    for (int i = 0; i < space.dim(); ++i)
        out.add(space.basis()[static_cast<std::size_t>(i)], w(i));
    return out;
}

FockVector random_fock_vector(const FockSpace& space, int max_degree, Rng& rng) {
    FockVector out;
    for (const FockIndex& index : space.basis()) {
        if (index.total_degree() > max_degree) continue;
        out.add(index, Complex(rng.gaussian(), rng.gaussian()));
    }
    return out;
}

std::string serialize_basis(const FockSpace& space) {
    std::string out;
    out += "ospfock-basis v1\n";
    out += "modes " + std::to_string(space.fermionic_modes()) + " " +
           std::to_string(space.bosonic_modes()) + "\n";
    out += "degree-cap " + std::to_string(space.degree_cap()) + "\n";
    out += "dim " + std::to_string(space.dim()) + "\n";
    for (int i = 0; i < space.dim(); ++i) {
        const FockIndex& index = space.basis()[i];
        out += "index " + std::to_string(i) + " grade " +
               std::to_string(index.ferm_degree()) + "," +
               std::to_string(index.bos_degree()) + " parity " +
               std::to_string(index.parity()) + " ferm " +
               std::to_string(index.ferm) + " bos";
        for (const std::uint16_t s : index.bos) out += " " + std::to_string(s);
        out += "\n";
    }
    out += "end\n";
    return out;
}

}  // namespace ospfock
