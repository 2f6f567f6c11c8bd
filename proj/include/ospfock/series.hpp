#pragma once

#include <cstdint>
#include <vector>

#include "ospfock/fock.hpp"
#include "ospfock/osp.hpp"
#include "ospfock/verify.hpp"

namespace ospfock {

/// Partial sum of an exponential orbit series with a rigorous tail bound.
struct SeriesResult {
    FockVector value;
    int terms_used = 0;
    double tail_bound = 0.0;  ///< upper bound on the norm of the omitted tail
    bool converged = false;   ///< tail_bound <= 1e-9 * max(1, ||v||)
};

/// Growth-rate radius estimate for the orbit series along one direction.
struct RadiusEstimate {
    double radius = 0.0;
    bool truncation_limited = false;  ///< requested depth exceeded the exact range
    int terms_used = 0;
};

/// Monte-Carlo lower bound for the order-n seminorm
/// sup ||rho(x_1)...rho(x_n) v|| over unit-norm even directions.
struct SeminormEstimate {
    int order = 0;
    double value = 0.0;  ///< certified lower bound (a max over samples)
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Partial sum of sum_n t^n/n! M^n v for M the oscillator matrix of an even
/// centrally extended element. tail_bound = ||v|| * sum_{n>terms} s^n/n!
/// with s = |t| times the matrix operator norm. Throws std::invalid_argument
/// for odd bodies (no one-parameter group in the even part).
SeriesResult orbit_series(const FockSpace&, const FockVector& v,
                          const CentralElement& u, double t, int n_max);

/// Root-test radius implied by the observed growth of ||M^n v||/n!:
/// 1 / max_n (||M^n v||/n!)^(1/n) over the exactly represented depth.
/// A terminating sequence or a tail that decays toward zero reports +inf
/// (entire series / bounded behavior). Depth is limited to
/// (cap - deg v)/2 when the element has an antilinear part; exceeding it
/// sets truncation_limited.
RadiusEstimate radius_estimate(const FockSpace&, const FockVector& v,
                               const CentralElement& u, int n_max);

/// Baker-Campbell-Hausdorff combination z*z' truncated at the given order
/// (1..4), with the central coordinate carried through every bracket.
/// Throws std::invalid_argument for odd bodies or unsupported orders.
CentralElement bch(const TruncatedSpace&, const CentralElement&,
                   const CentralElement&, int order);

/// Body-only convenience overload for plain even elements.
OspElement bch(const TruncatedSpace&, const OspElement&, const OspElement&,
               int order);

/// Max over `samples` random products of `order` unit-norm real-linear
/// combinations of the (even, certified) generating family, applied to v.
/// Deterministic given the seed; sample i draws from Rng::substream(seed, i),
/// so the estimate is monotone under extending sample counts.
/// order 0 returns ||v|| exactly. Throws std::invalid_argument on an empty
/// or parity-mixed family.
SeminormEstimate seminorm_estimate(const TruncatedSpace&, const FockSpace&,
                                   const FockVector& v, int order,
                                   const std::vector<OspElement>& family,
                                   int samples, std::uint64_t seed);

/// Exact two-sided evaluation of
/// ||rho(y) v|| <= (1/sqrt(2)) ||v||^(1/2) ||rho([y,y]-extended) v||^(1/2)
/// for certified odd y and v of degree <= cap-4. The report's residual is
/// the signed violation lhs - rhs; pass means it does not exceed the slack
/// tolerance. Throws std::invalid_argument outside the preconditions.
IdentityReport check_interpolation_bounds(const TruncatedSpace&, const FockSpace&,
                                          const FockVector& v,
                                          const OspElement& y_odd,
                                          double slack_tolerance = 1e-12);

/// Report-only record of the seminorm chain
/// q_n(rho(y)v) <= 1/(2 sqrt 2) ||y|| sum_k C(n+1,k) q_k(v):
/// both sides are Monte-Carlo lower bounds, so the comparison is recorded
/// (residual = lhs - rhs) but never asserted; the report always passes.
IdentityReport seminorm_chain_report(const TruncatedSpace&, const FockSpace&,
                                     const FockVector& v, const OspElement& y_odd,
                                     int order,
                                     const std::vector<OspElement>& family,
                                     int samples, std::uint64_t seed);

}  // namespace ospfock
