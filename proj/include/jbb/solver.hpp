// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------
//
// Operating-point search. Curves are traced in the (ratio, rho_d) plane where
// ratio = rho_o / rho_b and rho_d = rho_b + rho_o are JBB coordinates.

#ifndef JBB_SOLVER_HPP
#define JBB_SOLVER_HPP

#include "jbb/closedform.hpp"
#include "jbb/model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace jbb
{

// Everything needed to evaluate rates: configuration, path losses, uplink estimate
// quality and the beamformer family.
struct Link
{
    SystemConfig cfg;
    PathLossProfile profile;
    std::vector<double> gamma;
    Precoder precoder = Precoder::ZF;
};

Link make_link(const SystemConfig &cfg, const PathLossProfile &profile, Precoder precoder);

enum class ORateKind
{
    Exact, // ergodic rate by quadrature
    Bound  // Jensen lower bound
};

// Net B-terminal sum rate and net O-terminal rate of JBB' at JBB coordinates (rho_b, rho_o).
double jbb_prime_net_b(const Link &link, double rho_b, double rho_o);
double jbb_prime_net_o(const Link &link, double rho_b, double rho_o, ORateKind kind = ORateKind::Exact);

struct OAMatch
{
    double epsilon = 0.0;
    double rho_b_oa = 0.0;
    double rho_o_oa = 0.0;
    bool feasible = false;
    double o_rate = 0.0; // net O-terminal rate; 0 when infeasible
};

// OA configuration with the same gross max-min B-terminal rate as JBB' at jbb_point and
// the same energy per coherence interval.
OAMatch match_oa(const Link &link, const OperatingPoint &jbb_point, double epsilon,
                 ORateKind kind = ORateKind::Exact);

// match_oa maximized over epsilon: grid of step 0.005, then golden-section refinement.
OAMatch optimize_epsilon(const Link &link, const OperatingPoint &jbb_point, ORateKind kind = ORateKind::Exact);

enum class CurveId
{
    BJbbPrime,
    OJbbPrimeExact,
    OJbbPrimeBound,
    OOaExact,
    OOaBound
};

std::string_view to_string(CurveId id);

struct CurvePoint
{
    CurveId curve = CurveId::BJbbPrime;
    double ratio = 0.0; // rho_o / rho_b, linear
    double rho_d = 0.0; // linear; meaningful only when feasible
    bool feasible = false;
    double rate = 0.0;          // achieved value of the curve's target quantity
    std::optional<OAMatch> oa;  // OA curves only

    double rho_b() const { return rho_d / (1.0 + ratio); }
    double rho_o() const { return rho_d * ratio / (1.0 + ratio); }
};

using Curve = std::vector<CurvePoint>;

// n points evenly spaced in dB between lo_db and hi_db, returned as linear ratios.
std::vector<double> ratio_grid(double lo_db = -10.0, double hi_db = 20.0, int n = 121);

// Total power at which the curve's rate reaches the target, or nullopt when the target is
// out of reach on [1e-6, 1e6].
std::optional<double> solve_b_rho_d(const Link &link, double target_net_b, double ratio);
std::optional<double> solve_o_rho_d(const Link &link, double target_net_o, double ratio, ORateKind kind);
std::optional<double> solve_oa_rho_d(const Link &link, double target_net_o, double ratio, ORateKind kind);

Curve trace_b_curve(const Link &link, double target_net_b, const std::vector<double> &ratios, unsigned threads = 0);

struct OCurves
{
    Curve jbb_prime_exact;
    Curve jbb_prime_bound;
    Curve oa_exact;
    Curve oa_bound;
};

OCurves trace_o_curves(const Link &link, double target_net_o, const std::vector<double> &ratios,
                       unsigned threads = 0);

struct Intersection
{
    bool found = false;
    double ratio = 0.0;
    double rho_d = 0.0;
    double rho_b() const { return rho_d / (1.0 + ratio); }
    double rho_o() const { return rho_d * ratio / (1.0 + ratio); }
};

// First sign change of rho_d_a - rho_d_b along a common ratio grid, linearly interpolated
// in dB. Points where either curve is infeasible are skipped.
Intersection find_intersection(const Curve &a, const Curve &b);

// Intersections of the B-target curve with the JBB' and OA O-target curves, located by a
// grid scan along the B-target curve and refined by root finding in the ratio.
struct OperatingPoints
{
    Intersection jbb_prime;
    Intersection oa;
    std::optional<OAMatch> oa_match; // matched OA powers at the OA intersection
    std::optional<double> saving_db; // rho_d(OA) / rho_d(JBB') in dB
};

OperatingPoints analyze_operating_points(const Link &link, double target_net_b, double target_net_o,
                                         const std::vector<double> &ratios, unsigned threads = 0,
                                         ORateKind kind = ORateKind::Exact);

struct SweepPoint
{
    double rho_u = 0.0;
    double rho_o = 0.0;
    double rho_b = 0.0; // required B-terminal power; meaningful only when feasible
    bool feasible = false;
};

// Required rho_b for a net B-terminal sum rate at fixed rho_o, for each uplink SNR.
std::vector<SweepPoint> sweep_uplink_snr(const SystemConfig &cfg, const PathLossProfile &profile, Precoder precoder,
                                         double target_net_b_sum, double rho_o, const std::vector<double> &rho_u_grid,
                                         Scheme scheme = Scheme::JBB);

} // namespace jbb

#endif
