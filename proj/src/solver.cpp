// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/solver.hpp"

#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"
#include "jbb/parallel.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace jbb
{

namespace
{

constexpr double kPowerLo = 1e-6;
constexpr double kPowerHi = 1e6;
constexpr double kEpsilonStep = 0.005;
constexpr double kEpsilonTol = 1e-4;

// Root of an increasing function f on [lo, hi] in the log domain of its argument.
// nullopt when f(hi) < 0; lo when f(lo) >= 0.
template <class F>
std::optional<double> solve_increasing(F &&f, double lo, double hi)
{
    auto g = [&](double x) { return f(std::exp(x)); };
    const double a = std::log(lo);
    const double b = std::log(hi);
    const double fb = g(b);
    if (!(fb >= 0.0))
        return std::nullopt;
    const double fa = g(a);
    if (fa >= 0.0)
        return lo;
    std::uintmax_t iterations = 200;
    const auto tol = [](double l, double u) { return std::abs(u - l) <= 1e-13 * std::max(1.0, std::abs(l)); };
    const auto [l, u] = boost::math::tools::toms748_solve(g, a, b, fa, fb, tol, iterations);
    return std::exp(0.5 * (l + u));
}

double net_o_rate(const SystemConfig &cfg, double beta_o, double rho_o, double rho_b_eff, ORateKind kind)
{
    const double r = kind == ORateKind::Exact ? o_rate_exact(cfg, beta_o, rho_o, rho_b_eff)
                                              : o_rate_bound(cfg, beta_o, rho_o, rho_b_eff);
    return o_prelog(cfg) * r;
}

OperatingPoint split(double rho_d, double ratio)
{
    return {rho_d / (1.0 + ratio), rho_d * ratio / (1.0 + ratio), Scheme::JBBPrime};
}

double db(double x)
{
    return 10.0 * std::log10(x);
}

} // namespace

Link make_link(const SystemConfig &cfg, const PathLossProfile &profile, Precoder precoder)
{
    return {cfg, profile, estimation_quality(profile.beta, cfg.rho_u, cfg.tau_pu), precoder};
}

double jbb_prime_net_b(const Link &link, double rho_b, double rho_o)
{
    const double rb = rho_b_prime(rho_b, link.cfg.frame(), link.cfg.tau_po);
    const double mm = maxmin_rate(link.cfg, link.profile.beta, link.gamma, rb, rho_o, link.precoder);
    return prelog(link.cfg, Scheme::JBBPrime) * static_cast<double>(link.profile.beta.size()) * mm;
}

double jbb_prime_net_o(const Link &link, double rho_b, double rho_o, ORateKind kind)
{
    const double rb = rho_b_prime(rho_b, link.cfg.frame(), link.cfg.tau_po);
    return net_o_rate(link.cfg, link.profile.beta_o, rho_o, rb, kind);
}

OAMatch match_oa(const Link &link, const OperatingPoint &jbb_point, double epsilon, ORateKind kind)
{
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ValidationError("epsilon", "must lie in [0, 1)");
    OAMatch m;
    m.epsilon = epsilon;
    if (epsilon == 0.0)
        return m; // no intervals for the O-terminals

    const double rb = rho_b_prime(jbb_point.rho_b, link.cfg.frame(), link.cfg.tau_po);
    const double target = maxmin_rate(link.cfg, link.profile.beta, link.gamma, rb, jbb_point.rho_o, link.precoder);
    try
    {
        m.rho_b_oa = oa_required_rho_b(link.cfg, link.profile.beta, link.gamma, target, epsilon, link.precoder);
    }
    catch (const InfeasibleTargetError &)
    {
        return m;
    }
    m.rho_o_oa = (jbb_point.rho_d() - (1.0 - epsilon) * m.rho_b_oa) / epsilon;
    if (m.rho_o_oa < 0.0)
        return m;
    m.feasible = true;
    m.o_rate = epsilon * net_o_rate(link.cfg, link.profile.beta_o, m.rho_o_oa, 0.0, kind);
    return m;
}

OAMatch optimize_epsilon(const Link &link, const OperatingPoint &jbb_point, ORateKind kind)
{
    OAMatch best;
    const int steps = static_cast<int>(std::lround(1.0 / kEpsilonStep));
    for (int i = 1; i < steps; ++i)
    {
        const OAMatch m = match_oa(link, jbb_point, i * kEpsilonStep, kind);
        if (m.feasible && (!best.feasible || m.o_rate > best.o_rate))
            best = m;
    }
    if (!best.feasible)
        return best;

    // golden-section search around the best grid point
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(best.epsilon - kEpsilonStep, 0.5 * kEpsilonStep);
    double b = std::min(best.epsilon + kEpsilonStep, 1.0 - 0.5 * kEpsilonStep);
    auto value = [&](double e) { return match_oa(link, jbb_point, e, kind); };
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    OAMatch mc = value(c);
    OAMatch md = value(d);
    while (b - a > kEpsilonTol)
    {
        if (mc.o_rate >= md.o_rate)
        {
            b = d;
            d = c;
            md = mc;
            c = b - phi * (b - a);
            mc = value(c);
        }
        else
        {
            a = c;
            c = d;
            mc = md;
            d = a + phi * (b - a);
            md = value(d);
        }
    }
    for (const OAMatch &m : {mc, md})
        if (m.feasible && m.o_rate > best.o_rate)
            best = m;
    return best;
}

std::string_view to_string(CurveId id)
{
    switch (id)
    {
    case CurveId::BJbbPrime:
        return "b_jbb_prime";
    case CurveId::OJbbPrimeExact:
        return "o_jbb_prime_exact";
    case CurveId::OJbbPrimeBound:
        return "o_jbb_prime_bound";
    case CurveId::OOaExact:
        return "o_oa_exact";
    case CurveId::OOaBound:
        return "o_oa_bound";
    }
    return "?";
}

std::vector<double> ratio_grid(double lo_db, double hi_db, int n)
{
    if (n < 1)
        throw ValidationError("grid.points", "must be >= 1");
    if (!(hi_db >= lo_db))
        throw ValidationError("grid.ratio_hi_db", "must be >= grid.ratio_lo_db");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
    {
        const double x = n == 1 ? lo_db : lo_db + (hi_db - lo_db) * i / (n - 1);
        out[static_cast<std::size_t>(i)] = db_to_linear(x);
    }
    return out;
}

std::optional<double> solve_b_rho_d(const Link &link, double target_net_b, double ratio)
{
    if (!(target_net_b > 0.0))
        throw ValidationError("targets.net_b", "must be > 0");
    return solve_increasing(
        [&](double rho_d) {
            const OperatingPoint p = split(rho_d, ratio);
            return jbb_prime_net_b(link, p.rho_b, p.rho_o) - target_net_b;
        },
        kPowerLo, kPowerHi);
}

std::optional<double> solve_o_rho_d(const Link &link, double target_net_o, double ratio, ORateKind kind)
{
    if (!(target_net_o > 0.0))
        throw ValidationError("targets.net_o", "must be > 0");
    return solve_increasing(
        [&](double rho_d) {
            const OperatingPoint p = split(rho_d, ratio);
            return jbb_prime_net_o(link, p.rho_b, p.rho_o, kind) - target_net_o;
        },
        kPowerLo, kPowerHi);
}

std::optional<double> solve_oa_rho_d(const Link &link, double target_net_o, double ratio, ORateKind kind)
{
    if (!(target_net_o > 0.0))
        throw ValidationError("targets.net_o", "must be > 0");
    return solve_increasing(
        [&](double rho_d) { return optimize_epsilon(link, split(rho_d, ratio), kind).o_rate - target_net_o; },
        kPowerLo, kPowerHi);
}

Curve trace_b_curve(const Link &link, double target_net_b, const std::vector<double> &ratios, unsigned threads)
{
    return parallel_map<CurvePoint>(ratios.size(), threads, [&](std::size_t i) {
        CurvePoint pt;
        pt.curve = CurveId::BJbbPrime;
        pt.ratio = ratios[i];
        if (const auto rho_d = solve_b_rho_d(link, target_net_b, pt.ratio))
        {
            pt.feasible = true;
            pt.rho_d = *rho_d;
            pt.rate = jbb_prime_net_b(link, pt.rho_b(), pt.rho_o());
        }
        return pt;
    });
}

OCurves trace_o_curves(const Link &link, double target_net_o, const std::vector<double> &ratios, unsigned threads)
{
    const std::size_t n = ratios.size();
    // one task per (curve, ratio) so the slow OA points spread across workers
    std::vector<CurvePoint> all = parallel_map<CurvePoint>(4 * n, threads, [&](std::size_t task) {
        const std::size_t which = task / n;
        CurvePoint pt;
        pt.ratio = ratios[task % n];
        const ORateKind kind = which % 2 == 0 ? ORateKind::Exact : ORateKind::Bound;
        std::optional<double> rho_d;
        if (which < 2)
        {
            pt.curve = kind == ORateKind::Exact ? CurveId::OJbbPrimeExact : CurveId::OJbbPrimeBound;
            rho_d = solve_o_rho_d(link, target_net_o, pt.ratio, kind);
            if (rho_d)
                pt.rate = jbb_prime_net_o(link, split(*rho_d, pt.ratio).rho_b, split(*rho_d, pt.ratio).rho_o, kind);
        }
        else
        {
            pt.curve = kind == ORateKind::Exact ? CurveId::OOaExact : CurveId::OOaBound;
            rho_d = solve_oa_rho_d(link, target_net_o, pt.ratio, kind);
            if (rho_d)
            {
                pt.oa = optimize_epsilon(link, split(*rho_d, pt.ratio), kind);
                pt.rate = pt.oa->o_rate;
            }
        }
        if (rho_d)
        {
            pt.feasible = true;
            pt.rho_d = *rho_d;
        }
        return pt;
    });

    OCurves out;
    out.jbb_prime_exact.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    out.jbb_prime_bound.assign(all.begin() + static_cast<std::ptrdiff_t>(n), all.begin() + static_cast<std::ptrdiff_t>(2 * n));
    out.oa_exact.assign(all.begin() + static_cast<std::ptrdiff_t>(2 * n), all.begin() + static_cast<std::ptrdiff_t>(3 * n));
    out.oa_bound.assign(all.begin() + static_cast<std::ptrdiff_t>(3 * n), all.end());
    return out;
}

Intersection find_intersection(const Curve &a, const Curve &b)
{
    if (a.size() != b.size())
        throw ValidationError("curve", "curves must share a ratio grid");
    Intersection out;
    bool have_prev = false;
    double prev_diff = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (!a[i].feasible || !b[i].feasible)
        {
            have_prev = false;
            continue;
        }
        const double diff = db(a[i].rho_d) - db(b[i].rho_d);
        if (diff == 0.0)
        {
            out = {true, a[i].ratio, a[i].rho_d};
            return out;
        }
        if (have_prev && (prev_diff < 0.0) != (diff < 0.0))
        {
            const double t = prev_diff / (prev_diff - diff);
            const double r_db = db(a[prev].ratio) + t * (db(a[i].ratio) - db(a[prev].ratio));
            const double d_db = db(a[prev].rho_d) + t * (db(a[i].rho_d) - db(a[prev].rho_d));
            out = {true, db_to_linear(r_db), db_to_linear(d_db)};
            return out;
        }
        have_prev = true;
        prev_diff = diff;
        prev = i;
    }
    return out;
}

namespace
{

// Root in log(ratio) of h on [r_lo, r_hi] where h changes sign.
template <class H>
double refine_ratio(H &&h, double r_lo, double r_hi, double h_lo, double h_hi)
{
    if (h_lo == 0.0)
        return r_lo;
    if (h_hi == 0.0)
        return r_hi;
    auto g = [&](double x) { return h(std::exp(x)); };
    std::uintmax_t iterations = 100;
    const auto tol = [](double l, double u) { return std::abs(u - l) <= 1e-10; };
    const auto [l, u] = boost::math::tools::toms748_solve(g, std::log(r_lo), std::log(r_hi), h_lo, h_hi, tol,
                                                          iterations);
    return std::exp(0.5 * (l + u));
}

} // namespace

OperatingPoints analyze_operating_points(const Link &link, double target_net_b, double target_net_o,
                                         const std::vector<double> &ratios, unsigned threads, ORateKind kind)
{
    struct Sample
    {
        bool feasible = false;
        double rho_d = 0.0;
        double jbb = 0.0; // O-terminal excess over target along the B-target curve
        double oa = 0.0;
    };

    auto jbb_excess = [&](double ratio) -> std::optional<double> {
        const auto rho_d = solve_b_rho_d(link, target_net_b, ratio);
        if (!rho_d)
            return std::nullopt;
        const OperatingPoint p = split(*rho_d, ratio);
        return jbb_prime_net_o(link, p.rho_b, p.rho_o, kind) - target_net_o;
    };
    auto oa_excess = [&](double ratio) -> std::optional<double> {
        const auto rho_d = solve_b_rho_d(link, target_net_b, ratio);
        if (!rho_d)
            return std::nullopt;
        return optimize_epsilon(link, split(*rho_d, ratio), kind).o_rate - target_net_o;
    };

    const std::vector<Sample> samples = parallel_map<Sample>(ratios.size(), threads, [&](std::size_t i) {
        Sample s;
        const auto rho_d = solve_b_rho_d(link, target_net_b, ratios[i]);
        if (!rho_d)
            return s;
        const OperatingPoint p = split(*rho_d, ratios[i]);
        s.feasible = true;
        s.rho_d = *rho_d;
        s.jbb = jbb_prime_net_o(link, p.rho_b, p.rho_o, kind) - target_net_o;
        s.oa = optimize_epsilon(link, p, kind).o_rate - target_net_o;
        return s;
    });

    auto locate = [&](auto member, auto &&excess) {
        Intersection out;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            if (!samples[i].feasible)
                continue;
            const double here = samples[i].*member;
            if (here >= 0.0)
            {
                // the O-target is already met where the B-target curve begins
                if (i == 0 || !samples[i - 1].feasible)
                {
                    out = {true, ratios[i], samples[i].rho_d};
                    return out;
                }
                const double prev = samples[i - 1].*member;
                const double r = refine_ratio(
                    [&](double ratio) {
                        const auto e = excess(ratio);
                        return e ? *e : -target_net_o;
                    },
                    ratios[i - 1], ratios[i], prev, here);
                out = {true, r, *solve_b_rho_d(link, target_net_b, r)};
                return out;
            }
        }
        return out;
    };

    OperatingPoints result;
    result.jbb_prime = locate(&Sample::jbb, jbb_excess);
    result.oa = locate(&Sample::oa, oa_excess);
    if (result.oa.found)
        result.oa_match = optimize_epsilon(link, split(result.oa.rho_d, result.oa.ratio), kind);
    if (result.jbb_prime.found && result.oa.found)
        result.saving_db = db(result.oa.rho_d) - db(result.jbb_prime.rho_d);
    return result;
}

std::vector<SweepPoint> sweep_uplink_snr(const SystemConfig &cfg, const PathLossProfile &profile, Precoder precoder,
                                         double target_net_b_sum, double rho_o, const std::vector<double> &rho_u_grid,
                                         Scheme scheme)
{
    if (scheme == Scheme::OA)
        throw ValidationError("sweep.scheme", "must be JBB or JBB_PRIME");
    if (!(target_net_b_sum > 0.0))
        throw ValidationError("sweep.net_b", "must be > 0");
    if (!(rho_o >= 0.0))
        throw ValidationError("sweep.rho_o", "must be >= 0");

    std::vector<double> grid = rho_u_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<SweepPoint> out;
    const double weight = prelog(cfg, scheme) * static_cast<double>(profile.beta.size());
    for (double rho_u : grid)
    {
        SystemConfig c = cfg;
        c.rho_u = rho_u;
        const std::vector<double> gamma = estimation_quality(profile.beta, rho_u, c.tau_pu);
        const auto rho_b = solve_increasing(
            [&](double rb) {
                const double eff = scheme == Scheme::JBBPrime ? rho_b_prime(rb, c.frame(), c.tau_po) : rb;
                return weight * maxmin_rate(c, profile.beta, gamma, eff, rho_o, precoder) - target_net_b_sum;
            },
            kPowerLo, kPowerHi);
        out.push_back({rho_u, rho_o, rho_b.value_or(0.0), rho_b.has_value()});
    }
    return out;
}

} // namespace jbb
