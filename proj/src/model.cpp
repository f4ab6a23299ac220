// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/model.hpp"

#include "jbb/errors.hpp"
#include "jbb/rng.hpp"

#include <cmath>
#include <sstream>

namespace jbb
{

std::string_view to_string(Scheme scheme)
{
    switch (scheme)
    {
    case Scheme::JBB:
        return "JBB";
    case Scheme::JBBPrime:
        return "JBB_PRIME";
    case Scheme::OA:
        return "OA";
    }
    return "?";
}

std::string_view to_string(Precoder precoder)
{
    return precoder == Precoder::MR ? "MR" : "ZF";
}

Scheme parse_scheme(std::string_view text)
{
    if (text == "JBB")
        return Scheme::JBB;
    if (text == "JBB_PRIME" || text == "JBB'")
        return Scheme::JBBPrime;
    if (text == "OA")
        return Scheme::OA;
    throw ValidationError("scheme", "must be one of JBB, JBB_PRIME, OA (got '" + std::string(text) + "')");
}

Precoder parse_precoder(std::string_view text)
{
    if (text == "MR")
        return Precoder::MR;
    if (text == "ZF")
        return Precoder::ZF;
    throw ValidationError("precoder", "must be MR or ZF (got '" + std::string(text) + "')");
}

namespace
{
template <class T>
std::string got(const T &value)
{
    std::ostringstream os;
    os << " (got " << value << ")";
    return os.str();
}
} // namespace

void SystemConfig::validate(Scheme scheme) const
{
    if (M < 1)
        throw ValidationError("M", "must be >= 1" + got(M));
    if (K < 0)
        throw ValidationError("K", "must be >= 0" + got(K));
    if (K >= M)
        throw ValidationError("K", "must satisfy K < M" + got(K));
    if (Mp < 1)
        throw ValidationError("Mp", "must be >= 1" + got(Mp));
    if (tau_c < 1)
        throw ValidationError("tau_c", "must be >= 1" + got(tau_c));
    if (tau_pu < K || tau_pu > tau_c)
        throw ValidationError("tau_pu", "must satisfy K <= tau_pu <= tau_c" + got(tau_pu));
    if (tau_po < Mp || tau_po > tau_c)
        throw ValidationError("tau_po", "must satisfy Mp <= tau_po <= tau_c" + got(tau_po));
    if (scheme == Scheme::OA)
    {
        if (Mp > M)
            throw ValidationError("Mp", "must satisfy Mp <= M for OA" + got(Mp));
    }
    else if (Mp > M - K)
    {
        throw ValidationError("Mp", "must satisfy Mp <= M - K to fit into the nullspace" + got(Mp));
    }
    if ((tau_c - tau_pu) % 2 != 0)
        throw ValidationError("tau_pu", "tau_c - tau_pu must be even for a symmetric uplink/downlink split" +
                                            got(tau_c - tau_pu));
    if (!std::isfinite(rho_u) || rho_u < 0.0)
        throw ValidationError("rho_u", "must be finite and >= 0" + got(rho_u));
}

FrameBudget SystemConfig::frame() const
{
    const int payload = (tau_c - tau_pu) / 2;
    return {payload, payload};
}

void PathLossProfile::validate() const
{
    for (std::size_t k = 0; k < beta.size(); ++k)
    {
        if (!std::isfinite(beta[k]) || beta[k] <= 0.0)
            throw ValidationError("beta[" + std::to_string(k) + "]", "must be finite and > 0" + got(beta[k]));
    }
    if (!std::isfinite(beta_o) || beta_o <= 0.0)
        throw ValidationError("beta_o", "must be finite and > 0" + got(beta_o));
}

void CellGeometry::validate() const
{
    if (!(inner_radius > 0.0))
        throw ValidationError("inner_radius", "must be > 0" + got(inner_radius));
    if (!(outer_radius > inner_radius) || !std::isfinite(outer_radius))
        throw ValidationError("outer_radius", "must be finite and > inner_radius" + got(outer_radius));
    if (!std::isfinite(pathloss_exponent) || pathloss_exponent <= 0.0)
        throw ValidationError("pathloss_exponent", "must be finite and > 0" + got(pathloss_exponent));
}

double db_to_linear(double x_db)
{
    return std::pow(10.0, x_db / 10.0);
}

double linear_to_db(double x)
{
    return 10.0 * std::log10(x);
}

double pathloss_at(const CellGeometry &geometry, double distance)
{
    if (!(distance > 0.0))
        throw ValidationError("distance", "must be > 0" + got(distance));
    return std::pow(distance, -geometry.pathloss_exponent);
}

PathLossProfile drop_terminals(const CellGeometry &geometry, int K, std::uint64_t rng_seed, double beta_o)
{
    geometry.validate();
    if (K < 1)
        throw ValidationError("K", "must be >= 1 to drop terminals" + got(K));

    CounterRng rng(rng_seed);
    const double r_in2 = geometry.inner_radius * geometry.inner_radius;
    const double r_out2 = geometry.outer_radius * geometry.outer_radius;

    PathLossProfile profile;
    profile.beta_o = beta_o;
    profile.beta.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
    {
        // inverse CDF of the radius under uniform-area sampling
        const double d = std::sqrt(rng.uniform() * (r_out2 - r_in2) + r_in2);
        profile.beta.push_back(pathloss_at(geometry, d));
    }
    return profile;
}

double rho_b_prime(double rho_b, const FrameBudget &budget, int tau_po)
{
    if (tau_po >= budget.tau_dd)
        throw InfeasibleFrameError("tau_po = " + std::to_string(tau_po) + " leaves no downlink payload symbols (tau_dd = " +
                                   std::to_string(budget.tau_dd) + ")");
    return rho_b * static_cast<double>(budget.tau_dd) / static_cast<double>(budget.tau_dd - tau_po);
}

} // namespace jbb
