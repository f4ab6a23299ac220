// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_MODEL_HPP
#define JBB_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jbb
{

// Transmission scheme of an operating point.
//   JBB       beamforming and nullspace broadcasting share every downlink symbol
//   JBBPrime  as JBB, but beamforming is silent during the O-terminal pilots
//   OA        orthogonal access, a fraction epsilon of the intervals is reserved for broadcast
enum class Scheme
{
    JBB,
    JBBPrime,
    OA
};

enum class Precoder
{
    MR,
    ZF
};

std::string_view to_string(Scheme scheme);
std::string_view to_string(Precoder precoder);
Scheme parse_scheme(std::string_view text);       // "JBB", "JBB_PRIME", "OA"
Precoder parse_precoder(std::string_view text);   // "MR", "ZF"

// Split of one coherence interval: tau_pu uplink pilots, then equal uplink and downlink payload.
struct FrameBudget
{
    int tau_du = 0;
    int tau_dd = 0;
};

struct SystemConfig
{
    int M = 100;        // base station antennas
    int K = 1;          // B-terminals
    int Mp = 7;         // broadcast subspace dimension
    int tau_c = 500;    // coherence interval [symbols]
    int tau_pu = 10;    // uplink pilot symbols
    int tau_po = 10;    // downlink pilot symbols for the O-terminals
    double rho_u = 1.0; // uplink SNR, linear

    // Throws ValidationError naming the first violated constraint. For JBB and JBB'
    // the broadcast subspace must fit into the nullspace (Mp <= M - K); OA only needs Mp <= M.
    void validate(Scheme scheme = Scheme::JBBPrime) const;

    FrameBudget frame() const;

    bool operator==(const SystemConfig &) const = default;
};

struct PathLossProfile
{
    std::vector<double> beta; // B-terminal large-scale gains, linear
    double beta_o = 1.0;      // O-terminal gain, linear

    void validate() const;

    bool operator==(const PathLossProfile &) const = default;
};

struct OperatingPoint
{
    double rho_b = 0.0;
    double rho_o = 0.0;
    Scheme scheme = Scheme::JBBPrime;

    double rho_d() const { return rho_b + rho_o; }
};

// Annulus-shaped cell; distances in units of the cell radius.
struct CellGeometry
{
    double inner_radius = 0.1;
    double outer_radius = 1.0;
    double pathloss_exponent = 4.0;

    void validate() const;

    bool operator==(const CellGeometry &) const = default;
};

double db_to_linear(double x_db);
double linear_to_db(double x);

// Large-scale gain at distance d from the array, normalized to 1 at unit distance.
double pathloss_at(const CellGeometry &geometry, double distance);

// Drops K terminals uniformly over the annulus area and maps each distance to its
// large-scale gain. beta_o is copied into the returned profile unchanged.
PathLossProfile drop_terminals(const CellGeometry &geometry, int K, std::uint64_t rng_seed, double beta_o = 1.0);

// B-terminal power under JBB' that spends the same energy per coherence interval as
// rho_b under JBB while staying silent for tau_po symbols.
double rho_b_prime(double rho_b, const FrameBudget &budget, int tau_po);

} // namespace jbb

#endif
