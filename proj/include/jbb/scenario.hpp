// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------
//
// Scenario files. JSON; keys ending in _db are decibels, every other power or gain
// is linear. Unknown keys are rejected so that typos surface as validation errors.

#ifndef JBB_SCENARIO_HPP
#define JBB_SCENARIO_HPP

#include "jbb/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jbb
{

struct Scenario
{
    struct Drop
    {
        std::vector<double> beta;          // explicit profile, or
        std::optional<std::uint64_t> seed; // random drop of system.K terminals
        bool operator==(const Drop &) const = default;
    };

    struct OTerminal
    {
        std::optional<double> beta_o;   // explicit gain, or
        std::optional<double> distance; // position in units of the cell radius
        double margin_db = 0.0;         // extra attenuation on top of the path loss
        bool operator==(const OTerminal &) const = default;
    };

    struct Targets
    {
        double net_b = 0.0; // net B-terminal sum rate [b/s/Hz/cell]
        double net_o = 0.0; // net O-terminal rate [b/s/Hz]
        bool operator==(const Targets &) const = default;
    };

    struct Point
    {
        double rho_b_db = 0.0;
        double rho_o_db = 0.0;
        bool operator==(const Point &) const = default;
    };

    struct Grid
    {
        double ratio_lo_db = -10.0;
        double ratio_hi_db = 20.0;
        int points = 121;
        bool operator==(const Grid &) const = default;
    };

    struct MonteCarlo
    {
        std::uint64_t channel_draws = 100000;
        std::uint64_t scalar_draws = 1000000;
        std::uint64_t seed = 1;
        bool operator==(const MonteCarlo &) const = default;
    };

    struct Sweep
    {
        std::vector<double> rho_u_db;
        std::vector<double> rho_o_db;
        double net_b = 0.0;
        Scheme scheme = Scheme::JBB;
        bool operator==(const Sweep &) const = default;
    };

    struct Statistics
    {
        int drops = 50; // random drops for the median-saving statistic
        bool operator==(const Statistics &) const = default;
    };

    struct Verify
    {
        double leakage_scale = 1.0; // multiplies the predicted leakage; != 1 only for negative controls
        bool operator==(const Verify &) const = default;
    };

    std::string name;
    std::string description;
    SystemConfig system;
    double rho_u_db = 0.0;
    CellGeometry geometry;
    Drop drop;
    OTerminal o_terminal;
    Precoder precoder = Precoder::ZF;
    std::optional<Targets> targets;
    std::optional<Point> operating_point;
    Grid grid;
    MonteCarlo mc;
    std::optional<Sweep> sweep;
    Statistics statistics;
    Verify verify;

    bool operator==(const Scenario &) const = default;

    double beta_o() const;
    PathLossProfile profile() const;                        // resolves the drop
    PathLossProfile profile_for_seed(std::uint64_t seed) const; // random drop with another seed
    OperatingPoint point(Scheme scheme = Scheme::JBBPrime) const;

    // Throws ValidationError with the dotted path of the offending field.
    void validate() const;
};

Scenario parse_scenario(const std::string &json_text);
Scenario load_scenario(const std::filesystem::path &path);
std::string serialize_scenario(const Scenario &scenario); // canonical, sorted keys

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string scenario_hash(const Scenario &scenario);

// Seed of the i-th random drop derived from a base seed.
std::uint64_t drop_seed(std::uint64_t base, std::uint64_t index);

} // namespace jbb

#endif
