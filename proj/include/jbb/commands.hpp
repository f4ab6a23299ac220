// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------
//
// Command layer behind the jbbctl executable. Every command returns its output as
// strings so it can be driven from tests and from Python as well as from main().

#ifndef JBB_COMMANDS_HPP
#define JBB_COMMANDS_HPP

#include "jbb/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace jbb
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitVerification = 4;

std::string_view tool_version();

struct RunContext
{
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct CommandResult
{
    int exit_code = kExitOk;
    std::string stem; // base name of the output files
    std::string json;
    std::string csv;
    std::string text; // short human-readable summary
};

// Savings over repeated random drops of a scenario's B-terminals. Drop i uses
// drop_seed(drop.seed, i); drops where either intersection is missing are counted
// separately and left out of the medians.
struct DropStudy
{
    std::vector<double> saving_db;
    std::vector<double> epsilon;
    int missing = 0;
    double median_saving_db = 0.0;
    double median_epsilon = 0.0;
};

DropStudy drop_study(const Scenario &scenario, unsigned threads = 0);

double median(std::vector<double> values);

CommandResult cmd_rates(const Scenario &scenario, const RunContext &ctx);
CommandResult cmd_curves(const Scenario &scenario, const RunContext &ctx);
CommandResult cmd_verify(const Scenario &scenario, const RunContext &ctx);
CommandResult cmd_sweep(const Scenario &scenario, const RunContext &ctx);
CommandResult cmd_table1(const std::vector<Scenario> &scenarios, const RunContext &ctx);

// Full command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace jbb

#endif
