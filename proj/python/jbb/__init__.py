# SPDX-License-Identifier: Apache-2.0
#
# jbb: joint beamforming and broadcasting for massive MIMO downlinks
# ------------------------------------------------------------------------
"""Python access to the jbb rate engine, solver and Monte Carlo checks.

Command functions (``rates``, ``curves``, ``verify``, ``sweep``, ``table1``) return
the same JSON documents as the ``jbbctl`` executable, already decoded.
"""

import json as _json

from . import _jbb
from ._jbb import (
    DomainError,
    InfeasibleTargetError,
    Scenario,
    ValidationError,
    __version__,
    db_to_linear,
    drop_study,
    gamma_k,
    linear_to_db,
    load_scenario,
    net_rates,
    o_rate_exact,
    operating_points,
    optimize_epsilon,
    parse_scenario,
    run_cli,
    sample_o_rate,
)


class CommandOutput(dict):
    """Decoded JSON output of a command plus its exit code and CSV text."""

    def __init__(self, raw):
        super().__init__(_json.loads(raw["json"]))
        self.exit_code = raw["exit_code"]
        self.csv = raw["csv"]
        self.text = raw["text"]


def _scenario(s):
    return load_scenario(str(s)) if not isinstance(s, Scenario) else s


def rates(scenario, seed=None, threads=0):
    return CommandOutput(_jbb.rates(_scenario(scenario), seed, threads))


def curves(scenario, seed=None, threads=0):
    return CommandOutput(_jbb.curves(_scenario(scenario), seed, threads))


def verify(scenario, seed=None, threads=0):
    return CommandOutput(_jbb.verify(_scenario(scenario), seed, threads))


def sweep(scenario, seed=None, threads=0):
    return CommandOutput(_jbb.sweep(_scenario(scenario), seed, threads))


def table1(scenarios, seed=1, threads=0):
    return CommandOutput(_jbb.table1([_scenario(s) for s in scenarios], seed, threads))


__all__ = [
    "CommandOutput",
    "DomainError",
    "InfeasibleTargetError",
    "Scenario",
    "ValidationError",
    "__version__",
    "curves",
    "db_to_linear",
    "drop_study",
    "gamma_k",
    "linear_to_db",
    "load_scenario",
    "net_rates",
    "o_rate_exact",
    "operating_points",
    "optimize_epsilon",
    "parse_scenario",
    "rates",
    "run_cli",
    "sample_o_rate",
    "sweep",
    "table1",
    "verify",
]
