"""Decision policies, addressable by name.

Every policy comes in two forms: a single-run agent built on the per-round
operations (1-indexed arms, :class:`~osfib.core.ObservationSlice` feedback),
and a batch class that advances many replications in lockstep (0-indexed
arms, feedback as a ``(runs, K)`` array with NaN for unobserved arms).
"""

from osfib.core import OsfibError
from osfib.policies.elim import (
    ElimAgent,
    ElimBatch,
    ElimDoublingAgent,
    ElimDoublingBatch,
    ElimState,
    confidence_radius,
    doubling_wrap,
    elim_filter,
    elim_select,
    elim_update,
)
from osfib.policies.exp3 import (
    BASELINE_NOTE,
    Exp3RtbAgent,
    Exp3RtbBatch,
    Exp3RtbState,
    exp3rtb_select,
    exp3rtb_step,
    exp3rtb_update,
)
from osfib.policies.ftl import FtlAgent, FtlBatch, ftl_predict
from osfib.policies.ucb import (
    Ucb1Agent,
    Ucb1Batch,
    Ucb1State,
    UcbNAgent,
    UcbNBatch,
    UcbNState,
    ucb1_step,
    ucbn_step,
)

BATCH_POLICIES = {
    "elim": ElimBatch,
    "elim-doubling": ElimDoublingBatch,
    "ucbn": UcbNBatch,
    "ucb1": Ucb1Batch,
    "exp3rtb": Exp3RtbBatch,
    "ftl": FtlBatch,
}

POLICY_NAMES = tuple(BATCH_POLICIES)


class UnknownPolicyError(OsfibError, ValueError):
    pass


def make_batch_policy(name: str, k: int, horizon: int, runs: int, streams=None):
    try:
        cls = BATCH_POLICIES[name]
    except KeyError:
        raise UnknownPolicyError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}") from None
    return cls(k, horizon, runs, streams)


def make_agent(name: str, k: int, horizon: int, stream=None):
    """Single-run agent; ``stream`` is only consumed by randomized policies."""
    if name == "elim":
        return ElimAgent(k, horizon)
    if name == "elim-doubling":
        return ElimDoublingAgent(k)
    if name == "ucbn":
        return UcbNAgent(k)
    if name == "ucb1":
        return Ucb1Agent(k)
    if name == "exp3rtb":
        return Exp3RtbAgent(k, horizon, stream)
    if name == "ftl":
        return FtlAgent(k)
    raise UnknownPolicyError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
