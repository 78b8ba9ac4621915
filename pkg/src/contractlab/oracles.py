"""Seeded simulation of the two query models.

An OracleSession owns a counter-based RNG (Philox keyed by a 64-bit seed)
plus a query counter; identical seeds and query sequences reproduce the
sample stream byte for byte.  Batched draws consume the underlying bit
stream exactly like repeated single draws, so the boosted threshold-query
oracle can vectorize without changing any outcome.

Child seeds for parallel trials derive from a stable hash of (seed, label),
never from Python's randomized hash.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .agent import best_response_ccdf, best_response_finite
from .instances import CcdfInstance, Contract, FiniteInstance

ACTION_QUERY = "action_query"
CONTRACT_QUERY = "contract_query"


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit child seed for (seed, label)."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class OracleSession:
    """Query-counting sampling front-end over a hidden instance."""

    instance: Union[FiniteInstance, CcdfInstance]
    mode: str
    rng_seed: int
    query_count: int = 0
    sample_log: Optional[list] = None

    def __post_init__(self) -> None:
        if self.mode not in (ACTION_QUERY, CONTRACT_QUERY):
            raise ValueError(f"unknown mode {self.mode!r}")
        # Philox wants a nonnegative key below 2**128; fold anything else in.
        self._rng = np.random.Generator(np.random.Philox(key=self.rng_seed % (1 << 128)))

    @property
    def m(self) -> int:
        return self.instance.m

    def child(self, label: str) -> "OracleSession":
        """Independent session over the same instance (parallel trials)."""
        return OracleSession(
            self.instance, self.mode, derive_seed(self.rng_seed, label),
            sample_log=[] if self.sample_log is not None else None,
        )

    # -- sampling core ---------------------------------------------------------

    def _draw(self, pmf, count: int, descriptor: str) -> np.ndarray:
        """Inverse-CDF draws with ascending cumulative ordering."""
        cdf = np.cumsum(np.asarray(pmf, dtype=float))
        cdf[-1] = 1.0
        u = self._rng.random(count)
        outcomes = np.searchsorted(cdf, u, side="left")
        self.query_count += count
        if self.sample_log is not None:
            base = self.query_count - count
            self.sample_log.extend(
                (base + i, self.mode, descriptor, int(w)) for i, w in enumerate(outcomes)
            )
        return outcomes


def query_action(session: OracleSession, action_id: int) -> int:
    """One IID outcome from a named action's distribution."""
    if session.mode != ACTION_QUERY:
        raise ValueError("session is not in action-query mode")
    inst = session.instance
    if not isinstance(inst, FiniteInstance):
        raise ValueError("action queries need a finite instance")
    if not (0 <= action_id < inst.n):
        raise ValueError(f"unknown action {action_id}")
    out = session._draw(inst.actions[action_id].pmf, 1, f"action:{action_id}")
    return int(out[0])


def query_action_batch(session: OracleSession, action_id: int, count: int) -> np.ndarray:
    """count IID outcomes; identical in distribution and stream to repeated
    single queries."""
    if session.mode != ACTION_QUERY:
        raise ValueError("session is not in action-query mode")
    inst = session.instance
    if not isinstance(inst, FiniteInstance):
        raise ValueError("action queries need a finite instance")
    if not (0 <= action_id < inst.n):
        raise ValueError(f"unknown action {action_id}")
    return session._draw(inst.actions[action_id].pmf, count, f"action:{action_id}")


def _best_response(session: OracleSession, contract: Contract):
    if isinstance(session.instance, FiniteInstance):
        return best_response_finite(session.instance, contract)
    return best_response_ccdf(session.instance, contract)


def query_contract(session: OracleSession, contract: Contract) -> int:
    """One IID outcome from the best-response action's distribution.

    The chosen action itself stays hidden: only the sampled outcome escapes.
    The best response (with principal-favoring tie-breaking) is recomputed on
    every call rather than cached.
    """
    if session.mode != CONTRACT_QUERY:
        raise ValueError("session is not in contract-query mode")
    br = _best_response(session, contract)
    desc = "contract:" + ",".join(f"{p:.12g}" for p in contract.payments)
    out = session._draw(br.pmf, 1, desc)
    return int(out[0])


def query_contract_batch(session: OracleSession, contract: Contract, count: int) -> np.ndarray:
    """count IID outcomes of the same contract query.

    The hidden best response is deterministic for a fixed contract, so one
    recomputation serves the whole batch; the sample stream matches count
    repeated single queries exactly.
    """
    if session.mode != CONTRACT_QUERY:
        raise ValueError("session is not in contract-query mode")
    br = _best_response(session, contract)
    desc = "contract:" + ",".join(f"{p:.12g}" for p in contract.payments)
    return session._draw(br.pmf, count, desc)


@dataclass(frozen=True)
class ThresholdContract:
    """Pays r for any outcome at least omega, zero otherwise."""

    omega: int
    r: float

    def to_contract(self, m: int) -> Contract:
        if not (1 <= self.omega < m):
            raise ValueError(f"threshold outcome {self.omega} outside 1..{m - 1}")
        if self.r < 0:
            raise ValueError("threshold payment must be nonnegative")
        return Contract(tuple(0.0 if w < self.omega else float(self.r) for w in range(m)))


def subgradient_query(
    session: OracleSession,
    omega: int,
    r: float,
    eps: float,
    delta: float,
    hoeffding_k: float = 2.0,
) -> float:
    """Boosted threshold-contract query: an eps-subgradient oracle call.

    Issues N = ceil(K ln(1/delta) / eps^2) identical (omega, r)-threshold
    contract queries and returns the fraction of outcomes at least omega,
    plus the semi-confidence bound eps/2.  With probability at least
    1 - delta there is a z in [x_tilde - eps, x_tilde] at which r is a
    subgradient of the inverse CCDF for omega.  The value is returned
    unclipped (it may slightly exceed 1); consumers treat it as a position
    on the probability axis.
    """
    if r <= 0:
        raise ValueError("threshold payment must be positive")
    if not (0 < delta < 1) or eps <= 0:
        raise ValueError("need eps > 0 and delta in (0, 1)")
    n_queries = max(1, math.ceil(hoeffding_k * math.log(1.0 / delta) / (eps * eps)))
    contract = ThresholdContract(omega, r).to_contract(session.m)
    outcomes = query_contract_batch(session, contract, n_queries)
    frac = float(np.count_nonzero(outcomes >= omega)) / n_queries
    return frac + 0.5 * eps


def write_sample_trace(session: OracleSession, path) -> None:
    """Dump the session's sample log as CSV rows
    (query_index, mode, descriptor, outcome)."""
    if session.sample_log is None:
        raise ValueError("session was created without a sample log")
    import csv

    with open(path, "w", newline="") as fh:
        fh.write("# schema: contractlab.trace.v1\n")
        writer = csv.writer(fh)
        writer.writerow(["query_index", "mode", "descriptor", "outcome"])
        writer.writerows(session.sample_log)
