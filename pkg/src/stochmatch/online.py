"""Online stochastic matching with timeouts.

Buyers arrive over ``rounds`` rounds, each an independent uniform draw
over buyer types; only a type's first arrival is served.  On that arrival
the buyer rounds her LP row with level-set rounding, orders the selected
items by random probe times and scans them.  Each candidate is really
probed with probability ``alpha`` (the dumping factor) and only simulated
otherwise, so that every edge ends up probed with roughly the same
fraction of its LP mass.

Dumping factors come from a separate simulation of the subroutine with
no dumping, run once per buyer type against the full item set.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .bipartite import greedy_policy
from .general import h_factor
from .instance import Instance
from .lp import solve_lp_onl, split_large_small
from .policy import Policy
from .rng import derive_seed, seed_from, trial_uniforms, uniforms_from
from .transcript import Probe, ProbeTranscript, TrialRecords, OUTCOME_NAMES

ONE_MINUS_INV_E = 1.0 - math.exp(-1.0)
PER_EDGE_FLOOR = (math.e - 1.0) / (3.0 * math.e - 1.0)
SAMPLE_CAP = 10**6
EXACT_SAMPLES = 10**6
_BETA_CHUNK = 1 << 15


def required_sample_size(n: int, epsilon: float) -> int:
    """ceil((6n / eps^3) * ln(2 n^2 Z)) with Z = 3/eps + 1."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    z = 3.0 / epsilon + 1.0
    return math.ceil(6.0 * n / epsilon**3 * math.log(2.0 * n * n * z))


@dataclass(frozen=True)
class EstimatorConfig:
    epsilon: float
    n_samples: int

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")

    @property
    def z(self) -> float:
        return 3.0 / self.epsilon + 1.0

    @classmethod
    def from_formula(cls, n: int, epsilon: float, cap: int = SAMPLE_CAP) -> "EstimatorConfig":
        want = required_sample_size(n, epsilon)
        if want > cap:
            warnings.warn(f"sample size {want} exceeds the cap; using {cap}", RuntimeWarning, stacklevel=2)
        return cls(epsilon, min(want, cap))


@dataclass(frozen=True)
class OnlineConfig:
    """``mode``: ``half``, ``bigsmall``, ``combined`` or ``greedy``.

    ``beta`` is ``estimate`` (sample count from the Chernoff formula, capped)
    or ``exact`` (a fixed large simulation).  ``beta_seed`` drives the
    estimation streams, so a prepared policy is a pure function of its
    config.
    """

    mode: str = "half"
    delta: float = 0.74
    epsilon: float = 0.1
    beta: str = "estimate"
    cap: int = SAMPLE_CAP
    exact_samples: int = EXACT_SAMPLES
    beta_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("half", "bigsmall", "combined", "greedy"):
            raise ValueError(f"unknown online mode {self.mode!r}")
        if self.beta not in ("estimate", "exact"):
            raise ValueError(f"unknown beta mode {self.beta!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class DumpingFactors:
    alpha: np.ndarray  # (items, types)
    s_hat: np.ndarray
    beta: np.ndarray  # s_hat / x, nan where x = 0
    n_samples: int
    epsilon: float
    exact: bool = False


def _x_matrix(instance: Instance, x) -> np.ndarray:
    oa = instance.online_arrays
    x = np.asarray(x, dtype=float)
    if x.shape == oa.eid.shape:
        return x
    out = np.zeros(oa.eid.shape)
    out[oa.edge_item, oa.edge_type] = x
    return out


def estimate_beta(instance: Instance, x, b: int, n_samples: int, rng) -> np.ndarray:
    """Per-item fraction of undumped subroutine runs in which the item is
    selected and reached.  Its expectation is beta_ab * x_ab."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    oa = instance.online_arrays
    xm = _x_matrix(instance, x)
    p_col = np.ascontiguousarray(oa.p[:, b])
    x_col = np.ascontiguousarray(xm[:, b])
    n = oa.n_items
    counts = np.zeros(n, dtype=np.int64)
    seed = derive_seed(seed_from(rng), b)
    for start in range(0, n_samples, _BETA_CHUNK):
        stop = min(start + _BETA_CHUNK, n_samples)
        kernels.beta_counts(p_col, x_col, trial_uniforms(seed, start, stop, 3 * n), counts)
    return counts / float(n_samples)


def compute_dumping_factors(
    x,
    s_hat,
    epsilon: float,
    n: int,
    mode: str = "half",
    p=None,
    delta: Optional[float] = None,
    n_samples: int = 0,
    exact: bool = False,
) -> DumpingFactors:
    """alpha = clamp(target * x / s_hat, 1/2, 1); tiny x and s_hat = 0 get 1.

    ``half`` targets 1/2 everywhere.  ``bigsmall`` targets h(delta) on
    edges with p < delta and 1/2 on the rest (needs ``p`` and ``delta``).
    """
    x = np.asarray(x, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    target = np.full(x.shape, 0.5)
    if mode == "bigsmall":
        if p is None or delta is None:
            raise ValueError("bigsmall dumping needs p and delta")
        target = np.where(np.asarray(p) < delta, h_factor(delta), 0.5)
    elif mode != "half":
        raise ValueError(f"unknown dumping mode {mode!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = target * x / s_hat
        beta = np.where(x > 0, s_hat / x, np.nan)
    alpha = np.clip(np.nan_to_num(raw, nan=1.0, posinf=1.0), 0.5, 1.0)
    alpha = np.where((x < epsilon / n) | (s_hat <= 0.0), 1.0, alpha)
    return DumpingFactors(alpha, s_hat, beta, n_samples, epsilon, exact)


def estimate_all(instance: Instance, x, config: OnlineConfig) -> tuple[np.ndarray, int]:
    """s_hat for every type, as an (items, types) matrix, plus the sample count."""
    n = instance.online_arrays.n_types
    if config.beta == "exact":
        samples = config.exact_samples
    else:
        samples = EstimatorConfig.from_formula(n, config.epsilon, config.cap).n_samples
    cols = [estimate_beta(instance, x, b, samples, config.beta_seed) for b in range(n)]
    return np.stack(cols, axis=1), samples


# --------------------------------------------------------------- state + subroutine


@dataclass
class OnlineState:
    instance: Instance
    available: np.ndarray = None  # bool per item
    seen: np.ndarray = None  # bool per type
    matching: list = field(default_factory=list)
    profit: float = 0.0
    round: int = 0

    def __post_init__(self):
        oa = self.instance.online_arrays
        if self.available is None:
            self.available = np.ones(oa.n_items, dtype=bool)
        if self.seen is None:
            self.seen = np.zeros(oa.n_types, dtype=bool)


def buyer_subroutine(state: OnlineState, b: int, x, alphas, rng) -> list[Probe]:
    """Serve the first arrival of type ``b``; mutates ``state``.

    Draws one 4|A| block (rounding, probe times, dumping coins, outcomes)
    in the same layout as the batch kernel.
    """
    oa = state.instance.online_arrays
    if state.seen[b]:
        return []  # repeat arrivals are discarded
    state.seen[b] = True
    xm = _x_matrix(state.instance, x)
    alphas = np.asarray(alphas, dtype=float)
    n = oa.n_items
    u = uniforms_from(rng, 4 * n)
    xb = np.where(state.available & (oa.p[:, b] > 0), xm[:, b], 0.0)
    kernels.levelset_inplace(xb, u[:n])
    cand = np.flatnonzero(xb == 1.0)
    ys = np.array([kernels.probe_time(oa.p[a, b], u[n + a]) for a in cand])
    probes: list[Probe] = []
    real = 0
    for a in cand[np.argsort(ys, kind="mergesort")]:
        if real >= oa.t_types[b]:
            break
        e = int(oa.eid[a, b])
        stop = u[3 * n + a] < oa.p[a, b]
        if u[2 * n + a] < alphas[a, b]:
            real += 1
            if stop:
                probes.append(Probe(e, OUTCOME_NAMES[kernels.PROBE_SUCCESS]))
                state.available[a] = False
                state.matching.append(e)
                state.profit += oa.w[a, b]
                break
            probes.append(Probe(e, OUTCOME_NAMES[kernels.PROBE_FAIL]))
        else:
            probes.append(Probe(e, OUTCOME_NAMES[kernels.SIMULATED_STOP if stop else kernels.SIMULATED]))
            if stop:
                break
    return probes


# --------------------------------------------------------------- policies


def online_width(instance: Instance) -> int:
    oa = instance.online_arrays
    return oa.rounds + 4 * oa.n_items * oa.n_types


def _online_records(instance: Instance, xm: np.ndarray, alpha: np.ndarray, U: np.ndarray) -> TrialRecords:
    oa = instance.online_arrays
    rec = TrialRecords.empty(len(U), instance.n_edges, oa.n_types)
    kernels.online_trials(oa.eid, oa.p, oa.w, xm, alpha, oa.t_types, oa.rounds, U,
                          rec.status, rec.rank, rec.profit, rec.triggers)
    return rec


def subroutine_policy(instance: Instance, xm: np.ndarray, alpha: np.ndarray, name: str, info: dict) -> Policy:
    xm = np.ascontiguousarray(xm, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    return Policy(name, online_width(instance), lambda U: _online_records(instance, xm, alpha, U), info)


def online_greedy(instance: Instance) -> Policy:
    """On a type's first arrival probe only its edge in the max-weight
    matching under weights p*w."""
    gp = greedy_policy(instance)
    oa = instance.online_arrays
    xm = np.zeros(oa.eid.shape)
    for e in gp.info["matching"]:
        xm[oa.edge_item[e], oa.edge_type[e]] = 1.0
    info = dict(gp.info)
    n = oa.n_types
    info["expected"] = (1.0 - (1.0 - 1.0 / n) ** oa.rounds) * gp.info["expected"]
    return subroutine_policy(instance, xm, np.ones(oa.eid.shape), "online-greedy", info)


def choose_online_combined(gamma: float, delta: float) -> str:
    hd = h_factor(delta)
    greedy = ONE_MINUS_INV_E * gamma * delta
    sub = ONE_MINUS_INV_E * (gamma / 2.0 + (1.0 - gamma) * hd) / (1.0 + hd * ONE_MINUS_INV_E)
    return "GREEDY" if greedy >= sub else "SUBROUTINE"


def online_policy(instance: Instance, config: OnlineConfig = OnlineConfig()) -> Policy:
    if not instance.is_online:
        raise ValueError("online policies need an online instance")
    if config.mode == "greedy":
        return online_greedy(instance)
    lp = solve_lp_onl(instance)
    info: dict = {"lp_value": lp.objective, "x": lp.x}
    dump_mode = "half"
    if config.mode in ("bigsmall", "combined"):
        dump_mode = "bigsmall"
    if config.mode == "combined":
        summary = split_large_small(instance, lp.x, config.delta)
        pick = choose_online_combined(summary.gamma, config.delta)
        info.update(summary=summary, choice=pick)
        if pick == "GREEDY":
            g = online_greedy(instance)
            g.info.update(info)
            return Policy("online-combined", g.width, g.run, g.info)
    oa = instance.online_arrays
    xm = _x_matrix(instance, lp.x)
    s_hat, samples = estimate_all(instance, xm, config)
    dump = compute_dumping_factors(xm, s_hat, config.epsilon, oa.n_types, dump_mode, oa.p, config.delta,
                                   samples, config.beta == "exact")
    info["dumping"] = dump
    name = {"half": "online-half", "bigsmall": "online-bigsmall", "combined": "online-combined"}[config.mode]
    return subroutine_policy(instance, xm, dump.alpha, name, info)


def run_online(instance: Instance, config: OnlineConfig, rng) -> ProbeTranscript:
    return online_policy(instance, config).single(rng)


def online_ratio_function(delta: float) -> float:
    hd = h_factor(delta)
    c = ONE_MINUS_INV_E
    return c * delta * hd / (delta * (1.0 + hd * c) - 0.5 + hd)
