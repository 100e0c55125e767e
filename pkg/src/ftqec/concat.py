"""Concatenated coding: crash rates of two-level codes and noise thresholds.

Two treatments are implemented.  The monolithic view regards the pair as a
single CSS code of parameters [[n_i n_o, k_o, (d_i d_o + d_i + d_o - 1)/2]]
and reuses the flat analytic model with the weight tail replaced by the
hierarchical uncorrectability condition (more than t_i errors in more than
t_o sub-blocks).  The level-recursive view recovers the inner blocks inside
the outer networks: the inner crash probability per recovery becomes the
gate and memory failure rate of the level-1 qubits, with the inner resting
term stretched by eta = 1 + N_h_outer / (2 N_GV_outer) and the outer level
evaluated with no holes, unit measurement time and its resting term shrunk
by the same eta.

Iterating the level-recursive map with one k = 1 code at every level yields
the noise threshold: the largest physical gate rate for which the per-level
crash probabilities keep falling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import analytic
from .analytic import AnalyticConstants, DEFAULT_CONSTANTS, binom_pmf
from .codes import CodeParams
from .noise import NoiseParams
from .simulator import ProtocolParams


@dataclass(frozen=True)
class ConcatSpec:
    """One inner-outer concatenation (inner encodes single qubits)."""
    inner: CodeParams
    outer: CodeParams
    levels: int = 2
    n_rep_inner: float = 1.0
    n_rep_outer: float = 1.0
    t_m: int = 1
    treatment: str = "level-recursive"   # or "monolithic"

    def __post_init__(self):
        if self.inner.k != 1:
            raise ValueError("inner code must encode a single qubit")
        if self.levels < 2:
            raise ValueError("a concatenation has at least two levels")


@dataclass
class LevelRates:
    """Effective failure rates entering each level (level 0 = physical)."""
    gamma_levels: list[float]
    eps_levels: list[float]

    @staticmethod
    def from_trace(gamma: float, eps: float, trace: list[float]) -> "LevelRates":
        """Physical rates followed by the crash rate each level hands up."""
        return LevelRates(gamma_levels=[gamma] + list(trace),
                          eps_levels=[eps] + list(trace))


@dataclass
class ConcatEstimate:
    pbar: float
    inner_pbar: float
    eta: float
    below_breakeven: bool
    inner_protocol: ProtocolParams
    outer_protocol: ProtocolParams


def supercode_params(inner: CodeParams, outer: CodeParams) -> CodeParams:
    """Parameters of the combined block in the monolithic view."""
    if inner.k != 1:
        raise ValueError("inner code must encode a single qubit")
    n = inner.n * outer.n
    k = outer.k
    d = (inner.d * outer.d + inner.d + outer.d - 1) // 2
    # w and N_A of the combined (I A) form are not needed by the
    # hierarchical tail; carry the inner/outer products for the counts
    w = inner.w * outer.w if inner.w and outer.w else max(inner.w, outer.w)
    n_a = inner.N_A * outer.n + outer.N_A * inner.n
    return CodeParams.from_counts(n, k, d, w, n_a,
                                  source="constructed",
                                  name=f"{inner.name}*{outer.name}")


def hierarchical_tail(inner: CodeParams, outer: CodeParams):
    """Uncorrectability probability for the monolithic treatment.

    Converts the failure-location counts into a per-bit error probability
    and demands more than t_i errors inside more than t_o sub-blocks.
    """
    n_total = inner.n * outer.n

    def tail(g: float, s: float, gamma_eff: float, eps_eff: float) -> float:
        p_bit = min(1.0, (g * gamma_eff + s * eps_eff) / n_total)
        p_block = binom_pmf(inner.n, inner.t + 1, p_bit)
        return binom_pmf(outer.n, outer.t + 1, p_block)

    return tail


def eta_factor(outer: CodeParams) -> float:
    """Mean level-2 steps between recoveries of one level-1 qubit."""
    if outer.N_GV == 0:
        return 1.0
    return 1.0 + outer.N_h / (2.0 * outer.N_GV)


def concat_estimate(spec: ConcatSpec, gamma: float, eps: float,
                    consts: AnalyticConstants = DEFAULT_CONSTANTS,
                    inner_protocol: Optional[ProtocolParams] = None,
                    outer_protocol: Optional[ProtocolParams] = None,
                    r_values=range(1, 7), constraint=None) -> ConcatEstimate:
    """Crash probability per recovery of the two-level code.

    Repetition parameters are optimized independently per level unless given.
    """
    if spec.treatment != "level-recursive":
        raise ValueError("concat_estimate implements the level-recursive treatment")
    eta = eta_factor(spec.outer)
    noise_in = NoiseParams.uniform(gamma, eps, spec.t_m)
    if inner_protocol is None:
        inner_protocol, inner_pbar = analytic.optimize_protocol(
            spec.inner, noise_in, r_values=r_values,
            n_rep=spec.n_rep_inner, consts=consts, rest_scale=eta,
            constraint=constraint)
    else:
        inner_pbar = analytic.crash_estimate(
            spec.inner, noise_in, inner_protocol, consts,
            rest_scale=eta).pbar
    below = inner_pbar >= 0.5
    if below:
        return ConcatEstimate(pbar=1.0, inner_pbar=inner_pbar, eta=eta,
                              below_breakeven=True,
                              inner_protocol=inner_protocol,
                              outer_protocol=outer_protocol
                              or ProtocolParams(1, 1, 1))
    outer_code = _without_holes(spec.outer)
    noise_out = NoiseParams.uniform(inner_pbar, inner_pbar, t_m=1)
    if outer_protocol is None:
        outer_protocol, outer_pbar = analytic.optimize_protocol(
            outer_code, noise_out, r_values=r_values,
            n_rep=spec.n_rep_outer, consts=consts, rest_scale=1.0 / eta,
            constraint=constraint)
    else:
        outer_pbar = analytic.crash_estimate(
            outer_code, noise_out, outer_protocol, consts,
            rest_scale=1.0 / eta).pbar
    return ConcatEstimate(pbar=outer_pbar, inner_pbar=inner_pbar, eta=eta,
                          below_breakeven=False,
                          inner_protocol=inner_protocol,
                          outer_protocol=outer_protocol)


def monolithic_estimate(inner: CodeParams, outer: CodeParams,
                        gamma: float, eps: float, t_m: int,
                        protocol: Optional[ProtocolParams] = None,
                        n_rep: float = 1.0,
                        r_values=range(1, 7),
                        consts: AnalyticConstants = DEFAULT_CONSTANTS) -> tuple[float, CodeParams]:
    """Crash probability treating the pair as one large CSS code."""
    combo = supercode_params(inner, outer)
    noise = NoiseParams.uniform(gamma, eps, t_m)
    tail = hierarchical_tail(inner, outer)
    if protocol is None:
        protocol, pbar = analytic.optimize_protocol(
            combo, noise, r_values=r_values, n_rep=n_rep,
            consts=consts, tail_model=tail)
    else:
        pbar = analytic.crash_estimate(combo, noise, protocol, consts,
                                       tail_model=tail).pbar
    return pbar, combo


def _without_holes(code: CodeParams) -> CodeParams:
    """Outer-level view: inter-gate memory noise absorbed into the rates."""
    return CodeParams(n=code.n, k=code.k, d=code.d, t=code.t, w=code.w,
                      N_A=code.N_A, N_GV=code.N_GV, N_h=0,
                      source=code.source, name=code.name + "+inner-recovered")


# ---------------------------------------------------------------------------
# multi-level threshold
# ---------------------------------------------------------------------------

LEVELS_CHECKED = 12
_BISECTION_FLOOR = 1e-30


def level_trace(code: CodeParams, gamma: float, eps_over_gamma: float,
                t_m: int, levels: int = LEVELS_CHECKED,
                r_values=range(1, 7),
                consts: AnalyticConstants = DEFAULT_CONSTANTS,
                n_rep: float = 10.0) -> list[float]:
    """Per-level crash probabilities of ``code`` concatenated with itself.

    Level 1 runs at the physical noise and measurement time; level 2 absorbs
    the inner recoveries (no holes, unit measurement time); levels 3 and up
    iterate the stationary map at unit measurement time with the full hole
    count.  ``n_rep`` defaults to generous provisioning (the top of the
    practical range); pushing it higher shrinks the resting time toward
    zero and inflates the memory-limited thresholds beyond their
    calibration.
    """
    trace = []
    noise1 = NoiseParams.uniform(gamma, gamma * eps_over_gamma, t_m)
    _, p1 = analytic.optimize_protocol(code, noise1, r_values=r_values,
                                       n_rep=n_rep, consts=consts)
    trace.append(p1)
    if levels == 1:
        return trace
    hole_free = _without_holes(code)
    noise2 = NoiseParams.uniform(p1, p1, t_m=1)
    _, p2 = analytic.optimize_protocol(hole_free, noise2, r_values=r_values,
                                       n_rep=n_rep, consts=consts)
    trace.append(p2)
    p_prev = p2
    for _ in range(3, levels + 1):
        noise_l = NoiseParams.uniform(p_prev, p_prev, t_m=1)
        _, p_l = analytic.optimize_protocol(code, noise_l, r_values=r_values,
                                            n_rep=n_rep, consts=consts)
        trace.append(p_l)
        if p_l >= 1.0 or p_l < _BISECTION_FLOOR:
            break
        p_prev = p_l
    return trace


def _converges(trace: list[float]) -> bool:
    """Crash probability falls at every checked level above the first.

    A trace cut short because the rate collapsed below the floor counts as
    convergent (the recursion is doubly exponential once it falls at all).
    """
    levels = trace[1:]
    if not levels:
        return False
    if any(not math.isfinite(p) for p in levels):
        return False
    for a, b in zip(levels, levels[1:]):
        if a < _BISECTION_FLOOR and b < _BISECTION_FLOOR:
            continue
        if b >= a:
            return False
    if trace[-1] < _BISECTION_FLOOR:
        return True
    return len(levels) >= LEVELS_CHECKED - 1


def threshold(code: CodeParams, eps_over_gamma: float, t_m: int,
              rel_width: float = 1e-2, r_values=range(1, 7),
              consts: AnalyticConstants = DEFAULT_CONSTANTS,
              lo: float = 1e-6, hi: float = 3e-2,
              n_rep: float = 10.0) -> float:
    """Bisect the physical gate rate separating convergent from divergent
    multi-level recursions.  Returns gamma_0."""
    if code.k != 1:
        raise ValueError("threshold recursion needs a k = 1 code")

    def below(gamma: float) -> bool:
        trace = level_trace(code, gamma, eps_over_gamma, t_m,
                            r_values=r_values, consts=consts, n_rep=n_rep)
        return _converges(trace)

    if not below(lo):
        raise RuntimeError(f"no convergence even at gamma = {lo}")
    while below(hi):
        hi *= 2.0
        if hi > 0.5:
            return hi
    while hi / lo > 1.0 + rel_width:
        mid = math.sqrt(lo * hi)
        if below(mid):
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
