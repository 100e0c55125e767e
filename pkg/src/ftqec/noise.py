"""Stochastic failure model for gates, preparations, measurements and memory.

Every operation is modeled as a random Pauli failure followed by the perfect
operation.  Single-qubit gates fail with probability gamma1 (X, Y, Z equally
likely); two-qubit gates fail with probability gamma2, drawing uniformly
from the 15 non-identity two-qubit Paulis; preparations and measurements
fail with gamma_p and gamma_m.  Resting qubits pick up X, Y or Z with
probability eps/3 each per time step.

Random streams are PCG64 generators derived from a 64-bit base seed and a
stream index through SeedSequence spawning, so any worker layout that
assigns whole stream indices reproduces identical draws.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Pauli(IntEnum):
    """Single-qubit frame action; Y acts on both bit planes."""
    I = 0
    X = 1
    Z = 2
    Y = 3

    @property
    def flips_x(self) -> bool:
        return self in (Pauli.X, Pauli.Y)

    @property
    def flips_z(self) -> bool:
        return self in (Pauli.Z, Pauli.Y)


#: the 15 equally likely failures of a two-qubit gate
TWO_QUBIT_FAILURES: tuple[tuple[Pauli, Pauli], ...] = tuple(
    (Pauli(a), Pauli(b)) for a in range(4) for b in range(4) if (a, b) != (0, 0)
)

_SINGLE = (Pauli.X, Pauli.Y, Pauli.Z)


@dataclass(frozen=True)
class NoiseParams:
    gamma1: float = 0.0      # single-qubit gate failure probability
    gamma2: float = 0.0      # two-qubit gate failure probability
    gamma_p: float = 0.0     # preparation failure probability
    gamma_m: float = 0.0     # measurement failure probability
    eps: float = 0.0         # memory failure probability per qubit per step
    t_m: int = 1             # measurement + classical processing duration

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma_p", "gamma_m", "eps"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.t_m < 1:
            raise ValueError("t_m must be >= 1")

    @staticmethod
    def uniform(gamma: float, eps: float, t_m: int = 1) -> "NoiseParams":
        """All four gate-failure rates equal to ``gamma``."""
        return NoiseParams(gamma1=gamma, gamma2=gamma, gamma_p=gamma,
                           gamma_m=gamma, eps=eps, t_m=t_m)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent PCG64 stream ``index`` under a 64-bit base seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def sample_gate_failure(kind: str, np_: NoiseParams,
                        rng: np.random.Generator):
    """Draw the failure preceding one perfect operation.

    kind: 'H' (or any single-qubit gate), 'CX'/'CZ', 'P0'/'P+', 'M'.
    Returns a single Pauli for one-qubit kinds and a (Pauli, Pauli) pair
    for two-qubit kinds; identity means no failure.
    """
    if kind in ("CX", "CZ"):
        if rng.random() < np_.gamma2:
            return TWO_QUBIT_FAILURES[rng.integers(15)]
        return (Pauli.I, Pauli.I)
    if kind in ("P0", "P+"):
        p = np_.gamma_p
    elif kind == "M":
        p = np_.gamma_m
    else:
        p = np_.gamma1
    if rng.random() < p:
        return _SINGLE[rng.integers(3)]
    return Pauli.I


def apply_memory_noise(x_bits: np.ndarray, z_bits: np.ndarray,
                       qubits, n_locations: int, eps: float,
                       rng: np.random.Generator,
                       mode: str = "exact") -> int:
    """Inject memory failures into the frame planes for a set of qubits.

    exact mode: ``n_locations`` must be a multiple of len(qubits); every
    qubit rests for n_locations / len(qubits) steps and suffers independent
    per-step failures.

    redistribution mode: the number of failures is drawn as
    Binomial(n_locations, eps) and each failure lands on a uniformly random
    qubit of the set, so the mean count matches exact placement without
    tracking which qubit rested when.

    Returns the number of failures applied.
    """
    qubits = np.asarray(list(qubits), dtype=np.int64)
    if eps == 0.0 or n_locations == 0 or qubits.size == 0:
        return 0
    count = 0
    if mode == "exact":
        steps, rem = divmod(n_locations, len(qubits))
        if rem:
            raise ValueError("exact mode needs locations divisible by qubit count")
        for _ in range(steps):
            hit = rng.random(qubits.size) < eps
            for q in qubits[hit]:
                pauli = _SINGLE[rng.integers(3)]
                if pauli.flips_x:
                    x_bits[q] ^= 1
                if pauli.flips_z:
                    z_bits[q] ^= 1
                count += 1
    elif mode == "redistribution":
        k = rng.binomial(n_locations, eps)
        for _ in range(int(k)):
            q = qubits[rng.integers(qubits.size)]
            pauli = _SINGLE[rng.integers(3)]
            if pauli.flips_x:
                x_bits[q] ^= 1
            if pauli.flips_z:
                z_bits[q] ^= 1
            count += 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return count


# ---------------------------------------------------------------------------
# aggregated idle noise
#
# T iid steps of the eps/3 model compound, per qubit, to a net frame flip
# drawn from {none, X, Z, Y} with P(none) = (1 + 3*chi)/4 and the other
# three at (1 - chi)/4 each, where chi = (1 - 4*eps/3)^T.  This lets a long
# (possibly fractional) rest be applied as a single pass.
# ---------------------------------------------------------------------------

def idle_flip_probability(eps: float, steps: float) -> float:
    """Probability that a qubit resting ``steps`` steps ends up flipped
    (by an effective X, Y or Z, equally likely)."""
    if eps <= 0.0 or steps <= 0.0:
        return 0.0
    base = 1.0 - 4.0 * eps / 3.0
    if base < 0.0:
        # beyond the depolarizing point fractional steps have no real
        # compounding; round to whole steps (extreme-noise corner)
        chi = base ** round(steps)
    else:
        chi = base ** steps
    return 0.75 * (1.0 - chi)
