import numpy as np
import pytest
from scipy.stats import chisquare

from ftqec.noise import (NoiseParams, Pauli, TWO_QUBIT_FAILURES,
                         apply_memory_noise, idle_flip_probability,
                         sample_gate_failure, stream)


def test_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(gamma2=1.5)
    with pytest.raises(ValueError):
        NoiseParams(t_m=0)


def test_two_qubit_zero_rate_is_identity():
    rng = stream(1, 0)
    np_ = NoiseParams(gamma2=0.0)
    for _ in range(1000):
        assert sample_gate_failure("CX", np_, rng) == (Pauli.I, Pauli.I)


def test_two_qubit_forced_failure_uniform():
    # gamma2 = 1: each of the 15 failures at 1/15 within 3 sigma over 1e6 draws
    rng = stream(2, 0)
    np_ = NoiseParams(gamma2=1.0)
    counts = {}
    n = 1_000_000
    for _ in range(n):
        f = sample_gate_failure("CZ", np_, rng)
        counts[f] = counts.get(f, 0) + 1
    assert set(counts) == set(TWO_QUBIT_FAILURES)
    exp = n / 15
    sigma = (n * (1 / 15) * (14 / 15)) ** 0.5
    for f, c in counts.items():
        assert abs(c - exp) < 3.5 * sigma
    stat, p = chisquare(list(counts.values()))
    assert p > 0.001


def test_single_qubit_marginals():
    rng = stream(3, 0)
    np_ = NoiseParams(gamma1=0.3)
    counts = {Pauli.I: 0, Pauli.X: 0, Pauli.Y: 0, Pauli.Z: 0}
    n = 1_000_000
    for _ in range(n):
        counts[sample_gate_failure("H", np_, rng)] += 1
    for pauli in (Pauli.X, Pauli.Y, Pauli.Z):
        frac = counts[pauli] / n
        sigma = (0.1 * 0.9 / n) ** 0.5
        assert abs(frac - 0.1) < 4 * sigma


@pytest.mark.parametrize("kind,param", [("P0", "gamma_p"), ("M", "gamma_m")])
def test_prep_measure_marginals(kind, param):
    rng = stream(4, 0)
    np_ = NoiseParams(**{param: 0.09})
    n = 200_000
    hits = sum(1 for _ in range(n)
               if sample_gate_failure(kind, np_, rng) != Pauli.I)
    sigma = (n * 0.09 * 0.91) ** 0.5
    assert abs(hits - 0.09 * n) < 4 * sigma


def test_memory_noise_zero_eps():
    x = np.zeros(8, dtype=np.uint8)
    z = np.zeros(8, dtype=np.uint8)
    apply_memory_noise(x, z, range(8), 8, 0.0, stream(5, 0))
    assert not x.any() and not z.any()


def test_memory_noise_mean_count():
    # 1e6 locations at eps = 1e-3: mean 1000 within 3 sigma
    rng = stream(6, 0)
    x = np.zeros(10, dtype=np.uint8)
    z = np.zeros(10, dtype=np.uint8)
    count = apply_memory_noise(x, z, range(10), 1_000_000, 1e-3, rng,
                               mode="redistribution")
    sigma = (1_000_000 * 1e-3) ** 0.5
    assert abs(count - 1000) < 3.5 * sigma


def test_memory_noise_forced_single_location():
    rng = stream(7, 0)
    x = np.zeros(1, dtype=np.uint8)
    z = np.zeros(1, dtype=np.uint8)
    count = apply_memory_noise(x, z, [0], 1, 1.0, rng, mode="exact")
    assert count == 1
    assert x[0] or z[0]


def test_memory_noise_exact_marginal():
    rng = stream(8, 0)
    n = 300_000
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    apply_memory_noise(x, z, range(n), n, 0.01, rng, mode="exact")
    flips_x = int(x.sum())
    # X or Y components: 2/3 of failures flip the X plane
    expected = n * 0.01 * 2 / 3
    sigma = (n * 0.01 * 2 / 3) ** 0.5
    assert abs(flips_x - expected) < 4 * sigma


def test_determinism_same_seed():
    np_ = NoiseParams(gamma2=0.4)
    rng1 = stream(9, 5)
    rng2 = stream(9, 5)
    seq1 = [sample_gate_failure("CX", np_, rng1) for _ in range(50)]
    seq2 = [sample_gate_failure("CX", np_, rng2) for _ in range(50)]
    assert seq1 == seq2


def test_streams_independent():
    r0, r1 = stream(10, 0), stream(10, 1)
    assert [r0.integers(100) for _ in range(10)] != \
           [r1.integers(100) for _ in range(10)]


def test_idle_flip_probability_limits():
    assert idle_flip_probability(0.0, 100) == 0.0
    assert idle_flip_probability(0.01, 0) == 0.0
    one_step = idle_flip_probability(0.01, 1)
    assert abs(one_step - 0.01) < 1e-12
    assert idle_flip_probability(0.01, 1e9) == pytest.approx(0.75)
