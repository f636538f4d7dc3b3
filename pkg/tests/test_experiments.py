import math

import numpy as np
import pytest

from chainwatch.experiments import (
    ANTI_ZENO_BLOCK,
    AntiZenoConfig,
    SweepConfig,
    ZenoConfig,
    anti_zeno_angles,
    anti_zeno_expectation,
    anti_zeno_products,
    anti_zeno_trial,
    figure3_sweep,
    zeno_closed_form,
    zeno_simulate,
)

from conftest import H_QUARTER, H_SIN2_PI8, PI8

TWO_OVER_PI_5 = 0.10456843657770834  # (2/pi)^5


@pytest.mark.parametrize(
    "n,p,expected,tol",
    [
        (1, 1.0, 0.5, 1e-15),
        (2, 1.0, 0.75, 1e-15),
        (1000, 1.0, 0.999383, 1e-6),
    ],
)
def test_zeno_closed_form(n, p, expected, tol):
    assert zeno_closed_form(ZenoConfig(n, p)) == pytest.approx(expected, abs=tol)


def test_zeno_simulate_small_cases():
    res = zeno_simulate(ZenoConfig(1, 1.0))
    assert res.distributions[-1] == pytest.approx([0.5, 0.5], abs=1e-15)
    res = zeno_simulate(ZenoConfig(4, 1.0))
    assert res.q_simulated == pytest.approx(0.5 + 0.5 * math.cos(PI8) ** 4, abs=1e-12)
    assert res.q_simulated == pytest.approx(0.864, abs=5e-4)
    assert len(res.entropies) == 5


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 1.0])
@pytest.mark.parametrize("n", [1, 2, 3, 7, 64, 255, 1000, 2048])
def test_zeno_simulation_matches_closed_form(n, p):
    assert zeno_simulate(ZenoConfig(n, p)).abs_diff <= 1e-12


@pytest.mark.parametrize("p", [0.0, 0.3, 0.8])
def test_zeno_returns_to_preparation(p):
    res = zeno_simulate(ZenoConfig(1000, p))
    assert np.max(np.abs(res.distributions[-1] - [p, 1 - p])) <= 7e-4


def test_zeno_convergence_along_doubling():
    devs = [abs(zeno_closed_form(ZenoConfig(2**k, 1.0)) - 1.0) for k in range(12)]
    assert all(b <= a for a, b in zip(devs, devs[1:]))
    for k, dev in enumerate(devs):
        n = 2**k
        assert dev <= 1 - math.exp(-(math.pi**2) / (8 * n))


@pytest.mark.parametrize("n", [1, 16, 200])
def test_zeno_trajectory_entropy_monotone(n):
    h = zeno_simulate(ZenoConfig(n, 0.9)).entropies
    assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def test_anti_zeno_forced_angles():
    assert anti_zeno_trial(3, 0.3, angles=[0.0, 0.0, 0.0]).q == pytest.approx(0.3, abs=1e-15)
    assert anti_zeno_trial(3, 0.9, angles=[math.pi / 4] * 3).q == pytest.approx(0.5, abs=1e-15)
    assert anti_zeno_trial(1, 0.9, angles=[math.pi / 4]).q == pytest.approx(0.5, abs=1e-15)
    trial = anti_zeno_trial(2, 1.0, angles=[PI8, PI8])
    assert trial.q_formula == pytest.approx(0.75, abs=1e-15)
    assert trial.q_chain == pytest.approx(0.75, abs=1e-12)


def test_anti_zeno_paths_agree_on_random_sequences():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        n = int(rng.integers(1, 30))
        trial = anti_zeno_trial(n, float(rng.uniform()), rng)
        assert np.all((trial.angles >= 0) & (trial.angles <= math.pi / 4))
        assert abs(trial.q_formula - trial.q_chain) <= 1e-12


def test_anti_zeno_trajectory_entropy_monotone():
    from chainwatch.chain import MeasurementChain, marginals, shannon_entropy

    angles = anti_zeno_angles(3, 40, 0, 1)[0]
    h = [shannon_entropy(d) for d in marginals(MeasurementChain.qubit(0.95, angles))]
    assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def test_anti_zeno_theory_values():
    assert anti_zeno_expectation(AntiZenoConfig(1, trials=10)).theory == pytest.approx(0.636620, abs=1e-6)
    assert anti_zeno_expectation(AntiZenoConfig(5, trials=10)).theory == pytest.approx(TWO_OVER_PI_5, abs=1e-15)
    assert (2 / math.pi) ** 50 < 2e-10


def test_anti_zeno_deterministic_for_seed():
    cfg = AntiZenoConfig(n=3, trials=5000, seed=99)
    a, b = anti_zeno_expectation(cfg), anti_zeno_expectation(cfg)
    assert a.sample_mean == b.sample_mean and a.std_error == b.std_error
    assert anti_zeno_expectation(AntiZenoConfig(n=3, trials=5000, seed=100)).sample_mean != a.sample_mean


def test_anti_zeno_independent_of_thread_count():
    cfg = AntiZenoConfig(n=4, trials=3 * ANTI_ZENO_BLOCK + 17, seed=5)
    serial = anti_zeno_products(cfg, threads=1)
    parallel = anti_zeno_products(cfg, threads=4)
    assert np.array_equal(serial, parallel)


def test_anti_zeno_trial_streams_are_prefix_stable():
    whole = anti_zeno_angles(11, 3, 0, ANTI_ZENO_BLOCK + 10)
    tail = anti_zeno_angles(11, 3, ANTI_ZENO_BLOCK - 5, 15)
    assert np.array_equal(whole[ANTI_ZENO_BLOCK - 5 :], tail)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_anti_zeno_mean_within_five_sigma(n):
    est = anti_zeno_expectation(AntiZenoConfig(n=n, trials=100_000, seed=7))
    assert est.sigmas <= 5.0


def test_anti_zeno_randomizes_at_large_n():
    est = anti_zeno_expectation(AntiZenoConfig(n=50, p=1.0, trials=100_000, seed=3))
    # every product is non-negative, so the mean sits near the theory value, not at 0
    assert est.theory < 2e-10
    assert 0 < est.sample_mean < 1e-9
    assert est.sigmas <= 5.0
    assert est.expected_q == pytest.approx(0.5, abs=1e-9)
    assert est.variance > 0


def test_anti_zeno_single_trial_has_no_error_bar():
    est = anti_zeno_expectation(AntiZenoConfig(n=2, trials=1, seed=0))
    assert math.isnan(est.std_error)


def test_sweep_spot_values():
    table = figure3_sweep(SweepConfig(PI8, 2, 101))
    assert table.headers == ("p", "H0", "H1", "H2")
    assert table.rows.shape == (101, 4)
    assert table.rows[0, 1:] == pytest.approx([0.0, H_SIN2_PI8, H_QUARTER], abs=1e-12)
    assert table.rows[-1, 1:] == pytest.approx([0.0, H_SIN2_PI8, H_QUARTER], abs=1e-12)
    assert table.rows[50, 1:] == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)


@pytest.mark.parametrize("theta", [0.1, 0.7, 1.3])
def test_sweep_uniform_is_fixed_point(theta):
    table = figure3_sweep(SweepConfig(theta, 3, 3))
    assert table.rows[1, 1:] == pytest.approx([1.0] * 4, abs=1e-12)


def test_sweep_is_symmetric_in_p():
    table = figure3_sweep(SweepConfig(PI8, 2, 21))
    assert np.allclose(table.rows[:, 1:], table.rows[::-1, 1:], atol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        ZenoConfig(0)
    with pytest.raises(ValueError):
        AntiZenoConfig(1, p=1.5)
    with pytest.raises(ValueError):
        AntiZenoConfig(1, seed=-1)
    with pytest.raises(ValueError):
        SweepConfig(grid=1)
