import numpy as np
import pytest

from chansim.dv_channels import make_channel
from chansim.estimation import (
    ExperimentResult,
    bell_povm,
    run_block_experiment,
    sample_povm,
    sql_scaling_fit,
)
from chansim.linalg import projector


def synthetic(n, var):
    return ExperimentResult(0.5, n, 2, [0.5, 0.5], var, 0.0, 0)


def test_projective_measurement_of_basis_state():
    povm = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert list(sample_povm(np.diag([1.0, 0.0]), povm, 500, seed=1)) == [500, 0]


def test_bell_measurement_of_dephasing_choi():
    povm, signal = bell_povm("dephasing")
    shots = 200_000
    counts = sample_povm(make_channel("dephasing", 0.3).choi, povm, shots, seed=2)
    assert counts[0] + counts[signal[0]] == shots
    freq = counts[signal[0]] / shots
    assert abs(freq - 0.3) < 4 * np.sqrt(0.21 / shots)


def test_uniform_povm_gives_flat_counts():
    d = 4
    shots = 40_000
    counts = sample_povm(np.diag([0.7, 0.1, 0.1, 0.1]), [np.eye(d) / d] * d, shots, seed=3)
    sigma = np.sqrt(shots * (1 / d) * (1 - 1 / d))
    assert np.all(np.abs(counts - shots / d) < 4 * sigma)


def test_erasure_flag_povm_is_complete():
    povm, signal = bell_povm("erasure")
    assert np.allclose(sum(povm), np.eye(6))
    counts = sample_povm(make_channel("erasure", 1.0).choi, povm, 100, seed=0)
    assert counts[signal[0]] == 100


def test_invalid_povms():
    rho = np.eye(2) / 2
    with pytest.raises(ValueError):
        sample_povm(rho, [np.diag([1.0, 0.0])], 10)
    with pytest.raises(ValueError):
        sample_povm(rho, [np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])], 10)
    with pytest.raises(ValueError):
        sample_povm(rho, [], 10)
    with pytest.raises(ValueError):
        bell_povm("amplitude")


def test_sampling_is_reproducible():
    povm = [projector([1, 0]), projector([0, 1])]
    a = sample_povm(np.eye(2) / 2, povm, 1000, seed=9)
    b = sample_povm(np.eye(2) / 2, povm, 1000, seed=9)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("p,n,trials", [(0.3, 1000, 200), (0.5, 100, 200)])
def test_variance_matches_binomial(p, n, trials):
    res = run_block_experiment("dephasing", p, n, trials, seed=11)
    assert len(res.estimates) == trials
    assert abs(res.empirical_var - p * (1 - p) / n) < 3 * res.variance_se
    assert res.qcrb == pytest.approx(p * (1 - p) / n)
    assert abs(res.mean_estimate - p) < 3 * np.sqrt(p * (1 - p) / n / trials)


def test_doubling_n_halves_variance():
    a = run_block_experiment("dephasing", 0.3, 500, 500, seed=12)
    b = run_block_experiment("dephasing", 0.3, 1000, 500, seed=13)
    assert 0.4 <= b.empirical_var / a.empirical_var <= 0.6


@pytest.mark.parametrize("kind", ["erasure", "depolarizing"])
def test_other_families_reach_the_bound(kind):
    res = run_block_experiment(kind, 0.2, 1000, 300, seed=5)
    assert abs(res.mean_estimate - 0.2) < 3 * np.sqrt(0.16 / 1000 / 300)
    assert abs(res.empirical_var - res.qcrb) < 3 * res.variance_se


def test_same_seed_same_result():
    a = run_block_experiment("dephasing", 0.3, 100, 50, seed=4)
    b = run_block_experiment("dephasing", 0.3, 100, 50, seed=4)
    assert a == b


def test_trial_streams_do_not_depend_on_trial_count():
    short = run_block_experiment("dephasing", 0.3, 100, 10, seed=4)
    long = run_block_experiment("dephasing", 0.3, 100, 40, seed=4)
    assert long.estimates[:10] == short.estimates


def test_seed_is_recorded_when_generated():
    res = run_block_experiment("dephasing", 0.3, 10, 2)
    assert isinstance(res.seed, int)
    again = run_block_experiment("dephasing", 0.3, 10, 2, seed=res.seed)
    assert again.estimates == res.estimates


def test_single_trial_has_no_standard_error():
    res = run_block_experiment("dephasing", 0.3, 10, 1, seed=0)
    assert not res.variance_defined
    assert np.isnan(res.variance_se)
    assert res.to_dict()["empirical_var"] is None


def test_experiment_argument_checks():
    with pytest.raises(ValueError):
        run_block_experiment("dephasing", 1.0, 10, 10)
    with pytest.raises(ValueError):
        run_block_experiment("dephasing", 0.3, 0, 10)
    with pytest.raises(ValueError):
        run_block_experiment("dephasing", 0.3, 10, 0)


def test_scaling_fit_on_synthetic_data():
    grid = [100, 1000, 10000]
    assert sql_scaling_fit([synthetic(n, 0.01) for n in grid]) == pytest.approx(0.0, abs=1e-12)
    assert sql_scaling_fit([(n, 3.0 / n ** 2) for n in grid]) == pytest.approx(-2.0)
    assert sql_scaling_fit([(n, 0.2 / n) for n in grid]) == pytest.approx(-1.0)


def test_scaling_fit_grid_checks():
    with pytest.raises(ValueError):
        sql_scaling_fit([(100, 1.0), (1000, 0.1)])
    with pytest.raises(ValueError):
        sql_scaling_fit([(100, 1.0), (200, 0.5), (500, 0.2)])
    with pytest.raises(ValueError):
        sql_scaling_fit([(100, 1.0), (1000, 0.0), (10000, 0.01)])


def test_scaling_slope_of_dephasing_design():
    res = [run_block_experiment("dephasing", 0.3, n, 500, seed=2024) for n in (100, 1000, 10000)]
    assert sql_scaling_fit(res) == pytest.approx(-1.0, abs=0.05)
