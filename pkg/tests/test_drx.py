import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drxsim.blockage import BlockerField
from drxsim.channel import LinkSample
from drxsim.config import ConfigError, band_config
from drxsim.drx import (
    CycleOutcome,
    DrxConsistencyError,
    DrxState,
    Event,
    Mode,
    awake_fraction_bound,
    blocking_probability,
    drx_step,
    init_association,
    run_drx,
    run_trajectory,
    snr_trace,
    sweep_step,
    write_event_log,
)
from drxsim.scenario import build_deployment

CFG = band_config("28ghz")


def samples(snrs, cells=None, n=1, gmin=-6.5):
    cells = range(len(snrs)) if cells is None else cells
    return [LinkSample(n, c, 100.0, 0.0, 27.0, float(s), s < gmin) for c, s in zip(cells, snrs)]


def rng(seed=0):
    return np.random.default_rng(seed)


# initial association

def test_init_picks_strongest_and_random_companion():
    seen = set()
    for seed in range(200):
        st_ = init_association(samples([10, 20, 5]), 2, rng(seed))
        assert st_.serving_cell == 1 and st_.listening_set[0] == 1 and st_.mode is Mode.TRACKING
        seen.add(st_.listening_set[1])
    assert seen == {0, 2}


def test_init_companion_uniform():
    counts = np.zeros(3)
    for seed in range(4000):
        counts[init_association([10, 20, 5], 2, rng(seed)).listening_set[1]] += 1
    assert counts[1] == 0
    assert abs(counts[0] / 4000 - 0.5) < 0.03


def test_init_full_set_ignores_rng():
    a = init_association(samples([1, 2, 3, 4]), 4, rng(1))
    b = init_association(samples([1, 2, 3, 4]), 4, rng(99))
    assert a == b and sorted(a.listening_set) == [0, 1, 2, 3]


def test_init_tie_goes_to_lowest_index():
    assert init_association(samples([7, 7, 7]), 1, rng()).serving_cell == 0


def test_init_k_too_large():
    with pytest.raises(ConfigError):
        init_association(samples([1, 2]), 3, rng())


def test_init_rejects_gappy_samples():
    with pytest.raises(DrxConsistencyError):
        init_association(samples([1, 2], cells=[0, 2]), 1, rng())


# tracking cycle

def _state(serving=0, listening=(0, 1, 2, 3)):
    return DrxState(serving, tuple(listening))


def test_serving_usable_sticks():
    s = _state()
    new, out = drx_step(s, samples([0.0, 30, 30, 30]), CFG, rng())
    assert new == s and out.event is Event.SERVED
    assert out.awake_time_s == pytest.approx(4 * CFG.t_ss0_s)
    assert out.awake_time_s + out.slept_time_s == pytest.approx(CFG.t_ss_per_s)
    assert not out.all_blocked


def test_handover_to_best_alternative():
    s = _state()
    new, out = drx_step(s, samples([-10.0, -2.0, -30.0, -8.0]), CFG, rng())
    assert out.event is Event.HANDOVER and new.serving_cell == 1 and out.serving_cell == 1
    assert new.listening_set[0] == 1 and len(set(new.listening_set)) == 4
    assert out.awake_time_s == pytest.approx(4 * CFG.t_ss0_s)


def test_all_blocked_triggers_sweep():
    s = _state()
    new, out = drx_step(s, samples([-20.0] * 4), CFG, rng())
    assert out.event is Event.SWEEP_TRIGGERED and out.all_blocked
    assert new.mode is Mode.SWEEPING and new.sweep_remaining == CFG.sweep_len_cycles
    assert out.awake_time_s == CFG.t_ss_per_s and out.slept_time_s == 0.0


def test_threshold_is_inclusive():
    _, out = drx_step(_state(), samples([-6.5, -30, -30, -30]), CFG, rng())
    assert out.event is Event.SERVED


def test_drx_step_sample_mismatch():
    with pytest.raises(DrxConsistencyError):
        drx_step(_state(), samples([0, 0, 0]), CFG, rng())
    with pytest.raises(DrxConsistencyError):
        drx_step(_state(), samples([0, 0, 0, 0], cells=[0, 1, 2, 5]), CFG, rng())


def test_drx_step_refuses_sweeping_state():
    with pytest.raises(DrxConsistencyError):
        drx_step(DrxState(0, (0, 1), Mode.SWEEPING, 1), samples([0, 0]), CFG, rng())


# sweeping

@pytest.mark.parametrize("L", [1, 3])
def test_sweep_lasts_l_cycles(L):
    cfg = CFG.replace(sweep_len_cycles=L, k_listen=2)
    state = DrxState(0, (0, 1), Mode.SWEEPING, L)
    awake = []
    for n in range(L):
        assert state.mode is Mode.SWEEPING
        state, out = sweep_step(state, [1.0, 2.0, 9.0, 3.0], cfg, rng(), n)
        assert out.event is Event.SWEEPING
        awake.append(out.awake_time_s)
    assert awake == [cfg.t_ss_per_s] * L
    assert state.mode is Mode.TRACKING and state.serving_cell == 2


def test_sweep_step_refuses_tracking_state():
    with pytest.raises(DrxConsistencyError):
        sweep_step(_state(), [0.0] * 9, CFG, rng())


# closed-form probabilities

def test_blocking_probability_products():
    assert blocking_probability([0.5, 0.5]) == 0.25
    assert blocking_probability([0.9, 0.0, 0.4]) == 0.0
    assert blocking_probability([0.3] * 4) == pytest.approx(0.0081)
    assert blocking_probability([]) == 1.0
    with pytest.raises(ValueError):
        blocking_probability([1.2])


def test_blocking_probability_monte_carlo():
    r = rng(3)
    draws = r.random((200_000, 4)) < 0.3
    freq = draws.all(axis=1).mean()
    se = np.sqrt(0.0081 * (1 - 0.0081) / len(draws))
    assert abs(freq - blocking_probability([0.3] * 4)) < 3 * se


def test_awake_bound_examples():
    assert awake_fraction_bound(1.0, 4, CFG) == (1.0, 0.0)
    awake, sleep = awake_fraction_bound(0.0, 4, CFG)
    assert awake == pytest.approx(0.14) and sleep == pytest.approx(0.86)
    assert awake_fraction_bound(blocking_probability([]), 0, CFG)[0] == 1.0
    with pytest.raises(ValueError):
        awake_fraction_bound(-0.1, 4, CFG)


# whole trajectories on synthetic traces

def test_strong_links_exact_duty():
    trace = np.full((51, 9), 25.0)
    for k in range(1, 10):
        stats = run_drx(trace, CFG, k, rng())
        assert stats.p_b == 0.0 and stats.n_handovers == 0
        assert stats.beta_awake == pytest.approx(k * CFG.t_ss0_s / CFG.t_ss_per_s, abs=1e-12)
        assert stats.beta_awake + stats.beta_sleep == 1.0


@pytest.mark.parametrize("L", [1, 2, 5])
def test_everything_blocked(L):
    trace = np.full((41, 9), -40.0)
    stats = run_drx(trace, CFG.replace(sweep_len_cycles=L), 4, rng())
    assert stats.p_b == 1.0 and stats.beta_awake == 1.0 and stats.beta_sleep == 0.0
    assert stats.n_tracking == stats.n_sweeps


def test_no_tracking_instances_means_pb_one():
    trace = np.full((3, 9), -40.0)
    stats = run_drx(trace, CFG.replace(sweep_len_cycles=5), 1, rng())
    assert stats.n_tracking == 1 and stats.p_b == 1.0


def _bernoulli_trace(p, n_steps, n_cells, seed):
    r = rng(seed)
    return np.where(r.random((n_steps + 1, n_cells)) < p, -30.0, 20.0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 9), p=st.floats(0.0, 1.0))
def test_event_log_follows_rules(seed, k, p):
    trace = _bernoulli_trace(p, 60, 9, seed)
    stats = run_drx(trace, CFG.replace(sweep_len_cycles=2), k, rng(seed), record_events=True)
    for o in stats.events:
        if o.event is Event.SWEEPING:
            continue
        if o.serving_snr_db >= CFG.gamma_min_db:
            assert o.event is Event.SERVED and o.serving_cell == o.prev_serving_cell
        if o.event is Event.SWEEP_TRIGGERED:
            assert all(s < CFG.gamma_min_db for s in o.listening_snrs_db)
        assert o.awake_time_s + o.slept_time_s == pytest.approx(CFG.t_ss_per_s)
    assert stats.beta_awake >= k * CFG.t_ss0_s / CFG.t_ss_per_s - 1e-12


def test_pb_falls_with_k_on_matched_traces():
    pb = np.zeros(9)
    for seed in range(30):
        trace = _bernoulli_trace(0.3, 300, 9, seed)
        for k in range(1, 10):
            pb[k - 1] += run_drx(trace, CFG, k, rng(seed)).p_b
    assert np.all(np.diff(pb) <= 1e-12)
    assert pb[0] / 30 == pytest.approx(0.3, abs=0.03)
    assert pb[3] / 30 == pytest.approx(0.0081, abs=0.006)


def test_tradeoff_has_interior_optimum_under_heavy_blocking():
    # frequent outages make K=1 pay for sweeps while large K pays for listening
    sleep = np.zeros(9)
    for seed in range(20):
        trace = _bernoulli_trace(0.3, 300, 9, seed)
        for k in range(1, 10):
            sleep[k - 1] += run_drx(trace, CFG, k, rng(seed)).beta_sleep
    best = int(np.argmax(sleep)) + 1
    assert 1 < best < 9


def test_measured_awake_respects_bound():
    for seed in range(5):
        trace = _bernoulli_trace(0.2, 400, 9, seed)
        for k in (1, 2, 4):
            s = run_drx(trace, CFG, k, rng(seed))
            assert s.beta_awake >= awake_fraction_bound(s.p_b, k, CFG)[0] - 1e-12


# real channel

def test_run_trajectory_deterministic():
    cfg = CFG.replace(n_steps=40)
    a = run_trajectory(build_deployment(cfg, rng(5)), cfg, rng(6), record_events=True)
    b = run_trajectory(build_deployment(cfg, rng(5)), cfg, rng(6), record_events=True)
    assert a.events == b.events and a.n_cycles == 40


def test_no_blockers_is_exact():
    cfg = CFG.replace(n_steps=30, blocker_density_per_m2=0.0)
    dep = build_deployment(cfg, rng(1))
    seen = []
    trace = snr_trace(dep, cfg, rng(2), on_step=lambda n, f: seen.append(len(f.position)))
    assert trace.shape == (31, 9) and set(seen) == {0}
    assert np.all(trace == trace[0])
    stats = run_drx(trace, cfg, 4, rng(3))
    assert stats.p_b == 0.0 and stats.beta_awake == pytest.approx(0.14, abs=1e-12)


def test_event_log_csv(tmp_path):
    out = CycleOutcome(3, 0.0028, 0.0172, Event.SERVED, False, 4)
    path = tmp_path / "ev.csv"
    write_event_log(path, [(0, out)])
    assert path.read_text().splitlines() == ["traj_id,n,event,serving_cell,awake_s", "0,3,served,4,0.0028"]
