"""Release gate: the guarantees this package ships with, one test each.

Every test names its tolerance inline.  The terminal summary prints one
pass/fail line per check (wired up in conftest.py).  The whole module runs
against the Python package and HTTP API only; no dashboard build is needed.
"""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from oracles import (
    check_dbscan_labels,
    head_oracle,
    kmeans_exhaustive,
    lstm_forward_oracle,
    moments_oracle,
    ols_oracle,
)
from test_network import as_weight_dict, random_block, zero_block

from quenchwatch.analyzers import dbscan, kmeans, lstm_analyze
from quenchwatch.engine.gradcheck import gradient_check
from quenchwatch.engine.network import forward_sequence, loss_and_gradients
from quenchwatch.engine.activations import hard_sigmoid
from quenchwatch.engine.params import Hyperparameters, LstmState, OutputHead, init_params
from quenchwatch.engine.snapshot import snapshot_to_bytes
from quenchwatch.engine.training import train
from quenchwatch.ingest.seriesio import serialize_series
from quenchwatch.ingest.synthetic import TIER_BYTES, DatasetSpec, generate_synthetic
from quenchwatch.service.app import create_app
from quenchwatch.service.cli import main as cli_main
from quenchwatch.service.jobs import JobManager
from quenchwatch.service.store import DataStore
from quenchwatch.signals import extract_features


def test_gradients_match_central_differences():
    """Every parameter tensor and both initial states stay within 1e-4
    relative error of central finite differences over 20 random instances
    (3 cells, 2 inputs, 4 steps), in under 10 seconds."""
    started = time.monotonic()
    hp = Hyperparameters(cell_count=3, layer_count=1, input_window=2, epochs=0)
    layers, head = init_params(hp, np.random.default_rng(0), output_size=1)
    report = gradient_check(
        layers, head, trial_count=20, delta=1e-5, tolerance=1e-4, seed=0, seq_len=4
    )
    elapsed = time.monotonic() - started
    assert report.trial_count == 20
    assert report.passed, report.summary()
    assert report.worst_error < 1e-4
    expected_tensors = {
        f"layer0.{n}" for n in (
            "W_gx", "W_gh", "b_g", "W_ix", "W_ih", "b_i",
            "W_fx", "W_fh", "b_f", "W_ox", "W_oh", "b_o", "h0", "s0",
        )
    } | {"head.W_y", "head.b_y"}
    assert set(report.per_tensor) == expected_tensors
    assert elapsed < 10.0, f"gradient check took {elapsed:.1f}s"


def test_gate_activation_saturates_bit_exactly():
    """The gate nonlinearity returns exactly 0.0 at and below the lower
    threshold, exactly 1.0 at and above the upper one, and is affine
    (0.2 x + 0.5) at 10 interior points, all as bit-exact equalities."""
    for x in (-2.5, -2.5000001, -3.0, -17.0, -1e6, -1e308):
        assert hard_sigmoid(x) == 0.0
        assert hard_sigmoid(x) - 0.0 == 0.0
    for x in (2.5, 2.5000001, 3.0, 17.0, 1e6, 1e308):
        assert hard_sigmoid(x) == 1.0
        assert hard_sigmoid(x) - 1.0 == 0.0
    xs = np.linspace(-2.4, 2.4, 10)
    assert np.array_equal(hard_sigmoid(xs), 0.2 * xs + 0.5)


def test_internal_state_carousel_is_lossless():
    """With the forget gate saturated open and the input gate saturated
    shut, the internal state is bit-identical across 100 steps, and the
    gradient reaching the initial state has the same magnitude for 10-step
    and 100-step sequences within 1e-9 relative."""
    cells, inputs = 4, 3
    block = zero_block(cells, inputs, b_f=3.0, b_i=-3.0)
    rng = np.random.default_rng(7)
    s0 = rng.uniform(-0.8, 0.8, cells)
    h0 = rng.uniform(-0.5, 0.5, cells)
    head = OutputHead(W_y=rng.uniform(-0.7, 0.7, (1, cells)), b_y=np.zeros(1))

    xs = rng.uniform(-1.0, 1.0, (100, inputs))
    _, trace = forward_sequence(xs, [block], head, initial=[LstmState(h=h0, s=s0)])
    states = trace.S[0]
    assert states.shape == (100, cells)
    for t in range(100):
        assert np.array_equal(states[t], s0), f"state drifted at step {t}"

    def initial_state_gradient(steps: int) -> np.ndarray:
        seq = rng_fixed[:steps]
        targets = np.full((steps, 1), 0.7)
        grads, _ = loss_and_gradients(
            seq, targets, [block], head, initial=[LstmState(h=h0, s=s0)]
        )
        return grads.ds0[0]

    rng_fixed = np.random.default_rng(8).uniform(-1.0, 1.0, (100, inputs))
    short = initial_state_gradient(10)
    long = initial_state_gradient(100)
    assert np.all(np.abs(short) > 0)
    np.testing.assert_allclose(np.abs(long), np.abs(short), rtol=1e-9)


def test_forward_pass_matches_naive_recurrence():
    """The production forward pass agrees with a step-by-step transcription
    of the recurrence to 1e-12 relative on 1000 random instances."""
    rng = np.random.default_rng(42)
    for trial in range(1000):
        cells = int(rng.integers(1, 6))
        inputs = int(rng.integers(1, 5))
        steps = int(rng.integers(1, 9))
        block = random_block(rng, cells, inputs)
        head = OutputHead(
            W_y=rng.uniform(-0.7, 0.7, (2, cells)), b_y=rng.uniform(-0.7, 0.7, 2)
        )
        h0 = rng.uniform(-0.6, 0.6, cells)
        s0 = rng.uniform(-0.6, 0.6, cells)
        xs = rng.uniform(-1.0, 1.0, (steps, inputs))

        predictions, trace = forward_sequence(
            xs, [block], head, initial=[LstmState(h=h0, s=s0)]
        )
        want = lstm_forward_oracle(xs.tolist(), as_weight_dict(block), h0, s0)
        want_h, want_s = np.array(want[0]), np.array(want[1])
        want_p = np.array(head_oracle(want[0], head.W_y.tolist(), head.b_y.tolist()))

        np.testing.assert_allclose(trace.H[0], want_h, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(trace.S[0], want_s, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(predictions, want_p, rtol=1e-12, atol=1e-14)


def test_learns_sine_and_separates_quench_windows(tmp_path):
    """A 16-cell single-input model cuts next-step sine loss to under a
    tenth of its starting value within 200 epochs and 60 seconds; a model
    trained on quiet windows of a generated dataset then shows a peak
    residual on every held-out quench window above the median residual of
    the quiet windows."""
    started = time.monotonic()
    sequences = []
    for phase in np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False):
        values = np.sin(0.25 * np.arange(51) + phase)
        sequences.append((values[:-1, None], values[1:, None]))
    hp = Hyperparameters(
        cell_count=16, layer_count=1, input_window=1,
        learning_rate=0.2, epochs=200, batch_size=4, seed=0,
    )
    _, trace = train(sequences, hp)
    losses = trace.epoch_losses
    assert len(losses) == 200
    assert losses[-1] < 0.1 * losses[0], f"first {losses[0]:.4g}, final {losses[-1]:.4g}"
    assert time.monotonic() - started < 60.0

    store = DataStore(tmp_path)
    summary, _ = store.create_synthetic_dataset({
        "kind": "synthetic", "tier": "small", "seed": 3,
        "scale": 1e-3, "series_count": 2, "quench_rate": 1.0,
    })
    jobs = JobManager(store, start_worker=False)
    record, _ = jobs.submit_training(summary["dataset_id"], {
        "cell_count": 8, "input_window": 8, "learning_rate": 0.1,
        "epochs": 10, "batch_size": 4, "seed": 1,
    })
    jobs.run_pending_inline()
    done = jobs.get_job(record["job_id"])
    assert done["status"] == "done", done["error"]

    model = store.load_model(done["model_id"])
    stats = store.model_stats(done["model_id"])
    quench = store.dataset_windows(summary["dataset_id"], kind="quench")
    normal = store.dataset_windows(summary["dataset_id"], kind="normal")
    assert len(quench) == 2
    quench_reports = lstm_analyze(quench, model, threshold=0.0, stats=stats)
    normal_reports = lstm_analyze(normal, model, threshold=0.0, stats=stats)
    median_quiet = float(np.median(np.concatenate(
        [r.residual_series for r in normal_reports]
    )))
    for report in quench_reports:
        assert report.peak_residual > median_quiet, (
            f"{report.window_id}: peak {report.peak_residual:.4g} "
            f"vs quiet median {median_quiet:.4g}"
        )


def test_signal_features_match_bruteforce_oracle():
    """All seven per-signal statistics agree with direct-summation moment
    and least-squares oracles within 1e-9 relative on 1000 random series,
    and obey shift invariance and positive-scale equivariance."""
    rng = np.random.default_rng(99)
    for trial in range(1000):
        n = int(rng.integers(3, 120))
        values = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 4.0), n)
        got = extract_features(values)
        want = moments_oracle(values.tolist())
        slope, stderr = ols_oracle(values.tolist())
        assert got.mean == pytest.approx(want["mean"], rel=1e-9)
        assert got.min == want["min"] and got.max == want["max"]
        assert got.skewness == pytest.approx(want["skewness"], rel=1e-9, abs=1e-12)
        assert got.kurtosis == pytest.approx(want["kurtosis"], rel=1e-9, abs=1e-12)
        assert got.slope == pytest.approx(slope, rel=1e-9, abs=1e-12)
        assert got.stderr == pytest.approx(stderr, rel=1e-9, abs=1e-12)

    for trial in range(50):
        values = rng.normal(0.0, 1.0, int(rng.integers(8, 80)))
        base = extract_features(values)

        shifted = extract_features(values + 1.0)
        assert shifted.skewness == pytest.approx(base.skewness, rel=1e-6, abs=1e-9)
        assert shifted.kurtosis == pytest.approx(base.kurtosis, rel=1e-6, abs=1e-9)
        assert shifted.slope == pytest.approx(base.slope, rel=1e-6, abs=1e-9)
        assert shifted.stderr == pytest.approx(base.stderr, rel=1e-6, abs=1e-9)
        assert shifted.mean == pytest.approx(base.mean + 1.0, rel=1e-9, abs=1e-12)

        # Doubling is exact in binary floating point, so the shape
        # statistics must survive bit-for-bit and the rest double.
        doubled = extract_features(values * 2.0)
        assert doubled.skewness == base.skewness
        assert doubled.kurtosis == base.kurtosis
        assert doubled.mean == 2.0 * base.mean
        assert doubled.min == 2.0 * base.min
        assert doubled.max == 2.0 * base.max
        assert doubled.slope == pytest.approx(2.0 * base.slope, rel=1e-12)
        assert doubled.stderr == pytest.approx(2.0 * base.stderr, rel=1e-12)


def test_clustering_matches_exhaustive_oracles():
    """Best-of-10 k-means reaches the exhaustive-partition optimum on every
    random set of up to 8 points (k=2); density clustering produces labels
    with zero reachability violations on 100 random configurations of up
    to 20 points."""
    rng = np.random.default_rng(123)
    for trial in range(40):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        points = rng.uniform(-10, 10, (n, d))
        result = kmeans(points, k=2, seed=trial, restarts=10)
        inertia = result.metadata["inertia"]
        optimum, _ = kmeans_exhaustive(points.tolist(), 2)
        assert inertia <= optimum + 1e-9 * max(1.0, optimum), (
            f"trial {trial}: inertia {inertia} vs optimum {optimum}"
        )
        assert inertia >= optimum - 1e-9 * max(1.0, optimum)

    for trial in range(100):
        n = int(rng.integers(2, 21))
        d = int(rng.integers(1, 3))
        points = rng.uniform(-5, 5, (n, d))
        eps = float(rng.uniform(0.3, 3.0))
        min_pts = int(rng.integers(1, 6))
        labels = dbscan(points, eps=eps, min_pts=min_pts).assignments
        violations = check_dbscan_labels(points.tolist(), eps, min_pts, labels)
        assert violations == [], f"trial {trial}: {violations}"


def test_tier_byte_ratios_hold_at_reduced_scale():
    """At 1:1000 scale the serialized tier sizes keep the published
    22 : 111 : 5000 megabyte proportions within ten percent."""
    scale = 1e-3
    sizes = {}
    for tier in ("small", "medium", "large"):
        spec = DatasetSpec.for_tier(tier, scale=scale)
        series_list, _ = generate_synthetic(spec, seed=0)
        sizes[tier] = sum(len(serialize_series(s)) for s in series_list)
        target = TIER_BYTES[tier] * scale
        assert abs(sizes[tier] - target) / target < 0.10, (
            f"{tier}: {sizes[tier]} bytes vs target {target:.0f}"
        )
    assert abs(sizes["medium"] / sizes["small"] - 111 / 22) / (111 / 22) < 0.10
    assert abs(sizes["large"] / sizes["small"] - 5000 / 22) / (5000 / 22) < 0.10
    assert abs(sizes["large"] / sizes["medium"] - 5000 / 111) / (5000 / 111) < 0.10


def test_determinism_across_cli_api_and_restart(tmp_path):
    """The same dataset request, seed, and hyperparameters produce
    bit-identical model snapshots and loss traces whether driven through
    the HTTP API or the command line, and the result survives a service
    restart unchanged."""
    dataset_request = {
        "kind": "synthetic", "tier": "small", "seed": 11,
        "scale": 1e-3, "series_count": 2, "quench_rate": 1.0,
    }
    hp = {
        "cell_count": 4, "input_window": 8, "learning_rate": 0.1,
        "epochs": 6, "batch_size": 4, "seed": 2,
    }
    api_dir = tmp_path / "api-run"
    cli_dir = tmp_path / "cli-run"

    with TestClient(create_app(api_dir, start_worker=True)) as client:
        dataset = client.post("/v1/datasets", json=dataset_request).json()
        job = client.post(
            "/v1/jobs",
            json={"dataset_id": dataset["dataset_id"], "hyperparameters": hp},
        ).json()
        deadline = time.monotonic() + 120
        while time.monotonic() < deadline:
            done = client.get(f"/v1/jobs/{job['job_id']}").json()
            if done["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert done["status"] == "done", done.get("error")
    api_trace = done["trace"]
    api_snapshot = snapshot_to_bytes(DataStore(api_dir).load_model(done["model_id"]))

    runner = CliRunner()
    gen = runner.invoke(cli_main, [
        "gen", "--tier", "small", "--seed", "11", "--scale", "1e-3",
        "--series-count", "2", "--quench-rate", "1.0", "--data-dir", str(cli_dir),
    ], env={"QUENCHWATCH_DATA_DIR": str(cli_dir)})
    assert gen.exit_code == 0, gen.output
    assert json.loads(gen.output)["dataset_id"] == dataset["dataset_id"]

    hp_file = tmp_path / "hp.json"
    hp_file.write_text(json.dumps(hp))
    trained = runner.invoke(cli_main, [
        "train", "--dataset", dataset["dataset_id"], "--hp-file", str(hp_file),
        "--data-dir", str(cli_dir),
    ], env={"QUENCHWATCH_DATA_DIR": str(cli_dir)})
    assert trained.exit_code == 0, trained.output
    cli_result = json.loads(trained.output)

    cli_store = DataStore(cli_dir)
    cli_trace = JobManager(cli_store, start_worker=False).get_job(
        cli_result["job_id"]
    )["trace"]
    cli_snapshot = snapshot_to_bytes(cli_store.load_model(cli_result["model_id"]))

    assert cli_result["model_id"] == done["model_id"]
    assert cli_snapshot == api_snapshot
    assert cli_trace == api_trace

    with TestClient(create_app(api_dir, start_worker=True)) as client:
        after = client.get(f"/v1/jobs/{job['job_id']}").json()
        assert after["status"] == "done"
        assert after["model_id"] == done["model_id"]
        assert after["trace"] == api_trace
    assert snapshot_to_bytes(
        DataStore(api_dir).load_model(done["model_id"])
    ) == api_snapshot


def test_api_complete_without_dashboard(tmp_path, monkeypatch):
    """Everything above plus the HTTP surface works from a directory with
    no frontend build anywhere near it."""
    monkeypatch.chdir(tmp_path)
    assert not (tmp_path / "frontend").exists()
    with TestClient(create_app(tmp_path / "data", start_worker=False)) as client:
        meta = client.get("/v1/meta")
        assert meta.status_code == 200
        assert meta.json()["kernel"] in ("compiled", "python")
        dataset = client.post("/v1/datasets", json={
            "kind": "synthetic", "tier": "small", "seed": 0,
            "scale": 1e-3, "series_count": 2, "quench_rate": 1.0,
        })
        assert dataset.status_code == 201
        ds = dataset.json()["dataset_id"]
        windows = client.get(f"/v1/datasets/{ds}/windows")
        assert windows.status_code == 200
        assert len(windows.json()) > 0
        series = client.get(f"/v1/series/{ds}:Q600A.000", params={"decimate": 5})
        assert series.status_code == 200
