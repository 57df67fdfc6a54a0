"""Command line entry points.

``QUENCHWATCH_DATA_DIR`` overrides ``--data-dir`` when set, so deployments
can pin the store location regardless of how the command is invoked.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

DEFAULT_DATA_DIR = "./quenchwatch-data"


def _data_dir(flag_value: str) -> Path:
    return Path(os.environ.get("QUENCHWATCH_DATA_DIR") or flag_value)


@click.group()
def main() -> None:
    """Quench monitoring toolkit."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True, type=int)
@click.option("--data-dir", default=DEFAULT_DATA_DIR, show_default=True)
@click.option("--frontend-dir", default=None, help="Directory with the built dashboard (auto-detected).")
def serve(host: str, port: int, data_dir: str, frontend_dir: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from quenchwatch.service.app import create_app

    app = create_app(_data_dir(data_dir), frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--tier", type=click.Choice(["small", "medium", "large"]), required=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--scale", default=1e-3, show_default=True, type=float,
              help="Fraction of the published tier size to generate.")
@click.option("--series-count", default=None, type=int, help="Override the tier's series count.")
@click.option("--quench-rate", default=1.0, show_default=True, type=float,
              help="Expected events per series.")
@click.option("--out", default=None, help="Write CSVs here instead of registering a dataset.")
@click.option("--data-dir", default=DEFAULT_DATA_DIR, show_default=True)
def gen(tier: str, seed: int, scale: float, series_count: int | None,
        quench_rate: float, out: str | None, data_dir: str) -> None:
    """Generate a synthetic dataset (registered in the store, or plain CSVs)."""
    from quenchwatch.ingest.seriesio import save_events, save_series
    from quenchwatch.ingest.synthetic import DatasetSpec, SpecInfeasible, generate_synthetic
    from quenchwatch.service.store import DataStore, MalformedRequest

    try:
        if out is not None:
            spec = DatasetSpec.for_tier(tier, scale=scale, series_count=series_count,
                                        quench_rate=quench_rate)
            series_list, events = generate_synthetic(spec, seed)
            out_dir = Path(out)
            out_dir.mkdir(parents=True, exist_ok=True)
            byte_total = 0
            for series in series_list:
                byte_total += save_series(series, out_dir / f"{series.magnet_id}.csv")
            save_events(events, out_dir / "events.csv")
            summary = {
                "tier": tier,
                "seed": seed,
                "series_count": len(series_list),
                "event_count": len(events),
                "byte_total": byte_total,
                "out": str(out_dir),
            }
        else:
            store = DataStore(_data_dir(data_dir))
            request = {"kind": "synthetic", "tier": tier, "seed": seed, "scale": scale,
                       "series_count": series_count, "quench_rate": quench_rate}
            summary, created = store.create_synthetic_dataset(request)
            summary["created"] = created
    except (SpecInfeasible, MalformedRequest, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(summary, indent=2))


@main.command()
@click.option("--dataset", "dataset_id", required=True, help="Dataset id in the store.")
@click.option("--hp-file", required=True, type=click.Path(exists=True),
              help="JSON file with hyperparameters.")
@click.option("--window-kind", default="normal", show_default=True,
              type=click.Choice(["normal", "quench", "all"]))
@click.option("--data-dir", default=DEFAULT_DATA_DIR, show_default=True)
def train(dataset_id: str, hp_file: str, window_kind: str, data_dir: str) -> None:
    """Train a model on a stored dataset and register the result."""
    from quenchwatch.service.jobs import JobManager
    from quenchwatch.service.store import DataStore, MalformedRequest, NotFound

    try:
        hp_raw = json.loads(Path(hp_file).read_text())
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{hp_file} is not valid JSON: {exc}") from exc

    store = DataStore(_data_dir(data_dir))
    manager = JobManager(store, start_worker=False)
    try:
        record, _created = manager.submit_training(dataset_id, hp_raw, window_kind=window_kind)
    except (MalformedRequest, NotFound) as exc:
        raise click.ClickException(str(exc)) from exc
    manager.run_pending_inline()
    final = manager.get_job(record["job_id"])
    click.echo(json.dumps({
        "job_id": final["job_id"],
        "status": final["status"],
        "epochs": len(final["trace"]),
        "first_loss": final["trace"][0] if final["trace"] else None,
        "final_loss": final["trace"][-1] if final["trace"] else None,
        "model_id": final.get("model_id"),
        "default_threshold": final.get("default_threshold"),
        "error": final.get("error"),
    }, indent=2))
    if final["status"] != "done":
        sys.exit(1)


@main.command()
@click.option("--cells", default=3, show_default=True, type=int)
@click.option("--inputs", default=2, show_default=True, type=int)
@click.option("--layers", default=1, show_default=True, type=int)
@click.option("--trials", default=20, show_default=True, type=int)
@click.option("--seq-len", default=4, show_default=True, type=int)
@click.option("--delta", default=1e-5, show_default=True, type=float)
@click.option("--tolerance", default=1e-4, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
def gradcheck(cells: int, inputs: int, layers: int, trials: int, seq_len: int,
              delta: float, tolerance: float, seed: int) -> None:
    """Compare analytic gradients against central differences."""
    from quenchwatch.engine.gradcheck import gradient_check
    from quenchwatch.engine.params import Hyperparameters, init_params

    hp = Hyperparameters(cell_count=cells, layer_count=layers, input_window=inputs, epochs=0)
    shapes, head = init_params(hp, np.random.default_rng(0), output_size=1)
    report = gradient_check(shapes, head, trial_count=trials, delta=delta,
                            tolerance=tolerance, seed=seed, seq_len=seq_len)
    click.echo(report.summary())
    for name, err in report.per_tensor.items():
        click.echo(f"  {name:16s} {err:.3e}")
    if not report.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
