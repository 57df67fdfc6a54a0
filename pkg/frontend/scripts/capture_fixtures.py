"""Record real API responses into tests/fixtures/ for the dashboard contract tests.

Runs the service in-process over a throwaway data directory, drives the same
endpoints the dashboard uses, and writes the verbatim JSON bodies to disk.
Rerunning regenerates the fixtures deterministically (fixed seeds throughout).
"""

from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from quenchwatch.service.app import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

DATASET_REQUEST = {
    "kind": "synthetic",
    "tier": "small",
    "seed": 0,
    "scale": 1e-3,
    "series_count": 2,
    "quench_rate": 1.0,
}

SUBMITTED_HP = {
    "cell_count": 8,
    "layer_count": 1,
    "input_window": 8,
    "learning_rate": 0.1,
    "epochs": 6,
    "batch_size": 4,
    "seed": 1,
}

DIVERGENT_HP = {
    "cell_count": 4,
    "input_window": 8,
    "learning_rate": 1e9,
    "epochs": 60,
    "batch_size": 4,
    "seed": 1,
}


def save(name: str, payload) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


def wait_for_job(client: TestClient, job_id: str, timeout_s: float = 120.0) -> dict:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        record = client.get(f"/v1/jobs/{job_id}").json()
        if record["status"] in ("done", "failed"):
            return record
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish within {timeout_s}s")


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as data_dir:
        app = create_app(data_dir, start_worker=True)
        with TestClient(app) as client:
            save("meta.json", client.get("/v1/meta").json())

            created = client.post("/v1/datasets", json=DATASET_REQUEST)
            assert created.status_code == 201, created.text
            dataset = created.json()
            save("dataset_create.json", dataset)
            dataset_id = dataset["dataset_id"]

            windows_all = client.get(f"/v1/datasets/{dataset_id}/windows").json()
            save("windows_all.json", windows_all)
            windows_quench = client.get(
                f"/v1/datasets/{dataset_id}/windows", params={"kind": "quench"}
            ).json()
            save("windows_quench.json", windows_quench)

            # Plot fixtures come from a series that contains a quench spike,
            # so decimation tests can check the extreme point survives.
            magnet_id = windows_quench[0]["magnet_id"]
            series_id = f"{dataset_id}:{magnet_id}"
            full = client.get(f"/v1/series/{series_id}").json()
            save("series_full.json", full)
            for every in (2, 10, 50):
                decimated = client.get(
                    f"/v1/series/{series_id}", params={"decimate": every}
                ).json()
                save(f"series_decim{every}.json", decimated)

            save("submitted_hp.json", SUBMITTED_HP)
            accepted = client.post(
                "/v1/jobs",
                json={"dataset_id": dataset_id, "hyperparameters": SUBMITTED_HP},
            )
            assert accepted.status_code == 202, accepted.text
            done = wait_for_job(client, accepted.json()["job_id"])
            assert done["status"] == "done", done
            save("job_done.json", done)

            failed_accepted = client.post(
                "/v1/jobs",
                json={"dataset_id": dataset_id, "hyperparameters": DIVERGENT_HP},
            )
            assert failed_accepted.status_code == 202, failed_accepted.text
            failed = wait_for_job(client, failed_accepted.json()["job_id"])
            assert failed["status"] == "failed", failed
            save("job_failed.json", failed)

            # Threshold sweep for the flagged-count monotonicity contract.
            default = done["default_threshold"]
            sweep = []
            for factor in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0):
                threshold = default * factor
                response = client.post(
                    f"/v1/models/{done['model_id']}/analyze",
                    json={
                        "dataset_id": dataset_id,
                        "selection": {"kind": "all"},
                        "threshold": threshold,
                    },
                )
                assert response.status_code == 200, response.text
                sweep.append({"threshold": threshold, "response": response.json()})
            save("threshold_sweep.json", sweep)
    return 0


if __name__ == "__main__":
    sys.exit(main())
