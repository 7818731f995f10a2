import json
import time

import pytest
from fastapi.testclient import TestClient

from wallscribe.service import create_app

STROKES = {
    "format": 1,
    "width_px": 200,
    "height_px": 300,
    "scale_m_per_px": 0.001,
    "anchor_m": [-0.1, 0.3],
    "strokes": [
        {
            "points": [
                {"x": 100, "y": 100, "w": 6},
                {"x": 100, "y": 200, "w": 6},
            ]
        }
    ],
}


def wait_stage(client, job_id, stages, timeout=120.0):
    t0 = time.time()
    while time.time() - t0 < timeout:
        state = client.get(f"/api/jobs/{job_id}").json()
        if state["stage"] in stages:
            return state
        if state["stage"] == "failed":
            raise AssertionError(f"job failed: {state['error']}")
        time.sleep(0.1)
    raise AssertionError(f"timeout waiting for {stages}, last: {state}")


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    return tmp_path_factory.mktemp("jobs")


@pytest.fixture(scope="module")
def client(workspace):
    app = create_app(workspace=workspace)
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def done_job(client):
    """One baseline-planned, simulated job shared by the artifact tests."""
    r = client.post("/api/jobs?baseline_planning=true", json=STROKES)
    assert r.status_code == 202
    job_id = r.json()["id"]
    wait_stage(client, job_id, ("planned",))
    r = client.post(f"/api/jobs/{job_id}/simulate", json={"seed": 5})
    assert r.status_code == 202
    wait_stage(client, job_id, ("done",))
    return job_id


def test_create_rejects_malformed_document(client):
    r = client.post("/api/jobs", json={"format": 3})
    assert r.status_code == 422
    assert "format" in r.json()["detail"]


def test_unknown_job_404(client):
    assert client.get("/api/jobs/deadbeef").status_code == 404
    assert client.get("/api/jobs/deadbeef/log").status_code == 404


def test_artifact_not_ready_404(client):
    r = client.post("/api/jobs?baseline_planning=true", json=STROKES)
    job_id = r.json()["id"]
    wait_stage(client, job_id, ("planned",))
    assert client.get(f"/api/jobs/{job_id}/log").status_code == 404
    assert client.get(f"/api/jobs/{job_id}/render.png").status_code == 404


def test_simulate_requires_planned_job(client):
    r = client.post("/api/jobs?baseline_planning=true", json=STROKES)
    job_id = r.json()["id"]
    # immediately: queued or planning -> simulate must 409
    state = client.get(f"/api/jobs/{job_id}").json()
    if state["stage"] not in ("planned", "done"):
        assert client.post(f"/api/jobs/{job_id}/simulate").status_code == 409
    wait_stage(client, job_id, ("planned",))


def test_job_lifecycle_and_artifacts(client, done_job):
    state = client.get(f"/api/jobs/{done_job}").json()
    assert state["stage"] == "done"
    assert set(state["artifacts"]) >= {"trajectory", "log", "render", "metrics"}

    traj = client.get(f"/api/jobs/{done_job}/trajectory")
    assert traj.text.startswith("# wallscribe-trajectory 1")
    log = client.get(f"/api/jobs/{done_job}/log")
    assert log.text.startswith("# wallscribe-simlog 1")
    png = client.get(f"/api/jobs/{done_job}/render.png")
    assert png.content[:8] == b"\x89PNG\r\n\x1a\n"
    metrics = client.get(f"/api/jobs/{done_job}/metrics").json()
    assert metrics["seed"] == 5
    assert 0.0 <= metrics["iou"] <= 1.0


def test_metrics_match_cli_eval(client, done_job, workspace, tmp_path):
    """Service metrics are string-identical to the CLI scoring the same
    artifacts."""
    from click.testing import CliRunner

    from wallscribe.cli import main

    d = workspace / done_job
    strokes_file = tmp_path / "strokes.json"
    strokes_file.write_text(json.dumps(STROKES))
    out = tmp_path / "metrics.json"
    res = CliRunner().invoke(
        main,
        [
            "eval",
            str(d / "log.txt"),
            "--trajectory",
            str(d / "trajectory.txt"),
            "--strokes",
            str(strokes_file),
            "-o",
            str(out),
        ],
    )
    assert res.exit_code == 0, res.output
    assert out.read_text() == (d / "metrics.json").read_text()


def test_stream_delivers_events(client, done_job):
    events = []
    with client.stream("GET", f"/api/jobs/{done_job}/stream") as r:
        assert r.status_code == 200
        done = False
        for line in r.iter_lines():
            if line.startswith("event: done"):
                done = True
                break
            if line.startswith("data: "):
                events.append(json.loads(line[6:]))
            if len(events) > 10000:
                break
        assert done
    assert len(events) >= 10
    for ev in events[:5]:
        assert {"t", "tip", "F_true", "F_hat", "pen_width"} <= set(ev)


def test_list_jobs_and_restart_recovery(client, workspace, done_job):
    listing = client.get("/api/jobs").json()
    assert any(j["id"] == done_job for j in listing)

    # a fresh app over the same workspace re-lists and can re-simulate
    app2 = create_app(workspace=workspace)
    with TestClient(app2) as c2:
        listing2 = c2.get("/api/jobs").json()
        assert any(j["id"] == done_job for j in listing2)
        r = c2.post(f"/api/jobs/{done_job}/simulate", json={"seed": 5})
        assert r.status_code == 202
        wait_stage(c2, done_job, ("done",))
        m2 = c2.get(f"/api/jobs/{done_job}/metrics").json()
        assert m2["seed"] == 5


def test_config_endpoint(client):
    cfg = client.get("/api/config").json()
    assert cfg["planner"]["v_norm_max"] == 0.2
    assert cfg["contact_compensation"] is True
