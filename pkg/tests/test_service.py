import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from islesched.service.app import app
from tests.conftest import minimal_config, single_unit_config


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["backend"] == "scipy-highs"


class TestValidateEndpoint:
    def test_valid_config(self, client):
        resp = client.post("/fleet/validate", json={"config": minimal_config()})
        assert resp.status_code == 200
        assert resp.json() == {"valid": True, "violations": []}

    def test_invalid_config_lists_violations(self, client):
        cfg = minimal_config()
        cfg["psi_req"] = 1.0
        resp = client.post("/fleet/validate", json={"config": cfg})
        assert resp.status_code == 200
        body = resp.json()
        assert body["valid"] is False
        assert any("psi_req" in v for v in body["violations"])


class TestSolveEndpoint:
    def test_solve_minimal(self, client):
        resp = client.post(
            "/solve",
            json={"config": minimal_config(), "samples": 1000, "seed": 1},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["mode"] == "networked"
        assert len(body["schedules"]) == 1
        assert body["total_cost"] == pytest.approx(0.85, abs=1e-6)
        assert len(body["validations"]) == 1

    def test_solve_skips_validation_on_request(self, client):
        resp = client.post(
            "/solve", json={"config": minimal_config(), "validate_psi": False}
        )
        assert resp.json()["validations"] == []

    def test_mode_override_independent(self, client):
        cfg = single_unit_config()
        resp = client.post(
            "/solve", json={"config": cfg, "mode": "independent", "validate_psi": False}
        )
        body = resp.json()
        assert body["mode"] == "independent"
        assert body["schedules"][0]["mode"] == "independent"

    def test_bad_config_is_400(self, client):
        cfg = minimal_config()
        cfg["tau"] = -1.0
        resp = client.post("/solve", json={"config": cfg})
        assert resp.status_code == 400
        assert "tau" in resp.json()["detail"]

    def test_infeasible_reported_in_body(self, client):
        cfg = single_unit_config(
            demand=5.0, psi_req=0.95, sigma=100.0, import_max=0.0, export_max=0.0
        )
        resp = client.post("/solve", json={"config": cfg, "validate_psi": False})
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "infeasible"
        assert "unreachable" in body["detail"]

    def test_malformed_request_is_422(self, client):
        resp = client.post("/solve", json={"config": minimal_config(), "gap": -1.0})
        assert resp.status_code == 422


class TestSweepEndpoints:
    def test_sweep_psi_small(self, client):
        cfg = single_unit_config(sigma=1.0, reserve_cost=0.01, import_max=0.0,
                                 export_max=0.0, demand=5.0)
        resp = client.post(
            "/sweep/psi",
            json={"config": cfg, "grid": [0.5, 0.9], "samples": 2000, "seed": 3},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["axis_name"] == "psi_req"
        assert [p["axis"] for p in body["points"]] == [0.5, 0.9]
        assert all(p["status"] == "ok" for p in body["points"])
        costs = [p["networked_cost"] for p in body["points"]]
        assert costs[0] <= costs[1] + 1e-6

    def test_sweep_grid_must_increase(self, client):
        resp = client.post(
            "/sweep/psi", json={"config": minimal_config(), "grid": [0.9, 0.5]}
        )
        assert resp.status_code == 400

    def test_sweep_corr_rejects_out_of_range(self, client):
        resp = client.post(
            "/sweep/corr", json={"config": minimal_config(), "grid": [0.0, 1.5]}
        )
        assert resp.status_code == 400

    def test_sweep_psi_rejects_above_cap(self, client):
        resp = client.post(
            "/sweep/psi", json={"config": minimal_config(), "grid": [0.5, 0.99999]}
        )
        assert resp.status_code == 400


class TestExportEndpoint:
    def test_export_has_markers_and_map(self, client):
        resp = client.post("/export/mps", json={"config": single_unit_config(sigma=1.0, psi_req=0.9)})
        assert resp.status_code == 200
        body = resp.json()
        assert "'INTORG'" in body["mps"] and "'INTEND'" in body["mps"]
        assert body["n_variables"] > 0
        assert len(body["name_map"]["variables"]) == body["n_variables"]

    def test_export_empty_fleet_is_400(self, client):
        cfg = minimal_config()
        cfg["microgrids"] = []
        resp = client.post("/export/mps", json={"config": cfg})
        assert resp.status_code == 400

    def test_export_independent_multi_mg_is_400(self, client, three_mg_fleet):
        import json as _json

        cfg = _json.loads(three_mg_fleet.model_dump_json())
        resp = client.post("/export/mps", json={"config": cfg, "mode": "independent"})
        assert resp.status_code == 400
