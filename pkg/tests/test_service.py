"""HTTP service: endpoints mirror the CLI and validate identically."""

import pytest
from fastapi.testclient import TestClient

from veriphoton import hamiltonian as hml
from veriphoton import qubit_protocol as qp
from veriphoton.service import create_app

SINGLET_WITNESS = [[0.0, 0.0], [2**-0.5, 0.0], [-(2**-0.5), 0.0], [0.0, 0.0]]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def run_body(**overrides):
    body = {
        "protocol": "p1",
        "instance": {
            "n": 2,
            "terms": [{"i": 0, "j": 1, "p": 1.0, "c": 1}],
            "a": 0.0,
            "b": 0.1,
            "f": 10.0,
            "witness": SINGLET_WITNESS,
        },
        "trials": 300,
        "seed": 5,
    }
    body.update(overrides)
    return body


class TestHealth:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"


class TestRunEndpoint:
    def test_honest_run(self, client):
        resp = client.post("/run", json=run_body())
        assert resp.status_code == 200
        body = resp.json()
        assert body["accepts"] == body["trials"] == 300
        assert body["bound_check"] == "pass"

    def test_matches_the_library_estimate(self, client):
        body = run_body(adversary={"variant": "RandomOutcomes"}, trials=400, seed=11)
        resp = client.post("/run", json=body).json()
        inst = hml.instance_from_dict(run_body()["instance"])
        mc = qp.monte_carlo_pacc(inst, qp.random_outcome_povm(2), 400, 11)
        assert resp["accepts"] == mc.accepts
        assert resp["estimate"] == pytest.approx(mc.estimate, abs=1e-12)

    def test_rejects_unknown_keys(self, client):
        assert client.post("/run", json=run_body(nonsense=1)).status_code == 422

    def test_rejects_invalid_alpha(self, client):
        body = run_body(protocol="p2", trials=1000, m=75, alpha=1.5)
        assert client.post("/run", json=body).status_code == 422

    def test_rejects_weight_sum_violation(self, client):
        body = run_body()
        body["instance"]["terms"][0]["p"] = 0.5
        assert client.post("/run", json=body).status_code == 422

    def test_p2_with_recommended_defaults(self, client):
        body = run_body(protocol="p2", trials=1000, seed=3)
        resp = client.post("/run", json=body)
        assert resp.status_code == 200
        assert resp.json()["estimate"] > 0.95


class TestTables:
    def test_bounds(self, client):
        body = client.get("/bounds", params={"n": 2, "f": 10}).json()
        assert body["m"] == 75
        assert body["gap_lower_bound"] == pytest.approx(0.025)

    def test_bounds_validation(self, client):
        assert client.get("/bounds", params={"n": 1, "f": 10}).status_code == 422

    def test_phaserand(self, client):
        body = client.get("/phaserand", params={"m": 75, "n": 2, "f": 10}).json()
        assert body["R"] == 16
        assert body["shift_bound"] <= 1 / 80


class TestSelftestEndpoint:
    def test_named_subset(self, client):
        resp = client.post("/selftest", json=["phaserand.floor-below-series"])
        assert resp.status_code == 200
        body = resp.json()
        assert body["passed"] is True
        assert [c["name"] for c in body["checks"]] == ["phaserand.floor-below-series"]

    def test_unknown_name(self, client):
        assert client.post("/selftest", json=["nope"]).status_code == 422
