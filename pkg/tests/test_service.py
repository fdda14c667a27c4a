"""HTTP surface of the experiment service."""

import pytest
from fastapi.testclient import TestClient

from dimcurse.service.app import app
from dimcurse.service.models import RunRequest


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestPlumbing:
    def test_health(self, client):
        reply = client.get("/health")
        assert reply.status_code == 200
        assert reply.json() == {"status": "ok"}

    def test_objectives_listing(self, client):
        entries = client.get("/objectives").json()
        names = [e["name"] for e in entries]
        assert names == ["vee", "ripple", "pyramid_2", "pyramid_3", "cone_2", "cone_3"]
        vee = entries[0]
        assert vee["dimension"] == 1
        assert vee["lipschitz_constant"] == 1.0
        assert vee["known_minimum"] == 0.0


class TestRunEndpoint:
    def test_budget_30_factorizes_5_6(self, client):
        reply = client.post("/run", json={"objective": "cone_2", "budget": 30})
        assert reply.status_code == 200
        data = reply.json()
        epoch = data["epochs"][0]
        assert epoch["budgets"] == [5, 6]
        assert len(epoch["records"]) == 30
        assert data["report"]["total_evaluations"] == 30
        assert data["report"]["average_regret"] >= 0.0
        assert data["report"]["noise_gap"] >= 0.0

    def test_d1_with_dims_check_and_envelope(self, client):
        reply = client.post(
            "/run",
            json={"objective": "vee", "budget": 7, "dims": 1, "include_envelope": True},
        )
        assert reply.status_code == 200
        data = reply.json()
        assert len(data["epochs"][0]["records"]) == 7
        assert data["report"]["noise_gap"] is None
        assert len(data["envelope"]) == 1025

    def test_unknown_horizon_epochs(self, client):
        reply = client.post(
            "/run", json={"objective": "cone_2", "budget": 10, "horizon": "unknown"}
        )
        data = reply.json()
        assert [e["epoch_length"] for e in data["epochs"]] == [1, 2, 4, 3]
        assert [len(e["records"]) for e in data["epochs"]] == [1, 2, 4, 3]
        assert data["report"]["total_evaluations"] == 10

    def test_explicit_budgets_and_noise(self, client):
        reply = client.post(
            "/run",
            json={
                "objective": "cone_2",
                "budgets": [2, 3],
                "noise_bounds": [None, 0.0],
            },
        )
        assert reply.status_code == 200
        assert reply.json()["noise_bounds"] == [None, 0.0]

    def test_unknown_objective_404(self, client):
        reply = client.post("/run", json={"objective": "nope", "budget": 4})
        assert reply.status_code == 404
        assert reply.json()["detail"]["code"] == "unknown-objective"

    def test_decreasing_budgets_400(self, client):
        reply = client.post("/run", json={"objective": "cone_2", "budgets": [4, 2]})
        assert reply.status_code == 400
        assert reply.json()["detail"]["code"] == "invalid-budget"

    def test_dims_mismatch_400(self, client):
        reply = client.post("/run", json={"objective": "cone_2", "budget": 4, "dims": 3})
        assert reply.status_code == 400

    def test_unknown_field_422(self, client):
        reply = client.post(
            "/run", json={"objective": "cone_2", "budget": 4, "bogus": 1}
        )
        assert reply.status_code == 422

    def test_budget_and_budgets_mutually_exclusive(self, client):
        reply = client.post(
            "/run", json={"objective": "cone_2", "budget": 4, "budgets": [2, 2]}
        )
        assert reply.status_code == 422

    def test_determinism(self, client):
        payload = {"objective": "pyramid_2", "budget": 25}
        first = client.post("/run", json=payload).json()
        second = client.post("/run", json=payload).json()
        assert first == second


class TestAuditEndpoint:
    def test_fresh_run_audit(self, client):
        reply = client.post(
            "/audit",
            json={"objective": "cone_2", "budget": 16, "trend_budgets": [4, 16]},
        )
        assert reply.status_code == 200
        data = reply.json()
        assert data["budgets"] == [4, 4]
        assert data["decomposition"]["verdict"] == "holds"
        assert data["decomposition"]["lhs"] <= data["decomposition"]["rhs"] + 1e-9
        names = [c["name"] for c in data["report"]["bound_checks"]]
        assert names == ["strong-robust-average", "weak-robust-average", "cumulative"]
        assert data["robustness"]["horizon"] == 4
        assert data["trend"]["budgets"] == [4, 16]

    def test_d1_audit_has_no_gap_or_decomposition(self, client):
        reply = client.post(
            "/audit", json={"objective": "vee", "budget": 8, "include_trend": False}
        )
        data = reply.json()
        assert data["decomposition"] is None
        assert data["report"]["noise_gap"] is None
        assert data["report"]["bound_checks"]

    def test_audit_of_supplied_records(self, client):
        run_data = client.post(
            "/run", json={"objective": "cone_2", "budgets": [2, 2]}
        ).json()
        records = run_data["epochs"][0]["records"]
        reply = client.post(
            "/audit",
            json={"objective": "cone_2", "records": records, "include_trend": False},
        )
        assert reply.status_code == 200
        data = reply.json()
        assert data["budgets"] == [2, 2]
        # the hand-trace decomposition is an exact equality
        assert data["decomposition"]["margin"] == 0.0

    def test_unknown_horizon_audit_has_extra_check(self, client):
        reply = client.post(
            "/audit",
            json={
                "objective": "cone_2",
                "budget": 10,
                "horizon": "unknown",
                "include_trend": False,
            },
        )
        data = reply.json()
        names = [c["name"] for c in data["report"]["bound_checks"]]
        assert "unknown-horizon-average" in names

    def test_grid_oracle_mode(self, client):
        reply = client.post(
            "/audit",
            json={
                "objective": "cone_2",
                "budgets": [2, 2],
                "conditional_oracle": "grid",
                "include_trend": False,
            },
        )
        data = reply.json()
        assert data["decomposition"]["oracle_error"] > 0.0
        assert data["decomposition"]["margin"] == 0.0  # dyadic cancellation

    def test_missing_budget_422(self, client):
        reply = client.post("/audit", json={"objective": "cone_2"})
        assert reply.status_code == 422


class TestSweepEndpoint:
    def test_rows_sorted_and_bounded(self, client):
        reply = client.post(
            "/sweep", json={"objective": "pyramid_2", "t_values": [16, 4]}
        )
        assert reply.status_code == 200
        rows = reply.json()["rows"]
        assert [r["T"] for r in rows] == [4, 16]
        for row in rows:
            assert row["r"] >= 0.0
            assert row["r_tilde"] == row["r"]
            assert row["R"] == pytest.approx(row["T"] * row["r"], rel=1e-12)
            assert row["bound_strong"] <= row["bound_weak"] + 1e-12

    def test_empty_t_values_rejected(self, client):
        reply = client.post("/sweep", json={"objective": "pyramid_2", "t_values": []})
        assert reply.status_code == 422


class TestConfigRoundTrip:
    def test_run_request_idempotent(self):
        raw = {"objective": "cone_2", "budget": 30, "optimizer": "grid"}
        once = RunRequest.model_validate(raw)
        twice = RunRequest.model_validate(once.model_dump())
        assert once == twice
        assert twice.model_dump() == once.model_dump()

    def test_extra_field_rejected(self):
        with pytest.raises(ValueError):
            RunRequest.model_validate({"objective": "vee", "budget": 4, "seed": 1})
