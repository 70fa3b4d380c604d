"""HTTP facade: routes, validation, and agreement with the CLI path."""

import json

import pytest
from fastapi.testclient import TestClient

import bbprep.cli as cli
from bbprep.service import app, run_sweep


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


SPEC = {"d": 2, "n": 4, "form": "real", "values": [0.75, 0.25]}


class TestPrepare:
    def test_matches_cli_record(self, client, tmp_path, capsys):
        resp = client.post("/prepare", json={"spec": SPEC})
        assert resp.status_code == 200
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(SPEC))
        assert cli.main(["prepare", "--input", str(path)]) == 0
        assert resp.json() == json.loads(capsys.readouterr().out)

    def test_string_values_exact(self, client):
        # strings survive JSON float formatting; same spec, same record
        quoted = dict(SPEC, values=["0.75", "0.25"])
        a = client.post("/prepare", json={"spec": SPEC}).json()
        b = client.post("/prepare", json={"spec": quoted}).json()
        assert a == b

    def test_rounds_and_counting_knobs(self, client):
        resp = client.post("/prepare", json={
            "spec": SPEC, "rounds": 0, "counting": "full"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["rounds"] == 0
        assert body["success_probability"] == 0.3125
        # full accounting doubles the ripple comparator
        assert body["counts"]["toffoli"] == 8

    def test_root_problem_roundtrip(self, client):
        resp = client.post("/prepare", json={
            "problem": "root", "spec": SPEC, "eps": 1e-3})
        assert resp.status_code == 200
        assert resp.json()["fidelity"] >= 1 - 2e-3

    def test_missing_eps_is_bad_request(self, client):
        resp = client.post("/prepare", json={"problem": "root",
                                             "spec": SPEC})
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad-request"

    def test_degenerate_spec_is_422(self, client):
        spec = dict(SPEC, values=[0.0, 0.0])
        resp = client.post("/prepare", json={"spec": spec})
        assert resp.status_code == 422
        assert resp.json()["error"] == "degenerate-spec"

    def test_wrong_form_for_problem_is_422(self, client):
        spec = {"d": 1, "n": 3, "form": "polar", "values": [[0.5, 0.0]]}
        resp = client.post("/prepare", json={"spec": spec})
        assert resp.status_code == 422

    def test_schema_validation(self, client):
        # unknown form never reaches the handlers
        bad = dict(SPEC, form="complex")
        assert client.post("/prepare",
                           json={"spec": bad}).status_code == 422
        # extra fields are forbidden at both levels
        assert client.post("/prepare", json={
            "spec": SPEC, "shots": 100}).status_code == 422
        assert client.post("/prepare", json={
            "spec": dict(SPEC, extra=1)}).status_code == 422
        # eps bounds enforced by the model
        assert client.post("/prepare", json={
            "problem": "root", "spec": SPEC,
            "eps": 1.5}).status_code == 422


class TestSweep:
    def test_matches_handler(self, client):
        resp = client.post("/sweep", json={"seed": 5, "bits": 6})
        assert resp.status_code == 200
        direct = run_sweep("linear", bits=6, seed=5)
        body = resp.json()
        assert body["seed"] == 5 and body["d"] == direct["d"]
        assert body["rows"] == [list(r) for r in direct["rows"]]

    def test_explicit_spec(self, client):
        resp = client.post("/sweep", json={
            "spec": {"d": 2, "n": 3, "form": "real",
                     "values": [0.5, 0.25]},
            "bits": 5})
        assert resp.status_code == 200
        assert [r[1] for r in resp.json()["rows"]] == [0.0, 0.0, 0.0]

    def test_bits_floor_validated(self, client):
        assert client.post("/sweep", json={"bits": 1}).status_code == 422


def test_table_route(client):
    resp = client.get("/table")
    assert resp.status_code == 200
    assert resp.json()["rows"] == [[17, 4872, 286], [23, 7784, 338],
                                   [30, 11264, 375]]
