"""
Tests for the HTTP surface.
"""

import pytest
from fastapi.testclient import TestClient

from cosetkit.errors import ErrorResponse
from cosetkit.server import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


def test_root(client):
    """Test the health check lists the commands."""
    response = client.get("/")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert set(body["commands"]) == {"encode", "energy", "simulate", "capacity", "tables"}


def test_list_commands(client):
    """Test command listing includes request schemas."""
    commands = {c["name"]: c for c in client.get("/commands").json()["commands"]}
    assert commands["tables"]["summary"] == "Print the Gray labeling of 2^m-PAM."
    assert "m" in commands["tables"]["request"]["properties"]


def test_tables(client):
    """Test running a command."""
    response = client.post("/command/tables", json={"m": 2})
    assert response.status_code == 200
    rows = response.json()["result"]["rows"]
    assert [r["amplitude"] for r in rows] == [-3, -1, 1, 3]
    assert [r["label"] for r in rows] == ["00", "01", "11", "10"]


def test_energy(client):
    """Test the energy command over HTTP."""
    response = client.post("/command/energy", json={"preset": "example3"})
    assert response.status_code == 200
    assert response.json()["result"]["per_signal_energy"] == 3.0


def test_empty_body_uses_defaults(client):
    """Test a command with no body runs with default arguments."""
    response = client.post("/command/tables")
    assert response.status_code == 200
    assert response.json()["result"]["m"] == 3


def test_unknown_command(client):
    """Test unknown commands return 404."""
    response = client.post("/command/nope", json={})
    assert response.status_code == 404
    assert response.json()["code"] == "COMMAND_NOT_FOUND"


def test_domain_error(client):
    """Test library errors return 400 with their code."""
    response = client.post("/command/encode", json={"message": "012"})
    assert response.status_code == 400
    assert response.json()["code"] == "FORMAT_ERROR"


def test_validation_error(client):
    """Test request validation failures return 400."""
    response = client.post("/command/tables", json={"m": 0})
    assert response.status_code == 400
    assert response.json()["code"] == "VALIDATION_ERROR"


def test_invalid_json(client):
    """Test a body that is not JSON."""
    response = client.post(
        "/command/tables", content=b"{nope", headers={"content-type": "application/json"}
    )
    assert response.status_code == 400
    assert response.json()["code"] == "VALIDATION_ERROR"


def test_commands_list_models(client):
    """Test /commands carries the schemas of request, response and nested models."""
    body = client.get("/commands").json()
    commands = {c["name"]: c for c in body["commands"]}
    assert commands["energy"]["response"] == "EnergyReport"
    assert commands["tables"]["response"] == "GrayTableResponse"
    models = body["models"]
    assert {"EnergyReport", "GrayTableResponse", "GrayRow", "CapacityPoint", "TrialResult"} <= set(models)
    assert "per_signal_energy" in models["EnergyReport"]["properties"]


def test_error_body_shape(client):
    """Test error bodies follow the error response model."""
    body = client.post("/command/nope", json={}).json()
    error = ErrorResponse.model_validate(body)
    assert error.code == "COMMAND_NOT_FOUND"
    assert error.details == {"command": "nope"}
