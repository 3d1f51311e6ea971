import pytest
from fastapi.testclient import TestClient

from agentmine.service.app import create_app

SEQ2 = "place s init\nplace p\nplace f final\ntrans a label=a\ntrans b label=b\narc s a\narc a p\narc p b\narc b f\n"
NOT_GWF = "place s init\nplace p\nplace f final\nplace q\ntrans a label=a\ntrans b label=b\ntrans tq\narc s a\narc a p\narc p b\narc b f\narc q tq\narc tq q\n"
CHAIN_SRC = open("tests/data/chain_src.pnet").read()
CHAIN_DST = open("tests/data/chain_dst.pnet").read()
CHAIN_MAP = open("tests/data/chain.amap").read()


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_check_gwf_ok(client):
    resp = client.post("/check/gwf", json={"net": SEQ2})
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] and body["m0"] == ["s"] and body["mf"] == ["f"]


def test_check_gwf_violation(client):
    body = client.post("/check/gwf", json={"net": NOT_GWF}).json()
    assert not body["ok"]
    assert body["clause"] == 3
    assert body["node"] == "q"


def test_check_gwf_parse_error_is_400(client):
    resp = client.post("/check/gwf", json={"net": "wobble\n"})
    assert resp.status_code == 400
    assert "wobble" in resp.json()["detail"]


def test_soundness_endpoint(client):
    body = client.post("/check/soundness", json={"net": SEQ2}).json()
    assert body["ok"] and body["violated"] == "none"
    assert "sound: yes" in body["report"]


def test_morphism_endpoint(client):
    body = client.post(
        "/check/morphism",
        json={"source_net": CHAIN_SRC, "target_net": CHAIN_DST, "map_text": CHAIN_MAP},
    ).json()
    assert body["ok"]
    conditions = {c["condition"]: c["passed"] for c in body["conditions"]}
    assert conditions["subnet-cover"] is True
    assert len(conditions) == 9


def test_compose_and_refine_endpoints(client):
    files = {n: open(f"tests/data/{n}").read() for n in (
        "run2_a1.pnet", "run2_a2.pnet", "run2.chan")}
    composed = client.post(
        "/compose",
        json={"net1": files["run2_a1.pnet"], "net2": files["run2_a2.pnet"], "chan": files["run2.chan"]},
    ).json()
    assert composed["ok"]
    assert "channel ch.x" in composed["net"]

    refine_map = (
        "alpha refined.pnet run2_a1.pnet\n"
        "map s1 s1\nmap a a\nmap q1 p1\nmap u p1\nmap q2 p1\nmap b b\nmap f1 f1\n"
    )
    refined_src = (
        "place s1 init\nplace q1\nplace q2\nplace f1 final\n"
        "trans a label=a\ntrans u\ntrans b label=b\n"
        "arc s1 a\narc a q1\narc q1 u\narc u q2\narc q2 b\narc b f1\n"
    )
    refined = client.post(
        "/refine",
        json={
            "composed": composed["net"],
            "source_net": refined_src,
            "target_net": files["run2_a1.pnet"],
            "map_text": refine_map,
        },
    ).json()
    assert refined["ok"]
    assert "a1.q1" in refined["net"]


def test_compose_bad_spec_is_400(client):
    files = {n: open(f"tests/data/{n}").read() for n in ("run2_a1.pnet", "run2_a2.pnet", "bad.chan")}
    resp = client.post(
        "/compose",
        json={"net1": files["run2_a1.pnet"], "net2": files["run2_a2.pnet"], "chan": files["bad.chan"]},
    )
    assert resp.status_code == 400
    assert "same component" in resp.json()["detail"]


def test_project_discover_replay_precision(client):
    log = "case_id,activity\nc1,a\nc1,c\nc1,b\nc2,a\nc2,c\nc2,b\n"
    projected = client.post(
        "/project", json={"log": log, "fmt": "csv", "alphabet": ["a", "b"]}
    ).json()
    assert projected["dropped"] == 0 and projected["traces"] == 2

    discovered = client.post("/discover", json={"log": projected["log"], "fmt": "csv"}).json()
    assert discovered["tree"] == "seq(a, b)"

    replay = client.post(
        "/replay", json={"net": discovered["net"], "log": projected["log"], "fmt": "csv"}
    ).json()
    assert replay["fitness"] == 1.0 and replay["fitness_exact"] == "1"

    precision = client.post(
        "/precision", json={"net": discovered["net"], "log": projected["log"], "fmt": "csv"}
    ).json()
    assert precision["precision"] == 1.0


def test_playout_endpoint_roundtrip(client):
    body = client.post("/playout", json={"net": SEQ2, "traces": 4, "seed": 9}).json()
    assert body["ok"] and body["regenerated"] == 0
    assert body["log"].count("c0,a") == 1
    xes = client.post(
        "/playout", json={"net": SEQ2, "traces": 1, "seed": 9, "out_fmt": "xes"}
    ).json()
    assert "<log>" in xes["log"]


def test_playout_unsound_refused(client):
    dead = (
        "place s init\nplace p1\nplace p2\nplace f final\n"
        "trans a label=a\ntrans b label=b\ntrans c label=c\ntrans d label=d\ntrans y1 label=y1\n"
        "arc s a\narc a p1\narc s b\narc b p2\narc p1 c\narc c f\narc p2 d\narc d f\n"
        "arc p1 y1\narc p2 y1\narc y1 f\n"
    )
    body = client.post("/playout", json={"net": dead, "traces": 2, "seed": 1}).json()
    assert not body["ok"]
    body = client.post(
        "/playout", json={"net": dead, "traces": 2, "seed": 1, "unsound_ok": True}
    ).json()
    assert body["ok"]


def test_pipeline_endpoint(client):
    data = {n: open(f"tests/data/{n}").read() for n in (
        "run2_log.csv", "run2.part", "run2_abs1.pnet", "run2_abs2.pnet", "run2_protocol.chan")}
    body = client.post(
        "/pipeline",
        json={
            "log": data["run2_log.csv"],
            "fmt": "csv",
            "partition": data["run2.part"],
            "abstract1": data["run2_abs1.pnet"],
            "abstract2": data["run2_abs2.pnet"],
            "chan": data["run2_protocol.chan"],
        },
    ).json()
    assert body["ok"]
    assert body["direct_fitness"] == 1.0 and body["composed_fitness"] == 1.0
    assert body["composed_precision"] >= body["direct_precision"]
    assert "composed" in body["table"]


def test_openapi_schema_renders(client):
    schema = client.get("/openapi.json").json()
    paths = set(schema["paths"])
    assert {"/check/gwf", "/check/soundness", "/check/morphism", "/compose",
            "/refine", "/project", "/discover", "/replay", "/precision",
            "/playout", "/pipeline"} <= paths
