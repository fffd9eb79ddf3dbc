from __future__ import annotations

import io
import json
import threading
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import pytest
from jsonschema import Draft202012Validator

from chemsandbox import canonjson
from chemsandbox.errors import UnknownSession
from chemsandbox.sandbox_service import (
    SandboxService,
    ToolCall,
    default_registry,
    load_trace,
    make_server,
    replay_trace,
    serve_stdio,
)
from oracles import mixed_workload

REGISTRY = default_registry()


@pytest.fixture()
def service():
    return SandboxService()


def test_registry_size_and_shape(service):
    tools = service.list_tools()
    assert len(tools) >= 16
    assert len({t["name"] for t in tools}) == len(tools)
    assert service.list_tools() == tools
    for t in tools:
        assert {"name", "description", "argument_schema", "result_schema", "sample_arguments"} <= set(t)


@pytest.mark.parametrize("name", REGISTRY.names())
def test_sample_payload_validates(name, service):
    tool = REGISTRY.get(name)
    Draft202012Validator(tool.argument_schema).validate(tool.sample_arguments)
    result = service.execute(ToolCall("s", name, tool.sample_arguments))
    assert result.ok, result.error
    Draft202012Validator(tool.result_schema).validate(result.value)


def test_canonical_smiles_call(service):
    result = service.invoke({"id": "a", "name": "canonical_smiles", "arguments": {"smiles": "OCC"}})
    assert result.to_dict() == {"id": "a", "ok": True, "value": {"smiles": "CCO"}}


def test_valence_error_is_structured(service):
    result = service.invoke({"name": "parse_smiles", "arguments": {"smiles": "C(C)(C)(C)(C)C"}})
    assert not result.ok and result.error["code"] == "valence_error"


def test_missing_field_names_the_field(service):
    result = service.invoke({"name": "canonical_smiles", "arguments": {}})
    assert result.error["code"] == "schema_violation" and "smiles" in result.error["message"]


def test_extra_field_rejected(service):
    result = service.invoke({"name": "canonical_smiles", "arguments": {"smiles": "C", "colour": "red"}})
    assert result.error["code"] == "schema_violation" and "colour" in result.error["message"]


def test_unknown_tool(service):
    assert service.invoke({"name": "teleport", "arguments": {}}).error["code"] == "unknown_tool"


def test_malformed_call_is_traced(service):
    result = service.invoke({"arguments": {}}, session="s")
    assert result.error["code"] == "schema_violation"
    assert service.export_trace("s")[0].call["name"] is None


def test_internal_errors_have_no_partial_result():
    from chemsandbox.sandbox_service.tools import ToolDescriptor, ToolRegistry

    def boom(args):
        raise ZeroDivisionError("nope")

    tool = ToolDescriptor("boom", "fails", {"type": "object"}, {"type": "object"}, {}, boom)
    result = SandboxService(ToolRegistry((tool,))).invoke({"name": "boom", "arguments": {}})
    assert result.to_dict() == {"id": "", "ok": False, "error": {"code": "internal", "message": "ZeroDivisionError: nope"}}


def test_repeated_calls_identical(service):
    call = {"name": "property_vector", "arguments": {"smiles": "CC(=O)Oc1ccccc1C(=O)O"}}
    assert service.invoke(call).to_json() == service.invoke(call).to_json()


def test_trace_sequence(service):
    service.open_session("empty")
    assert service.export_trace("empty") == []
    for s in ("C", "CC", "CCC"):
        service.invoke({"name": "molecular_weight", "arguments": {"smiles": s}}, session="three")
    records = service.export_trace("three")
    assert [r.seq for r in records] == [1, 2, 3]
    with pytest.raises(UnknownSession):
        service.export_trace("never")


def test_trace_file_and_replay(tmp_path):
    svc = SandboxService(trace_dir=tmp_path)
    for call in mixed_workload(REGISTRY, 60, seed=4):
        svc.invoke(call, session="run/1")
    (path,) = tmp_path.iterdir()
    records = load_trace(path)
    assert [r.to_dict() for r in records] == [r.to_dict() for r in svc.export_trace("run/1")]
    assert replay_trace(records) == []


def test_replay_detects_tampering(service):
    service.invoke({"id": "x", "name": "canonical_smiles", "arguments": {"smiles": "OCC"}}, session="t")
    (record,) = service.export_trace("t")
    tampered = type(record)(**{**record.__dict__, "result": {"id": "x", "ok": True, "value": {"smiles": "OCC"}}})
    (mismatch,) = replay_trace([tampered])
    assert mismatch.seq == 1 and "OCC" in mismatch.expected


def test_concurrency_matches_serial():
    calls = mixed_workload(REGISTRY, 64, seed=9)
    serial = [SandboxService().invoke(c).to_json() for c in calls]
    svc = SandboxService()
    barrier = threading.Barrier(16)

    def run(call):
        if call["id"] in {f"c{i}" for i in range(16)}:
            barrier.wait()
        return svc.invoke(call, session=f"s{call['id']}").to_json()

    with ThreadPoolExecutor(max_workers=16) as pool:
        concurrent = list(pool.map(run, calls))
    assert concurrent == serial


def test_shared_session_under_concurrency():
    svc = SandboxService()
    calls = mixed_workload(REGISTRY, 40, seed=2)
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda c: svc.invoke(c, session="shared"), calls))
    records = svc.export_trace("shared")
    assert sorted(r.seq for r in records) == list(range(1, 41))
    assert replay_trace(records) == []


def test_stdio_transport(service):
    lines = [
        json.dumps({"id": "1", "name": "canonical_smiles", "arguments": {"smiles": "OCC"}}),
        "",
        "{broken",
        json.dumps({"id": "3", "name": "logp", "arguments": {"smiles": "C"}}),
    ]
    out = io.StringIO()
    assert serve_stdio(service, io.StringIO("\n".join(lines) + "\n"), out) == 0
    results = [json.loads(line) for line in out.getvalue().splitlines()]
    assert results[0] == {"id": "1", "ok": True, "value": {"smiles": "CCO"}}
    assert results[1]["error"]["code"] == "schema_violation"
    assert results[2]["id"] == "3" and results[2]["ok"]
    assert len(service.export_trace("stdio")) == 2


@pytest.fixture()
def http_server():
    server = make_server(SandboxService(), "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def _get(url):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def _post(url, payload, session="default", raw=None):
    body = raw if raw is not None else canonjson.dumps(payload).encode()
    req = urllib.request.Request(url + "/invoke", data=body, headers={"X-Session": session}, method="POST")
    with urllib.request.urlopen(req) as resp:
        return resp.status, json.loads(resp.read())


def test_http_transport(http_server):
    status, tools = _get(http_server + "/tools")
    assert status == 200 and len(tools) == len(REGISTRY.tools)
    status, body = _post(http_server, {"id": "h", "name": "canonical_smiles", "arguments": {"smiles": "OCC"}}, "web")
    assert status == 200 and body == {"id": "h", "ok": True, "value": {"smiles": "CCO"}}
    status, body = _post(http_server, {"name": "parse_smiles", "arguments": {"smiles": "C1CC"}}, "web")
    assert status == 200 and not body["ok"]
    status, body = _post(http_server, None, "web", raw=b"{nope")
    assert status == 200 and body["error"]["code"] == "schema_violation"
    status, trace = _get(http_server + "/trace?session=web")
    assert status == 200 and [r["seq"] for r in trace] == [1, 2]
    assert _get(http_server + "/trace?session=ghost")[0] == 404
    assert _get(http_server + "/nowhere")[0] == 404


def test_http_concurrency_matches_serial(http_server):
    calls = mixed_workload(REGISTRY, 32, seed=5)
    serial = [canonjson.dumps(SandboxService().invoke(c).to_dict()) for c in calls]
    with ThreadPoolExecutor(max_workers=8) as pool:
        bodies = list(pool.map(lambda c: canonjson.dumps(_post(http_server, c)[1]), calls))
    assert bodies == serial
