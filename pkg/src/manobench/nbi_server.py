"""Minimal HTTP north-bound interface in front of the simulated orchestrator.

The protocol is deliberately small and generic (JSON bodies, UTF-8): it is a
declared wire format, not a re-implementation of any platform's NBI. Every
request executes under one lock, so concurrent clients observe serialized,
linearizable command effects.

Routes:
  POST   /packages                      -> 201 {"id"}
  POST   /ns_descriptors                -> 201 {"id"}
  POST   /ns_instances {"nsd_id"}       -> 201 {"id"}
  POST   /ns_instances/{id}/instantiate -> 202 {"op_id"}
  POST   /ns_instances/{id}/scale {"kind","vnf_name"} -> 202 {"op_id"}
  GET    /ns_instances/{id}             -> 200 {"state","vnfs":[...]}
  GET    /operations/{op_id}            -> 200 {...}
  DELETE /ns_instances/{id}             -> 204
  GET    /instances                     -> 200 [{"id","name"}]
  GET    /instances/{id}/metrics        -> 200 {metric: unit}
  GET    /metrics/{id}/measures?metric= -> 200 [[timestamp, value]]
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .descriptors import nsd_from_dict, package_from_dict
from .errors import (
    BindFailure,
    DuplicateGraphEntry,
    InvalidValue,
    MalformedDocument,
    ManobenchError,
    MissingField,
    MissingPackage,
    NoAllocation,
    NoFeasibleNode,
    UnknownNs,
    UnknownVnf,
    UnresolvedReference,
    ValidationFailed,
    WrongState,
)
from .drivers import sim_measures, trace_to_dict
from .nfvi import METRIC_UNITS, MetricName
from .orchestrator import SimOrchestrator

_STATUS_FOR = [
    (ValidationFailed, 400),
    (MalformedDocument, 400),
    (MissingField, 400),
    (InvalidValue, 400),
    (DuplicateGraphEntry, 400),
    (UnknownVnf, 400),
    (UnresolvedReference, 404),
    (UnknownNs, 404),
    (MissingPackage, 409),
    (NoFeasibleNode, 409),
    (WrongState, 409),
    (NoAllocation, 404),
]


def _error_payload(exc: ManobenchError) -> tuple[int, dict]:
    for cls, status in _STATUS_FOR:
        if isinstance(exc, cls):
            return status, {"error": cls.__name__, "detail": str(exc)}
    return 500, {"error": exc.__class__.__name__, "detail": str(exc)}


def _operation_to_dict(op) -> dict:
    return {
        "op_id": op.op_id,
        "kind": op.kind,
        "state": op.state,
        "executed_at": op.executed_at_ns,
        "completed_at": op.completed_at_ns,
        "action_kind": op.action_kind.value if op.action_kind else None,
        "instance_id": op.instance_id,
        "vnf_name": op.vnf_name,
        "decision_trace": (
            trace_to_dict(op.decision_trace) if op.decision_trace else None
        ),
    }


def _make_handler(orchestrator: SimOrchestrator, lock: threading.Lock,
                  auth_token: str | None):
    class Handler(BaseHTTPRequestHandler):
        server_version = "manobench-nbi/1"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload=None):
            body = b""
            if payload is not None:
                body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            if body:
                self.wfile.write(body)

        def _authorized(self) -> bool:
            if auth_token is None:
                return True
            return self.headers.get("Authorization") == f"Bearer {auth_token}"

        def _body(self):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                return json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedDocument(f"request body: {exc}") from exc

        def _dispatch(self, method: str):
            if not self._authorized():
                self._send(401, {"error": "Unauthorized", "detail": "bad token"})
                return
            parsed = urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            query = parse_qs(parsed.query)
            try:
                with lock:
                    result = self._route(method, parts, query)
            except ManobenchError as exc:
                status, payload = _error_payload(exc)
                self._send(status, payload)
                return
            self._send(*result)

        def _route(self, method: str, parts: list[str], query) -> tuple[int, object]:
            orch = orchestrator
            if method == "POST" and parts == ["packages"]:
                pkg = package_from_dict(self._body())
                package_id, _ = orch.onboard(pkg)
                return 201, {"id": package_id}

            if method == "POST" and parts == ["ns_descriptors"]:
                known = [p.vnfd for p in orch.packages.values()]
                nsd = nsd_from_dict(self._body(), known)
                return 201, {"id": orch.register_nsd(nsd)}

            if method == "POST" and parts == ["ns_instances"]:
                body = self._body()
                if "nsd_id" not in body:
                    raise MissingField("nsd_id")
                return 201, {"id": orch.create_ns(body["nsd_id"])}

            if (method == "POST" and len(parts) == 3
                    and parts[0] == "ns_instances" and parts[2] == "instantiate"):
                op_id, _ = orch.instantiate_ns(parts[1])
                return 202, {"op_id": op_id}

            if (method == "POST" and len(parts) == 3
                    and parts[0] == "ns_instances" and parts[2] == "scale"):
                body = self._body()
                kind = body.get("kind")
                vnf_name = body.get("vnf_name")
                if vnf_name is None:
                    raise MissingField("vnf_name")
                if kind == "SCALE_OUT":
                    _, op_id, _, _ = orch.scale_out(parts[1], vnf_name)
                elif kind == "MIGRATE":
                    op_id, _, _ = orch.migrate_vnf(parts[1], vnf_name)
                else:
                    raise InvalidValue("kind", f"unsupported action {kind!r}")
                return 202, {"op_id": op_id}

            if method == "GET" and len(parts) == 2 and parts[0] == "ns_instances":
                return 200, orch.ns_detail(parts[1])

            if method == "DELETE" and len(parts) == 2 and parts[0] == "ns_instances":
                orch.terminate_ns(parts[1])
                return 204, None

            if method == "GET" and len(parts) == 2 and parts[0] == "operations":
                op = orch.operations.get(parts[1])
                if op is None:
                    raise UnknownNs(parts[1])
                return 200, _operation_to_dict(op)

            if method == "GET" and parts == ["instances"]:
                return 200, [
                    {"id": i, "name": n} for i, n in orch.live_instances()
                ]

            if (method == "GET" and len(parts) == 3
                    and parts[0] == "instances" and parts[2] == "metrics"):
                orch.vim._require_instance(parts[1])
                return 200, {m.value: METRIC_UNITS[m] for m in MetricName}

            if (method == "GET" and len(parts) == 3
                    and parts[0] == "metrics" and parts[2] == "measures"):
                metrics = query.get("metric")
                if not metrics:
                    raise MissingField("metric")
                try:
                    MetricName(metrics[0])
                except ValueError:
                    raise InvalidValue("metric", metrics[0]) from None
                measures = sim_measures(orch, parts[1], metrics[0])
                return 200, [[m.timestamp, m.value] for m in measures]

            raise UnknownNs("/".join(parts))  # 404 for unknown routes

        def do_POST(self):
            self._dispatch("POST")

        def do_GET(self):
            self._dispatch("GET")

        def do_DELETE(self):
            self._dispatch("DELETE")

    return Handler


class NbiServer:
    """Running server handle; stop() shuts the listener down."""

    def __init__(self, orchestrator: SimOrchestrator, port: int,
                 host: str = "127.0.0.1", auth_token: str | None = None):
        handler = _make_handler(orchestrator, threading.Lock(), auth_token)
        try:
            self._httpd = ThreadingHTTPServer((host, port), handler)
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
        self.host = host
        self.port = self._httpd.server_address[1]
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="manobench-nbi", daemon=True
        )
        self._thread.start()

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "NbiServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()


def nbi_serve(orchestrator: SimOrchestrator, port: int,
              host: str = "127.0.0.1", auth_token: str | None = None) -> NbiServer:
    """Start serving the wire protocol; raises BindFailure if the port is taken."""
    return NbiServer(orchestrator, port, host=host, auth_token=auth_token)
