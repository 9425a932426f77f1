"""Bridges to external scorers (real NMT systems or mocks).

Wire protocol, bit-exact on both transports: newline-delimited JSON.
Request: ``{"id": str, "source": str, "target_tokens": [str,...]}``.
Response: ``{"id": str, "token_logprobs": [float,...]}`` where the list
has ``len(target_tokens) + 1`` entries (final entry scores EOS).
"""

from __future__ import annotations

import json
import os
import selectors
import subprocess
import threading
import time
from typing import Sequence

import httpx

from .errors import BackendFailure, ProtocolViolation, ScorerTimeout
from .scoring import EOS, ScoreRequest, ScorerBackend, TokenLogProbs


def _request_line(request: ScoreRequest) -> str:
    return json.dumps({
        "id": request.id,
        "source": request.source,
        "target_tokens": list(request.target_tokens),
    }, ensure_ascii=False) + "\n"


def _parse_response(line: str) -> tuple[str, list[float]]:
    try:
        obj = json.loads(line)
        return obj["id"], list(obj["token_logprobs"])
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ProtocolViolation(f"malformed response line: {line!r}") from e


def _collect(requests: Sequence[ScoreRequest],
             responses: dict[str, list[float]]) -> list[tuple[str, TokenLogProbs]]:
    """Match responses to requests by id and validate the batch contract."""
    expected = {r.id: r for r in requests}
    if len(expected) != len(requests):
        raise ProtocolViolation("duplicate ids in request batch")
    missing = set(expected) - set(responses)
    if missing:
        raise ProtocolViolation(f"unanswered request ids: {sorted(missing)}")
    out = []
    for request in requests:
        values = responses[request.id]
        if len(values) != len(request.target_tokens) + 1:
            raise ProtocolViolation(
                f"response for {request.id!r} has {len(values)} logprobs, "
                f"expected {len(request.target_tokens) + 1}"
            )
        out.append((request.id, TokenLogProbs(
            logprobs=tuple(float(v) for v in values),
            tokens=tuple(request.target_tokens) + (EOS,),
        )))
    return out


class SubprocessBackend(ScorerBackend):
    """Scorer running as a child process speaking NDJSON on stdin/stdout."""

    def __init__(self, command: Sequence[str], name: str = "external",
                 timeout: float = 60.0):
        self.name = name
        self.command = list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None

    def _ensure_started(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        return self._proc

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def token_logprobs(self, request: ScoreRequest) -> TokenLogProbs:
        return self.score_batch([request])[0][1]

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[tuple[str, TokenLogProbs]]:
        if not requests:
            return []
        proc = self._ensure_started()

        # Write from a separate thread while reading responses, otherwise a
        # large batch deadlocks on full pipe buffers.
        write_error: list[Exception] = []

        def _write_all():
            try:
                for request in requests:
                    proc.stdin.write(_request_line(request))
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                write_error.append(e)

        writer = threading.Thread(target=_write_all, daemon=True)
        writer.start()

        responses: dict[str, list[float]] = {}
        deadline = time.monotonic() + self.timeout
        # select on the raw fd and split lines ourselves; selecting on a
        # buffered reader would miss lines already sitting in its buffer
        fd = proc.stdout.fileno()
        buffer = bytearray()
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        try:
            while len(responses) < len(requests):
                newline = buffer.find(b"\n")
                if newline < 0:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0 or not sel.select(timeout=remaining):
                        raise ScorerTimeout(
                            f"external scorer answered {len(responses)}/{len(requests)} "
                            f"requests within {self.timeout}s"
                        )
                    chunk = os.read(fd, 65536)
                    if not chunk:
                        raise BackendFailure("external scorer closed its stdout mid-batch")
                    buffer.extend(chunk)
                    continue
                line = buffer[:newline].decode("utf-8")
                del buffer[:newline + 1]
                rid, values = _parse_response(line)
                if rid in responses:
                    raise ProtocolViolation(f"duplicate response id: {rid!r}")
                responses[rid] = values
        finally:
            sel.close()
        writer.join(timeout=5)
        if write_error:
            raise BackendFailure(
                f"external scorer {self.command} died: {write_error[0]}"
            ) from write_error[0]
        return _collect(requests, responses)


class HttpBackend(ScorerBackend):
    """Scorer behind an HTTP POST endpoint accepting the same bodies."""

    def __init__(self, endpoint: str, name: str = "http", timeout: float = 60.0):
        self.name = name
        self.endpoint = endpoint
        self.timeout = timeout

    def token_logprobs(self, request: ScoreRequest) -> TokenLogProbs:
        return self.score_batch([request])[0][1]

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[tuple[str, TokenLogProbs]]:
        responses: dict[str, list[float]] = {}
        with httpx.Client(timeout=self.timeout) as client:
            for request in requests:
                try:
                    reply = client.post(self.endpoint, content=_request_line(request),
                                        headers={"content-type": "application/json"})
                    reply.raise_for_status()
                except httpx.TimeoutException as e:
                    raise ScorerTimeout(str(e)) from e
                except httpx.HTTPError as e:
                    raise BackendFailure(f"scorer endpoint failed: {e}") from e
                rid, values = _parse_response(reply.text)
                if rid in responses:
                    raise ProtocolViolation(f"duplicate response id: {rid!r}")
                responses[rid] = values
        return _collect(requests, responses)


def score_batch_external(backend: ScorerBackend,
                         requests: Sequence[ScoreRequest]) -> list[tuple[str, TokenLogProbs]]:
    """Score a batch, enforcing the exactly-once completeness contract."""
    results = backend.score_batch(requests)
    seen = [rid for rid, _ in results]
    if sorted(seen) != sorted({r.id for r in requests}):
        raise ProtocolViolation("batch result ids do not match request ids")
    return results
