"""Pluggable recognizer backends and the wire protocol for external ones.

The evaluation pipeline needs action/attribute probabilities for an attempt.
Two backends provide them:

* ``SyntheticBackend`` -- in-process, seedable generator (the default); reads
  the enacted ground-truth descriptor carried in the frame refs.
* ``ExternalBackend`` -- speaks a line-oriented text protocol to a remote
  recognizer process:

      HELLO {"action_vocab": h1, "attribute_vocab": h2}   -> OK | ERROR {...}
      EVALUATE {"performance_id", "camera_id", "frame_refs"} -> RESULT {...} | ERROR {...}

  RESULT probabilities are serialized as decimals with 16 significant digits.
  Vocabulary hashes must match before any evaluation is accepted.

Whatever the source, outputs are validated here (range, softmax sum) before
anything downstream sees them. Backend faults void the attempt instead of
failing the performer: timeouts raise EvaluationUnavailableError, invariant
violations raise MalformedBackendOutputError.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .codec import canonical_dumps, canonical_loads, digest
from .domain import ActionVocabulary, AttributeVocabulary
from .errors import (
    EvaluationUnavailableError,
    MalformedBackendOutputError,
)
from .scoring import RecognitionOutput
from .synthetic import SyntheticParams, SyntheticProfile, synth_recognize

# One attempt spans at most 30 seconds of footage; an external backend that
# cannot answer within the window has effectively lost the attempt.
PERFORMANCE_WINDOW_S = 30.0


def vocab_hashes(actions: ActionVocabulary, attributes: AttributeVocabulary) -> dict[str, str]:
    return {
        "action_vocab": digest(actions.to_payload()),
        "attribute_vocab": digest(attributes.to_payload()),
    }


@dataclass(frozen=True)
class RecognizerBackendDescriptor:
    kind: str  # "SYNTHETIC" | "EXTERNAL"
    endpoint: Optional[str]
    action_vocab_hash: str
    attribute_vocab_hash: str


def enacted_frame_ref(action_index: int, attributes: Sequence[bool]) -> str:
    """Encode what the performer actually did as a frame reference.

    The simulator has no real footage; the descriptor plays the role of the
    camera feed and the synthetic backend treats it as its sensor input.
    """
    return "enacted:" + canonical_dumps(
        {"action_index": action_index, "attributes": [bool(a) for a in attributes]}
    )


def parse_enacted(frame_ref: str) -> tuple[int, tuple[bool, ...]]:
    if not frame_ref.startswith("enacted:"):
        raise MalformedBackendOutputError(f"not an enacted descriptor: {frame_ref[:40]}")
    payload = canonical_loads(frame_ref[len("enacted:"):])
    return payload["action_index"], tuple(bool(a) for a in payload["attributes"])


def _validated(rec: RecognitionOutput, k: int, l: int) -> RecognitionOutput:
    if len(rec.action_probs) != k or len(rec.attribute_probs) != l:
        raise MalformedBackendOutputError("probability vector length mismatch")
    problems = rec.violations()
    if problems:
        raise MalformedBackendOutputError("; ".join(problems))
    return rec


class SyntheticBackend:
    """In-process backend: deterministic probabilities from enacted ground truth."""

    def __init__(
        self,
        actions: ActionVocabulary,
        attributes: AttributeVocabulary,
        params: SyntheticParams,
        rng_seed: int = 0,
    ):
        self.actions = actions
        self.attributes = attributes
        self.params = params
        self.rng_seed = rng_seed
        hashes = vocab_hashes(actions, attributes)
        self.descriptor = RecognizerBackendDescriptor(
            kind="SYNTHETIC",
            endpoint=None,
            action_vocab_hash=hashes["action_vocab"],
            attribute_vocab_hash=hashes["attribute_vocab"],
        )

    def recognize(self, performance_id: str, camera_id: str, frame_refs: Sequence[str]) -> RecognitionOutput:
        if not frame_refs:
            raise MalformedBackendOutputError("no frames supplied")
        gt_action, gt_attributes = parse_enacted(frame_refs[0])
        profile = SyntheticProfile(
            ground_truth_action=gt_action,
            ground_truth_attributes=gt_attributes,
            action_count=self.actions.size,
            params=self.params,
            rng_seed=self.rng_seed,
        )
        rec = synth_recognize(profile, performance_id)
        return _validated(rec, self.actions.size, self.attributes.size)


def _format_probs(values: Sequence[float]) -> str:
    # >= 12 significant digits guaranteed; 16 keeps the loss far below any tolerance
    return "[" + ",".join(format(v, ".15e") for v in values) + "]"


def format_result_line(rec: RecognitionOutput) -> str:
    return (
        'RESULT {"action_probs":%s,"attribute_probs":%s}'
        % (_format_probs(rec.action_probs), _format_probs(rec.attribute_probs))
    )


class ExternalBackend:
    """Client side of the wire protocol; one connection per evaluation."""

    def __init__(
        self,
        endpoint: str,
        actions: ActionVocabulary,
        attributes: AttributeVocabulary,
        timeout_s: float = PERFORMANCE_WINDOW_S,
    ):
        self.endpoint = endpoint
        self.actions = actions
        self.attributes = attributes
        self.timeout_s = timeout_s
        hashes = vocab_hashes(actions, attributes)
        self.descriptor = RecognizerBackendDescriptor(
            kind="EXTERNAL",
            endpoint=endpoint,
            action_vocab_hash=hashes["action_vocab"],
            attribute_vocab_hash=hashes["attribute_vocab"],
        )

    def _parse_endpoint(self) -> tuple[str, int]:
        host, _, port = self.endpoint.rpartition(":")
        return host or "127.0.0.1", int(port)

    def recognize(self, performance_id: str, camera_id: str, frame_refs: Sequence[str]) -> RecognitionOutput:
        hello = "HELLO " + canonical_dumps(
            {
                "action_vocab": self.descriptor.action_vocab_hash,
                "attribute_vocab": self.descriptor.attribute_vocab_hash,
            }
        )
        evaluate = "EVALUATE " + canonical_dumps(
            {
                "performance_id": performance_id,
                "camera_id": camera_id,
                "frame_refs": list(frame_refs),
            }
        )
        try:
            with socket.create_connection(self._parse_endpoint(), timeout=self.timeout_s) as conn:
                conn.settimeout(self.timeout_s)
                stream = conn.makefile("rw", encoding="utf-8", newline="\n")
                stream.write(hello + "\n")
                stream.flush()
                reply = stream.readline().strip()
                if reply != "OK":
                    raise EvaluationUnavailableError(f"handshake rejected: {reply}")
                stream.write(evaluate + "\n")
                stream.flush()
                line = stream.readline().strip()
        except (OSError, socket.timeout) as exc:
            raise EvaluationUnavailableError(f"recognizer backend unreachable: {exc}") from exc
        if not line:
            raise EvaluationUnavailableError("recognizer backend closed the connection")
        verb, _, body = line.partition(" ")
        if verb == "ERROR":
            raise EvaluationUnavailableError(f"backend error: {body}")
        if verb != "RESULT":
            raise MalformedBackendOutputError(f"unexpected reply verb {verb!r}")
        try:
            payload = json.loads(body)
            rec = RecognitionOutput(
                action_probs=tuple(float(p) for p in payload["action_probs"]),
                attribute_probs=tuple(float(p) for p in payload["attribute_probs"]),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedBackendOutputError(f"unparseable RESULT: {exc}") from exc
        return _validated(rec, self.actions.size, self.attributes.size)


class _WireHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: RecognizerWireServer = self.server  # type: ignore[assignment]
        greeted = False
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            verb, _, body = line.partition(" ")
            if verb == "HELLO":
                claimed = json.loads(body)
                if (
                    claimed.get("action_vocab") == server.expected_hashes["action_vocab"]
                    and claimed.get("attribute_vocab") == server.expected_hashes["attribute_vocab"]
                ):
                    greeted = True
                    self._send("OK")
                else:
                    self._send('ERROR {"code":"vocab-mismatch"}')
                    return
            elif verb == "EVALUATE":
                if not greeted:
                    self._send('ERROR {"code":"handshake-required"}')
                    return
                payload = json.loads(body)
                try:
                    rec = server.evaluate_fn(
                        payload["performance_id"], payload["camera_id"], payload["frame_refs"]
                    )
                except Exception:
                    self._send('ERROR {"code":"evaluation-failed"}')
                    continue
                self._send(server.result_line_fn(rec))
            else:
                self._send('ERROR {"code":"unknown-verb"}')

    def _send(self, line: str) -> None:
        self.wfile.write((line + "\n").encode("utf-8"))


class RecognizerWireServer(socketserver.ThreadingTCPServer):
    """Serves the wire protocol around any recognize function (tests use this
    to stand up synthetic, slow, or misbehaving backends)."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        evaluate_fn: Callable[[str, str, Sequence[str]], RecognitionOutput],
        expected_hashes: dict[str, str],
        host: str = "127.0.0.1",
        port: int = 0,
        result_line_fn: Callable[[RecognitionOutput], str] = format_result_line,
    ):
        super().__init__((host, port), _WireHandler)
        self.evaluate_fn = evaluate_fn
        self.expected_hashes = expected_hashes
        self.result_line_fn = result_line_fn
        self._thread: Optional[threading.Thread] = None

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "RecognizerWireServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread:
            self._thread.join(timeout=5)
