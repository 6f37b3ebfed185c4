from __future__ import annotations

import re
import time

import pytest

from bodylang.domain import ActionVocabulary, AttributeVocabulary
from bodylang.errors import EvaluationUnavailableError, MalformedBackendOutputError
from bodylang.recognizer import (
    ExternalBackend,
    RecognizerWireServer,
    SyntheticBackend,
    enacted_frame_ref,
    format_result_line,
    parse_enacted,
    vocab_hashes,
)
from bodylang.scoring import RecognitionOutput
from bodylang.synthetic import SyntheticParams


@pytest.fixture(scope="module")
def vocabs():
    return ActionVocabulary(), AttributeVocabulary()


def _synthetic_eval(vocabs):
    actions, attributes = vocabs
    backend = SyntheticBackend(actions, attributes, SyntheticParams(), rng_seed=5)
    return backend.recognize


def test_enacted_descriptor_round_trip():
    ref = enacted_frame_ref(3, [True, False, True])
    action, attrs = parse_enacted(ref)
    assert action == 3
    assert attrs == (True, False, True)


def test_result_line_has_at_least_12_significant_digits():
    rec = RecognitionOutput(action_probs=(0.5, 0.5), attribute_probs=(0.123456789,))
    line = format_result_line(rec)
    for token in re.findall(r"[0-9]\.[0-9]+e[+-][0-9]+", line):
        mantissa = token.split("e")[0].replace(".", "")
        assert len(mantissa) >= 12


def test_round_trip_over_wire(vocabs):
    actions, attributes = vocabs
    server = RecognizerWireServer(_synthetic_eval(vocabs), vocab_hashes(actions, attributes)).start()
    try:
        client = ExternalBackend(server.endpoint, actions, attributes, timeout_s=5.0)
        ref = enacted_frame_ref(1, [True] + [False] * 11)
        rec = client.recognize("p000001", "cam1", [ref])
        assert rec.violations() == []
        # same draw as the in-process backend: the wire only adds serialization
        direct = _synthetic_eval(vocabs)("p000001", "cam1", [ref])
        assert max(abs(a - b) for a, b in zip(rec.action_probs, direct.action_probs)) < 1e-12
    finally:
        server.stop()


def test_vocab_mismatch_rejected(vocabs):
    actions, attributes = vocabs
    wrong = vocab_hashes(ActionVocabulary(actions=("clapping", "jumping")), attributes)
    server = RecognizerWireServer(_synthetic_eval(vocabs), wrong).start()
    try:
        client = ExternalBackend(server.endpoint, actions, attributes, timeout_s=5.0)
        with pytest.raises(EvaluationUnavailableError):
            client.recognize("p1", "cam1", [enacted_frame_ref(0, [True] * 12)])
    finally:
        server.stop()


def test_malformed_softmax_sum_rejected(vocabs):
    actions, attributes = vocabs

    def bad_eval(performance_id, camera_id, frame_refs):
        return RecognitionOutput(
            action_probs=(0.5, 0.5, 0.2, 0.0, 0.0),  # sums to 1.2
            attribute_probs=(0.5,) * attributes.size,
        )

    server = RecognizerWireServer(bad_eval, vocab_hashes(actions, attributes)).start()
    try:
        client = ExternalBackend(server.endpoint, actions, attributes, timeout_s=5.0)
        with pytest.raises(MalformedBackendOutputError):
            client.recognize("p1", "cam1", ["ref"])
    finally:
        server.stop()


def test_wrong_vector_length_rejected(vocabs):
    actions, attributes = vocabs

    def short_eval(performance_id, camera_id, frame_refs):
        return RecognitionOutput(action_probs=(1.0,), attribute_probs=(0.5,))

    server = RecognizerWireServer(short_eval, vocab_hashes(actions, attributes)).start()
    try:
        client = ExternalBackend(server.endpoint, actions, attributes, timeout_s=5.0)
        with pytest.raises(MalformedBackendOutputError):
            client.recognize("p1", "cam1", ["ref"])
    finally:
        server.stop()


def test_silent_backend_times_out(vocabs):
    actions, attributes = vocabs

    def slow_eval(performance_id, camera_id, frame_refs):
        time.sleep(2.0)
        return RecognitionOutput(
            action_probs=(1.0, 0.0, 0.0, 0.0, 0.0), attribute_probs=(0.5,) * 12
        )

    server = RecognizerWireServer(slow_eval, vocab_hashes(actions, attributes)).start()
    try:
        client = ExternalBackend(server.endpoint, actions, attributes, timeout_s=0.3)
        with pytest.raises(EvaluationUnavailableError):
            client.recognize("p1", "cam1", ["ref"])
    finally:
        server.stop()


def test_unreachable_endpoint(vocabs):
    actions, attributes = vocabs
    client = ExternalBackend("127.0.0.1:1", actions, attributes, timeout_s=0.3)
    with pytest.raises(EvaluationUnavailableError):
        client.recognize("p1", "cam1", ["ref"])
