"""Offline stand-ins for a model endpoint."""
from __future__ import annotations

import json
import threading
from typing import Callable, Iterable

import httpx

from ..errors import ContractError
from ..prompts import question_from_prompt
from ..questions import BaTruth, CpTruth, QuestionRecord
from .answers import render_answer

Responder = Callable[[str], str]


class _ByQuestion:
    def __init__(self, records: Iterable[QuestionRecord]):
        self._by_text: dict[str, QuestionRecord] = {}
        for q in records:
            self._by_text.setdefault(q.question_text, q)

    def record_for(self, prompt: str) -> QuestionRecord:
        text = question_from_prompt(prompt)
        try:
            return self._by_text[text]
        except KeyError:
            raise ContractError("mock received a question it does not know") from None


class OracleMock(_ByQuestion):
    """Answers every known question with its ground truth."""

    name = "mock:oracle"

    def __call__(self, prompt: str) -> str:
        return "Working it out.\n" + render_answer(self.record_for(prompt))


class NegatingMock(_ByQuestion):
    """Always wrong, but always well formed."""

    name = "mock:negate"

    def __call__(self, prompt: str) -> str:
        q = self.record_for(prompt)
        name = q.names.__getitem__
        truth = q.ground_truth
        if isinstance(truth, CpTruth):
            if any(paths for _, _, paths in truth.pairs):
                lines = ["none"]
            else:
                x, y, _ = truth.pairs[0]
                lines = [f"path: {name(x)} -> {name(y)}"]
        elif isinstance(truth, BaTruth):
            # controlling the outcome is never a valid adjustment
            lines = ["adjust: {" + name(gt.outcome) + "}" for gt in truth.pairs]
        else:
            lines = [f"{name(v)}: {'does not happen' if s else 'happens'}" for v, s in truth.states.items()]
        return "ANSWER:\n" + "\n".join(lines)


class GarbageMock:
    """Ignores the answer format entirely."""

    name = "mock:garbage"

    def __call__(self, prompt: str) -> str:
        return "I am not sure. Maybe all of them, maybe none."


MOCKS = {"oracle": OracleMock, "negate": NegatingMock, "garbage": GarbageMock}


def make_mock(kind: str, records: Iterable[QuestionRecord]) -> Responder:
    try:
        cls = MOCKS[kind]
    except KeyError:
        raise ContractError(f"unknown mock {kind!r}; choose from {sorted(MOCKS)}") from None
    return cls() if cls is GarbageMock else cls(records)


class ChatTransport(httpx.MockTransport):
    """An ``httpx`` transport that serves chat completions from a responder.

    ``script`` optionally lists status codes to return before answering
    normally, which lets tests exercise the retry path.
    """

    def __init__(self, responder: Responder, script: Iterable[int] = ()):
        self.responder = responder
        self.script = list(script)
        self.requests = 0
        self._lock = threading.Lock()
        super().__init__(self._handle)

    def _handle(self, request: httpx.Request) -> httpx.Response:
        with self._lock:
            self.requests += 1
            status = self.script.pop(0) if self.script else 200
        if status != 200:
            return httpx.Response(status, json={"error": {"message": f"scripted {status}"}})
        body = json.loads(request.content)
        prompt = body["messages"][-1]["content"]
        text = self.responder(prompt)
        return httpx.Response(200, json={"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]})
