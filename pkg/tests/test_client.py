import json
import logging
import threading

import httpx
import pytest

from causalbench.errors import ValidationError
from causalbench.evaluation.client import (
    ChatClient,
    CredentialError,
    ModelEndpoint,
    RateLimiter,
    ResponseCache,
    TransportError,
)
from causalbench.evaluation.mocks import ChatTransport

EP = ModelEndpoint(base_url="http://model.test/v1", model="m1", requests_per_minute=0, max_attempts=4)


class Sleeper:
    def __init__(self):
        self.calls = []

    def __call__(self, s):
        self.calls.append(s)


def client(responder=lambda p: "fixed text", script=(), cache=None, endpoint=EP, **kw):
    transport = ChatTransport(responder, script)
    sleeper = Sleeper()
    return ChatClient(endpoint, cache, transport=transport, sleep=sleeper, **kw), transport, sleeper


def test_fixed_text_verbatim():
    c, _, _ = client(lambda p: "  exact\ntext  ")
    assert c.complete("hi") == "  exact\ntext  "


def test_request_shape():
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("authorization")
        seen["x"] = request.headers.get("x-team")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    ep = ModelEndpoint(base_url="http://model.test/v1", model="m1", api_key_env="TOKEN_VAR",
                       temperature=0.0, max_tokens=64, requests_per_minute=0, headers={"X-Team": "bench"})
    c = ChatClient(ep, transport=httpx.MockTransport(handler), env={"TOKEN_VAR": "s3cret"})
    assert c.complete("question?") == "ok"
    assert seen["url"] == "http://model.test/v1/chat/completions"
    assert seen["body"] == {"model": "m1", "messages": [{"role": "user", "content": "question?"}],
                            "temperature": 0.0, "max_tokens": 64}
    assert seen["auth"] == "Bearer s3cret"
    assert seen["x"] == "bench"


def test_missing_token():
    ep = ModelEndpoint(base_url="http://x", model="m", api_key_env="NOPE_VAR")
    with pytest.raises(CredentialError):
        ChatClient(ep, env={})


def test_cache_single_network_call(tmp_path):
    cache = ResponseCache(tmp_path)
    c, transport, _ = client(cache=cache)
    assert c.complete("same") == c.complete("same") == "fixed text"
    assert transport.requests == 1 and c.network_calls == 1 and c.cache_hits == 1
    (entry,) = list(tmp_path.glob("*.json"))
    data = json.loads(entry.read_text())
    assert data["request"]["prompt"] == "same" and data["response"]["text"] == "fixed text"
    assert entry.stem == ResponseCache.key("m1", "same", EP.params)


def test_cache_key_sensitivity():
    k = ResponseCache.key("m", "p", {"temperature": 0})
    assert k != ResponseCache.key("m2", "p", {"temperature": 0})
    assert k != ResponseCache.key("m", "p2", {"temperature": 0})
    assert k != ResponseCache.key("m", "p", {"temperature": 1})


def test_cache_shared_between_clients(tmp_path):
    c1, t1, _ = client(cache=ResponseCache(tmp_path))
    c1.complete("q")
    c2, t2, _ = client(lambda p: "different", cache=ResponseCache(tmp_path))
    assert c2.complete("q") == "fixed text" and t2.requests == 0


def test_corrupt_cache_entry_ignored(tmp_path):
    cache = ResponseCache(tmp_path)
    (tmp_path / f"{ResponseCache.key('m1', 'q', EP.params)}.json").write_text("{broken")
    c, transport, _ = client(cache=cache)
    assert c.complete("q") == "fixed text" and transport.requests == 1


def test_429_then_success():
    c, transport, sleeper = client(script=[429])
    assert c.complete("q") == "fixed text"
    assert transport.requests == 2 and sleeper.calls == [1.0]


def test_backoff_grows_and_gives_up():
    c, transport, sleeper = client(script=[500, 502, 503, 504])
    with pytest.raises(TransportError, match="4 attempts"):
        c.complete("q")
    assert transport.requests == 4 and sleeper.calls == [1.0, 2.0, 4.0]


def test_retry_after_header():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            return httpx.Response(429, headers={"Retry-After": "7"})
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    sleeper = Sleeper()
    c = ChatClient(EP, transport=httpx.MockTransport(handler), sleep=sleeper)
    assert c.complete("q") == "ok" and sleeper.calls == [7.0]


def test_transport_error_retried():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            raise httpx.ConnectError("down")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    c = ChatClient(EP, transport=httpx.MockTransport(handler), sleep=Sleeper())
    assert c.complete("q") == "ok" and calls["n"] == 2


@pytest.mark.parametrize("status", [401, 403])
def test_credentials_not_retried(status, caplog):
    ep = ModelEndpoint(base_url="http://x", model="m", api_key_env="TOKEN_VAR", requests_per_minute=0)
    transport = ChatTransport(lambda p: "x", [status] * 5)
    c = ChatClient(ep, transport=transport, env={"TOKEN_VAR": "topsecretvalue"}, sleep=Sleeper())
    with caplog.at_level(logging.DEBUG), pytest.raises(CredentialError) as err:
        c.complete("q")
    assert transport.requests == 1
    assert "topsecretvalue" not in str(err.value) and "topsecretvalue" not in caplog.text


def test_client_error_not_retried():
    c, transport, _ = client(script=[400])
    with pytest.raises(TransportError):
        c.complete("q")
    assert transport.requests == 1


def test_malformed_body():
    c = ChatClient(EP, transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"nope": 1})))
    with pytest.raises(TransportError):
        c.complete("q")


def test_rate_limiter_spacing():
    now = [0.0]
    slept = []

    def sleep(s):
        slept.append(s)
        now[0] += s

    lim = RateLimiter(120, clock=lambda: now[0], sleep=sleep)
    for _ in range(4):
        lim.acquire()
    assert slept == [0.5, 0.5, 0.5]


def test_concurrent_cache_writes(tmp_path):
    cache = ResponseCache(tmp_path)
    c, transport, _ = client(lambda p: p.upper(), cache=cache)
    prompts = [f"p{i % 10}" for i in range(60)]
    out = {}

    def work(p):
        out[p] = c.complete(p)

    threads = [threading.Thread(target=work, args=(p,)) for p in prompts]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(out[p] == p.upper() for p in prompts)
    assert len(list(tmp_path.glob("*.json"))) == 10
    assert not list(tmp_path.glob(".tmp-*"))


def test_endpoint_from_ini():
    ep = ModelEndpoint.from_ini(
        "[endpoint]\nbase_url = https://api.example\nmodel = big\napi_key_env = MY_KEY\n"
        "max_tokens = 512\nrequests_per_minute = 30\nextra_body = {\"top_p\": 1}\n"
    )
    assert ep.model == "big" and ep.max_tokens == 512 and ep.params == {"temperature": 0.0, "max_tokens": 512, "top_p": 1}
    with pytest.raises(ValidationError):
        ModelEndpoint.from_ini("[other]\nx=1\n")
    with pytest.raises(ValidationError):
        ModelEndpoint.from_ini("[endpoint]\nmodel = m\n")
