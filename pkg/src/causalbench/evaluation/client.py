"""Chat-completions client with retries, rate limiting and a disk cache."""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import httpx

from ..errors import CausalBenchError, ValidationError

log = logging.getLogger(__name__)


class TransportError(CausalBenchError):
    """The endpoint could not produce a completion."""


class CredentialError(TransportError):
    """The endpoint rejected the credentials."""


@dataclass(frozen=True)
class ModelEndpoint:
    base_url: str
    model: str
    api_key_env: str | None = None
    path: str = "/chat/completions"
    temperature: float | None = 0.0
    max_tokens: int | None = None
    requests_per_minute: float = 60.0
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_max: float = 30.0
    timeout: float = 120.0
    extra_body: Mapping = field(default_factory=dict)
    headers: Mapping = field(default_factory=dict)  # non-secret extras; credentials come from api_key_env

    @property
    def params(self) -> dict:
        """Decoding parameters that take part in the cache key."""
        out = {k: v for k, v in (("temperature", self.temperature), ("max_tokens", self.max_tokens)) if v is not None}
        out.update(self.extra_body)
        return out

    @classmethod
    def from_ini(cls, text: str, section: str = "endpoint") -> "ModelEndpoint":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        cp.read_string(text)
        if not cp.has_section(section):
            raise ValidationError(f"endpoint config lacks a [{section}] section")
        s = cp[section]
        try:
            extra = json.loads(s.get("extra_body", "{}"))
            headers = json.loads(s.get("headers", "{}"))
            return cls(
                base_url=s["base_url"],
                model=s["model"],
                api_key_env=s.get("api_key_env") or None,
                path=s.get("path", "/chat/completions"),
                temperature=s.getfloat("temperature", 0.0) if s.get("temperature", "") != "none" else None,
                max_tokens=s.getint("max_tokens") if s.get("max_tokens") else None,
                requests_per_minute=s.getfloat("requests_per_minute", 60.0),
                max_attempts=s.getint("max_attempts", 5),
                backoff_base=s.getfloat("backoff_base", 1.0),
                backoff_max=s.getfloat("backoff_max", 30.0),
                timeout=s.getfloat("timeout", 120.0),
                extra_body=extra,
                headers=headers,
            )
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"bad endpoint config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ModelEndpoint":
        return cls.from_ini(Path(path).read_text("utf-8"))


class RateLimiter:
    """Spaces request starts at least ``60 / rpm`` seconds apart across threads."""

    def __init__(self, requests_per_minute: float, clock=time.monotonic, sleep=time.sleep):
        self.interval = 60.0 / requests_per_minute if requests_per_minute > 0 else 0.0
        self._clock = clock
        self._sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = self._clock()
            start = max(now, self._next)
            self._next = start + self.interval
        if start > now:
            self._sleep(start - now)


class ResponseCache:
    """One JSON file per request hash, holding the request and the completion."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @staticmethod
    def key(model: str, prompt: str, params: Mapping) -> str:
        blob = json.dumps({"model": model, "prompt": prompt, "params": dict(params)}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            data = json.loads(path.read_text("utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError):
            log.warning("ignoring unreadable cache entry %s", path.name)
            return None
        return data.get("response", {}).get("text")

    def put(self, key: str, request: Mapping, text: str) -> None:
        payload = json.dumps({"request": dict(request), "response": {"text": text}}, sort_keys=True, indent=1)
        with self._lock:
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(payload)
                os.replace(tmp, self._path(key))
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def _retry_after(resp: httpx.Response) -> float | None:
    value = resp.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


class ChatClient:
    """Sends one user message per prompt and returns the assistant text."""

    def __init__(
        self,
        endpoint: ModelEndpoint,
        cache: ResponseCache | None = None,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        env: Mapping[str, str] | None = None,
    ):
        self.endpoint = endpoint
        self.cache = cache
        self._sleep = sleep
        self._limiter = RateLimiter(endpoint.requests_per_minute, sleep=sleep)
        headers = {"Content-Type": "application/json", **endpoint.headers}
        if endpoint.api_key_env:
            token = (env if env is not None else os.environ).get(endpoint.api_key_env)
            if not token:
                raise CredentialError(f"environment variable {endpoint.api_key_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        self._http = httpx.Client(
            base_url=endpoint.base_url, headers=headers, timeout=endpoint.timeout, transport=transport
        )
        self.network_calls = 0
        self.cache_hits = 0
        self._count_lock = threading.Lock()

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def complete(self, prompt: str) -> str:
        ep = self.endpoint
        key = ResponseCache.key(ep.model, prompt, ep.params)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                with self._count_lock:
                    self.cache_hits += 1
                return hit
        text = self._post(prompt)
        if self.cache is not None:
            self.cache.put(key, {"model": ep.model, "prompt": prompt, "params": ep.params}, text)
        return text

    def _post(self, prompt: str) -> str:
        ep = self.endpoint
        body = {"model": ep.model, "messages": [{"role": "user", "content": prompt}], **ep.params}
        last = "no attempt made"
        for attempt in range(ep.max_attempts):
            self._limiter.acquire()
            with self._count_lock:
                self.network_calls += 1
            wait = None
            try:
                resp = self._http.post(ep.path, json=body)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}"
            else:
                if resp.status_code in (401, 403):
                    raise CredentialError(f"endpoint refused credentials (HTTP {resp.status_code})")
                if resp.status_code == 429 or resp.status_code >= 500:
                    last = f"HTTP {resp.status_code}"
                    wait = _retry_after(resp)
                elif resp.status_code >= 400:
                    raise TransportError(f"endpoint rejected the request (HTTP {resp.status_code})")
                else:
                    return _completion_text(resp)
            if attempt + 1 < ep.max_attempts:
                delay = wait if wait is not None else min(ep.backoff_max, ep.backoff_base * 2**attempt)
                log.info("retrying after %s in %.1fs", last, delay)
                self._sleep(delay)
        raise TransportError(f"giving up after {ep.max_attempts} attempts: {last}")


def _completion_text(resp: httpx.Response) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError("malformed chat-completions response") from exc
    if not isinstance(content, str):
        raise TransportError("completion content is not text")
    return content


def query_model(client: ChatClient, prompt: str) -> str:
    return client.complete(prompt)
