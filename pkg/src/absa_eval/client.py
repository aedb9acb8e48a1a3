"""Chat-completion client: greedy decoding, persistent response cache,
retries with exponential backoff, bounded parallel batches.

Requests are keyed by a digest of (model, full prompt text, decoding
params); a cache hit never touches the network, so repeated runs and
offline re-scoring replay a frozen experiment bit-identically.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, Union

import httpx

from .errors import AuthFailure, EndpointError, EndpointUnreachable, ResponseTruncated
from .prompts import PromptPackage

log = logging.getLogger(__name__)

ENV_BASE_URL = "ABSA_EVAL_ENDPOINT"
ENV_TOKEN = "ABSA_EVAL_TOKEN"

#: Greedy decoding expressed in wire terms.
TEMPERATURE = 0.0


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    max_tokens: int = 512
    timeout: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    auth_token: str | None = None
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


def apply_env_overrides(cfg: EndpointConfig) -> EndpointConfig:
    """Endpoint URL and token may be overridden by environment variables."""
    url = os.environ.get(ENV_BASE_URL)
    token = os.environ.get(ENV_TOKEN)
    if url:
        cfg = replace(cfg, base_url=url)
    if token:
        cfg = replace(cfg, auth_token=token)
    return cfg


@dataclass(frozen=True)
class CompletionRecord:
    digest: str
    model: str
    prompt: str
    response: str
    latency: float
    attempts: int
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "digest": self.digest,
            "model": self.model,
            "prompt": self.prompt,
            "response": self.response,
            "latency": self.latency,
            "attempts": self.attempts,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompletionRecord":
        return cls(**{k: d[k] for k in ("digest", "model", "prompt", "response", "latency", "attempts", "timestamp")})


def request_digest(model: str, prompt: str, max_tokens: int) -> str:
    payload = json.dumps(
        {"model": model, "prompt": prompt, "temperature": TEMPERATURE, "max_tokens": max_tokens},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class BatchItemError:
    index: int
    kind: str
    message: str


BatchResult = Union[CompletionRecord, BatchItemError]

_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


class CompletionClient:
    """Thread-safe client over one endpoint. ``offline=True`` serves cache only."""

    def __init__(self, cfg: EndpointConfig, cache_dir: str | Path, offline: bool = False):
        self.cfg = cfg
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.offline = offline
        self._http = httpx.Client(timeout=cfg.timeout)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "CompletionClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- cache ------------------------------------------------------------

    def _cache_path(self, digest: str) -> Path:
        return self.cache_dir / f"{digest}.json"

    def _cache_get(self, digest: str) -> CompletionRecord | None:
        path = self._cache_path(digest)
        if not path.is_file():
            return None
        return CompletionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def _cache_put(self, record: CompletionRecord) -> None:
        path = self._cache_path(record.digest)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    # -- completion -------------------------------------------------------

    def complete(self, pkg: PromptPackage | str) -> CompletionRecord:
        prompt = pkg.render() if isinstance(pkg, PromptPackage) else pkg
        digest = request_digest(self.cfg.model, prompt, self.cfg.max_tokens)
        cached = self._cache_get(digest)
        if cached is not None:
            return cached
        if self.offline:
            raise EndpointUnreachable(f"offline mode and no cached response for {digest[:12]}")
        record = self._request(digest, prompt)
        self._cache_put(record)
        return record

    def _request(self, digest: str, prompt: str) -> CompletionRecord:
        url = self.cfg.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": TEMPERATURE,
            "max_tokens": self.cfg.max_tokens,
        }
        headers = {}
        if self.cfg.auth_token:
            headers["Authorization"] = f"Bearer {self.cfg.auth_token}"

        started = time.perf_counter()
        last_error = "no attempt made"
        attempts = 0
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff_base * 2 ** (attempt - 1))
            attempts = attempt + 1
            try:
                resp = self._http.post(url, json=payload, headers=headers)
            except httpx.HTTPError as e:
                last_error = f"transport error: {e}"
                log.debug("attempt %d failed: %s", attempts, last_error)
                continue
            if resp.status_code in (401, 403):
                raise AuthFailure(f"endpoint returned {resp.status_code}")
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                log.debug("attempt %d failed: %s", attempts, last_error)
                continue
            if resp.status_code != 200:
                raise EndpointError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                body = resp.json()
                choice = body["choices"][0]
                content = choice["message"]["content"]
            except (KeyError, IndexError, ValueError) as e:
                raise EndpointError(f"malformed completion response: {e}") from None
            if choice.get("finish_reason") == "length":
                raise ResponseTruncated(f"completion hit the {self.cfg.max_tokens}-token limit")
            return CompletionRecord(
                digest=digest,
                model=self.cfg.model,
                prompt=prompt,
                response=content,
                latency=time.perf_counter() - started,
                attempts=attempts,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
        raise EndpointUnreachable(f"gave up after {attempts} attempts: {last_error}")

    def batch_complete(self, pkgs: Sequence[PromptPackage | str]) -> list[BatchResult]:
        """Completes all packages with bounded parallelism.

        Output order matches input order; per-item failures are returned in
        place instead of aborting the batch.
        """
        def one(indexed) -> BatchResult:
            i, pkg = indexed
            try:
                return self.complete(pkg)
            except Exception as e:  # noqa: BLE001 - aggregated per item
                return BatchItemError(i, type(e).__name__, str(e))

        with ThreadPoolExecutor(max_workers=self.cfg.max_in_flight) as pool:
            return list(pool.map(one, enumerate(pkgs)))
