"""Pluggable backends: gold/corruption test oracles and an HTTP client.

A backend maps a rendered model input to generated text (``generate``) or to
a chosen candidate word (``fill_mask``). The wire protocol for real models:

    POST /generate  {"input": str, "max_new_units": int} -> {"output": str}
    POST /fill-mask {"input": str, "candidates": [str]}  -> {"chosen": str, "scores": {...}}
    GET  /health                                         -> {"status": "ok", "model": str}
"""
from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import requests as requests_lib

from .errors import TransportError, ValidationError
from .parsing import SENTINEL_RE
from .prompting import PromptRendering, Regime, sentinel

GENERATE = "generate"
FILL_MASK = "fill_mask"


@dataclass(frozen=True)
class BackendRequest:
    kind: str
    example_id: str
    input: str
    candidate_words: Optional[list[str]] = None
    max_output_units: int = 256

    def __post_init__(self):
        if self.kind not in (GENERATE, FILL_MASK):
            raise ValidationError(f"unknown request kind: {self.kind!r}")
        if self.kind == FILL_MASK and self.input.count("[MASK]") != 1:
            raise ValidationError("fill_mask input must contain exactly one [MASK] slot")


@dataclass
class BackendResponse:
    output: str = ""
    chosen_word: Optional[str] = None
    scores: dict[str, float] = field(default_factory=dict)
    latency_ms: float = 0.0


class Backend:
    def respond(self, request: BackendRequest) -> BackendResponse:
        raise NotImplementedError


@dataclass(frozen=True)
class GoldEntry:
    target: str
    regime: Regime


class GoldStore:
    """Expected targets keyed by example id; feeds the test-double backends."""

    def __init__(self):
        self._entries: dict[str, GoldEntry] = {}

    @classmethod
    def from_renderings(cls, renderings: Sequence[PromptRendering]) -> "GoldStore":
        store = cls()
        for r in renderings:
            store._entries[r.example_id] = GoldEntry(r.expected_target, r.regime)
        return store

    def entry(self, example_id: str) -> GoldEntry:
        if example_id not in self._entries:
            raise ValidationError(f"unknown example id: {example_id!r}")
        return self._entries[example_id]


class GoldOracleBackend(Backend):
    """Echoes the exact expected target; the identity pipeline."""

    def __init__(self, store: GoldStore):
        self.store = store

    def respond(self, request: BackendRequest) -> BackendResponse:
        entry = self.store.entry(request.example_id)
        if request.kind == FILL_MASK:
            if request.candidate_words and entry.target not in request.candidate_words:
                raise ValidationError(
                    f"gold word {entry.target!r} not among candidates for {request.example_id}"
                )
            return BackendResponse(
                chosen_word=entry.target,
                scores={entry.target: 1.0},
            )
        return BackendResponse(output=entry.target)


def _corrupt_seq2seq_target(entry: GoldEntry, rng: random.Random, rate: float, joiner: str = "; ",
                            separator: str = " | ") -> str:
    """Delete each rendered triplet independently with probability ``rate``."""
    if entry.regime is Regime.TRADITIONAL:
        clauses = [c for c in entry.target.split(joiner) if c]
        kept = [c for c in clauses if rng.random() >= rate]
        return joiner.join(kept)
    if entry.regime is Regime.MASK:
        idx = entry.target.rfind(separator)
        if idx < 0:
            idx, separator = 0, ""
        prefix, labels = entry.target[:idx], entry.target[idx + len(separator):]
        clauses = [c for c in labels.split(joiner) if c]
        kept = [c for c in clauses if rng.random() >= rate]
        return prefix + separator + joiner.join(kept)
    if entry.regime is Regime.SENTINEL:
        fields = [seg.strip() for seg in SENTINEL_RE.split(entry.target)[1:]]
        while fields and not fields[-1]:
            fields.pop()
        groups = [fields[i : i + 3] for i in range(0, len(fields), 3)]
        kept = [g for g in groups if len(g) == 3 and rng.random() >= rate]
        pieces = []
        for k, g in enumerate(kept):
            pieces += [f"{sentinel(3 * k + j)} {g[j]}" for j in range(3)]
        pieces.append(sentinel(3 * len(kept)))
        return " ".join(pieces)
    raise ValidationError(f"cannot corrupt regime {entry.regime.value}")


class CorruptionOracleBackend(Backend):
    """Gold target with seeded random triplet deletions (generate) or word
    flips (fill_mask); deterministic per (seed, example id)."""

    def __init__(self, store: GoldStore, rate: float, seed: int = 0):
        if not 0.0 <= rate <= 1.0:
            raise ValidationError(f"corruption rate must be in [0,1], got {rate}")
        self.store = store
        self.rate = rate
        self.seed = seed

    def _rng(self, example_id: str) -> random.Random:
        return random.Random(f"{self.seed}:{example_id}")

    def respond(self, request: BackendRequest) -> BackendResponse:
        entry = self.store.entry(request.example_id)
        rng = self._rng(request.example_id)
        if request.kind == FILL_MASK:
            word = entry.target
            if rng.random() < self.rate:
                others = [w for w in (request.candidate_words or []) if w != word]
                if others:
                    word = rng.choice(others)
            return BackendResponse(chosen_word=word, scores={word: 1.0})
        return BackendResponse(output=_corrupt_seq2seq_target(entry, rng, self.rate))


class HttpBackend(Backend):
    """JSON-over-HTTP client with bounded retries and exponential backoff."""

    def __init__(self, base_url: str, timeout: float = 60.0, retries: int = 2, backoff: float = 0.5):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.session = requests_lib.Session()

    def health(self) -> dict:
        resp = self.session.get(f"{self.base_url}/health", timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()

    def _post(self, path: str, body: dict, example_id: str) -> dict:
        last_error = "unknown"
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.session.post(f"{self.base_url}{path}", json=body, timeout=self.timeout)
            except requests_lib.RequestException as exc:
                last_error = str(exc)
                continue
            if resp.status_code == 200:
                try:
                    return resp.json()
                except ValueError:
                    raise TransportError(
                        f"malformed JSON response from {path}", example_id
                    ) from None
            last_error = f"HTTP {resp.status_code}"
        raise TransportError(
            f"{path} failed after {self.retries + 1} attempts: {last_error}", example_id
        )

    def respond(self, request: BackendRequest) -> BackendResponse:
        start = time.monotonic()
        if request.kind == FILL_MASK:
            payload = self._post(
                "/fill-mask",
                {"input": request.input, "candidates": request.candidate_words or []},
                request.example_id,
            )
            if "chosen" not in payload:
                raise TransportError("fill-mask response missing 'chosen'", request.example_id)
            chosen = payload["chosen"]
            if request.candidate_words and chosen not in request.candidate_words:
                raise TransportError(
                    f"server chose {chosen!r}, not a supplied candidate", request.example_id
                )
            return BackendResponse(
                chosen_word=chosen,
                scores=payload.get("scores", {}),
                latency_ms=1000 * (time.monotonic() - start),
            )
        payload = self._post(
            "/generate",
            {"input": request.input, "max_new_units": request.max_output_units},
            request.example_id,
        )
        if "output" not in payload:
            raise TransportError("generate response missing 'output'", request.example_id)
        return BackendResponse(
            output=payload["output"],
            latency_ms=1000 * (time.monotonic() - start),
        )


def run_backend(
    backend: Backend,
    requests: Sequence[BackendRequest],
    concurrency: int = 8,
) -> dict[str, BackendResponse]:
    """Run requests with bounded parallelism; results keyed by example id so
    evaluation order never depends on completion order."""
    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        responses = list(pool.map(backend.respond, requests))
    return {req.example_id: resp for req, resp in zip(requests, responses)}
