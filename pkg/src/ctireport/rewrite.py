"""Pluggable report rewriting with a fact-preservation gate.

A rewrite candidate is accepted only if its fact recall against the
template-stage fact set stays at or above the gate threshold; otherwise
the provider is retried once and, failing that, the template rendering is
returned unchanged. Rewriting therefore never loses report content and
never aborts generation.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Optional, Protocol

import httpx

from .facts import Fact, MatchCounts, match_facts, recall
from .fluency import tokenize

DEFAULT_THRESHOLD = 0.98
DEFAULT_RETRIES = 1

PROMPT_INSTRUCTIONS = (
    "Rewrite the following threat intelligence report so that it reads "
    "fluently and naturally. Do not add, remove, or alter any facts, "
    "identifiers, names, dates, or numbers. Keep the section structure "
    "and all headings unchanged.\n\n"
)


class RewriteError(RuntimeError):
    pass


class ProviderTransportError(RewriteError):
    pass


def build_prompt(report_text: str) -> str:
    """Fixed instruction block followed by the verbatim report."""
    if not report_text:
        raise RewriteError("cannot build a prompt for an empty report")
    return PROMPT_INSTRUCTIONS + report_text


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class RewriteProvider(Protocol):
    kind: str

    def complete(self, prompt: str) -> str: ...


class PassthroughProvider:
    """Identity provider: the rewrite equals the template rendering."""

    kind = "passthrough"

    def complete(self, prompt: str) -> str:
        return prompt[len(PROMPT_INSTRUCTIONS):]


class ReplayProvider:
    """Replays responses recorded as JSON lines of (prompt hash, response).

    The CI default: remote calls never run in tests.
    """

    kind = "recorded-replay"

    def __init__(self, transcript_path: str | Path):
        self.transcript_path = Path(transcript_path)
        self._responses: dict[str, str] = {}
        with open(self.transcript_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._responses[entry["prompt_hash"]] = entry["response"]

    def complete(self, prompt: str) -> str:
        key = prompt_hash(prompt)
        if key not in self._responses:
            raise ProviderTransportError(
                f"no recorded response for prompt hash {key[:12]}…")
        return self._responses[key]


class RemoteChatProvider:
    """Generic chat-completion HTTP+JSON provider, temperature 0.

    The credential comes from an environment variable, never from a file.
    """

    kind = "remote-chat"

    def __init__(self, endpoint: str, model: str,
                 api_key_env: str = "CTIREPORT_API_KEY", timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise ProviderTransportError(
                f"credential env var {self.api_key_env} is not set")
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        try:
            response = httpx.post(
                self.endpoint, json=payload, timeout=self.timeout,
                headers={"Authorization": f"Bearer {api_key}"},
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderTransportError(f"remote provider failed: {exc}") from exc


@dataclass(frozen=True)
class RewriteResult:
    text: str
    provider_kind: str
    prompt_tokens: int
    completion_tokens: int
    estimated_cost: Decimal
    gate: str  # "passed", "retried(n)", or "fell_back"
    fact_recall: float
    counts: Optional[MatchCounts] = None
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "provider_kind": self.provider_kind,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "estimated_cost": str(self.estimated_cost),
            "gate": self.gate,
            "fact_recall": self.fact_recall,
            "counts": self.counts.to_dict() if self.counts else None,
            "warning": self.warning,
        }


def estimate_cost(prompt_tokens: int, completion_tokens: int,
                  rate_in: Decimal | float | str,
                  rate_out: Decimal | float | str) -> Decimal:
    if prompt_tokens < 0 or completion_tokens < 0:
        raise ValueError("token counts must be nonnegative")
    return (prompt_tokens * Decimal(str(rate_in))
            + completion_tokens * Decimal(str(rate_out)))


def rewrite(report_text: str, provider: RewriteProvider,
            fact_set: Iterable[Fact],
            known_names: Iterable[str] = (),
            threshold: float = DEFAULT_THRESHOLD,
            retries: int = DEFAULT_RETRIES,
            rate_in: Decimal | float | str = "0.0000015",
            rate_out: Decimal | float | str = "0.000002") -> RewriteResult:
    """Rewrite through the provider, gated on fact recall.

    On a failed gate or transport error the provider is retried; once the
    attempts are exhausted the template text is returned with
    gate="fell_back". The result text is never empty.
    """
    facts = list(fact_set)
    prompt = build_prompt(report_text)
    prompt_tokens = len(tokenize(prompt))

    warning: Optional[str] = None
    attempts = 1 + max(0, retries)
    for attempt in range(attempts):
        try:
            candidate = provider.complete(prompt)
        except ProviderTransportError as exc:
            warning = str(exc)
            continue
        counts = match_facts(facts, candidate, known_names=known_names)
        candidate_recall = recall(counts)
        if candidate_recall is None:
            candidate_recall = 1.0
        if candidate and candidate_recall >= threshold:
            gate = "passed" if attempt == 0 else f"retried({attempt})"
            completion_tokens = len(tokenize(candidate))
            return RewriteResult(
                text=candidate,
                provider_kind=provider.kind,
                prompt_tokens=prompt_tokens,
                completion_tokens=completion_tokens,
                estimated_cost=estimate_cost(prompt_tokens, completion_tokens,
                                             rate_in, rate_out),
                gate=gate,
                fact_recall=candidate_recall,
                counts=counts,
                warning=warning,
            )
        warning = (f"rewrite candidate failed fact gate "
                   f"(recall {candidate_recall:.3f} < {threshold})")

    counts = match_facts(facts, report_text, known_names=known_names)
    fallback_recall = recall(counts)
    return RewriteResult(
        text=report_text,
        provider_kind=provider.kind,
        prompt_tokens=prompt_tokens,
        completion_tokens=0,
        estimated_cost=estimate_cost(prompt_tokens, 0, rate_in, rate_out),
        gate="fell_back",
        fact_recall=fallback_recall if fallback_recall is not None else 1.0,
        counts=counts,
        warning=warning,
    )
