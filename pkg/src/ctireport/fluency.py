"""Referenceless fluency scoring with an n-gram language model.

The score for a sentence is its LM log-probability minus its unigram
log-probability, normalized by sentence length. A unigram model therefore
scores every sentence exactly zero, which doubles as the main correctness
check. The n-gram model is a desk-scale stand-in for a large pretrained
LM; anything implementing conditional_prob/unigram_prob plugs in behind
the same interface.
"""

from __future__ import annotations

import json
import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

UNK = "<unk>"

# IOC-like strings and numbers stay single tokens; everything else is
# lowercased word or single punctuation.
TOKEN_RE = re.compile(
    r"CVE-\d{4}-\d{4,}"
    r"|(?:\d{1,3}\.){3}\d{1,3}"
    r"|[0-9a-fA-F]{32,64}"
    r"|(?:[a-zA-Z0-9-]+\.)+[a-zA-Z]{2,}"
    r"|[\w']+"
    r"|[^\w\s]"
)


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in TOKEN_RE.findall(text)]


class LanguageModel(Protocol):
    def conditional_prob(self, token: str, context: Sequence[str]) -> float: ...
    def unigram_prob(self, token: str) -> float: ...
    @property
    def order(self) -> int: ...


class LmError(ValueError):
    pass


class NgramLanguageModel:
    """Additively smoothed n-gram model with backoff to lower orders.

    Observed contexts use (count + k) / (context count + k*|V|); unseen
    contexts back off one order, bottoming out at the smoothed unigram.
    """

    def __init__(self, n: int, k: float, vocab: set[str],
                 context_counts: dict[int, dict[tuple[str, ...], Counter]],
                 total_tokens: int):
        self.n = n
        self.k = k
        self.vocab = vocab
        self.context_counts = context_counts
        self.total_tokens = total_tokens

    @property
    def order(self) -> int:
        return self.n

    def _norm(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def unigram_prob(self, token: str) -> float:
        token = self._norm(token)
        count = self.context_counts[1][()][token]
        return (count + self.k) / (self.total_tokens + self.k * len(self.vocab))

    def conditional_prob(self, token: str, context: Sequence[str]) -> float:
        token = self._norm(token)
        context = tuple(self._norm(t) for t in context)[-(self.n - 1):] \
            if self.n > 1 else ()
        while context:
            order = len(context) + 1
            counts = self.context_counts.get(order, {})
            if context in counts:
                dist = counts[context]
                return (dist[token] + self.k) / \
                    (sum(dist.values()) + self.k * len(self.vocab))
            context = context[1:]
        return self.unigram_prob(token)

    def save(self, path: str | Path) -> None:
        payload = {
            "n": self.n,
            "k": self.k,
            "vocab": sorted(self.vocab),
            "total_tokens": self.total_tokens,
            "counts": [
                {"order": order,
                 "context": list(context),
                 "dist": dict(dist)}
                for order, contexts in self.context_counts.items()
                for context, dist in contexts.items()
            ],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramLanguageModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        context_counts: dict[int, dict[tuple[str, ...], Counter]] = {}
        for entry in payload["counts"]:
            order = entry["order"]
            context_counts.setdefault(order, {})[tuple(entry["context"])] = \
                Counter(entry["dist"])
        return cls(n=payload["n"], k=payload["k"], vocab=set(payload["vocab"]),
                   context_counts=context_counts,
                   total_tokens=payload["total_tokens"])


def train_ngram_lm(corpus: Iterable[Sequence[str]], n: int = 3,
                   k: float = 0.5) -> NgramLanguageModel:
    """Count-based model over tokenized sentences; vocab closed over corpus."""
    if n < 1:
        raise LmError("model order must be >= 1")
    sentences = [list(s) for s in corpus if s]
    if not sentences:
        raise LmError("training corpus is empty")

    vocab: set[str] = {UNK}
    context_counts: dict[int, dict[tuple[str, ...], Counter]] = {
        order: {} for order in range(1, n + 1)
    }
    total = 0
    for sentence in sentences:
        vocab.update(sentence)
        total += len(sentence)
        for i, token in enumerate(sentence):
            for order in range(1, n + 1):
                if i - (order - 1) < 0:
                    continue
                context = tuple(sentence[i - order + 1:i])
                dist = context_counts[order].setdefault(context, Counter())
                dist[token] += 1
    return NgramLanguageModel(n=n, k=k, vocab=vocab,
                              context_counts=context_counts, total_tokens=total)


def train_from_text(text: str, n: int = 3, k: float = 0.5) -> NgramLanguageModel:
    """Train from UTF-8 text, one sentence per line."""
    sentences = [tokenize(line) for line in text.splitlines() if line.strip()]
    return train_ngram_lm(sentences, n=n, k=k)


def sentence_logprob(lm: LanguageModel, tokens: Sequence[str]) -> float:
    if not tokens:
        raise LmError("cannot score an empty sentence")
    total = 0.0
    for i, token in enumerate(tokens):
        total += math.log(lm.conditional_prob(token, tokens[:i]))
    return total


def unigram_logprob(lm: LanguageModel, tokens: Sequence[str]) -> float:
    if not tokens:
        raise LmError("cannot score an empty sentence")
    return sum(math.log(lm.unigram_prob(t)) for t in tokens)


def slor(lm: LanguageModel, tokens: Sequence[str]) -> float:
    if not tokens:
        raise LmError("cannot score an empty sentence")
    return (sentence_logprob(lm, tokens) - unigram_logprob(lm, tokens)) / len(tokens)


@dataclass(frozen=True)
class SlorResult:
    per_sentence: tuple[float, ...]
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {"per_sentence": list(self.per_sentence),
                "mean": self.mean, "std": self.std}


def split_sentences(report_text: str) -> list[list[str]]:
    """Period/question/exclamation plus newline boundaries; table rows excluded."""
    sentences: list[list[str]] = []
    for line in report_text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("|"):
            continue
        for piece in re.split(r"[.!?]+", stripped):
            tokens = tokenize(piece)
            if tokens:
                sentences.append(tokens)
    return sentences


def report_slor(lm: LanguageModel, report_text: str) -> SlorResult:
    sentences = split_sentences(report_text)
    if not sentences:
        raise LmError("report contains no scorable sentences")
    scores = tuple(slor(lm, s) for s in sentences)
    mean = statistics.fmean(scores)
    std = statistics.pstdev(scores)
    return SlorResult(per_sentence=scores, mean=mean, std=std)
