"""Interpolated add-k word n-gram language model.

Trained on the original corpus only, so transformed garble scores as unusual.
The conditional probability of a token given its context is a fixed-weight
interpolation over orders 1..n, each order add-k smoothed:

    P(w | ctx) = sum_m lambda_m * (c_m(ctx_m w) + k) / (c_m(ctx_m) + k * V)

where ctx_m is the length (m-1) suffix of the context, V the outcome
vocabulary (training tokens plus </s> and <unk>, never <s>), and the lambdas
default to weights proportional to the order. Each per-order term is a proper
distribution over V, so the mixture sums to one for any context; that
invariant is checked directly in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .textutils import tokens

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"


class ModelError(ValueError):
    pass


def lm_tokens(text: str) -> list[str]:
    return [t.lower() for t in tokens(text)]


@dataclass
class NgramModel:
    order: int
    k: float
    lambdas: tuple[float, ...]
    vocab: frozenset[str]  # outcome vocabulary (includes EOS and UNK, not BOS)
    counts: tuple[dict, ...] = field(repr=False)  # counts[m-1]: m-gram -> count
    context_totals: tuple[dict, ...] = field(repr=False)

    def _map(self, token: str) -> str:
        if token == BOS or token in self.vocab:
            return token
        return UNK

    def prob(self, context: tuple[str, ...], token: str) -> float:
        """Interpolated P(token | context); context is the raw preceding tokens."""
        token = self._map(token)
        context = tuple(self._map(t) for t in context)
        v = len(self.vocab)
        total = 0.0
        for m in range(1, self.order + 1):
            ctx = context[len(context) - (m - 1):] if m > 1 else ()
            gram_count = self.counts[m - 1].get(ctx + (token,), 0)
            ctx_count = self.context_totals[m - 1].get(ctx, 0)
            total += self.lambdas[m - 1] * (gram_count + self.k) / (ctx_count + self.k * v)
        return total

    def log_perplexity(self, text: str) -> float | None:
        """Mean negative log-probability per predicted position; None if wordless."""
        words = lm_tokens(text)
        if not words:
            return None
        sequence = [BOS] * (self.order - 1) + words + [EOS]
        nll = 0.0
        predicted = 0
        for i in range(self.order - 1, len(sequence)):
            context = tuple(sequence[i - (self.order - 1):i])
            nll -= math.log(self.prob(context, sequence[i]))
            predicted += 1
        return nll / predicted


def default_lambdas(order: int) -> tuple[float, ...]:
    total = order * (order + 1) / 2
    return tuple(m / total for m in range(1, order + 1))


def train_lm(
    texts: list[str],
    order: int = 3,
    k: float = 0.1,
    lambdas: tuple[float, ...] | None = None,
) -> NgramModel:
    if order < 1:
        raise ModelError("order must be >= 1")
    if k <= 0:
        raise ModelError("smoothing k must be positive")
    lambdas = lambdas or default_lambdas(order)
    if len(lambdas) != order or abs(sum(lambdas) - 1.0) > 1e-9:
        raise ModelError("lambdas must have one weight per order and sum to 1")

    counts: list[dict] = [{} for _ in range(order)]
    context_totals: list[dict] = [{} for _ in range(order)]
    vocab: set[str] = {EOS, UNK}
    any_tokens = False
    for text in texts:
        words = lm_tokens(text)
        if not words:
            continue
        any_tokens = True
        vocab.update(words)
        sequence = [BOS] * (order - 1) + words + [EOS]
        for i in range(order - 1, len(sequence)):
            for m in range(1, order + 1):
                gram = tuple(sequence[i - m + 1:i + 1])
                ctx = gram[:-1]
                counts[m - 1][gram] = counts[m - 1].get(gram, 0) + 1
                context_totals[m - 1][ctx] = context_totals[m - 1].get(ctx, 0) + 1
    if not any_tokens:
        raise ModelError("empty corpus: no trainable text")

    return NgramModel(
        order=order,
        k=k,
        lambdas=tuple(lambdas),
        vocab=frozenset(vocab),
        counts=tuple(counts),
        context_totals=tuple(context_totals),
    )
