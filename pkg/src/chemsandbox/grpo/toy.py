"""A bigram softmax policy small enough to train with exact gradients."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError
from .objective import GroupSample, GrpoConfig, TokenSequence, grpo_terms

MAX_VOCAB = 64
MAX_LENGTH = 32


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    top = np.max(logits, axis=-1, keepdims=True)
    shifted = logits - top
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


@dataclass
class BigramPolicy:
    """Row ``prev`` of ``logits`` scores the next token; row ``vocab`` is the prompt row.

    Entries may be ``-inf`` to forbid tokens (one-hot rows are deterministic).
    """

    logits: np.ndarray
    length: int

    def __post_init__(self) -> None:
        self.logits = np.array(self.logits, dtype=float)
        v = self.logits.shape[1] if self.logits.ndim == 2 else 0
        if self.logits.shape != (v + 1, v) or not 1 <= v <= MAX_VOCAB:
            raise ConfigError(f"logits must have shape (V+1, V) with V <= {MAX_VOCAB}")
        if not 1 <= self.length <= MAX_LENGTH:
            raise ConfigError(f"length must lie in 1..{MAX_LENGTH}")

    @classmethod
    def uniform(cls, vocab: int = 16, length: int = 4) -> "BigramPolicy":
        return cls(np.zeros((vocab + 1, vocab)), length)

    @classmethod
    def from_probabilities(cls, probs, length: int) -> "BigramPolicy":
        with np.errstate(divide="ignore"):
            return cls(np.log(np.asarray(probs, dtype=float)), length)

    @property
    def vocab(self) -> int:
        return self.logits.shape[1]

    def copy(self) -> "BigramPolicy":
        return BigramPolicy(self.logits.copy(), self.length)

    def probabilities(self) -> np.ndarray:
        return np.exp(_log_softmax(self.logits))

    def prev_tokens(self, tokens, prompt: int | None = None) -> np.ndarray:
        start = self.vocab if prompt is None else prompt
        return np.concatenate([[start], np.asarray(tokens[:-1], dtype=int)]).astype(int)

    def sequence_logprobs(self, tokens, prompt: int | None = None) -> np.ndarray:
        logp = _log_softmax(self.logits)
        return logp[self.prev_tokens(tokens, prompt), np.asarray(tokens, dtype=int)]

    def sample_next(self, prev: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        cdf = np.cumsum(self.probabilities()[prev], axis=-1)
        u = rng.random(len(prev)) * cdf[:, -1]
        return np.minimum((cdf <= u[:, None]).sum(axis=1), self.vocab - 1)


@dataclass(frozen=True)
class Rollout:
    sequences: list[TokenSequence]
    logprobs: list[np.ndarray]


def toy_policy_rollout(policy: BigramPolicy, prompt: int | None, group_size: int, rng: np.random.Generator | int) -> Rollout:
    """Sample ``group_size`` sequences, recording each token's log-probability."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    start = policy.vocab if prompt is None else prompt
    prev = np.full(group_size, start, dtype=int)
    tokens = np.empty((group_size, policy.length), dtype=int)
    for t in range(policy.length):
        prev = policy.sample_next(prev, rng)
        tokens[:, t] = prev
    seqs = [TokenSequence(tuple(int(x) for x in row), (True,) * policy.length) for row in tokens]
    lps = [policy.sequence_logprobs(row, prompt) for row in tokens]
    return Rollout(seqs, lps)


@dataclass
class LearningCurve:
    rows: list[dict] = field(default_factory=list)
    policy: BigramPolicy | None = None

    def mean_rewards(self) -> list[float]:
        return [r["mean_reward"] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["step", "mean_reward", "objective", "kl"], lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()


def _logit_gradient(policy: BigramPolicy, seq: TokenSequence, token_grad: np.ndarray, prompt: int | None) -> np.ndarray:
    """Chain rule from per-token log-prob gradients to the logits table."""
    probs = policy.probabilities()
    out = np.zeros_like(policy.logits)
    prev = policy.prev_tokens(seq.tokens, prompt)
    for t, (p, tok) in enumerate(zip(prev, seq.tokens)):
        if token_grad[t] == 0.0:
            continue
        row = -probs[p] * token_grad[t]
        row[tok] += token_grad[t]
        out[p] += row
    return out


def total_variation(a: BigramPolicy, b: BigramPolicy) -> float:
    """Largest per-row total-variation distance between two policies."""
    return float(np.max(0.5 * np.abs(a.probabilities() - b.probabilities()).sum(axis=1)))


def train_toy(
    policy: BigramPolicy,
    reward_fn: Callable[[tuple[int, ...]], float],
    steps: int,
    cfg: GrpoConfig | None = None,
    lr: float = 0.1,
    seed: int = 0,
    prompt: int | None = None,
    max_grad_norm: float | None = 1.0,
) -> LearningCurve:
    """Sample a group, score it, and take one gradient-ascent step, ``steps`` times.

    One update per batch, so the sampling policy is also the old policy.
    The reference policy is the starting policy. ``max_grad_norm`` caps the
    step so that large KL weights stay numerically stable.
    """
    cfg = cfg or GrpoConfig()
    rng = np.random.default_rng(seed)
    policy = policy.copy()
    reference = policy.copy()
    curve = LearningCurve()
    for step in range(steps):
        roll = toy_policy_rollout(policy, prompt, cfg.group_size, rng)
        rewards = [float(reward_fn(s.tokens)) for s in roll.sequences]
        group = [
            GroupSample(lp, lp, reference.sequence_logprobs(s.tokens, prompt), r)
            for s, lp, r in zip(roll.sequences, roll.logprobs, rewards)
        ]
        terms = grpo_terms(group, cfg)
        grad = np.zeros_like(policy.logits)
        for s, g in zip(roll.sequences, terms.gradients):
            grad += _logit_gradient(policy, s, g, prompt)
        norm = float(np.linalg.norm(grad[np.isfinite(policy.logits)]))
        if max_grad_norm is not None and norm > max_grad_norm:
            grad *= max_grad_norm / norm
        with np.errstate(invalid="ignore"):
            policy.logits = np.where(np.isfinite(policy.logits), policy.logits + lr * grad, policy.logits)
        curve.rows.append({
            "step": step,
            "mean_reward": float(np.mean(rewards)),
            "objective": terms.objective,
            "kl": float(np.mean(terms.kl)),
        })
    curve.policy = policy
    return curve
