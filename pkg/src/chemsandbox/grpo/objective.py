"""Token NLL, group-normalized advantages and the clipped GRPO surrogate.

Every function returns the analytic gradient with respect to the policy's
per-token log-probabilities alongside its value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, EmptyMask, GroupTooSmall, NonFiniteLogprob, ShapeMismatch


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[int, ...]
    loss_mask: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.loss_mask):
            raise ShapeMismatch(f"{len(self.tokens)} tokens but {len(self.loss_mask)} mask entries")

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens), "loss_mask": [bool(m) for m in self.loss_mask]}


@dataclass(frozen=True)
class GrpoConfig:
    epsilon: float = 0.2
    beta: float = 0.04
    group_size: int = 8
    advantage_epsilon: float = 1e-8
    kl_granularity: str = "token"  # "token": sum of per-token penalties; "sequence": penalty of the summed log-ratio

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.beta < 0 or not np.isfinite(self.beta):
            raise ConfigError("beta must be finite and non-negative")
        if self.group_size < 2:
            raise ConfigError("group_size must be at least 2")
        if self.advantage_epsilon <= 0:
            raise ConfigError("advantage_epsilon must be positive")
        if self.kl_granularity not in ("token", "sequence"):
            raise ConfigError("kl_granularity must be 'token' or 'sequence'")


@dataclass(frozen=True)
class GroupSample:
    logprob_new: np.ndarray
    logprob_old: np.ndarray
    logprob_ref: np.ndarray
    reward: float
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        arrays = [np.asarray(a, dtype=float) for a in (self.logprob_new, self.logprob_old, self.logprob_ref)]
        n = len(arrays[0])
        if any(a.ndim != 1 or len(a) != n for a in arrays):
            raise ShapeMismatch("logprob vectors of one sample must be 1-D and equally long")
        mask = np.ones(n, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if mask.shape != (n,):
            raise ShapeMismatch("mask length differs from logprob length")
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise NonFiniteLogprob("log-probabilities must be finite")
        if not np.isfinite(self.reward):
            raise NonFiniteLogprob("reward must be finite")
        object.__setattr__(self, "logprob_new", arrays[0])
        object.__setattr__(self, "logprob_old", arrays[1])
        object.__setattr__(self, "logprob_ref", arrays[2])
        object.__setattr__(self, "mask", mask)


def sft_loss(batch: list[TokenSequence], logprobs) -> tuple[float, list[np.ndarray]]:
    """Mean negative log-likelihood over loss-masked tokens.

    The gradient is -1/N on each counted token's own log-probability.
    """
    if len(batch) != len(logprobs):
        raise ShapeMismatch(f"{len(batch)} sequences but {len(logprobs)} logprob rows")
    rows = []
    for seq, lp in zip(batch, logprobs):
        lp = np.asarray(lp, dtype=float)
        if lp.shape != (len(seq.tokens),):
            raise ShapeMismatch("logprob row length differs from its sequence")
        rows.append((lp, np.asarray(seq.loss_mask, dtype=bool)))
    n = sum(int(m.sum()) for _, m in rows)
    if n == 0:
        raise EmptyMask("no token is counted by the loss mask")
    total = 0.0
    for lp, m in rows:
        total += float(lp[m].sum())
    grads = [np.where(m, -1.0 / n, 0.0) for _, m in rows]
    return -total / n, grads


def group_advantages(rewards, cfg: GrpoConfig | None = None) -> np.ndarray:
    """Rewards centred on the group mean and divided by (population std + guard)."""
    cfg = cfg or GrpoConfig()
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or len(r) < 2:
        raise GroupTooSmall(f"a group needs at least 2 rewards, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise NonFiniteLogprob("rewards must be finite")
    centred = r - r.mean()
    return centred / (r.std() + cfg.advantage_epsilon)


def kl_penalty(u: np.ndarray) -> np.ndarray:
    """Per-token k3 estimator exp(-u) - 1 + u, u = new - ref; never negative."""
    return np.expm1(-u) + u


@dataclass(frozen=True)
class ObjectiveTerms:
    objective: float
    gradients: list[np.ndarray]
    ratios: np.ndarray
    advantages: np.ndarray
    surrogate: np.ndarray
    kl: np.ndarray


def grpo_terms(group: list[GroupSample], cfg: GrpoConfig | None = None) -> ObjectiveTerms:
    cfg = cfg or GrpoConfig()
    adv = group_advantages([s.reward for s in group], cfg)
    g = len(group)
    ratios = np.empty(g)
    surrogate = np.empty(g)
    kl = np.empty(g)
    grads = []
    lo, hi = 1.0 - cfg.epsilon, 1.0 + cfg.epsilon
    for i, s in enumerate(group):
        m = s.mask
        rho = float(np.exp(np.sum((s.logprob_new - s.logprob_old)[m])))
        unclipped = adv[i] * rho
        clipped = adv[i] * min(max(rho, lo), hi)
        u = s.logprob_new - s.logprob_ref
        ratios[i] = rho
        surrogate[i] = min(unclipped, clipped)
        if cfg.kl_granularity == "token":
            kl[i] = float(np.sum(kl_penalty(u)[m]))
            d_kl = -np.expm1(-u)
        else:
            u_seq = float(np.sum(u[m]))
            kl[i] = float(kl_penalty(np.array([u_seq]))[0])
            d_kl = np.full_like(u, -np.expm1(-u_seq))
        # d(rho)/d(new_t) = rho on every masked token; the clipped branch is flat
        d_surr = unclipped if unclipped <= clipped else 0.0
        grads.append(np.where(m, (d_surr - cfg.beta * d_kl) / g, 0.0))
    objective = float(np.mean(surrogate - cfg.beta * kl))
    return ObjectiveTerms(objective, grads, ratios, adv, surrogate, kl)


def grpo_objective(group: list[GroupSample], cfg: GrpoConfig | None = None) -> tuple[float, list[np.ndarray]]:
    """Clipped surrogate minus beta times the KL estimate, averaged over the group."""
    terms = grpo_terms(group, cfg)
    return terms.objective, terms.gradients
