"""Packing of query states and transition tuples into model tokens.

Token layout (20 dims, fixed):

====  =========================================
dims  content
====  =========================================
0:6   normalized observation (query s or transition s)
6     action, damper fraction in [0, 1]
7     reward divided by the dataset reward scale
8:14  normalized successor observation
14    token type flag: 1.0 for context, 0.0 for query
15:20 zero padding
====  =========================================

A sequence is ``[query token, context token 1, ..., context token j]`` with
positions indexed from 0, so the causal model's output at position j is the
prediction conditioned on the first j context elements.
"""

from __future__ import annotations

import numpy as np

from ..env.mdp import TransitionTuple, ZoneObservation
from ..env.norm import NormStats, denormalize_observation, normalize_observation

TOKEN_DIM = 20
FLAG_INDEX = 14
TOKEN_LAYOUT_VERSION = 1


class ContextTooLong(ValueError):
    pass


def query_token(s_query: np.ndarray, stats: NormStats) -> np.ndarray:
    tok = np.zeros(TOKEN_DIM, dtype=np.float32)
    tok[0:6] = normalize_observation(np.asarray(s_query, dtype=np.float64), stats)
    return tok


def context_token(
    s: np.ndarray, a: float, r: float, s_next: np.ndarray,
    stats: NormStats, reward_scale: float,
) -> np.ndarray:
    tok = np.zeros(TOKEN_DIM, dtype=np.float32)
    tok[0:6] = normalize_observation(np.asarray(s, dtype=np.float64), stats)
    tok[6] = a
    tok[7] = r / reward_scale
    tok[8:14] = normalize_observation(np.asarray(s_next, dtype=np.float64), stats)
    tok[FLAG_INDEX] = 1.0
    return tok


def tokenize(
    s_query: np.ndarray,
    context: list[TransitionTuple] | list[tuple],
    stats: NormStats,
    reward_scale: float,
    max_seq: int = 256,
) -> np.ndarray:
    """Build a (1 + len(context), 20) float32 token sequence."""
    if len(context) + 1 > max_seq:
        raise ContextTooLong(
            f"context of {len(context)} transitions exceeds max sequence {max_seq}"
        )
    seq = np.zeros((1 + len(context), TOKEN_DIM), dtype=np.float32)
    seq[0] = query_token(s_query, stats)
    for j, tr in enumerate(context, start=1):
        if isinstance(tr, TransitionTuple):
            s, a, r, sn = tr.s.as_vector(), tr.a, tr.r, tr.s_next.as_vector()
        else:
            s, a, r, sn = tr
        seq[j] = context_token(s, a, r, sn, stats, reward_scale)
    return seq


def detokenize(
    seq: np.ndarray, stats: NormStats, reward_scale: float
) -> tuple[np.ndarray, list[tuple[np.ndarray, float, float, np.ndarray]]]:
    """Invert tokenize: returns (s_query, [(s, a, r, s_next), ...])."""
    seq = np.asarray(seq, dtype=np.float64)
    s_query = denormalize_observation(seq[0, 0:6], stats)
    out = []
    for j in range(1, len(seq)):
        tok = seq[j]
        if tok[FLAG_INDEX] != 1.0:
            raise ValueError(f"token {j} lacks the context flag")
        out.append(
            (
                denormalize_observation(tok[0:6], stats),
                float(tok[6]),
                float(tok[7]) * reward_scale,
                denormalize_observation(tok[8:14], stats),
            )
        )
    return s_query, out
