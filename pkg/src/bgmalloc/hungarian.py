"""Maximum-weight perfect matching on a complete square bipartite graph.

Kuhn-Munkres with explicit vertex labels: keep a feasible labeling
``l(v) + l(r) >= d[v, r]``, grow an alternating tree inside the equality
subgraph, relabel by the smallest slack when the tree is blocked, and
augment along the stored predecessor chain once a free right vertex is
reached. Ties go to the lowest index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TOL = 1e-9


class LabelingError(RuntimeError):
    """A labeling invariant was violated (an algorithm bug, never user error)."""


@dataclass
class MatchingState:
    """Labels, partial matching and the S/T frontier of the alternating tree.

    ``match_left[v]`` is the right vertex matched to left vertex ``v`` or -1;
    ``match_right`` is its inverse. ``S``/``T`` are boolean masks.
    """

    left_labels: np.ndarray
    right_labels: np.ndarray
    match_left: np.ndarray
    match_right: np.ndarray
    S: np.ndarray
    T: np.ndarray
    # pred[r]: left vertex through which right vertex r joined T
    pred: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return len(self.left_labels)

    def slack(self, weights: np.ndarray) -> np.ndarray:
        return self.left_labels[:, None] + self.right_labels[None, :] - weights

    def is_feasible(self, weights: np.ndarray, tol: float = TOL) -> bool:
        return bool(np.all(self.slack(weights) >= -tol))

    def matched_pairs(self) -> list[tuple[int, int]]:
        return [(v, int(r)) for v, r in enumerate(self.match_left) if r >= 0]


@dataclass(frozen=True)
class PerfectMatching:
    pairs: tuple[int, ...]  # pairs[v] = right vertex of left vertex v (0-based)
    total_weight: float

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.pairs))


def _square(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"need a square weight matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def initial_labeling(weights) -> MatchingState:
    """Row maxima on the left, zeros on the right, nothing matched."""
    w = _square(weights)
    n = w.shape[0]
    return MatchingState(
        left_labels=w.max(axis=1) if n else np.zeros(0),
        right_labels=np.zeros(n),
        match_left=np.full(n, -1, dtype=int),
        match_right=np.full(n, -1, dtype=int),
        S=np.zeros(n, dtype=bool),
        T=np.zeros(n, dtype=bool),
        pred=np.full(n, -1, dtype=int),
    )


def equality_subgraph(weights, state: MatchingState, tol: float = TOL) -> set[tuple[int, int]]:
    """Edges ``(v, r)`` whose slack is zero within ``tol``."""
    w = _square(weights)
    slack = state.slack(w)
    if np.any(slack < -tol):
        v, r = np.argwhere(slack < -tol)[0]
        raise LabelingError(f"infeasible labeling at edge ({v}, {r}): slack {slack[v, r]:.3g}")
    return {(int(v), int(r)) for v, r in np.argwhere(np.abs(slack) <= tol)}


def neighbourhood(weights, state: MatchingState, tol: float = TOL) -> np.ndarray:
    """Mask of right vertices joined to S by an equality edge."""
    w = _square(weights)
    slack = state.slack(w)[state.S]
    return np.any(np.abs(slack) <= tol, axis=0) if slack.size else np.zeros(state.n, dtype=bool)


def relabel(weights, state: MatchingState, tol: float = TOL) -> float:
    """Shift labels by the minimum slack between S and the complement of T.

    Lowers every label in S and raises every label in T by that amount,
    in place, and returns it. Only valid once the frontier is saturated.
    """
    w = _square(weights)
    if not state.S.any():
        raise LabelingError("relabel called with empty S")
    if state.T.all():
        raise LabelingError("relabel called with T covering every right vertex")
    slack = state.slack(w)[np.ix_(state.S, ~state.T)]
    eps = float(slack.min())
    if eps <= tol:
        raise LabelingError(f"non-positive relabel step {eps:.3g}: frontier not saturated")
    state.left_labels[state.S] -= eps
    state.right_labels[state.T] += eps
    return eps


def solve(
    weights,
    on_step: Callable[[np.ndarray, MatchingState], None] | None = None,
    tol: float = TOL,
) -> PerfectMatching:
    """Maximum-weight perfect matching of a square matrix.

    Weights are normalised by their largest magnitude before solving so the
    equality tolerance is relative; the reported total uses the raw weights.
    ``on_step`` is called with the normalised weights and the live state after
    each frontier growth, relabel and augmentation (testing hook).

    Runs in O(n^3): per augmentation, each left vertex enters S at most once
    and its slack row is folded into the per-column minimum in O(n).
    """
    raw = _square(weights)
    n = raw.shape[0]
    if n == 0:
        return PerfectMatching((), 0.0)
    scale = float(np.max(np.abs(raw)))
    w = raw / scale if scale > 0 else raw.copy()

    state = initial_labeling(w)
    lx, ly = state.left_labels, state.right_labels
    match_left, match_right = state.match_left, state.match_right
    S, T, pred = state.S, state.T, state.pred

    for root in range(n):
        S[:] = False
        T[:] = False
        pred[:] = -1
        S[root] = True
        # min slack to each right vertex from S, and the S vertex attaining it
        col_slack = lx[root] + ly - w[root]
        col_arg = np.full(n, root, dtype=int)

        while True:
            free_t = np.flatnonzero(~T & (col_slack <= tol))
            if free_t.size == 0:
                # frontier saturated: N(S) == T
                cand = np.where(T, np.inf, col_slack)
                eps = float(cand.min())
                if eps <= tol:
                    raise LabelingError(f"non-positive relabel step {eps:.3g}")
                lx[S] -= eps
                ly[T] += eps
                col_slack[~T] -= eps
                if on_step is not None:
                    on_step(w, state)
                continue

            r = int(free_t[0])
            T[r] = True
            pred[r] = col_arg[r]
            u = match_right[r]
            if u < 0:
                # augment along the alternating path ending at r
                while r >= 0:
                    v = pred[r]
                    prev = match_left[v]
                    match_left[v] = r
                    match_right[r] = v
                    r = prev
                if on_step is not None:
                    on_step(w, state)
                break

            S[u] = True
            row = lx[u] + ly - w[u]
            better = ~T & (row < col_slack)
            col_slack[better] = row[better]
            col_arg[better] = u
            if on_step is not None:
                on_step(w, state)

    pairs = tuple(int(r) for r in match_left)
    total = float(raw[np.arange(n), match_left].sum())
    return PerfectMatching(pairs, total)

