"""Collapse the K subchannels of each subframe into one macro-vertex.

The smooth aggregation ``(1/beta) * log(sum_k exp(beta * c_k))`` over the
subchannels of a subframe tends to their maximum as beta grows; here the
limit is taken exactly, and the maximising subchannel is remembered so a
subframe-level matching can be turned back into concrete subchannels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Collection

import numpy as np

from .channel import as_weight_array
from .grid import ResourceGrid


class SubchannelExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ReducedWeights:
    """Per-subframe best weight ``d`` (rows x L) and its 1-based subchannel."""

    d: np.ndarray
    argmax_subchannel: np.ndarray
    rows: np.ndarray  # the full-matrix weights the reduction came from
    grid: ResourceGrid

    @property
    def shape(self) -> tuple[int, int]:
        return self.d.shape


def reduce(c, grid: ResourceGrid) -> ReducedWeights:
    c = as_weight_array(c)
    if c.ndim != 2 or c.shape[1] != grid.n_subchannels:
        raise ValueError(f"weights need {grid.n_subchannels} columns, got shape {c.shape}")
    blocks = c.reshape(c.shape[0], grid.L, grid.K)
    # np.argmax returns the first maximum, i.e. the lowest subchannel on ties
    best = blocks.argmax(axis=2)
    d = np.take_along_axis(blocks, best[..., None], axis=2)[..., 0]
    k = best + 1 + grid.K * np.arange(grid.L)[None, :]
    return ReducedWeights(d=d, argmax_subchannel=k, rows=c, grid=grid)


def recover_subchannel(
    reduced: ReducedWeights, row: int, subframe: int, occupied: Collection[int] = ()
) -> int:
    """Concrete subchannel for ``row`` (0-based) in 1-based ``subframe``.

    Returns the stored argmax unless it is in ``occupied``, in which case the
    best free subchannel of the subframe is used instead.
    """
    k = int(reduced.argmax_subchannel[row, subframe - 1])
    if k not in occupied:
        return k
    cols = reduced.grid.subframe_columns(subframe)
    free = [col for col in cols if col + 1 not in occupied]
    if not free:
        raise SubchannelExhaustedError(f"all {reduced.grid.K} subchannels of subframe {subframe} are occupied")
    values = reduced.rows[row, free]
    return free[int(np.argmax(values))] + 1
