"""Capacity weights c[i, k] = B * log2(1 + SINR[i, k]).

The SINR source is pluggable: a seeded log-normal generator for Monte-Carlo
work, or a CSV file for reproducing an experiment on fixed weights.

Seed derivation
---------------
Every random stream is keyed by ``derive_seed(master_seed, run_index, stream)``::

    h = splitmix64(master_seed mod 2**64)
    h = splitmix64(h XOR (run_index mod 2**64))
    h = splitmix64(h XOR stream)

with the standard SplitMix64 finalizer (all arithmetic mod 2**64)::

    z = x + 0x9E3779B97F4A7C15
    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB
    return z XOR (z >> 31)

The result seeds ``numpy.random.PCG64``. Stream 0 is the channel, stream 1
the BGM-PA pre-grouping.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .grid import Scenario

MASK64 = (1 << 64) - 1

CHANNEL_STREAM = 0
GROUPING_STREAM = 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, run_index: int, stream: int = CHANNEL_STREAM) -> int:
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (run_index & MASK64))
    return splitmix64(h ^ (stream & MASK64))


def make_rng(master_seed: int, run_index: int, stream: int = CHANNEL_STREAM) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, run_index, stream)))


class WeightFileError(ValueError):
    pass


class WeightParseError(WeightFileError):
    pass


class WeightDimensionError(WeightFileError):
    pass


class NegativeWeightError(WeightFileError):
    pass


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """N x (K*L) non-negative capacities in bits/s; row i-1 is vehicle i."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"weight matrix must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("weight matrix has non-finite entries")
        if np.any(v < 0):
            i, k = np.argwhere(v < 0)[0]
            raise ValueError(f"negative weight at vehicle {i + 1}, subchannel {k + 1}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def check_dims(self, scenario: Scenario) -> None:
        expected = (scenario.vehicle_count, scenario.grid.n_subchannels)
        if self.shape != expected:
            raise WeightDimensionError(f"weights have shape {self.shape}, scenario needs {expected}")


def as_weight_array(weights) -> np.ndarray:
    if isinstance(weights, WeightMatrix):
        return weights.values
    return np.asarray(weights, dtype=float)


def capacity(sinr, bandwidth: float) -> np.ndarray:
    """Shannon capacity in bits/s for linear SINR values."""
    return bandwidth * np.log2(1.0 + np.asarray(sinr, dtype=float))


@dataclass(frozen=True)
class SinrModelConfig:
    """Log-normal SINR: Gaussian in dB per (vehicle, subchannel).

    ``per_subframe_correlation`` is the correlation coefficient between the
    dB values of two subchannels of the same vehicle in the same subframe.
    """

    master_seed: int = 0
    sinr_db_mean: float = 15.0
    sinr_db_stddev: float = 8.0
    per_subframe_correlation: float = 0.0

    def __post_init__(self):
        if self.sinr_db_stddev < 0:
            raise ValueError("sinr_db_stddev must be non-negative")
        if not 0.0 <= self.per_subframe_correlation <= 1.0:
            raise ValueError("per_subframe_correlation must lie in [0, 1]")


def generate_sinr(scenario: Scenario, config: SinrModelConfig, run_index: int) -> np.ndarray:
    """Linear SINR matrix of shape N x (K*L) for one Monte-Carlo run."""
    N, K, L = scenario.vehicle_count, scenario.grid.K, scenario.grid.L
    rng = make_rng(config.master_seed, run_index, CHANNEL_STREAM)
    own = rng.standard_normal((N, K * L))
    common = np.repeat(rng.standard_normal((N, L)), K, axis=1)
    rho = config.per_subframe_correlation
    sinr_db = config.sinr_db_mean + config.sinr_db_stddev * (
        np.sqrt(1.0 - rho) * own + np.sqrt(rho) * common
    )
    return 10.0 ** (sinr_db / 10.0)


def generate_weights(scenario: Scenario, config: SinrModelConfig, run_index: int) -> WeightMatrix:
    sinr = generate_sinr(scenario, config, run_index)
    return WeightMatrix(capacity(sinr, scenario.grid.subchannel_bandwidth))


def _plain(x: float) -> str:
    return np.format_float_positional(x, unique=True, trim="-")


def save_weights(weights, path: str | os.PathLike) -> None:
    """Write one CSV row per vehicle, one column per subchannel index."""
    values = as_weight_array(weights)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in values:
            writer.writerow([_plain(float(x)) for x in row])


def load_weights(path: str | os.PathLike, expected_dims: tuple[int, int] | None = None) -> WeightMatrix:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise WeightParseError(f"{path}: {exc}") from exc

    parsed = []
    for i, row in enumerate(rows, start=1):
        try:
            parsed.append([float(cell) for cell in row])
        except ValueError as exc:
            raise WeightParseError(f"{path}: row {i}: {exc}") from exc
    if not parsed:
        raise WeightParseError(f"{path}: no data")
    widths = {len(r) for r in parsed}
    if len(widths) != 1:
        raise WeightParseError(f"{path}: ragged rows (widths {sorted(widths)})")

    values = np.array(parsed, dtype=float)
    if expected_dims is not None and values.shape != tuple(expected_dims):
        raise WeightDimensionError(f"{path}: shape {values.shape}, expected {tuple(expected_dims)}")
    if not np.all(np.isfinite(values)):
        raise WeightParseError(f"{path}: non-finite entry")
    if np.any(values < 0):
        i, k = np.argwhere(values < 0)[0]
        raise NegativeWeightError(f"{path}: negative weight at row {i + 1}, column {k + 1}")
    return WeightMatrix(values)
