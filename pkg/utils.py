"""Utility functions: simplex lattices, local refinement, softmax polish and worker fan-out."""
import itertools
import logging
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from config import settings
from models import OptimizerConfig

logger = logging.getLogger(__name__)

# Local moves accepted per refinement round before the radius shrinks
MAX_MOVES_PER_ROUND = 16

# Softmax polish: smallest cell share mapped to a finite logit, initial simplex edge
LOGIT_FLOOR = 1e-6
LOGIT_STEP = 0.5

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Block:
    """A group of coordinates constrained to sum to `total`."""

    size: int
    total: float = 1.0


@lru_cache(maxsize=64)
def _compositions(size: int, steps: int) -> np.ndarray:
    """All non-negative integer vectors of length `size` summing to `steps`."""
    if size == 1:
        return np.full((1, 1), steps, dtype=int)
    bars = np.array(list(itertools.combinations(range(steps + size - 1), size - 1)), dtype=int)
    edges = np.hstack(
        [np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), steps + size - 1)]
    )
    counts = np.diff(edges, axis=1) - 1
    counts.setflags(write=False)
    return counts


def simplex_lattice(size: int, resolution: int) -> np.ndarray:
    """Points of the probability simplex with coordinates in multiples of 1/(resolution-1)."""
    steps = resolution - 1
    return _compositions(size, steps) / steps


def block_lattice(blocks: Sequence[Block], resolution: int) -> np.ndarray:
    """Cartesian product of scaled simplex lattices, one per block."""
    parts = [simplex_lattice(b.size, resolution) * b.total for b in blocks]
    grids = np.meshgrid(*[np.arange(len(p)) for p in parts], indexing="ij")
    return np.hstack([p[g.ravel()] for p, g in zip(parts, grids)])


def lexicographic_best(values: np.ndarray, points: np.ndarray) -> int:
    """Index of the maximum; ties go to the lexicographically smallest point."""
    best = np.max(values)
    candidates = np.flatnonzero(values == best)
    if len(candidates) == 1:
        return int(candidates[0])
    order = np.lexsort(points[candidates].T[::-1])
    return int(candidates[order[0]])


def top_indices(values: np.ndarray, points: np.ndarray, count: int) -> list[int]:
    """Up to `count` best indices, ordered by value then lexicographically."""
    count = min(count, len(values))
    keys = [*points.T[::-1], -values]
    order = np.lexsort(keys)
    return [int(i) for i in order[:count]]


def _pair_directions(blocks: Sequence[Block]) -> np.ndarray:
    width = sum(b.size for b in blocks)
    directions = []
    offset = 0
    for block in blocks:
        for i, j in itertools.permutations(range(block.size), 2):
            d = np.zeros(width)
            d[offset + i], d[offset + j] = 1.0, -1.0
            directions.append(d)
        offset += block.size
    return np.array(directions).reshape(-1, width)


def _random_directions(blocks: Sequence[Block], count: int, rng: np.random.Generator) -> np.ndarray:
    width = sum(b.size for b in blocks)
    if count == 0 or all(b.size == 1 for b in blocks):
        return np.zeros((0, width))
    raw = rng.standard_normal((count, width))
    offset = 0
    for block in blocks:
        part = raw[:, offset:offset + block.size]
        part -= part.mean(axis=1, keepdims=True)
        offset += block.size
    scale = np.abs(raw).max(axis=1, keepdims=True)
    directions = raw / np.where(scale > 0, scale, 1.0)
    return np.vstack([directions, -directions])


def _feasible_moves(point: np.ndarray, directions: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Candidates point + t*d, with t truncated so no coordinate goes negative."""
    with np.errstate(divide="ignore", invalid="ignore"):
        limits = np.where(directions < 0, point / -directions, np.inf).min(axis=1)
    steps = np.minimum(lengths[:, None], limits[None, :])
    candidates = point + steps[..., None] * directions[None, :, :]
    candidates = candidates.reshape(-1, point.size)
    return np.clip(candidates, 0.0, None)


def refine_maximum(
    objective: Objective,
    start: np.ndarray,
    blocks: Sequence[Block],
    step: float,
    cfg: OptimizerConfig,
    random_directions: int | None = None,
) -> tuple[np.ndarray, float, int]:
    """Shrinking pattern search around `start`.

    Each round polls pair-exchange directions inside every block plus seeded
    random tangent directions at the current radius and half of it, moves to
    strict improvements, then multiplies the radius by cfg.refine_shrink.
    Returns (point, value, evaluations).
    """
    rng = np.random.default_rng(cfg.seed)
    if random_directions is None:
        random_directions = settings.refine_random_directions
    incumbent = np.asarray(start, dtype=float).copy()
    best = float(objective(incumbent[None, :])[0])
    evaluations = 1
    radius = step
    pairs = _pair_directions(blocks)
    for _ in range(cfg.refine_iterations):
        radius *= cfg.refine_shrink
        lengths = np.array([radius, radius / 2.0])
        for _ in range(MAX_MOVES_PER_ROUND):
            directions = np.vstack(
                [pairs, _random_directions(blocks, random_directions, rng)]
            )
            if len(directions) == 0:
                break
            candidates = _feasible_moves(incumbent, directions, lengths)
            values = objective(candidates)
            evaluations += len(candidates)
            index = lexicographic_best(values, candidates)
            if not values[index] > best:
                break
            incumbent, best = candidates[index], float(values[index])
    return incumbent, best, evaluations


def maximize_on_lattice(
    objective: Objective,
    lattice: np.ndarray,
    blocks: Sequence[Block],
    cfg: OptimizerConfig,
    starts: int | None = None,
    extra_starts: Iterable[np.ndarray] = (),
    resolution: int | None = None,
    random_directions: int | None = None,
    values: np.ndarray | None = None,
) -> tuple[np.ndarray, float, int]:
    """Evaluate the lattice, then refine the best few incumbents.

    `values` short-circuits the lattice pass when the caller already holds
    objective(lattice). Returns (point, value, evaluations) with the
    deterministic tie-break of `lexicographic_best` applied to the refined
    incumbents.
    """
    starts = settings.refine_starts if starts is None else starts
    resolution = cfg.grid_resolution if resolution is None else resolution
    if values is None:
        values = objective(lattice)
        evaluations = len(lattice)
    else:
        evaluations = 0
    seeds = [lattice[i] for i in top_indices(values, lattice, max(starts, 1))]
    seeds.extend(np.asarray(s, dtype=float) for s in extra_starts)
    step = 1.0 / (resolution - 1)
    refined_points, refined_values = [], []
    for seed_point in seeds:
        point, value, count = refine_maximum(
            objective, seed_point, blocks, step, cfg, random_directions
        )
        refined_points.append(point)
        refined_values.append(value)
        evaluations += count
    points = np.array(refined_points)
    index = lexicographic_best(np.array(refined_values), points)
    return points[index], refined_values[index], evaluations


def _to_logits(point: np.ndarray, blocks: Sequence[Block]) -> np.ndarray:
    logits, offset = [], 0
    for block in blocks:
        part = np.clip(point[offset:offset + block.size] / block.total, LOGIT_FLOOR, None)
        logs = np.log(part)
        logits.append(logs[:-1] - logs[-1])
        offset += block.size
    return np.concatenate(logits)


def _from_logits(logits: np.ndarray, blocks: Sequence[Block]) -> np.ndarray:
    parts, offset = [], 0
    for block in blocks:
        free = np.append(logits[offset:offset + block.size - 1], 0.0)
        weights = np.exp(free - free.max())
        parts.append(block.total * weights / weights.sum())
        offset += block.size - 1
    return np.concatenate(parts)


def polish_maximum(
    objective: Objective,
    start: np.ndarray,
    blocks: Sequence[Block],
    maxiter: int,
    restarts: int = 1,
) -> tuple[np.ndarray, float, int]:
    """Nelder-Mead on per-block softmax logits, restarted from its own optimum.

    The start is kept unless strictly beaten. Returns (point, value, evaluations).
    """
    incumbent = np.asarray(start, dtype=float).copy()
    best = float(objective(incumbent[None, :])[0])
    evaluations = 1
    z = _to_logits(incumbent, blocks)
    if z.size == 0:
        return incumbent, best, evaluations

    def loss(logits: np.ndarray) -> float:
        return -float(objective(_from_logits(logits, blocks)[None, :])[0])

    for _ in range(restarts + 1):
        simplex = np.vstack([z, z + LOGIT_STEP * np.eye(z.size)])
        result = minimize(
            loss,
            z,
            method="Nelder-Mead",
            options={
                "maxiter": maxiter,
                "xatol": 1e-9,
                "fatol": 1e-13,
                "adaptive": True,
                "initial_simplex": simplex,
            },
        )
        evaluations += result.nfev
        z = result.x
        if -result.fun > best:
            incumbent, best = _from_logits(result.x, blocks), -float(result.fun)
    return incumbent, best, evaluations


def worker_count() -> int:
    return settings.threads if settings.threads > 0 else (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over a thread pool capped by MARTON_THREADS."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
