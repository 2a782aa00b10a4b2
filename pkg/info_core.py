"""Finite-alphabet information measures (bits) and channel composition.

Every typed operation is backed by a batched kernel that accepts numpy tables
with arbitrary leading batch axes, so the optimizers can evaluate whole
lattices in one call. Conventions: 0 log 0 = 0, and p log(p/0) is only legal
when p = 0.
"""
import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy.special import entr, rel_entr

from config import settings
from models import BroadcastChannel, Distribution, JointPMF, TransitionMatrix

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class DistributionError(ValueError):
    """Raw masses that cannot be read as a probability distribution."""


class SupportError(ValueError):
    """KL divergence requested where p is not absolutely continuous w.r.t. q."""


class DimensionError(ValueError):
    """Alphabet sizes of composed objects disagree."""


# --- batched kernels -------------------------------------------------------


def entropy_table(table: np.ndarray, axes: int | Sequence[int] = -1) -> np.ndarray:
    """Entropy in bits of the distribution spread over `axes`."""
    return entr(table).sum(axis=axes if isinstance(axes, int) else tuple(axes)) / LN2


def mutual_information_table(table: np.ndarray) -> np.ndarray:
    """I(A;B) for tables shaped (..., A, B)."""
    h_a = entropy_table(table.sum(axis=-1))
    h_b = entropy_table(table.sum(axis=-2))
    h_ab = entropy_table(table, axes=(-2, -1))
    return h_a + h_b - h_ab


def conditional_mutual_information_table(table: np.ndarray) -> np.ndarray:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C) for tables shaped (..., A, B, C)."""
    h_ac = entropy_table(table.sum(axis=-2), axes=(-2, -1))
    h_bc = entropy_table(table.sum(axis=-3), axes=(-2, -1))
    h_abc = entropy_table(table, axes=(-3, -2, -1))
    h_c = entropy_table(table.sum(axis=(-3, -2)))
    return h_ac + h_bc - h_abc - h_c


def output_joint_table(px: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """p(x, y) = p(x) p(y|x) for px shaped (..., X)."""
    return px[..., :, None] * matrix


def channel_mutual_information_table(px: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """I(X;Y) for a batch of input distributions through one channel."""
    return mutual_information_table(output_joint_table(px, matrix))


# --- typed operations ------------------------------------------------------


def validate_distribution(raw: Sequence[float], tolerance: float | None = None) -> Distribution:
    """Read raw masses as a Distribution, clamping negative dust and renormalizing."""
    tolerance = settings.ingest_tolerance if tolerance is None else tolerance
    if len(raw) == 0:
        raise DistributionError("distribution needs at least one mass")
    values = np.asarray(raw, dtype=float)
    for index, value in enumerate(values):
        if not np.isfinite(value) or value < -tolerance:
            raise DistributionError(f"entry {index} = {value} is negative or not finite")
    total = math.fsum(values)
    if abs(total - 1.0) > tolerance:
        raise DistributionError(f"sum {total:g} deviates from 1")
    if total == 1.0 and (values >= 0.0).all():
        return Distribution.from_array(values)
    clamped = np.clip(values, 0.0, None)
    logger.debug(f"Renormalizing distribution with sum {total!r}")
    return Distribution.from_array(clamped / math.fsum(clamped))


def entropy(d: Distribution) -> float:
    return float(entropy_table(d.array))


def marginal(j: JointPMF, axes: Sequence[int]) -> JointPMF | Distribution:
    """Marginal over the kept `axes`, in the order given."""
    table = j.table
    drop = tuple(a for a in range(table.ndim) if a not in axes)
    kept = table.sum(axis=drop) if drop else table
    order = sorted(axes)
    kept = np.transpose(kept, [order.index(a) for a in axes])
    if len(axes) == 1:
        return Distribution.from_array(kept)
    return JointPMF.from_table(kept)


def mutual_information(j: JointPMF) -> float:
    if len(j.dims) != 2:
        raise DimensionError(f"mutual information needs a 2-d joint, got dims {j.dims}")
    return float(mutual_information_table(j.table))


def conditional_mutual_information(j: JointPMF) -> float:
    """I(A;B|C) as the p(c)-weighted sum of per-slice mutual informations."""
    if len(j.dims) != 3:
        raise DimensionError(f"conditional MI needs a 3-d joint, got dims {j.dims}")
    table = j.table
    total = 0.0
    for c in range(j.dims[2]):
        weight = table[:, :, c].sum()
        if weight > 0.0:
            total += weight * float(mutual_information_table(table[:, :, c] / weight))
    return total


def kl_divergence(p: Distribution, q: Distribution) -> float:
    if p.alphabet_size != q.alphabet_size:
        raise DimensionError(f"alphabets differ: {p.alphabet_size} vs {q.alphabet_size}")
    for index, (pi, qi) in enumerate(zip(p.masses, q.masses)):
        if qi == 0.0 and pi > 0.0:
            raise SupportError(f"q({index}) = 0 but p({index}) = {pi}")
    return float(rel_entr(p.array, q.array).sum() / LN2)


def push_through(px: Distribution, ch: TransitionMatrix) -> JointPMF:
    if px.alphabet_size != ch.input_size:
        raise DimensionError(
            f"input distribution has {px.alphabet_size} symbols, channel expects {ch.input_size}"
        )
    return JointPMF.from_table(output_joint_table(px.array, ch.array))


def induced_pairs_table(
    joint_uvx: np.ndarray, bc: BroadcastChannel
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched p(u,y), p(v,z), p(x) for tables shaped (..., U, V, X)."""
    puy = np.einsum("...uvx,xy->...uy", joint_uvx, bc.to_y.array)
    pvz = np.einsum("...uvx,xz->...vz", joint_uvx, bc.to_z.array)
    return puy, pvz, joint_uvx.sum(axis=(-3, -2))


def induced_pairs(
    joint_uvx: JointPMF, bc: BroadcastChannel
) -> tuple[JointPMF, JointPMF, Distribution]:
    """Pairs (U,Y), (V,Z) and p(x) under the Markov chain (U,V) -> X -> (Y,Z)."""
    if len(joint_uvx.dims) != 3 or joint_uvx.dims[2] != bc.input_size:
        raise DimensionError(
            f"joint dims {joint_uvx.dims} do not end in the channel input size {bc.input_size}"
        )
    puy, pvz, px = induced_pairs_table(joint_uvx.table, bc)
    return JointPMF.from_table(puy), JointPMF.from_table(pvz), Distribution.from_array(px)
