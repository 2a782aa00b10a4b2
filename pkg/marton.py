"""Sum-rate functionals: Marton inner bound, randomized time-division, UV outer bound."""
import logging

import numpy as np

from config import settings
from info_core import (
    DimensionError,
    channel_mutual_information_table,
    conditional_mutual_information_table,
    mutual_information_table,
)
from models import (
    BroadcastChannel,
    Distribution,
    GateJoint,
    JointPMF,
    MartonWitness,
    OptimizerConfig,
    RtdEqualityCheck,
    RtdPoint,
    SliceCase,
    SliceSplit,
)
from theorem import InfeasibleSliceError, all_gates, lhs_value, max_lhs_for_gate
from utils import (
    Block,
    block_lattice,
    maximize_on_lattice,
    parallel_map,
    polish_maximum,
    refine_maximum,
    simplex_lattice,
)

logger = logging.getLogger(__name__)

# Pattern-search radius after each Nelder-Mead polish
OUTER_POLISH_STEP = 0.01


class ChannelAlphabetError(ValueError):
    """Sum-rate search requested on a channel without a binary input."""


def _require_binary(bc: BroadcastChannel) -> None:
    if bc.input_size != 2:
        raise ChannelAlphabetError(f"sum-rate search needs a binary input, got {bc.input_size}")


def _common_message_table(pwx: np.ndarray, bc: BroadcastChannel) -> np.ndarray:
    """min{I(W;Y), I(W;Z)} for tables p(w,x) shaped (..., W, X)."""
    return np.minimum(
        mutual_information_table(pwx @ bc.to_y.array),
        mutual_information_table(pwx @ bc.to_z.array),
    )


# --- randomized time-division -----------------------------------------------


def rtd_table(pwx: np.ndarray, bc: BroadcastChannel) -> np.ndarray:
    """Batched R-TD objective for p(w,x) shaped (..., 2, 2)."""
    pw = pwx.sum(axis=-1)
    safe = np.where(pw > 0.0, pw, 1.0)[..., None]
    given0 = pwx[..., 0, :] / safe[..., 0, :]
    given1 = pwx[..., 1, :] / safe[..., 1, :]
    slot_y = mutual_information_table(given0[..., :, None] * bc.to_y.array)
    slot_z = mutual_information_table(given1[..., :, None] * bc.to_z.array)
    return (
        _common_message_table(pwx, bc)
        + np.where(pw[..., 0] > 0.0, pw[..., 0] * slot_y, 0.0)
        + np.where(pw[..., 1] > 0.0, pw[..., 1] * slot_z, 0.0)
    )


def rtd_objective(pt: RtdPoint, bc: BroadcastChannel) -> float:
    _require_binary(bc)
    return float(rtd_table(pt.joint_wx.table, bc))


def rtd_sum_rate_max(bc: BroadcastChannel, cfg: OptimizerConfig) -> tuple[float, RtdPoint]:
    _require_binary(bc)
    blocks = [Block(4)]
    lattice = simplex_lattice(4, cfg.grid_resolution)

    def objective(pts: np.ndarray) -> np.ndarray:
        return rtd_table(pts.reshape(-1, 2, 2), bc)

    point, _, evaluations = maximize_on_lattice(objective, lattice, blocks, cfg)
    point, _, count = polish_maximum(objective, point, blocks, settings.polish_maxiter)
    point, _, more = refine_maximum(objective, point, blocks, OUTER_POLISH_STEP, cfg)
    evaluations += count + more
    argmax = RtdPoint(joint_wx=JointPMF.from_table(point.reshape(2, 2)))
    value = rtd_objective(argmax, bc)
    logger.info(f"📈 R-TD sum rate {value:.6f} after {evaluations} evaluations")
    return value, argmax


def rtd_embedding(pt: RtdPoint) -> JointPMF:
    """p(u,v,w,x) with U = X, V = 0 when W = 0 and V = X, U = 0 when W = 1."""
    pwx = pt.joint_wx.table
    joint = np.zeros((2, 2, 2, 2))
    for x in range(2):
        joint[x, 0, 0, x] = pwx[0, x]
        joint[0, x, 1, x] = pwx[1, x]
    return JointPMF.from_table(joint)


# --- Marton inner bound -----------------------------------------------------


def _marton_terms(joint_uvwx: JointPMF, bc: BroadcastChannel) -> tuple[float, float, float]:
    """(I(W;Y), I(W;Z), I(U;Y|W) + I(V;Z|W) - I(U;V|W))."""
    if len(joint_uvwx.dims) != 4 or joint_uvwx.dims[3] != bc.input_size:
        raise DimensionError(
            f"joint dims {joint_uvwx.dims} must be (U, V, W, X) with X = {bc.input_size}"
        )
    if max(joint_uvwx.dims[:3]) > bc.input_size:
        raise DimensionError(
            f"auxiliary alphabets {joint_uvwx.dims[:3]} exceed |X| = {bc.input_size}"
        )
    p = joint_uvwx.table
    y, z = bc.to_y.array, bc.to_z.array
    pwx = p.sum(axis=(0, 1))
    i_uy_w = conditional_mutual_information_table(np.einsum("uvwx,xy->uyw", p, y))
    i_vz_w = conditional_mutual_information_table(np.einsum("uvwx,xz->vzw", p, z))
    i_uv_w = conditional_mutual_information_table(p.sum(axis=3))
    return (
        float(mutual_information_table(pwx @ y)),
        float(mutual_information_table(pwx @ z)),
        float(i_uy_w + i_vz_w - i_uv_w),
    )


def marton_objective(joint_uvwx: JointPMF, bc: BroadcastChannel) -> float:
    """min{I(W;Y), I(W;Z)} + I(U;Y|W) + I(V;Z|W) - I(U;V|W)."""
    i_wy, i_wz, private = _marton_terms(joint_uvwx, bc)
    return min(i_wy, i_wz) + private


def marton_weighted_objective(
    joint_uvwx: JointPMF, bc: BroadcastChannel, weight: float
) -> float:
    """λ I(W;Y) + (1-λ) I(W;Z) + I(U;Y|W) + I(V;Z|W) - I(U;V|W).

    Never below marton_objective, and equal to it for the λ in {0, 1} that
    puts all weight on the weaker common-message rate.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    i_wy, i_wz, private = _marton_terms(joint_uvwx, bc)
    return weight * i_wy + (1.0 - weight) * i_wz + private


def compose_witness(w: MartonWitness) -> JointPMF:
    """p(u,v,w,x) = p(w) p_w(u,v) 1[x = f_w(u,v)]."""
    joint = np.zeros((2, 2, 2, 2))
    for index, (gate, puv) in enumerate(zip(w.per_w_gate, w.per_w_puv)):
        triple = GateJoint(puv=puv, gate=gate).triple_table(2)
        joint[:, :, index, :] = w.pw[index] * triple
    return JointPMF.from_table(joint)


def rtd_equality_check(
    bc: BroadcastChannel, witness: MartonWitness, rtd_value: float, tol: float | None = None
) -> RtdEqualityCheck:
    """Split the witness by the stronger receiver in each W-slice and bound it by R-TD.

    Each slice value is at most the stronger receiver's I(X;·|W=w), so the Marton
    value sits below common + Σ p(w) max{I(X;Y|W=w), I(X;Z|W=w)}, which an R-TD
    point serving that receiver in slot w attains.
    """
    _require_binary(bc)
    tol = settings.equality_tolerance if tol is None else tol
    slices, pwx = [], np.zeros((2, 2))
    for w, (gate, puv) in enumerate(zip(witness.per_w_gate, witness.per_w_puv)):
        gj = GateJoint(puv=puv, gate=gate)
        px = gj.induced_px(2)
        pwx[w] = witness.pw[w] * px
        rate_y = float(channel_mutual_information_table(px, bc.to_y.array))
        rate_z = float(channel_mutual_information_table(px, bc.to_z.array))
        slices.append(SliceSplit(
            w=w,
            mass=witness.pw[w],
            case=SliceCase.Y_STRONGER if rate_y >= rate_z else SliceCase.Z_STRONGER,
            slice_value=lhs_value(gj, bc),
            rate_y=rate_y,
            rate_z=rate_z,
        ))
    common = float(_common_message_table(pwx, bc))
    marton_value = marton_objective(compose_witness(witness), bc)
    slice_bound = common + sum(s.mass * max(s.rate_y, s.rate_z) for s in slices)
    holds = marton_value <= slice_bound + tol and slice_bound <= rtd_value + tol
    if not holds:
        logger.warning(
            f"⚠️ Bound chain broken: marton {marton_value:.9f}, slice bound "
            f"{slice_bound:.9f}, R-TD {rtd_value:.9f}"
        )
    return RtdEqualityCheck(
        slices=tuple(slices),
        common=common,
        marton_value=marton_value,
        slice_bound=slice_bound,
        rtd_value=rtd_value,
        holds=holds,
    )


class _SliceOptimum:
    """Cache of g(t) = max over gates and p(u,v) with P(X=1) = t of the slice objective."""

    def __init__(self, bc: BroadcastChannel, cfg: OptimizerConfig):
        self.bc = bc
        self.cfg = cfg
        self.gates = all_gates()
        self.cache: dict[float, tuple[float, GateJoint]] = {}

    def _solve(self, t: float) -> tuple[float, GateJoint]:
        px = Distribution.from_array([1.0 - t, t])
        best: tuple[float, GateJoint] | None = None
        for gate in self.gates:
            try:
                value, argmax = max_lhs_for_gate(self.bc, gate, self.cfg, fixed_px=px)
            except InfeasibleSliceError:
                continue
            if best is None or value > best[0]:
                best = (value, argmax)
        return best

    def values(self, ts: np.ndarray) -> np.ndarray:
        missing = [float(t) for t in dict.fromkeys(ts.tolist()) if float(t) not in self.cache]
        for t, result in zip(missing, parallel_map(self._solve, missing)):
            self.cache[t] = result
        return np.array([self.cache[float(t)][0] for t in ts])


def marton_sum_rate_max(
    bc: BroadcastChannel, cfg: OptimizerConfig
) -> tuple[float, MartonWitness]:
    """Maximize over p(w) and P(X=1|W=w), each W-slice solved by the gate search."""
    _require_binary(bc)
    slices = _SliceOptimum(bc, cfg)
    blocks = [Block(2), Block(2), Block(2)]

    def objective(points: np.ndarray) -> np.ndarray:
        pw0, pw1 = points[:, 0], points[:, 1]
        pwx = np.stack([pw0[:, None] * points[:, 2:4], pw1[:, None] * points[:, 4:6]], axis=1)
        return (
            _common_message_table(pwx, bc)
            + pw0 * slices.values(points[:, 3])
            + pw1 * slices.values(points[:, 5])
        )

    _, rtd_argmax = rtd_sum_rate_max(bc, cfg)
    pwx = rtd_argmax.joint_wx.table
    pw = pwx.sum(axis=1)
    conditional = [pwx[w] / pw[w] if pw[w] > 0.0 else np.array([1.0, 0.0]) for w in range(2)]
    seed = np.concatenate([pw, conditional[0], conditional[1]])

    lattice = block_lattice(blocks, cfg.grid_resolution)
    point, _, evaluations = maximize_on_lattice(
        objective, lattice, blocks, cfg, extra_starts=[seed], random_directions=0
    )
    per_w = [slices.cache[float(point[3])][1], slices.cache[float(point[5])][1]]
    witness = MartonWitness(
        pw=Distribution.from_array(point[:2] / point[:2].sum()),
        per_w_gate=(per_w[0].gate, per_w[1].gate),
        per_w_puv=(per_w[0].puv, per_w[1].puv),
    )
    value = marton_objective(compose_witness(witness), bc)
    logger.info(
        f"📈 Marton sum rate {value:.6f} after {evaluations} outer evaluations "
        f"and {len(slices.cache)} slice solves"
    )
    return value, witness


# --- UV outer bound ---------------------------------------------------------


def outer_bound_table(joint_uvx: np.ndarray, bc: BroadcastChannel) -> np.ndarray:
    """min{I(U;Y) + I(V;Z|U), I(V;Z) + I(U;Y|V)} for tables shaped (..., U, V, X)."""
    y, z = bc.to_y.array, bc.to_z.array
    puvy = np.einsum("...uvx,xy->...uvy", joint_uvx, y)
    puvz = np.einsum("...uvx,xz->...uvz", joint_uvx, z)
    i_uy = mutual_information_table(puvy.sum(axis=-2))
    i_vz = mutual_information_table(puvz.sum(axis=-3))
    # reorder to (..., A, B, C) with C the conditioning variable
    i_vz_u = conditional_mutual_information_table(np.moveaxis(puvz, -3, -1))
    i_uy_v = conditional_mutual_information_table(np.moveaxis(puvy, -2, -1))
    return np.minimum(i_uy + i_vz_u, i_vz + i_uy_v)


def outer_bound_objective(joint_uvx: JointPMF, bc: BroadcastChannel) -> float:
    if len(joint_uvx.dims) != 3 or joint_uvx.dims[2] != bc.input_size:
        raise DimensionError(
            f"joint dims {joint_uvx.dims} must be (U, V, X) with X = {bc.input_size}"
        )
    return float(outer_bound_table(joint_uvx.table, bc))


def _outer_starts(
    size: int, previous: np.ndarray | None, count: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Lift the best smaller-alphabet joint, then add seeded Dirichlet draws."""
    cells = size * size * 2
    starts = []
    if previous is not None:
        lifted = np.zeros((size, size, 2))
        lifted[:previous.shape[0], :previous.shape[1]] = previous
        starts.append(0.9 * lifted.ravel() + 0.1 / cells)
    starts.extend(rng.dirichlet(np.ones(cells)) for _ in range(count))
    return starts


def outer_bound_search(bc: BroadcastChannel, cfg: OptimizerConfig) -> tuple[float, JointPMF]:
    """Multi-start lower estimate of the outer-bound sum rate.

    Binary auxiliaries start from the p(u,v,x) lattice; every auxiliary size up
    to settings.outer_aux_size then gets Nelder-Mead polishes from the lifted
    incumbent and seeded random joints, each finished by the pattern search.
    """
    _require_binary(bc)
    resolution = min(cfg.grid_resolution, settings.oracle_resolution)
    rng = np.random.default_rng(cfg.seed)
    best_value, best_table, evaluations = -np.inf, None, 0
    for size in range(2, max(2, settings.outer_aux_size) + 1):
        shape = (size, size, 2)
        blocks = [Block(size * size * 2)]

        def objective(pts: np.ndarray, shape=shape) -> np.ndarray:
            return outer_bound_table(pts.reshape((-1, *shape)), bc)

        if size == 2:
            point, _, count = maximize_on_lattice(
                objective,
                simplex_lattice(blocks[0].size, resolution),
                blocks,
                cfg,
                starts=settings.outer_starts,
                resolution=resolution,
            )
            evaluations += count
            starts = [point, *_outer_starts(size, None, settings.outer_starts, rng)]
        else:
            starts = _outer_starts(size, best_table, settings.outer_starts, rng)
        for start in starts:
            point, _, count = polish_maximum(objective, start, blocks, settings.polish_maxiter)
            point, value, more = refine_maximum(objective, point, blocks, OUTER_POLISH_STEP, cfg)
            evaluations += count + more
            if value > best_value:
                best_value, best_table = value, point.reshape(shape)
    witness = JointPMF.from_table(best_table)
    value = outer_bound_objective(witness, bc)
    logger.info(
        f"📈 Outer-bound estimate {value:.6f} with |U| = |V| = {witness.dims[0]} "
        f"after {evaluations} evaluations"
    )
    return value, witness


def outer_bound_sum_rate_estimate(bc: BroadcastChannel, cfg: OptimizerConfig) -> float:
    return outer_bound_search(bc, cfg)[0]
