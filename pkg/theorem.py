"""Binary-input inequality I(U;Y) + I(V;Z) - I(U;V) <= max{I(X;Y), I(X;Z)}.

The verifier scans p(u,v) for every deterministic gate X = f(U,V), reaching
the sixteen binary gates through four canonical searches (CONST, PASS, AND,
XOR) on relabeled channels, and cross-checks with a coarse lattice over
general joints p(u,v,x).
"""
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from config import settings
from info_core import (
    DimensionError,
    channel_mutual_information_table,
    entropy_table,
    induced_pairs,
    induced_pairs_table,
    mutual_information,
    mutual_information_table,
)
from models import (
    BroadcastChannel,
    CanonicalCase,
    CaseId,
    Distribution,
    Gate,
    GateJoint,
    GateResult,
    JointPMF,
    OptimizerConfig,
    Relabeling,
    SearchMetadata,
    VerificationReport,
)
from utils import (
    Block,
    block_lattice,
    lexicographic_best,
    maximize_on_lattice,
    parallel_map,
    simplex_lattice,
)

logger = logging.getLogger(__name__)

CANONICAL_TABLES = {
    CaseId.CONST: (0, 0, 0, 0),
    CaseId.PASS: (0, 0, 1, 1),
    CaseId.AND: (0, 0, 0, 1),
    CaseId.XOR: (0, 1, 1, 0),
}

# Rows of the 8-cell oracle lattice evaluated per batch
ORACLE_CHUNK = 65536


class GateError(ValueError):
    """Gate output outside the channel's input alphabet."""


class InfeasibleSliceError(ValueError):
    """No p(u,v) under this gate induces the requested p(x)."""


def all_gates() -> list[Gate]:
    return [Gate.from_index(i) for i in range(16)]


def canonical_gate(case_id: CaseId) -> Gate:
    return Gate(table=CANONICAL_TABLES[case_id])


# --- batched objective ------------------------------------------------------


def _check_gate(gate: Gate, bc: BroadcastChannel) -> None:
    if max(gate.table) >= bc.input_size:
        raise GateError(
            f"gate {gate.label} uses symbol {max(gate.table)} but the channel has "
            f"{bc.input_size} inputs"
        )


@dataclass(frozen=True)
class _GateKernel:
    """Per-gate transfer tensors p(y|u,v), p(z|u,v) and the one-hot x map."""

    to_x: np.ndarray
    to_y: np.ndarray
    to_z: np.ndarray
    bc: BroadcastChannel

    @classmethod
    def build(cls, gate: Gate, bc: BroadcastChannel) -> "_GateKernel":
        _check_gate(gate, bc)
        to_x = np.eye(bc.input_size)[gate.array]
        return cls(to_x, to_x @ bc.to_y.array, to_x @ bc.to_z.array, bc)

    def lhs(self, puv: np.ndarray) -> np.ndarray:
        puy = np.einsum("...uv,uvy->...uy", puv, self.to_y)
        pvz = np.einsum("...uv,uvz->...vz", puv, self.to_z)
        return (
            mutual_information_table(puy)
            + mutual_information_table(pvz)
            - mutual_information_table(puv)
        )

    def px(self, puv: np.ndarray) -> np.ndarray:
        return np.einsum("...uv,uvx->...x", puv, self.to_x)

    def rhs(self, puv: np.ndarray) -> np.ndarray:
        return rhs_table(self.px(puv), self.bc)


def rhs_table(px: np.ndarray, bc: BroadcastChannel) -> np.ndarray:
    return np.maximum(
        channel_mutual_information_table(px, bc.to_y.array),
        channel_mutual_information_table(px, bc.to_z.array),
    )


def triple_margin_table(joint_uvx: np.ndarray, bc: BroadcastChannel) -> np.ndarray:
    """Margin for general joints p(u,v,x) shaped (..., U, V, X)."""
    puy, pvz, px = induced_pairs_table(joint_uvx, bc)
    lhs = (
        mutual_information_table(puy)
        + mutual_information_table(pvz)
        - mutual_information_table(joint_uvx.sum(axis=-1))
    )
    return rhs_table(px, bc) - lhs


# --- typed evaluation -------------------------------------------------------


def lhs_value(gj: GateJoint, bc: BroadcastChannel) -> float:
    _check_gate(gj.gate, bc)
    triple = JointPMF.from_table(gj.triple_table(bc.input_size))
    puy, pvz, _ = induced_pairs(triple, bc)
    return mutual_information(puy) + mutual_information(pvz) - mutual_information(gj.puv)


def rhs_value(px: Distribution, bc: BroadcastChannel) -> float:
    if px.alphabet_size != bc.input_size:
        raise DimensionError(
            f"p(x) has {px.alphabet_size} symbols, channel expects {bc.input_size}"
        )
    return float(rhs_table(px.array, bc))


def margin(gj: GateJoint, bc: BroadcastChannel) -> float:
    _check_gate(gj.gate, bc)
    px = Distribution.from_array(gj.induced_px(bc.input_size))
    return rhs_value(px, bc) - lhs_value(gj, bc)


def equivalent_form_margin(gj: GateJoint, bc: BroadcastChannel) -> float:
    """H(U|Y) + H(V|Z) - min{H(UV|Y), H(UV|Z)} for X = f(U,V)."""
    _check_gate(gj.gate, bc)
    triple = gj.triple_table(bc.input_size)
    puvy = np.einsum("uvx,xy->uvy", triple, bc.to_y.array)
    puvz = np.einsum("uvx,xz->uvz", triple, bc.to_z.array)
    h_y = entropy_table(puvy.sum(axis=(0, 1)))
    h_z = entropy_table(puvz.sum(axis=(0, 1)))
    h_u_given_y = entropy_table(puvy.sum(axis=1), axes=(0, 1)) - h_y
    h_v_given_z = entropy_table(puvz.sum(axis=0), axes=(0, 1)) - h_z
    h_uv_given_y = entropy_table(puvy, axes=(0, 1, 2)) - h_y
    h_uv_given_z = entropy_table(puvz, axes=(0, 1, 2)) - h_z
    return float(h_u_given_y + h_v_given_z - min(h_uv_given_y, h_uv_given_z))


# --- canonicalization -------------------------------------------------------


def _apply_relabeling(table: np.ndarray, gate_array: np.ndarray, r: Relabeling):
    if r.swap_uv:
        table, gate_array = table.T, gate_array.T
    if r.u_flip:
        table, gate_array = table[::-1], gate_array[::-1]
    if r.v_flip:
        table, gate_array = table[:, ::-1], gate_array[:, ::-1]
    if r.x_flip:
        gate_array = 1 - gate_array
    return table, gate_array


def gate_canonicalize(g: Gate) -> CanonicalCase:
    """First relabeling (swap, u_flip, v_flip, x_flip order) reaching a canonical gate."""
    if g.index is None:
        raise GateError(f"only binary gates have canonical cases, got {g.label}")
    dummy = np.zeros((2, 2))
    for flags in itertools.product((False, True), repeat=4):
        r = Relabeling(swap_uv=flags[0], u_flip=flags[1], v_flip=flags[2], x_flip=flags[3])
        _, mapped = _apply_relabeling(dummy, g.array, r)
        key = tuple(int(b) for b in mapped.ravel())
        for case_id, table in CANONICAL_TABLES.items():
            if key == table:
                return CanonicalCase(case_id=case_id, relabeling=r, flip_channel=r.x_flip)
    raise GateError(f"gate {g.label} has no canonical case")


def transport_channel(bc: BroadcastChannel, case: CanonicalCase) -> BroadcastChannel:
    if case.relabeling.swap_uv:
        bc = bc.with_receivers_swapped()
    if case.flip_channel:
        bc = bc.with_inputs_flipped()
    return bc


def transport_gate_joint(gj: GateJoint, case: CanonicalCase) -> GateJoint:
    """Carry an original GateJoint onto the canonical representative."""
    table, gate_array = _apply_relabeling(gj.puv.table, gj.gate.array, case.relabeling)
    return GateJoint(
        puv=JointPMF.from_table(table),
        gate=Gate(table=tuple(int(b) for b in gate_array.ravel())),
    )


def restore_gate_joint(gj: GateJoint, case: CanonicalCase) -> GateJoint:
    """Inverse of transport_gate_joint."""
    r = case.relabeling
    table, gate_array = gj.puv.table, gj.gate.array
    if r.x_flip:
        gate_array = 1 - gate_array
    if r.v_flip:
        table, gate_array = table[:, ::-1], gate_array[:, ::-1]
    if r.u_flip:
        table, gate_array = table[::-1], gate_array[::-1]
    if r.swap_uv:
        table, gate_array = table.T, gate_array.T
    return GateJoint(
        puv=JointPMF.from_table(table),
        gate=Gate(table=tuple(int(b) for b in gate_array.ravel())),
    )


# --- search -----------------------------------------------------------------


@dataclass(frozen=True)
class GateSearch:
    """Outcome of one gate's lattice + refinement searches."""

    argmax: np.ndarray
    max_lhs: float
    worst: np.ndarray
    min_margin: float
    lattice_points: int
    evaluations: int


class _SliceSpace:
    """Coordinates of p(u,v) cells that may carry mass, grouped by x = f(u,v)."""

    def __init__(self, gate: Gate, bc: BroadcastChannel, fixed_px: Distribution | None):
        self.shape = (gate.u_size, gate.v_size)
        cells = gate.u_size * gate.v_size
        if fixed_px is None:
            self.coords = np.arange(cells)
            self.blocks = [Block(cells)]
            return
        if fixed_px.alphabet_size != bc.input_size:
            raise DimensionError(
                f"fixed p(x) has {fixed_px.alphabet_size} symbols, channel expects "
                f"{bc.input_size}"
            )
        coords, blocks = [], []
        for x, mass in enumerate(fixed_px.masses):
            members = [c for c in range(cells) if gate.table[c] == x]
            if mass > 0.0 and not members:
                raise InfeasibleSliceError(
                    f"gate {gate.label} never outputs {x} but p({x}) = {mass}"
                )
            if mass > 0.0:
                coords.extend(members)
                blocks.append(Block(len(members), mass))
        self.coords = np.array(coords, dtype=int)
        self.blocks = blocks

    def embed(self, points: np.ndarray) -> np.ndarray:
        full = np.zeros(points.shape[:-1] + (self.shape[0] * self.shape[1],))
        full[..., self.coords] = points
        return full.reshape(points.shape[:-1] + self.shape)


def search_gate(
    bc: BroadcastChannel,
    gate: Gate,
    cfg: OptimizerConfig,
    fixed_px: Distribution | None = None,
    track_margin: bool = True,
) -> GateSearch:
    """Maximize the LHS and, optionally, minimize the margin over one gate's slice."""
    kernel = _GateKernel.build(gate, bc)
    space = _SliceSpace(gate, bc, fixed_px)
    lattice = block_lattice(space.blocks, cfg.grid_resolution)

    def lhs_objective(points: np.ndarray) -> np.ndarray:
        return kernel.lhs(space.embed(points))

    def excess_objective(points: np.ndarray) -> np.ndarray:
        puv = space.embed(points)
        return kernel.lhs(puv) - kernel.rhs(puv)

    embedded = space.embed(lattice)
    lhs_values = kernel.lhs(embedded)
    best, best_value, evaluations = maximize_on_lattice(
        lhs_objective, lattice, space.blocks, cfg, values=lhs_values
    )
    evaluations += len(lattice)
    worst, worst_value = best, float(kernel.rhs(space.embed(best))) - best_value
    if track_margin:
        # the margin pass reuses the LHS already computed on the lattice
        worst, excess, count = maximize_on_lattice(
            excess_objective, lattice, space.blocks, cfg,
            values=lhs_values - kernel.rhs(embedded),
        )
        worst_value = -excess
        evaluations += count
    return GateSearch(
        argmax=space.embed(best),
        max_lhs=best_value,
        worst=space.embed(worst),
        min_margin=worst_value,
        lattice_points=len(lattice),
        evaluations=evaluations,
    )


def max_lhs_for_gate(
    bc: BroadcastChannel,
    g: Gate,
    cfg: OptimizerConfig,
    fixed_px: Distribution | None = None,
) -> tuple[float, GateJoint]:
    """Deterministic multi-start maximum of lhs_value over the gate's p(u,v) slice."""
    search = search_gate(bc, g, cfg, fixed_px, track_margin=False)
    argmax = GateJoint(puv=JointPMF.from_table(search.argmax), gate=g)
    return lhs_value(argmax, bc), argmax


def _oracle(bc: BroadcastChannel, resolution: int) -> tuple[float, JointPMF, int]:
    """Minimum margin over the full p(u,v,x) lattice with binary U, V."""
    lattice = simplex_lattice(4 * bc.input_size, resolution)
    margins = np.concatenate([
        triple_margin_table(chunk.reshape(-1, 2, 2, bc.input_size), bc)
        for chunk in np.array_split(lattice, max(1, len(lattice) // ORACLE_CHUNK))
    ])
    index = lexicographic_best(-margins, lattice)
    witness = JointPMF.from_table(lattice[index].reshape(2, 2, bc.input_size))
    return float(margins[index]), witness, len(lattice)


def verify_binary_channel(
    bc: BroadcastChannel, cfg: OptimizerConfig, oracle_resolution: int | None = None
) -> VerificationReport:
    if bc.input_size != 2:
        raise DimensionError(f"verification needs a binary input, got {bc.input_size}")
    gates = all_gates()
    cases = [gate_canonicalize(g) for g in gates]
    keys = list(dict.fromkeys(
        (c.case_id, c.relabeling.swap_uv, c.flip_channel) for c in cases
    ))
    logger.info(f"🔍 Verifying channel {bc.digest()[:12]} with {len(keys)} canonical searches")

    def run(key):
        case_id, swap_uv, x_flip = key
        canonical_case = CanonicalCase(
            case_id=case_id,
            relabeling=Relabeling(swap_uv=swap_uv, x_flip=x_flip),
            flip_channel=x_flip,
        )
        return search_gate(transport_channel(bc, canonical_case), canonical_gate(case_id), cfg)

    searches = dict(zip(keys, parallel_map(run, keys)))

    results = []
    for gate, case in zip(gates, cases):
        search = searches[(case.case_id, case.relabeling.swap_uv, case.flip_channel)]
        canonical = canonical_gate(case.case_id)
        argmax = restore_gate_joint(
            GateJoint(puv=JointPMF.from_table(search.argmax), gate=canonical), case
        )
        worst = restore_gate_joint(
            GateJoint(puv=JointPMF.from_table(search.worst), gate=canonical), case
        )
        max_lhs = lhs_value(argmax, bc)
        rhs = rhs_value(Distribution.from_array(argmax.induced_px(2)), bc)
        worst_margin = margin(worst, bc)
        if worst_margin > rhs - max_lhs:
            worst, worst_margin = argmax, rhs - max_lhs
        results.append(GateResult(
            gate=gate,
            label=gate.label,
            case=case,
            max_lhs=max_lhs,
            argmax=argmax,
            rhs_at_argmax=rhs,
            margin=rhs - max_lhs,
            min_margin=worst_margin,
            min_margin_point=worst,
        ))

    resolution = settings.oracle_resolution if oracle_resolution is None else oracle_resolution
    oracle_min, oracle_witness, oracle_points = _oracle(bc, resolution)
    global_min = min(min(r.min_margin for r in results), oracle_min)
    holds = global_min >= -settings.margin_tolerance
    lattice_points = sum(s.lattice_points for s in searches.values())
    evaluations = sum(s.evaluations for s in searches.values())
    if holds:
        logger.info(f"✅ Inequality holds, minimum margin {global_min:.3e}")
    else:
        logger.warning(f"⚠️ Negative margin {global_min:.3e} found")
    return VerificationReport(
        channel_digest=bc.digest(),
        per_gate_results=tuple(results),
        global_min_margin=global_min,
        holds=holds,
        search_metadata=SearchMetadata(
            config=cfg,
            lattice_points=lattice_points,
            refined_points=evaluations - lattice_points,
            oracle_resolution=resolution,
            oracle_points=oracle_points,
            oracle_min_margin=oracle_min,
            oracle_witness=oracle_witness,
        ),
    )


def search_violation(bc: BroadcastChannel, cfg: OptimizerConfig) -> GateJoint | None:
    """Most negative-margin deterministic-gate witness for |X| >= 3, or None."""
    if bc.input_size < 3:
        raise DimensionError(
            f"counterexample search needs at least 3 inputs, got {bc.input_size}"
        )
    resolution = min(cfg.grid_resolution, settings.violation_resolution)
    search_cfg = cfg.model_copy(update={"grid_resolution": resolution})
    gates = [
        Gate(table=table, u_size=size, v_size=size)
        for size in range(2, min(bc.input_size, settings.violation_aux_size) + 1)
        for table in itertools.product(range(bc.input_size), repeat=size * size)
    ]
    logger.info(f"🔍 Searching {len(gates)} gates for a violation at resolution {resolution}")

    def run(gate: Gate) -> GateSearch:
        kernel = _GateKernel.build(gate, bc)
        blocks = [Block(gate.u_size * gate.v_size)]
        lattice = simplex_lattice(blocks[0].size, resolution)
        shape = (gate.u_size, gate.v_size)

        def excess(points: np.ndarray) -> np.ndarray:
            puv = points.reshape(points.shape[:-1] + shape)
            return kernel.lhs(puv) - kernel.rhs(puv)

        point, value, count = maximize_on_lattice(excess, lattice, blocks, search_cfg)
        return GateSearch(point.reshape(shape), 0.0, point.reshape(shape), -value,
                          len(lattice), count)

    best: GateJoint | None = None
    best_margin = -settings.margin_tolerance
    for gate, search in zip(gates, parallel_map(run, gates)):
        if search.min_margin < best_margin:
            candidate = GateJoint(puv=JointPMF.from_table(search.worst), gate=gate)
            value = margin(candidate, bc)
            if value < best_margin:
                best, best_margin = candidate, value
    if best is None:
        logger.info("ℹ️ No violation found")
    else:
        logger.info(f"🎯 Violation found: gate {best.gate.label}, margin {best_margin:.6f}")
    return best
