"""Domain models for the broadcast-channel toolkit."""
import hashlib
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings

GATE_LABELS = (
    "0", "U&V", "U&~V", "U", "~U&V", "V", "U^V", "U|V",
    "~U&~V", "~U^V", "~V", "U|~V", "~U", "~U|V", "~U|~V", "1",
)


class FrozenModel(BaseModel):
    """Immutable pydantic model shared by all domain types."""

    model_config = ConfigDict(frozen=True)


class Distribution(FrozenModel):
    """Probability mass function over a finite alphabet."""

    masses: tuple[float, ...]

    @model_validator(mode="after")
    def _check_simplex(self) -> "Distribution":
        if not self.masses:
            raise ValueError("distribution needs at least one mass")
        for index, mass in enumerate(self.masses):
            if not mass >= 0.0:
                raise ValueError(f"mass {index} = {mass} is negative")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > settings.internal_tolerance:
            raise ValueError(f"sum {total:g} deviates from 1")
        return self

    @classmethod
    def from_array(cls, values) -> "Distribution":
        return cls(masses=tuple(float(v) for v in np.asarray(values, dtype=float).ravel()))

    @property
    def alphabet_size(self) -> int:
        return len(self.masses)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def __getitem__(self, index: int) -> float:
        return self.masses[index]


class TransitionMatrix(FrozenModel):
    """Row-stochastic channel matrix p(output|input)."""

    rows: tuple[Distribution, ...]

    @model_validator(mode="after")
    def _check_rows(self) -> "TransitionMatrix":
        if not self.rows:
            raise ValueError("transition matrix needs at least one row")
        sizes = {row.alphabet_size for row in self.rows}
        if len(sizes) != 1:
            raise ValueError(f"rows have differing output sizes {sorted(sizes)}")
        return self

    @classmethod
    def from_array(cls, rows) -> "TransitionMatrix":
        return cls(rows=tuple(Distribution.from_array(row) for row in np.atleast_2d(rows)))

    @property
    def input_size(self) -> int:
        return len(self.rows)

    @property
    def output_size(self) -> int:
        return self.rows[0].alphabet_size

    @property
    def array(self) -> np.ndarray:
        return np.array([row.masses for row in self.rows], dtype=float)


class BroadcastChannel(FrozenModel):
    """Two receivers Y and Z sharing one input X; only the marginals matter."""

    input_size: int
    to_y: TransitionMatrix
    to_z: TransitionMatrix

    @model_validator(mode="after")
    def _check_inputs(self) -> "BroadcastChannel":
        if not self.to_y.input_size == self.to_z.input_size == self.input_size:
            raise ValueError(
                f"input sizes disagree: declared {self.input_size}, "
                f"to_y {self.to_y.input_size}, to_z {self.to_z.input_size}"
            )
        return self

    @classmethod
    def from_arrays(cls, to_y, to_z) -> "BroadcastChannel":
        y = TransitionMatrix.from_array(to_y)
        return cls(input_size=y.input_size, to_y=y, to_z=TransitionMatrix.from_array(to_z))

    def with_inputs_flipped(self) -> "BroadcastChannel":
        """Same channel with the input symbols listed in reverse order."""
        return BroadcastChannel(
            input_size=self.input_size,
            to_y=TransitionMatrix(rows=self.to_y.rows[::-1]),
            to_z=TransitionMatrix(rows=self.to_z.rows[::-1]),
        )

    def with_receivers_swapped(self) -> "BroadcastChannel":
        return BroadcastChannel(input_size=self.input_size, to_y=self.to_z, to_z=self.to_y)

    def digest(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()


class JointPMF(FrozenModel):
    """Dense joint distribution; masses are stored flattened in C order."""

    dims: tuple[int, ...]
    masses: tuple[float, ...]

    @model_validator(mode="after")
    def _check_table(self) -> "JointPMF":
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"invalid dims {self.dims}")
        if math.prod(self.dims) != len(self.masses):
            raise ValueError(f"dims {self.dims} do not match {len(self.masses)} masses")
        for index, mass in enumerate(self.masses):
            if not mass >= 0.0:
                raise ValueError(f"mass {index} = {mass} is negative")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > settings.internal_tolerance:
            raise ValueError(f"sum {total:g} deviates from 1")
        return self

    @classmethod
    def from_table(cls, table) -> "JointPMF":
        table = np.asarray(table, dtype=float)
        return cls(dims=tuple(table.shape), masses=tuple(table.ravel().tolist()))

    @property
    def table(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float).reshape(self.dims)


class Gate(FrozenModel):
    """Deterministic map f: U x V -> X; table is indexed by u * v_size + v."""

    table: tuple[int, ...]
    u_size: int = 2
    v_size: int = 2

    @model_validator(mode="after")
    def _check_table(self) -> "Gate":
        if len(self.table) != self.u_size * self.v_size:
            raise ValueError(f"gate table needs {self.u_size * self.v_size} entries")
        if min(self.table) < 0:
            raise ValueError("gate entries must be non-negative symbols")
        return self

    @classmethod
    def from_index(cls, index: int) -> "Gate":
        """Binary gate whose table bits (cell 00 first) spell `index`."""
        if not 0 <= index < 16:
            raise ValueError(f"binary gate index {index} out of range")
        return cls(table=tuple((index >> (3 - k)) & 1 for k in range(4)))

    @property
    def index(self) -> int | None:
        if (self.u_size, self.v_size) != (2, 2) or max(self.table) > 1:
            return None
        return sum(bit << (3 - k) for k, bit in enumerate(self.table))

    @property
    def label(self) -> str:
        index = self.index
        if index is not None:
            return GATE_LABELS[index]
        return "f" + "".join(str(x) for x in self.table)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=int).reshape(self.u_size, self.v_size)

    def __call__(self, u: int, v: int) -> int:
        return self.table[u * self.v_size + v]


class GateJoint(FrozenModel):
    """p(u,v) together with the gate defining X = f(U,V)."""

    puv: JointPMF
    gate: Gate

    @model_validator(mode="after")
    def _check_shape(self) -> "GateJoint":
        if self.puv.dims != (self.gate.u_size, self.gate.v_size):
            raise ValueError(
                f"puv dims {self.puv.dims} do not match gate "
                f"{(self.gate.u_size, self.gate.v_size)}"
            )
        return self

    def triple_table(self, x_size: int) -> np.ndarray:
        """Dense p(u,v,x) with all mass of cell (u,v) on x = f(u,v)."""
        puv = self.puv.table
        triple = np.zeros(puv.shape + (x_size,))
        u, v = np.indices(puv.shape)
        triple[u, v, self.gate.array] = puv
        return triple

    def induced_px(self, x_size: int) -> np.ndarray:
        return self.triple_table(x_size).sum(axis=(0, 1))


class CaseId(str, Enum):
    CONST = "CONST"
    PASS = "PASS"
    AND = "AND"
    XOR = "XOR"


class Relabeling(FrozenModel):
    """Symbol bijection carrying a gate onto its canonical representative.

    The transport first exchanges U and V when `swap_uv` is set (the channel's
    receivers are exchanged with them), then complements U, V and X as flagged.
    Complementing X exchanges the channel's input rows.
    """

    swap_uv: bool = False
    u_flip: bool = False
    v_flip: bool = False
    x_flip: bool = False

    def cell_map(self) -> dict[str, str]:
        """Canonical cell "uv" -> original cell "uv" carrying the same mass."""
        mapping = {}
        for cu in range(2):
            for cv in range(2):
                u, v = cu ^ self.u_flip, cv ^ self.v_flip
                if self.swap_uv:
                    u, v = v, u
                mapping[f"{cu}{cv}"] = f"{u}{v}"
        return mapping


class CanonicalCase(FrozenModel):
    case_id: CaseId
    relabeling: Relabeling
    flip_channel: bool


class OptimizerConfig(FrozenModel):
    """Deterministic lattice + shrinking refinement parameters."""

    grid_resolution: int = Field(ge=2)
    refine_iterations: int = Field(ge=0)
    refine_shrink: float = Field(gt=0.0, lt=1.0)
    seed: int = 0

    @classmethod
    def from_settings(cls, **overrides) -> "OptimizerConfig":
        values = {
            "grid_resolution": settings.grid_resolution,
            "refine_iterations": settings.refine_iterations,
            "refine_shrink": settings.refine_shrink,
            "seed": settings.seed,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class RtdPoint(FrozenModel):
    """Joint p(w,x) with |W| = |X| = 2."""

    joint_wx: JointPMF

    @model_validator(mode="after")
    def _check_dims(self) -> "RtdPoint":
        if self.joint_wx.dims != (2, 2):
            raise ValueError(f"R-TD point needs a 2x2 joint, got {self.joint_wx.dims}")
        return self


class MartonWitness(FrozenModel):
    """p(w), and per W-slice a gate and p(u,v); X is a function of (U,V,W)."""

    pw: Distribution
    per_w_gate: tuple[Gate, Gate]
    per_w_puv: tuple[JointPMF, JointPMF]

    @model_validator(mode="after")
    def _check_slices(self) -> "MartonWitness":
        if self.pw.alphabet_size != 2:
            raise ValueError("Marton witness needs |W| = 2")
        for gate, puv in zip(self.per_w_gate, self.per_w_puv):
            GateJoint(puv=puv, gate=gate)
        return self


class SliceCase(str, Enum):
    Y_STRONGER = "Y_STRONGER"  # I(X;Y|W=w) >= I(X;Z|W=w)
    Z_STRONGER = "Z_STRONGER"


class SliceSplit(FrozenModel):
    """One W-slice of a Marton witness against the stronger receiver's rate."""

    w: int
    mass: float
    case: SliceCase
    slice_value: float  # I(U;Y|W=w) + I(V;Z|W=w) - I(U;V|W=w)
    rate_y: float
    rate_z: float


class RtdEqualityCheck(FrozenModel):
    """marton_value <= slice_bound <= rtd_value, the chain that forces equality."""

    slices: tuple[SliceSplit, ...]
    common: float
    marton_value: float
    slice_bound: float
    rtd_value: float
    holds: bool


class GateResult(FrozenModel):
    gate: Gate
    label: str
    case: CanonicalCase
    max_lhs: float
    argmax: GateJoint
    rhs_at_argmax: float
    margin: float
    min_margin: float
    min_margin_point: GateJoint


class SearchMetadata(FrozenModel):
    config: OptimizerConfig
    lattice_points: int
    refined_points: int
    oracle_resolution: int
    oracle_points: int
    oracle_min_margin: float
    oracle_witness: JointPMF


class VerificationReport(FrozenModel):
    channel_digest: str
    per_gate_results: tuple[GateResult, ...]
    global_min_margin: float
    holds: bool
    search_metadata: SearchMetadata
