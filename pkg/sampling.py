"""Named channels and seeded random channels / joints."""
import logging

import numpy as np

from models import BroadcastChannel, Gate, GateJoint, JointPMF
from stationarity import AndPoint

logger = logging.getLogger(__name__)


def _uniform_simplex(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform draws on the simplex of the last axis via exponential spacings."""
    raw = rng.standard_exponential(shape)
    return raw / raw.sum(axis=-1, keepdims=True)


def bssc(skew: float = 0.5) -> BroadcastChannel:
    """Binary skew-symmetric broadcast channel: two mirrored Z-channels.

    Y sees input 0 noiselessly and input 1 through crossover `skew`; Z is the
    mirror image. skew = 1/2 is the canonical BSSC.
    """
    if not 0.0 < skew < 1.0:
        raise ValueError(f"BSSC skew must lie in (0, 1), got {skew}")
    return BroadcastChannel.from_arrays(
        [[1.0, 0.0], [skew, 1.0 - skew]],
        [[1.0 - skew, skew], [0.0, 1.0]],
    )


def blackwell() -> BroadcastChannel:
    """Deterministic ternary-input channel: y = [x == 2], z = [x >= 1]."""
    return BroadcastChannel.from_arrays(
        [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]],
    )


def identity() -> BroadcastChannel:
    """Both receivers see X noiselessly."""
    return BroadcastChannel.from_arrays(np.eye(2), np.eye(2))


def ss1() -> BroadcastChannel:
    """Both outputs independent of X (a = â and b = b̂)."""
    return BroadcastChannel.from_arrays([[0.3, 0.7], [0.3, 0.7]], [[0.6, 0.4], [0.6, 0.4]])


def mirror(bc: BroadcastChannel) -> BroadcastChannel:
    """Swap the receivers and relabel input and output symbols in reverse."""
    return BroadcastChannel.from_arrays(
        bc.to_z.array[::-1, ::-1], bc.to_y.array[::-1, ::-1]
    )


def pad_input(bc: BroadcastChannel) -> BroadcastChannel:
    """Add an input symbol that behaves exactly like input 0."""
    return BroadcastChannel.from_arrays(
        np.vstack([bc.to_y.array, bc.to_y.array[:1]]),
        np.vstack([bc.to_z.array, bc.to_z.array[:1]]),
    )


def random_channel(ny: int, nz: int, seed: int) -> BroadcastChannel:
    """Binary-input channel with rows drawn uniformly from the output simplices."""
    if not (2 <= ny <= 8 and 2 <= nz <= 8):
        raise ValueError(f"output sizes must lie in [2, 8], got ny={ny}, nz={nz}")
    rng = np.random.default_rng(seed)
    return BroadcastChannel.from_arrays(
        _uniform_simplex(rng, (2, ny)), _uniform_simplex(rng, (2, nz))
    )


def random_gate_joint(seed: int) -> GateJoint:
    rng = np.random.default_rng(seed)
    gate = Gate.from_index(int(rng.integers(16)))
    puv = _uniform_simplex(rng, (4,)).reshape(2, 2)
    return GateJoint(puv=JointPMF.from_table(puv), gate=gate)


def random_and_point(seed: int, floor: float = 0.05) -> AndPoint:
    """Interior AND-slice point with every cell mass at least `floor`."""
    if not 0.0 <= floor < 0.25:
        raise ValueError(f"floor must lie in [0, 1/4), got {floor}")
    rng = np.random.default_rng(seed)
    cells = floor + (1.0 - 4.0 * floor) * _uniform_simplex(rng, (4,))
    return AndPoint(p11=float(cells[3]), p10=float(cells[2]), p01=float(cells[1]))


def trial_seed(seed: int, trial_index: int) -> int:
    """Per-trial seed for batch runs; independent of scheduling order."""
    return seed + trial_index


def channel_from_name(name: str) -> BroadcastChannel:
    """Resolve "bssc[:skew]", "blackwell", "identity", "ss1" or "random:<seed>[:ny:nz]"."""
    kind, _, rest = name.strip().lower().partition(":")
    try:
        if kind == "bssc":
            return bssc(float(rest) if rest else 0.5)
        if kind == "random":
            parts = [int(p) for p in rest.split(":")] if rest else [0]
            seed, ny, nz = (parts + [2, 2])[:3]
            return random_channel(ny, nz, seed)
    except ValueError as e:
        raise ValueError(f"bad channel name '{name}': {e}") from e
    named = {"blackwell": blackwell, "identity": identity, "ss1": ss1}
    if kind in named and not rest:
        return named[kind]()
    raise ValueError(f"unknown channel name '{name}'")
