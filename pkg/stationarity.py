"""First- and second-order optimality certificates for the AND and XOR slices.

All quantities here are in nats. With X binary, a_i = P(Y=i|X=0),
â_i = P(Y=i|X=1), b_i = P(Z=i|X=0), b̂_i = P(Z=i|X=1). For a fixed p(x) the
inequality's left side equals f = H(U,V) - H(U,Y) - H(V,Z) plus a constant.
"""
import logging
from collections.abc import Callable
from enum import Enum

import numpy as np
from pydantic import model_validator
from scipy.optimize import brentq, root
from scipy.special import entr

from config import settings
from models import (
    BroadcastChannel,
    CaseId,
    Distribution,
    FrozenModel,
    JointPMF,
    OptimizerConfig,
)
from theorem import canonical_gate, max_lhs_for_gate
from utils import parallel_map

logger = logging.getLogger(__name__)


class BoundaryPointError(ValueError):
    """Closed-form derivative requested where a mass or channel entry is zero."""


class NotStationaryError(ValueError):
    """Certificate requested at a point whose gradient is not numerically zero."""


class AndPoint(FrozenModel):
    """p(u,v) on the AND slice, parameterized by (p10, p01) at fixed p11 = P(X=1)."""

    p11: float
    p10: float
    p01: float

    @model_validator(mode="after")
    def _check_slice(self) -> "AndPoint":
        if not 0.0 < self.p11 < 1.0:
            raise ValueError(f"p11 must lie in (0, 1), got {self.p11}")
        if self.p10 < 0.0 or self.p01 < 0.0:
            raise ValueError(f"p10 = {self.p10}, p01 = {self.p01} must be non-negative")
        if 1.0 - self.p11 - self.p10 - self.p01 < -settings.internal_tolerance:
            raise ValueError("p10 + p01 exceeds 1 - p11")
        return self

    @property
    def p00(self) -> float:
        rest = 1.0 - self.p11 - self.p10 - self.p01
        return rest if rest > settings.internal_tolerance else 0.0

    @property
    def table(self) -> np.ndarray:
        return np.array([[self.p00, self.p01], [self.p10, self.p11]])

    def shifted(self, d10: float, d01: float) -> "AndPoint":
        return AndPoint(p11=self.p11, p10=self.p10 + d10, p01=self.p01 + d01)

    def joint(self) -> JointPMF:
        return JointPMF.from_table(self.table)


class LyapunovPerturbation(FrozenModel):
    """Multiplicative direction q = p(1 + eps L) with L11 = 0 on the AND slice."""

    l00: float
    l01: float
    l10: float

    @classmethod
    def balanced(cls, pt: AndPoint, l01: float, l10: float) -> "LyapunovPerturbation":
        """Choose L00 so that p00 L00 + p01 L01 + p10 L10 = 0."""
        if pt.p00 <= 0.0:
            raise BoundaryPointError("balancing needs p00 > 0")
        return cls(l00=-(pt.p01 * l01 + pt.p10 * l10) / pt.p00, l01=l01, l10=l10)

    def direction(self, pt: AndPoint) -> np.ndarray:
        """Additive direction λ(u,v,x) = p(u,v) L(u,v) at x = u AND v."""
        lam = np.zeros((2, 2, 2))
        lam[0, 0, 0] = pt.p00 * self.l00
        lam[0, 1, 0] = pt.p01 * self.l01
        lam[1, 0, 0] = pt.p10 * self.l10
        return lam


class XorPerturbation(FrozenModel):
    """Additive direction λ(u,v,x) around an XOR-gate joint, P(X=0) preserved."""

    lambdas: tuple[float, ...]

    @model_validator(mode="after")
    def _check_constraints(self) -> "XorPerturbation":
        if len(self.lambdas) != 8:
            raise ValueError(f"XOR perturbation needs 8 entries, got {len(self.lambdas)}")
        lam = self.direction()
        # triples with x != u XOR v start at zero mass
        for u, v, x in ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)):
            if lam[u, v, x] < 0.0:
                raise ValueError(f"λ{u}{v}{x} must be non-negative")
        for x in range(2):
            if abs(lam[:, :, x].sum()) > settings.internal_tolerance:
                raise ValueError(f"λ entries with x = {x} must sum to zero")
        return self

    def direction(self) -> np.ndarray:
        return np.asarray(self.lambdas, dtype=float).reshape(2, 2, 2)


class HessianG(FrozenModel):
    g11: float
    g12: float
    g22: float

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 * self.g12


class AndVerdict(str, Enum):
    REJECTED_SADDLE = "REJECTED_SADDLE"
    DEGENERATE_CHANNEL = "DEGENERATE_CHANNEL"
    INCONCLUSIVE = "INCONCLUSIVE"


class AndCertificate(FrozenModel):
    verdict: AndVerdict
    point: AndPoint
    gradient: tuple[float, float]
    hessian: HessianG
    det: float
    concavity_slack: tuple[float, float]
    channel_gap_y: float
    channel_gap_z: float


class EdgeCase(str, Enum):
    P00_ZERO = "P00_ZERO"
    P01_ZERO = "P01_ZERO"
    P10_ZERO = "P10_ZERO"


class EdgeResidual(FrozenModel):
    case: EdgeCase
    point: AndPoint
    residual: float


class XorResiduals(FrozenModel):
    eq1: float
    eq2: float
    free1: float
    free2: float
    free3: float
    free4: float
    det: float

    @property
    def slacks(self) -> tuple[float, float, float, float]:
        return self.free1, self.free2, self.free3, self.free4


class XorClass(str, Enum):
    CHANNEL_DEGENERATE = "CHANNEL_DEGENERATE"
    UNIFORM_INDEPENDENT = "UNIFORM_INDEPENDENT"
    NOT_LOCAL_MAX = "NOT_LOCAL_MAX"


class XorVerdict(str, Enum):
    BOUNDARY_MAXIMUM = "BOUNDARY_MAXIMUM"
    FAILS_FIRST_ORDER = "FAILS_FIRST_ORDER"
    INDEPENDENT = "INDEPENDENT"
    DEGENERATE = "DEGENERATE"
    INCONCLUSIVE = "INCONCLUSIVE"


class XorSweepEntry(FrozenModel):
    px0: float
    puv: JointPMF
    verdict: XorVerdict
    residuals: XorResiduals | None = None
    xor_class: XorClass | None = None


class AndSweepReport(FrozenModel):
    p11_values: tuple[float, ...]
    certificates: tuple[AndCertificate, ...]
    edge_points: int
    min_edge_residual: float
    inconclusive: int


class XorSweepReport(FrozenModel):
    entries: tuple[XorSweepEntry, ...]
    inconclusive: int


# --- channel helpers --------------------------------------------------------


def _binary_rows(bc: BroadcastChannel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if bc.input_size != 2:
        raise ValueError(f"stationarity certificates need a binary input, got {bc.input_size}")
    a, a_hat = bc.to_y.array
    b, b_hat = bc.to_z.array
    return a, a_hat, b, b_hat


def _positive_rows(bc: BroadcastChannel):
    rows = _binary_rows(bc)
    if any((row <= 0.0).any() for row in rows):
        raise BoundaryPointError("closed forms need every channel entry to be positive")
    return rows


def channel_gaps(bc: BroadcastChannel) -> tuple[float, float]:
    """max_i |a_i - â_i| and max_i |b_i - b̂_i|."""
    a, a_hat, b, b_hat = _binary_rows(bc)
    return float(np.abs(a - a_hat).max()), float(np.abs(b - b_hat).max())


def is_degenerate(
    bc: BroadcastChannel, tol: float | None = None, both: bool = False
) -> bool:
    """Either receiver's output is independent of X, or both when `both` is set."""
    tol = settings.degenerate_tolerance if tol is None else tol
    gaps = channel_gaps(bc)
    return (max(gaps) if both else min(gaps)) <= tol


def classify_and_hessian(
    hessian: HessianG, bc: BroadcastChannel, tol: float | None = None
) -> AndVerdict:
    """A negative determinant rules out a local maximum whatever the channel."""
    tol = settings.certificate_tolerance if tol is None else tol
    if hessian.det < -tol:
        return AndVerdict.REJECTED_SADDLE
    if is_degenerate(bc, both=True):
        return AndVerdict.DEGENERATE_CHANNEL
    return AndVerdict.INCONCLUSIVE


def _require_interior(pt: AndPoint) -> None:
    if min(pt.p00, pt.p01, pt.p10) <= 0.0:
        raise BoundaryPointError(
            f"interior point needed, got p00={pt.p00}, p01={pt.p01}, p10={pt.p10}"
        )


# --- AND slice --------------------------------------------------------------


def and_objective(pt: AndPoint, bc: BroadcastChannel) -> float:
    """f = H(U,V) - H(U,Y) - H(V,Z) in nats at X = U AND V."""
    a, a_hat, b, b_hat = _binary_rows(bc)
    p = pt.table
    puy = np.array([(p[0, 0] + p[0, 1]) * a, p[1, 0] * a + p[1, 1] * a_hat])
    pvz = np.array([(p[0, 0] + p[1, 0]) * b, p[0, 1] * b + p[1, 1] * b_hat])
    return float(entr(p).sum() - entr(puy).sum() - entr(pvz).sum())


def _and_terms(pt: AndPoint, bc: BroadcastChannel):
    a, a_hat, b, b_hat = _positive_rows(bc)
    _require_interior(pt)
    p00, p01, p10, p11 = pt.p00, pt.p01, pt.p10, pt.p11
    big_a = a * (p00 + p01)
    big_b = a * p10 + a_hat * p11
    big_c = b * (p00 + p10)
    big_d = b * p01 + b_hat * p11
    return a, b, big_a, big_b, big_c, big_d


def and_gradient(pt: AndPoint, bc: BroadcastChannel) -> tuple[float, float]:
    """(∂f/∂p10, ∂f/∂p01) with p11 fixed and p00 = 1 - p11 - p10 - p01."""
    a, b, big_a, big_b, big_c, big_d = _and_terms(pt, bc)
    d10 = np.log(pt.p00 / pt.p10) - np.sum(a * np.log(big_a / big_b))
    d01 = np.log(pt.p00 / pt.p01) - np.sum(b * np.log(big_c / big_d))
    return float(d10), float(d01)


def and_hessian(pt: AndPoint, bc: BroadcastChannel) -> HessianG:
    a, b, _, big_b, _, big_d = _and_terms(pt, bc)
    p00, p01, p10 = pt.p00, pt.p01, pt.p10
    g11 = -1.0 / p00 - 1.0 / p10 + 1.0 / (p00 + p01) + np.sum(a * a / big_b)
    g22 = -1.0 / p00 - 1.0 / p01 + 1.0 / (p00 + p10) + np.sum(b * b / big_d)
    return HessianG(g11=float(g11), g12=-1.0 / p00, g22=float(g22))


def and_concavity_slack(pt: AndPoint, bc: BroadcastChannel) -> tuple[float, float]:
    """Σ a_i²(p00+p01)/B_i - p00/p10 and its b-counterpart.

    Both are non-negative wherever the matching gradient component vanishes.
    """
    a, b, _, big_b, _, big_d = _and_terms(pt, bc)
    p00, p01, p10 = pt.p00, pt.p01, pt.p10
    slack_y = np.sum(a * a * (p00 + p01) / big_b) - p00 / p10
    slack_z = np.sum(b * b * (p00 + p10) / big_d) - p00 / p01
    return float(slack_y), float(slack_z)


def and_interior_certificate(
    pt: AndPoint, bc: BroadcastChannel, tol: float | None = None
) -> AndCertificate:
    """Classify a numerically stationary interior point of the AND slice."""
    gradient = and_gradient(pt, bc)
    norm = float(np.hypot(*gradient))
    if norm > settings.stationarity_tolerance:
        raise NotStationaryError(f"gradient norm {norm:.3e} at {pt}")
    hessian = and_hessian(pt, bc)
    gap_y, gap_z = channel_gaps(bc)
    verdict = classify_and_hessian(hessian, bc, tol)
    if verdict == AndVerdict.INCONCLUSIVE:
        logger.warning(f"⚠️ Inconclusive AND certificate at {pt}, det G = {hessian.det:.3e}")
    return AndCertificate(
        verdict=verdict,
        point=pt,
        gradient=gradient,
        hessian=hessian,
        det=hessian.det,
        concavity_slack=and_concavity_slack(pt, bc),
        channel_gap_y=gap_y,
        channel_gap_z=gap_z,
    )


def and_edge_residuals(pt: AndPoint, bc: BroadcastChannel) -> EdgeResidual:
    """Positive residual showing an edge point of the AND slice is no local maximum."""
    a, a_hat, b, b_hat = _positive_rows(bc)
    zero = settings.internal_tolerance
    zeros = [m <= zero for m in (pt.p00, pt.p01, pt.p10)]
    if sum(zeros) != 1:
        raise BoundaryPointError(
            f"exactly one of p00, p01, p10 must vanish, got {pt.p00}, {pt.p01}, {pt.p10}"
        )
    p01, p10, p11 = pt.p01, pt.p10, pt.p11
    if zeros[0]:
        big_b = a * p10 + a_hat * p11
        big_d = b * p01 + b_hat * p11
        residual = np.sum(a * a * p10 * p10 / big_b) + np.sum(b * b * p01 * p01 / big_d)
        case = EdgeCase.P00_ZERO
    elif zeros[1]:
        residual = np.sum(a * np.log((a * p10 + a_hat * p11) / (a * p10)))
        case = EdgeCase.P01_ZERO
    else:
        residual = np.sum(b * np.log((b * p01 + b_hat * p11) / (b * p01)))
        case = EdgeCase.P10_ZERO
    return EdgeResidual(case=case, point=pt, residual=float(residual))


def directional_derivatives(
    joint_uvx: JointPMF, bc: BroadcastChannel, direction: np.ndarray
) -> tuple[float, float]:
    """First and second ε-derivatives of f along q = p + ε·λ at ε = 0."""
    p = joint_uvx.table
    lam = np.asarray(direction, dtype=float)
    if p.shape != lam.shape or p.shape[2] != bc.input_size:
        raise ValueError(f"direction shape {lam.shape} does not match joint {p.shape}")
    if abs(lam.sum()) > settings.internal_tolerance:
        raise ValueError("direction must keep total mass fixed")
    if np.any(lam[p <= 0.0] < 0.0):
        raise BoundaryPointError("direction drives a zero-mass triple negative")
    y, z = bc.to_y.array, bc.to_z.array
    pairs = [
        (-1.0, p.sum(axis=2), lam.sum(axis=2)),
        (1.0, np.einsum("uvx,xy->uy", p, y), np.einsum("uvx,xy->uy", lam, y)),
        (1.0, np.einsum("uvx,xz->vz", p, z), np.einsum("uvx,xz->vz", lam, z)),
    ]
    first = second = 0.0
    for sign, mass, move in pairs:
        support = mass > 0.0
        if np.any(np.abs(move[~support]) > 0.0):
            raise BoundaryPointError("direction moves mass onto a zero-probability cell")
        first += sign * float(np.sum(move[support] * np.log(mass[support])))
        second += sign * float(np.sum(move[support] ** 2 / mass[support]))
    return first, second


def finite_difference_gradient(
    evaluate: Callable[[AndPoint], float], pt: AndPoint, step: float
) -> tuple[float, float]:
    """Central differences in (p10, p01)."""
    if min(pt.p00, pt.p10, pt.p01) <= step:
        raise ValueError(f"step {step} too large at {pt}")
    d10 = (evaluate(pt.shifted(step, 0.0)) - evaluate(pt.shifted(-step, 0.0))) / (2 * step)
    d01 = (evaluate(pt.shifted(0.0, step)) - evaluate(pt.shifted(0.0, -step))) / (2 * step)
    return d10, d01


def finite_difference_hessian(
    evaluate: Callable[[AndPoint], float], pt: AndPoint, step: float
) -> HessianG:
    if min(pt.p10, pt.p01) <= step or pt.p00 <= 2 * step:
        raise ValueError(f"step {step} too large at {pt}")
    h = step
    center = evaluate(pt)
    g11 = (evaluate(pt.shifted(h, 0.0)) - 2 * center + evaluate(pt.shifted(-h, 0.0))) / h**2
    g22 = (evaluate(pt.shifted(0.0, h)) - 2 * center + evaluate(pt.shifted(0.0, -h))) / h**2
    g12 = (
        evaluate(pt.shifted(h, h))
        - evaluate(pt.shifted(h, -h))
        - evaluate(pt.shifted(-h, h))
        + evaluate(pt.shifted(-h, -h))
    ) / (4 * h**2)
    return HessianG(g11=g11, g12=g12, g22=g22)


def _solve_p10(bc: BroadcastChannel, p11: float, p01: float) -> float | None:
    """Root of ∂f/∂p10 in p10 for fixed (p11, p01); the derivative decreases in p10."""
    room = 1.0 - p11 - p01
    edge = max(room * 1e-9, 1e-10)
    lo, hi = edge, room - edge

    def d10(p10: float) -> float:
        return and_gradient(AndPoint(p11=p11, p10=p10, p01=p01), bc)[0]

    f_lo, f_hi = d10(lo), d10(hi)
    if f_lo <= 0.0 or f_hi >= 0.0:
        return None
    return brentq(d10, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def and_stationary_points(
    bc: BroadcastChannel, p11: float, scan_points: int | None = None
) -> list[AndPoint]:
    """Interior stationary points of f at fixed p11, by bisection along scan lines."""
    _positive_rows(bc)
    scan_points = settings.sweep_scan_points if scan_points is None else scan_points
    room = 1.0 - p11
    grid = room * np.arange(1, scan_points + 1) / (scan_points + 1)

    def residual(p01: float) -> float:
        p10 = _solve_p10(bc, p11, p01)
        if p10 is None:
            return np.nan
        return and_gradient(AndPoint(p11=p11, p10=p10, p01=p01), bc)[1]

    values = np.array([residual(p01) for p01 in grid])
    points = []
    for k in range(len(grid) - 1):
        left, right = values[k], values[k + 1]
        if not (np.isfinite(left) and np.isfinite(right)):
            continue
        if left == 0.0:
            p01 = grid[k]
        elif left * right < 0.0:
            p01 = brentq(residual, grid[k], grid[k + 1], xtol=1e-15,
                         rtol=4 * np.finfo(float).eps)
        else:
            continue
        p10 = _solve_p10(bc, p11, p01)
        if p10 is None:
            continue
        pt = AndPoint(p11=p11, p10=p10, p01=p01)
        norm = float(np.hypot(*and_gradient(pt, bc)))
        if norm <= settings.stationarity_tolerance:
            points.append(pt)
        else:
            logger.debug(f"Dropping near-stationary point {pt} with gradient {norm:.3e}")
    return points


def _grid(points: int) -> np.ndarray:
    return np.arange(1, points + 1) / (points + 1)


def and_sweep(
    bc: BroadcastChannel, p11_points: int | None = None, scan_points: int | None = None
) -> AndSweepReport:
    """Certify every stationary point found on a p11 grid and scan the three edges."""
    p11_values = _grid(settings.sweep_p11_points if p11_points is None else p11_points)
    found = parallel_map(lambda p11: and_stationary_points(bc, p11, scan_points), p11_values)
    certificates = [and_interior_certificate(pt, bc) for pts in found for pt in pts]

    edge = []
    for p11 in p11_values:
        for t in _grid(scan_points or settings.sweep_scan_points)[::10]:
            room = 1.0 - p11
            edge.append(AndPoint(p11=p11, p10=t * room, p01=(1.0 - t) * room))
            edge.append(AndPoint(p11=p11, p10=t * room, p01=0.0))
            edge.append(AndPoint(p11=p11, p10=0.0, p01=t * room))
    residuals = [and_edge_residuals(pt, bc).residual for pt in edge]
    inconclusive = sum(c.verdict == AndVerdict.INCONCLUSIVE for c in certificates)
    logger.info(
        f"📊 AND sweep: {len(certificates)} stationary points, {inconclusive} inconclusive, "
        f"min edge residual {min(residuals):.3e}"
    )
    return AndSweepReport(
        p11_values=tuple(float(v) for v in p11_values),
        certificates=tuple(certificates),
        edge_points=len(edge),
        min_edge_residual=min(residuals),
        inconclusive=inconclusive,
    )


# --- XOR slice --------------------------------------------------------------


def _xor_logs(p: np.ndarray, bc: BroadcastChannel):
    a, a_hat, b, b_hat = _positive_rows(bc)
    alpha = np.log((a * p[0, 0] + a_hat * p[0, 1]) / (a * p[1, 1] + a_hat * p[1, 0]))
    beta = np.log((b * p[0, 0] + b_hat * p[1, 0]) / (b * p[1, 1] + b_hat * p[0, 1]))
    return a, a_hat, b, b_hat, alpha, beta


def xor_first_order_residuals(puv: JointPMF, bc: BroadcastChannel) -> XorResiduals:
    """Equality residuals, inequality slacks and p00 p11 - p01 p10 at X = U XOR V."""
    p = puv.table
    if p.shape != (2, 2) or (p <= 0.0).any():
        raise BoundaryPointError(f"XOR residuals need an interior 2x2 joint, got {p.tolist()}")
    a, a_hat, b, b_hat, alpha, beta = _xor_logs(p, bc)
    p00, p01, p10, p11 = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    return XorResiduals(
        eq1=float(np.log(p00 / p11) - np.sum(a * alpha) - np.sum(b * beta)),
        eq2=float(np.log(p01 / p10) - np.sum(a_hat * alpha) + np.sum(b_hat * beta)),
        free1=float(np.sum(b * beta) - np.log(p00 / p01)),
        free2=float(np.sum(a * alpha) - np.log(p00 / p10)),
        free3=float(-np.sum(b_hat * beta) - np.log(p01 / p00)),
        free4=float(np.sum(a_hat * alpha) - np.log(p01 / p11)),
        det=float(p00 * p11 - p01 * p10),
    )


def xor_degeneracy_classifier(
    puv: JointPMF, bc: BroadcastChannel, tol: float | None = None
) -> XorClass:
    tol = settings.certificate_tolerance if tol is None else tol
    if is_degenerate(bc):
        return XorClass.CHANNEL_DEGENERATE
    a, a_hat, b, b_hat = _binary_rows(bc)
    p = puv.table
    p00, p01, p10, p11 = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    ratio_z = (b * p00 + b_hat * p10) * p01 - p00 * (b * p11 + b_hat * p01)
    ratio_y = (a * p00 + a_hat * p01) * p10 - p00 * (a * p11 + a_hat * p10)
    if np.abs(ratio_z).max() <= tol and np.abs(ratio_y).max() <= tol:
        return XorClass.UNIFORM_INDEPENDENT
    return XorClass.NOT_LOCAL_MAX


def _polish_xor(p: np.ndarray, bc: BroadcastChannel) -> np.ndarray | None:
    """Solve both equality conditions at fixed P(X=0), starting from p."""
    s0, s1 = p[0, 0] + p[1, 1], p[0, 1] + p[1, 0]

    def build(params: np.ndarray) -> np.ndarray:
        return np.array([[params[0], params[1]], [s1 - params[1], s0 - params[0]]])

    def equations(params: np.ndarray) -> np.ndarray:
        table = build(params)
        if (table <= 0.0).any():
            return np.array([1e6, 1e6])
        r = xor_first_order_residuals(JointPMF.from_table(table), bc)
        return np.array([r.eq1, r.eq2])

    solution = root(equations, np.array([p[0, 0], p[0, 1]]), method="hybr")
    if not solution.success:
        return None
    table = build(solution.x)
    if (table <= 0.0).any():
        return None
    return table


def xor_sweep(
    bc: BroadcastChannel, cfg: OptimizerConfig, points: int | None = None
) -> XorSweepReport:
    """Check the XOR-slice maximizer at each P(X=0) on a grid."""
    _positive_rows(bc)
    gate = canonical_gate(CaseId.XOR)
    px0_values = _grid(settings.sweep_p11_points if points is None else points)

    def check(px0: float) -> XorSweepEntry:
        _, argmax = max_lhs_for_gate(
            bc, gate, cfg, fixed_px=Distribution.from_array([px0, 1.0 - px0])
        )
        table = argmax.puv.table
        if table.min() <= settings.boundary_margin:
            return XorSweepEntry(px0=px0, puv=argmax.puv, verdict=XorVerdict.BOUNDARY_MAXIMUM)
        polished = _polish_xor(table, bc)
        if polished is None:
            return XorSweepEntry(px0=px0, puv=argmax.puv, verdict=XorVerdict.FAILS_FIRST_ORDER)
        puv = JointPMF.from_table(polished / polished.sum())
        residuals = xor_first_order_residuals(puv, bc)
        stationary = max(abs(residuals.eq1), abs(residuals.eq2)) <= settings.stationarity_tolerance
        if not stationary or min(residuals.slacks) < -settings.certificate_tolerance:
            verdict, xor_class = XorVerdict.FAILS_FIRST_ORDER, None
        elif abs(residuals.det) <= settings.determinant_tolerance:
            verdict, xor_class = XorVerdict.INDEPENDENT, None
        else:
            xor_class = xor_degeneracy_classifier(puv, bc)
            verdict = (
                XorVerdict.INCONCLUSIVE if xor_class == XorClass.NOT_LOCAL_MAX
                else XorVerdict.DEGENERATE
            )
        return XorSweepEntry(
            px0=px0, puv=puv, verdict=verdict, residuals=residuals, xor_class=xor_class
        )

    entries = parallel_map(check, list(px0_values))
    inconclusive = sum(e.verdict == XorVerdict.INCONCLUSIVE for e in entries)
    logger.info(f"📊 XOR sweep: {len(entries)} slices, {inconclusive} inconclusive")
    return XorSweepReport(entries=tuple(entries), inconclusive=inconclusive)
