from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from info_core import DimensionError, mutual_information
from models import BroadcastChannel, CaseId, Distribution, Gate, GateJoint, JointPMF
from sampling import (
    blackwell,
    bssc,
    identity,
    pad_input,
    random_channel,
    random_gate_joint,
    ss1,
)
from theorem import (
    GateError,
    InfeasibleSliceError,
    all_gates,
    canonical_gate,
    equivalent_form_margin,
    gate_canonicalize,
    lhs_value,
    margin,
    max_lhs_for_gate,
    restore_gate_joint,
    rhs_value,
    search_violation,
    transport_channel,
    transport_gate_joint,
    verify_binary_channel,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)

UNIFORM_PUV = JointPMF.from_table(np.full((2, 2), 0.25))
# Y sees X, Z is pure noise
CLEAN_Y_NOISY_Z = BroadcastChannel.from_arrays(np.eye(2), [[0.5, 0.5], [0.5, 0.5]])


def _gate(label: str) -> Gate:
    return next(g for g in all_gates() if g.label == label)


class TestEvaluation:
    def test_constant_gate_leaves_only_the_dependence_penalty(self):
        puv = JointPMF.from_table([[0.4, 0.1], [0.2, 0.3]])
        gj = GateJoint(puv=puv, gate=canonical_gate(CaseId.CONST))
        assert lhs_value(gj, bssc(0.3)) == pytest.approx(-mutual_information(puv), abs=1e-12)

    def test_and_gate_on_identity_channel(self):
        gj = GateJoint(puv=UNIFORM_PUV, gate=canonical_gate(CaseId.AND))
        assert lhs_value(gj, identity()) == pytest.approx(0.622556, abs=1e-6)
        assert margin(gj, identity()) == pytest.approx(0.188722, abs=1e-6)
        assert equivalent_form_margin(gj, identity()) == pytest.approx(0.188722, abs=1e-6)

    def test_rhs_dimension_check(self):
        with pytest.raises(DimensionError):
            rhs_value(Distribution(masses=(0.2, 0.3, 0.5)), bssc(0.5))

    def test_gate_symbol_outside_input_alphabet(self):
        gj = GateJoint(puv=UNIFORM_PUV, gate=Gate(table=(0, 1, 2, 0)))
        with pytest.raises(GateError):
            margin(gj, bssc(0.5))


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_equivalent_entropy_form_matches_margin(seed):
    bc = random_channel(2, 3, seed)
    gj = random_gate_joint(seed)
    assert equivalent_form_margin(gj, bc) == pytest.approx(margin(gj, bc), abs=1e-10)


class TestCanonicalization:
    def test_case_sizes(self):
        counts = Counter(gate_canonicalize(g).case_id for g in all_gates())
        assert counts == {CaseId.CONST: 2, CaseId.PASS: 4, CaseId.AND: 8, CaseId.XOR: 2}

    def test_canonical_gates_map_to_themselves(self):
        for case_id in CaseId:
            case = gate_canonicalize(canonical_gate(case_id))
            assert case.case_id == case_id
            assert not any(case.relabeling.model_dump().values())
            assert not case.flip_channel

    def test_or_reaches_and_by_complementing_everything(self):
        case = gate_canonicalize(_gate("U|V"))
        r = case.relabeling
        assert case.case_id == CaseId.AND
        assert (r.swap_uv, r.u_flip, r.v_flip, r.x_flip) == (False, True, True, True)
        assert case.flip_channel
        assert r.cell_map() == {"00": "11", "01": "10", "10": "01", "11": "00"}

    def test_not_v_needs_the_swap(self):
        case = gate_canonicalize(_gate("~V"))
        r = case.relabeling
        assert case.case_id == CaseId.PASS
        assert (r.swap_uv, r.u_flip, r.v_flip, r.x_flip) == (True, False, False, True)

    def test_not_u_and_v_flips_u(self):
        case = gate_canonicalize(_gate("~U&V"))
        r = case.relabeling
        assert case.case_id == CaseId.AND
        assert (r.swap_uv, r.u_flip, r.v_flip, r.x_flip) == (False, True, False, False)
        assert r.cell_map() == {"00": "10", "01": "11", "10": "00", "11": "01"}

    def test_non_binary_gate_has_no_case(self):
        with pytest.raises(GateError):
            gate_canonicalize(Gate(table=(0, 1, 2, 0)))


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_transport_preserves_objective(seed):
    bc = random_channel(3, 2, seed)
    gj = random_gate_joint(seed)
    case = gate_canonicalize(gj.gate)
    moved = transport_gate_joint(gj, case)
    moved_bc = transport_channel(bc, case)
    assert moved.gate == canonical_gate(case.case_id)
    assert lhs_value(moved, moved_bc) == pytest.approx(lhs_value(gj, bc), abs=1e-12)
    assert margin(moved, moved_bc) == pytest.approx(margin(gj, bc), abs=1e-12)
    assert restore_gate_joint(moved, case) == gj


def test_or_and_and_maxima_agree(lattice_cfg):
    bc = random_channel(2, 2, 21)
    or_gate = _gate("U|V")
    case = gate_canonicalize(or_gate)
    or_value, _ = max_lhs_for_gate(bc, or_gate, lattice_cfg)
    and_value, _ = max_lhs_for_gate(
        transport_channel(bc, case), canonical_gate(CaseId.AND), lattice_cfg
    )
    assert or_value == pytest.approx(and_value, abs=1e-9)


class TestMaxLhs:
    def test_useless_channel_gives_zero(self, coarse_cfg):
        value, _ = max_lhs_for_gate(ss1(), canonical_gate(CaseId.AND), coarse_cfg)
        assert value == pytest.approx(0.0, abs=1e-9)

    def test_and_gate_on_clean_y(self, coarse_cfg):
        value, argmax = max_lhs_for_gate(
            CLEAN_Y_NOISY_Z, canonical_gate(CaseId.AND), coarse_cfg
        )
        assert value == pytest.approx(1.0, abs=1e-9)
        assert argmax.gate == canonical_gate(CaseId.AND)

    def test_fixed_px_keeps_the_slice(self, coarse_cfg):
        px = Distribution(masses=(0.7, 0.3))
        _, argmax = max_lhs_for_gate(
            bssc(0.5), canonical_gate(CaseId.XOR), coarse_cfg, fixed_px=px
        )
        np.testing.assert_allclose(argmax.induced_px(2), px.array, atol=1e-12)

    def test_constant_gate_cannot_reach_mixed_input(self, coarse_cfg):
        with pytest.raises(InfeasibleSliceError):
            max_lhs_for_gate(
                bssc(0.5), canonical_gate(CaseId.CONST), coarse_cfg,
                fixed_px=Distribution(masses=(0.5, 0.5)),
            )


class TestVerify:
    def test_useless_channel_has_zero_minimum(self, coarse_cfg):
        report = verify_binary_channel(ss1(), coarse_cfg)
        assert report.holds
        assert report.global_min_margin == pytest.approx(0.0, abs=1e-9)
        assert len(report.per_gate_results) == 16

    def test_bssc(self, coarse_cfg):
        report = verify_binary_channel(bssc(0.5), coarse_cfg)
        assert report.holds
        assert -1e-9 <= report.global_min_margin <= 1e-3
        assert report.channel_digest == bssc(0.5).digest()
        for result in report.per_gate_results:
            assert result.min_margin <= result.margin + 1e-12
            assert result.argmax.gate == result.gate

    @pytest.mark.parametrize("seed", [3, 17])
    def test_random_channels_hold(self, coarse_cfg, seed):
        report = verify_binary_channel(random_channel(2, 3, seed), coarse_cfg)
        assert report.holds
        assert report.search_metadata.oracle_min_margin >= -1e-9

    def test_ternary_input_is_refused(self, coarse_cfg):
        with pytest.raises(DimensionError):
            verify_binary_channel(blackwell(), coarse_cfg)

    def test_oracle_resolution_override(self, coarse_cfg):
        report = verify_binary_channel(random_channel(2, 2, 5), coarse_cfg, oracle_resolution=5)
        metadata = report.search_metadata
        assert metadata.oracle_resolution == 5
        # compositions of 4 into 8 cells
        assert metadata.oracle_points == 330
        assert metadata.refined_points >= 0
        assert report.holds


class TestViolationSearch:
    def test_blackwell_channel_violates(self, coarse_cfg):
        cfg = coarse_cfg.model_copy(update={"grid_resolution": 13})
        witness = search_violation(blackwell(), cfg)
        assert witness is not None
        assert margin(witness, blackwell()) <= -0.6

    def test_padded_binary_channel_does_not(self, coarse_cfg):
        assert search_violation(pad_input(bssc(0.5)), coarse_cfg) is None

    def test_useless_ternary_channel_does_not(self, coarse_cfg):
        assert search_violation(pad_input(ss1()), coarse_cfg) is None

    def test_binary_input_is_refused(self, coarse_cfg):
        with pytest.raises(DimensionError):
            search_violation(bssc(0.5), coarse_cfg)
