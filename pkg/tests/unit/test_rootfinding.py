import cmath

import numpy as np
import pytest

from rescont.exceptions import DerivativeDegenerateError, NoConvergenceError
from rescont.potentials import ChannelSet, PotentialModel
from rescont.radial_solver import RadialGrid
from rescont.rootfinding import (
    RootResult,
    classify_root,
    mirror,
    newton_zero,
    scan_bound_states,
)
from rescont.scattering import ResidualValue


def s_wave_model() -> PotentialModel:
    return PotentialModel(ChannelSet((0,)), np.array([[7.0]]))


def fake_residual(f):
    def side_effect(model, k, lam, grid):
        return ResidualValue(det_f=complex(f(k)), det_s_minus_i=1.0, k_power_product=1.0)

    return side_effect


class TestClassifyRoot:
    def test_axis_states(self):
        assert classify_root(2.0j) == "bound"
        assert classify_root(-0.3j) == "virtual"
        assert classify_root(complex(1e-12, 0.9)) == "bound"

    def test_off_axis_states(self):
        assert classify_root(1.2 - 0.1j) == "resonance"
        assert classify_root(-1.2 - 0.1j) == "unphysical_mirror"

    def test_mirror_partner(self):
        k = 1.2 - 0.1j
        assert mirror(k) == -1.2 - 0.1j
        assert classify_root(mirror(k)) == "unphysical_mirror"

    def test_root_result_to_dict(self):
        root = RootResult(2.0j, 1e-9, 4, "bound")
        assert root.to_dict() == {
            "re_k": 0.0,
            "im_k": 2.0,
            "residual_norm": 1e-9,
            "iterations": 4,
            "classification": "bound",
        }


class TestNewtonZero:
    def test_converges_to_simple_zero(self):
        root = newton_zero(lambda k: k * k + 4.0, 0.3 + 1.5j, tol=1e-10)
        assert abs(root.k - 2.0j) < 1e-9
        assert root.classification == "bound"
        assert root.residual_norm <= 1e-10

    def test_converges_to_resonance(self):
        target = 1.5 - 0.2j
        root = newton_zero(lambda k: cmath.sin(k - target), 1.4 - 0.1j)
        assert abs(root.k - target) < 1e-8
        assert root.classification == "resonance"

    def test_damping_recovers_from_overshoot(self):
        root = newton_zero(lambda k: cmath.atan(k - 1.0), 3.0 + 0.1j)
        assert abs(root.k - 1.0) < 1e-8

    def test_flat_function_is_degenerate(self):
        with pytest.raises(DerivativeDegenerateError) as exc_info:
            newton_zero(lambda k: 1.0 + 0j, 1.0j)
        assert exc_info.value.derivative == 0

    def test_no_zero_exhausts_iterations(self):
        with pytest.raises(NoConvergenceError) as exc_info:
            newton_zero(cmath.exp, 1.0 + 0.5j, max_iter=5)
        assert exc_info.value.iterations == 5
        assert exc_info.value.residual_norm > 1e-6

    def test_small_residual_alone_is_not_convergence(self):
        # |f| is far below tol everywhere, but there is no zero to converge to
        with pytest.raises(NoConvergenceError):
            newton_zero(lambda k: 1e-30 * cmath.exp(k), 1.0j, max_iter=10)

    def test_repolish_is_idempotent(self):
        f = lambda k: cmath.sin(k - (1.5 - 0.2j))  # noqa: E731
        root = newton_zero(f, 1.4 - 0.1j)
        again = newton_zero(f, root.k)
        assert abs(again.k - root.k) < 1e-6
        assert again.iterations == 1

    def test_mirror_start_finds_mirror_zero(self):
        # det F(-k*) = ± conj(det F(k)) for real potentials
        resonance = 1.5 - 0.2j
        f = lambda k: (k - resonance) * (k - mirror(resonance))  # noqa: E731
        root = newton_zero(f, resonance + 0.05)
        partner = newton_zero(f, mirror(root.k))
        assert abs(partner.k - mirror(root.k)) < 1e-6
        assert partner.classification == "unphysical_mirror"

    def test_invalid_arguments(self):
        with pytest.raises(ValueError, match="tol"):
            newton_zero(lambda k: k, 1.0, tol=0.0)
        with pytest.raises(ValueError, match="non-zero"):
            newton_zero(lambda k: k, 0.0)


class TestScanBoundStates:
    @staticmethod
    def patch_axis(mocker, f, det_f=None):
        """The matching determinant follows f; det F follows det_f (f when omitted)."""
        mocker.patch(
            "rescont.rootfinding.outgoing_determinant",
            side_effect=lambda model, k, lam, grid: complex(f(k)),
        )
        mocker.patch("rescont.rootfinding.residual", side_effect=fake_residual(det_f or f))

    def test_sign_changes_found_and_sorted(self, mocker):
        self.patch_axis(mocker, lambda k: (k * k + 1.0) * (k * k + 4.0))
        roots = scan_bound_states(s_wave_model(), 7.0, 3.0, RadialGrid())
        assert len(roots) == 2
        assert abs(roots[0].k - 2.0j) < 1e-6
        assert abs(roots[1].k - 1.0j) < 1e-6
        assert all(root.classification == "bound" for root in roots)

    def test_touching_zero_found_without_sign_change(self, mocker):
        self.patch_axis(mocker, lambda k: (k * k + 1.0) ** 2)
        roots = scan_bound_states(s_wave_model(), 7.0, 2.0, RadialGrid())
        assert len(roots) == 1
        assert abs(roots[0].k - 1.0j) < 1e-6

    def test_zero_next_to_a_pole_of_det_f(self, mocker):
        # det F has a pole 1e-4 above the zero; both sit inside one sampling cell
        pole = 2.0001j
        self.patch_axis(
            mocker,
            lambda k: k * k + 4.0,
            det_f=lambda k: (k - 2.0j) / (k - pole),
        )
        roots = scan_bound_states(s_wave_model(), 7.0, 3.0, RadialGrid())
        assert len(roots) == 1
        assert abs(roots[0].k - 2.0j) < 1e-8

    def test_bracketed_zero_kept_when_polish_fails(self, mocker):
        mocker.patch(
            "rescont.rootfinding.outgoing_determinant",
            side_effect=lambda model, k, lam, grid: complex(k * k + 4.0),
        )
        mocker.patch(
            "rescont.rootfinding.newton_complex",
            side_effect=NoConvergenceError("no", 2.0j, 50, 1e-3),
        )
        mocker.patch(
            "rescont.rootfinding.residual",
            return_value=ResidualValue(det_f=1e-9, det_s_minus_i=1.0, k_power_product=1.0),
        )
        roots = scan_bound_states(s_wave_model(), 7.0, 3.0, RadialGrid())
        assert len(roots) == 1
        assert abs(roots[0].k - 2.0j) < 1e-10
        assert roots[0].iterations == 0
        assert roots[0].residual_norm == 1e-9

    def test_polished_root_far_from_its_seed_is_dropped(self, mocker):
        # a magnitude minimum near 1i whose det F zero is at 4i
        self.patch_axis(mocker, lambda k: (k * k + 1.0) ** 2 + 0.01, det_f=lambda k: k - 4.0j)
        assert scan_bound_states(s_wave_model(), 7.0, 5.0, RadialGrid()) == []

    def test_roots_beyond_k_max_ignored(self, mocker):
        self.patch_axis(mocker, lambda k: k * k + 9.0)
        assert scan_bound_states(s_wave_model(), 7.0, 2.0, RadialGrid()) == []

    def test_workers_give_same_roots(self, mocker):
        self.patch_axis(mocker, lambda k: (k * k + 1.0) * (k * k + 4.0))
        serial = scan_bound_states(s_wave_model(), 7.0, 3.0, RadialGrid())
        threaded = scan_bound_states(s_wave_model(), 7.0, 3.0, RadialGrid(), workers=4)
        assert [r.k for r in serial] == pytest.approx([r.k for r in threaded], abs=1e-12)

    def test_k_max_must_be_positive(self):
        with pytest.raises(ValueError, match="k_max"):
            scan_bound_states(s_wave_model(), 7.0, 0.0, RadialGrid())
