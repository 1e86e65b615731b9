import math

import pytest

from hybridbell.chsh import binning_norm
from hybridbell.fock import BinningSet
from hybridbell.noise import NoiseParams, noisy_subspace_operator
from hybridbell.chsh import chsh_norm
from hybridbell.operators import SubspaceSpec
from hybridbell.optimize import half_line_cells, optimize_binning, optimize_state_binning, symmetric_cells
from hybridbell.states import noon_optimum, noon_state


def test_vacuum_only_subspace_has_no_violation():
    opt = optimize_binning(SubspaceSpec.lowest(0), grid_step=0.5)
    assert opt.value == pytest.approx(2.0, abs=1e-12)


def test_h1_optimum():
    opt = optimize_binning(SubspaceSpec.lowest(1))
    assert opt.value == pytest.approx(2.2947, abs=1e-3)
    assert opt.binning.upper == math.inf
    assert opt.binning.lower == pytest.approx(-0.10, abs=0.02)
    assert opt.heuristic


@pytest.mark.parametrize("b", [BinningSet(-0.3, 1.2), BinningSet.half_line(0.4)])
@pytest.mark.parametrize("noise", [NoiseParams(), NoiseParams(eta=0.7, t=0.8)])
def test_mirrored_interval_has_the_same_norm(b, noise):
    spec = SubspaceSpec.lowest(3)
    a = chsh_norm(noisy_subspace_operator(b, spec, noise)).value
    m = chsh_norm(noisy_subspace_operator(b.mirrored(), spec, noise)).value
    assert a == pytest.approx(m, abs=1e-10)


def test_min_eta_on_02():
    opt = optimize_binning(SubspaceSpec.uniform((0, 2)), objective="min-eta", cells=symmetric_cells(0.05))
    assert opt.value == pytest.approx(0.484, abs=2e-3)
    assert opt.witness.value > 2.0


def test_restricted_cells():
    assert all(c.upper == math.inf for c in half_line_cells(0.5))
    assert all(c.lower == -c.upper for c in symmetric_cells(0.5))


def test_unknown_objective():
    with pytest.raises(ValueError):
        optimize_binning(SubspaceSpec.lowest(1), objective="fastest")


def test_state_optimizer_agrees_with_noon_closed_form():
    value, b = optimize_state_binning(noon_state(2))
    want, _ = noon_optimum(2)
    assert value == pytest.approx(want, abs=1e-5)
    assert value <= binning_norm(b, SubspaceSpec.uniform((0, 2))).value + 1e-9
