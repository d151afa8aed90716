import math

import numpy as np
import pytest

from zrtrimer import (
    count_nodes,
    efimov_constant,
    integrate,
    solve_bound_states,
    thomas_spectrum,
)



class FlatPotential:
    """Constant-W stub exposing the potential interface, internal units."""

    def __init__(self, w0=0.0, threshold=0.0):
        self.w0 = w0
        self.threshold = threshold
        self.w_inf = threshold

    def values(self, rhos):
        return np.full_like(np.asarray(rhos, dtype=float), self.w0)

    def eps_from_hartree(self, energy):
        return energy

    def hartree_from_eps(self, eps):
        return eps


class TestCountNodes:
    def test_examples(self):
        assert count_nodes([1, 2, 1]) == 0
        assert count_nodes([1, -1, 1]) == 2
        assert count_nodes([0, 1, -1, 0]) == 1
        assert count_nodes([0, 0, 0]) == 0
        assert count_nodes([1, 0, 1]) == 0
        assert count_nodes([1, 0, -1]) == 1


class TestIntegrate:
    def test_inward_free_exponential(self):
        sweep = integrate(FlatPotential(), -1.0, "inward", (0.5, 10.5), n=4001)
        ref = np.exp(-sweep.rho)
        scaled = sweep.f * (ref[-1] / sweep.f[-1])
        assert np.max(np.abs(scaled - ref) / ref) < 1e-8
        # end log-derivative at the inner edge of a decaying exponential
        assert sweep.end_log_derivative == pytest.approx(-1.0, abs=1e-8)

    def test_outward_start_and_growth(self):
        sweep = integrate(FlatPotential(), -1.0, "outward", (0.5, 10.5), n=4001)
        assert sweep.f[0] == pytest.approx(0.5, rel=1e-14)   # f(rho_min) = rho_min
        # growing solution dominates: d ln f / d rho -> +1
        assert sweep.end_log_derivative == pytest.approx(1.0, abs=1e-6)

    def test_numerov_order(self):
        # end log-derivative error shrinks ~16x per step halving
        ds = [integrate(FlatPotential(), -1.0, "inward", (0.5, 10.5), n=n)
              .end_log_derivative for n in (101, 201, 401)]
        ratio = (ds[0] - ds[1]) / (ds[1] - ds[2])
        assert 16.0 * 0.7 < ratio < 16.0 * 1.3

    def test_energy_above_threshold_rejected(self):
        with pytest.raises(ValueError):
            integrate(FlatPotential(), 0.5, "inward", (0.5, 10.5))

    def test_bad_direction_and_bounds(self):
        with pytest.raises(ValueError):
            integrate(FlatPotential(), -1.0, "sideways", (0.5, 10.5))
        with pytest.raises(ValueError):
            integrate(FlatPotential(), -1.0, "inward", (10.5, 0.5))


class TestSolveBoundStates:
    def test_he4_trimer_spectrum(self, he4_solution):
        pot, states = he4_solution
        assert len(states) == 2
        e0, e1 = states
        # frozen from the converged pipeline; the published zero-range
        # values are -143.7 and -2.21
        assert e0.energy_mk == pytest.approx(-144.0556, abs=0.01)
        assert e1.energy_mk == pytest.approx(-2.22049, abs=0.0005)
        assert (e0.node_count, e1.node_count) == (0, 1)
        assert e0.energy < e1.energy          # strictly increasing order
        assert e0.match_residual < 1e-8 and e1.match_residual < 1e-8
        # both lie below the dimer threshold
        assert e0.energy < pot.threshold_hartree
        assert e1.energy < pot.threshold_hartree

    def test_mixed_trimer_single_state(self, mixed_solution):
        pot, states = mixed_solution
        assert len(states) == 1
        assert states[0].energy_mk == pytest.approx(-34.128, abs=0.01)
        assert states[0].node_count == 0
        assert states[0].energy < pot.threshold_hartree

    def test_node_count_monotone_in_energy(self, he4_branch_potential):
        from zrtrimer.radial import _Shooter
        _, pot = he4_branch_potential
        shooter = _Shooter(pot, 0.05, 4000.0, 4000)
        eps_grid = np.linspace(shooter.w_min * 0.9,
                               shooter.search_top * 1.5, 25)
        counts = [shooter.count(e) for e in eps_grid]
        assert counts == sorted(counts)

    def test_two_sided_match_at_converged_energy(self, he4_solution,
                                                 he4_branch_potential):
        # outward and inward log-derivatives agree at an interior point
        # once the eigenvalue has converged
        _, pot = he4_branch_potential
        _, states = he4_solution
        energy = states[0].energy
        rho_m = 35.0
        out = integrate(pot, energy, "outward", (0.05, rho_m), n=6001)
        inw = integrate(pot, energy, "inward", (rho_m, 4000.0), n=6001)
        d_out, d_in = out.end_log_derivative, inw.end_log_derivative
        assert abs(d_out - d_in) / (abs(d_out) + abs(d_in)) < 1e-6

    def test_wavefunction_normalization(self, he4_solution):
        _, states = he4_solution
        for s in states:
            assert np.abs(s.f).max() == pytest.approx(1.0, rel=1e-12)
            assert s.f[np.abs(s.f).argmax()] > 0.0

    def test_ground_state_peak_location(self, he4_solution):
        _, states = he4_solution
        s0 = states[0]
        peak = s0.rho[np.abs(s0.f).argmax()]
        assert 10.0 < peak < 40.0

    def test_excited_state_is_extended(self, he4_solution):
        _, states = he4_solution
        s1 = states[1]
        peak = s1.rho[np.abs(s1.f).argmax()]
        assert 100.0 < peak < 500.0

    def test_repulsive_potential_binds_nothing(self):
        pot = FlatPotential(w0=2.0, threshold=0.0)
        assert solve_bound_states(pot, 4, rho_min=0.5, rho_max=50.0, n=500) == []

    def test_max_states_zero(self, he4_branch_potential):
        _, pot = he4_branch_potential
        assert solve_bound_states(pot, 0) == []

    def test_default_rho_max(self, he4_branch_potential):
        from zrtrimer.radial import default_rho_max
        _, pot = he4_branch_potential
        assert default_rho_max(pot) == 4000.0     # 20|a| = 3781 < 4000

    def test_boundary_insensitivity(self, he4_branch_potential, he4_solution):
        _, pot = he4_branch_potential
        _, states = he4_solution
        wider = solve_bound_states(pot, 4, rho_min=0.05, rho_max=6000.0, n=8000)
        # the halo state barely moves when the box grows by 50%
        assert wider[1].energy_mk == pytest.approx(states[1].energy_mk,
                                                   rel=0.005)


class TestThomasSpectrum:
    def test_ratios_approach_geometric(self, thomas_default):
        spec = thomas_default
        target = math.exp(2 * math.pi / spec.g)
        assert len(spec.energies) == 5
        assert len(spec.ratios) == 4
        for r in spec.ratios[1:]:
            assert r == pytest.approx(target, rel=0.05)
        # energies strictly negative, increasing toward zero
        es = spec.energies
        assert all(e < 0 for e in es)
        assert all(es[i] < es[i + 1] for i in range(len(es) - 1))

    def test_cutoff_halving_scales_quadratically(self, thomas_default):
        deeper = thomas_spectrum(cutoff_rho0=0.05, outer_rho=3e6, n_states=2)
        assert deeper.energies[0] / thomas_default.energies[0] == pytest.approx(
            4.0, rel=0.01)

    def test_ratio_decreases_with_g(self, thomas_default):
        harder = thomas_spectrum(g=1.2, cutoff_rho0=0.1, outer_rho=3e6,
                                 n_states=3)
        assert harder.ratios[0] < thomas_default.ratios[0]
        assert harder.ratios[1] == pytest.approx(math.exp(2 * math.pi / 1.2),
                                                 rel=0.05)

    def test_default_g_is_solved_constant(self, thomas_default):
        assert thomas_default.g == efimov_constant()

    def test_validation(self):
        with pytest.raises(ValueError):
            thomas_spectrum(cutoff_rho0=10.0, outer_rho=1.0)
        with pytest.raises(ValueError):
            thomas_spectrum(cutoff_rho0=1.0, outer_rho=50.0)

    def test_more_states_than_available(self):
        spec = thomas_spectrum(cutoff_rho0=0.1, outer_rho=1e4, n_states=10,
                               n=6000)
        # the window supports only a few states; no junk levels appear
        assert 2 <= len(spec.energies) <= 4
        for r in spec.ratios:
            assert r > 1.0
