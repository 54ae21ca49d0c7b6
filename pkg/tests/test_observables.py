import numpy as np
import pytest

import morsekick as mk
from conftest import normalized_gaussian

HF = mk.MOLECULES["hf"]


def make_ctx(grid, dt=0.1, t_end=100.0, **kw):
    cfg = mk.PropagationConfig(dt=dt, t_end=t_end, **kw)
    return mk.make_step_context(grid, mk.morse_potential(HF, grid.x), HF.m, cfg), cfg


class TestDissociationProbability:
    def test_ground_state_is_bound(self, basis_small):
        assert mk.dissociation_probability(basis_small.states[0], basis_small) < 1e-10

    def test_bound_superposition(self, basis_small):
        amps = (basis_small.states[0].amplitudes + basis_small.states[1].amplitudes) / np.sqrt(2)
        psi = mk.Wavefunction(basis_small.grid, amps)
        assert mk.dissociation_probability(psi, basis_small) < 1e-10

    def test_continuum_packet(self, basis_small):
        psi = normalized_gaussian(basis_small.grid, 25.0, 1.0)
        assert mk.dissociation_probability(psi, basis_small) > 0.999

    def test_complement_identity(self, basis_small):
        psi = normalized_gaussian(basis_small.grid, 3.0, 1.0)
        c = mk.bound_projections(psi, basis_small)
        p_d = mk.dissociation_probability(psi, basis_small)
        assert p_d + np.sum(np.abs(c) ** 2) == pytest.approx(1.0, abs=1e-9)

    def test_grid_mismatch(self, basis_small, grid_default):
        psi = mk.Wavefunction(grid_default, np.zeros(2048, complex))
        with pytest.raises(mk.GridMismatchError):
            mk.dissociation_probability(psi, basis_small)


class TestEnhancement:
    def test_additive_is_zero(self):
        assert mk.enhancement(1e-3, 2e-3, 3e-3) == pytest.approx(0.0, abs=1e-12)

    def test_fig3_regime_magnitude(self):
        # Arithmetic oracle mirroring the strong-enhancement regime.
        p_l, p_n, p_ln = 1e-10, 1e-8, 1e-3
        expected = (p_ln - p_l - p_n) / (p_l + p_n)
        assert expected == pytest.approx(9.899e4, rel=1e-3)
        assert mk.enhancement(p_l, p_n, p_ln) == pytest.approx(expected, rel=1e-12)

    def test_subadditive_is_negative(self):
        assert mk.enhancement(1e-3, 1e-3, 1e-4) < 0

    def test_symmetric_in_single_field_labels(self):
        assert mk.enhancement(3e-5, 7e-4, 1e-2) == mk.enhancement(7e-4, 3e-5, 1e-2)

    def test_floor_keeps_eta_finite(self):
        eta = mk.enhancement(0.0, 0.0, 1e-3)
        assert np.isfinite(eta)
        assert eta == pytest.approx(1e-3 / 1e-14, rel=1e-9)


class TestAbsorbedEnergy:
    def test_no_fields_absorbs_nothing(self, basis_small):
        ctx, cfg = make_ctx(basis_small.grid, t_end=500.0)
        final, _ = mk.propagate_realization(basis_small.states[0], None, None, ctx, cfg)
        e0 = basis_small.energies[0]
        assert abs(mk.absorbed_energy(final, basis_small, e0)) < 1e-8

    def test_resonant_probe_beats_detuned(self, basis_small):
        gap = basis_small.energies[1] - basis_small.energies[0]
        ctx, cfg = make_ctx(basis_small.grid, t_end=3200.0)
        e0 = basis_small.energies[0]
        gains = {}
        for detune in (0.0, 0.002, -0.002):
            pulse = mk.LaserPulse(F0=0.002, omega=gap + detune, Tp=3000.0)
            final, _ = mk.propagate_realization(basis_small.states[0], pulse, None, ctx, cfg)
            gains[detune] = mk.absorbed_energy(final, basis_small, e0)
        assert gains[0.0] > 0
        assert gains[0.0] > gains[0.002]
        assert gains[0.0] > gains[-0.002]

    def test_perturbative_quadratic_scaling(self, basis_small):
        gap = basis_small.energies[1] - basis_small.energies[0]
        ctx, cfg = make_ctx(basis_small.grid, t_end=2200.0)
        e0 = basis_small.energies[0]
        gains = []
        for amp in (5e-4, 1e-3):
            pulse = mk.LaserPulse(F0=amp, omega=gap, Tp=2000.0)
            final, _ = mk.propagate_realization(basis_small.states[0], pulse, None, ctx, cfg)
            gains.append(mk.absorbed_energy(final, basis_small, e0))
        assert gains[1] / gains[0] == pytest.approx(4.0, rel=0.05)


class TestRunEnsemble:
    def test_deterministic_records_identical(self, basis_small):
        ctx, cfg = make_ctx(basis_small.grid, t_end=400.0)
        pulse = mk.LaserPulse(F0=0.02, omega=0.01, Tp=300.0)
        res = mk.run_ensemble(
            basis_small.states[0], basis_small, pulse, True, None,
            ctx, cfg, n_realizations=5, master_seed=1,
        )
        values = {rec.P_d for rec in res.records}
        assert len(values) == 1
        assert res.std_error == 0.0
        assert res.mean == res.records[0].P_d
        assert [rec.realization_index for rec in res.records] == list(range(5))

    def test_worker_count_invariance(self, basis_small):
        ctx, cfg = make_ctx(basis_small.grid, t_end=350.0)
        pulse = mk.LaserPulse(F0=0.02, omega=0.01, Tp=300.0)
        spec = mk.NoiseSpec(D=0.03**2, seed=0)
        results = []
        for workers in (1, 3):
            res = mk.run_ensemble(
                basis_small.states[0], basis_small, pulse, True, spec,
                ctx, cfg, n_realizations=7, master_seed=4242,
                workers=workers, chunk_size=2,
            )
            results.append(res)
        a, b = results
        assert a.mean == b.mean
        assert a.std_error == b.std_error
        assert all(
            ra.P_d == rb.P_d and ra.seed == rb.seed
            for ra, rb in zip(a.records, b.records)
        )

    def test_mean_matches_records(self, basis_small):
        ctx, cfg = make_ctx(basis_small.grid, t_end=350.0)
        pulse = mk.LaserPulse(F0=0.0, omega=0.01, Tp=300.0)
        spec = mk.NoiseSpec(D=0.05**2, seed=0)
        res = mk.run_ensemble(
            basis_small.states[0], basis_small, pulse, False, spec,
            ctx, cfg, n_realizations=6, master_seed=7,
        )
        values = [rec.P_d for rec in res.records]
        assert res.mean == pytest.approx(np.mean(values), rel=1e-15)
        # permutation invariance of the aggregate
        assert res.mean == pytest.approx(np.mean(sorted(values)), rel=1e-12)
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_shared_noise_between_n_and_ln(self, basis_small):
        # Same master seed and D: the N-only and L+N ensembles must see the
        # same per-realization streams (seed equality is the contract).
        ctx, cfg = make_ctx(basis_small.grid, t_end=350.0)
        pulse = mk.LaserPulse(F0=0.02, omega=0.01, Tp=300.0)
        spec = mk.NoiseSpec(D=0.03**2, seed=0)
        common = dict(ctx=ctx, cfg=cfg, n_realizations=4, master_seed=11)
        res_n = mk.run_ensemble(
            basis_small.states[0], basis_small, pulse, False, spec, **common
        )
        res_ln = mk.run_ensemble(
            basis_small.states[0], basis_small, pulse, True, spec, **common
        )
        assert [r.seed for r in res_n.records] == [r.seed for r in res_ln.records]

    def test_blowup_reports_seed(self, basis_small, monkeypatch):
        ctx, cfg = make_ctx(basis_small.grid, t_end=350.0)
        pulse = mk.LaserPulse(F0=0.02, omega=0.01, Tp=300.0)
        spec = mk.NoiseSpec(D=0.03**2, seed=0)

        def bad_sampler(s, n, dt):
            return mk.NoiseRealization(np.full(n, np.nan), s, dt)

        monkeypatch.setattr("morsekick.observables.sample_white_noise", bad_sampler)
        with pytest.raises(mk.BlowupError, match="seed"):
            mk.run_ensemble(
                basis_small.states[0], basis_small, pulse, True, spec,
                ctx, cfg, n_realizations=2, master_seed=3,
            )

    def test_n_realizations_validated(self, basis_small):
        ctx, cfg = make_ctx(basis_small.grid, t_end=350.0)
        pulse = mk.LaserPulse(F0=0.02, omega=0.01, Tp=300.0)
        with pytest.raises(ValueError):
            mk.run_ensemble(
                basis_small.states[0], basis_small, pulse, True, None,
                ctx, cfg, n_realizations=0, master_seed=1,
            )
