import math

import numpy as np
import pytest
import scipy.sparse.linalg

from conftest import random_chain, random_state
from qspan.asymptotics import WeightFunction
from qspan.ed import (
    AveragedStateSpectrum,
    DegenerateGroundStateWarning,
    PauliHamiltonian,
    averaged_state,
    build_hamiltonian,
    chaotic_chain,
    chaotic_initial_chain,
    cumulant_density,
    cumulant_operator,
    effective_rank,
    energy_cumulants,
    energy_cumulants_operator_route,
    first_overlap_crossing,
    ground_state,
    integrable_chain,
    polarized_state,
    projection_error,
    rank_curve,
    read_hamiltonian_file,
    return_amplitude,
    spectral_decomposition,
    write_hamiltonian_file,
)
from qspan.errors import ConfigError, DomainError, SizeError


def riemann_average(sd, t: float, slices: int = 10000) -> np.ndarray:
    """Midpoint Riemann sum of |Psi_tau><Psi_tau| in the site basis."""
    taus = (np.arange(slices) + 0.5) * t / slices
    phases = np.exp(-1j * np.outer(sd.energies, taus))
    states = sd.basis @ (sd.overlaps[:, None] * phases)
    return (states @ states.conj().T) / slices


def site_basis_matrix(sd, spec_t) -> np.ndarray:
    vecs = sd.basis @ spec_t.vectors
    return (vecs * spec_t.eigenvalues) @ vecs.conj().T


class TestBuild:
    def test_single_site_z(self):
        h = build_hamiltonian(PauliHamiltonian(L=1, terms=((1.0, ((0, "Z"),)),)))
        assert np.allclose(np.diag(h), [1.0, -1.0])

    def test_xx_spectrum(self):
        h = build_hamiltonian(
            PauliHamiltonian(L=2, terms=((1.0, ((0, "X"), (1, "X"))),)))
        assert np.allclose(np.linalg.eigvalsh(h), [-1, -1, 1, 1])

    def test_bundled_chain_hermitian_traceless(self):
        h = build_hamiltonian(chaotic_chain(6))
        assert np.abs(h - h.conj().T).max() < 1e-14
        assert abs(np.trace(h)) < 1e-10

    def test_size_and_domain_errors(self):
        with pytest.raises(SizeError):
            PauliHamiltonian(L=15, terms=((1.0, ((0, "Z"),)),))
        with pytest.raises(DomainError):
            PauliHamiltonian(L=2, terms=((1.0, ((5, "Z"),)),))
        with pytest.raises(DomainError):
            PauliHamiltonian(L=2, terms=((1.0, ((0, "Q"),)),))


class TestGroundState:
    def test_polarized_limits(self):
        down_field = PauliHamiltonian(
            L=3, terms=tuple((-1.0, ((l, "Z"),)) for l in range(3)))
        assert abs(ground_state(down_field)[0]) == pytest.approx(1.0)
        up_field = PauliHamiltonian(
            L=3, terms=tuple((1.0, ((l, "Z"),)) for l in range(3)))
        assert abs(ground_state(up_field)[-1]) == pytest.approx(1.0)

    def test_gauge_deterministic(self):
        spec = random_chain(4, seed=2)
        v1 = ground_state(spec)
        v2 = ground_state(spec)
        assert np.allclose(v1, v2)
        first = v1[np.argmax(np.abs(v1) > 1e-12 * np.abs(v1).max())]
        assert first.imag == pytest.approx(0.0, abs=1e-12)
        assert first.real > 0

    def test_degeneracy_warning(self):
        flat = PauliHamiltonian(L=2, terms=((0.0, ((0, "Z"),)),))
        with pytest.warns(DegenerateGroundStateWarning):
            ground_state(flat)

    def test_energy_against_lanczos_oracle(self):
        spec = chaotic_initial_chain(6)
        h = build_hamiltonian(spec)
        vec = ground_state(spec)
        energy = float(np.real(np.vdot(vec, h @ vec)))
        oracle = scipy.sparse.linalg.eigsh(
            scipy.sparse.csr_matrix(h), k=1, which="SA",
            v0=np.ones(h.shape[0]))[0][0]
        assert energy == pytest.approx(float(oracle), abs=1e-9)


class TestSpectralDecomposition:
    def test_invariants(self):
        spec = random_chain(4, seed=1)
        sd = spectral_decomposition(spec, random_state(16, 4))
        assert abs(np.sum(np.abs(sd.overlaps) ** 2) - 1.0) < 1e-10
        assert np.all(np.diff(sd.energies) >= 0)

    def test_rejects_unnormalized(self):
        spec = random_chain(3, seed=1)
        with pytest.raises(DomainError):
            spectral_decomposition(spec, np.ones(8))


class TestAveragedState:
    def test_short_window_is_pure(self):
        sd = spectral_decomposition(random_chain(3, seed=5), random_state(8, 6))
        spec_t = averaged_state(sd, 0.0, 1e-9)
        assert spec_t.eigenvalues[0] == pytest.approx(1.0, abs=1e-9)
        assert np.abs(spec_t.eigenvalues[1:]).max() < 1e-9

    def test_infinite_window_is_diagonal_ensemble(self):
        sd = spectral_decomposition(random_chain(3, seed=5), random_state(8, 6))
        spec_t = averaged_state(sd, 0.0, 1e9)
        diag = np.sort(np.abs(sd.overlaps) ** 2)[::-1]
        assert np.abs(spec_t.eigenvalues - diag).max() < 1e-5

    def test_riemann_oracle(self):
        spec = random_chain(3, seed=12)
        sd = spectral_decomposition(spec, random_state(8, 13))
        spec_t = averaged_state(sd, 0.0, 2.0, want_vectors=True)
        rho = riemann_average(sd, 2.0)
        dist = np.linalg.norm(site_basis_matrix(sd, spec_t) - rho, ord=2)
        assert dist < 1e-6
        assert np.abs(np.linalg.eigvalsh(rho)[::-1]
                      - spec_t.eigenvalues).max() < 1e-6

    def test_spectrum_independent_of_t0(self):
        sd = spectral_decomposition(random_chain(4, seed=3), random_state(16, 9))
        base = averaged_state(sd, 0.0, 2.0).eigenvalues
        for t0 in (0.7, 2.1):
            shifted = averaged_state(sd, t0, 2.0).eigenvalues
            assert np.abs(base - shifted).max() < 1e-10

    def test_uniform_weight_matches_closed_kernel(self):
        sd = spectral_decomposition(random_chain(4, seed=8), random_state(16, 2))
        t = 1.7
        closed = averaged_state(sd, 0.0, t).eigenvalues
        weighted = averaged_state(sd, 0.0, t,
                                  w=WeightFunction.uniform(t)).eigenvalues
        assert np.abs(closed - weighted).max() < 1e-10

    def test_purity_nonincreasing(self):
        sd = spectral_decomposition(random_chain(4, seed=21),
                                    random_state(16, 22))
        purities = [averaged_state(sd, 0.0, t).purity
                    for t in (0.3, 0.8, 1.5, 2.5, 4.0)]
        assert all(a >= b - 1e-12 for a, b in zip(purities, purities[1:]))

    def test_trace_one(self):
        sd = spectral_decomposition(random_chain(3, seed=30), random_state(8, 31))
        spec_t = averaged_state(sd, 0.0, 3.3)
        assert spec_t.eigenvalues.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(spec_t.eigenvalues >= 0.0)


class TestEffectiveRank:
    @pytest.mark.parametrize("eps,d_want,discard_want", [
        (0.05, 3, 0.0), (0.1, 2, 0.1), (0.4, 1, 0.4)])
    def test_hand_cases(self, eps, d_want, discard_want):
        lam = np.array([0.6, 0.3, 0.1])
        spec = AveragedStateSpectrum(eigenvalues=lam, t0=0.0, t=1.0,
                                     cumulative=np.cumsum(lam))
        rank = effective_rank(spec, eps)
        assert rank.D == d_want
        assert rank.discarded == pytest.approx(discard_want, abs=1e-12)
        assert rank.lambda_cut == lam[d_want - 1]

    def test_eps_zero_keeps_support(self):
        lam = np.array([0.7, 0.3, 0.0, 0.0])
        spec = AveragedStateSpectrum(eigenvalues=lam, t0=0.0, t=1.0,
                                     cumulative=np.cumsum(lam))
        assert effective_rank(spec, 0.0).D == 2

    def test_domain(self):
        lam = np.array([1.0])
        spec = AveragedStateSpectrum(eigenvalues=lam, t0=0.0, t=1.0,
                                     cumulative=np.cumsum(lam))
        with pytest.raises(DomainError):
            effective_rank(spec, 1.0)


class TestProjectionError:
    def test_infinite_window_zero_eps_is_exact(self):
        sd = spectral_decomposition(random_chain(3, seed=17), random_state(8, 18))
        big_t = 1e7
        res = projection_error(sd, big_t, 0.0,
                               np.linspace(0, 10, 20) / 10 * big_t)
        assert res.error.max() < 1e-10

    def test_projector_idempotent_with_matching_rank(self):
        sd = spectral_decomposition(random_chain(4, seed=19), random_state(16, 20))
        spec_t = averaged_state(sd, 0.0, 2.0, want_vectors=True)
        rank = effective_rank(spec_t, 0.1)
        cols = spec_t.vectors[:, :rank.D]
        proj = cols @ cols.conj().T
        assert np.abs(proj @ proj - proj).max() < 1e-10
        assert np.trace(proj).real == pytest.approx(rank.D, abs=1e-10)

    def test_band_ordering_and_start(self):
        spec = chaotic_chain(8)
        psi0 = ground_state(chaotic_initial_chain(8))
        sd = spectral_decomposition(spec, psi0)
        ts = np.linspace(0, 1.0, 51)
        res = projection_error(sd, 1.0, 0.15 / math.sqrt(101.0), ts)
        assert np.all(res.band_low <= res.error + 1e-12)
        assert np.all(res.error <= res.band_high + 1e-12)
        assert res.error[0] < 0.1  # curves start near zero

    def test_rejects_time_outside_window(self):
        sd = spectral_decomposition(random_chain(3, seed=40), random_state(8, 41))
        with pytest.raises(DomainError):
            projection_error(sd, 1.0, 0.1, np.array([1.5]))


class TestRankCurve:
    def test_eps_near_one_gives_rank_one(self):
        spec = random_chain(4, seed=23, boundary="periodic")
        psi0 = random_state(16, 24)
        curve = rank_curve(spec, psi0, lambda t: 0.999, [0.5, 1.0, 2.0])
        assert np.all(curve.dims == 1)

    def test_fields_consistent(self):
        spec = chaotic_chain(6)
        psi0 = ground_state(chaotic_initial_chain(6))
        times = [0.5, 1.0]
        curve = rank_curve(spec, psi0, lambda t: 0.15 / math.sqrt(1 + 100 * t),
                           times)
        assert curve.L == 6
        assert np.allclose(curve.dims_per_sqrt_l,
                           curve.dims / math.sqrt(6))
        assert curve.e2 > 0


class TestEnergyCumulants:
    def test_product_state_field(self):
        spec = PauliHamiltonian(
            L=3, terms=tuple((1.0, ((l, "Z"),)) for l in range(3)))
        e = energy_cumulants((spec, polarized_state(3)), 4)
        assert e[0] == pytest.approx(1.0, abs=1e-14)
        assert np.abs(e[1:]).max() < 1e-12

    def test_first_two_are_mean_and_variance(self):
        spec = random_chain(4, seed=33)
        psi = random_state(16, 34)
        h = build_hamiltonian(spec)
        mean = float(np.real(np.vdot(psi, h @ psi)))
        var = float(np.real(np.vdot(psi, h @ (h @ psi)))) - mean ** 2
        e = energy_cumulants((spec, psi), 2)
        assert e[0] * 4 == pytest.approx(mean, rel=1e-12)
        assert e[1] * 4 == pytest.approx(var, rel=1e-12)

    def test_routes_agree(self):
        for seed in (0, 1, 2):
            spec = random_chain(4, seed=100 + seed)
            psi = random_state(16, 200 + seed)
            direct = energy_cumulants((spec, psi), 4)
            via_ops = energy_cumulants_operator_route(spec, psi, 4)
            assert np.abs(direct - via_ops).max() < 1e-8

    def test_spectral_and_pair_routes_match(self):
        spec = random_chain(4, seed=55)
        psi = random_state(16, 56)
        sd = spectral_decomposition(spec, psi)
        assert np.abs(energy_cumulants(sd, 4)
                      - energy_cumulants((spec, psi), 4)).max() < 1e-10

    def test_operator_recursion_expectations(self):
        # <H^(1)> = <H>, <H^(2)> = <H^2> - 2<H>^2
        spec = random_chain(3, seed=60)
        psi = random_state(8, 61)
        h = build_hamiltonian(spec)
        m1 = float(np.real(np.vdot(psi, h @ psi)))
        m2 = float(np.real(np.vdot(psi, h @ (h @ psi))))
        op2 = cumulant_operator(spec, psi, 2)
        assert float(np.real(np.vdot(psi, op2 @ psi))) == pytest.approx(
            m2 - 2 * m1 * m1, rel=1e-10)

    def test_extensivity_of_e2(self):
        # per-site variance drifts by well under 5 percent across sizes
        vals = {}
        for L in (8, 12):
            psi0 = ground_state(chaotic_initial_chain(L))
            vals[L] = energy_cumulants((chaotic_chain(L), psi0), 2)[1]
        assert abs(vals[12] - vals[8]) / vals[8] < 0.05

    def test_domain(self):
        spec = random_chain(2, seed=1)
        with pytest.raises(DomainError):
            energy_cumulants((spec, polarized_state(2)), 9)


class TestCumulantDensity:
    def test_sum_rule(self):
        spec = random_chain(4, seed=71, boundary="periodic")
        psi = random_state(16, 72)
        sd = spectral_decomposition(spec, psi)
        e = energy_cumulants(sd, 4)
        for n in (1, 2, 3, 4):
            total = sum(cumulant_density(spec, psi, l, n, sd=sd)
                        for l in range(4))
            assert total == pytest.approx(4 * e[n - 1], abs=1e-8)

    def test_translation_invariance(self):
        spec = integrable_chain(4)
        psi = polarized_state(4)
        sd = spectral_decomposition(spec, psi)
        dens = [cumulant_density(spec, psi, l, 2, sd=sd) for l in range(4)]
        assert max(dens) - min(dens) < 1e-10

    def test_staggered_field_profile(self):
        # for the bundled pair the site profile is measured flat at n = 2
        # (the staggered response cancels for this initial state), while a
        # z-polarized start shows the period-2 alternation at n = 1
        spec = chaotic_chain(6)
        psi = ground_state(chaotic_initial_chain(6))
        sd = spectral_decomposition(spec, psi)
        dens = [cumulant_density(spec, psi, l, 2, sd=sd) for l in range(6)]
        assert max(dens) - min(dens) < 1e-10
        psi_z = polarized_state(6)
        sd_z = spectral_decomposition(spec, psi_z)
        dens_z = [cumulant_density(spec, psi_z, l, 1, sd=sd_z)
                  for l in range(6)]
        assert np.allclose(dens_z[0::2], dens_z[0], atol=1e-12)
        assert np.allclose(dens_z[1::2], dens_z[1], atol=1e-12)
        assert abs(dens_z[0] - dens_z[1]) == pytest.approx(0.6, abs=1e-10)

    def test_rejects_long_range_terms(self):
        spec = PauliHamiltonian(
            L=4, terms=((1.0, ((0, "X"), (1, "X"), (2, "X"))),))
        with pytest.raises(DomainError):
            cumulant_density(spec, polarized_state(4), 0, 2)


class TestOverlapAmplitude:
    def test_return_amplitude_at_zero(self):
        sd = spectral_decomposition(random_chain(3, seed=80), random_state(8, 81))
        assert return_amplitude(sd, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_first_crossing_bisection(self):
        sd = spectral_decomposition(chaotic_chain(6),
                                    ground_state(chaotic_initial_chain(6)))
        tc = first_overlap_crossing(sd, 0.5, t_max=5.0)
        assert return_amplitude(sd, tc * 0.98) > 0.5 > return_amplitude(
            sd, tc * 1.02)

    def test_cosine_speed_limit_property(self):
        # |<Psi_t|Psi_0>| >= cos(dE t) while dE t <= pi/2: the rigorous
        # quantum-speed-limit inequality, never violated
        for seed in (0, 1, 2):
            spec = random_chain(4, seed=300 + seed, boundary="periodic")
            psi = random_state(16, 400 + seed)
            sd = spectral_decomposition(spec, psi)
            e = energy_cumulants(sd, 2)
            de = math.sqrt(4 * e[1])
            ts = np.linspace(0, 0.5 * math.pi / de, 101)
            amp = return_amplitude(sd, ts)
            assert np.all(amp >= np.cos(de * ts) - 1e-10)


class TestHamiltonianFiles:
    def test_round_trip(self, tmp_path):
        spec = chaotic_chain(4, boundary="open")
        path = tmp_path / "chain.ham"
        write_hamiltonian_file(spec, path)
        loaded = read_hamiltonian_file(path)
        assert loaded == spec

    def test_parse_toy_file(self, tmp_path):
        path = tmp_path / "toy.ham"
        path.write_text("# toy\nL=2\nboundary=open\n"
                        "1.0 X@0 X@1\n-0.5 Z@1\n")
        spec = read_hamiltonian_file(path)
        assert spec.L == 2
        assert len(spec.terms) == 2

    @pytest.mark.parametrize("text,fragment", [
        ("boundary=open\n1.0 X@0\n", "missing L="),
        ("L=2\nfoo=3\n", "unknown header"),
        ("L=2\nabc X@0\n", "bad coefficient"),
        ("L=2\n1.0 X0\n", "expected op@site"),
        ("L=2\n1.0 X@zero\n", "bad site"),
        ("L=2\n1.0 X@0 Y@1 Z@1\n", "one or two"),
    ])
    def test_parse_errors(self, tmp_path, text, fragment):
        path = tmp_path / "bad.ham"
        path.write_text(text)
        with pytest.raises(ConfigError, match=fragment):
            read_hamiltonian_file(path)
