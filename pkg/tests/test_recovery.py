import numpy as np
import pytest
import scipy.linalg

from eurqsi.entropy import relative
from eurqsi.linalg import fidelity, herm_eig, op_norm, tensor, trace_distance
from eurqsi.recovery import (
    CpMap,
    Quadrature,
    QuadratureError,
    apply_map,
    choi_from_kraus,
    default_quadrature,
    eur_recovery_map,
    identity_channel,
    kraus_from_choi,
    measurement_channel,
    p_density,
    petz_map,
    rotated_petz_map,
    tensor_with_identity,
    verify_cptp,
)
from eurqsi.states import (
    DensityOperator,
    InvalidStateError,
    KET_0,
    KET_PLUS,
    KET_PLUS_Y,
    Pvm,
    ket_bra,
    maximally_mixed,
    measure,
    pauli_pvm,
    pinch,
    random_multipartite_state,
    random_pvm,
    random_state,
    theta_state,
)

from conftest import dagger, pinched_state_oracle


class TestQuadrature:
    def test_density_normalization(self):
        # integral of p(t) over the real line is exactly tanh(pi t / 2)/...= 1
        t = np.linspace(-30, 30, 200001)
        riemann = np.trapezoid(p_density(t), t)
        assert abs(riemann - 1.0) < 1e-8

    def test_default_rule_resolves_the_integral(self):
        quad = default_quadrature()
        assert len(quad.nodes) == 64 * 8
        assert quad.normalization_defect < 1e-10

    def test_truncated_rule_fails_validation(self):
        bad = Quadrature.gauss_legendre(t_max=12.0, panels=1, order=3)
        assert bad.normalization_defect > 1e-2
        with pytest.raises(QuadratureError):
            bad.validate()

    def test_negative_weights_rejected(self):
        with pytest.raises(QuadratureError):
            Quadrature(np.array([0.0]), np.array([-1.0]))


class TestCpMap:
    def test_rejects_non_psd_choi(self):
        with pytest.raises(ValueError):
            CpMap(choi=np.diag([1.0, -1.0, 0, 0]), in_dims=(2,), out_dims=(2,))

    def test_rejects_kraus_choi_mismatch(self):
        eye = np.eye(2, dtype=complex)
        with pytest.raises(ValueError):
            CpMap(choi=2 * choi_from_kraus([eye]), in_dims=(2,), out_dims=(2,),
                  kraus=(eye,))

    def test_kraus_roundtrip_through_choi(self):
        chan = measurement_channel(random_pvm(3, 5))
        kraus = kraus_from_choi(chan.choi, chan.in_dim, chan.out_dim)
        assert np.abs(choi_from_kraus(kraus) - chan.choi).max() < 1e-10


class TestPetz:
    def test_identity_channel_fixed_point(self):
        sig = random_state(2, 1, 3).matrix  # rank deficient on purpose
        rec = petz_map(sig, identity_channel((2,)))
        supp = herm_eig(sig).support_projector()
        probe = supp @ random_state(2, 2, 9).matrix @ supp
        assert np.abs(rec.apply_matrix(probe) - probe).max() < 1e-10

    def test_restores_sigma_from_eigenbasis_measurement(self):
        sig = maximally_mixed(2)
        rec = petz_map(sig, measurement_channel(pauli_pvm("Z")))
        n_sig = measurement_channel(pauli_pvm("Z")).apply_matrix(sig)
        assert np.abs(rec.apply_matrix(n_sig) - sig).max() < 1e-10

    def test_against_dense_formula_oracle(self):
        # independent evaluation: sqrtm/pinv route plus the explicit adjoint
        # N^dag(kappa) = sum_x <x|kappa|x> P_x
        for seed in range(10):
            sig = random_state(2, 2, [seed, 0]).matrix
            pvm = pauli_pvm("X")
            chan = measurement_channel(pvm)
            rec = petz_map(sig, chan)
            n_sig = np.diag([np.trace(proj @ sig) for proj in pvm.projectors])
            inv_sqrt = np.linalg.pinv(scipy.linalg.sqrtm(n_sig))
            sqrt_sig = scipy.linalg.sqrtm(sig)
            kappa_in = random_state(2, 2, [seed, 1]).matrix
            kappa = inv_sqrt @ kappa_in @ inv_sqrt
            adj = sum(kappa[x, x] * proj for x, proj in enumerate(pvm.projectors))
            want = sqrt_sig @ adj @ sqrt_sig
            got = rec.apply_matrix(kappa_in)
            assert np.abs(got - want).max() < 1e-9

    def test_trace_preserving_on_support(self):
        sig = random_state(3, 2, 4).matrix
        chan = measurement_channel(random_pvm(3, 8))
        rec = petz_map(sig, chan)
        assert verify_cptp(rec).ok


class TestRotatedPetz:
    def test_commuting_case_reduces_to_petz(self):
        sig = np.diag([0.7, 0.3]).astype(complex)
        chan = measurement_channel(pauli_pvm("Z"))
        plain = petz_map(sig, chan)
        rotated = rotated_petz_map(sig, chan)
        assert np.abs(plain.choi - rotated.choi).max() < 1e-9

    def test_restores_sigma(self):
        for seed in range(10):
            sig = random_state(2, 2, [seed, 2]).matrix
            chan = measurement_channel(pauli_pvm("X"))
            rec = rotated_petz_map(sig, chan)
            assert np.abs(rec.apply_matrix(chan.apply_matrix(sig)) - sig).max() < 1e-8

    def test_max_uncertainty_log_fidelity_is_one_bit(self):
        rho = DensityOperator(
            tensor(ket_bra(KET_PLUS_Y), maximally_mixed(2)), (2, 2), ("A", "B")
        )
        xp, zp = pauli_pvm("X"), pauli_pvm("Z")
        chan = tensor_with_identity(measurement_channel(xp), (2,), ("B",))
        rec = rotated_petz_map(pinch(rho, zp, "A").matrix, chan)
        sigma = measure(rho, xp, "A", "X").to_density_operator()
        f = fidelity(rho.matrix, rec.apply_matrix(sigma.matrix))
        assert abs(-np.log2(f) - 1.0) < 1e-6

    def test_rejects_bad_quadrature(self):
        sig = random_state(2, 2, 0).matrix
        chan = measurement_channel(pauli_pvm("X"))
        bad = Quadrature.gauss_legendre(panels=1, order=3)
        with pytest.raises(QuadratureError):
            rotated_petz_map(sig, chan, bad)


class TestEurRecoveryMap:
    def test_x_eigenstate_perfect_recovery(self):
        rho = DensityOperator(
            tensor(ket_bra(KET_PLUS), maximally_mixed(2)), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        out = rec.apply_matrix(tensor(ket_bra(KET_0), maximally_mixed(2)))
        want = tensor(ket_bra(KET_PLUS), maximally_mixed(2))
        assert trace_distance(out, want) < 1e-9

    def test_z_eigenstate_closed_form(self):
        rho = DensityOperator(
            tensor(ket_bra(KET_0), maximally_mixed(2)), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        # closed form: R(xi) = |0><0| (x) Tr_X xi
        for seed in range(5):
            xi = random_multipartite_state((2, 2), 4, [seed, 11], ("X", "B")).matrix
            got = rec.apply_matrix(xi)
            want = np.kron(ket_bra(KET_0), np.trace(
                xi.reshape(2, 2, 2, 2), axis1=0, axis2=2))
            assert np.abs(got - want).max() < 1e-9

    def test_max_entangled_kraus_form(self):
        from eurqsi.gallery import recovery_map_r3
        rho = DensityOperator.from_vector(
            np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        ref = recovery_map_r3()
        assert op_norm(rec.choi - ref.choi) < 1e-9
        sigma = measure(rho, pauli_pvm("X"), "A", "X").to_density_operator()
        assert trace_distance(rec.apply_matrix(sigma.matrix), rho.matrix) < 1e-9

    def test_rejects_non_rank_one_z(self):
        rho = random_multipartite_state((4, 2), 8, 0, ("A", "B"))
        rank2 = Pvm((np.diag([1, 1, 0, 0]).astype(complex),
                     np.diag([0, 0, 1, 1]).astype(complex)))
        with pytest.raises(InvalidStateError):
            eur_recovery_map(rho, random_pvm(4, 1), rank2)

    def test_perfect_reversal_random_instances(self):
        worst = 0.0
        for seed in range(20):
            d = 2 if seed % 2 else 3
            rho = random_multipartite_state((d, d), d * d, [seed, 21], ("A", "B"))
            xp, zp = random_pvm(d, [seed, 22]), random_pvm(d, [seed, 23])
            rec = eur_recovery_map(rho, xp, zp)
            theta = theta_state(rho, xp, zp).to_density_operator()
            out = rec.apply_matrix(theta.matrix)
            want = pinched_state_oracle(rho.matrix, zp.basis_vectors())
            worst = max(worst, trace_distance(out, want))
        assert worst < 1e-7

    def test_agrees_with_generic_rotated_petz_on_support(self):
        for seed in range(10):
            d = 2 if seed % 2 else 3
            rho = random_multipartite_state((d, d), d * d, [seed, 31], ("A", "B"))
            xp, zp = random_pvm(d, [seed, 32]), random_pvm(d, [seed, 33])
            explicit = eur_recovery_map(rho, xp, zp)
            chan = tensor_with_identity(measurement_channel(xp), (d,), ("B",))
            generic = rotated_petz_map(pinch(rho, zp, "A").matrix, chan)
            theta = theta_state(rho, xp, zp).to_density_operator()
            lift = np.kron(herm_eig(theta.matrix).support_projector(),
                           np.eye(d * d))
            diff = lift @ (explicit.choi - generic.choi) @ lift
            assert op_norm(diff) < 1e-7

    def test_completion_branch_makes_map_globally_tp(self):
        # a rank-deficient theta leaves a complement; the channel must still
        # be trace preserving on the whole input space
        rho = DensityOperator(
            tensor(ket_bra(KET_0), ket_bra(KET_0)), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("Z"), pauli_pvm("Z"))
        report = verify_cptp(rec)
        assert report.ok
        probe = random_multipartite_state((2, 2), 4, 99, ("X", "B")).matrix
        assert abs(np.trace(rec.apply_matrix(probe)).real - 1.0) < 1e-8


class TestApplyMap:
    def test_identity(self):
        rho = random_multipartite_state((2, 2), 4, 5, ("X", "B"))
        out = apply_map(identity_channel((2, 2), ("X", "B")), rho)
        assert np.abs(out.matrix - rho.matrix).max() < 1e-12

    def test_r1_on_uniform_input(self):
        rho = DensityOperator(
            tensor(ket_bra(KET_PLUS), maximally_mixed(2)), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        uniform = DensityOperator(np.eye(4) / 4, (2, 2), ("X", "B"))
        out = apply_map(rec, uniform)
        assert out.labels == ("A", "B")
        assert trace_distance(out.matrix, np.eye(4) / 4) < 1e-9

    def test_r4_on_sigma(self):
        rho = DensityOperator(
            tensor(ket_bra(KET_PLUS_Y), maximally_mixed(2)), (2, 2), ("A", "B")
        )
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        sigma = measure(rho, pauli_pvm("X"), "A", "X")
        out = apply_map(rec, sigma)  # CqState accepted directly
        assert trace_distance(out.matrix, np.eye(4) / 4) < 1e-9

    def test_dimension_mismatch(self):
        rec = identity_channel((2,))
        with pytest.raises(ValueError):
            apply_map(rec, random_multipartite_state((2, 2), 4, 1, ("X", "B")))


class TestVerifyCptp:
    def test_identity_channel_clean(self):
        report = verify_cptp(identity_channel((2, 2)))
        assert report.ok
        assert report.trace_preservation_defect < 1e-12
        assert report.choi_min_eigenvalue > -1e-12

    def test_all_constructors_yield_channels(self):
        for seed in range(6):
            d = 2 + seed % 2
            sig = random_state(d, d, [seed, 61]).matrix
            chan = measurement_channel(random_pvm(d, [seed, 62]))
            assert verify_cptp(petz_map(sig, chan)).ok
            assert verify_cptp(rotated_petz_map(sig, chan)).ok
            rho = random_multipartite_state((d, d), d * d, [seed, 63], ("A", "B"))
            rec = eur_recovery_map(rho, random_pvm(d, [seed, 64]),
                                   random_pvm(d, [seed, 65]))
            assert verify_cptp(rec).ok

    def test_cpmap_json_export_roundtrip(self):
        from eurqsi.serialize import cpmap_from_dict, cpmap_to_dict
        rho = random_multipartite_state((2, 2), 4, 71, ("A", "B"))
        rec = eur_recovery_map(rho, pauli_pvm("X"), pauli_pvm("Z"))
        back = cpmap_from_dict(cpmap_to_dict(rec))
        assert np.array_equal(back.choi, rec.choi)
        assert back.in_dims == rec.in_dims and back.out_dims == rec.out_dims
        assert back.in_labels == rec.in_labels
        assert np.array_equal(back.support, rec.support)

    def test_r3_kraus_completeness_direct_sum(self):
        from eurqsi.gallery import recovery_map_r3
        rec = recovery_map_r3()
        acc = np.zeros((4, 4), dtype=complex)
        for k in rec.kraus:
            acc += dagger(k) @ k  # direct matrix-sum oracle
        assert np.abs(acc - np.eye(4)).max() < 1e-12
        report = verify_cptp(rec, support=np.eye(4))
        assert report.ok and report.kraus_completeness_defect < 1e-12

    def test_truncated_quadrature_reported(self):
        rho = random_multipartite_state((2, 2), 4, 17, ("A", "B"))
        bad = Quadrature.gauss_legendre(t_max=12.0, panels=1, order=3)
        rec = eur_recovery_map(
            rho, pauli_pvm("X"), pauli_pvm("Z"), quad=bad,
            validate_quadrature=False,
        )
        report = verify_cptp(rec)
        assert not report.tp_ok
        assert report.trace_preservation_defect > 1e-2


class TestRefinedMonotonicity:
    def test_inequality_on_random_instances(self):
        # D(rho||sigma) - D(N rho||N sigma) >= -log F(rho, R(N rho))
        worst = 0.0
        for seed in range(20):
            d = 2 + seed % 2
            rho = random_state(d, d, [seed, 41])
            sig = random_state(d, d, [seed, 42]).matrix
            chan = measurement_channel(random_pvm(d, [seed, 43]))
            rec = rotated_petz_map(sig, chan)
            gap = relative(rho, sig) - relative(
                DensityOperator(chan.apply_matrix(rho.matrix), (d,), ("X",)),
                chan.apply_matrix(sig),
            )
            f = fidelity(rho.matrix, rec.apply_matrix(chan.apply_matrix(rho.matrix)))
            worst = min(worst, gap + np.log2(f))
        assert worst >= -1e-6

    def test_refinement_never_weaker(self):
        # -log f >= 0 because fidelity is clipped to [0, 1]
        for seed in range(10):
            rho = random_multipartite_state((2, 2), 4, [seed, 51], ("A", "B"))
            xp, zp = random_pvm(2, [seed, 52]), random_pvm(2, [seed, 53])
            rec = eur_recovery_map(rho, xp, zp)
            sigma = measure(rho, xp, "A", "X").to_density_operator()
            f = fidelity(rho.matrix, rec.apply_matrix(sigma.matrix))
            assert -np.log2(f) >= 0.0
