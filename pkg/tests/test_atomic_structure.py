import math
from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants as sc
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan as sym_cg
from sympy.physics.wigner import wigner_3j as sym_3j

from hfdecoherence.angmom import HalfInt
from hfdecoherence.atomic_structure import (DOWN, STRETCHED, TWO_PI, UP, AtomConstants, ExcitedState,
                                            GroundState, Polarization, dipole_element, dipole_tensor,
                                            dressed_dipole_tensor, dressed_ground_states, enumerate_excited,
                                            enumerate_ground, mu_scale, qubit_splitting)

GROUND = enumerate_ground()
EXCITED = enumerate_excited()


def _h(x):
    return Rational(int(round(2 * float(x))), 2)


def _ms(j):
    tj = int(round(2 * j))
    return [Rational(t, 2) for t in range(-tj, tj + 1, 2)]


def decoupled_products(J):
    """sum over |J mJ> (x) |I mI> of <f|d_q|e><e|d_k|i> for all (q, f, k, i).

    Built only from sympy coefficients in the product basis |mL mS mI>,
    with the dipole acting on the orbital part; normalized to the stretched
    transition.
    """
    I, S, L = Rational(3, 2), Rational(1, 2), 1

    def ground_vec(g):
        out = {}
        for mS, mI in product(_ms(S), _ms(I)):
            c = sym_cg(S, I, _h(g.F.value), mS, mI, _h(g.mF.value))
            if c != 0:
                out[(0, mS, mI)] = float(c)
        return out

    def orbital(mL, q):
        # <1 mL| d_q |0 0> with unit reduced element
        return float((-1) ** (1 - mL) * sym_3j(1, 1, 0, -mL, q, 0))

    def element(mJ, mI_e, g, q):
        total = 0.0
        for mL, mS in product(_ms(L), _ms(S)):
            cJ = sym_cg(L, S, J, mL, mS, mJ)
            if cJ == 0:
                continue
            total += float(cJ) * orbital(mL, q) * ground_vec(g).get((0, mS, mI_e), 0.0)
        return total

    states = list(product(_ms(J), _ms(I)))
    table = np.array([[[element(mJ, mI, g, q) for g in GROUND] for (mJ, mI) in states] for q in (-1, 0, 1)])
    return table


@pytest.fixture(scope="module")
def decoupled():
    t_half = decoupled_products(Rational(1, 2))
    t_three = decoupled_products(Rational(3, 2))
    norm = t_three[2, list(product(_ms(Rational(3, 2)), _ms(Rational(3, 2)))).index((Rational(3, 2), Rational(3, 2))),
                   GROUND.index(STRETCHED)]
    return t_half / norm, t_three / norm


class TestEnumeration:
    def test_ground_order(self):
        assert len(GROUND) == 8
        assert GROUND[0] == GroundState(1, -1)
        assert GROUND[-1] == GroundState(2, 2)
        assert {UP, DOWN, STRETCHED} <= set(GROUND)
        assert GROUND == enumerate_ground()

    def test_excited_manifold_sizes(self):
        assert len(EXCITED) == 24
        assert sum(e.J == HalfInt(1) for e in EXCITED) == 8
        assert sum(e.J == HalfInt(3) for e in EXCITED) == 16

    def test_invalid_states_rejected(self):
        with pytest.raises(ValueError):
            GroundState(3, 0)
        with pytest.raises(ValueError):
            GroundState(1, 2)
        with pytest.raises(ValueError):
            ExcitedState(HalfInt(1), 3, 0)


class TestDipoleElements:
    def test_stretched_normalization(self):
        e = ExcitedState(HalfInt(3), 3, 3)
        assert dipole_element(STRETCHED, e, +1) == 1.0
        assert dipole_element(STRETCHED, e, 0) == 0.0

    def test_selection_rules_exact(self):
        D = dipole_tensor()
        for qi, q in enumerate((-1, 0, 1)):
            for a, g in enumerate(GROUND):
                for b, e in enumerate(EXCITED):
                    allowed = (e.mF.twice_value == g.mF.twice_value + 2 * q
                               and abs(e.F.twice_value - g.F.twice_value) <= 2)
                    if not allowed:
                        assert D[qi, a, b] == 0.0

    def test_equal_linewidth_sum_rule(self):
        strength = np.sum(dipole_tensor() ** 2, axis=(0, 1))
        assert np.max(np.abs(strength - 1.0)) < 1e-10

    def test_bad_spherical_index(self):
        with pytest.raises(ValueError):
            dipole_element(UP, EXCITED[0], 2)

    def test_completeness_against_decoupled_basis(self, decoupled):
        D = dipole_tensor()
        for J, ref in zip((1, 3), decoupled):
            mask = np.array([e.J.twice_value == J for e in EXCITED])
            coupled = np.einsum("qfe,kie->qfki", D[:, :, mask], D[:, :, mask])
            oracle = np.einsum("qef,kei->qfki", ref, ref)
            assert np.max(np.abs(coupled - oracle)) < 1e-12

    def test_frozen_cross_check_element(self, decoupled):
        # |2,1> -> P1/2 F'=2 mF'=2 by sigma+: compare |element| with the oracle's
        # summed strength into the P1/2 mF'=2 subspace (a single state)
        e = ExcitedState(HalfInt(1), 2, 2)
        value = dipole_element(GroundState(2, 1), e, +1)
        ref = decoupled[0][2, :, GROUND.index(GroundState(2, 1))]
        assert abs(value) == pytest.approx(np.sqrt(np.sum(ref ** 2)), abs=1e-12)
        assert abs(value) == pytest.approx(1 / math.sqrt(6), abs=1e-12)


class TestMu:
    def test_hand_formula(self):
        c = AtomConstants()
        # mu^2 = 3 eps0 hbar lambda^3 gamma / (8 pi^2)
        ref = math.sqrt(3 * sc.epsilon_0 * sc.hbar * c.wavelength ** 3 * c.gamma / (8 * math.pi ** 2))
        assert mu_scale(c) == pytest.approx(ref, rel=1e-12)
        debye = 3.33564e-30
        assert 3.0 < mu_scale(c) / debye < 4.0

    def test_sqrt_gamma_scaling(self):
        c = AtomConstants()
        c2 = replace(c, gamma=2 * c.gamma)
        assert mu_scale(c2) / mu_scale(c) == pytest.approx(math.sqrt(2), rel=1e-14)
        small = replace(c, gamma=c.gamma * 1e-12, delta_hf=c.delta_hf, delta_f=c.delta_f)
        assert mu_scale(small) < 1e-5 * mu_scale(c)


class TestDressing:
    def test_zero_field_is_identity(self):
        U, _ = dressed_ground_states(replace(AtomConstants(), B=0.0))
        assert np.allclose(U, np.eye(8), atol=1e-12)

    def test_dressed_basis_orthogonal_and_labelled(self):
        U, _ = dressed_ground_states()
        assert np.allclose(U.T @ U, np.eye(8), atol=1e-12)
        assert np.all(np.diag(U) > 0.5)

    def test_clock_splitting(self):
        assert qubit_splitting() / TWO_PI == pytest.approx(1.2075e9, rel=2e-4)

    def test_dressed_tensor_keeps_sum_rule(self):
        strength = np.sum(dressed_dipole_tensor() ** 2, axis=(0, 1))
        assert np.max(np.abs(strength - 1.0)) < 1e-10


class TestPolarization:
    def test_normalized(self):
        with pytest.raises(ValueError):
            Polarization((1.0, 1.0, 0.0))

    @given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
    def test_from_vector_is_unit(self, v):
        z = np.array(v[:3]) + 1j * np.array(v[3:])
        if np.linalg.norm(z) < 1e-3:
            return
        p = Polarization.from_vector(z)
        assert np.sum(np.abs(p.as_array()) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_named(self):
        assert Polarization.named("sigma+").component(1) == 1
        assert Polarization.named("pi").is_pure
