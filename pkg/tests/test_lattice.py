import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ladderkernel.errors import InvalidSpecError
from ladderkernel.lattice import (
    LadderSpec,
    build_h0,
    build_sz_mode,
    build_sz_rung,
    build_sz_total,
    build_total,
    build_v,
    commutator,
    ladder_bonds,
    mode_coefficients,
    sector_states,
    site_bit,
)
from ladderkernel.spectral import diagonalize

from oracles import dense_ladder, dense_rung_sz


def max_abs(op):
    return max([0.0] + [abs(b).max() for b in op.blocks.values() if b.nnz])


class TestLadderSpec:
    def test_defaults(self):
        s = LadderSpec(4)
        assert (s.J_par, s.J_perp, s.lam, s.bond_scale) == (1.0, 1.0, 0.0, 1.0)
        assert s.n_sites == 8 and s.dim == 256

    @pytest.mark.parametrize("L", [0, 1, -3])
    def test_too_short(self, L):
        with pytest.raises(InvalidSpecError):
            LadderSpec(L)

    def test_nonfinite_coupling(self):
        with pytest.raises(InvalidSpecError):
            LadderSpec(3, J_par=float("nan"))


class TestBasis:
    def test_bit_map_is_bijection(self):
        L = 5
        bits = [site_bit(l, k) for l in range(1, L + 1) for k in (1, 2)]
        assert sorted(bits) == list(range(2 * L))

    def test_sectors_partition_basis(self):
        sec = sector_states(8)
        allstates = np.sort(np.concatenate(list(sec.values())))
        assert np.array_equal(allstates, np.arange(256))
        assert [len(sec[n]) for n in range(9)] == [1, 8, 28, 56, 70, 56, 28, 8, 1]

    def test_periodic_wrap(self):
        b = ladder_bonds(3)
        assert (site_bit(3, 1), site_bit(1, 1)) in b["legs"]
        assert (site_bit(3, 2), site_bit(1, 1)) in b["diagonals"]


class TestH0:
    def test_single_rung_spectrum(self):
        # L=2 with no leg coupling: two independent rungs
        sp = diagonalize(build_h0(LadderSpec(2, J_par=0.0, J_perp=1.0)))
        rung = np.array([-0.75, 0.25, 0.25, 0.25])
        expected = np.sort((rung[:, None] + rung[None, :]).ravel())
        assert np.allclose(sp.all_energies(), expected, atol=1e-12)

    def test_traceless(self):
        assert abs(build_h0(LadderSpec(6)).trace()) < 1e-10

    @pytest.mark.parametrize("L", [2, 3])
    def test_matches_dense_kron_construction(self, L):
        h_ref, _ = dense_ladder(L, J_par=0.7, J_perp=1.3)
        h = build_h0(LadderSpec(L, J_par=0.7, J_perp=1.3)).to_dense()
        assert np.abs(h - h_ref).max() == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.slow
    def test_ground_state_matches_dense_oracle_L6(self):
        spec = LadderSpec(6)
        e_blocked = diagonalize(build_h0(spec)).all_energies()[0]
        dense = build_h0(spec).to_dense()
        e_dense = np.linalg.eigvalsh(dense)[0]
        assert e_blocked == pytest.approx(e_dense, abs=1e-10)

    def test_hermitian_per_sector(self):
        for L in (2, 3, 4):
            assert build_h0(LadderSpec(L)).hermiticity_error() == 0.0


class TestV:
    @pytest.mark.parametrize("L", [2, 3, 4, 5])
    def test_diagonal(self, L):
        assert build_v(LadderSpec(L)).is_diagonal()

    def test_all_up_L2(self):
        # four diagonal bonds (each doubled by the wrap), each 1/4
        v = build_v(LadderSpec(2))
        assert v.block(4).toarray()[0, 0] == pytest.approx(1.0)

    def test_traceless(self):
        assert abs(build_v(LadderSpec(6)).trace()) < 1e-12

    @pytest.mark.parametrize("L", [2, 3])
    def test_matches_dense(self, L):
        _, v_ref = dense_ladder(L)
        assert np.abs(build_v(LadderSpec(L)).to_dense() - v_ref).max() < 1e-14

    def test_bond_scale_multiplies(self):
        v1 = build_v(LadderSpec(3)).to_dense()
        v2 = build_v(LadderSpec(3, bond_scale=2.0)).to_dense()
        assert np.allclose(v2, 2 * v1)


class TestTotal:
    def test_lambda_zero_is_h0(self):
        spec = LadderSpec(4)
        assert np.array_equal(build_total(spec).to_dense(), build_h0(spec).to_dense())

    def test_linearity(self):
        spec = LadderSpec(3, lam=0.7)
        h = build_total(spec).to_dense()
        assert np.allclose(h, build_h0(spec).to_dense() + 0.7 * build_v(spec).to_dense(), atol=1e-15)

    @pytest.mark.slow
    def test_first_order_shift(self):
        # nondegenerate sector ground states: E(lam) - E(0) = lam <n|V|n> + O(lam^2)
        spec = LadderSpec(6)
        sp0 = diagonalize(build_h0(spec))
        v = build_v(spec)
        lam = 0.1
        sp1 = diagonalize(build_total(spec.with_lambda(lam)))
        checked = 0
        for n in (5, 6, 7):
            e0 = sp0.energies[n]
            if e0[1] - e0[0] < 1e-3:
                continue
            u0 = sp0.vectors[n][:, 0]
            vnn = u0 @ (v.block(n) @ u0)
            gap = e0[1] - e0[0]
            vnorm = np.linalg.norm(v.dense_block(n), 2)
            assert abs(sp1.energies[n][0] - e0[0] - lam * vnn) <= lam**2 * vnorm**2 / gap
            checked += 1
        assert checked >= 1


class TestRungAndModes:
    def test_rung_trace_and_square(self):
        spec = LadderSpec(4)
        for l in range(1, 5):
            sz = build_sz_rung(spec, l)
            assert sz.trace() == 0
            sq = sz @ sz
            assert sq.trace() == pytest.approx(spec.dim / 2)

    def test_rung_eigenvalues(self):
        d = np.diag(build_sz_rung(LadderSpec(2), 1).to_dense())
        assert set(np.round(d, 12)) == {-1.0, 0.0, 1.0}
        assert np.allclose(build_sz_rung(LadderSpec(2), 2).to_dense(), dense_rung_sz(2, 2))

    def test_rung_index_error(self):
        with pytest.raises(IndexError):
            build_sz_rung(LadderSpec(3), 4)
        with pytest.raises(IndexError):
            build_sz_rung(LadderSpec(3), 0)

    def test_mode_zero_is_total(self):
        spec = LadderSpec(4)
        assert np.allclose(build_sz_mode(spec, 0).to_dense(), build_sz_total(spec).to_dense())

    def test_mode_coefficient_table(self):
        assert np.allclose(mode_coefficients(6, 1), [-0.5, 0.5, 1.0, 0.5, -0.5, -1.0])

    def test_mode_index_error(self):
        with pytest.raises(IndexError):
            build_sz_mode(LadderSpec(3), 3)

    def test_rung_commutes_with_total(self):
        spec = LadderSpec(3)
        c = commutator(build_sz_rung(spec, 2), build_sz_total(spec))
        assert max_abs(c) == 0.0


class TestSymmetries:
    @pytest.mark.parametrize("L", [2, 3, 4])
    def test_conserves_total_sz_dense(self, L):
        h, v = dense_ladder(L, lam=0.3)
        sz = sum(dense_rung_sz(L, l) for l in range(1, L + 1))
        assert np.abs(h @ sz - sz @ h).max() < 1e-12
        assert np.abs(v @ sz - sz @ v).max() < 1e-12

    @pytest.mark.parametrize("L", [2, 3, 4])
    def test_v_commutes_with_every_mode(self, L):
        spec = LadderSpec(L)
        v = build_v(spec)
        for k in range(L):
            assert max_abs(commutator(v, build_sz_mode(spec, k))) <= 1e-12

    @pytest.mark.parametrize("L", [3, 4])
    def test_translation_invariance(self, L):
        spec = LadderSpec(L, lam=0.4)
        h = build_total(spec).to_dense()
        states = np.arange(spec.dim)
        shifted = np.zeros_like(states)
        # rung l -> l+1: bits (2(l-1), 2(l-1)+1) move up by two, cyclically
        for l, k in itertools.product(range(1, L + 1), (1, 2)):
            src = site_bit(l, k)
            dst = site_bit(l % L + 1, k)
            shifted |= ((states >> src) & 1) << dst
        p = np.zeros((spec.dim, spec.dim))
        p[shifted, states] = 1.0
        assert np.abs(p @ h @ p.T - h).max() < 1e-13
        e = np.linalg.eigvalsh(h)
        assert np.allclose(np.linalg.eigvalsh(p @ h @ p.T), e)

    @settings(max_examples=20, deadline=None)
    @given(L=st.integers(2, 4), lam=st.floats(-1, 1), jp=st.floats(0, 2), jr=st.floats(0, 2))
    def test_blocks_hermitian(self, L, lam, jp, jr):
        op = build_total(LadderSpec(L, J_par=jp, J_perp=jr, lam=lam))
        assert op.hermiticity_error() <= 1e-15
