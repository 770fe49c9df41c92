"""Unit tests for the labeled state-vector algebra."""

import math

import numpy as np
import pytest

from atomlink import qcore
from atomlink.qcore import (
    SpaceLabel,
    apply,
    basis_state,
    fidelity,
    make_state,
    project_measure,
    space,
    tensor,
    two_level_rotation,
)

Q2 = space(("q", 2))
Q4 = space(("q", 4))


def random_state(rng, sp):
    v = rng.standard_normal(sp.total_dim) + 1j * rng.standard_normal(sp.total_dim)
    return make_state(sp, v)


class TestSpaceLabel:
    def test_total_dim_is_product(self):
        sp = space(("a", 2), ("b", 3), ("c", 4))
        assert sp.total_dim == 24
        assert sp.shape == (2, 3, 4)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            SpaceLabel((("a", 2), ("a", 3)))

    def test_nonpositive_dimension_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            SpaceLabel((("a", 0),))


class TestMakeState:
    def test_basis_state(self):
        st = make_state(Q2, [1, 0])
        assert np.allclose(st.amplitudes, [1, 0])

    def test_renormalizes_scaling(self):
        st = make_state(Q2, [2, 0])
        assert np.allclose(st.amplitudes, [1, 0])

    def test_uniform_amplitudes(self):
        st = make_state(Q4, [1, 1, 1, 1])
        assert np.allclose(st.amplitudes, [0.5, 0.5, 0.5, 0.5])

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            make_state(Q2, [0, 0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            make_state(Q2, [1, 0, 0])


class TestTensor:
    def test_basis_times_basis(self):
        st = tensor(basis_state(space(("u", 2)), 0), basis_state(space(("v", 2)), 1))
        assert st.space.names == ("u", "v")
        assert np.allclose(st.tensor_view, [[0, 1], [0, 0]])

    def test_bilinearity(self):
        a, b = 0.6, 0.8
        left = make_state(space(("u", 2)), [a, b])
        st = tensor(left, basis_state(space(("v", 2)), 0))
        assert np.allclose(st.tensor_view[:, 0], [a, b])
        assert np.allclose(st.tensor_view[:, 1], [0, 0])

    def test_name_collision_rejected(self):
        with pytest.raises(ValueError, match="collision"):
            tensor(basis_state(Q2, 0), basis_state(Q2, 1))

    def test_three_atom_product_norm(self):
        # Direct expansion oracle: amplitudes of the product computed by
        # explicit loops, compared against tensor(), plus the norm.
        rng = np.random.default_rng(31)
        one = random_state(rng, space(("atom1", 6)))
        pair = random_state(rng, space(("atom2", 6), ("atom3", 6)))
        joint = tensor(one, pair)
        expected = np.zeros((6, 36), dtype=complex)
        for i in range(6):
            for j in range(36):
                expected[i, j] = one.amplitudes[i] * pair.amplitudes[j]
        assert np.allclose(joint.amplitudes, expected.reshape(-1), atol=1e-15)
        assert abs(joint.norm() - 1.0) < 1e-12


class TestTwoLevelRotation:
    def test_zero_area_is_identity(self):
        op = two_level_rotation(4, 1, 3, 0.0, 0.7)
        assert np.allclose(op.matrix, np.eye(4), atol=1e-15)

    def test_full_cycle_flips_sign_on_pair_only(self):
        op = two_level_rotation(4, 0, 2, 2 * math.pi, 1.3)
        expected = np.diag([-1.0, 1.0, -1.0, 1.0])
        assert np.allclose(op.matrix, expected, atol=1e-12)

    def test_half_pulse_steers_superposition_to_u(self):
        # phase = pi/2 - chi sends (|u> + e^{i chi}|v>)/sqrt(2) to |u>.
        rng = np.random.default_rng(5)
        for chi in rng.uniform(-math.pi, math.pi, size=20):
            st = make_state(Q2, [1.0, np.exp(1j * chi)])
            op = two_level_rotation(2, 0, 1, math.pi / 2, math.pi / 2 - chi)
            out = apply(st, op, "q")
            assert abs(abs(out.amplitudes[0]) ** 2 - 1.0) < 1e-12

    def test_bad_indices_rejected(self):
        with pytest.raises(ValueError, match="differ"):
            two_level_rotation(3, 1, 1, 1.0, 0.0)
        with pytest.raises(ValueError, match="range"):
            two_level_rotation(3, 0, 3, 1.0, 0.0)

    def test_unitarity_1000_random_draws(self):
        rng = np.random.default_rng(77)
        for _ in range(1000):
            area = rng.uniform(-4 * math.pi, 4 * math.pi)
            phase = rng.uniform(-2 * math.pi, 2 * math.pi)
            u, v = rng.choice(6, size=2, replace=False)
            mat = two_level_rotation(6, int(u), int(v), area, phase).matrix
            dev = np.max(np.abs(mat.conj().T @ mat - np.eye(6)))
            assert dev < 1e-12

    def test_pi_twice_equals_2pi(self):
        for phase in (0.0, 0.9, -2.2):
            half = two_level_rotation(5, 1, 4, math.pi, phase)
            full = two_level_rotation(5, 1, 4, 2 * math.pi, phase)
            twice = half.then(half)
            assert np.allclose(twice.matrix, full.matrix, atol=1e-12)


class TestApply:
    def test_identity_leaves_state(self):
        rng = np.random.default_rng(3)
        st = random_state(rng, space(("a", 3), ("b", 2)))
        op = qcore.Operator(space(("q", 3)), np.eye(3))
        assert np.allclose(apply(st, op, "a").amplitudes, st.amplitudes, atol=1e-15)

    def test_rotation_on_unpopulated_levels_is_noop(self):
        st = make_state(space(("a", 4)), [0.6, 0.8, 0, 0])
        op = two_level_rotation(4, 2, 3, 2 * math.pi, 0.0)
        assert np.allclose(apply(st, op, "a").amplitudes, st.amplitudes, atol=1e-15)

    def test_pi_pulse_moves_population(self):
        st = basis_state(space(("a", 5)), 1)
        op = two_level_rotation(5, 1, 4, math.pi, 0.4)
        out = apply(st, op, "a")
        assert abs(abs(out.amplitudes[4]) ** 2 - 1.0) < 1e-12

    def test_norm_preserved_random(self):
        rng = np.random.default_rng(11)
        sp = space(("a", 6), ("b", 6))
        for _ in range(50):
            st = random_state(rng, sp)
            op = two_level_rotation(
                6, 0, 3, rng.uniform(0, 7), rng.uniform(0, 7)
            )
            out = apply(st, op, rng.choice(["a", "b"]))
            assert abs(out.norm() - 1.0) < 1e-12

    def test_unknown_subsystem_rejected(self):
        st = basis_state(Q2, 0)
        op = two_level_rotation(2, 0, 1, 1.0, 0.0)
        with pytest.raises(ValueError, match="unknown"):
            apply(st, op, "nope")

    def test_dimension_mismatch_rejected(self):
        st = basis_state(space(("a", 3)), 0)
        op = two_level_rotation(2, 0, 1, 1.0, 0.0)
        with pytest.raises(ValueError, match="dimension"):
            apply(st, op, "a")


class TestProjectMeasure:
    def test_certain_outcome(self):
        st = basis_state(space(("a", 3)), 2)
        outcome, p, collapsed = project_measure(
            st, "a", {2}, rng=np.random.default_rng(0)
        )
        assert outcome == "in" and abs(p - 1.0) < 1e-15
        assert np.allclose(collapsed.amplitudes, st.amplitudes)

    def test_born_rule_forced(self):
        st = make_state(Q2, [1, 1])
        outcome, p, collapsed = project_measure(st, "q", {0}, force="in")
        assert outcome == "in"
        assert abs(p - 0.5) < 1e-12
        assert np.allclose(collapsed.amplitudes, [1, 0])

    def test_forced_zero_probability_rejected(self):
        st = basis_state(Q2, 0)
        with pytest.raises(ValueError, match="forced"):
            project_measure(st, "q", {1}, force="in")

    def test_empty_level_set_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            project_measure(basis_state(Q2, 0), "q", set(), force="in")

    def test_complementary_probabilities_sum_to_one(self):
        rng = np.random.default_rng(21)
        sp = space(("a", 6), ("b", 4))
        for _ in range(50):
            st = random_state(rng, sp)
            levels = set(rng.choice(6, size=rng.integers(1, 6), replace=False).tolist())
            complement = set(range(6)) - levels
            _, p1, _ = project_measure(st, "a", levels, force="in")
            _, p2, _ = project_measure(st, "a", complement, force="in")
            assert abs(p1 + p2 - 1.0) < 1e-12

    def test_collapse_is_renormalized_projection(self):
        rng = np.random.default_rng(4)
        st = random_state(rng, space(("a", 4)))
        _, p, collapsed = project_measure(st, "a", {1, 2}, force="out")
        kept = np.array([st.amplitudes[0], 0, 0, st.amplitudes[3]])
        assert np.allclose(collapsed.amplitudes, kept / np.linalg.norm(kept), atol=1e-12)
        assert abs(p - (abs(st.amplitudes[1]) ** 2 + abs(st.amplitudes[2]) ** 2)) < 1e-12

    def test_sampled_branch_statistics(self):
        st = make_state(Q2, [math.sqrt(0.3), math.sqrt(0.7)])
        rng = np.random.default_rng(8)
        hits = sum(
            project_measure(st, "q", {0}, rng=rng)[0] == "in" for _ in range(20000)
        )
        assert abs(hits / 20000 - 0.3) < 5 * math.sqrt(0.3 * 0.7 / 20000)


class TestFidelity:
    def test_self_fidelity(self):
        rng = np.random.default_rng(2)
        st = random_state(rng, Q4)
        assert abs(fidelity(st, st) - 1.0) < 1e-12

    def test_global_phase_invariance(self):
        st = make_state(Q2, [0.6, 0.8])
        shifted = qcore.StateVector(Q2, st.amplitudes * np.exp(1j * 1.234))
        assert abs(fidelity(st, shifted) - 1.0) < 1e-12

    def test_orthogonal_states(self):
        assert fidelity(basis_state(Q2, 0), basis_state(Q2, 1)) == 0.0

    def test_space_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            fidelity(basis_state(Q2, 0), basis_state(space(("r", 2)), 0))
