"""Exact complex linear algebra over labeled composite qudit spaces.

States live in a tensor product of named subsystems (e.g. three six-level
atoms). Everything is dense complex128: the largest space used anywhere is
6^3 = 216 dimensional, so sparsity buys nothing. All values are immutable
after construction and all operations are pure functions of their inputs
plus, for sampled measurements, an explicit numpy Generator.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Tolerance for exact-arithmetic checks: double-precision roundoff across at
# most a few dozen operations on <=216-dimensional vectors.
ATOL = 1e-12

# A forced measurement branch with less probability mass than this is refused.
FORCE_EPS = 1e-15


@dataclass(frozen=True)
class SpaceLabel:
    """Ordered collection of (name, dimension) subsystems."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.subsystems]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate subsystem names in {names}")
        for name, dim in self.subsystems:
            if dim < 1:
                raise ValueError(f"subsystem {name!r} has non-positive dimension {dim}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.subsystems)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def total_dim(self) -> int:
        out = 1
        for _, d in self.subsystems:
            out *= d
        return out

    def axis(self, name: str) -> int:
        for i, (n, _) in enumerate(self.subsystems):
            if n == name:
                return i
        raise ValueError(f"unknown subsystem {name!r}; have {self.names}")

    def dim_of(self, name: str) -> int:
        return self.shape[self.axis(name)]


def space(*subsystems: tuple[str, int]) -> SpaceLabel:
    """Convenience constructor: space(("atom1", 6), ("atom2", 6))."""
    return SpaceLabel(tuple(subsystems))


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over a labeled space.

    Amplitudes are stored flat in C order of the subsystem axes and are
    read-only; construct new states through make_state / tensor / apply.
    """

    space: SpaceLabel
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.space.total_dim:
            raise ValueError(
                f"amplitude length {amps.size} != total dimension {self.space.total_dim}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor_view(self) -> np.ndarray:
        """Read-only view shaped (d1, d2, ...) by subsystem."""
        return self.amplitudes.reshape(self.space.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: StateVector) -> complex:
        _check_same_space(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def subsystem_mass(self, target: str, levels) -> float:
        """Total squared amplitude with `target` in any of `levels`."""
        k = self.space.axis(target)
        psi = self.tensor_view
        idx = np.asarray(sorted(levels), dtype=np.intp)
        sel = np.take(psi, idx, axis=k)
        return float(np.sum(np.abs(sel) ** 2))


@dataclass(frozen=True)
class Operator:
    """Complex square matrix acting on a single subsystem."""

    space: SpaceLabel
    matrix: np.ndarray

    def __post_init__(self):
        if len(self.space.subsystems) != 1:
            raise ValueError("Operator space must be a single subsystem")
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def dagger(self) -> Operator:
        return Operator(self.space, self.matrix.conj().T)

    def then(self, later: Operator) -> Operator:
        """Composite operator: self first, `later` second."""
        if later.dim != self.dim:
            raise ValueError("dimension mismatch in composition")
        return Operator(self.space, later.matrix @ self.matrix)


def _check_same_space(a: SpaceLabel, b: SpaceLabel):
    if a.subsystems != b.subsystems:
        raise ValueError(f"space mismatch: {a.subsystems} vs {b.subsystems}")


def make_state(space: SpaceLabel, amplitudes) -> StateVector:
    """Normalized state from raw amplitudes.

    Raises ValueError on a length mismatch or a (numerically) zero vector.
    """
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if amps.size != space.total_dim:
        raise ValueError(
            f"amplitude length {amps.size} != total dimension {space.total_dim}"
        )
    norm = np.linalg.norm(amps)
    if norm <= 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero amplitude vector")
    return StateVector(space, amps / norm)


def basis_state(space: SpaceLabel, indices) -> StateVector:
    """Computational basis state |i1 i2 ...> for one index per subsystem."""
    idx = (indices,) if np.isscalar(indices) else tuple(int(i) for i in indices)
    amps = np.zeros(space.shape, dtype=np.complex128)
    amps[idx] = 1.0
    return StateVector(space, amps.reshape(-1))


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    """Tensor product; subsystem order is s1's then s2's."""
    common = set(s1.space.names) & set(s2.space.names)
    if common:
        raise ValueError(f"subsystem name collision: {sorted(common)}")
    joint = space(*(s1.space.subsystems + s2.space.subsystems))
    return StateVector(joint, np.kron(s1.amplitudes, s2.amplitudes))


def two_level_rotation(dim: int, u: int, v: int, area: float, phase: float) -> Operator:
    """Coherent rotation on the (u, v) level pair, identity elsewhere.

    Convention (half-angle t = area/2, phase f):
        |u> -> cos(t)|u> - i e^{-if} sin(t)|v>
        |v> -> -i e^{+if} sin(t)|u> + cos(t)|v>
    so area=pi swaps the pair's amplitudes (up to -i phases) and area=2pi
    multiplies both by -1 while leaving every other level untouched.
    """
    if u == v:
        raise ValueError("level indices must differ")
    if not (0 <= u < dim and 0 <= v < dim):
        raise ValueError(f"level index out of range for dimension {dim}")
    half = 0.5 * area
    c = math.cos(half)
    s = math.sin(half)
    mat = np.eye(dim, dtype=np.complex128)
    mat[u, u] = c
    mat[v, v] = c
    mat[u, v] = -1j * cmath.exp(1j * phase) * s
    mat[v, u] = -1j * cmath.exp(-1j * phase) * s
    return Operator(space(("q", dim)), mat)


def apply(state: StateVector, op: Operator, target: str) -> StateVector:
    """Apply `op` to the named subsystem, identity on the rest."""
    k = state.space.axis(target)
    if op.dim != state.space.shape[k]:
        raise ValueError(
            f"operator dimension {op.dim} != subsystem {target!r} "
            f"dimension {state.space.shape[k]}"
        )
    psi = state.tensor_view
    out = np.tensordot(op.matrix, psi, axes=([1], [k]))
    out = np.moveaxis(out, 0, k)
    return StateVector(state.space, out.reshape(-1))


def project_measure(
    state: StateVector,
    target: str,
    levels,
    *,
    rng: np.random.Generator | None = None,
    force: str | None = None,
):
    """Projective yes/no measurement: is `target` within `levels`?

    Returns (outcome, probability, collapsed) where outcome is "in" or
    "out", probability is the Born weight of the probed level set (the
    "in" branch, whatever the outcome), and collapsed is the renormalized
    post-measurement state.

    The branch is drawn from `rng` unless `force` picks it explicitly; a
    forced branch whose probability is below 1e-15 is refused.
    """
    levels = frozenset(int(l) for l in levels)
    if not levels:
        raise ValueError("empty probe level set")
    k = state.space.axis(target)
    d = state.space.shape[k]
    if any(l < 0 or l >= d for l in levels):
        raise ValueError(f"probe level out of range for dimension {d}")

    psi = state.tensor_view
    mask = np.zeros(d, dtype=bool)
    mask[sorted(levels)] = True
    shape = [1] * psi.ndim
    shape[k] = d
    mask_nd = mask.reshape(shape)

    p_in = float(np.sum(np.abs(np.where(mask_nd, psi, 0.0)) ** 2))

    if force is not None:
        if force not in ("in", "out"):
            raise ValueError("force must be 'in' or 'out'")
        branch_p = p_in if force == "in" else 1.0 - p_in
        if branch_p < FORCE_EPS:
            raise ValueError(f"forced branch {force!r} has probability {branch_p}")
        outcome = force
    else:
        if rng is None:
            raise ValueError("sampled measurement needs an rng")
        outcome = "in" if rng.random() < p_in else "out"

    keep = mask_nd if outcome == "in" else ~mask_nd
    collapsed = np.where(keep, psi, 0.0)
    collapsed_norm = np.linalg.norm(collapsed)
    if collapsed_norm <= 0.0:
        raise ValueError(f"collapse onto zero-probability branch {outcome!r}")
    return outcome, p_in, StateVector(state.space, (collapsed / collapsed_norm).reshape(-1))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 — global-phase invariant, clipped to [0, 1]."""
    _check_same_space(a.space, b.space)
    val = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(max(val, 0.0), 1.0))
