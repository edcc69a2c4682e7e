"""Finite-dimensional Markov systems: mean checks, a 4-state example, tensors.

A system is a unital positive matrix acting on column vectors, a distinguished
idempotent, and a finite family of row functionals.  The two mean checks ask
whether weighted averages of the functionals along the orbit of the
complement of the idempotent vanish: the plain mean for unique ergodicity,
the mean of absolute values for unique weak mixing.

The 4-state example has one geometrically decaying direction, a sign-flipping
pair and an absorbing point; with the peripheral idempotent and the standard
functional family every defect is exactly zero, while the fixed-space
idempotent fails the absolute check with the flip eigenvector as witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .averaging import WeightScheme, discrete_weights

TENSOR_DIMENSION_CAP = 4096


class NonConvergenceError(RuntimeError):
    """Weighted means at successive indices failed the Cauchy comparison."""


def _as_matrix(m, d: Optional[int] = None) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if d is not None and a.shape[0] != d:
        raise ValueError(f"expected dimension {d}, got {a.shape[0]}")
    return a


@dataclass(frozen=True)
class MarkovSystem:
    """Unital transition matrix, distinguished idempotent, functional family."""

    transition: np.ndarray
    idempotent: np.ndarray
    functionals: np.ndarray
    commutative: bool = False

    def __post_init__(self):
        t = _as_matrix(self.transition)
        d = t.shape[0]
        e = _as_matrix(self.idempotent, d)
        f = np.asarray(self.functionals, dtype=complex)
        if f.ndim != 2 or f.shape[1] != d:
            raise ValueError("functionals must be rows of the system dimension")
        ones = np.ones(d)
        if np.max(np.abs(t @ ones - ones)) > 1e-9:
            raise ValueError("transition matrix must fix the all-ones vector")
        if self.commutative and np.min(t.real) < -1e-12:
            raise ValueError("commutative Markov matrix must be entrywise nonnegative")
        if np.max(np.abs(e @ e - e)) > 1e-10:
            raise ValueError("idempotent must satisfy E^2 = E")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "idempotent", e)
        object.__setattr__(self, "functionals", f)

    @property
    def dimension(self) -> int:
        return self.transition.shape[0]


def evolve(transition, x, n: int) -> np.ndarray:
    """n-th power of the transition applied to a vector, by repeated squaring."""
    t = _as_matrix(transition)
    return np.linalg.matrix_power(t, n) @ np.asarray(x, dtype=complex)


# -- the 4-state example ------------------------------------------------------


@dataclass(frozen=True)
class FourStateSystem:
    """The 4-dimensional example with spectrum {p, 1, -1, 1}.

    Eigenvectors: ``decaying`` for eigenvalue p, the all-ones ``flat`` and the
    absorbing point ``absorbing`` for eigenvalue 1, and ``alternating`` for
    eigenvalue -1.  ``proj_peripheral`` projects onto the span of the three
    unimodular eigenvectors, ``proj_fixed`` onto the fixed space only.  The
    functional family is supported away from the decaying direction; its
    members need not be unital, which ``family_unital`` records.
    """

    p: float
    transition: np.ndarray
    decaying: np.ndarray
    flat: np.ndarray
    alternating: np.ndarray
    absorbing: np.ndarray
    proj_peripheral: np.ndarray
    proj_fixed: np.ndarray
    family: np.ndarray
    family_unital: Tuple[bool, ...]

    @property
    def eigenbasis(self) -> np.ndarray:
        return np.column_stack(
            [self.decaying, self.flat, self.alternating, self.absorbing]
        )

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([self.p, 1.0, -1.0, 1.0])

    def eigen_coefficients(self, x) -> np.ndarray:
        return np.linalg.solve(self.eigenbasis, np.asarray(x, dtype=complex))

    def as_markov(self, idempotent, functionals) -> MarkovSystem:
        return MarkovSystem(self.transition, idempotent, np.asarray(functionals))


def four_state_system(
    p: float, family_points: int = 20, normalization: str = "as-written"
) -> FourStateSystem:
    """Build the 4-state example for 0 <= p < 1.

    The functional family consists of rows (0, x, x, y) with x, y >= 0.  With
    ``normalization="as-written"`` the rows satisfy x + y = 1 (not unital in
    general); with ``"unital"`` they satisfy 2x + y = 1.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("parameter must satisfy 0 <= p < 1 (the decaying "
                         "direction must actually decay)")
    if family_points < 1:
        raise ValueError("family needs at least one functional")
    alpha = np.array(
        [
            [p, 1.0 - p, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )
    decaying = np.array([1.0, 0.0, 0.0, 0.0])
    flat = np.ones(4)
    alternating = np.array([(p - 1.0) / (p + 1.0), 1.0, -1.0, 0.0])
    absorbing = np.array([0.0, 0.0, 0.0, 1.0])
    basis = np.column_stack([decaying, flat, alternating, absorbing])
    inv = np.linalg.inv(basis)
    proj_peripheral = basis @ np.diag([0.0, 1.0, 1.0, 1.0]) @ inv
    proj_fixed = basis @ np.diag([0.0, 1.0, 0.0, 1.0]) @ inv
    if normalization == "as-written":
        xs = np.linspace(0.0, 1.0, family_points)
        rows = [(0.0, x, x, 1.0 - x) for x in xs]
    elif normalization == "unital":
        xs = np.linspace(0.0, 0.5, family_points)
        rows = [(0.0, x, x, 1.0 - 2.0 * x) for x in xs]
    else:
        raise ValueError("normalization must be 'as-written' or 'unital'")
    family = np.array(rows, dtype=complex)
    unital = tuple(bool(abs(row @ flat - 1.0) < 1e-12) for row in family)
    return FourStateSystem(
        p=float(p),
        transition=alpha,
        decaying=decaying,
        flat=flat,
        alternating=alternating,
        absorbing=absorbing,
        proj_peripheral=proj_peripheral,
        proj_fixed=proj_fixed,
        family=family,
        family_unital=unital,
    )


def closed_evolution(system: FourStateSystem, x, n: int) -> np.ndarray:
    """Eigen-expansion form of the n-step evolution of the 4-state example."""
    lam, mu, nu, tau = system.eigen_coefficients(x)
    sign = -1.0 if n % 2 else 1.0
    return (
        lam * system.p**n * system.decaying.astype(complex)
        + mu * system.flat
        + sign * nu * system.alternating
        + tau * system.absorbing
    )


# -- mean checks ----------------------------------------------------------------


@dataclass(frozen=True)
class MeanCheckReport:
    """Result of a weighted mean-vanishing sweep over functionals and vectors."""

    passed: bool
    tolerance: float
    max_defect: float
    witness_functional: int
    witness_vector: int
    witness_tail_min: Optional[float] = None

    @property
    def witness(self) -> Tuple[int, int]:
        return (self.witness_functional, self.witness_vector)


def _check_inputs(system: MarkovSystem, vectors) -> np.ndarray:
    d = system.dimension
    if vectors is None:
        return np.eye(d, dtype=complex)
    v = np.asarray(vectors, dtype=complex)
    if v.ndim != 2 or v.shape[0] != d:
        raise ValueError(f"vectors must be columns of height {d}")
    return v


def unique_ergodicity_check(
    system: MarkovSystem,
    scheme: WeightScheme,
    sweep: int,
    tolerance: float,
    vectors=None,
) -> MeanCheckReport:
    """Weighted means of functional values along the orbit of (1 - E)x.

    Passes when the largest absolute mean over the functional family and the
    supplied vectors (default: standard basis) is within tolerance.
    """
    cols = _check_inputs(system, vectors)
    w = discrete_weights(scheme, sweep)
    d = system.dimension
    d0 = (np.eye(d) - system.idempotent) @ cols
    acc = np.zeros((d, d), dtype=complex)
    cur = np.eye(d, dtype=complex)
    for n in range(sweep):
        cur = system.transition @ cur
        acc += w[n] * cur
    mean = acc / w.sum()
    defects = np.abs(system.functionals @ mean @ d0)
    fi, vi = np.unravel_index(int(np.argmax(defects)), defects.shape)
    return MeanCheckReport(
        passed=bool(defects[fi, vi] <= tolerance),
        tolerance=float(tolerance),
        max_defect=float(defects[fi, vi]),
        witness_functional=int(fi),
        witness_vector=int(vi),
    )


def weak_mixing_check(
    system: MarkovSystem,
    scheme: WeightScheme,
    sweep: int,
    tolerance: float,
    vectors=None,
) -> MeanCheckReport:
    """Weighted means of |functional values| along the orbit of (1 - E)x.

    On failure the report carries the witnessing pair and the smallest
    running mean over the tail of the sweep, to show the defect is not a
    transient.
    """
    cols = _check_inputs(system, vectors)
    w = discrete_weights(scheme, sweep)
    d = system.dimension
    d0 = (np.eye(d) - system.idempotent) @ cols
    rows = system.functionals.copy()
    acc = np.zeros((rows.shape[0], d0.shape[1]))
    for n in range(sweep):
        rows = rows @ system.transition
        acc += w[n] * np.abs(rows @ d0)
    defects = acc / w.sum()
    fi, vi = np.unravel_index(int(np.argmax(defects)), defects.shape)
    passed = bool(defects[fi, vi] <= tolerance)
    tail_min = None
    if not passed:
        row = system.functionals[fi].copy()
        col = d0[:, vi]
        running = np.empty(sweep)
        total_w = 0.0
        total = 0.0
        for n in range(sweep):
            row = row @ system.transition
            total += w[n] * abs(row @ col)
            total_w += w[n]
            running[n] = total / total_w
        tail_min = float(running[sweep // 2 :].min())
    return MeanCheckReport(
        passed=passed,
        tolerance=float(tolerance),
        max_defect=float(defects[fi, vi]),
        witness_functional=int(fi),
        witness_vector=int(vi),
        witness_tail_min=tail_min,
    )


# -- the invariant mean as a projection -------------------------------------------


@dataclass(frozen=True)
class InvariantMeanReport:
    """Weighted orbit mean of the transition, certified as a projection.

    ``mean`` is the raw weighted average of the powers; ``projector`` is its
    stable limit under repeated squaring, against which the projection and
    commutation laws are verified.
    """

    mean: np.ndarray
    projector: np.ndarray
    idempotency_residual: float
    commutation_residual: float
    cauchy_residual: float
    refinement_distance: float
    lawful: bool


def _weighted_power_mean(transition: np.ndarray, scheme: WeightScheme, sweep: int) -> np.ndarray:
    w = discrete_weights(scheme, sweep)
    d = transition.shape[0]
    acc = np.zeros((d, d), dtype=complex)
    cur = np.eye(d, dtype=complex)
    for n in range(sweep):
        cur = transition @ cur
        acc += w[n] * cur
    return acc / w.sum()


def invariant_mean_projection(
    transition,
    scheme: WeightScheme,
    sweep: int,
    law_tolerance: float = 1e-6,
    cauchy_tolerance: float = 5e-2,
) -> InvariantMeanReport:
    """Weighted mean of transition powers and its projection certificate.

    Compares the means at the index and twice the index (Cauchy check,
    raising on failure), then squares the mean to its idempotent limit; the
    squaring sharpens every sub-unit eigenvalue to zero quadratically, so a
    convergent mean certifies the unique invariant idempotent.
    """
    t = _as_matrix(transition)
    mean = _weighted_power_mean(t, scheme, sweep)
    double = _weighted_power_mean(t, scheme, 2 * sweep)
    cauchy = float(np.max(np.abs(mean - double)))
    if cauchy > cauchy_tolerance:
        raise NonConvergenceError(
            f"means at {sweep} and {2 * sweep} differ by {cauchy:.3e}"
        )
    projector = mean
    for _ in range(20):
        squared = projector @ projector
        if np.max(np.abs(squared - projector)) < 1e-13:
            projector = squared
            break
        projector = squared
    idem = float(np.max(np.abs(projector @ projector - projector)))
    comm = float(
        max(
            np.max(np.abs(t @ projector - projector)),
            np.max(np.abs(projector @ t - projector)),
        )
    )
    return InvariantMeanReport(
        mean=mean,
        projector=projector,
        idempotency_residual=idem,
        commutation_residual=comm,
        cauchy_residual=cauchy,
        refinement_distance=float(np.max(np.abs(projector - mean))),
        lawful=bool(idem <= law_tolerance and comm <= law_tolerance),
    )


# -- tensor products ----------------------------------------------------------------


def tensor_product(left: MarkovSystem, right: MarkovSystem) -> MarkovSystem:
    """Kronecker product system with the pairwise tensor functional family."""
    d = left.dimension * right.dimension
    if d > TENSOR_DIMENSION_CAP:
        raise ValueError(
            f"tensor dimension {d} exceeds the cap {TENSOR_DIMENSION_CAP}"
        )
    rows = [
        np.kron(phi, psi) for phi in left.functionals for psi in right.functionals
    ]
    return MarkovSystem(
        transition=np.kron(left.transition, right.transition),
        idempotent=np.kron(left.idempotent, right.idempotent),
        functionals=np.array(rows),
        commutative=left.commutative and right.commutative,
    )


def hermitian_decomposition(functional) -> Tuple[np.ndarray, np.ndarray]:
    """Split a row functional as h1 + i h2 with h1, h2 Hermitian (real rows)."""
    row = np.asarray(functional, dtype=complex)
    return row.real.copy(), row.imag.copy()
