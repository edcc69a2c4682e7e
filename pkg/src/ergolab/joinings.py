"""Couplings and joinings of finite permutation systems, with LP certificates.

A classical system here is a finite set with a permutation and an invariant
probability vector.  A coupling is a nonnegative matrix with the two measures
as marginals; a joining is additionally invariant under the product
permutation, possibly with prescribed masses on an invariant partition (the
factor).  The joining set is then a polytope cut out by linear equalities,
so relative disjointness (the polytope being a single point) is certified by
minimizing and maximizing every coordinate with the simplex solver.

Measures and couplings are kept as exact fractions; weighted orbit averages
of a coupling stay exact whenever the weights are rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .averaging import DISCRETE, WeightScheme
from .lp import FEASIBILITY_TOL, coordinate_range, polytope_vertices

Rational = Union[int, str, Fraction, float]


class JoiningInfeasibleError(RuntimeError):
    """The prescribed factor masses admit no joining at all."""


def _fraction(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(value).limit_denominator(10**12)


@dataclass(frozen=True)
class PermutationSystem:
    """A finite set, a permutation of it, and an invariant probability vector."""

    permutation: Tuple[int, ...]
    measure: Tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.permutation)
        if sorted(self.permutation) != list(range(n)):
            raise ValueError("permutation must be a bijection of 0..n-1")
        measure = tuple(_fraction(m) for m in self.measure)
        if len(measure) != n:
            raise ValueError("measure length must match the set size")
        if any(m < 0 for m in measure):
            raise ValueError("measure must be nonnegative")
        if sum(measure) != 1:
            raise ValueError("measure must sum to one")
        for i in range(n):
            if measure[self.permutation[i]] != measure[i]:
                raise ValueError("measure must be invariant under the permutation")
        object.__setattr__(self, "permutation", tuple(int(i) for i in self.permutation))
        object.__setattr__(self, "measure", measure)

    @property
    def size(self) -> int:
        return len(self.permutation)

    @property
    def inverse_permutation(self) -> Tuple[int, ...]:
        inv = [0] * self.size
        for i, j in enumerate(self.permutation):
            inv[j] = i
        return tuple(inv)


def rotation(size: int, measure: Optional[Sequence[Rational]] = None) -> PermutationSystem:
    """The cyclic rotation on ``size`` points, uniform unless a measure is given."""
    if measure is None:
        measure = [Fraction(1, size)] * size
    return PermutationSystem(
        permutation=tuple((i + 1) % size for i in range(size)),
        measure=tuple(_fraction(m) for m in measure),
    )


@dataclass(frozen=True)
class Coupling:
    """A nonnegative matrix whose marginals are the two system measures."""

    matrix: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_fraction(v) for v in row) for row in self.matrix)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("coupling matrix must be rectangular and nonempty")
        if any(v < 0 for r in rows for v in r):
            raise ValueError("coupling entries must be nonnegative")
        object.__setattr__(self, "matrix", rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.matrix), len(self.matrix[0]))

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])

    def row_sums(self) -> Tuple[Fraction, ...]:
        return tuple(sum(row) for row in self.matrix)

    def column_sums(self) -> Tuple[Fraction, ...]:
        cols = self.shape[1]
        return tuple(sum(row[j] for row in self.matrix) for j in range(cols))


def coupling_of(
    left: PermutationSystem,
    right: PermutationSystem,
    matrix: Sequence[Sequence[Rational]],
    tol: Fraction = Fraction(1, 10**9),
) -> Coupling:
    """Validate a matrix as a coupling of the two systems' measures."""
    c = Coupling(tuple(tuple(_fraction(v) for v in row) for row in matrix))
    if c.shape != (left.size, right.size):
        raise ValueError(f"coupling must be {left.size} x {right.size}")
    for i, s in enumerate(c.row_sums()):
        if abs(s - left.measure[i]) > tol:
            raise ValueError(f"row {i} sums to {s}, expected {left.measure[i]}")
    for j, s in enumerate(c.column_sums()):
        if abs(s - right.measure[j]) > tol:
            raise ValueError(f"column {j} sums to {s}, expected {right.measure[j]}")
    return c


def product_coupling(left: PermutationSystem, right: PermutationSystem) -> Coupling:
    return Coupling(
        tuple(
            tuple(left.measure[i] * right.measure[j] for j in range(right.size))
            for i in range(left.size)
        )
    )


# -- factors ---------------------------------------------------------------------


@dataclass(frozen=True)
class FactorSpec:
    """An invariant partition of the product set with prescribed cell masses.

    ``generators`` are rational functions on the product (dense matrices);
    the partition is the common refinement of their level sets and must be
    carried to itself by the product permutation.  ``cell_masses`` prescribes
    the joining's mass on each cell, listed in order of each cell's smallest
    flat index (row-major).
    """

    generators: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    cell_masses: Tuple[Fraction, ...]

    def __post_init__(self):
        gens = tuple(
            tuple(tuple(_fraction(v) for v in row) for row in g) for g in self.generators
        )
        if not gens:
            raise ValueError("factor needs at least one generator")
        masses = tuple(_fraction(m) for m in self.cell_masses)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "cell_masses", masses)


def factor_cells(
    factor: FactorSpec, left: PermutationSystem, right: PermutationSystem
) -> List[List[int]]:
    """The level-set partition cells as flat index lists, canonically ordered.

    Validates that the product permutation maps cells onto cells; the factor
    algebra is then invariant as required.
    """
    na, nb = left.size, right.size
    for g in factor.generators:
        if len(g) != na or any(len(row) != nb for row in g):
            raise ValueError(f"generator must be a {na} x {nb} matrix")
    signature: Dict[Tuple[Fraction, ...], List[int]] = {}
    for x in range(na):
        for y in range(nb):
            key = tuple(g[x][y] for g in factor.generators)
            signature.setdefault(key, []).append(x * nb + y)
    cells = sorted(signature.values(), key=min)
    cell_of = {}
    for ci, cell in enumerate(cells):
        for flat in cell:
            cell_of[flat] = ci
    for ci, cell in enumerate(cells):
        images = {
            cell_of[left.permutation[flat // nb] * nb + right.permutation[flat % nb]]
            for flat in cell
        }
        if len(images) != 1:
            raise ValueError(
                "factor partition is not invariant under the product permutation"
            )
    if len(factor.cell_masses) != len(cells):
        raise ValueError(
            f"factor prescribes {len(factor.cell_masses)} masses for {len(cells)} cells"
        )
    if any(m < 0 for m in factor.cell_masses) or sum(factor.cell_masses) != 1:
        raise ValueError("factor masses must be a probability over the cells")
    return cells


# -- the joining polytope ------------------------------------------------------------


@dataclass(frozen=True)
class JoiningPolytope:
    """Equality constraints (with nonnegativity implied) cutting out all joinings."""

    left: PermutationSystem
    right: PermutationSystem
    a_eq: np.ndarray
    b_eq: np.ndarray

    @property
    def variables(self) -> int:
        return self.a_eq.shape[1]

    def contains(self, matrix: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(matrix, dtype=float).reshape(-1)
        return (
            float(np.max(np.abs(self.a_eq @ x - self.b_eq))) <= tol
            and float(x.min()) >= -tol
        )

    def residual(self, matrix: np.ndarray) -> float:
        x = np.asarray(matrix, dtype=float).reshape(-1)
        return float(np.max(np.abs(self.a_eq @ x - self.b_eq)))


def joining_polytope(
    left: PermutationSystem,
    right: PermutationSystem,
    factor: Optional[FactorSpec] = None,
) -> JoiningPolytope:
    """Assemble marginal, invariance and factor equalities over the couplings."""
    na, nb = left.size, right.size
    nvar = na * nb
    rows: List[np.ndarray] = []
    rhs: List[float] = []
    seen = set()

    def push(row: np.ndarray, value: float) -> None:
        key = (tuple(np.round(row, 12)), round(value, 12))
        if key not in seen and np.any(row != 0.0):
            seen.add(key)
            rows.append(row)
            rhs.append(value)

    for x in range(na):
        row = np.zeros(nvar)
        row[x * nb : (x + 1) * nb] = 1.0
        push(row, float(left.measure[x]))
    for y in range(nb):
        row = np.zeros(nvar)
        row[y::nb] = 1.0
        push(row, float(right.measure[y]))
    for x in range(na):
        for y in range(nb):
            row = np.zeros(nvar)
            src = x * nb + y
            dst = left.permutation[x] * nb + right.permutation[y]
            if src == dst:
                continue
            row[dst] += 1.0
            row[src] -= 1.0
            push(row, 0.0)
    if factor is not None:
        cells = factor_cells(factor, left, right)
        for cell, mass in zip(cells, factor.cell_masses):
            row = np.zeros(nvar)
            row[cell] = 1.0
            push(row, float(mass))
    return JoiningPolytope(left, right, np.array(rows), np.array(rhs))


@dataclass(frozen=True)
class DisjointnessReport:
    """Coordinatewise LP certificate for uniqueness of the joining."""

    disjoint: bool
    spread: float
    unique_joining: Optional[np.ndarray]
    witnesses: Optional[Tuple[np.ndarray, np.ndarray]]


def relative_disjointness(
    polytope: JoiningPolytope, tol: float = FEASIBILITY_TOL
) -> DisjointnessReport:
    """Decide whether the joining polytope is a single point.

    Minimizes and maximizes every coordinate; the polytope is a point exactly
    when every spread is within tolerance.  Otherwise two joinings witnessing
    the first wide coordinate are returned, reshaped as matrices.
    """
    na, nb = polytope.left.size, polytope.right.size
    point = None
    worst = 0.0
    for c in range(polytope.variables):
        low, high = coordinate_range(polytope.a_eq, polytope.b_eq, c, tol=tol)
        if not low.ok or not high.ok:
            raise JoiningInfeasibleError(
                "no coupling satisfies the constraints (the factor masses "
                "admit no extension to a joining)"
            )
        spread = high.x[c] - low.x[c]
        worst = max(worst, float(spread))
        if point is None:
            point = low.x
        if spread > tol:
            return DisjointnessReport(
                disjoint=False,
                spread=float(spread),
                unique_joining=None,
                witnesses=(low.x.reshape(na, nb), high.x.reshape(na, nb)),
            )
    return DisjointnessReport(
        disjoint=True,
        spread=worst,
        unique_joining=point.reshape(na, nb),
        witnesses=None,
    )


def joining_vertices(polytope: JoiningPolytope, max_bases: int = 200000) -> List[np.ndarray]:
    """Brute-force vertex list of the joining polytope (independent of the LP)."""
    na, nb = polytope.left.size, polytope.right.size
    return [
        v.reshape(na, nb)
        for v in polytope_vertices(polytope.a_eq, polytope.b_eq, max_bases=max_bases)
    ]


# -- orbit averages of couplings -------------------------------------------------------


def _rational_weights(scheme: WeightScheme, count: int) -> Optional[List[Fraction]]:
    if scheme.family == "uniform":
        return [Fraction(1)] * count
    if scheme.family == "power" and float(scheme.exponent).is_integer() and scheme.exponent >= 0:
        e = int(scheme.exponent)
        return [Fraction(n) ** e for n in range(1, count + 1)]
    if scheme.family == "voronoi" and float(scheme.exponent).is_integer() and scheme.exponent >= 0:
        e = int(scheme.exponent)
        return [Fraction(count - n + 1) ** e for n in range(1, count + 1)]
    if scheme.family == "log":
        return [Fraction(1, n) for n in range(1, count + 1)]
    if scheme.family == "custom":
        return [_fraction(w) for w in scheme.samples[:count]]
    return None


def weighted_coupling_average(
    left: PermutationSystem,
    right: PermutationSystem,
    couplings: Union[Coupling, Sequence[Coupling]],
    scheme: WeightScheme,
    count: int,
) -> Coupling:
    """Weighted mean of couplings transported along the product orbit.

    Step n transports the coupling by the n-th power of the product
    permutation (an indexed family of couplings is cycled through).  With
    rational weights the average is exact.
    """
    if scheme.domain != DISCRETE:
        raise ValueError("coupling averages use a discrete scheme")
    family = [couplings] if isinstance(couplings, Coupling) else list(couplings)
    if not family:
        raise ValueError("need at least one coupling")
    for c in family:
        coupling_of(left, right, c.matrix)
    weights = _rational_weights(scheme, count)
    if weights is None:
        raise ValueError("coupling averages need exact rational weights")
    na, nb = left.size, right.size
    inv_a = left.inverse_permutation
    inv_b = right.inverse_permutation
    # back_a[u] = sigma_A^{-n}(u), updated one step per n
    back_a = list(range(na))
    back_b = list(range(nb))
    acc = [[Fraction(0)] * nb for _ in range(na)]
    for n in range(1, count + 1):
        back_a = [back_a[inv_a[u]] for u in range(na)]
        back_b = [back_b[inv_b[v]] for v in range(nb)]
        mat = family[(n - 1) % len(family)].matrix
        w = weights[n - 1]
        for u in range(na):
            row = acc[u]
            src = mat[back_a[u]]
            for v in range(nb):
                row[v] += w * src[back_b[v]]
    total = sum(weights)
    return Coupling(
        tuple(tuple(entry / total for entry in row) for row in acc)
    )
