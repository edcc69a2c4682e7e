"""Weighted averaging nets and the mean ergodic machinery for matrix flows.

Weight families come in a discrete form on 1..N and a continuous form on a
window of the half line: uniform weights, the power family t^s (s > -1), the
logarithmic family 1/t on [1, N], the reversed-power family (N - t)^s, and
user-supplied sampled weights on the discrete side.

Continuous integrals use composite Simpson quadrature with a sub-step of at
most 0.01; the logarithmic family integrates on a geometric grid (uniform in
log t), and power weights with negative exponent get a closed-form head cell
so the integrable endpoint singularity never meets the grid.  Quadrature
accumulates over fixed-size chunks in index order, so results are
reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

_CHUNK = 1 << 17
_SUBSTEP = 0.01

DISCRETE = "discrete"
CONTINUOUS = "continuous"


class SchemeError(ValueError):
    """Invalid weight-scheme declaration or use."""


class IllConditionedError(RuntimeError):
    """Eigenproblem has spectrum too close to the fixed-space threshold."""


@dataclass(frozen=True)
class WeightScheme:
    """A weight family together with its domain.

    ``exponent`` is used by the power and voronoi families and must satisfy
    -1 < s <= 4 (beyond that the normalizer is useless at double precision).
    ``samples`` backs the custom family, which is discrete-only.
    """

    domain: str
    family: str
    exponent: Optional[float] = None
    samples: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.domain not in (DISCRETE, CONTINUOUS):
            raise SchemeError(f"unknown domain {self.domain!r}")
        if self.family in ("power", "voronoi"):
            if self.exponent is None or not -1.0 < self.exponent <= 4.0:
                raise SchemeError("power/voronoi exponent must satisfy -1 < s <= 4")
        elif self.family in ("uniform", "log"):
            if self.exponent is not None:
                raise SchemeError(f"{self.family} takes no exponent")
        elif self.family == "custom":
            if self.domain != DISCRETE:
                raise SchemeError("custom weights are discrete-only")
            if not self.samples or any(w < 0 for w in self.samples):
                raise SchemeError("custom weights must be nonnegative and nonempty")
            if sum(self.samples) <= 0:
                raise SchemeError("custom weights must have positive total")
        else:
            raise SchemeError(f"unknown family {self.family!r}")

    @property
    def label(self) -> str:
        if self.exponent is not None:
            return f"{self.family}({self.exponent:g})"
        return self.family


def uniform(domain: str = DISCRETE) -> WeightScheme:
    return WeightScheme(domain, "uniform")


def power(exponent: float, domain: str = DISCRETE) -> WeightScheme:
    return WeightScheme(domain, "power", exponent=float(exponent))


def log_family(domain: str = DISCRETE) -> WeightScheme:
    return WeightScheme(domain, "log")


def voronoi(exponent: float, domain: str = DISCRETE) -> WeightScheme:
    return WeightScheme(domain, "voronoi", exponent=float(exponent))


def custom(samples: Sequence[float]) -> WeightScheme:
    return WeightScheme(DISCRETE, "custom", samples=tuple(float(w) for w in samples))


# -- discrete side -----------------------------------------------------------


def discrete_weights(scheme: WeightScheme, count: int) -> np.ndarray:
    """Weights f_N(n) for n = 1..count."""
    if scheme.domain != DISCRETE:
        raise SchemeError("discrete weights need a discrete scheme")
    if count < 1:
        raise SchemeError("index must be a positive integer")
    n = np.arange(1, count + 1, dtype=float)
    if scheme.family == "uniform":
        w = np.ones(count)
    elif scheme.family == "power":
        w = n ** scheme.exponent
    elif scheme.family == "log":
        w = 1.0 / n
    elif scheme.family == "voronoi":
        w = (count - n + 1.0) ** scheme.exponent
    else:
        if len(scheme.samples) < count:
            raise SchemeError(
                f"custom scheme has {len(scheme.samples)} samples, needs {count}"
            )
        w = np.asarray(scheme.samples[:count], dtype=float)
    total = w.sum()
    if not total > 0:
        raise SchemeError("weight normalizer must be positive")
    return w


def weighted_mean_scalar(values: Sequence[complex], scheme: WeightScheme, count: int) -> complex:
    """Normalized weighted mean of values indexed by n = 1..count."""
    vals = np.asarray(values)
    if vals.shape[0] != count:
        raise SchemeError(f"need {count} values, got {vals.shape[0]}")
    w = discrete_weights(scheme, count)
    return complex((w * vals).sum() / w.sum())


# -- continuous quadrature ------------------------------------------------------


def window(scheme: WeightScheme, index: float) -> Tuple[float, float]:
    """The averaging window for a continuous scheme at net index N."""
    if scheme.family == "log":
        if index <= 1.0:
            raise SchemeError("log window needs index > 1")
        return (1.0, float(index))
    if index <= 0.0:
        raise SchemeError("index must be positive")
    return (0.0, float(index))


def _simpson_grid(a: float, b: float, substep: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and Simpson coefficients on [a, b] with sub-step <= substep."""
    span = b - a
    panels = max(1, int(math.ceil(span / (2.0 * substep))))
    nsub = 2 * panels
    h = span / nsub
    ts = a + h * np.arange(nsub + 1)
    coeff = np.full(nsub + 1, 2.0)
    coeff[1::2] = 4.0
    coeff[0] = coeff[-1] = 1.0
    return ts, coeff * (h / 3.0)


def _weight_values(scheme: WeightScheme, index: float, ts: np.ndarray) -> np.ndarray:
    if scheme.family == "uniform":
        return np.ones_like(ts)
    if scheme.family == "power":
        return ts ** scheme.exponent
    if scheme.family == "log":
        return 1.0 / ts
    if scheme.family == "voronoi":
        return (index - ts) ** scheme.exponent
    raise SchemeError(f"family {scheme.family!r} has no continuous form")


def _plan(scheme: WeightScheme, index: float, substep: float, cell: Optional[float] = None):
    """Quadrature plan: grid window, closed-form head/tail mass, head/tail times.

    Power and voronoi weights with negative exponent have an integrable
    singularity at one window endpoint; a cell of width ``cell`` (default one
    sub-step) is integrated there in closed form, the rest goes on the grid.
    """
    a, b = window(scheme, index)
    head = tail = 0.0
    s = scheme.exponent
    width = substep if cell is None else min(cell, (b - a) / 4.0)
    if scheme.family == "power" and s is not None and s < 0:
        head = width ** (s + 1.0) / (s + 1.0)
        a += width
    elif scheme.family == "voronoi" and s is not None and s < 0:
        tail = width ** (s + 1.0) / (s + 1.0)
        b -= width
    if b <= a:
        raise SchemeError("window too small for the quadrature sub-step")
    return a, b, head, tail


def normalizer(scheme: WeightScheme, index: float, substep: float = _SUBSTEP) -> float:
    """Quadrature value of the weight integral over the window.

    The singular head cell is exact here (the integrand is the bare weight),
    so it is taken wide.
    """
    if scheme.domain != CONTINUOUS:
        return float(discrete_weights(scheme, int(index)).sum())
    a, b, head, tail = _plan(scheme, index, substep, cell=0.5)
    ts, coeff = _simpson_grid(a, b, substep)
    return float((coeff * _weight_values(scheme, index, ts)).sum() + head + tail)


# -- matrix flows -------------------------------------------------------------


class UnitaryFlow:
    """Continuous one-parameter unitary group generated by a Hermitian matrix."""

    def __init__(self, generator: Sequence[Sequence[complex]]):
        h = np.asarray(generator, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("generator must be a square matrix")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("generator must be Hermitian")
        self.generator = h
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(h)

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    @property
    def max_frequency(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.dimension else 0.0

    def at(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(1j * t * self.eigenvalues)) @ v.conj().T

    def phase_sums(self, ts: np.ndarray, coeff: np.ndarray) -> np.ndarray:
        """sum_t coeff[t] * exp(i t lambda_j), accumulated in fixed chunk order."""
        out = np.zeros(self.dimension, dtype=complex)
        lam = self.eigenvalues
        for start in range(0, ts.shape[0], _CHUNK):
            t_chunk = ts[start : start + _CHUNK]
            c_chunk = coeff[start : start + _CHUNK]
            for j, freq in enumerate(lam):
                phase = freq * t_chunk
                out[j] += c_chunk @ np.cos(phase) + 1j * (c_chunk @ np.sin(phase))
        return out


def _coefficient_total(coeff: np.ndarray) -> float:
    """Chunked total of quadrature coefficients.

    Mirrors the reduction in ``phase_sums`` exactly, so a zero eigenvalue's
    phase sum equals the plain coefficient total bit for bit and constant
    flows average to their input with no rounding residue.
    """
    total = 0.0
    for start in range(0, coeff.shape[0], _CHUNK):
        c_chunk = coeff[start : start + _CHUNK]
        total += c_chunk @ np.ones_like(c_chunk)
    return total


class PowerContraction:
    """Discrete semigroup of powers of a single contraction matrix."""

    def __init__(self, matrix: Sequence[Sequence[complex]]):
        u = np.asarray(matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("matrix must be square")
        norm = float(np.linalg.norm(u, 2))
        if norm > 1.0 + 1e-12:
            raise ValueError(f"matrix is not a contraction: operator norm {norm}")
        self.matrix = u

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


Flow = Union[UnitaryFlow, PowerContraction]


def fixed_space_projection(flow: Flow, threshold: float = 1e-10) -> np.ndarray:
    """Orthogonal projection onto the common fixed space of the flow.

    Continuous: the kernel of the generator.  Discrete: the kernel of U - I,
    which for a Hilbert-space contraction carries the full mean-ergodic
    limit.  Raises when the relevant spectrum crowds the threshold.
    """
    if isinstance(flow, UnitaryFlow):
        lam = np.abs(flow.eigenvalues)
        if np.any((lam > threshold) & (lam < 100 * threshold)):
            raise IllConditionedError(
                f"generator eigenvalues within (1, 100) x {threshold} of zero: "
                f"{sorted(lam)}"
            )
        cols = flow.eigenvectors[:, lam <= threshold]
        return cols @ cols.conj().T
    m = flow.matrix - np.eye(flow.dimension)
    _, svals, vh = np.linalg.svd(m)
    scale = max(1.0, float(svals[0]) if svals.size else 1.0)
    if np.any((svals > threshold * scale) & (svals < 100 * threshold * scale)):
        raise IllConditionedError(
            f"singular values of U - I crowd the null threshold: {svals}"
        )
    null = vh[svals <= threshold * scale].conj().T
    return null @ null.conj().T


def _continuous_flow_mean(
    flow: UnitaryFlow, x: np.ndarray, scheme: WeightScheme, index: float
) -> np.ndarray:
    if scheme.family == "log":
        # geometric grid: integrate in u = log t, where the weight is flat
        top = math.log(index)
        substep = min(_SUBSTEP, 0.2 / (1.0 + flow.max_frequency * index))
        us, coeff = _simpson_grid(0.0, top, substep)
        ts = np.exp(us)
        y = flow.eigenvectors.conj().T @ x
        sums = flow.phase_sums(ts, coeff)
        numerator = flow.eigenvectors @ (sums * y)
        denominator = _coefficient_total(coeff)
        return numerator / denominator
    a, b, head, tail = _plan(scheme, index, _SUBSTEP)
    ts, coeff = _simpson_grid(a, b, _SUBSTEP)
    weights = coeff * _weight_values(scheme, index, ts)
    y = flow.eigenvectors.conj().T @ x
    sums = flow.phase_sums(ts, weights)
    numerator = flow.eigenvectors @ (sums * y)
    denominator = _coefficient_total(weights)
    if head:
        numerator = numerator + head * x
        denominator += head
    if tail:
        numerator = numerator + tail * (flow.at(b + _SUBSTEP) @ x)
        denominator += tail
    if not denominator > 0:
        raise SchemeError("weight normalizer must be positive")
    return numerator / denominator


def _discrete_flow_mean(
    flow: PowerContraction, x: np.ndarray, scheme: WeightScheme, count: int
) -> np.ndarray:
    w = discrete_weights(scheme, count)
    acc = np.zeros_like(x, dtype=complex)
    cur = x.astype(complex)
    for n in range(1, count + 1):
        cur = flow.matrix @ cur
        acc += w[n - 1] * cur
    return acc / w.sum()


def weighted_mean_flow(flow: Flow, x: Sequence[complex], scheme: WeightScheme, index) -> np.ndarray:
    """The normalized weighted average of the flow orbit of x up to index."""
    vec = np.asarray(x, dtype=complex)
    if vec.shape != (flow.dimension,):
        raise ValueError(f"vector must have shape ({flow.dimension},)")
    if isinstance(flow, UnitaryFlow):
        if scheme.domain != CONTINUOUS:
            raise SchemeError("a continuous flow needs a continuous scheme")
        return _continuous_flow_mean(flow, vec, scheme, float(index))
    if scheme.domain != DISCRETE:
        raise SchemeError("a discrete flow needs a discrete scheme")
    return _discrete_flow_mean(flow, vec, scheme, int(index))


# -- transformed averages ------------------------------------------------------


@dataclass(frozen=True)
class PowerSubstitution:
    """Compare the power-weighted mean with the substituted uniform mean."""

    exponent: float


@dataclass(frozen=True)
class ExpSubstitution:
    """Compare the logarithmic mean with the exponentially substituted mean."""


def transformed_average_check(
    flow: UnitaryFlow,
    x: Sequence[complex],
    variant: Union[PowerSubstitution, ExpSubstitution],
    index: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of a substitution identity, on matched windows.

    Power case: the t^s-weighted mean over [0, N^(1/(s+1))] against the plain
    mean of the reparametrized flow over [0, N].  Exponential case: the 1/t
    mean over [1, e^N] against the plain mean of the exponentially
    reparametrized flow over [0, N].  The two integrals are equal by change
    of variable, so they must agree within quadrature error.
    """
    vec = np.asarray(x, dtype=complex)
    y = flow.eigenvectors.conj().T @ vec
    if isinstance(variant, PowerSubstitution):
        s = variant.exponent
        if not -1.0 < s <= 4.0:
            raise SchemeError("substitution exponent must satisfy -1 < s <= 4")
        weighted = weighted_mean_flow(
            flow, vec, power(s, CONTINUOUS), index ** (1.0 / (s + 1.0))
        )
        ts, coeff = _simpson_grid(0.0, float(index), _SUBSTEP)
        sums = flow.phase_sums(ts ** (1.0 / (s + 1.0)), coeff)
        substituted = flow.eigenvectors @ (sums * y) / _coefficient_total(coeff)
        return weighted, substituted
    top = float(index)
    weighted = weighted_mean_flow(flow, vec, log_family(CONTINUOUS), math.exp(top))
    substep = min(_SUBSTEP, 0.4 / (1.0 + flow.max_frequency * math.exp(top)))
    ts, coeff = _simpson_grid(0.0, top, substep)
    sums = flow.phase_sums(np.exp(ts), coeff)
    substituted = flow.eigenvectors @ (sums * y) / _coefficient_total(coeff)
    return weighted, substituted


# -- averaging-net defects ---------------------------------------------------------


def folner_defect(scheme: WeightScheme, shift: float, index) -> float:
    """Largest of the two normalized defect integrals for a window shift.

    First quantity: weight mass the shifted window loses at the leading edge.
    Second: total variation between the weights and their shifted copy on the
    overlap.  Both are normalized by the full weight mass; an averaging
    family must send both to zero as the index grows.
    """
    if shift <= 0:
        raise SchemeError("shift must be positive")
    if scheme.family == "uniform" and scheme.domain == CONTINUOUS:
        # indicator weights: the defect is the exact one-sided set-difference ratio
        a, b = window(scheme, float(index))
        return min(float(shift), b - a) / (b - a)
    if scheme.domain == DISCRETE:
        count = int(index)
        h = int(shift)
        w = discrete_weights(scheme, count)
        if h >= count:
            return 1.0
        total = w.sum()
        lost = w[:h].sum()
        varied = np.abs(w[h:] - w[:-h]).sum()
        return float(max(lost, varied) / total)
    index = float(index)
    a, b = window(scheme, index)
    if shift >= b - a:
        return 1.0
    s = scheme.exponent
    singular = scheme.family in ("power", "voronoi") and s is not None and s < 0
    lost_head = 0.0
    lost_a, lost_b = a, a + shift
    if singular and scheme.family == "power":
        # exact antiderivative over a head cell at the singular left edge
        w = min(0.5, shift / 2.0)
        lost_head = w ** (s + 1.0) / (s + 1.0)
        lost_a += w
    ts, coeff = _simpson_grid(lost_a, lost_b, _SUBSTEP)
    lost = float((coeff * _weight_values(scheme, index, ts)).sum()) + lost_head

    var_head = 0.0
    var_a, var_b = a + shift, b
    if singular:
        # the shifted-copy difference behaves like u^s near the singular edge;
        # both antiderivatives are elementary, so the head cell is exact
        w = min(0.5, (var_b - var_a) / 8.0)
        var_head = (
            w ** (s + 1.0) - (shift + w) ** (s + 1.0) + shift ** (s + 1.0)
        ) / (s + 1.0)
        if scheme.family == "power":
            var_a += w
        else:
            var_b -= w
    ts, coeff = _simpson_grid(var_a, var_b, _SUBSTEP)
    cur = _weight_values(scheme, index, ts)
    if scheme.family == "voronoi":
        prev = (index - ts + shift) ** s
    elif scheme.family == "power":
        prev = (ts - shift) ** s
    elif scheme.family == "log":
        prev = 1.0 / (ts - shift)
    else:
        prev = np.ones_like(ts)
    varied = float((coeff * np.abs(cur - prev)).sum()) + var_head
    return max(lost, varied) / normalizer(scheme, index)
