"""Positive unital operators R on C(B).

Finite carriers use a row-stochastic matrix, (R phi)(x) = sum_y K[x,y] phi(y).
The circle carrier uses a Ruelle operator for the doubling map with a
trig-polynomial weight W (typically |m0|^2 / 2 for a filter m0):

    (R phi)(z) = sum_{u^2 = z} W(u) phi(u),

realized exactly on Fourier coefficients as (R phi)_k = 2 (W * phi)_{2k},
where * is coefficient convolution.  Unitality R1 = 1 and positivity are
validated at construction.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CarrierMismatchError,
    NoEndomorphismError,
    NormalizationError,
    ReducibleChainWarning,
)
from .statespace import (
    CircleSpace,
    FiniteSpace,
    Measure,
    Observable,
    angle_point,
    compose_with_endo,
    convolve_coeffs,
    _check_same,
)

UNITALITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10
DIRECT_SOLVE_MAX = 64
POWER_ITER_TOL = 1e-13
POWER_ITER_MAX = 10**6


class TransferOperator:
    """Common interface: apply, powers, unitality/positivity residuals."""

    def apply(self, phi: Observable) -> Observable:
        raise NotImplementedError

    def apply_power(self, phi: Observable, k: int) -> Observable:
        if k < 0:
            raise ValueError("k must be >= 0")
        out = phi
        for _ in range(k):
            out = self.apply(out)
        return out

    def fingerprint(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class MatrixOperator(TransferOperator):
    space: FiniteSpace
    kernel: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.shape != (self.space.n, self.space.n):
            raise ValueError("kernel must be square and match the state count")
        if np.any(k < 0):
            raise NormalizationError("kernel entries must be nonnegative")
        rows = k.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > UNITALITY_TOL:
            raise NormalizationError("rows must sum to 1 within 1e-12 (R1 = 1)")
        object.__setattr__(self, "kernel", k)

    def apply(self, phi: Observable) -> Observable:
        _check_same(self.space, phi.space)
        return Observable.from_values(self.space, self.kernel @ phi.values)

    def power(self, k: int) -> "MatrixOperator":
        if k < 0:
            raise ValueError("k must be >= 0")
        return MatrixOperator(self.space, np.linalg.matrix_power(self.kernel, k))

    def unitality_residual(self) -> float:
        return float(np.max(np.abs(self.kernel.sum(axis=1) - 1.0)))

    def transition_row(self, i: int) -> np.ndarray:
        return self.kernel[i]

    def fingerprint(self) -> str:
        h = hashlib.sha256(np.ascontiguousarray(self.kernel).tobytes())
        return "matrix:" + h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class CircleRuelleOperator(TransferOperator):
    """Ruelle operator for the doubling map with weight W = |m0|^2 / 2.

    ``weight`` holds the Fourier coefficients of W; ``m0`` (optional) those of
    the generating filter, needed for the adjoint formula.
    """

    space: CircleSpace
    weight: dict[int, complex]
    m0: dict[int, complex] | None = None

    def __post_init__(self):
        w = {int(n): complex(c) for n, c in self.weight.items() if c != 0}
        object.__setattr__(self, "weight", w)
        # unitality: (R 1)_k = 2 W_{2k} must be the delta at 0
        for n, c in w.items():
            if n % 2 == 0:
                target = 0.5 if n == 0 else 0.0
                if abs(c - target) > UNITALITY_TOL:
                    raise NormalizationError(
                        f"weight violates R1=1: coefficient W_{n} = {c}"
                    )
        grid = max(8 * self.space.degree, 16)
        theta = np.arange(grid) / grid
        vals = np.zeros(grid, dtype=complex)
        for n, c in w.items():
            vals += c * np.exp(2j * np.pi * n * theta)
        if np.max(np.abs(vals.imag)) > POSITIVITY_TOL or np.min(vals.real) < -POSITIVITY_TOL:
            raise NormalizationError("weight must be real and nonnegative on the grid")

    def apply(self, phi: Observable) -> Observable:
        _check_same(self.space, phi.space)
        g = convolve_coeffs(self.weight, phi.fourier)
        out = {n // 2: 2 * c for n, c in g.items() if n % 2 == 0}
        return Observable.from_fourier(self.space, out)

    def weight_at(self, t) -> float:
        z = angle_point(t)
        return float(sum(c * z**n for n, c in self.weight.items()).real)

    def transition_weights(self, t: Fraction) -> tuple[tuple[Fraction, float], ...]:
        """Backward-branch angles u with u^2 = e^{2 pi i t} and their probabilities."""
        pre = CircleSpace.preimages(Fraction(t))
        w = [self.weight_at(u) for u in pre]
        total = sum(w)
        if abs(total - 1.0) > 1e-8:
            raise NormalizationError(f"transition weights sum to {total}, expected 1")
        return tuple((u, wi / total) for u, wi in zip(pre, w))

    def fingerprint(self) -> str:
        items = sorted((n, c.real, c.imag) for n, c in self.weight.items())
        h = hashlib.sha256(repr(items).encode())
        return "ruelle:" + h.hexdigest()[:16]


def matrix_operator(space: FiniteSpace, rows: Sequence[Sequence[float]]) -> MatrixOperator:
    return MatrixOperator(space, np.asarray(rows, dtype=float))


def ruelle_from_endo(space: FiniteSpace, W: Sequence[float] | None = None) -> MatrixOperator:
    """Ruelle operator (R phi)(x) = sum_{r(y)=x} W(y) phi(y) on a finite carrier.

    Fibers are singletons (finite onto maps are bijections), so W must be
    identically 1 and the operator is the permutation pullback by r^{-1}.
    """
    if space.endo is None:
        raise NoEndomorphismError("Ruelle construction requires an endomorphism")
    w = np.ones(space.n) if W is None else np.asarray(W, dtype=float)
    k = np.zeros((space.n, space.n))
    for y in range(space.n):
        k[space.endo[y], y] = w[y]
    return MatrixOperator(space, k)


def ruelle_from_filter(
    space: CircleSpace, m0: Mapping[int, complex]
) -> CircleRuelleOperator:
    """Ruelle operator with QMF weight W = |m0|^2 / 2 from filter coefficients."""
    m = {int(n): complex(c) for n, c in m0.items() if c != 0}
    conj = {-n: c.conjugate() for n, c in m.items()}
    weight = {n: c / 2 for n, c in convolve_coeffs(m, conj).items()}
    return CircleRuelleOperator(space, weight, m0=m)


def uniform_circle_operator(space: CircleSpace) -> CircleRuelleOperator:
    """The fiber-average operator, weight W = 1/2 (group case, N = 2)."""
    return CircleRuelleOperator(space, {0: 0.5}, m0={0: 1.0})


@dataclass(frozen=True, eq=False)
class IntegralKernel:
    """Grid kernel K(x_i, y_j) >= 0 with quadrature measure mu on the grid."""

    space: FiniteSpace
    values: np.ndarray
    mu: Measure

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.space.n, self.space.n):
            raise ValueError("kernel grid must be square and match the state count")
        if np.any(v < 0):
            raise NormalizationError("kernel values must be nonnegative")
        _check_same(self.space, self.mu.space)
        rows = v @ self.mu.weights
        if np.max(np.abs(rows - 1.0)) > 1e-10:
            raise NormalizationError(
                "integral of K(x, .) against mu must be 1 for every grid x"
            )
        object.__setattr__(self, "values", v)


def kernel_operator(kernel: IntegralKernel) -> MatrixOperator:
    """Discretize R_K f(x) = int K(x,y) f(y) dmu(y) as a stochastic matrix."""
    return MatrixOperator(kernel.space, kernel.values * kernel.mu.weights[None, :])


def adjoint_apply(R: TransferOperator, mu: Measure, psi: Observable) -> Observable:
    """R* in L^2(B, mu): <R phi, psi>_mu = <phi, R* psi>_mu.

    Finite case: (R* psi)(y) = sum_x mu(x) K[x,y] psi(x) / mu(y), requiring
    full support.  Circle case (mu = Haar, filter-built R):
    (R* psi)(x) = |m0(x)|^2 psi(r(x)).
    """
    _check_same(R.space, psi.space)
    if isinstance(R, MatrixOperator):
        if mu.weights is None:
            raise CarrierMismatchError("finite adjoint requires a finite measure")
        if not mu.full_support():
            raise ValueError("adjoint undefined at zero-mass states: mu must have full support")
        vals = (R.kernel.T @ (mu.weights * psi.values)) / mu.weights
        return Observable.from_values(R.space, vals)
    if not mu.haar:
        raise ValueError("circle adjoint is implemented for the Haar measure only")
    if R.m0 is None:
        raise ValueError("circle adjoint requires the generating filter m0")
    doubled = {2 * n: c for n, c in psi.fourier.items()}
    two_w = {n: 2 * c for n, c in R.weight.items()}  # |m0|^2
    return Observable.from_fourier(R.space, convolve_coeffs(two_w, doubled))


def invariant_measure(R: TransferOperator) -> Measure:
    """A probability measure with mu o R = mu.

    Finite carriers: direct linear solve up to 64 states, power iteration
    beyond.  If the fixed point is not unique a ReducibleChainWarning is
    emitted and one fixed point is returned.  On the circle, Haar is returned
    exactly when the invariance identity holds on the character basis (which
    forces the uniform weight W = 1/2); otherwise no representable invariant
    measure exists and a ValueError is raised.
    """
    if isinstance(R, CircleRuelleOperator):
        # mu o R = mu on characters e_n reads 2 W_{-n} = delta_{n,0}
        for n, c in R.weight.items():
            if n != 0 and abs(c) > UNITALITY_TOL:
                raise ValueError(
                    "Haar is not invariant for this weight (W is not constant 1/2); "
                    "no trig-polynomial-representable invariant measure exists"
                )
        return Measure.haar_measure(R.space)
    k = R.kernel
    n = R.space.n
    if n <= DIRECT_SOLVE_MAX:
        eigvals = np.linalg.eigvals(k)
        if np.sum(np.abs(eigvals - 1.0) < 1e-9) > 1:
            warnings.warn(
                "eigenvalue 1 has multiplicity > 1; returning one fixed point",
                ReducibleChainWarning,
            )
        a = np.vstack([k.T - np.eye(n), np.ones(n)])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        w, *_ = np.linalg.lstsq(a, b, rcond=None)
    else:
        w = np.full(n, 1.0 / n)
        for _ in range(POWER_ITER_MAX):
            nxt = w @ k
            if np.max(np.abs(nxt - w)) < POWER_ITER_TOL:
                w = nxt
                break
            w = nxt
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    return Measure.from_weights(R.space, w)


def stationarity_residual(R: TransferOperator, mu: Measure) -> float:
    """Max over a basis of |int R(phi) dmu - int phi dmu|."""
    from .statespace import default_test_basis, integrate

    res = 0.0
    for phi in default_test_basis(R.space):
        res = max(res, abs(integrate(mu, R.apply(phi)) - integrate(mu, phi)))
    return res


def _random_observable(space, rng, max_degree: int = 8) -> Observable:
    if isinstance(space, CircleSpace):
        d = min(max_degree, space.degree // 8) or 1
        coeffs = {
            n: complex(rng.standard_normal(), rng.standard_normal())
            for n in range(-d, d + 1)
        }
        return Observable.from_fourier(space, coeffs)
    return Observable.from_values(space, rng.standard_normal(space.n))


def pullout_check(R: TransferOperator, n_pairs: int = 20, seed: int = 7) -> float:
    """Max residual of R((phi o r) psi) = phi R(psi) over a seeded random battery.

    Zero certifies the pull-out axiom tying R to the endomorphism.
    """
    space = R.space
    if isinstance(space, FiniteSpace) and space.endo is None:
        raise NoEndomorphismError("pull-out check requires an endomorphism")
    rng = np.random.default_rng(seed)
    res = 0.0
    for _ in range(n_pairs):
        phi = _random_observable(space, rng)
        psi = _random_observable(space, rng)
        lhs = R.apply(compose_with_endo(phi) * psi)
        rhs = phi * R.apply(psi)
        res = max(res, (lhs - rhs).coeff_norm())
    return res


def composition_isometry_residual(
    m0: Mapping[int, complex],
    space: CircleSpace,
    n_funcs: int = 20,
    seed: int = 11,
) -> float:
    """Max over a battery of | ||m0 (f o r)||^2 - ||f||^2 | in L^2(Haar).

    Zero iff the operator built from |m0|^2 is unital (QMF condition).
    """
    from .statespace import inner_product

    mu = Measure.haar_measure(space)
    m = Observable.from_fourier(space, m0)
    rng = np.random.default_rng(seed)
    res = 0.0
    for _ in range(n_funcs):
        f = _random_observable(space, rng, max_degree=min(8, space.degree // 4))
        g = m * compose_with_endo(f)
        res = max(res, abs(inner_product(mu, g, g) - inner_product(mu, f, f)))
    return res
