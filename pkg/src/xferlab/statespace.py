"""Carriers for the base space: finite state sets and the circle.

Two carriers are supported.  ``FiniteSpace`` is an ordered finite set of
labelled states, optionally equipped with an onto self-map (which on a finite
set is necessarily a bijection, so genuine N-to-1 dynamics live on the
circle).  ``CircleSpace`` is the unit circle under the doubling map, with the
function algebra truncated to Laurent polynomials of a fixed maximal degree;
inside the truncation all algebra is exact, and anything that would leave it
raises ``DegreeOverflowError`` instead of silently truncating.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    CarrierMismatchError,
    DegreeOverflowError,
    NoEndomorphismError,
    NormalizationError,
)

DEFAULT_DEGREE = 64
DEFAULT_GRID = 1024

Angle = Union[Fraction, float]


@dataclass(frozen=True)
class FiniteSpace:
    """Finite carrier: ordered state labels plus an optional endomorphism.

    ``endo[i]`` is the index of r(states[i]).  The map must be onto; on a
    finite set that forces it to be a bijection, so every fiber is a
    singleton.
    """

    states: tuple
    endo: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.endo is not None:
            endo = tuple(int(i) for i in self.endo)
            if len(endo) != len(self.states):
                raise ValueError("endo must assign an image to every state")
            if set(endo) != set(range(len(self.states))):
                raise ValueError("endo must be onto (hence bijective on a finite set)")
            object.__setattr__(self, "endo", endo)

    @property
    def n(self) -> int:
        return len(self.states)

    def index(self, label) -> int:
        return self.states.index(label)

    def fiber(self, i: int) -> tuple[int, ...]:
        """Inverse image r^{-1}(states[i]) as a tuple of indices."""
        if self.endo is None:
            raise NoEndomorphismError("space has no endomorphism")
        return tuple(j for j in range(self.n) if self.endo[j] == i)

    def apply_endo(self, i: int) -> int:
        if self.endo is None:
            raise NoEndomorphismError("space has no endomorphism")
        return self.endo[i]


@dataclass(frozen=True)
class CircleSpace:
    """The circle under z -> z^2, with trig polynomials of degree <= degree.

    ``grid`` is the uniform evaluation grid used for sampling and pointwise
    (non-exact) checks; it plays no role in the coefficient algebra.
    """

    degree: int = DEFAULT_DEGREE
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @staticmethod
    def forward(t: Angle) -> Angle:
        """The doubling map on angles, r(t) = 2t mod 1."""
        return (2 * t) % 1

    @staticmethod
    def preimages(t: Fraction) -> tuple[Fraction, Fraction]:
        """The two square roots of e^{2 pi i t}, as exact angles."""
        t = Fraction(t) % 1
        return (t / 2, (t + 1) / 2)


Space = Union[FiniteSpace, CircleSpace]


def angle_point(t: Angle) -> complex:
    """e^{2 pi i t}."""
    return cmath.exp(2j * cmath.pi * float(t))


def _check_same(a: Space, b: Space) -> None:
    if a != b:
        raise CarrierMismatchError(f"carriers differ: {a!r} vs {b!r}")


def convolve_coeffs(a: Mapping[int, complex], b: Mapping[int, complex]) -> dict[int, complex]:
    """Coefficient convolution (pointwise product of the polynomials), unchecked."""
    out: dict[int, complex] = {}
    for n, cn in a.items():
        for m, cm in b.items():
            out[n + m] = out.get(n + m, 0) + cn * cm
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True, eq=False)
class Observable:
    """A function on a carrier.

    Finite carrier: a value per state.  Circle: a sparse map of Fourier
    coefficients n -> c_n with |n| <= space.degree; the function is
    sum c_n z^n.
    """

    space: Space
    values: np.ndarray | None = None
    fourier: dict[int, complex] | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_values(cls, space: FiniteSpace, values: Sequence) -> "Observable":
        arr = np.asarray(values)
        if arr.shape != (space.n,):
            raise ValueError("value vector length must match the state count")
        return cls(space, values=arr)

    @classmethod
    def from_fourier(cls, space: CircleSpace, coeffs: Mapping[int, complex]) -> "Observable":
        pruned = {int(n): complex(c) for n, c in coeffs.items() if c != 0}
        deg = max((abs(n) for n in pruned), default=0)
        if deg > space.degree:
            raise DegreeOverflowError(
                f"coefficient index {deg} exceeds the degree bound {space.degree}"
            )
        return cls(space, fourier=pruned)

    @classmethod
    def constant(cls, space: Space, c=1.0) -> "Observable":
        if isinstance(space, CircleSpace):
            return cls.from_fourier(space, {0: c} if c != 0 else {})
        return cls.from_values(space, np.full(space.n, c))

    @classmethod
    def character(cls, space: CircleSpace, n: int) -> "Observable":
        """e_n(z) = z^n."""
        return cls.from_fourier(space, {n: 1.0})

    @classmethod
    def indicator(cls, space: FiniteSpace, i: int) -> "Observable":
        v = np.zeros(space.n)
        v[i] = 1.0
        return cls.from_values(space, v)

    # -- basic queries -----------------------------------------------------

    @property
    def degree(self) -> int:
        if self.fourier is None:
            raise TypeError("degree is only defined on the circle carrier")
        return max((abs(n) for n in self.fourier), default=0)

    def is_real(self, tol: float = 1e-12) -> bool:
        if self.values is not None:
            return not np.iscomplexobj(self.values) or float(
                np.max(np.abs(self.values.imag))
            ) <= tol
        return all(
            abs(c - self.fourier.get(-n, 0).conjugate()) <= tol
            for n, c in self.fourier.items()
        )

    # -- evaluation --------------------------------------------------------

    def __call__(self, x):
        """Evaluate: state index (finite) or angle / unit-modulus complex (circle)."""
        if self.values is not None:
            return self.values[x]
        z = x if isinstance(x, complex) else angle_point(x)
        return sum(c * z**n for n, c in self.fourier.items())

    def eval_grid(self, size: int | None = None) -> np.ndarray:
        """Values on the uniform angle grid k/size, k=0..size-1 (circle only)."""
        if self.fourier is None:
            raise TypeError("eval_grid is only defined on the circle carrier")
        size = size or self.space.grid
        theta = np.arange(size) / size
        out = np.zeros(size, dtype=complex)
        for n, c in self.fourier.items():
            out += c * np.exp(2j * np.pi * n * theta)
        return out

    # -- algebra -----------------------------------------------------------

    def _like(self, other: "Observable") -> None:
        if not isinstance(other, Observable):
            raise TypeError("expected an Observable")
        _check_same(self.space, other.space)

    def __add__(self, other: "Observable") -> "Observable":
        self._like(other)
        if self.values is not None:
            return Observable.from_values(self.space, self.values + other.values)
        out = dict(self.fourier)
        for n, c in other.fourier.items():
            out[n] = out.get(n, 0) + c
        return Observable.from_fourier(self.space, out)

    def __sub__(self, other: "Observable") -> "Observable":
        return self + (-1.0) * other

    def __mul__(self, other):
        if not isinstance(other, Observable):
            if self.values is not None:
                return Observable.from_values(self.space, self.values * other)
            return Observable.from_fourier(
                self.space, {n: c * other for n, c in self.fourier.items()}
            )
        self._like(other)
        if self.values is not None:
            return Observable.from_values(self.space, self.values * other.values)
        return Observable.from_fourier(
            self.space, convolve_coeffs(self.fourier, other.fourier)
        )

    __rmul__ = __mul__

    def conj(self) -> "Observable":
        if self.values is not None:
            return Observable.from_values(self.space, np.conj(self.values))
        return Observable.from_fourier(
            self.space, {-n: c.conjugate() for n, c in self.fourier.items()}
        )

    def sup_norm(self, grid: int | None = None) -> float:
        if self.values is not None:
            return float(np.max(np.abs(self.values))) if self.space.n else 0.0
        if not self.fourier:
            return 0.0
        return float(np.max(np.abs(self.eval_grid(grid))))

    def coeff_norm(self) -> float:
        """Max absolute Fourier coefficient (circle); max abs value (finite)."""
        if self.values is not None:
            return self.sup_norm()
        return max((abs(c) for c in self.fourier.values()), default=0.0)


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability measure on a carrier: weights per state, or Haar on the circle."""

    space: Space
    weights: np.ndarray | None = None
    haar: bool = False

    @classmethod
    def from_weights(cls, space: FiniteSpace, weights: Sequence) -> "Measure":
        w = np.asarray(weights, dtype=float)
        if w.shape != (space.n,):
            raise ValueError("weight vector length must match the state count")
        if np.any(w < 0):
            raise NormalizationError("measure weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise NormalizationError(f"weights sum to {w.sum()}, expected 1 within 1e-12")
        return cls(space, weights=w)

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "Measure":
        return cls.from_weights(space, np.full(space.n, 1.0 / space.n))

    @classmethod
    def point_mass(cls, space: FiniteSpace, i: int) -> "Measure":
        w = np.zeros(space.n)
        w[i] = 1.0
        return cls.from_weights(space, w)

    @classmethod
    def haar_measure(cls, space: CircleSpace) -> "Measure":
        return cls(space, haar=True)

    def full_support(self) -> bool:
        return self.haar or bool(np.all(self.weights > 0))


def integrate(mu: Measure, phi: Observable):
    """integral of phi against mu: a weighted sum, or the 0th Fourier coefficient."""
    _check_same(mu.space, phi.space)
    if mu.haar:
        return phi.fourier.get(0, 0.0)
    val = np.dot(mu.weights, phi.values)
    return complex(val) if np.iscomplexobj(phi.values) else float(val)


def inner_product(mu: Measure, phi: Observable, psi: Observable):
    """<phi, psi>_mu = integral of phi * conj(psi)."""
    return integrate(mu, phi * psi.conj())


def compose_with_endo(phi: Observable) -> Observable:
    """phi o r.  On the circle this doubles every Fourier index."""
    space = phi.space
    if isinstance(space, CircleSpace):
        return Observable.from_fourier(space, {2 * n: c for n, c in phi.fourier.items()})
    if space.endo is None:
        raise NoEndomorphismError("space has no endomorphism")
    return Observable.from_values(space, phi.values[np.asarray(space.endo)])


def fiber_average(phi: Observable) -> Observable:
    """x -> (1 / #r^{-1}(x)) sum_{r(y)=x} phi(y).

    On the circle (doubling map) this keeps even coefficients, halving their
    index; on a finite space the (bijective) fibers are singletons.
    """
    space = phi.space
    if isinstance(space, CircleSpace):
        return Observable.from_fourier(
            space, {n // 2: c for n, c in phi.fourier.items() if n % 2 == 0}
        )
    out = np.empty(space.n, dtype=phi.values.dtype)
    for i in range(space.n):
        fib = space.fiber(i)
        out[i] = sum(phi.values[j] for j in fib) / len(fib)
    return Observable.from_values(space, out)


def default_test_basis(space: Space) -> list[Observable]:
    """State indicators (finite) or all characters within the degree bound (circle)."""
    if isinstance(space, CircleSpace):
        return [Observable.character(space, n) for n in range(-space.degree, space.degree + 1)]
    return [Observable.indicator(space, i) for i in range(space.n)]


def strong_invariance_check(
    mu: Measure, space: Space | None = None, basis: Iterable[Observable] | None = None
) -> float:
    """Max over the test basis of |int phi dmu - int fiber_average(phi) dmu|.

    Zero certifies strong invariance of mu with respect to the endomorphism.
    """
    space = space or mu.space
    _check_same(mu.space, space)
    if isinstance(space, FiniteSpace) and space.endo is None:
        raise NoEndomorphismError("strong invariance requires an endomorphism")
    basis = basis if basis is not None else default_test_basis(space)
    res = 0.0
    for phi in basis:
        res = max(res, abs(integrate(mu, phi) - integrate(mu, fiber_average(phi))))
    return res
