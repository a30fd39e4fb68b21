"""The solenoid of an endomorphism: backward-orbit words, shift and lift.

A solenoid word is a truncated backward orbit (x_1, ..., x_n) with
r(x_{i+1}) = x_i, held exactly: state indices on finite carriers, rational
angles on the circle.  The shift sigma drops the head; the lift rhat prepends
r(x_1); on solenoid words they are mutually inverse (up to the length
bookkeeping of truncation).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CarrierMismatchError, NormalizationError
from .pathmeasure import (
    CylinderFunctional,
    as_word,
    conditional_expectation,
    sigma_expectation,
)
from .statespace import (
    CircleSpace,
    FiniteSpace,
    Measure,
    Observable,
    compose_with_endo,
    integrate,
    _check_same,
)
from .transferop import CircleRuelleOperator, MatrixOperator, TransferOperator


@dataclass(frozen=True, eq=False)
class SolenoidWord:
    """Truncated backward orbit; the compatibility invariant is checked exactly."""

    space: object
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) < 1:
            raise ValueError("a solenoid word needs at least one entry")
        if isinstance(self.space, FiniteSpace):
            for i in range(len(entries) - 1):
                if self.space.apply_endo(entries[i + 1]) != entries[i]:
                    raise ValueError(f"compatibility r(x_{i+2}) = x_{i+1} fails")
        else:
            entries = tuple(Fraction(t) % 1 for t in entries)
            for i in range(len(entries) - 1):
                if (2 * entries[i + 1]) % 1 != entries[i]:
                    raise ValueError(f"compatibility 2 t_{i+2} = t_{i+1} (mod 1) fails")
        object.__setattr__(self, "entries", entries)

    @property
    def depth(self) -> int:
        return len(self.entries)

    def head(self):
        return self.entries[0]


def shift(word: SolenoidWord) -> SolenoidWord:
    """sigma: drop the head; the result is one entry shorter."""
    if word.depth < 2:
        raise ValueError("shift needs a word of length >= 2")
    return SolenoidWord(word.space, word.entries[1:])


def rhat(word: SolenoidWord) -> SolenoidWord:
    """The lift of r: prepend r(x_1); the result is one entry longer."""
    x1 = word.entries[0]
    if isinstance(word.space, FiniteSpace):
        rx = word.space.apply_endo(x1)
    else:
        rx = CircleSpace.forward(x1)
    return SolenoidWord(word.space, (rx,) + word.entries)


def is_compatible_path(space, entries) -> bool:
    """Whether a raw sampled word satisfies the solenoid invariant (exactly)."""
    if isinstance(space, FiniteSpace):
        return all(
            space.apply_endo(entries[i + 1]) == entries[i] for i in range(len(entries) - 1)
        )
    return all(
        (2 * Fraction(entries[i + 1])) % 1 == Fraction(entries[i]) % 1
        for i in range(len(entries) - 1)
    )


def support_mass(R: TransferOperator, x, n: int) -> float:
    """P_x-mass of length-n words compatible with the endomorphism.

    Exactly 1 when the pull-out axiom holds (the walk only moves backward
    along r); < 1 is the negative-control signal.  Monotone nonincreasing
    in n.  Computed as total mass minus the mass of incompatible prefixes,
    so the certificate of full support does not depend on float telescoping.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(R, MatrixOperator):
        space = R.space
        endo = np.asarray(space.endo)
        mass = np.zeros(space.n)
        mass[int(x)] = 1.0
        for _ in range(n - 1):
            nxt = np.zeros(space.n)
            for y in range(space.n):
                nxt[y] = mass[endo[y]] * R.kernel[endo[y], y]
            mass = nxt
        return float(mass.sum())
    # circle: enumerate the backward branch tree with exact angles
    incompatible = 0.0
    stack = [(Fraction(x) % 1, 1.0, 0)]
    while stack:
        t, w, depth = stack.pop()
        if depth == n - 1:
            continue
        for u, p in R.transition_weights(t):
            if (2 * u) % 1 != t:
                incompatible += w * p
            else:
                stack.append((u, w * p, depth + 1))
    return 1.0 - incompatible


def ensemble_compatibility_violations(ensemble) -> int:
    """Number of sampled transitions violating the solenoid invariant."""
    bad = 0
    if isinstance(ensemble.space, FiniteSpace):
        if ensemble.space.endo is None:
            from .errors import NoEndomorphismError

            raise NoEndomorphismError("compatibility is defined relative to an endomorphism")
        endo = np.asarray(ensemble.space.endo)
        samples = ensemble.samples
        bad = int(np.count_nonzero(endo[samples[:, 1:]] != samples[:, :-1]))
    else:
        for path in ensemble.samples:
            for i in range(len(path) - 1):
                if (2 * path[i + 1]) % 1 != path[i] % 1:
                    bad += 1
    return bad


def shift_invariance_residual(mu: Measure, R: TransferOperator, words) -> float:
    """Max over the battery of |int f o sigma dSigma - int f dSigma|.

    Vanishes iff mu o R = mu (given the pull-out axiom).
    """
    res = 0.0
    for f in words:
        f = as_word(f)
        ef = conditional_expectation(R, f)
        res = max(res, abs(integrate(mu, R.apply(ef)) - integrate(mu, ef)))
    return res


# ---------------------------------------------------------------------------
# the lift on cylinder words and the covariance relations


def word_compose_rhat(f: CylinderFunctional) -> CylinderFunctional:
    """f o rhat on the cylinder algebra.

    (phi_1 o pi_1)...(phi_n o pi_n) o rhat
        = ((phi_1 o r) phi_2 o pi_1)(phi_3 o pi_2)...(phi_n o pi_{n-1}).
    """
    head = compose_with_endo(f.word[0])
    if f.depth == 1:
        return CylinderFunctional((head,))
    return CylinderFunctional((head * f.word[1],) + f.word[2:])


def conditional_two(R: TransferOperator, f, x1, x2):
    """E_{x1,x2}(f): expectation conditioned on the first two coordinates."""
    f = as_word(f)
    out = f.word[0](x1)
    if f.depth >= 2:
        tail = Observable.constant(f.space, 1.0)
        if f.depth > 2:
            tail = R.apply(conditional_expectation(R, CylinderFunctional(f.word[2:])))
        out = out * (f.word[1] * tail)(x2)
    return out


def lift_conditional_residual(R: TransferOperator, words, points) -> float:
    """Max residual of E_x(f o rhat) = E_{r(x), x}(f) over words and points x."""
    space = R.space
    res = 0.0
    for f in words:
        f = as_word(f)
        lifted = conditional_expectation(R, word_compose_rhat(f))
        for x in points:
            rx = space.apply_endo(x) if isinstance(space, FiniteSpace) else CircleSpace.forward(x)
            res = max(res, abs(lifted(x) - conditional_two(R, f, rx, x)))
    return res


def covariance_check(
    R: TransferOperator,
    mu: Measure,
    basis,
    words,
    m: Observable | None = None,
) -> dict:
    """Residuals of the covariance relations for U f = f o rhat on cylinder words.

    Reported: V1* U V1 phi = phi o r over `basis`; U* M_F U = M_{F o sigma}
    over pairs from `words`; and norm preservation of U (with optional filter
    weight m) under the stationary mu.
    """
    res_v1 = 0.0
    for phi in basis:
        lifted = conditional_expectation(R, word_compose_rhat(CylinderFunctional((phi,))))
        res_v1 = max(res_v1, (lifted - compose_with_endo(phi)).coeff_norm())

    res_mf = 0.0
    for F in words:
        F = as_word(F)
        for f in words:
            f = as_word(f)
            lhs = (F * word_compose_rhat(f)).shifted()  # (F (f o rhat)) o sigma
            rhs = F.shifted() * f
            diff = conditional_expectation(R, lhs) - conditional_expectation(R, rhs)
            res_mf = max(res_mf, diff.coeff_norm())

    res_norm = 0.0
    for f in words:
        f = as_word(f)
        uf = word_compose_rhat(f)
        if m is not None:
            uf = CylinderFunctional((m * uf.word[0],) + uf.word[1:])
        n_uf = sigma_expectation(mu, R, uf * uf.conj())
        n_f = sigma_expectation(mu, R, f * f.conj())
        res_norm = max(res_norm, abs(n_uf - n_f))

    return {"v1_covariance": res_v1, "multiplication_covariance": res_mf, "norm_preservation": res_norm}


# ---------------------------------------------------------------------------
# the group case: Haar measure on the circle solenoid


def rotate_observable(phi: Observable, t: Fraction) -> Observable:
    """phi(. * e^{2 pi i t}): multiply coefficient n by e^{2 pi i n t}."""
    return Observable.from_fourier(
        phi.space,
        {n: c * cmath.exp(2j * cmath.pi * n * float(t)) for n, c in phi.fourier.items()},
    )


def translate_word(f: CylinderFunctional, translate: SolenoidWord) -> CylinderFunctional:
    if translate.depth < f.depth:
        raise ValueError("translate word must be at least as deep as the functional")
    return CylinderFunctional(
        tuple(rotate_observable(phi, t) for phi, t in zip(f.word, translate.entries))
    )


def group_translation_invariance(
    R: TransferOperator, mu: Measure, f, translate: SolenoidWord
) -> float:
    """Residual of Haar invariance of Sigma under a solenoid translation.

    Uses the conditional identity E(f(. y) | pi_1 = x) = E(f | pi_1 = x y_1)
    in coefficient arithmetic, plus the resulting global invariance
    |E(f(. y)) - E(f)|.  Requires the uniform weight W = 1/2 and mu = Haar.
    """
    if not isinstance(R, CircleRuelleOperator):
        raise CarrierMismatchError("the group case lives on the circle carrier")
    if set(R.weight) != {0} or abs(R.weight.get(0, 0) - 0.5) > 1e-12:
        raise NormalizationError("group translation invariance requires uniform weight W = 1/2")
    if not mu.haar:
        raise NormalizationError("the group case uses the Haar measure")
    f = as_word(f)
    translated = translate_word(f, translate)
    lhs = conditional_expectation(R, translated)
    rhs = rotate_observable(conditional_expectation(R, f), translate.entries[0])
    res = (lhs - rhs).coeff_norm()
    res = max(res, abs(integrate(mu, lhs) - integrate(mu, conditional_expectation(R, f))))
    return float(res)


def random_solenoid_translate(
    space: CircleSpace, depth: int, seed: int, max_denominator: int = 12
) -> SolenoidWord:
    """A random rational solenoid word: pick t_1 = p/q, then backward branches."""
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, max_denominator + 1))
    t = Fraction(int(rng.integers(0, q)), q)
    entries = [t % 1]
    for _ in range(depth - 1):
        b = int(rng.integers(0, 2))
        t = (entries[-1] + b) / 2
        entries.append(t % 1)
    return SolenoidWord(space, tuple(entries))


# ---------------------------------------------------------------------------
# Smale-Williams attractor (float-precision demo)


@dataclass(frozen=True)
class SmaleWilliamsState:
    """Point of the solid torus: angle t in [0, 1), disk coordinate |z| <= 1."""

    t: float
    z: complex

    def __post_init__(self):
        if abs(self.z) > 1 + 1e-12:
            raise ValueError("initial point must lie in the solid torus (|z| <= 1)")


def smale_williams_map(s: SmaleWilliamsState) -> SmaleWilliamsState:
    """r(t, z) = (2t mod 1, z/4 + e^{2 pi i t}/2); image radius <= 3/4."""
    return SmaleWilliamsState(
        (2 * s.t) % 1.0, s.z / 4 + cmath.exp(2j * cmath.pi * s.t) / 2
    )


def smale_williams_orbit(initial: SmaleWilliamsState, steps: int) -> np.ndarray:
    """Forward orbit; rows (t, Re z, Im z) for external plotting."""
    rows = np.empty((steps + 1, 3))
    s = initial
    rows[0] = (s.t, s.z.real, s.z.imag)
    for i in range(1, steps + 1):
        s = smale_williams_map(s)
        rows[i] = (s.t, s.z.real, s.z.imag)
    return rows
