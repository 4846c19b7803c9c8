"""Radial profiles on a cone: finite sums of c * r**p * log(r)**q.

Separable harmonic fields have radial factors of exactly this shape (pure
powers for the generic indicial roots, a single log factor at the repeated
root), and products/derivatives of such sums stay in the class with q <= 2.
Definite integrals of pure-power terms are evaluated in closed form; terms
carrying a log factor are integrated with adaptive Simpson quadrature at
absolute tolerance 1e-12, so quadrature noise never enters the pure-power
path used by the monotonicity checks.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Tuple

import numpy as np

_COEF_TOL = 0.0  # exact zero test; cancellation is left to the caller's tolerance
_SIMPSON_TOL = 1e-12
_SIMPSON_MAX_DEPTH = 60

# one term: (coef, power, logpow)
Term = Tuple[float, float, int]


class RadialPoly:
    """Immutable sum of terms c * r**p * log(r)**q, q in {0, 1, 2, 3, 4}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Sequence] = ()):
        merged: dict = {}
        for coef, power, logpow in terms:
            if coef == 0.0:
                continue
            key = (float(power), int(logpow))
            merged[key] = merged.get(key, 0.0) + float(coef)
        self.terms = tuple(
            (c, p, q) for (p, q), c in sorted(merged.items()) if c != _COEF_TOL
        )

    @staticmethod
    def zero() -> "RadialPoly":
        return RadialPoly()

    @staticmethod
    def power(coef: float, exponent: float, logpow: int = 0) -> "RadialPoly":
        return RadialPoly([(coef, exponent, logpow)])

    def is_zero(self) -> bool:
        return not self.terms

    def has_log(self) -> bool:
        return any(q > 0 for _, _, q in self.terms)

    def __add__(self, other: "RadialPoly") -> "RadialPoly":
        return RadialPoly(list(self.terms) + list(other.terms))

    def __sub__(self, other: "RadialPoly") -> "RadialPoly":
        return self + other.scale(-1.0)

    def scale(self, a: float) -> "RadialPoly":
        return RadialPoly([(a * c, p, q) for c, p, q in self.terms])

    def __mul__(self, other: "RadialPoly") -> "RadialPoly":
        out = []
        for c1, p1, q1 in self.terms:
            for c2, p2, q2 in other.terms:
                out.append((c1 * c2, p1 + p2, q1 + q2))
        return RadialPoly(out)

    def shift_power(self, dp: float) -> "RadialPoly":
        """Multiply by r**dp."""
        return RadialPoly([(c, p + dp, q) for c, p, q in self.terms])

    def deriv(self) -> "RadialPoly":
        out = []
        for c, p, q in self.terms:
            if p != 0.0:
                out.append((c * p, p - 1.0, q))
            if q > 0:
                out.append((c * q, p - 1.0, q - 1))
        return RadialPoly(out)

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        if not self.terms:
            return out
        logr = None
        for c, p, q in self.terms:
            term = c * r**p
            if q:
                if logr is None:
                    logr = np.log(r)
                term = term * logr**q
            out = out + term
        return out

    def integrate(self, a: float, b: float) -> float:
        """Definite integral over [a, b]; a = 0 allowed for integrable powers."""
        if a < 0 or b < a:
            raise ValueError("integration interval must satisfy 0 <= a <= b")
        total = 0.0
        log_terms = []
        for c, p, q in self.terms:
            if q == 0:
                total += _power_integral(c, p, a, b)
            else:
                log_terms.append((c, p, q))
        if log_terms:
            total += _integrate_log_terms(log_terms, a, b)
        return total

    def degree_range(self) -> Tuple[float, float]:
        powers = [p for _, p, _ in self.terms]
        return (min(powers), max(powers))

    def single_power(self) -> float | None:
        """Exponent if this is a single pure-power term, else None."""
        if len(self.terms) == 1 and self.terms[0][2] == 0:
            return self.terms[0][1]
        return None

    def __repr__(self) -> str:
        if not self.terms:
            return "RadialPoly(0)"
        bits = []
        for c, p, q in self.terms:
            s = f"{c:g}*r^{p:g}"
            if q:
                s += f"*log(r)^{q}" if q > 1 else "*log(r)"
            bits.append(s)
        return "RadialPoly(" + " + ".join(bits) + ")"


def _power_integral(c: float, p: float, a: float, b: float) -> float:
    if p == -1.0:
        if a == 0.0:
            raise ValueError("integral of r^-1 diverges at 0")
        return c * math.log(b / a)
    e = p + 1.0
    if a == 0.0:
        if e <= 0.0:
            raise ValueError(f"integral of r^{p} diverges at 0")
        return c * b**e / e
    return c * (b**e - a**e) / e


def _integrate_log_terms(terms, a: float, b: float) -> float:
    def f(r):
        lr = np.log(r)
        return sum(c * r**p * lr**q for c, p, q in terms)

    if a == 0.0:
        # r^p log^q r is integrable at 0 only for p > -1; ladder down dyadically
        for c, p, q in terms:
            if p <= -1.0:
                raise ValueError(f"integral of r^{p} log^{q} diverges at 0")
        total = 0.0
        hi = b
        while hi > 1e-280:
            lo = hi / 2.0**8
            piece = _adaptive_simpson(f, lo, hi)
            total += piece
            if abs(piece) < 1e-17 * (1.0 + abs(total)):
                break
            hi = lo
        return total
    return _adaptive_simpson(f, a, b)


def _adaptive_simpson(f, a: float, b: float) -> float:
    fa, fm, fb = (float(f(np.asarray(x))) for x in (a, 0.5 * (a + b), b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, _SIMPSON_TOL, _SIMPSON_MAX_DEPTH)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = float(f(np.asarray(lm)))
    frm = float(f(np.asarray(rm)))
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1
    )
