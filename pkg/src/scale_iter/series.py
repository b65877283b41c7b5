"""Truncated one-variable power series with exact or float coefficients.

Series live in the quotient ring C[z]/(z^(D+1)) for a fixed truncation D.
Exact mode stores coefficients as pairs of Fractions (real, imaginary) so
golden computations are reproducible bit for bit; float mode stores complex
doubles.  Two disk norms are provided: the L2 norm over the disk of radius
t, and the coefficient majorant sum |c_k| t^k which dominates the true sup
on the disk.  The Lie exponential of a derivation g d/dz with valuation(g)
at least 2 terminates exactly at the truncation, which is what makes the
normal-form eliminations below golden-testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

__all__ = [
    "TruncatedPowerSeries",
    "Derivation",
    "ModeMismatchError",
    "DivisionValuationError",
    "GeneratorValuationError",
    "ps_add",
    "ps_mul",
    "ps_scale",
    "ps_derive",
    "ps_antiderive",
    "ps_divide_monomial",
    "ps_lie_exp",
    "ps_norm",
    "linearization_action",
    "series_to_json",
    "series_from_json",
]


class ModeMismatchError(ValueError):
    """Operands carry different scalar modes or truncations."""


class DivisionValuationError(ValueError):
    """Monomial division requested below the valuation of the series."""


class GeneratorValuationError(ValueError):
    """Lie exponential requested for a generator of valuation <= 1."""


ExactCoeff = tuple[Fraction, Fraction]
Coeff = Union[ExactCoeff, complex]

_F0 = Fraction(0)
_EXACT_ZERO: ExactCoeff = (_F0, _F0)


def _to_exact(value) -> ExactCoeff:
    if isinstance(value, tuple):
        return (Fraction(value[0]), Fraction(value[1]))
    if isinstance(value, complex):
        return (Fraction(value.real), Fraction(value.imag))
    return (Fraction(value), _F0)


def _c_is_zero(c: Coeff, mode: str) -> bool:
    if mode == "exact":
        return c[0] == 0 and c[1] == 0
    return c == 0


def _c_add(a: Coeff, b: Coeff, mode: str) -> Coeff:
    if mode == "exact":
        return (a[0] + b[0], a[1] + b[1])
    return a + b


def _c_mul(a: Coeff, b: Coeff, mode: str) -> Coeff:
    if mode == "exact":
        ar, ai = a
        br, bi = b
        if ai == 0 and bi == 0:
            return (ar * br, _F0)
        return (ar * br - ai * bi, ar * bi + ai * br)
    return a * b


def _c_scale(a: Coeff, q: Fraction, mode: str) -> Coeff:
    if mode == "exact":
        return (a[0] * q, a[1] * q)
    return a * (q.numerator / q.denominator)


def _c_abs(a: Coeff, mode: str) -> float:
    if mode == "exact":
        return math.hypot(float(a[0]), float(a[1]))
    return abs(a)


def _c_neg(a: Coeff, mode: str) -> Coeff:
    if mode == "exact":
        return (-a[0], -a[1])
    return -a


@dataclass(frozen=True)
class TruncatedPowerSeries:
    """Degree-capped series; coefficients has length truncation + 1."""

    truncation: int
    mode: str
    coefficients: tuple

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "float"):
            raise ModeMismatchError(f"unknown mode {self.mode!r}")
        if len(self.coefficients) != self.truncation + 1:
            raise ValueError("coefficient vector does not match truncation")

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, truncation: int, mode: str = "exact") -> "TruncatedPowerSeries":
        z: Coeff = _EXACT_ZERO if mode == "exact" else 0j
        return cls(truncation, mode, tuple(z for _ in range(truncation + 1)))

    @classmethod
    def from_dict(
        cls, entries: Mapping[int, object], truncation: int, mode: str = "exact"
    ) -> "TruncatedPowerSeries":
        coeffs: list[Coeff] = list(cls.zero(truncation, mode).coefficients)
        for deg, val in entries.items():
            if not 0 <= deg <= truncation:
                raise ValueError(f"degree {deg} outside truncation {truncation}")
            coeffs[deg] = _to_exact(val) if mode == "exact" else complex(val)  # type: ignore[arg-type]
        return cls(truncation, mode, tuple(coeffs))

    @classmethod
    def monomial(cls, degree: int, coefficient, truncation: int, mode: str = "exact"):
        return cls.from_dict({degree: coefficient}, truncation, mode)

    # ---- basic queries -------------------------------------------------

    @property
    def valuation(self) -> int:
        """Least degree with a nonzero coefficient; truncation + 1 for zero."""
        for k, c in enumerate(self.coefficients):
            if not _c_is_zero(c, self.mode):
                return k
        return self.truncation + 1

    def coefficient(self, k: int) -> Coeff:
        if not 0 <= k <= self.truncation:
            raise ValueError(f"degree {k} outside truncation {self.truncation}")
        return self.coefficients[k]

    def real_coefficient(self, k: int) -> Fraction:
        """Real part of an exact coefficient, as a Fraction."""
        if self.mode != "exact":
            raise ModeMismatchError("real_coefficient requires exact mode")
        return self.coefficients[k][0]

    def is_zero(self) -> bool:
        return all(_c_is_zero(c, self.mode) for c in self.coefficients)

    def to_float(self) -> "TruncatedPowerSeries":
        if self.mode == "float":
            return self
        return TruncatedPowerSeries(
            self.truncation,
            "float",
            tuple(complex(float(c[0]), float(c[1])) for c in self.coefficients),
        )

    def retruncate(self, truncation: int) -> "TruncatedPowerSeries":
        if truncation >= self.truncation:
            pad = TruncatedPowerSeries.zero(truncation, self.mode).coefficients[
                : truncation - self.truncation
            ]
            return TruncatedPowerSeries(truncation, self.mode, self.coefficients + pad)
        return TruncatedPowerSeries(truncation, self.mode, self.coefficients[: truncation + 1])

    def eval_at(self, z: complex) -> complex:
        """Horner evaluation after float conversion."""
        acc = 0j
        for c in reversed(self.to_float().coefficients):
            acc = acc * z + c
        return acc

    # ---- operators -----------------------------------------------------

    def __add__(self, other):
        return ps_add(self, other)

    def __sub__(self, other):
        return ps_add(self, other.__neg__())

    def __neg__(self):
        return TruncatedPowerSeries(
            self.truncation, self.mode, tuple(_c_neg(c, self.mode) for c in self.coefficients)
        )

    def __mul__(self, other):
        return ps_mul(self, other)


def _check_compatible(f: TruncatedPowerSeries, g: TruncatedPowerSeries) -> None:
    if f.mode != g.mode:
        raise ModeMismatchError(f"mode mismatch: {f.mode} vs {g.mode}")
    if f.truncation != g.truncation:
        raise ModeMismatchError(f"truncation mismatch: {f.truncation} vs {g.truncation}")


def ps_add(f: TruncatedPowerSeries, g: TruncatedPowerSeries) -> TruncatedPowerSeries:
    _check_compatible(f, g)
    return TruncatedPowerSeries(
        f.truncation,
        f.mode,
        tuple(_c_add(a, b, f.mode) for a, b in zip(f.coefficients, g.coefficients)),
    )


def ps_mul(f: TruncatedPowerSeries, g: TruncatedPowerSeries) -> TruncatedPowerSeries:
    """Cauchy product truncated at the common degree cap."""
    _check_compatible(f, g)
    D, mode = f.truncation, f.mode
    out: list[Coeff] = list(TruncatedPowerSeries.zero(D, mode).coefficients)
    for i, a in enumerate(f.coefficients):
        if _c_is_zero(a, mode):
            continue
        for j in range(0, D - i + 1):
            b = g.coefficients[j]
            if _c_is_zero(b, mode):
                continue
            out[i + j] = _c_add(out[i + j], _c_mul(a, b, mode), mode)
    return TruncatedPowerSeries(D, mode, tuple(out))


def ps_scale(f: TruncatedPowerSeries, q) -> TruncatedPowerSeries:
    q = Fraction(q)
    return TruncatedPowerSeries(
        f.truncation, f.mode, tuple(_c_scale(c, q, f.mode) for c in f.coefficients)
    )


def ps_derive(f: TruncatedPowerSeries) -> TruncatedPowerSeries:
    """Formal derivative; the top degree of the output is zero."""
    D, mode = f.truncation, f.mode
    out = list(TruncatedPowerSeries.zero(D, mode).coefficients)
    for k in range(1, D + 1):
        out[k - 1] = _c_scale(f.coefficients[k], Fraction(k), mode)
    return TruncatedPowerSeries(D, mode, tuple(out))


def ps_antiderive(f: TruncatedPowerSeries) -> tuple[TruncatedPowerSeries, bool]:
    """Indefinite integral with zero constant term.

    The degree-D input coefficient would land at degree D+1; it is dropped
    and the returned flag says whether anything nonzero was lost.
    """
    D, mode = f.truncation, f.mode
    out = list(TruncatedPowerSeries.zero(D, mode).coefficients)
    for k in range(0, D):
        out[k + 1] = _c_scale(f.coefficients[k], Fraction(1, k + 1), mode)
    dropped = not _c_is_zero(f.coefficients[D], mode)
    return TruncatedPowerSeries(D, mode, tuple(out)), dropped


def ps_divide_monomial(f: TruncatedPowerSeries, k: int) -> TruncatedPowerSeries:
    """Divide by z^k; valid only when valuation(f) >= k.

    The failure case is the division flavor of loss of regularity, so it is
    reported as its own error type.
    """
    if k < 0:
        raise ValueError("monomial power must be >= 0")
    if f.valuation < k:
        raise DivisionValuationError(
            f"valuation {f.valuation} is below the requested power {k}"
        )
    D, mode = f.truncation, f.mode
    zeros = TruncatedPowerSeries.zero(D, mode).coefficients
    return TruncatedPowerSeries(D, mode, f.coefficients[k:] + zeros[:k])


@dataclass(frozen=True)
class Derivation:
    """Vector field g(z) d/dz acting on the truncated ring."""

    generator: TruncatedPowerSeries

    def apply(self, f: TruncatedPowerSeries) -> TruncatedPowerSeries:
        return ps_mul(self.generator, ps_derive(f))


def ps_lie_exp(v: Derivation, f: TruncatedPowerSeries) -> TruncatedPowerSeries:
    """Exact Lie exponential sum f + v(f) + v^2(f)/2! + ...

    Requires valuation(generator) >= 2: each application then raises the
    valuation by at least one, so the sum terminates at the truncation and
    the result is independent of any order cutoff.
    """
    g = v.generator
    _check_compatible(g, f)
    if not g.is_zero() and g.valuation < 2:
        raise GeneratorValuationError(
            f"generator valuation {g.valuation} < 2; the exponential would not terminate"
        )
    acc = f
    term = f
    j = 1
    while True:
        term = ps_scale(v.apply(term), Fraction(1, j))
        if term.is_zero():
            break
        acc = ps_add(acc, term)
        j += 1
    return acc


def linearization_action(
    eps: TruncatedPowerSeries, xi: TruncatedPowerSeries
) -> TruncatedPowerSeries:
    """Derivative of x -> x * integral(x) at eps, applied to xi.

    Acts as xi -> eps * integral(xi) + xi * integral(eps); at eps = 1 it
    sends z^k to (k+2)/(k+1) z^(k+1), which is triangular on monomials.
    """
    _check_compatible(eps, xi)
    int_xi, _ = ps_antiderive(xi)
    int_eps, _ = ps_antiderive(eps)
    return ps_add(ps_mul(eps, int_xi), ps_mul(xi, int_eps))


def ps_norm(f: TruncatedPowerSeries, t: float, mode: str = "sup-bound") -> float:
    """Disk norms at radius t.

    'sup-bound' is the coefficient majorant sum |c_k| t^k, an upper bound for
    the sup over the closed disk.  'l2-disk' is the L2 norm over the disk,
    sqrt(sum |c_k|^2 pi t^(2k+2) / (k+1)) by orthogonality of monomials.
    """
    if t <= 0.0:
        raise ValueError("radius must be positive")
    mags = [_c_abs(c, f.mode) for c in f.coefficients]
    if mode == "sup-bound":
        return math.fsum(m * t**k for k, m in enumerate(mags))
    if mode == "l2-disk":
        total = math.fsum(m * m * math.pi * t ** (2 * k + 2) / (k + 1) for k, m in enumerate(mags))
        return math.sqrt(total)
    raise ValueError(f"unknown norm mode {mode!r}")


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def _frac_str(q: Fraction) -> str:
    return str(q)


def series_to_json(f: TruncatedPowerSeries) -> dict:
    if f.mode == "exact":
        coeffs = [[_frac_str(c[0]), _frac_str(c[1])] for c in f.coefficients]
    else:
        coeffs = [[c.real, c.imag] for c in f.coefficients]
    return {
        "schema": "series.v1",
        "truncation": f.truncation,
        "mode": f.mode,
        "coefficients": coeffs,
    }


def series_from_json(doc: dict) -> TruncatedPowerSeries:
    if doc.get("schema") != "series.v1":
        raise ValueError("not a series.v1 document")
    D = int(doc["truncation"])
    mode = doc["mode"]
    raw = doc["coefficients"]
    if len(raw) != D + 1:
        raise ValueError("coefficient count does not match truncation")
    if mode == "exact":
        coeffs = tuple((Fraction(re), Fraction(im)) for re, im in raw)
    elif mode == "float":
        coeffs = tuple(complex(float(re), float(im)) for re, im in raw)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TruncatedPowerSeries(D, mode, coeffs)
