"""Harmonic-capped trigonometric data on the circle.

One-forms a(theta) dtheta and vector fields f(theta) d/dtheta are stored as
complex coefficient arrays over harmonics k = -K..K.  The Lie derivative of
a one-form along a field is (a f)' dtheta, products are convolutions
truncated back to the cap, and the homological equation f' = -beta is
solved harmonic by harmonic with the mean as the obstruction.

The strip L2 norm weights harmonic k by sinh(2|k|t)/|k| (2t at k = 0);
sinh switches to a log-domain evaluation once 2|k|t is large, so tail
estimates stay finite for any cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourierOneForm",
    "CircleVectorField",
    "MeanObstructionError",
    "SupportError",
    "lie_derivative_oneform",
    "solve_homological",
    "lie_exp_terms",
    "oneform_lie_exp",
    "strip_l2_norm",
    "strip_l2_log_norm",
    "tail_decay_check",
    "cos_coefficient",
    "oneform_to_json",
    "oneform_from_json",
    "norm_table_rows",
]


class MeanObstructionError(ValueError):
    """The constant harmonic cannot be removed by a homological solve."""


class SupportError(ValueError):
    """A tail estimate was requested for data with low-harmonic support."""


def _log_sinh(x: float) -> float:
    """log(sinh x) for x > 0, overflow-safe."""
    if x <= 0.0:
        raise ValueError("argument must be positive")
    if x > 30.0:
        return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


@dataclass(frozen=True)
class _TrigData:
    """Shared coefficient-array representation; index k lives at k + cap."""

    cap: int
    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=complex)
        if arr.shape != (2 * self.cap + 1,):
            raise ValueError(f"need {2 * self.cap + 1} coefficients for cap {self.cap}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.cap:
            return 0j
        return complex(self.data[k + self.cap])

    @property
    def is_real(self) -> bool:
        """Conjugate symmetry c_(-k) = conj(c_k) up to roundoff."""
        scale = float(np.max(np.abs(self.data))) or 1.0
        return bool(np.allclose(self.data[::-1].conj(), self.data, atol=1e-12 * scale, rtol=0.0))

    @classmethod
    def zero(cls, cap: int):
        return cls(cap, np.zeros(2 * cap + 1, dtype=complex))

    @classmethod
    def from_coefficients(cls, entries: dict[int, complex], cap: int):
        arr = np.zeros(2 * cap + 1, dtype=complex)
        for k, v in entries.items():
            if abs(k) > cap:
                raise ValueError(f"harmonic {k} outside cap {cap}")
            arr[k + cap] = v
        return cls(cap, arr)

    @classmethod
    def from_cos(cls, terms: dict[int, float], cap: int):
        """Real combination sum amp * cos(k theta); k = 0 maps to the mean."""
        arr = np.zeros(2 * cap + 1, dtype=complex)
        for k, amp in terms.items():
            if k == 0:
                arr[cap] += amp
            else:
                arr[cap + k] += amp / 2.0
                arr[cap - k] += amp / 2.0
        return cls(cap, arr)


class FourierOneForm(_TrigData):
    """(sum c_k e^(ik theta)) dtheta with |k| <= cap."""


class CircleVectorField(_TrigData):
    """f(theta) d/dtheta with the same harmonic representation."""


def _convolve_truncate(a: np.ndarray, b: np.ndarray, cap: int) -> np.ndarray:
    full = np.convolve(a, b)
    mid = len(full) // 2
    return full[mid - cap : mid + cap + 1]


def _derivative(data: np.ndarray, cap: int) -> np.ndarray:
    k = np.arange(-cap, cap + 1)
    return data * (1j * k)


def cos_coefficient(w: _TrigData, k: int) -> float:
    """Coefficient of cos(k theta) in real data: 2 Re c_k for k >= 1, c_0 at k = 0."""
    if k == 0:
        return float(w.coefficient(0).real)
    return 2.0 * float(w.coefficient(k).real)


def lie_derivative_oneform(v: CircleVectorField, w: FourierOneForm) -> FourierOneForm:
    """L_v (a dtheta) = (a f' + a' f) dtheta = (a f)' dtheta.

    Evaluated as the derivative of the truncated product, which equals the
    product-rule form exactly within the cap.
    """
    if v.cap != w.cap:
        raise ValueError("harmonic caps must match")
    product = _convolve_truncate(w.data, v.data, w.cap)
    return FourierOneForm(w.cap, _derivative(product, w.cap))


def solve_homological(
    beta: FourierOneForm, cutoff: int, mean_tol: float = 1e-12
) -> CircleVectorField:
    """Field v with L_v dtheta + P_cutoff beta = 0, i.e. f_k = -beta_k / (ik).

    Only harmonics 1 <= |k| <= cutoff are used.  A nonzero mean is a genuine
    obstruction: the constant harmonic has no primitive on the circle.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    scale = float(np.max(np.abs(beta.data))) or 1.0
    if abs(beta.coefficient(0)) > mean_tol * scale:
        raise MeanObstructionError(
            f"mean coefficient {beta.coefficient(0)!r} cannot be eliminated"
        )
    arr = np.zeros(2 * beta.cap + 1, dtype=complex)
    for k in range(1, min(cutoff, beta.cap) + 1):
        arr[beta.cap + k] = -beta.coefficient(k) / (1j * k)
        arr[beta.cap - k] = -beta.coefficient(-k) / (1j * -k)
    return CircleVectorField(beta.cap, arr)


def lie_exp_terms(v: CircleVectorField, w: FourierOneForm, order: int) -> list[FourierOneForm]:
    """Terms L_v^j(w)/j! for j = 0..order, truncated at the cap each step."""
    if order < 0:
        raise ValueError("order must be >= 0")
    terms = [w]
    current = w
    for j in range(1, order + 1):
        current = lie_derivative_oneform(v, current)
        current = FourierOneForm(current.cap, current.data / j)
        terms.append(current)
    return terms


def oneform_lie_exp(
    v: CircleVectorField, w: FourierOneForm, order: int | None = None
) -> FourierOneForm:
    """Partial sum of e^(L_v) w through the given order.

    The default order equals the harmonic cap, enough for coefficient
    agreement to the bookkeeping degree; the remainder of the operator
    series is controlled by the last term, which callers can inspect via
    lie_exp_terms.
    """
    if order is None:
        order = w.cap
    if order < 1:
        raise ValueError("order must be >= 1")
    terms = lie_exp_terms(v, w, order)
    total = np.zeros(2 * w.cap + 1, dtype=complex)
    for term in terms:
        total = total + term.data
    return FourierOneForm(w.cap, total)


# ---------------------------------------------------------------------------
# Strip norms and the tail estimate
# ---------------------------------------------------------------------------


def _log_weight(k: int, t: float) -> float:
    if k == 0:
        return math.log(2.0 * t)
    return _log_sinh(2.0 * abs(k) * t) - math.log(abs(k))


def strip_l2_log_norm(w: FourierOneForm, t: float) -> float:
    """log of the strip L2 norm; -inf for zero data."""
    if t <= 0.0:
        raise ValueError("strip half-width must be positive")
    logs = []
    for k in range(-w.cap, w.cap + 1):
        c = abs(w.coefficient(k))
        if c == 0.0:
            continue
        logs.append(2.0 * math.log(c) + _log_weight(k, t))
    if not logs:
        return -math.inf
    hi = max(logs)
    return 0.5 * (hi + math.log(math.fsum(math.exp(l - hi) for l in logs)))


def strip_l2_norm(w: FourierOneForm, t: float) -> float:
    log_n = strip_l2_log_norm(w, t)
    if log_n == -math.inf:
        return 0.0
    return math.exp(log_n) if log_n < 709.0 else math.inf


@dataclass(frozen=True)
class TailDecayReport:
    ratio: float
    bound: float
    ok: bool
    sinh_ratio_monotone: bool


def tail_decay_check(w: FourierOneForm, n: int, s: float, t: float) -> TailDecayReport:
    """Norm ratio between strips for data supported on harmonics |k| >= 2^n.

    Checks ratio = |w|_s / |w|_t <= exp(2^(n-1) (s - t)) and, along the way,
    that k -> sinh(2ks)/sinh(2kt) is decreasing over the support range.
    """
    if not (0.0 < s < t):
        raise ValueError("need 0 < s < t")
    min_support = 2**n
    for k in range(-w.cap, w.cap + 1):
        if abs(k) < min_support and w.coefficient(k) != 0:
            raise SupportError(f"harmonic {k} below the required support 2^{n}")
    log_ratio = strip_l2_log_norm(w, s) - strip_l2_log_norm(w, t)
    log_bound = math.ldexp(s - t, n - 1)
    prev = math.inf
    monotone = True
    for k in range(max(min_support, 1), w.cap + 1):
        r = _log_sinh(2.0 * k * s) - _log_sinh(2.0 * k * t)
        if r >= prev:
            monotone = False
        prev = r
    ratio = math.exp(log_ratio)
    return TailDecayReport(ratio, math.exp(log_bound), log_ratio <= log_bound, monotone)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def oneform_to_json(w: FourierOneForm) -> dict:
    return {
        "schema": "oneform.v1",
        "cap": w.cap,
        "coefficients": [[float(c.real), float(c.imag)] for c in w.data],
    }


def oneform_from_json(doc: dict) -> FourierOneForm:
    if doc.get("schema") != "oneform.v1":
        raise ValueError("not a oneform.v1 document")
    cap = int(doc["cap"])
    arr = np.array([complex(re, im) for re, im in doc["coefficients"]], dtype=complex)
    return FourierOneForm(cap, arr)


def norm_table_rows(w: FourierOneForm, t: float) -> list[list[object]]:
    """CSV rows (k, |c_k|, weight, contribution) for the strip norm at t."""
    rows: list[list[object]] = [["k", "abs_coeff", "log_weight", "log_contribution"]]
    for k in range(-w.cap, w.cap + 1):
        c = abs(w.coefficient(k))
        lw = _log_weight(k, t)
        rows.append([k, c, lw, 2.0 * math.log(c) + lw if c > 0.0 else -math.inf])
    return rows
