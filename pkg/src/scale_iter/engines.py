"""Runnable iterations: normal forms, Newton inversion, and generic drivers.

Each engine produces an IterationReport, a uniform per-step record of radii,
step norms, residuals and monitored bounds.  The generic drivers
(contraction_run, kam_run) treat their contraction or mixed bounds as
assumptions to monitor: violations are flagged in the report rather than
aborting, since probing those hypotheses is the point of running them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Protocol, Sequence

import numpy as np

from .bruno import BrunoSequence, PreconditionError
from .factors import (
    KamFactor,
    PerturbativeFactor,
    RadiusSchedule,
    kam_schedule_tame_check,
    rho_for_perturbative,
    schedule_build,
)
from .fourier import (
    FourierOneForm,
    cos_coefficient,
    lie_exp_terms,
    solve_homological,
    strip_l2_norm,
)
from .series import (
    Derivation,
    TruncatedPowerSeries,
    linearization_action,
    ps_antiderive,
    ps_divide_monomial,
    ps_lie_exp,
    ps_mul,
    ps_norm,
)

__all__ = [
    "ScaledElement",
    "ScalarElement",
    "SeriesElement",
    "OneFormElement",
    "StepRecord",
    "IterationReport",
    "SingularLinearizationError",
    "StepMapError",
    "TamenessError",
    "MorseResult",
    "CircleResult",
    "NewtonResult",
    "DriveResult",
    "morse_run",
    "circle_run",
    "newton_invert",
    "quasi_newton_run",
    "contraction_run",
    "kam_run",
    "eps_integral_map",
    "scalar_contraction_family",
    "scalar_kam_family",
    "report_to_json",
    "report_from_json",
    "report_csv_rows",
]

CAUCHY_TOL = 1e-12
CAUCHY_WINDOW = 4


class SingularLinearizationError(RuntimeError):
    """The triangular solve hit a vanishing diagonal; carries the step index."""

    def __init__(self, step: int):
        super().__init__(f"singular diagonal at step {step}: constant term reached zero")
        self.step = step


class StepMapError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step map failed at step {step}: {cause}")
        self.step = step


class TamenessError(PreconditionError):
    """The schedule tameness precondition failed for a mixed driver."""


# ---------------------------------------------------------------------------
# Scaled elements
# ---------------------------------------------------------------------------


class ScaledElement(Protocol):
    """Payload with a norm at every analyticity radius, monotone in the radius."""

    def norm_at(self, radius: float) -> float: ...

    def sub(self, other: "ScaledElement") -> "ScaledElement": ...


@dataclass(frozen=True)
class ScalarElement:
    value: float

    def norm_at(self, radius: float) -> float:
        return abs(self.value)

    def sub(self, other: "ScalarElement") -> "ScalarElement":
        return ScalarElement(self.value - other.value)


@dataclass(frozen=True)
class SeriesElement:
    series: TruncatedPowerSeries
    norm_mode: str = "sup-bound"

    def norm_at(self, radius: float) -> float:
        return ps_norm(self.series, radius, self.norm_mode)

    def sub(self, other: "SeriesElement") -> "SeriesElement":
        return SeriesElement(self.series - other.series, self.norm_mode)


@dataclass(frozen=True)
class OneFormElement:
    form: FourierOneForm

    def norm_at(self, radius: float) -> float:
        return strip_l2_norm(self.form, radius)

    def sub(self, other: "OneFormElement") -> "OneFormElement":
        return OneFormElement(FourierOneForm(self.form.cap, self.form.data - other.form.data))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    n: int
    s: float
    step_norm: float
    residual: float
    bound: float | None  # None when there is no previous step to bound against
    bound_ok: bool
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class IterationReport:
    engine: str
    steps: tuple[StepRecord, ...]
    verdict: str
    meta: dict = field(default_factory=dict)

    def step_norms(self) -> list[float]:
        return [r.step_norm for r in self.steps]

    def cauchy_partial_sums(self) -> list[float]:
        acc, out = 0.0, []
        for r in self.steps:
            acc += r.step_norm
            out.append(acc)
        return out


def _verdict_from_steps(norms: Sequence[float], tol: float = CAUCHY_TOL) -> str:
    if any(math.isnan(x) or math.isinf(x) for x in norms):
        return "diverged"
    if len(norms) >= CAUCHY_WINDOW and math.fsum(norms[-CAUCHY_WINDOW:]) < tol:
        return "converged"
    return "undecided"


def report_to_json(report: IterationReport) -> dict:
    return {
        "schema": "report.v1",
        "engine": report.engine,
        "verdict": report.verdict,
        "meta": report.meta,
        "steps": [
            {
                "n": r.n,
                "s": r.s,
                "step_norm": r.step_norm,
                "residual": r.residual,
                "bound": r.bound,
                "flag": r.bound_ok,
                "extras": r.extras,
            }
            for r in report.steps
        ],
    }


def report_from_json(doc: dict) -> IterationReport:
    if doc.get("schema") != "report.v1":
        raise ValueError("not a report.v1 document")
    steps = tuple(
        StepRecord(
            int(r["n"]),
            float(r["s"]),
            float(r["step_norm"]),
            float(r["residual"]),
            None if r["bound"] is None else float(r["bound"]),
            bool(r["flag"]),
            dict(r.get("extras", {})),
        )
        for r in doc["steps"]
    )
    return IterationReport(doc["engine"], steps, doc["verdict"], dict(doc.get("meta", {})))


def report_csv_rows(report: IterationReport) -> list[list[object]]:
    """Fixed columns (n, s_n, step_norm, residual, bound, flag) plus sorted extras."""
    extra_keys = sorted({k for r in report.steps for k in r.extras})
    header = ["n", "s_n", "step_norm", "residual", "bound", "flag"] + extra_keys
    rows: list[list[object]] = [header]
    for r in report.steps:
        rows.append(
            [r.n, r.s, r.step_norm, r.residual, "" if r.bound is None else r.bound, r.bound_ok]
            + [r.extras.get(k, "") for k in extra_keys]
        )
    return rows


# ---------------------------------------------------------------------------
# Morse normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MorseResult:
    report: IterationReport
    functions: tuple[TruncatedPowerSeries, ...]
    generators: tuple[TruncatedPowerSeries, ...]


def _morse_remainder(f: TruncatedPowerSeries) -> TruncatedPowerSeries:
    half = Fraction(1, 2)
    quad = TruncatedPowerSeries.monomial(2, half, f.truncation, f.mode)
    return f - quad


def morse_run(
    f0: TruncatedPowerSeries,
    steps: int,
    norm_inner: float = 0.4,
    norm_outer: float = 0.5,
) -> MorseResult:
    """Quadratic normal-form iteration for f = x^2/2 + R, valuation(R) >= 3.

    At step n the first 2^n remainder terms are divided by x, negated, and
    used as the generator of a Lie exponential; the new remainder then has
    valuation at least 2^(n+1) + 2, which is asserted rather than assumed.
    Exact mode is required so the recorded coefficients are reproducible.
    """
    if f0.mode != "exact":
        raise PreconditionError("normal-form runs require exact mode")
    if f0.truncation < 2**steps + 2:
        raise PreconditionError(
            f"truncation {f0.truncation} too small; need at least {2 ** steps + 2}"
        )
    if f0.real_coefficient(2) != Fraction(1, 2) or not _morse_remainder(f0).valuation >= 3:
        raise PreconditionError("input must be x^2/2 plus a remainder of valuation >= 3")

    D = f0.truncation
    functions = [f0]
    generators: list[TruncatedPowerSeries] = []
    records: list[StepRecord] = []
    f = f0
    for n in range(steps):
        remainder = _morse_remainder(f)
        if not remainder.is_zero() and remainder.valuation < 2**n + 2:
            raise RuntimeError(
                f"remainder valuation {remainder.valuation} below 2^{n}+2: elimination bug"
            )
        lead = 2**n + 2
        block = list(TruncatedPowerSeries.zero(D, f.mode).coefficients)
        for d in range(lead, min(lead + 2**n, D + 1)):
            block[d] = remainder.coefficients[d]
        block_series = TruncatedPowerSeries(D, f.mode, tuple(block))
        generator = -ps_divide_monomial(block_series, 1)
        f_next = ps_lie_exp(Derivation(generator), f)

        new_remainder = _morse_remainder(f_next)
        if not new_remainder.is_zero() and new_remainder.valuation < 2 ** (n + 1) + 2:
            raise RuntimeError(
                f"post-step valuation {new_remainder.valuation} below 2^{n + 1}+2"
            )

        diff = f_next - f
        decay = (norm_inner / norm_outer) ** (2**n + 2)
        diff_outer = ps_norm(diff, norm_outer)
        record = StepRecord(
            n=n,
            s=norm_inner,
            step_norm=ps_norm(diff, norm_inner),
            residual=ps_norm(new_remainder, norm_inner),
            bound=decay * diff_outer,
            bound_ok=ps_norm(diff, norm_inner) <= decay * diff_outer * (1.0 + 1e-9),
            extras={"valuation": new_remainder.valuation},
        )
        records.append(record)
        generators.append(generator)
        functions.append(f_next)
        f = f_next

    verdict = _verdict_from_steps([r.step_norm for r in records])
    report = IterationReport(
        "morse",
        tuple(records),
        verdict,
        {"truncation": D, "steps": steps},
    )
    return MorseResult(report, tuple(functions), tuple(generators))


# ---------------------------------------------------------------------------
# Circle normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleResult:
    report: IterationReport
    forms: tuple[FourierOneForm, ...]


def circle_run(
    eps: float,
    steps: int,
    cap: int,
    lie_order: int = 2,
    strip_width: float = 0.5,
) -> CircleResult:
    """Doubling elimination for (1 + eps cos theta) dtheta.

    Step n removes harmonics 1..2^n of the current perturbation through the
    homological solve followed by an order-2 Lie step; suppressed harmonics
    re-appear with higher-order coefficients, which the report records for
    |k| <= 4 together with the strip norm of what remains.
    """
    if not 0.0 <= eps < 1.0:
        raise PreconditionError("eps must sit in [0, 1)")
    if cap < 2 ** (steps + 1):
        raise PreconditionError(f"cap {cap} too small; need at least 2^(steps+1)")

    alpha = FourierOneForm.from_cos({0: 1.0, 1: eps}, cap)
    forms = [alpha]
    records: list[StepRecord] = []
    prev_norm: float | None = None
    for n in range(steps):
        pert = FourierOneForm.from_coefficients(
            {k: alpha.coefficient(k) for k in range(-cap, cap + 1) if k != 0},
            cap,
        )
        cutoff = 2**n
        target = FourierOneForm.from_coefficients(
            {k: pert.coefficient(k) for k in range(-cutoff, cutoff + 1) if k != 0},
            cap,
        )
        mean_drift = abs(alpha.coefficient(0) - 1.0)
        if target.data.any():
            v = solve_homological(target, cutoff)
            terms = lie_exp_terms(v, alpha, lie_order)
            total = np.zeros(2 * cap + 1, dtype=complex)
            for term in terms:
                total = total + term.data
            alpha_next = FourierOneForm(cap, total)
            last_term_norm = strip_l2_norm(terms[-1], strip_width)
        else:
            alpha_next = alpha
            last_term_norm = 0.0

        new_pert = FourierOneForm.from_coefficients(
            {k: alpha_next.coefficient(k) for k in range(-cap, cap + 1) if k != 0},
            cap,
        )
        step_norm = strip_l2_norm(
            FourierOneForm(cap, alpha_next.data - alpha.data), strip_width
        )
        residual = strip_l2_norm(new_pert, strip_width)
        extras = {
            "mean_drift": mean_drift,
            "last_term_norm": last_term_norm,
        }
        for k in range(1, 5):
            extras[f"cos_{k}"] = cos_coefficient(alpha_next, k)
        records.append(
            StepRecord(
                n=n,
                s=strip_width,
                step_norm=step_norm,
                residual=residual,
                bound=prev_norm,
                bound_ok=(prev_norm is None or residual <= prev_norm),
                extras=extras,
            )
        )
        prev_norm = residual
        alpha = alpha_next
        forms.append(alpha)

    verdict = _verdict_from_steps([r.step_norm for r in records])
    report = IterationReport(
        "circle",
        tuple(records),
        verdict,
        {"eps": eps, "cap": cap, "lie_order": lie_order, "strip_width": strip_width},
    )
    return CircleResult(report, tuple(forms))


# ---------------------------------------------------------------------------
# Newton inversion of x -> x * integral(x)
# ---------------------------------------------------------------------------


def eps_integral_map(x: TruncatedPowerSeries) -> TruncatedPowerSeries:
    """The model map x -> x * integral(x); lands in series of valuation >= 1."""
    integral, _ = ps_antiderive(x)
    return ps_mul(x, integral)


def _solve_linearization(
    x: TruncatedPowerSeries, rhs: TruncatedPowerSeries, drop_top: int, step: int
) -> TruncatedPowerSeries:
    """Triangular solve of linearization_action(x, xi) = rhs.

    Row m + 1 determines xi_m with diagonal x_0 (m+2)/(m+1); the drop_top
    highest rows can be discarded to produce a deliberately approximate
    inverse.  Exactness of the arithmetic follows the mode of x.
    """
    D, mode = x.truncation, x.mode
    x0 = x.coefficients[0]
    if abs(complex(float(x0[0]), float(x0[1])) if mode == "exact" else x0) < 1e-12:
        raise SingularLinearizationError(step)

    zero = TruncatedPowerSeries.zero(D, mode).coefficients[0]
    xi: list = [zero] * (D + 1)
    solve_rows = D - drop_top
    for m in range(0, solve_rows):
        # (Dxi)_(m+1) = sum_j xi_j x_(m-j) (1/(j+1) + 1/(m-j+1))
        acc = rhs.coefficients[m + 1]
        for j in range(0, m):
            weight = Fraction(1, j + 1) + Fraction(1, m - j + 1)
            if mode == "exact":
                xr, xi_ = x.coefficients[m - j]
                term = (
                    (xi[j][0] * xr - xi[j][1] * xi_) * weight,
                    (xi[j][0] * xi_ + xi[j][1] * xr) * weight,
                )
                acc = (acc[0] - term[0], acc[1] - term[1])
            else:
                acc = acc - xi[j] * x.coefficients[m - j] * (
                    weight.numerator / weight.denominator
                )
        diag = Fraction(m + 2, m + 1)
        if mode == "exact":
            xr, xi_ = x.coefficients[0]
            denom = (xr * xr + xi_ * xi_) * diag
            xi[m] = (
                (acc[0] * xr + acc[1] * xi_) / denom,
                (acc[1] * xr - acc[0] * xi_) / denom,
            )
        else:
            xi[m] = acc / (x.coefficients[0] * (diag.numerator / diag.denominator))
    return TruncatedPowerSeries(D, mode, tuple(xi))


@dataclass(frozen=True)
class NewtonResult:
    report: IterationReport
    solution: TruncatedPowerSeries
    residual_valuations: tuple[int, ...]


def _newton_loop(
    y: TruncatedPowerSeries,
    x0: TruncatedPowerSeries,
    steps: int,
    defect: int,
    norm_radius: float,
    schedule: RadiusSchedule | None,
    engine: str,
) -> NewtonResult:
    if y.valuation < 1:
        raise PreconditionError("target must vanish at the origin")
    c0 = x0.coefficients[0]
    c0_mag = abs(c0) if x0.mode == "float" else math.hypot(float(c0[0]), float(c0[1]))
    if c0_mag == 0.0:
        raise PreconditionError("initial guess must have a nonzero constant term")
    if not 0 <= defect <= x0.truncation:
        raise PreconditionError("defect must sit in [0, truncation]")

    def radius_for(step: int, half: bool = False) -> float:
        if schedule is None:
            return norm_radius
        # Two schedule radii are consumed per step; half-indices read the
        # odd positions of a doubled-resolution schedule.
        idx = 2 * step + (1 if half else 2)
        idx = min(idx, schedule.steps)
        return schedule.radius(idx)

    x = x0
    records: list[StepRecord] = []
    valuations: list[int] = []
    residual = eps_integral_map(x) - y
    valuations.append(residual.valuation)
    for n in range(steps):
        if residual.is_zero():
            break
        try:
            xi = _solve_linearization(x, residual, defect, n)
        except SingularLinearizationError:
            records.append(
                StepRecord(n, radius_for(n), math.inf, ps_norm(residual, radius_for(n)), 0.0, False, {})
            )
            report = IterationReport(
                engine,
                tuple(records),
                "singular",
                {"failed_step": n},
            )
            return NewtonResult(report, x, tuple(valuations))

        recon = linearization_action(x, xi)
        defect_series = residual - recon
        x_next = x - xi
        residual_next = eps_integral_map(x_next) - y

        s_in = radius_for(n)
        s_half = radius_for(n, half=True)
        r_norm = ps_norm(residual, s_half)
        step_norm = ps_norm(xi, s_in)
        defect_norm = ps_norm(defect_series, s_in)
        extras = {
            "residual_valuation": residual_next.valuation,
            "defect_norm": defect_norm,
            "defect_ratio": (defect_norm / (r_norm * r_norm)) if r_norm > 0.0 else 0.0,
        }
        records.append(
            StepRecord(
                n=n,
                s=s_in,
                step_norm=step_norm,
                residual=ps_norm(residual_next, s_in),
                bound=r_norm,
                bound_ok=ps_norm(residual_next, s_in) <= r_norm * (1.0 + 1e-9)
                if r_norm > 0.0
                else True,
                extras=extras,
            )
        )
        x = x_next
        residual = residual_next
        valuations.append(residual.valuation)

    final_norm = ps_norm(residual, norm_radius)
    verdict = (
        "converged"
        if residual.is_zero() or final_norm < CAUCHY_TOL
        else _verdict_from_steps([r.step_norm for r in records])
    )
    report = IterationReport(
        engine,
        tuple(records),
        verdict,
        {
            "norm_radius": norm_radius,
            "defect": defect,
            "final_residual_norm": final_norm,
            "initial_residual_norm": ps_norm(eps_integral_map(x0) - y, norm_radius),
            "initial_drift_norm": ps_norm(eps_integral_map(x0) - x0, norm_radius),
            "defect_ratio_max": max(
                (r.extras["defect_ratio"] for r in records), default=0.0
            ),
        },
    )
    return NewtonResult(report, x, tuple(valuations))


def newton_invert(
    y: TruncatedPowerSeries,
    x0: TruncatedPowerSeries,
    steps: int,
    norm_radius: float = 0.5,
    schedule: RadiusSchedule | None = None,
) -> NewtonResult:
    """Newton iteration x' = x - L(x)(f(x) - y) for f(x) = x * integral(x).

    L(x) inverts the linearization degree by degree; the residual valuation
    then satisfies v' = 2v - 1 exactly until the truncation absorbs it, the
    series-ring face of quadratic convergence.
    """
    return _newton_loop(y, x0, steps, 0, norm_radius, schedule, "newton")


def quasi_newton_run(
    y: TruncatedPowerSeries,
    x0: TruncatedPowerSeries,
    steps: int,
    defect: int,
    norm_radius: float = 0.5,
    schedule: RadiusSchedule | None = None,
) -> NewtonResult:
    """Newton iteration with a deliberately degraded inverse.

    The top `defect` rows of the triangular solve are dropped, so the
    returned correction only approximately inverts the linearization; the
    per-step defect norm and its ratio to |residual|^2 are recorded instead
    of being assumed small.
    """
    return _newton_loop(y, x0, steps, defect, norm_radius, schedule, "quasi-newton")


# ---------------------------------------------------------------------------
# Generic drivers
# ---------------------------------------------------------------------------

StepMap = Callable[[int, float, float, ScaledElement], ScaledElement]


@dataclass(frozen=True)
class DriveResult:
    report: IterationReport
    schedule: RadiusSchedule
    iterates: tuple[ScaledElement, ...]
    log_m: tuple[float, ...] = ()
    log_n: tuple[float, ...] = ()


def contraction_run(
    step_maps: StepMap,
    lam: PerturbativeFactor,
    b: BrunoSequence,
    t: float,
    x0: ScaledElement,
    steps: int,
    exponent_shift: int = 1,
) -> DriveResult:
    """Iterate x_(n+1) = f_n(s_(n+1), s_n, x_n) along the derived schedule.

    Monitors the contraction estimate |x_(n+1) - x_n| at s_(n+1) against
    b_n times the previous step norm, and the eventual smallness |step| < b_n
    over the upper half of the horizon.  Violations are recorded, not fatal.
    """
    if b.sign != -1:
        raise PreconditionError("decay sequence must be negative-phase")
    rho = rho_for_perturbative(lam, b)
    sched = schedule_build(t, rho, steps + 1, exponent_shift)

    x = x0
    prev_step: float | None = None
    records: list[StepRecord] = []
    iterates = [x0]
    for n in range(steps):
        s_in, s_out = sched.radius(n + 1), sched.radius(n)
        try:
            x_next = step_maps(n, s_in, s_out, x)
        except Exception as exc:  # noqa: BLE001
            raise StepMapError(n, exc) from exc
        step_norm = x_next.sub(x).norm_at(s_in)
        b_n = math.exp(b.log_term(n)) if b.log_term(n) > -700 else 0.0
        bound = b_n * prev_step if prev_step is not None else None
        bound_ok = True if bound is None else step_norm <= bound * (1.0 + 1e-9)
        eventual_ok = step_norm < b_n if n >= steps // 2 else True
        records.append(
            StepRecord(
                n=n,
                s=s_in,
                step_norm=step_norm,
                residual=x_next.norm_at(s_in),
                bound=bound,
                bound_ok=bound_ok,
                extras={"eventual_ok": eventual_ok, "b_n": b_n},
            )
        )
        prev_step = step_norm
        x = x_next
        iterates.append(x)

    verdict = _verdict_from_steps([r.step_norm for r in records])
    report = IterationReport(
        "contraction",
        tuple(records),
        verdict,
        {"t": t, "steps": steps, "exponent_shift": exponent_shift},
    )
    return DriveResult(report, sched, tuple(iterates))


def kam_run(
    step_maps: StepMap,
    K: KamFactor,
    eps: float,
    c_phase_exponent: float,
    t: float,
    x0: ScaledElement,
    steps: int,
    exponent_shift: int = 1,
) -> DriveResult:
    """Iterate along the 1/n^(1+eps)-phase schedule under a mixed bound.

    Requires the schedule tameness check to pass first; then monitors
    |x_(n+1) - x_n| against M_n prev^2 + N_n prev and the eventual bound
    against c_n = exp(-2^n / n^(c_phase_exponent)) over the upper half.
    """
    check = kam_schedule_tame_check(K, eps, t, c_phase_exponent, steps, exponent_shift)
    if not check.tame:
        raise TamenessError("evaluated factor pair is not tame over the horizon")
    sched = check.schedule

    x = x0
    prev_step: float | None = None
    records: list[StepRecord] = []
    iterates = [x0]
    for n in range(steps):
        s_in, s_out = sched.radius(n + 1), sched.radius(n)
        try:
            x_next = step_maps(n, s_in, s_out, x)
        except Exception as exc:  # noqa: BLE001
            raise StepMapError(n, exc) from exc
        step_norm = x_next.sub(x).norm_at(s_in)
        m_n = math.exp(check.log_m[n]) if check.log_m[n] < 700 else math.inf
        nn = math.exp(check.log_n[n]) if check.log_n[n] > -700 else 0.0
        bound = m_n * prev_step**2 + nn * prev_step if prev_step is not None else None
        bound_ok = True if bound is None else step_norm <= bound * (1.0 + 1e-9)
        log_c = -math.ldexp(1.0, n) / float(max(n, 1)) ** c_phase_exponent
        c_n = math.exp(log_c) if log_c > -700 else 0.0
        eventual_ok = step_norm < c_n if n >= steps // 2 else True
        records.append(
            StepRecord(
                n=n,
                s=s_in,
                step_norm=step_norm,
                residual=x_next.norm_at(s_in),
                bound=bound,
                bound_ok=bound_ok,
                extras={"eventual_ok": eventual_ok, "c_n": c_n},
            )
        )
        prev_step = step_norm
        x = x_next
        iterates.append(x)

    verdict = _verdict_from_steps([r.step_norm for r in records])
    report = IterationReport(
        "kam",
        tuple(records),
        verdict,
        {"t": t, "eps": eps, "c_phase_exponent": c_phase_exponent, "steps": steps},
    )
    return DriveResult(report, sched, tuple(iterates), check.log_m, check.log_n)


# ---------------------------------------------------------------------------
# Scalar surrogate families
# ---------------------------------------------------------------------------


def scalar_contraction_family(a: BrunoSequence) -> StepMap:
    """Step map x' = a_n x^2, the scalar twin of the quadratic orbit."""

    def step(n: int, s: float, t: float, x: ScaledElement) -> ScalarElement:
        return ScalarElement(math.exp(a.log_term(n)) * x.value**2)  # type: ignore[attr-defined]

    return step


def scalar_kam_family(K: KamFactor) -> StepMap:
    """Step map x' = (M_n(s,t) x^2 + N_n(s,t) x) / 2.

    The half mirrors the mixed-orbit recursion, so a run with this family is
    arithmetically comparable to the scalar orbit on the evaluated pair.
    """

    def step(n: int, s: float, t: float, x: ScaledElement) -> ScalarElement:
        log_m, log_n = K.log_eval(n, s, t)
        m = math.exp(log_m)
        nn = math.exp(log_n) if log_n > -700 else 0.0
        return ScalarElement(0.5 * (m * x.value**2 + nn * x.value))  # type: ignore[attr-defined]

    return step
