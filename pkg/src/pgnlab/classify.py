"""Membership diagnostics over computed minima profiles, and the exact
exponent-tuple validators.

Profile verdicts here are heuristics at finite precision: the underlying
criteria are asymptotic, so every verdict is labeled as such and driven
by declared, tunable thresholds.  The tuple validators at the bottom
(validate_tau, transference_check) are exact rational, infinity included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InsufficientData, PgnError
from .ratpl import INF, ExtendedRational, rat


def dirichlet_omega(n: int, d: int) -> Fraction:
    """The everywhere-valid floor (d+1)/(n-d); d = 0 gives 1/n."""
    return Fraction(d + 1, n - d)


def _window_rows(profile, window):
    if window is None:
        t0, t1 = profile.rows[0].t, profile.rows[-1].t
        window = ((t0 + t1) / 2, t1)
    rows = [r for r in profile.rows if window[0] <= r.t <= window[1]]
    if not rows:
        raise InsufficientData(f"no profile rows inside window {window}")
    return window, rows


def di_check(profile, epsilon, window=None, band: bool = False) -> dict:
    """Exact one-inequality screen: lambda_1^{n+1} <= Q * epsilon per row.

    In log form that is t/(n+1) - L_1(t) >= -log(epsilon)/(n+1).  margin
    is the float slack inf_f + log(epsilon)/(n+1).  With band=True also
    reports the two-sided reference threshold epsilon*e^{-10(n+1)^2(n+10)}
    and whether any row dips under it (floats; the factor is transcendental).
    """
    epsilon = rat(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    n = profile.n
    window, rows = _window_rows(profile, window)
    consistent = all(r.lambdas[0] ** (n + 1) <= r.Q * epsilon for r in rows)
    inf_f = min(r.t / (n + 1) - r.L[0] for r in rows)
    out = {
        "consistent": consistent,
        "margin": inf_f + math.log(float(epsilon)) / (n + 1),
        "heuristic": True,
        "window": window,
    }
    if band:
        threshold = (-math.log(float(epsilon)) + 10 * (n + 1) ** 2 * (n + 10)) / (n + 1)
        out["band_threshold"] = threshold
        out["band_dip_witnessed"] = any(
            r.t / (n + 1) - r.L[0] < threshold for r in rows
        )
    return out


@dataclass(frozen=True)
class TailStats:
    """Window statistics of the depth records f and s_d, with a verdict.

    s_d(t) = (n-d)t/(n+1) - (L_1(t) + ... + L_{n-d}(t)); s_{n-1} = f.
    The verdict is a finite-window heuristic, never a proof.
    """

    d: int
    window: tuple
    inf_f: float
    sup_f: float
    inf_s: float
    sup_s: float
    trend_slope: float
    quarter_infs: tuple
    verdict: str
    heuristic: bool = True


def _quarters(values):
    m = len(values)
    cuts = [0, m // 4, m // 2, (3 * m) // 4, m]
    return [values[cuts[q]: cuts[q + 1]] for q in range(4)]


def bad_sing_stat(
    profile,
    d: int,
    window=None,
    *,
    bad_cap_offset: float = 2.0,
    bad_trend_tol: float = 0.25,
    sing_step: float = 0.2,
) -> TailStats:
    """Trend verdict on the statistic s_d over a tail window.

    Sing-consistent: the inf of s_d over successive quarters of the window
    rises by at least sing_step each time (escape without apparent bound).
    Bad-consistent (checked only otherwise, so the two verdicts exclude
    each other by construction): sup of s_d stays under
    bad_cap_offset + inf, and the last quarter's sup exceeds the first's
    by at most bad_trend_tol.  Anything else: neither.
    """
    n = profile.n
    if not 0 <= d <= n - 1:
        raise ValueError(f"d must lie in 0..{n - 1}")
    window, rows = _window_rows(profile, window)
    ts = [r.t for r in rows]
    f_vals = [r.t / (n + 1) - r.L[0] for r in rows]
    s_vals = [
        (n - d) * r.t / (n + 1) - sum(r.L[: n - d]) for r in rows
    ]

    mean_t = sum(ts) / len(ts)
    mean_s = sum(s_vals) / len(s_vals)
    var = sum((t - mean_t) ** 2 for t in ts)
    slope = (
        sum((t - mean_t) * (s - mean_s) for t, s in zip(ts, s_vals)) / var
        if var > 0
        else 0.0
    )

    quarters = _quarters(s_vals)
    q_infs = tuple(min(q) if q else math.inf for q in quarters)

    sing = all(len(q) > 0 for q in quarters) and all(
        q_infs[j + 1] >= q_infs[j] + sing_step for j in range(3)
    )
    if sing:
        verdict = "Sing-consistent"
    else:
        cap = bad_cap_offset + min(s_vals)
        first_sup = max(quarters[0]) if quarters[0] else -math.inf
        last_sup = max(quarters[3]) if quarters[3] else math.inf
        bad = max(s_vals) <= cap and last_sup <= first_sup + bad_trend_tol
        verdict = "Bad-consistent" if bad else "neither"

    return TailStats(
        d=d,
        window=window,
        inf_f=min(f_vals),
        sup_f=max(f_vals),
        inf_s=min(s_vals),
        sup_s=max(s_vals),
        trend_slope=slope,
        quarter_infs=q_infs,
        verdict=verdict,
    )


@dataclass(frozen=True)
class ExponentEstimate:
    """Finite-horizon exponent readout for one intermediate index d."""

    d: int
    omega_lower: float
    omega_hat_proxy: float
    very_singular_flag: bool
    ratio_min: float = math.nan
    ratio_max: float = math.nan
    infinite: bool = False


def exponent_estimate(profile, d: int) -> ExponentEstimate:
    """Invert the partial-sum ratio through tau = 1/ratio - 1.

    The min of (L_1 + ... + L_{n-d})/t over the tail window is the liminf
    proxy and yields the ordinary-exponent estimate; the max is the
    limsup proxy for the uniform one.  A zero ratio flags an infinite
    estimate.  very_singular compares the uniform proxy against the
    everywhere-valid floor (d+1)/(n-d).
    """
    n = profile.n
    if len(profile.rows) < 10:
        raise InsufficientData(
            f"need at least 10 profile rows, got {len(profile.rows)}"
        )
    if not 0 <= d <= n - 1:
        raise ValueError(f"d must lie in 0..{n - 1}")
    _, rows = _window_rows(profile, None)
    ratios = [sum(r.L[: n - d]) / r.t for r in rows]
    r_min, r_max = min(ratios), max(ratios)
    omega_lower = math.inf if r_min <= 0 else 1 / r_min - 1
    omega_hat = math.inf if r_max <= 0 else 1 / r_max - 1
    return ExponentEstimate(
        d=d,
        omega_lower=omega_lower,
        omega_hat_proxy=omega_hat,
        very_singular_flag=omega_hat > float(dirichlet_omega(n, d)),
        ratio_min=r_min,
        ratio_max=r_max,
        infinite=r_min <= 0,
    )


@dataclass(frozen=True)
class TauReport:
    ok: bool
    violations: tuple = field(default=())


def _tau_chain_ok(n, tau):
    """The tau-form chain, infinity conventions applied.  Returns messages."""
    problems = []
    if tau[0] < Fraction(1, n):
        problems.append(f"tau_0 = {tau[0]!r} must be >= 1/{n}")
    for d in range(1, n):
        td, tprev = tau[d], tau[d - 1]
        if td.is_inf:
            left_ok = tprev >= Fraction(d)
            right_ok = True
        else:
            left = d * td.value / (td.value + d + 1)
            left_ok = tprev >= left
            if tprev.is_inf:
                right_ok = False
            else:
                right_ok = (n - d + 1) * tprev.value <= (n - d) * td.value - 1
        if not left_ok:
            problems.append(f"lower chain fails at d={d}: tau_{d - 1} too small")
        if not right_ok:
            problems.append(f"upper chain fails at d={d}: tau_{d - 1} too large")
    return problems


def _theta_chain_ok(n, tau):
    """The equivalent theta-form: theta_i = (1 + tau_{n-i})^{-1}."""
    theta = [None] + [
        Fraction(0) if tau[n - i].is_inf else 1 / (1 + tau[n - i].value)
        for i in range(1, n + 1)
    ]
    if theta[n] > Fraction(n, n + 1):
        return False
    for i in range(1, n):
        if theta[i] * (i + 1) > theta[i + 1] * i:
            return False
        if (1 - theta[i]) * (n - i) > (1 - theta[i + 1]) * (n + 1 - i):
            return False
    return True


def validate_tau(n: int, tau) -> TauReport:
    """Exact feasibility check of an exponent tuple tau_0..tau_{n-1}.

    Verifies the chained two-sided inequalities (lower side replaced by d
    when tau_d is infinite) plus the floor tau_0 >= 1/n, re-checks the
    equivalent theta ladder, and insists the two forms agree.
    """
    tau = tuple(ExtendedRational.parse(t) for t in tau)
    if len(tau) != n:
        return TauReport(ok=False, violations=(f"need {n} entries, got {len(tau)}",))
    for j, t in enumerate(tau):
        if not t.is_inf and t.value < 0:
            return TauReport(ok=False, violations=(f"tau_{j} must be nonnegative",))
    problems = _tau_chain_ok(n, tau)
    theta_ok = _theta_chain_ok(n, tau)
    if (not problems) != theta_ok:
        raise PgnError(
            f"tau-form and theta-form disagree on {tuple(repr(t) for t in tau)}"
        )
    return TauReport(ok=not problems, violations=tuple(problems))


def _go_up(n: int, d: int, w: ExtendedRational) -> ExtendedRational:
    """Lower bound on omega_{d+1} from omega_d."""
    if w.is_inf:
        return INF
    return ExtendedRational(((n - d) * w.value + 1) / (n - d - 1))


def _go_down(d: int, w: ExtendedRational) -> ExtendedRational:
    """Lower bound on omega_{d-1} from omega_d."""
    if w.is_inf:
        return ExtendedRational(Fraction(d))
    return ExtendedRational(d * w.value / (w.value + d + 1))


@dataclass(frozen=True)
class TransferReport:
    ok: bool
    violations: tuple
    khintchine_low: ExtendedRational
    khintchine_high: ExtendedRational


def transference_check(n: int, omega) -> TransferReport:
    """Exact transference screen on an exponent list omega_0..omega_{n-1}.

    Checks every going-up and going-down inequality, then re-derives the
    two-sided bound on omega_0 from omega_{n-1} by iterating them and
    asserts the iteration lands exactly on the closed forms
    omega/((n-1)omega + n) and (omega - n + 1)/n.
    """
    omega = tuple(ExtendedRational.parse(w) for w in omega)
    if len(omega) != n:
        return TransferReport(
            ok=False,
            violations=(f"need {n} entries, got {len(omega)}",),
            khintchine_low=ExtendedRational(0),
            khintchine_high=ExtendedRational(0),
        )
    problems = []
    for d in range(0, n - 1):
        bound = _go_up(n, d, omega[d])
        if omega[d + 1] < bound:
            problems.append(
                f"going-up fails at d={d}: omega_{d + 1} = {omega[d + 1]!r} < {bound!r}"
            )
    for d in range(1, n):
        bound = _go_down(d, omega[d])
        if omega[d - 1] < bound:
            problems.append(
                f"going-down fails at d={d}: omega_{d - 1} = {omega[d - 1]!r} < {bound!r}"
            )

    w = omega[n - 1]
    low = w
    for d in range(n - 1, 0, -1):
        low = _go_down(d, low)
    if w.is_inf:
        closed_low = ExtendedRational(Fraction(1, n - 1)) if n > 1 else INF
    else:
        closed_low = ExtendedRational(w.value / ((n - 1) * w.value + n))
    if low != closed_low:
        raise PgnError("iterated going-down disagrees with its closed form")

    if w.is_inf:
        high = INF
        closed_high = INF
    else:
        hv = w.value
        for d in range(n - 2, -1, -1):
            # inverted going-up: the largest omega_d compatible with omega_{d+1}
            hv = ((n - d - 1) * hv - 1) / (n - d)
        high = ExtendedRational(hv)
        closed_high = ExtendedRational((w.value - n + 1) / n)
    if high != closed_high:
        raise PgnError("iterated going-up inverse disagrees with its closed form")

    if omega[0] < low:
        problems.append("khintchine chain fails: omega_0 below the derived floor")
    if omega[0] > high:
        problems.append("khintchine chain fails: omega_0 above the derived ceiling")
    return TransferReport(
        ok=not problems,
        violations=tuple(problems),
        khintchine_low=low,
        khintchine_high=high,
    )
