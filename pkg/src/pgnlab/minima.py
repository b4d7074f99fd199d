"""Exact successive minima of the one-parameter box-plus-slab bodies.

The body at parameter Q is {y : |y_i| <= 1 (i <= n), |x.y_head + y_{n+1}|
<= 1/Q}, so the gauge is F(y) = max(max_i |y_i|, Q|x.y_head + y_{n+1}|).
With x rational (common denominator q) and Q rational, F scales to an
integer on integer points: F * q * QD = max(headmax*q*QD, QN*|P + q*c|).
Candidates are enumerated in doubling shells F <= Lam, only one of each
+-y pair (first nonzero coordinate positive), and fed through a streaming
minimum-weight-basis update, so the result equals the greedy selection
from the full (F, lex)-sorted candidate list without materializing it.

Backends per shell: a compiled kernel (n <= 2) when numba is importable
and PGNLAB_NO_NUMBA is unset, a vectorized numpy scan, and a plain-Python
big-integer scan when 64-bit overflow is possible.  All three maintain
the same basis invariant; witnesses are re-verified in exact rationals at
the end regardless of path.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidParams,
    PgnError,
)
from .ratpl import rat, rat_str

DEFAULT_BUDGET = 10 ** 8
_INT64_CAP = 2 ** 62


@dataclass(frozen=True)
class BodySpec:
    """One body: ambient n, the linear-form point x, and the size Q > 1."""

    n: int
    x: tuple
    Q: Fraction

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParams("n must be >= 1")
        x = tuple(rat(v) for v in self.x)
        if len(x) != self.n:
            raise DimensionMismatch(f"x must have {self.n} coordinates, got {len(x)}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "Q", rat(self.Q))
        if not self.Q > 1:
            raise InvalidParams(f"Q must exceed 1, got {rat_str(self.Q)}")


def body_norm(spec: BodySpec, y) -> Fraction:
    """Exact gauge value F(y) of an integer vector."""
    y = tuple(int(v) for v in y)
    if len(y) != spec.n + 1:
        raise DimensionMismatch(f"y must have {spec.n + 1} coordinates, got {len(y)}")
    head = max((abs(v) for v in y[: spec.n]), default=0)
    form = sum(xi * yi for xi, yi in zip(spec.x, y)) + y[spec.n]
    return max(Fraction(head), spec.Q * abs(form))


@dataclass(frozen=True)
class MinimaResult:
    """lambda_1 <= ... <= lambda_{n+1} with independent integer witnesses."""

    lambdas: tuple
    witnesses: tuple

    def to_json_dict(self) -> dict:
        return {
            "lambdas": [rat_str(v) for v in self.lambdas],
            "witnesses": [list(w) for w in self.witnesses],
        }


def _int_det(rows) -> int:
    """Exact determinant of a square integer matrix (fraction-free)."""
    a = [list(map(int, r)) for r in rows]
    m = len(a)
    if m == 0:
        return 1
    sign, prev = 1, 1
    for k in range(m - 1):
        if a[k][k] == 0:
            for r in range(k + 1, m):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[m - 1][m - 1]


def _span_coeffs(vecs, e):
    """Coefficients writing e over vecs (independent), or None if e is not
    in their span.  Exact Fraction elimination on a few small rows."""
    m = len(vecs)
    if m == 0:
        return None
    dim = len(e)
    aug = [[Fraction(vecs[j][i]) for j in range(m)] + [Fraction(e[i])] for i in range(dim)]
    piv_rows = []
    row = 0
    for col in range(m):
        pivot = None
        for r in range(row, dim):
            if aug[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        pr = aug[row]
        inv = 1 / pr[col]
        for j in range(col, m + 1):
            pr[j] *= inv
        for r in range(dim):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                for j in range(col, m + 1):
                    aug[r][j] -= f * pr[j]
        piv_rows.append(col)
        row += 1
    for r in range(row, dim):
        if aug[r][m] != 0:
            return None
    coeffs = [Fraction(0)] * m
    for r, col in enumerate(piv_rows):
        coeffs[col] = aug[r][m]
    return coeffs


def _normal_vector(vecs, dim):
    """Integer normal of dim-1 independent vectors in Z^dim (cofactors)."""
    normal = []
    for i in range(dim):
        minor = [[v[j] for j in range(dim) if j != i] for v in vecs]
        normal.append((-1) ** i * _int_det(minor))
    return normal


class _Basis:
    """Streaming minimum-weight independent set under the (w, vec) order.

    push keeps the invariant: the held set is the unique minimum-weight
    basis (by sorted weight sequence, ties split by vector lex) of all
    vectors pushed so far.  Order of pushes does not matter.
    """

    def __init__(self, dim):
        self.dim = dim
        self.vecs = []
        self.wts = []

    @property
    def m(self):
        return len(self.vecs)

    def wmax(self):
        return max(self.wts) if self.wts else None

    def normal(self):
        if self.m != self.dim - 1:
            return None
        return _normal_vector(self.vecs, self.dim)

    def push(self, vec, w):
        coeffs = _span_coeffs(self.vecs, vec)
        if coeffs is None:
            self.vecs.append(tuple(vec))
            self.wts.append(w)
            return
        circuit = [j for j, c in enumerate(coeffs) if c != 0]
        if not circuit:
            return
        j_star = max(circuit, key=lambda j: (self.wts[j], self.vecs[j]))
        if (self.wts[j_star], self.vecs[j_star]) > (w, tuple(vec)):
            self.vecs[j_star] = tuple(vec)
            self.wts[j_star] = w

    def sorted_items(self):
        return sorted(zip(self.wts, self.vecs))


def _normalized_heads(n, lam):
    """All head tuples with first nonzero coordinate positive, max <= lam."""
    if n == 0:
        return
    for lead in range(n):
        tail = n - lead - 1
        for first in range(1, lam + 1):
            if tail == 0:
                yield (0,) * lead + (first,)
                continue
            idx = [-lam] * tail
            while True:
                yield (0,) * lead + (first,) + tuple(idx)
                pos = tail - 1
                while pos >= 0:
                    idx[pos] += 1
                    if idx[pos] <= lam:
                        break
                    idx[pos] = -lam
                    pos -= 1
                if pos < 0:
                    break


def _scan_python(n, p, q, QN, QD, lam, basis):
    """Reference shell scan in plain Python integers (any size)."""
    D = q * QD
    A = lam * D
    B = QN * q
    full = n + 1
    for c in range(1, A // B + 1):
        w = B * c
        wmax = basis.wmax() if basis.m == full else None
        if wmax is None or w <= wmax:
            basis.push((0,) * n + (c,), w)
    for head in _normalized_heads(n, lam):
        P = sum(pi * yi for pi, yi in zip(p, head))
        c_hi = (A - P * QN) // B
        c_lo = -((A + P * QN) // B)
        if c_lo > c_hi:
            continue
        base_w = max(abs(v) for v in head) * D
        wmax = basis.wmax() if basis.m == full else None
        if wmax is not None and base_w > wmax:
            continue
        R = P + q * c_lo
        for c in range(c_lo, c_hi + 1):
            w = max(base_w, QN * abs(R))
            wmax = basis.wmax() if basis.m == full else None
            if wmax is None or w <= wmax:
                basis.push(head + (c,), w)
            R += q


def _scan_numpy(n, p, q, QN, QD, lam, basis):
    """Vectorized shell scan; survivors go through the exact basis."""
    D = q * QD
    A = lam * D
    B = QN * q
    full = n + 1
    for c in range(1, A // B + 1):
        w = B * c
        wmax = basis.wmax() if basis.m == full else None
        if wmax is None or w <= wmax:
            basis.push((0,) * n + (c,), w)

    ys = np.arange(-lam, lam + 1, dtype=np.int64)
    ys_pos = np.arange(1, lam + 1, dtype=np.int64)

    def scan_outer(outer):
        last = ys_pos if all(v == 0 for v in outer) else ys
        P = int(sum(pi * yi for pi, yi in zip(p, outer))) + p[n - 1] * last
        c_hi = (A - P * QN) // B
        c_lo = -((A + P * QN) // B)
        counts = c_hi - c_lo + 1
        valid = np.nonzero(counts > 0)[0]
        if valid.size == 0:
            return
        cnts = counts[valid]
        total = int(cnts.sum())
        rep = np.repeat(valid, cnts)
        starts = np.concatenate(([0], np.cumsum(cnts)[:-1]))
        cs = c_lo[rep] + (np.arange(total) - np.repeat(starts, cnts))
        y_last = last[rep]
        R = P[rep] + q * cs
        hm_outer = max((abs(v) for v in outer), default=0)
        w = np.maximum(np.maximum(np.abs(y_last), hm_outer) * D, QN * np.abs(R))

        m = basis.m
        if m == full:
            keep = w <= basis.wmax()
        elif m == n:
            nv = basis.normal()
            dot = int(sum(nv[i] * outer[i] for i in range(n - 1))) + nv[n - 1] * y_last + nv[n] * cs
            keep = (dot != 0) | (w <= basis.wmax())
        else:
            keep = np.ones(total, dtype=bool)
        for i in np.nonzero(keep)[0]:
            vec = outer + (int(y_last[i]), int(cs[i]))
            basis.push(vec, int(w[i]))

    if n == 1:
        scan_outer(())
    else:
        for outer in _normalized_heads(n - 1, lam):
            scan_outer(outer)
        for tail_first in range(0, 1):
            pass
        # heads whose first n-1 coordinates vanish: last coordinate leads
        scan_outer((0,) * (n - 1))


def _int64_safe(n, p, q, QN, QD, lam) -> bool:
    """Conservative overflow screen for the compiled and numpy paths."""
    D = q * QD
    A = lam * D
    B = QN * q
    pmax = max((abs(v) for v in p), default=0)
    Pmax = sum(abs(v) for v in p) * lam
    lo_num = A + Pmax * QN
    cmax = lo_num // B + 2
    Rb = A // QN + q + 2
    vmax = max(lam, cmax)
    det_bound = 6 * vmax ** 3 if n >= 2 else 2 * vmax ** 2
    checks = [A, B, lo_num, QN * Rb, pmax * QN, q * cmax, det_bound, B * (cmax + 1)]
    return all(v < _INT64_CAP for v in checks)


def _resolve_backend(requested: str, n: int, int64_ok: bool) -> str:
    if requested not in ("auto", "numba", "numpy", "python"):
        raise InvalidParams(f"unknown backend {requested!r}")
    no_numba = os.environ.get("PGNLAB_NO_NUMBA", "") == "1"
    if requested == "numba":
        if not _kernels.HAS_NUMBA:
            raise InvalidParams("numba backend requested but numba is not importable")
        if no_numba:
            raise InvalidParams("numba backend requested but PGNLAB_NO_NUMBA=1")
        if n > 2 or not int64_ok:
            raise InvalidParams("numba backend supports n <= 2 within 64-bit bounds")
        return "numba"
    if requested == "numpy":
        if not int64_ok:
            raise InvalidParams("numpy backend needs 64-bit-safe inputs")
        return "numpy"
    if requested == "python":
        return "python"
    if not int64_ok:
        return "python"
    if _kernels.HAS_NUMBA and not no_numba and n <= 2:
        return "numba"
    return "numpy"


def _run_kernel(n, p, q, QN, QD, lam, basis):
    dim = n + 1
    vecs = np.zeros((dim, dim), dtype=np.int64)
    wts = np.zeros(dim, dtype=np.int64)
    for i, v in enumerate(basis.vecs):
        vecs[i] = v
        wts[i] = basis.wts[i]
    if n == 1:
        m = _kernels.scan_n1(p[0], q, QN, QD, lam, vecs, wts, basis.m)
    else:
        m = _kernels.scan_n2(p[0], p[1], q, QN, QD, lam, vecs, wts, basis.m)
    basis.vecs = [tuple(int(v) for v in vecs[i]) for i in range(m)]
    basis.wts = [int(wts[i]) for i in range(m)]


def successive_minima(
    spec: BodySpec, *, budget: int = DEFAULT_BUDGET, backend: str = "auto"
) -> MinimaResult:
    """All n+1 minima with canonical witnesses, by doubling shells.

    Each shell Lam first passes the guardrail (2*Lam+1)^n (2*Lam/Q + 1)
    <= budget, then is scanned by the per-shell backend.  Done when the
    basis is full at the end of a shell: every candidate with F <= Lam
    has been offered, so the held basis is the global greedy one.
    """
    n = spec.n
    q = 1
    for xi in spec.x:
        q = q * xi.denominator // math.gcd(q, xi.denominator)
    p = [int(xi * q) for xi in spec.x]
    QN, QD = spec.Q.numerator, spec.Q.denominator

    basis = _Basis(n + 1)
    lam = 1
    while True:
        count = Fraction((2 * lam + 1) ** n) * (Fraction(2 * lam) / spec.Q + 1)
        if count > budget:
            raise BudgetExceeded(
                f"shell Lam={lam} needs about {float(count):.3g} candidates, "
                f"budget is {budget}"
            )
        chosen = _resolve_backend(backend, n, _int64_safe(n, p, q, QN, QD, lam))
        if chosen == "numba":
            _run_kernel(n, p, q, QN, QD, lam, basis)
        elif chosen == "numpy":
            _scan_numpy(n, p, q, QN, QD, lam, basis)
        else:
            _scan_python(n, p, q, QN, QD, lam, basis)
        if basis.m == n + 1:
            break
        lam *= 2

    D = q * QD
    items = basis.sorted_items()
    lambdas = tuple(Fraction(w, D) for w, _ in items)
    witnesses = tuple(vec for _, vec in items)
    for lam_i, wit in zip(lambdas, witnesses):
        if body_norm(spec, wit) != lam_i:
            raise PgnError(f"witness {wit} does not attain its minimum")
    if _int_det(witnesses) == 0:
        raise PgnError("witnesses are not linearly independent")
    if spec.Q >= 1 and lambdas[0] < 1:
        raise PgnError("first minimum below 1 at Q >= 1")
    return MinimaResult(lambdas=lambdas, witnesses=witnesses)


@dataclass(frozen=True)
class ProfileRow:
    Q: Fraction
    t: float
    lambdas: tuple
    L: tuple
    g: tuple
    witnesses: tuple


@dataclass(frozen=True)
class Profile:
    """Rows of exact minima over a Q grid, with float log columns."""

    n: int
    x: tuple
    rows: tuple


def _flog(v: Fraction) -> float:
    return math.log(v.numerator) - math.log(v.denominator)


def _cache_key(n, x, Q) -> str:
    text = f"{n}|{','.join(rat_str(v) for v in x)}|{rat_str(Q)}"
    return hashlib.sha256(text.encode()).hexdigest()


def _row_from_minima(n, Q, res: MinimaResult) -> ProfileRow:
    t = _flog(Q)
    L = tuple(_flog(v) for v in res.lambdas)
    g = tuple(t / (n + 1) - Li for Li in L)
    return ProfileRow(Q=Q, t=t, lambdas=res.lambdas, L=L, g=g, witnesses=res.witnesses)


def profile(
    n,
    x,
    t_grid=None,
    Q_grid=None,
    *,
    budget: int = DEFAULT_BUDGET,
    backend: str = "auto",
    cache_dir=None,
) -> Profile:
    """One minima row per grid point, with all row invariants asserted.

    Exactly one of t_grid / Q_grid must be given.  t values map to the
    integer Q = round(e^t) (which must land >= 2); Q values are used as
    given.  cache_dir, when set, stores one JSON file per (n, x, Q) and
    re-verifies cached witnesses on load.
    """
    x = tuple(rat(v) for v in x)
    if (t_grid is None) == (Q_grid is None):
        raise InvalidParams("provide exactly one of t_grid or Q_grid")
    if t_grid is not None:
        Qs = []
        for t in t_grid:
            Qv = round(math.exp(float(t)))
            if Qv < 2:
                raise InvalidParams(f"t={t} gives Q={Qv} < 2")
            Qs.append(Fraction(Qv))
    else:
        Qs = [rat(Qv) for Qv in Q_grid]
    for a, b in zip(Qs, Qs[1:]):
        if not a < b:
            raise InvalidParams("grid must be strictly increasing")

    rows = []
    for Q in Qs:
        spec = BodySpec(n=n, x=x, Q=Q)
        res = None
        path = None
        if cache_dir is not None:
            os.makedirs(cache_dir, exist_ok=True)
            path = os.path.join(cache_dir, _cache_key(n, x, Q) + ".json")
            if os.path.exists(path):
                with open(path) as fh:
                    data = json.load(fh)
                res = MinimaResult(
                    lambdas=tuple(rat(v) for v in data["lambdas"]),
                    witnesses=tuple(tuple(w) for w in data["witnesses"]),
                )
                for lam_i, wit in zip(res.lambdas, res.witnesses):
                    if body_norm(spec, wit) != lam_i:
                        res = None
                        break
        if res is None:
            res = successive_minima(spec, budget=budget, backend=backend)
            if path is not None:
                with open(path, "w") as fh:
                    json.dump(res.to_json_dict(), fh, sort_keys=True)
        rows.append(_row_from_minima(n, Q, res))

    prof = Profile(n=n, x=x, rows=tuple(rows))
    _assert_profile_invariants(prof)
    return prof


def _assert_profile_invariants(prof: Profile):
    """Exact per-row and cross-row checks; failures are internal bugs."""
    n = prof.n
    fact = math.factorial(n + 1)
    for idx, row in enumerate(prof.rows):
        for a, b in zip(row.lambdas, row.lambdas[1:]):
            if a > b:
                raise PgnError(f"row {idx}: minima not sorted")
        prod = Fraction(1)
        for v in row.lambdas:
            prod *= v
        if not row.Q / fact <= prod <= row.Q:
            raise PgnError(f"row {idx}: second-theorem window violated")
    for r1, r2 in zip(prof.rows, prof.rows[1:]):
        ratio = r2.Q / r1.Q
        for a, b in zip(r1.lambdas, r2.lambdas):
            if b > a * ratio or a > b * ratio:
                raise PgnError("adjacent rows violate the 1-Lipschitz bound")


def minkowski_check(prof: Profile):
    """Exact product window per row; None if all pass, else first bad index."""
    fact = math.factorial(prof.n + 1)
    for idx, row in enumerate(prof.rows):
        prod = Fraction(1)
        for v in row.lambdas:
            prod *= v
        if not row.Q / fact <= prod <= row.Q:
            return idx
    return None


def profile_to_csv(prof: Profile, fh):
    """Columns: Q, t, lambda_i (exact strings), L_i, g_i (floats)."""
    n = prof.n
    writer = csv.writer(fh)
    header = (
        ["Q", "t"]
        + [f"lambda_{i + 1}" for i in range(n + 1)]
        + [f"L_{i + 1}" for i in range(n + 1)]
        + [f"g_{i + 1}" for i in range(n + 1)]
    )
    writer.writerow(header)
    for row in prof.rows:
        writer.writerow(
            [rat_str(row.Q), f"{row.t:.15g}"]
            + [rat_str(v) for v in row.lambdas]
            + [f"{v:.15g}" for v in row.L]
            + [f"{v:.15g}" for v in row.g]
        )


def profile_from_csv(fh, x=None) -> Profile:
    """Rebuild a Profile from its CSV form (witnesses are not stored)."""
    reader = csv.reader(fh)
    header = next(reader)
    if (len(header) - 2) % 3 != 0:
        raise InvalidParams("malformed profile CSV header")
    dim = (len(header) - 2) // 3
    n = dim - 1
    rows = []
    for rec in reader:
        if not rec:
            continue
        Q = rat(rec[0])
        lambdas = tuple(rat(v) for v in rec[2: 2 + dim])
        t = _flog(Q)
        L = tuple(_flog(v) for v in lambdas)
        g = tuple(t / (n + 1) - Li for Li in L)
        rows.append(ProfileRow(Q=Q, t=t, lambdas=lambdas, L=L, g=g, witnesses=()))
    return Profile(n=n, x=None if x is None else tuple(rat(v) for v in x), rows=tuple(rows))
