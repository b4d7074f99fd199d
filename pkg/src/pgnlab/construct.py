"""Assembly of the rigid (n+1)-component family, truncated to K block bands.

Pipeline: a target-ratio table alpha from the exponent tuple tau; per-band
weight rows beta_k^i satisfying sum, spacing, and box constraints, built by
a deterministic clamp-space-repair scheme; a delta-perturbed copy of each
row; the time grid T_k^i tied to the rows by an exact recursion; a head
piece on [0, T_1] starting at zero; and one block per (band, stage) glued
end to end.

Everything is exact.  Every constraint is validated after construction and
failures raise with the failing constraint and cell named.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .blocks import BlockParams, build_block
from .classify import validate_tau
from .errors import ConstraintInfeasible, GrowthViolation, InvalidParams, InvalidTau
from .ratpl import ExtendedRational, PLMap, concat, inv_one_plus, rat, rat_str
from .roysys import RoySystem


def c_constant(n: int) -> int:
    """The threshold constant 5(n+1)^2(n+10)."""
    return 5 * (n + 1) ** 2 * (n + 10)


@dataclass(frozen=True)
class ConstructionParams:
    """Inputs of one truncated run.

    gamma is the primary depth parameter; the derived epsilon
    e^{-(n+1)(gamma - C_n)} is float reporting only.  strict mode requires
    gamma > C_n so that epsilon lands in (0,1).
    """

    n: int
    gamma: Fraction
    tau: tuple
    delta: Fraction
    K: int
    strict: bool = False

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise InvalidParams(f"n must be >= 2, got {n}")
        object.__setattr__(self, "gamma", rat(self.gamma))
        object.__setattr__(self, "delta", rat(self.delta))
        object.__setattr__(
            self, "tau", tuple(ExtendedRational.parse(t) for t in self.tau)
        )
        if self.gamma <= 0:
            raise InvalidParams("gamma must be positive")
        if not (0 <= self.delta < Fraction(1, 32 * n * n)):
            raise InvalidParams(
                f"delta must lie in [0, 1/{32 * n * n}), got {rat_str(self.delta)}"
            )
        if self.K < 1:
            raise InvalidParams("K must be a positive integer")
        if self.strict and not self.gamma > c_constant(n):
            raise InvalidParams(
                f"strict mode needs gamma > {c_constant(n)}, got {rat_str(self.gamma)}"
            )
        report = validate_tau(n, self.tau)
        if not report.ok:
            raise InvalidTau("; ".join(report.violations))

    @property
    def epsilon_float(self) -> float:
        return math.exp(-(self.n + 1) * (float(self.gamma) - c_constant(self.n)))


@dataclass(frozen=True)
class AlphaTable:
    """Target ratio rows alpha^{i,j}, i = 1..n-1, j = 1..n+1 (1-based keys)."""

    n: int
    rows: dict

    def row(self, i: int) -> tuple:
        return self.rows[i]


def alpha_table(n: int, tau) -> AlphaTable:
    """Rows from the theta ladder theta_i = (1 + tau_{n-i})^{-1}.

    Row i: theta_i/i up to column i, then theta_{i+1} - theta_i, then
    (1 - theta_{i+1})/(n - i).  Verifies before returning: rows sum to 1,
    are weakly increasing, and their partial sums stay above theta_j with
    equality exactly at columns i and i+1.
    """
    tau = tuple(ExtendedRational.parse(t) for t in tau)
    report = validate_tau(n, tau)
    if not report.ok:
        raise InvalidTau("; ".join(report.violations))
    theta = {i: inv_one_plus(tau[n - i]) for i in range(1, n + 1)}

    rows = {}
    for i in range(1, n):
        row = []
        for j in range(1, n + 2):
            if j <= i:
                row.append(theta[i] / i)
            elif j == i + 1:
                row.append(theta[i + 1] - theta[i])
            else:
                row.append((1 - theta[i + 1]) / (n - i))
        rows[i] = tuple(row)

    for i, row in rows.items():
        if sum(row) != 1:
            raise InvalidTau(f"alpha row {i} sums to {rat_str(sum(row))}, not 1")
        for j in range(n):
            if row[j] > row[j + 1]:
                raise InvalidTau(f"alpha row {i} decreases at column {j + 1}")
        partial = Fraction(0)
        for j in range(1, n + 1):
            partial += row[j - 1]
            if partial < theta[j]:
                raise InvalidTau(
                    f"alpha row {i} partial sum at column {j} below its floor"
                )
            if j in (i, i + 1) and partial != theta[j]:
                raise InvalidTau(
                    f"alpha row {i} partial sum at column {j} must equal its floor"
                )
    return AlphaTable(n=n, rows=rows)


def _boxes(n: int, k: int):
    """(gap, lo1, hi1, loN, hiN) for a band-k row."""
    unit = Fraction(1, (k + 1) * (n + 1))
    return Fraction(1, 4 * n * n * k), unit, k * unit, (k + 3) * unit, 1 - unit


def _cell_feasibility(n: int, k: int):
    """(feasible, feasible_with_loN_dropped) for the band-k constraint cell.

    The cell is a polytope and the coordinate sum is linear, so it meets
    the sum-1 plane iff 1 sits between the minimal and maximal sums.
    """
    g, lo1, hi1, loN, hiN = _boxes(n, k)
    chain = sum(lo1 + j * g for j in range(1, n))
    min_sum_full = lo1 + chain + max(loN, lo1 + n * g)
    min_sum_dropped = lo1 + chain + (lo1 + n * g)
    top_chain = sum(hiN - (n + 1 - j) * g for j in range(2, n + 1))
    max_sum = hi1 + top_chain + hiN
    top_ok = hiN - (n - 1) * g >= hi1 + g
    feasible = top_ok and min_sum_full <= 1 <= max_sum
    dropped = top_ok and min_sum_dropped <= 1 <= max_sum
    return feasible, dropped


def _make_row(alpha_row, n: int, k: int):
    """One base row: clamp endpoints, space the chain, repair the sum.

    Returns (row, relaxed).  relaxed means the lower bound of the top box
    was provably unsatisfiable for this cell and was dropped; the row then
    keeps the top entry as high as the remaining constraints allow.
    """
    g, lo1, hi1, loN, hiN = _boxes(n, k)
    feasible, dropped = _cell_feasibility(n, k)
    relaxed = False
    if not feasible:
        if not dropped:
            raise ConstraintInfeasible(
                f"cell (k={k}) admits no row even without its top lower bound"
            )
        relaxed = True

    b = [None] * (n + 1)
    b[0] = min(max(alpha_row[0], lo1), hi1)
    for j in range(1, n):
        b[j] = max(alpha_row[j], b[j - 1] + g)
    b[n] = max(min(max(alpha_row[n], loN), hiN), b[n - 1] + g)
    for j in range(n - 1, 0, -1):
        b[j] = min(b[j], b[j + 1] - g)

    floor_n = (b[n - 1] + g) if relaxed else max(loN, b[n - 1] + g)
    deficit = 1 - sum(b)
    for _ in range(3):
        if deficit == 0:
            break
        if deficit > 0:
            for j in range(n - 1, 0, -1):
                room = b[j + 1] - g - b[j]
                take = min(room, deficit) if room > 0 else Fraction(0)
                b[j] += take
                deficit -= take
            take = min(hiN - b[n], deficit)
            if take > 0:
                b[n] += take
                deficit -= take
            room = min(hi1, b[1] - g) - b[0]
            take = min(room, deficit) if room > 0 else Fraction(0)
            b[0] += take
            deficit -= take
        else:
            need = -deficit
            for j in range(1, n):
                slack = b[j] - (b[j - 1] + g)
                take = min(slack, need) if slack > 0 else Fraction(0)
                b[j] -= take
                need -= take
            floor_n = (b[n - 1] + g) if relaxed else max(loN, b[n - 1] + g)
            take = min(b[n] - floor_n, need)
            if take > 0:
                b[n] -= take
                need -= take
            take = min(b[0] - lo1, need)
            if take > 0:
                b[0] -= take
                need -= take
            deficit = -need

    if deficit != 0:
        raise ConstraintInfeasible(
            f"cell (k={k}): sum repair stuck {rat_str(deficit)} away from 1"
        )
    return tuple(b), relaxed


def _check_row(row, alpha_row, n, k, relaxed, cell):
    """Exact post-validation of one base row; raises naming the constraint."""
    g, lo1, hi1, loN, hiN = _boxes(n, k)
    if sum(row) != 1:
        raise ConstraintInfeasible(f"{cell}: sum {rat_str(sum(row))} != 1")
    for j in range(n):
        if row[j + 1] - row[j] < g:
            raise ConstraintInfeasible(
                f"{cell}: spacing at column {j + 1} is "
                f"{rat_str(row[j + 1] - row[j])} < {rat_str(g)}"
            )
    if not lo1 <= row[0] <= hi1:
        raise ConstraintInfeasible(f"{cell}: first entry outside its box")
    if row[n] > hiN:
        raise ConstraintInfeasible(f"{cell}: top entry above its box")
    if not relaxed and row[n] < loN:
        raise ConstraintInfeasible(f"{cell}: top entry below its box")
    decay = max(abs(a - b) for a, b in zip(row, alpha_row))
    if decay > Fraction(2, k):
        raise ConstraintInfeasible(
            f"{cell}: distance to alpha {rat_str(decay)} exceeds 2/{k}"
        )


@dataclass(frozen=True)
class BetaTables:
    """Base and delta-perturbed weight rows per (band k, stage i).

    Stored for k = 1..K+1 and i = 1..n-1; row(k, n) resolves the alias to
    row(k+1, 1).  relaxed_cells lists the (k, i) whose top box lower bound
    was provably unsatisfiable and therefore dropped.
    """

    n: int
    K: int
    gamma: Fraction
    delta: Fraction
    base: dict
    perturbed: dict
    relaxed_cells: frozenset = field(default=frozenset())

    def row(self, k: int, i: int, perturbed: bool = False) -> tuple:
        if i == self.n:
            k, i = k + 1, 1
        return (self.perturbed if perturbed else self.base)[(k, i)]


def _grid_from_base(n, gamma, base_row, K):
    """T_k^i from the exact recursion over base rows.

    base_row(k, i) must resolve the alias itself.  Returns (T, Tki) with
    T[k] for k = 1..K+1 and Tki[(k, i)] for k = 1..K, i = 1..n.
    """
    T = {1: 128 * n ** 4 * gamma}
    Tki = {}
    for k in range(1, K + 1):
        Tki[(k, 1)] = T[k]
        for i in range(1, n):
            top = base_row(k, i)[n] * Tki[(k, i)] - (n + 1) * gamma
            Tki[(k, i + 1)] = top / base_row(k, i + 1)[0]
        T[k + 1] = Tki[(k, n)]
    return T, Tki


def beta_tables(n, tau, gamma, delta, K) -> BetaTables:
    """All rows for bands 1..K+1 plus their delta variants, fully validated.

    The delta variant moves the top entry up by delta/k, moves the first
    entry so the grid recursion is preserved across the shared grid, and
    compensates in column 2; columns 3..n are untouched.
    """
    gamma, delta = rat(gamma), rat(delta)
    alpha = alpha_table(n, tau)
    base = {}
    relaxed = set()
    for k in range(1, K + 2):
        for i in range(1, n):
            row, was_relaxed = _make_row(alpha.row(i), n, k)
            _check_row(row, alpha.row(i), n, k, was_relaxed, f"cell (k={k}, i={i})")
            base[(k, i)] = row
            if was_relaxed:
                relaxed.add((k, i))

    def base_row(k, i):
        if i == n:
            k, i = k + 1, 1
        return base[(k, i)]

    T, Tki = _grid_from_base(n, gamma, base_row, K)

    perturbed = {}
    for (k, i), row in base.items():
        p = list(row)
        p[n] = row[n] + delta / k
        if (k, i) == (1, 1):
            pass
        elif i >= 2:
            p[0] = row[0] + (delta / k) * Tki[(k, i - 1)] / Tki[(k, i)]
        else:
            p[0] = row[0] + (delta / (k - 1)) * Tki[(k - 1, n - 1)] / T[k]
        p[1] = row[0] + row[1] + row[n] - p[0] - p[n]
        perturbed[(k, i)] = tuple(p)

    tables = BetaTables(
        n=n,
        K=K,
        gamma=gamma,
        delta=delta,
        base=base,
        perturbed=perturbed,
        relaxed_cells=frozenset(relaxed),
    )
    for (k, i), row in base.items():
        p = perturbed[(k, i)]
        if sum(p) != 1:
            raise ConstraintInfeasible(f"cell (k={k}, i={i}): delta row sum != 1")
        if p[n] - row[n] != delta / k:
            raise ConstraintInfeasible(f"cell (k={k}, i={i}): delta top shift wrong")
        if p[0] + p[1] + p[n] != row[0] + row[1] + row[n]:
            raise ConstraintInfeasible(f"cell (k={k}, i={i}): three-term sum broken")
        for j in range(2, n):
            if p[j] != row[j]:
                raise ConstraintInfeasible(
                    f"cell (k={k}, i={i}): interior column {j + 1} moved"
                )
    return tables


@dataclass(frozen=True)
class TimeGrid:
    """T[k] (k = 1..K+1, with T[K+1] = Tki[(K, n)]) and Tki[(k, i)]."""

    n: int
    K: int
    gamma: Fraction
    T: dict
    Tki: dict


def time_grid(n, gamma, beta: BetaTables, K) -> TimeGrid:
    """Rebuild the grid from base rows and validate every bound exactly.

    Checks strict growth, the depth floor T_k >= 32n^4(k+1)^2 gamma, and
    the delta-consistency identity that ties the perturbed first entries
    to the shared grid.
    """
    gamma = rat(gamma)
    T, Tki = _grid_from_base(n, gamma, lambda k, i: beta.row(k, i), K)
    if T[1] != 128 * n ** 4 * gamma:
        raise GrowthViolation("T_1 != 128 n^4 gamma")
    for k in range(1, K + 2):
        if T[k] < 32 * n ** 4 * (k + 1) ** 2 * gamma:
            raise GrowthViolation(
                f"T_{k} = {rat_str(T[k])} below 32 n^4 (k+1)^2 gamma"
            )
    for k in range(1, K + 1):
        for i in range(1, n):
            if not Tki[(k, i + 1)] > Tki[(k, i)]:
                raise GrowthViolation(f"grid not strictly increasing at (k={k}, i={i})")
    for k in range(1, K + 1):
        for i in range(1, n):
            lhs = (beta.row(k, i + 1, True)[0] - beta.row(k, i + 1)[0]) * Tki[(k, i + 1)]
            rhs = (beta.delta / k) * Tki[(k, i)]
            if lhs != rhs:
                raise GrowthViolation(
                    f"delta-consistency identity fails at (k={k}, i={i})"
                )
    return TimeGrid(n=n, K=K, gamma=gamma, T=T, Tki=Tki)


def head_piece(n, row, T1) -> RoySystem:
    """The start piece on [0, T_1]: all components climb together at slope
    1/(n+1), then peel off bottom-up until component j rests at row[j]*T_1."""
    pts = [Fraction(0)]
    for d in range(0, n + 1):
        pts.append((sum(row[:d]) + (n + 1 - d) * row[d]) * T1)
    comps = []
    for j in range(n + 1):
        vals = [Fraction(0)] + [row[min(j, d - 1)] * T1 for d in range(1, n + 2)]
        comps.append(PLMap(tuple(pts), tuple(vals)))
    return RoySystem(n=n, components=tuple(comps))


@dataclass(frozen=True)
class Construction:
    """Everything one run produces, for diagnostics and serialization."""

    params: ConstructionParams
    alpha: AlphaTable
    beta: BetaTables
    grid: TimeGrid
    system: RoySystem
    blocks: tuple


def construction(params: ConstructionParams) -> Construction:
    """Run the full pipeline and glue head plus all blocks."""
    n, K = params.n, params.K
    alpha = alpha_table(n, params.tau)
    beta = beta_tables(n, params.tau, params.gamma, params.delta, K)
    grid = time_grid(n, params.gamma, beta, K)

    pieces = [head_piece(n, beta.row(1, 1, True), grid.T[1])]
    blocks = []
    for k in range(1, K + 1):
        for i in range(1, n):
            p = BlockParams(
                n=n,
                gamma=params.gamma,
                t_minus=grid.Tki[(k, i)],
                t_plus=grid.Tki[(k, i + 1)],
                a_minus=beta.row(k, i, True),
                a_plus=beta.row(k, i + 1, True),
            )
            sys_ki, bps = build_block(p)
            pieces.append(sys_ki)
            blocks.append((k, i, p, bps))

    comps = tuple(
        concat([piece.components[j] for piece in pieces]) for j in range(n + 1)
    )
    system = RoySystem(n=n, components=comps)
    return Construction(
        params=params, alpha=alpha, beta=beta, grid=grid, system=system, blocks=tuple(blocks)
    )


def assemble(params: ConstructionParams) -> RoySystem:
    """The assembled system on [0, T_{K+1}]."""
    return construction(params).system


def _min_f_window(p1: PLMap, n: int, a, b):
    """Exact min of t/(n+1) - P_1(t) over [a, b]; smallest t wins ties."""
    pts = [a] + [t for t in p1.breakpoints if a < t < b] + [b]
    best_t, best_v = None, None
    for t in pts:
        v = t / Fraction(n + 1) - p1(t)
        if best_v is None or v < best_v:
            best_t, best_v = t, v
    return best_v, best_t


def system_diagnostics(system: RoySystem, grid: TimeGrid, params: ConstructionParams) -> dict:
    """Exact per-run trend data for the three asymptotic targets.

    per_block_min_f: min of the record f over each block window (each
    should sit exactly at gamma).  global_min_f: min of f over the block
    region [T_1, T_{K+1}] (the head ramps up from f = 0 and is excluded).
    max_f_tail: f at each band's right end, the divergence proxy.
    ratio_min[(k, i, d)]: min of the d-partial-sum ratio over the block,
    by the endpoint formula.
    """
    n, K = params.n, params.K
    beta = beta_tables(n, params.tau, params.gamma, params.delta, K)
    p1 = system.components[0]

    per_block = []
    ratio_min = {}
    for k in range(1, K + 1):
        for i in range(1, n):
            lo, hi = grid.Tki[(k, i)], grid.Tki[(k, i + 1)]
            per_block.append(_min_f_window(p1, n, lo, hi)[0])
            for d in range(1, n + 1):
                left = sum(beta.row(k, i, True)[:d])
                right = sum(beta.row(k, i + 1, True)[:d])
                ratio_min[(k, i, d)] = min(left, right)

    global_min_f = _min_f_window(p1, n, grid.T[1], grid.T[K + 1])[0]
    max_f_tail = [
        (Fraction(1, n + 1) - beta.row(k, n, True)[0]) * grid.Tki[(k, n)]
        for k in range(1, K + 1)
    ]
    return {
        "per_block_min_f": per_block,
        "global_min_f": global_min_f,
        "max_f_tail": max_f_tail,
        "ratio_min": ratio_min,
    }
