"""One building block of the rigid system, on a window [T-, T+].

Parameters are two unit-sum weight lists a- and a+ tied by the exact
compatibility equation a+^1 T+ = a-^{n+1} T- - (n+1)*gamma, with a spacing
floor (a^{j+1}-a^j)*T >= 4n^2*gamma.  The block walks the components from
the profile a-^j T- at T- to a+^j T+ at T+ through n+2 staged slope
groups, and its running record f(t) = t/(n+1) - P_1(t) bottoms out at
exactly gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParams
from .ratpl import PLMap, extremize, merged_breakpoints, rat, rat_str
from .roysys import RoySystem


@dataclass(frozen=True)
class BlockParams:
    """Inputs for one block.  Plain record; validate_block_params judges it."""

    n: int
    gamma: Fraction
    t_minus: Fraction
    t_plus: Fraction
    a_minus: tuple
    a_plus: tuple

    def __post_init__(self):
        object.__setattr__(self, "gamma", rat(self.gamma))
        object.__setattr__(self, "t_minus", rat(self.t_minus))
        object.__setattr__(self, "t_plus", rat(self.t_plus))
        object.__setattr__(self, "a_minus", tuple(rat(a) for a in self.a_minus))
        object.__setattr__(self, "a_plus", tuple(rat(a) for a in self.a_plus))

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": rat_str(self.gamma),
            "t_minus": rat_str(self.t_minus),
            "t_plus": rat_str(self.t_plus),
            "a_minus": [rat_str(a) for a in self.a_minus],
            "a_plus": [rat_str(a) for a in self.a_plus],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BlockParams":
        return cls(
            int(data["n"]),
            rat(data["gamma"]),
            rat(data["t_minus"]),
            rat(data["t_plus"]),
            tuple(rat(a) for a in data["a_minus"]),
            tuple(rat(a) for a in data["a_plus"]),
        )


@dataclass(frozen=True)
class BlockBreakpoints:
    """Stage boundaries T- = R_1 < ... < R_{n+2} = S_0 < ... < S_n = T+.

    schedule records which 1-based index group moves on each stage, as
    (t_start, t_end, r1, r2), so group detection downstream can be checked
    against intent.
    """

    R: tuple
    S: tuple
    schedule: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "R": [rat_str(r) for r in self.R],
            "S": [rat_str(s) for s in self.S],
            "schedule": [
                [rat_str(a), rat_str(b), r1, r2] for a, b, r1, r2 in self.schedule
            ],
        }


def validate_block_params(p: BlockParams) -> list:
    """Exact check of every constraint; returns a list of messages, empty if ok."""
    problems = []
    n = p.n
    if n < 2:
        problems.append(f"n must be >= 2, got {n}")
        return problems
    if p.gamma <= 0:
        problems.append(f"gamma must be positive, got {rat_str(p.gamma)}")
    if not (0 < p.t_minus < p.t_plus):
        problems.append(
            f"need 0 < t_minus < t_plus, got {rat_str(p.t_minus)}, {rat_str(p.t_plus)}"
        )
    for name, a in (("a_minus", p.a_minus), ("a_plus", p.a_plus)):
        if len(a) != n + 1:
            problems.append(f"{name} must have {n + 1} entries, got {len(a)}")
            continue
        if a[0] <= 0:
            problems.append(f"{name}[1] must be positive")
        for j in range(n):
            if not a[j] < a[j + 1]:
                problems.append(f"{name} not strictly increasing at position {j + 1}")
        total = sum(a)
        if total != 1:
            problems.append(f"{name} sums to {rat_str(total)}, must be 1")
    if problems:
        return problems

    lhs = p.a_plus[0] * p.t_plus
    rhs = p.a_minus[n] * p.t_minus - (n + 1) * p.gamma
    if lhs != rhs:
        problems.append(
            f"compatibility fails: a_plus[1]*t_plus = {rat_str(lhs)} "
            f"!= {rat_str(rhs)} = a_minus[{n + 1}]*t_minus - {n + 1}*gamma"
        )
    floor = 4 * n * n * p.gamma
    for name, a, t in (("a_minus", p.a_minus, p.t_minus), ("a_plus", p.a_plus, p.t_plus)):
        for j in range(n):
            spread = (a[j + 1] - a[j]) * t
            if spread < floor:
                problems.append(
                    f"{name} spacing at position {j + 1}: "
                    f"{rat_str(spread)} < {rat_str(floor)}"
                )
    return problems


def block_grid(p: BlockParams):
    """Stage boundaries and the value of every component at each of them.

    Returns (points, values, schedule, breakpoints): points is the merged
    R/S grid, values[k][j] the 0-based component j at points[k], schedule
    the 1-based moving group per stage.
    """
    n = p.n
    am, ap = p.a_minus, p.a_plus
    tm, tp, g = p.t_minus, p.t_plus, p.gamma

    R = [tm]
    for d in range(2, n + 1):
        R.append((sum(am[d:]) + d * am[d - 1]) * tm)
    R.append((n + 1) * am[n] * tm - n * (n + 1) * g)
    R.append((n + 1) * am[n] * tm - (n + 1) * g)
    # S_0 comes from the a+ side; the compatibility equation makes it R_{n+2}.
    S = [(n + 1) * ap[0] * tp + (n * n + n) * g]
    for d in range(1, n + 1):
        S.append((sum(ap[:d]) + (n + 1 - d) * ap[d]) * tp)
    if S[0] != R[-1]:
        raise InvalidParams(
            f"S_0 = {rat_str(S[0])} != R_{n + 2} = {rat_str(R[-1])}"
        )

    def at_R(d1):
        # value profile at R_{d1} for 1 <= d1 <= n (d1 = index, 1-based)
        d = d1 - 1
        return [am[d] * tm if j <= d - 1 else am[j] * tm for j in range(n + 1)]

    profiles = [at_R(d1) for d1 in range(1, n + 1)]
    profiles.append([ap[0] * tp if j <= n - 1 else am[n] * tm for j in range(n + 1)])
    profiles.append([ap[0] * tp if j == 0 else am[n] * tm for j in range(n + 1)])
    for d in range(1, n + 1):
        profiles.append([ap[j] * tp if j <= d - 1 else ap[d] * tp for j in range(n + 1)])

    points = R + S[1:]
    schedule = []
    for d in range(1, n):
        schedule.append((R[d - 1], R[d], 1, d))
    schedule.append((R[n - 1], R[n], 1, n))
    schedule.append((R[n], R[n + 1], 2, n))
    for d in range(0, n):
        schedule.append((S[d], S[d + 1], d + 2, n + 1))

    bps = BlockBreakpoints(R=tuple(R), S=tuple(S), schedule=tuple(schedule))
    return points, profiles, schedule, bps


def build_block(p: BlockParams):
    """Construct the block's system.  Raises InvalidParams on any violation."""
    problems = validate_block_params(p)
    if problems:
        raise InvalidParams("; ".join(problems))
    points, profiles, _, bps = block_grid(p)

    # Defensive dedupe: a zero-length stage contributes no breakpoint.
    keep_pts = [points[0]]
    keep_profiles = [profiles[0]]
    for t, prof in zip(points[1:], profiles[1:]):
        if t == keep_pts[-1]:
            if prof != keep_profiles[-1]:
                raise InvalidParams(f"conflicting values at degenerate stage t={rat_str(t)}")
            continue
        keep_pts.append(t)
        keep_profiles.append(prof)

    comps = tuple(
        PLMap(tuple(keep_pts), tuple(prof[j] for prof in keep_profiles))
        for j in range(p.n + 1)
    )
    return RoySystem(n=p.n, components=comps), bps


def block_extrema(system: RoySystem, p: BlockParams) -> dict:
    """Exact extrema of the block's two tracked records.

    min_f / argmin_f: minimum of t/(n+1) - P_1(t) over the window and
    where it lands.  f_at_Tplus: the same record at T+.  min_ratio[d]:
    minimum of (P_1 + ... + P_d)(t)/t, which is piecewise monotone, so a
    breakpoint scan is exhaustive.
    """
    n = p.n
    p1 = system.components[0]
    argmin_f, min_f = extremize([p1], Fraction(1, n + 1), [Fraction(-1)], "min")
    f_at_tplus = p.t_plus / (n + 1) - p1(p.t_plus)

    grid = merged_breakpoints(list(system.components))
    min_ratio = {}
    for d in range(1, n + 1):
        best = None
        for t in grid:
            r = sum(system.components[j](t) for j in range(d)) / t
            if best is None or r < best:
                best = r
        min_ratio[d] = best
    return {
        "min_f": min_f,
        "argmin_f": argmin_f,
        "f_at_Tplus": f_at_tplus,
        "min_ratio": min_ratio,
    }
