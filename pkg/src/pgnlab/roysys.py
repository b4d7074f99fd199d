"""Rigid (n+1)-component piecewise-linear systems and their axioms.

A valid system has n+1 nonnegative ordered components summing to t, and on
each open piece exactly one contiguous index group moving: the group's
components coincide and share slope 1/(group size) while every other
component is flat.  At a kink, when the departing group starts no later
than the arriving group ends, all components spanned by the two groups
must meet at one common value.

All checks are exact.  Each component is affine on every piece of the
merged breakpoint partition, so finitely many rational comparisons decide
each axiom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainMismatch
from .ratpl import PLMap, merged_breakpoints, rat_str


@dataclass(frozen=True)
class RoySystem:
    """n+1 piecewise-linear components over one common domain in [0, inf)."""

    n: int
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if len(comps) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} components, got {len(comps)}")
        dom = comps[0].domain
        for c in comps[1:]:
            if c.domain != dom:
                raise DomainMismatch(f"component domain {c.domain} != {dom}")
        if dom[0] < 0:
            raise ValueError("domain must lie in [0, inf)")
        object.__setattr__(self, "components", comps)

    @property
    def domain(self):
        return self.components[0].domain

    def to_json_dict(self) -> dict:
        return {"n": self.n, "components": [c.to_json_dict() for c in self.components]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "RoySystem":
        return cls(int(data["n"]), tuple(PLMap.from_json_dict(c) for c in data["components"]))


@dataclass(frozen=True)
class AxiomReport:
    """Validation outcome: ok iff violations is empty.

    Each violation is (axiom, location, message) with axiom one of
    "order", "sum", "slope-group", "kink" and location a rational t or an
    open-piece pair (a, b).
    """

    ok: bool
    violations: tuple = field(default=())

    def to_json_dict(self) -> dict:
        def loc_json(loc):
            if isinstance(loc, tuple):
                return [rat_str(loc[0]), rat_str(loc[1])]
            return rat_str(loc)

        return {
            "ok": self.ok,
            "violations": [
                {"axiom": a, "location": loc_json(loc), "message": m}
                for a, loc, m in self.violations
            ],
        }


def _piece_group(slopes):
    """Classify one piece's slopes: (r1, r2) 1-based, or an error string.

    A conforming piece has a nonempty contiguous set of equal nonzero
    slopes 1/(group size) and zeros elsewhere.
    """
    moving = [j for j, s in enumerate(slopes) if s != 0]
    if not moving:
        return None, "no component moves (group must be nonempty)"
    r1, r2 = moving[0], moving[-1]
    if moving != list(range(r1, r2 + 1)):
        return None, f"moving indices {[j + 1 for j in moving]} are not contiguous"
    want = Fraction(1, r2 - r1 + 1)
    for j in moving:
        if slopes[j] != want:
            return None, (
                f"component {j + 1} has slope {rat_str(slopes[j])}, "
                f"group of size {r2 - r1 + 1} needs {rat_str(want)}"
            )
    return (r1 + 1, r2 + 1), None


def validate_roy(system: RoySystem) -> AxiomReport:
    """Check all axioms exactly over the merged breakpoint partition.

    Ordering and the sum identity are verified at every merged breakpoint
    and at one interior point of each piece (affine per piece, so this is
    exhaustive, not a sample).  Violations are reported, never raised.
    """
    comps = list(system.components)
    grid = merged_breakpoints(comps)
    violations = []

    vals = [[c(t) for c in comps] for t in grid]
    mids = [(a + b) / 2 for a, b in zip(grid, grid[1:])]
    mid_vals = [[c(t) for c in comps] for t in mids]

    def check_point(t, v):
        if v[0] < 0:
            violations.append(("order", t, f"P_1({rat_str(t)}) = {rat_str(v[0])} < 0"))
        for j in range(len(v) - 1):
            if v[j] > v[j + 1]:
                violations.append(
                    ("order", t, f"P_{j + 1}({rat_str(t)}) > P_{j + 2}({rat_str(t)})")
                )
        total = sum(v)
        if total != t:
            violations.append(
                ("sum", t, f"sum = {rat_str(total)} != t = {rat_str(t)}")
            )

    for t, v in zip(grid, vals):
        check_point(t, v)
    for t, v in zip(mids, mid_vals):
        check_point(t, v)

    # Slope groups per piece; value coincidence checked at both piece ends.
    groups = []
    for k in range(len(grid) - 1):
        dt = grid[k + 1] - grid[k]
        slopes = [(vals[k + 1][j] - vals[k][j]) / dt for j in range(len(comps))]
        group, err = _piece_group(slopes)
        piece = (grid[k], grid[k + 1])
        if group is None:
            violations.append(("slope-group", piece, err))
            groups.append(None)
            continue
        r1, r2 = group
        left = {vals[k][j - 1] for j in range(r1, r2 + 1)}
        right = {vals[k + 1][j - 1] for j in range(r1, r2 + 1)}
        if len(left) > 1 or len(right) > 1:
            violations.append(
                (
                    "slope-group",
                    piece,
                    f"components {r1}..{r2} move together but do not coincide",
                )
            )
        groups.append(group)

    for k in range(1, len(grid) - 1):
        left, right = groups[k - 1], groups[k]
        if left is None or right is None:
            continue
        r1, _ = left
        _, s2 = right
        if r1 <= s2:
            t = grid[k]
            meet = {vals[k][j - 1] for j in range(r1, s2 + 1)}
            if len(meet) > 1:
                violations.append(
                    (
                        "kink",
                        t,
                        f"components {r1}..{s2} must share one value at t={rat_str(t)}",
                    )
                )

    return AxiomReport(ok=not violations, violations=tuple(violations))


def nonequivalent(s1: RoySystem, s2: RoySystem):
    """Decide whether two systems differ by more than 10(n+1)^2(n+10).

    The component gap is piecewise affine, so its max-norm sup over the
    common domain is attained at a merged breakpoint.  Returns
    (answer, witness_t or None, gap); witness_t is set only on a positive
    answer.  Symmetric in its arguments.
    """
    if s1.n != s2.n:
        raise DomainMismatch(f"n differs: {s1.n} vs {s2.n}")
    if s1.domain != s2.domain:
        raise DomainMismatch(f"domains differ: {s1.domain} vs {s2.domain}")
    threshold = 10 * (s1.n + 1) ** 2 * (s1.n + 10)
    grid = merged_breakpoints(list(s1.components) + list(s2.components))
    gap = Fraction(0)
    witness = None
    for t in grid:
        local = max(abs(a(t) - b(t)) for a, b in zip(s1.components, s2.components))
        if local > gap:
            gap = local
            witness = t
    answer = gap > threshold
    return answer, (witness if answer else None), gap
