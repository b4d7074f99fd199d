"""Exact rational scalars and piecewise-linear maps.

Every scalar that matters is an unbounded rational (stdlib Fraction, always
lowest terms with positive denominator); floats appear only at reporting
boundaries.  PLMap is the shared substrate: a continuous piecewise-linear
function on a closed interval, stored as strictly increasing rational
breakpoints with one rational value each.  All operations are pure and all
results exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DiscontinuousJoin, DomainMismatch, GapOrOverlap, OutOfDomain

Rational = Fraction


def rat(value) -> Fraction:
    """Parse a rational from an int, Fraction, or a "p/q" / "p" string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not a rational: {value!r}")


def rat_str(value: Fraction) -> str:
    """Lowest-terms "p/q" string ("p" when the denominator is 1)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class ExtendedRational:
    """A rational or +infinity.

    +inf compares greater than every rational.  The table conventions
    (1 + inf)^{-1} == 0 and inf/(inf + c) == 1 live in inv_one_plus and
    frac_of_one_plus below.
    """

    __slots__ = ("value",)

    def __init__(self, value):
        if value is None or (isinstance(value, float) and value == float("inf")):
            self.value = None
        else:
            self.value = rat(value)

    @property
    def is_inf(self) -> bool:
        return self.value is None

    @classmethod
    def parse(cls, text) -> "ExtendedRational":
        if isinstance(text, ExtendedRational):
            return text
        if isinstance(text, str) and text.strip().lower() in ("inf", "+inf", "infinity", "oo"):
            return cls(None)
        return cls(rat(text))

    def _key(self):
        return (1,) if self.is_inf else (0, self.value)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExtendedRational(other)
        if not isinstance(other, ExtendedRational):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExtendedRational(other)
        return self._key() < other._key()

    def __le__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExtendedRational(other)
        return self._key() <= other._key()

    def __gt__(self, other):
        return not self.__le__(other)

    def __ge__(self, other):
        return not self.__lt__(other)

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "inf" if self.is_inf else rat_str(self.value)


INF = ExtendedRational(None)


def inv_one_plus(tau: ExtendedRational) -> Fraction:
    """(1 + tau)^{-1}, with the convention that this is 0 for tau = inf."""
    if tau.is_inf:
        return Fraction(0)
    return 1 / (1 + tau.value)


def frac_of_one_plus(tau: ExtendedRational) -> Fraction:
    """tau/(1 + tau), with the convention that this is 1 for tau = inf."""
    if tau.is_inf:
        return Fraction(1)
    return tau.value / (1 + tau.value)


@dataclass(frozen=True)
class PLMap:
    """Continuous piecewise-linear map on [breakpoints[0], breakpoints[-1]].

    breakpoints: strictly increasing rationals, both endpoints included.
    values: one rational per breakpoint; evaluation between breakpoints is
    the affine interpolation of the neighboring pairs.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(rat(b) for b in self.breakpoints)
        vals = tuple(rat(v) for v in self.values)
        if len(bps) != len(vals):
            raise ValueError("breakpoints and values must have equal length")
        if len(bps) < 2:
            raise ValueError("need at least two breakpoints")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @property
    def t_lo(self) -> Fraction:
        return self.breakpoints[0]

    @property
    def t_hi(self) -> Fraction:
        return self.breakpoints[-1]

    @property
    def domain(self):
        return (self.breakpoints[0], self.breakpoints[-1])

    def piece_slope(self, k: int) -> Fraction:
        """Slope on the open piece (breakpoints[k], breakpoints[k+1])."""
        dt = self.breakpoints[k + 1] - self.breakpoints[k]
        return (self.values[k + 1] - self.values[k]) / dt

    def __call__(self, t) -> Fraction:
        t = rat(t)
        bps = self.breakpoints
        if t < bps[0] or t > bps[-1]:
            raise OutOfDomain(f"t={rat_str(t)} outside [{rat_str(bps[0])}, {rat_str(bps[-1])}]")
        lo, hi = 0, len(bps) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bps[mid] <= t:
                lo = mid
            else:
                hi = mid
        if t == bps[lo]:
            return self.values[lo]
        if t == bps[hi]:
            return self.values[hi]
        return self.values[lo] + self.piece_slope(lo) * (t - bps[lo])

    def to_json_dict(self) -> dict:
        return {
            "breakpoints": [rat_str(b) for b in self.breakpoints],
            "values": [rat_str(v) for v in self.values],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PLMap":
        return cls(
            tuple(rat(b) for b in data["breakpoints"]),
            tuple(rat(v) for v in data["values"]),
        )


def eval_with_slopes(pl: PLMap, t):
    """Value plus one-sided slopes at t.

    slope_left is None iff t is the left endpoint, slope_right None iff t is
    the right endpoint; between breakpoints both equal the piece slope.
    """
    t = rat(t)
    bps = pl.breakpoints
    if t < bps[0] or t > bps[-1]:
        raise OutOfDomain(f"t={rat_str(t)} outside [{rat_str(bps[0])}, {rat_str(bps[-1])}]")
    value = pl(t)
    if t == bps[0]:
        return value, None, pl.piece_slope(0)
    if t == bps[-1]:
        return value, pl.piece_slope(len(bps) - 2), None
    for k in range(len(bps) - 1):
        if bps[k] < t < bps[k + 1]:
            s = pl.piece_slope(k)
            return value, s, s
        if t == bps[k + 1]:
            return value, pl.piece_slope(k), pl.piece_slope(k + 1)
    raise AssertionError("unreachable")


def merged_breakpoints(maps) -> list:
    """Sorted union of the breakpoints of maps sharing one domain."""
    dom = maps[0].domain
    for m in maps[1:]:
        if m.domain != dom:
            raise DomainMismatch(f"domains differ: {m.domain} vs {dom}")
    points = set()
    for m in maps:
        points.update(m.breakpoints)
    return sorted(points)


def extremize(maps, coeff_t, coeffs, sense: str):
    """Exact extremum of coeff_t*t + sum_i coeffs[i]*maps[i](t) over the domain.

    The combination is piecewise affine, so the extremum is attained on the
    merged breakpoint set; ties resolve to the smallest t.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    if len(coeffs) != len(maps):
        raise ValueError("coeffs length must match maps")
    coeff_t = rat(coeff_t)
    coeffs = [rat(c) for c in coeffs]
    best_t = None
    best_v = None
    for t in merged_breakpoints(list(maps)):
        v = coeff_t * t + sum(c * m(t) for c, m in zip(coeffs, maps))
        if best_v is None or (sense == "min" and v < best_v) or (sense == "max" and v > best_v):
            best_t, best_v = t, v
    return best_t, best_v


def concat(pieces) -> PLMap:
    """Glue PLMaps over abutting domains into one map.

    Consecutive domains must share their endpoint with equal values there;
    the duplicated joint breakpoint is collapsed.  Interior collinear
    breakpoints are kept (no implicit normalization).
    """
    pieces = list(pieces)
    if not pieces:
        raise ValueError("nothing to concatenate")
    bps = list(pieces[0].breakpoints)
    vals = list(pieces[0].values)
    for nxt in pieces[1:]:
        if nxt.t_lo != bps[-1]:
            raise GapOrOverlap(
                f"piece starts at {rat_str(nxt.t_lo)} but previous ends at {rat_str(bps[-1])}"
            )
        if nxt.values[0] != vals[-1]:
            raise DiscontinuousJoin(
                f"value {rat_str(nxt.values[0])} != {rat_str(vals[-1])} at t={rat_str(nxt.t_lo)}"
            )
        bps.extend(nxt.breakpoints[1:])
        vals.extend(nxt.values[1:])
    return PLMap(tuple(bps), tuple(vals))


def normalize(pl: PLMap) -> PLMap:
    """Drop interior breakpoints where the two neighboring slopes agree.

    Only ever called explicitly: validators reason about the original
    partition.
    """
    bps = [pl.breakpoints[0]]
    vals = [pl.values[0]]
    for k in range(1, len(pl.breakpoints) - 1):
        if pl.piece_slope(k - 1) != pl.piece_slope(k):
            bps.append(pl.breakpoints[k])
            vals.append(pl.values[k])
    bps.append(pl.breakpoints[-1])
    vals.append(pl.values[-1])
    return PLMap(tuple(bps), tuple(vals))
