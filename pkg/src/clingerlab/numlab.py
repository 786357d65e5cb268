"""Certified fractional-part experiments around ``theta = log_d D``.

Every real quantity is carried as an :class:`Enclosure`, a closed interval
with exact rational endpoints that provably contains it. Irrational
angles are turned into fixed-point enclosures ``[lo, hi] / 2**bits``
(integer square roots for surds, mpmath interval logarithms for logs),
so all later arithmetic is exact integer or rational arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import iv
from mpmath.libmp import to_man_exp

from ._prec import ivprec, precision_ceiling
from .radix import (DigitString, LanguageKind, LanguageSpec, best_approx_fraction, is_commensurable,
                    language_member)


class CertificationError(ArithmeticError):
    """A quantity could not be certified below the precision ceiling."""

    def __init__(self, query: str, bits: int):
        super().__init__(f"cannot certify {query} within {bits} bits")
        self.query = query
        self.bits = bits


class SearchFailure(RuntimeError):
    """A bounded witness search found nothing (which refutes nothing)."""


# -- enclosures ------------------------------------------------------------------


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError("empty enclosure")

    @classmethod
    def exact(cls, x) -> "Enclosure":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def within(self, other: "Enclosure") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __add__(self, other: "Enclosure | int | Fraction") -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.exact(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __abs__(self) -> "Enclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return Enclosure(-self.hi, -self.lo)
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def frac(self) -> "Enclosure | None":
        """Fractional part, or None when the interval meets an integer it
        cannot be placed on one side of."""
        base = math.floor(self.lo)
        if self.hi >= base + 1:
            return None
        return Enclosure(self.lo - base, self.hi - base)

    def to_dict(self) -> dict:
        return {"lo": _frac_str(self.lo), "hi": _frac_str(self.hi)}

    @classmethod
    def from_dict(cls, obj: dict) -> "Enclosure":
        return cls(Fraction(obj["lo"]), Fraction(obj["hi"]))

    def __str__(self):
        digits = max(6, -int(math.log10(float(self.width)))) if self.width else 12
        return f"[{float(self.lo):.{min(digits, 17)}g}, {float(self.hi):.{min(digits, 17)}g}]"


# -- angles ------------------------------------------------------------------------


def _mpf_fraction(value) -> Fraction:
    man, exp = to_man_exp(value)
    return Fraction(man) * Fraction(2) ** exp


@dataclass(frozen=True)
class Theta:
    """An angle: ``log_base(arg)``, ``sqrt(arg)`` or the rational ``arg/base``."""

    kind: str
    base: int
    arg: int

    def __post_init__(self):
        if self.kind == "log":
            if self.base < 2 or self.arg < 2:
                raise ValueError("log angles need radices >= 2")
            if is_commensurable(self.base, self.arg):
                raise ValueError(f"log_{self.base} {self.arg} is rational: radices are commensurable")
        elif self.kind == "sqrt":
            if self.arg < 1 or math.isqrt(self.arg) ** 2 == self.arg:
                raise ValueError(f"sqrt({self.arg}) is not irrational")
        elif self.kind == "rational":
            if self.base < 1:
                raise ValueError("denominator must be positive")
        else:
            raise ValueError(f"unknown angle kind {self.kind!r}")

    @classmethod
    def log(cls, d: int, D: int) -> "Theta":
        """``log_d D``, which must be irrational."""
        return cls("log", d, D)

    @classmethod
    def sqrt(cls, a: int) -> "Theta":
        return cls("sqrt", 1, a)

    @classmethod
    def rational(cls, x) -> "Theta":
        x = Fraction(x)
        return cls("rational", x.denominator, x.numerator)

    @property
    def exact(self) -> Fraction | None:
        return Fraction(self.arg, self.base) if self.kind == "rational" else None

    def label(self) -> str:
        if self.kind == "log":
            return f"log{self.base}({self.arg})"
        if self.kind == "sqrt":
            return f"sqrt({self.arg})"
        return _frac_str(self.exact)

    def fixed(self, bits: int) -> tuple[int, int]:
        """Integers ``lo <= theta * 2**bits <= hi``."""
        return _fixed(self, bits)

    def enclosure(self, bits: int = 128) -> Enclosure:
        if self.exact is not None:
            return Enclosure.exact(self.exact)
        lo, hi = self.fixed(bits)
        return Enclosure(Fraction(lo, 1 << bits), Fraction(hi, 1 << bits))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base, "arg": self.arg}

    @classmethod
    def from_dict(cls, obj: dict) -> "Theta":
        return cls(obj["kind"], obj["base"], obj["arg"])


def _floor_shift(man: int, shift: int) -> int:
    return man << shift if shift >= 0 else man >> -shift


@lru_cache(maxsize=256)
def _fixed(theta: Theta, bits: int) -> tuple[int, int]:
    if theta.kind == "sqrt":
        lo = math.isqrt(theta.arg << (2 * bits))
        return lo, lo + 1
    if theta.kind == "rational":
        num, den = theta.arg << bits, theta.base
        return num // den, -(-num // den)
    with ivprec(bits + 40):
        val = iv.log(theta.arg) / iv.log(theta.base)
        a, b = val._mpi_
    man_a, exp_a = to_man_exp(a)
    man_b, exp_b = to_man_exp(b)
    lo = _floor_shift(man_a, exp_a + bits)
    hi = -_floor_shift(-man_b, exp_b + bits)
    return lo, hi


def parse_theta(tokens: Sequence[str]) -> Theta:
    """``["log", "10", "2"]`` -> log10(2); ``["sqrt2"]`` / ``["sqrt", "2"]``;
    ``["rational", "3/2"]``."""
    head = tokens[0].lower()
    if head == "log" and len(tokens) == 3:
        return Theta.log(int(tokens[1]), int(tokens[2]))
    if head.startswith("sqrt") and len(tokens) == 1 and head[4:].isdigit():
        return Theta.sqrt(int(head[4:]))
    if head == "sqrt" and len(tokens) == 2:
        return Theta.sqrt(int(tokens[1]))
    if head == "rational" and len(tokens) == 2:
        return Theta.rational(Fraction(tokens[1]))
    raise ValueError(f"cannot parse angle {' '.join(tokens)!r}")


# -- fractional parts ------------------------------------------------------------------


DEFAULT_WIDTH = Fraction(1, 10**6)


@dataclass(frozen=True)
class FracValue:
    value: Enclosure
    bits: int           # working precision used (0 for exact angles)


def frac_multiple(theta: Theta, multiplier: int, width: Fraction = DEFAULT_WIDTH,
                  bits: int | None = None, ceiling: int | None = None) -> FracValue:
    """Certified ``{multiplier * theta}``: narrower than ``width`` and
    strictly between two integers. Precision doubles as needed."""
    exact = theta.exact
    if exact is not None:
        x = multiplier * exact
        return FracValue(Enclosure.exact(x - math.floor(x)), 0)
    ceiling = precision_ceiling() if ceiling is None else ceiling
    bits = bits or max(64, multiplier.bit_length() + 48)
    while bits <= ceiling:
        lo, hi = theta.fixed(bits)
        lo, hi = multiplier * lo, multiplier * hi
        whole = lo >> bits
        if (hi >> bits) == whole and lo & ((1 << bits) - 1) and (hi - lo) < width * (1 << bits):
            base = whole << bits
            return FracValue(Enclosure(Fraction(lo - base, 1 << bits), Fraction(hi - base, 1 << bits)),
                             bits)
        bits *= 2
    raise CertificationError(f"{{{multiplier}*{theta.label()}}}", ceiling)


def frac_scaled(theta: Theta, K: int, C: int, m: int, width: Fraction = DEFAULT_WIDTH,
                bits: int | None = None, ceiling: int | None = None) -> FracValue:
    """Certified ``{K * C**m * theta}``."""
    if K < 0 or C < 1 or m < 0:
        raise ValueError("need K >= 0, C >= 1, m >= 0")
    return frac_multiple(theta, K * C ** m, width, bits, ceiling)


def shifted_frac(x: Enclosure, theta: Theta, k: int, bits: int = 128) -> Enclosure | None:
    """Enclosure of ``{x + k*theta}`` (None if it straddles an integer)."""
    return (x + Enclosure(*_scale(theta, k, bits))).frac()


def _scale(theta: Theta, k: int, bits: int) -> tuple[Fraction, Fraction]:
    exact = theta.exact
    if exact is not None:
        return k * exact, k * exact
    lo, hi = theta.fixed(bits)
    return Fraction(k * lo, 1 << bits), Fraction(k * hi, 1 << bits)


# -- reports ---------------------------------------------------------------------


@dataclass
class WitnessReport:
    kind: str
    parameters: dict
    witnesses: list = field(default_factory=list)
    status: str = "ok"
    unknown: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "parameters": self.parameters,
                "status": self.status, "witnesses": self.witnesses, "unknown": self.unknown,
                "extra": self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "WitnessReport":
        return cls(obj["kind"], obj["parameters"], obj["witnesses"], obj["status"], obj["unknown"],
                   obj["extra"], obj["seed"])

    @classmethod
    def from_json(cls, text: str) -> "WitnessReport":
        return cls.from_dict(json.loads(text))

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# -- density ---------------------------------------------------------------------


def kronecker_density(theta: Theta, N: int, bins: int) -> WitnessReport:
    """Bin occupancy of ``{n theta}`` for ``1 <= n <= N`` with each point
    placed in its bin with certainty."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    counts = [0] * bins
    points = []
    exact = theta.exact
    bits = max(64, N.bit_length() + bins.bit_length() + 48)
    for n in range(1, N + 1):
        if exact is not None:
            v = n * exact
            v -= math.floor(v)
            counts[math.floor(v * bins)] += 1
            points.append(v)
            continue
        while True:
            lo, hi = theta.fixed(bits)
            lo, hi = n * lo, n * hi
            mask = (1 << bits) - 1
            if lo >> bits == hi >> bits:
                blo, bhi = ((lo & mask) * bins) >> bits, ((hi & mask) * bins) >> bits
                if blo == bhi:
                    counts[blo] += 1
                    points.append(Fraction((lo & mask) + (hi & mask), 1 << (bits + 1)))
                    break
            bits *= 2
            if bits > precision_ceiling():
                raise CertificationError(f"bin of {{{n}*{theta.label()}}}", bits)
    points.sort()
    gaps = [b - a for a, b in zip(points, points[1:])] + [1 + points[0] - points[-1]]
    return WitnessReport(
        "kronecker", {"theta": theta.to_dict(), "N": N, "bins": bins},
        extra={"histogram": counts, "occupied": sum(1 for c in counts if c), "min_gap": float(min(gaps)),
               "max_gap": float(max(gaps))})


# -- windows (pairs of consecutive scaled fractional parts) -----------------------


@dataclass(frozen=True)
class Window:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        object.__setattr__(self, "upper", Fraction(self.upper))
        if not 0 < self.lower < self.upper < 1:
            raise ValueError("window needs 0 < lower < upper < 1")

    @classmethod
    def for_base(cls, C: int) -> "Window":
        return cls(Fraction(1, C * C), 1 - Fraction(1, C * C))

    def classify(self, x: Enclosure) -> bool | None:
        """True when x lies strictly inside, False when certainly not,
        None when the enclosure is too wide to tell."""
        if self.lower < x.lo and x.hi < self.upper:
            return True
        if x.hi <= self.lower or x.lo >= self.upper:
            return False
        if x.width == 0:
            return False      # exact value on a boundary
        return None


def _pair_distance(theta, K, C, m, width, bits=None) -> tuple[Enclosure, Enclosure, Enclosure, int]:
    a = frac_scaled(theta, K, C, m, width, bits)
    b = frac_scaled(theta, K, C, m + 1, width, bits)
    return a.value, b.value, abs(a.value - b.value), max(a.bits, b.bits)


MAX_REFINE = 6


def ecli_witnesses(theta: Theta, C: int, m_max: int = 50) -> WitnessReport:
    """All ``0 <= m <= m_max`` where ``|{C^m theta} - {C^(m+1) theta}|`` is
    certified strictly inside ``(C^-2, 1 - C^-2)``, each re-checked at
    doubled precision. Undecidable indices are listed as unknown."""
    if C < 2:
        raise ValueError("C must be >= 2")
    window = Window.for_base(C)
    found, unknown = [], []
    for m in range(m_max + 1):
        width = DEFAULT_WIDTH
        verdict = None
        for _ in range(MAX_REFINE):
            try:
                alpha, beta, dist, bits = _pair_distance(theta, 1, C, m, width)
            except CertificationError:
                break
            verdict = window.classify(dist)
            if verdict is not None:
                break
            width /= 2 ** 20
        if verdict is None:
            unknown.append(m)
            continue
        if not verdict:
            continue
        entry = {"m": m, "alpha": alpha.to_dict(), "beta": beta.to_dict(), "distance": dist.to_dict(),
                 "bits": bits, "reverified": _reverify(theta, 1, C, m, dist, bits, window)}
        found.append(entry)
    status = "ok" if found and all(w["reverified"] for w in found) else "failed"
    return WitnessReport("window", {"theta": theta.to_dict(), "C": C, "m_max": m_max,
                                    "window": [_frac_str(window.lower), _frac_str(window.upper)]},
                         found, status, unknown)


def _reverify(theta, K, C, m, dist, bits, window=None) -> bool:
    if theta.exact is not None:
        again = _pair_distance(theta, K, C, m, DEFAULT_WIDTH)[2]
        return again == dist
    try:
        again = _pair_distance(theta, K, C, m, DEFAULT_WIDTH, bits=2 * bits)[2]
    except CertificationError:
        return False
    if not again.within(dist):
        return False
    return window is None or window.classify(again) is True


# -- clustering of scaled differences -------------------------------------------------


THIRD, HALF, TWO_THIRDS = Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)
BRACKETS = {"A": (THIRD, HALF), "B": (HALF, TWO_THIRDS)}
DEFAULT_TOL = Fraction(1, 1000)


def _in_bracket(x: Enclosure, name: str, tol: Fraction) -> bool:
    lo, hi = BRACKETS[name]
    return lo - tol <= x.lo and x.hi <= hi + tol


def qrational_search(theta: Theta, C: int, m_max: int = 50, K_max: int = 100,
                     tol: Fraction = DEFAULT_TOL, min_members: int = 5) -> WitnessReport:
    """Least ``K <= K_max`` for which at least ``min_members`` window
    witnesses m have ``|{K C^m theta} - {K C^(m+1) theta}|`` certified in
    [1/3, 1/2] or [1/2, 2/3] (each widened by ``tol``)."""
    params = {"theta": theta.to_dict(), "C": C, "m_max": m_max, "K_max": K_max,
              "tol": _frac_str(Fraction(tol)), "min_members": min_members}
    base = ecli_witnesses(theta, C, m_max)
    ms = [w["m"] for w in base.witnesses]
    tol = Fraction(tol)
    for K in range(1, K_max + 1):
        members = {"A": [], "B": []}
        for m in ms:
            try:
                alpha, beta, dist, bits = _pair_distance(theta, K, C, m, DEFAULT_WIDTH)
            except CertificationError:
                continue
            for name in ("A", "B"):
                if _in_bracket(dist, name, tol):
                    members[name].append({"m": m, "distance": dist.to_dict(), "bits": bits,
                                          "reverified": _reverify(theta, K, C, m, dist, bits)})
                    break
        name = "A" if len(members["A"]) >= len(members["B"]) else "B"
        chosen = members[name]
        if len(chosen) >= min_members:
            dists = [Enclosure.from_dict(w["distance"]) for w in chosen]
            limit = Enclosure(min(x.lo for x in dists), max(x.hi for x in dists))
            status = "ok" if all(w["reverified"] for w in chosen) else "failed"
            return WitnessReport("qrational", params, chosen, status, base.unknown,
                                 {"K": K, "bracket": [_frac_str(x) for x in BRACKETS[name]],
                                  "bracket_name": name, "limit": limit.to_dict()})
    return WitnessReport("qrational", params, [], "failed", base.unknown,
                         {"reason": f"no K <= {K_max} clusters {min_members} members"})


def normalize_shift(alphas: Sequence[Enclosure], betas: Sequence[Enclosure], theta: Theta,
                    q_max: int = 100, tol: Fraction = DEFAULT_TOL, bits: int = 128) -> int:
    """Least ``q <= q_max`` moving every ``|{alpha+q theta} - {beta+q theta}|``
    into [1/3, 1/2] (widened by ``tol``)."""
    if len(alphas) != len(betas):
        raise ValueError("alphas and betas must pair up")
    alphas = [a if isinstance(a, Enclosure) else Enclosure.exact(a) for a in alphas]
    betas = [b if isinstance(b, Enclosure) else Enclosure.exact(b) for b in betas]
    tol = Fraction(tol)
    for q in range(q_max + 1):
        shift = Enclosure(*_scale(theta, q, bits))
        ok = True
        for a, b in zip(alphas, betas):
            fa, fb = (a + shift).frac(), (b + shift).frac()
            if fa is None or fb is None or not _in_bracket(abs(fa - fb), "A", tol):
                ok = False
                break
        if ok:
            return q
    raise SearchFailure(f"no shift q <= {q_max} normalizes all {len(alphas)} pairs")


# -- mixing -----------------------------------------------------------------------------


DEFAULT_K_CEILING = 10**5


def _low_discrepancy(count: int, skip: int):
    from scipy.stats import qmc

    gen = qmc.Halton(d=2, scramble=False)
    if skip:
        gen.fast_forward(skip)
    return gen.random(count)


def mixing_bound(theta: Theta, epsilon, a, b, trials: int = 100, k_ceiling: int = DEFAULT_K_CEILING,
                 seed: int = 0, bits: int = 160) -> WitnessReport:
    """Largest, over deterministic sample pairs with
    ``b - a + eps < {alpha} - {beta} < 1 - eps``, of the least ``k`` with
    ``{beta + k theta} < a`` and ``{alpha + k theta} > b``.

    Pairs come from an unscrambled Halton sequence started ``seed``
    points in. At each chosen k the difference of the shifted fractional
    parts is checked to equal the original one.
    """
    eps, a, b = Fraction(epsilon), Fraction(a), Fraction(b)
    if not (0 < a < b < 1 and eps > 0):
        raise ValueError("need 0 < a < b < 1 and epsilon > 0")
    low, high = b - a + eps, 1 - eps
    if low >= high:
        raise ValueError("no pair satisfies the hypothesis for these a, b, epsilon")
    params = {"theta": theta.to_dict(), "epsilon": _frac_str(eps), "a": _frac_str(a), "b": _frac_str(b),
              "trials": trials, "k_ceiling": k_ceiling}
    pairs, exceeded = [], []
    limit = Fraction(1, 10**9)
    for u, v in _low_discrepancy(trials, seed):
        # open interval: keep strictly away from both ends
        delta = low + (high - low) * Fraction(float(u)).limit_denominator(10**12)
        if not low < delta < high:
            delta = (low + high) / 2
        beta = (1 - delta) * Fraction(float(v)).limit_denominator(10**12)
        alpha = beta + delta
        k = least_mixing_k(theta, alpha, beta, a, b, k_ceiling, bits)
        if k is None:
            exceeded.append({"alpha": _frac_str(alpha), "beta": _frac_str(beta)})
            continue
        fa = shifted_frac(Enclosure.exact(alpha), theta, k, bits)
        fb = shifted_frac(Enclosure.exact(beta), theta, k, bits)
        diff = fa - fb
        preserved = delta in diff and abs(diff.center - delta) <= limit
        if theta.exact is not None:
            preserved = diff.lo == diff.hi == delta
        pairs.append({"alpha": _frac_str(alpha), "beta": _frac_str(beta), "k": k, "preserved": preserved})
    status = "ok" if not exceeded and all(p["preserved"] for p in pairs) else "failed"
    n_est = max((p["k"] for p in pairs), default=0)
    return WitnessReport("mixing", params, pairs, status, exceeded, {"n_estimate": n_est}, seed)


def least_mixing_k(theta: Theta, alpha, beta, a, b, k_ceiling: int = DEFAULT_K_CEILING,
                   bits: int = 160) -> int | None:
    """Least k with ``{beta + k theta} < a`` and ``{alpha + k theta} > b``
    certified, or None past ``k_ceiling``."""
    alpha, beta = Enclosure.exact(alpha), Enclosure.exact(beta)
    for k in range(k_ceiling + 1):
        fb = shifted_frac(beta, theta, k, bits)
        if fb is None or not fb.hi < a:
            continue
        fa = shifted_frac(alpha, theta, k, bits)
        if fa is not None and fa.lo > b:
            return k
    return None


# -- pumping table ----------------------------------------------------------------------


DEFAULT_POWER_BUDGET_BITS = 1 << 26


def _significand_exact(D, e, d, n, budget_bits):
    if e * D.bit_length() > budget_bits:
        return None
    return best_approx_fraction(D ** e, 1, d, n).m


def _significand_by_logs(D, e, d, n, ceiling=None) -> int | None:
    """Significand from a certified ``{e log_d D}``; None if the rounding
    cannot be decided below the ceiling."""
    theta = Theta.log(d, D)
    ceiling = precision_ceiling() if ceiling is None else ceiling
    low, high = d ** (n - 1), d ** n
    bits = max(64, e.bit_length() + 64)
    while bits <= ceiling:
        try:
            f = frac_multiple(theta, e, bits=bits, ceiling=ceiling).value
        except CertificationError:
            return None
        with ivprec(bits):
            x_lo = iv.mpf(f.lo.numerator) / f.lo.denominator
            x_hi = iv.mpf(f.hi.numerator) / f.hi.denominator
            x = iv.mpf([x_lo.a, x_hi.b]) + (n - 1)
            y = iv.exp(x * iv.log(d))
            y_lo, y_hi = _mpf_fraction(y._mpi_[0]), _mpf_fraction(y._mpi_[1])
        m_lo, m_hi = math.floor(y_lo + HALF), math.floor(y_hi + HALF)
        if m_lo == m_hi and y_lo + HALF != m_lo:
            m = m_lo
            if m >= high:
                m = low
            return max(m, low)
        bits *= 2
    return None


def pdacs_witness_search(b: int, D: int, d: int, n: int, p_max: int, delta_max: int,
                         budget_bits: int = DEFAULT_POWER_BUDGET_BITS) -> WitnessReport:
    """Membership of ``1 0{p}`` in the classes ``P_{m,n}`` for ``p <= p_max``
    and, per gap ``1 <= delta <= delta_max``, the p whose strings ``1 0{p}``
    and ``1 0{p+delta}`` fall in different classes.

    Entries use exact integer powers while they fit ``budget_bits``; the
    certified-logarithm path runs alongside and must agree. Entries
    neither path can settle are unknown.
    """
    if is_commensurable(d, D):
        raise ValueError("pumping search needs incommensurable d and D")
    params = {"b": b, "D": D, "d": d, "n": n, "p_max": p_max, "delta_max": delta_max}
    table, unknown, mismatches = [], [], []
    classes: dict[int, int] = {}
    for p in range(p_max + 1):
        e = b ** p
        exact = _significand_exact(D, e, d, n, budget_bits)
        fast = _significand_by_logs(D, e, d, n)
        if exact is not None and fast is not None and exact != fast:
            mismatches.append(p)
        m = exact if exact is not None else fast
        if m is None:
            unknown.append(p)
            continue
        classes[p] = m
        table.append({"p": p, "string": "1" + "0" * p, "m": m,
                      "method": "exact" if exact is not None else "log", "log_agrees": fast == m
                      if fast is not None else None})
    divergence = {}
    missing = []
    for delta in range(1, delta_max + 1):
        hits = [p for p in range(p_max - delta + 1)
                if p in classes and p + delta in classes and classes[p] != classes[p + delta]]
        divergence[str(delta)] = hits
        if not hits:
            missing.append(delta)
    status = "failed" if mismatches else "ok"
    return WitnessReport("pumping", params, table, status, unknown,
                         {"divergence": divergence, "delta_without_pair": missing,
                          "mismatches": mismatches})


def pumping_member_check(report: WitnessReport) -> list[int]:
    """Entries of a pumping table that disagree with direct language
    membership (expected empty)."""
    prm = report.parameters
    bad = []
    for row in report.witnesses:
        spec = LanguageSpec(LanguageKind.P, prm["b"], prm["D"], prm["d"], prm["n"], row["m"])
        z = DigitString.parse(row["string"], prm["b"])
        if not language_member(z, spec):
            bad.append(row["p"])
    return bad
