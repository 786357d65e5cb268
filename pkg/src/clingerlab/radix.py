"""Exact radix arithmetic: digit strings, best n-digit approximations,
language membership and commensurability of radices.

Everything here is integer or rational arithmetic. The only exception is
:func:`clinger_inequality`, which compares a rational against a logarithm
and does so with certified interval enclosures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from mpmath import iv

from ._prec import ivprec, precision_ceiling


class Order(enum.Enum):
    LSD_FIRST = "lsd"
    MSD_FIRST = "msd"


class Tie(enum.Enum):
    NONE = "none"
    HALF_RESOLVED_TO_EVEN = "even"


class MalformedPatternError(ValueError):
    """A string handed to a ``P`` language is not of the form 1 0...0."""


@dataclass(frozen=True)
class Radix:
    base: int

    def __post_init__(self):
        if not isinstance(self.base, int) or self.base < 2:
            raise ValueError(f"radix must be an integer >= 2, got {self.base!r}")

    def __int__(self):
        return self.base


def _base(r) -> int:
    return r.base if isinstance(r, Radix) else Radix(int(r)).base


@dataclass(frozen=True)
class DigitString:
    digits: tuple[int, ...]
    radix: Radix
    order: Order = Order.MSD_FIRST

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(self.digits))
        if not isinstance(self.radix, Radix):
            object.__setattr__(self, "radix", Radix(int(self.radix)))
        for dgt in self.digits:
            if not 0 <= dgt < self.radix.base:
                raise ValueError(f"digit {dgt} out of range for radix {self.radix.base}")

    @classmethod
    def parse(cls, text: str, radix=10, order: Order = Order.MSD_FIRST) -> "DigitString":
        """Build from text: either one character per digit (``"102"``,
        hex letters allowed) or comma separated (``"1,0,2"``)."""
        text = text.strip()
        if "," in text:
            digits = [int(tok) for tok in text.split(",") if tok.strip()]
        else:
            digits = [int(ch, 36) for ch in text]
        return cls(tuple(digits), Radix(_base(radix)), order)

    @classmethod
    def of_int(cls, value: int, radix=10, order: Order = Order.MSD_FIRST) -> "DigitString":
        """Canonical digits of ``value`` (no leading zeros; 0 gives ``"0"``)."""
        base = _base(radix)
        if value < 0:
            raise ValueError("negative value")
        digits = []
        while True:
            value, rem = divmod(value, base)
            digits.append(rem)
            if value == 0:
                break
        if order is Order.MSD_FIRST:
            digits.reverse()
        return cls(tuple(digits), Radix(base), order)

    def reversed(self) -> "DigitString":
        flipped = Order.MSD_FIRST if self.order is Order.LSD_FIRST else Order.LSD_FIRST
        return DigitString(self.digits[::-1], self.radix, flipped)

    def msd_digits(self) -> tuple[int, ...]:
        return self.digits if self.order is Order.MSD_FIRST else self.digits[::-1]

    def __len__(self):
        return len(self.digits)

    @property
    def value(self) -> int:
        """Value in the string's own significance order."""
        return value_msd(self) if self.order is Order.MSD_FIRST else value_lsd(self)

    def __str__(self):
        if self.radix.base <= 36:
            return "".join("0123456789abcdefghijklmnopqrstuvwxyz"[x] for x in self.digits)
        return ",".join(map(str, self.digits))


def value_lsd(z: DigitString) -> int:
    """Value of ``z`` read with the leftmost digit least significant."""
    if z.order is not Order.LSD_FIRST:
        raise ValueError("value_lsd needs an LSD_FIRST digit string")
    total = 0
    for dgt in reversed(z.digits):
        total = total * z.radix.base + dgt
    return total


def value_msd(z: DigitString) -> int:
    if z.order is not Order.MSD_FIRST:
        raise ValueError("value_msd needs an MSD_FIRST digit string")
    total = 0
    for dgt in z.digits:
        total = total * z.radix.base + dgt
    return total


def repeat_digit(a: int, p: int, radix, order: Order = Order.MSD_FIRST) -> DigitString:
    radix = Radix(_base(radix))
    if not 0 <= a < radix.base:
        raise ValueError(f"digit {a} out of range for radix {radix.base}")
    if p < 0:
        raise ValueError("repeat count must be >= 0")
    return DigitString((a,) * p, radix, order)


# -- commensurability --------------------------------------------------------


@dataclass(frozen=True)
class Commensurability:
    commensurable: bool
    p: int | None = None
    q: int | None = None

    def __bool__(self):
        return self.commensurable


def is_commensurable(d, D) -> Commensurability:
    """Decide whether ``log_d D`` is rational.

    When it is, ``p`` and ``q`` are the least positive exponents with
    ``d**p == D**q``. The search runs Euclid's algorithm on the exponents:
    the larger of two powers of a common root is always divisible by the
    smaller one, so a failed division proves incommensurability.
    """
    d, D = _base(d), _base(D)
    # (value, exponent of d, exponent of D)
    big, small = (d, 1, 0), (D, 0, 1)
    while True:
        if big[0] < small[0]:
            big, small = small, big
        if small[0] == 1:
            a, b = small[1], small[2]
            break
        quo, rem = divmod(big[0], small[0])
        if rem:
            return Commensurability(False)
        big = (quo, big[1] - small[1], big[2] - small[2])
    # d**a * D**b == 1 with a, b of opposite signs
    p, q = abs(a), abs(b)
    g = gcd(p, q)
    return Commensurability(True, p // g, q // g)


# -- best approximation ------------------------------------------------------


@dataclass(frozen=True)
class ConversionInput:
    f: int
    e: int
    D: Radix

    def __post_init__(self):
        if self.f < 1:
            raise ValueError("f must be >= 1")
        if not isinstance(self.D, Radix):
            object.__setattr__(self, "D", Radix(int(self.D)))

    def as_fraction(self) -> tuple[int, int]:
        D = self.D.base
        if self.e >= 0:
            return self.f * D**self.e, 1
        return self.f, D ** (-self.e)


@dataclass(frozen=True)
class BestApprox:
    """``m * d**q`` with ``d**(n-1) <= m < d**n``.

    ``eps`` is the exact error term, so the approximated value equals
    ``(m + eps) * d**q``.
    """

    m: int
    q: int
    n: int
    d: int
    tie: Tie = Tie.NONE
    eps: Fraction = Fraction(0)

    @property
    def value(self) -> Fraction:
        return Fraction(self.m) * Fraction(self.d) ** self.q

    def to_dict(self) -> dict:
        return {"m": self.m, "q": self.q, "n": self.n, "d": self.d,
                "tie": self.tie.value, "eps": str(self.eps)}

    @classmethod
    def from_dict(cls, obj: dict) -> "BestApprox":
        return cls(obj["m"], obj["q"], obj["n"], obj["d"], Tie(obj["tie"]), Fraction(obj["eps"]))


def _pow_ge(num: int, den: int, d: int, k: int) -> bool:
    """``num/den >= d**k`` for any integer ``k``."""
    if k >= 0:
        return num >= den * d**k
    return num * d ** (-k) >= den


def floor_log(num: int, den: int, d: int) -> int:
    """The integer ``k`` with ``d**k <= num/den < d**(k+1)``."""
    if num <= 0 or den <= 0:
        raise ValueError("floor_log needs a positive rational")
    # d**64 has bit length within 1 of 64*log2(d): gives a close integer guess
    bits64 = (d**64).bit_length()
    k = ((num.bit_length() - den.bit_length()) * 64) // bits64
    while not _pow_ge(num, den, d, k):
        k -= 1
    while _pow_ge(num, den, d, k + 1):
        k += 1
    return k


def best_approx_fraction(num: int, den: int, d, n: int) -> BestApprox:
    """Best ``n``-digit radix-``d`` approximation of the positive rational
    ``num/den``; exact halfway cases go to the even significand."""
    d = _base(d)
    if n < 1:
        raise ValueError("precision n must be >= 1")
    q = floor_log(num, den, d) - (n - 1)
    # x = num/den / d**q, held as top/bot with d**(n-1) <= x < d**n
    if q >= 0:
        top, bot = num, den * d**q
    else:
        top, bot = num * d ** (-q), den
    m, rem = divmod(top, bot)
    twice = 2 * rem
    tie = Tie.NONE
    if twice > bot or (twice == bot and m % 2):
        m += 1
    if twice == bot:
        tie = Tie.HALF_RESOLVED_TO_EVEN
    if m == d**n:
        # rounds up into the next binade: d**(n-1) at q+1 (error >= -1/(2d))
        m, q = d ** (n - 1), q + 1
        bot *= d
    return BestApprox(m, q, n, d, tie, Fraction(top, bot) - m)


def best_approx(inp: ConversionInput, d, n: int) -> BestApprox:
    """Best ``n``-digit approximation in radix ``d`` of ``f * D**e``."""
    num, den = inp.as_fraction()
    return best_approx_fraction(num, den, d, n)


def significand(f: int, e: int, D, d, n: int) -> int:
    return best_approx(ConversionInput(f, e, Radix(_base(D))), d, n).m


# -- languages ---------------------------------------------------------------


class LanguageKind(enum.Enum):
    P = "P"
    L = "L"
    M = "M"


@dataclass(frozen=True)
class LanguageSpec:
    """``P``: strings ``1 0{p}`` whose exponent ``b**p`` has significand
    ``target``. ``L``/``M``: strings whose value (LSD-first / MSD-first)
    has leading significand digit ``target`` (for ``d == 2`` the second
    binary digit, the first always being 1)."""

    kind: LanguageKind
    b: Radix
    D: Radix
    d: Radix
    n: int
    target: int

    def __post_init__(self):
        for name in ("b", "D", "d"):
            val = getattr(self, name)
            if not isinstance(val, Radix):
                object.__setattr__(self, name, Radix(int(val)))
        kind = LanguageKind(self.kind)
        object.__setattr__(self, "kind", kind)
        d = self.d.base
        if kind is LanguageKind.P:
            if self.n < 1 or (d == 2 and self.n < 2):
                raise ValueError("P languages need n >= 1, and n >= 2 when d = 2")
            if not d ** (self.n - 1) <= self.target < d**self.n:
                raise ValueError(f"target {self.target} is not an {self.n}-digit significand")
        else:
            expected_n = 2 if d == 2 else 1
            if self.n != expected_n:
                raise ValueError(f"L/M languages over d={d} use n={expected_n}")
            low = 0 if d == 2 else 1
            if not low <= self.target < d:
                raise ValueError(f"target digit {self.target} out of range for d={d}")

    def significand_target(self) -> int:
        if self.kind is LanguageKind.P or self.d.base > 2:
            return self.target
        return 2 + self.target


def p_pattern_exponent(z: DigitString) -> int:
    """``p`` for a string of the form ``1 0{p}`` (read most significant first)."""
    digits = z.msd_digits()
    if not digits or digits[0] != 1 or any(digits[1:]):
        raise MalformedPatternError(f"{z} is not of the form 1 0{{p}}")
    return len(digits) - 1


def exponent_of(z: DigitString, spec: LanguageSpec) -> int:
    if z.radix != spec.b:
        raise ValueError(f"string radix {z.radix.base} differs from exponent radix {spec.b.base}")
    if spec.kind is LanguageKind.P:
        return spec.b.base ** p_pattern_exponent(z)
    if spec.kind is LanguageKind.L:
        as_lsd = z if z.order is Order.LSD_FIRST else DigitString(z.digits, z.radix, Order.LSD_FIRST)
        return value_lsd(as_lsd)
    as_msd = z if z.order is Order.MSD_FIRST else DigitString(z.digits, z.radix, Order.MSD_FIRST)
    return value_msd(as_msd)


def language_member(z: DigitString, spec: LanguageSpec) -> bool:
    """Membership of ``z`` in the language described by ``spec``.

    For ``L`` and ``M`` the digit sequence is taken exactly as given and
    read least-significant-first (``L``) or most-significant-first (``M``),
    regardless of the declared order of ``z``.
    """
    e = exponent_of(z, spec)
    m = significand(1, e, spec.D, spec.d, spec.n)
    return m == spec.significand_target()


# -- Clinger's precondition --------------------------------------------------


class LogKind(enum.Enum):
    NATURAL = "natural"
    BASE_B = "base_b"
    BASE_10 = "base10"


def _log_of(d: int, base: int | None):
    """Interval enclosure of ``log_base d`` (natural log when base is None)."""
    if base is None:
        return iv.log(d)
    return iv.log(d) / iv.log(base)


def clinger_inequality(b, d, n: int, log_kind: LogKind = LogKind.NATURAL,
                       ceiling: int | None = None) -> bool:
    """Decide ``b**2/(b-1) < 2 d**(n-1) log d``.

    The logarithm defaults to natural. When it is rational (base-b or
    base-10 logs of commensurable pairs) the comparison is exact;
    otherwise the two sides can never be equal and precision is doubled
    until the certified enclosures separate.
    """
    b, d = _base(b), _base(d)
    log_kind = LogKind(log_kind)
    lhs = Fraction(b * b, b - 1)
    scale = 2 * d ** (n - 1)
    base = {LogKind.NATURAL: None, LogKind.BASE_B: b, LogKind.BASE_10: 10}[log_kind]
    if base is not None:
        if d == 1:
            return lhs < 0
        wit = is_commensurable(d, base)
        if wit:
            # d**p == base**q, so log_base d = q/p
            return lhs < scale * Fraction(wit.q, wit.p)
    ceiling = precision_ceiling() if ceiling is None else ceiling
    prec = 64
    while prec <= ceiling:
        with ivprec(prec):
            rhs = iv.mpf(scale) * _log_of(d, base)
            left = iv.mpf(lhs.numerator) / iv.mpf(lhs.denominator)
            if left.b < rhs.a:
                return True
            if left.a > rhs.b:
                return False
        prec *= 2
    raise ArithmeticError(f"could not separate sides within {ceiling} bits")
