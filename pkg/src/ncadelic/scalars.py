"""Exact scalars: rationals, the cyclotomic field Q(zeta_m), and the group
algebra of the cyclic group mu_m in character coordinates.

Rationals are ``gmpy2.mpq``.  Elements of Q(zeta_m) that happen to be rational
are always returned as ``mpq``; a :class:`CycScalar` instance is therefore
never rational, which keeps the common (rational) case fast.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

# ---------------------------------------------------------------------------
# rationals


def Q(value) -> "mpq | CycScalar":
    """Coerce ints, Fractions, "num/den" strings and mpq to an exact scalar."""
    if isinstance(value, CycScalar):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value.strip())
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted")
    return mpq(value)


def rational_to_str(q) -> str:
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def is_rational(x) -> bool:
    return not isinstance(x, CycScalar)


# ---------------------------------------------------------------------------
# cyclotomic polynomials and Q(zeta_m)


@lru_cache(maxsize=None)
def cyclotomic_coeffs(m: int) -> tuple:
    """Coefficients (constant term first) of the m-th cyclotomic polynomial."""
    from sympy import Poly, cyclotomic_poly, symbols

    t = symbols("t")
    coeffs = Poly(cyclotomic_poly(m, t), t).all_coeffs()
    return tuple(mpq(int(c)) for c in reversed(coeffs))


def phi(m: int) -> int:
    return len(cyclotomic_coeffs(m)) - 1


def _reduce(m: int, poly: list) -> list:
    """Reduce a coefficient list modulo the (monic) cyclotomic polynomial."""
    cyc = cyclotomic_coeffs(m)
    n = len(cyc) - 1
    poly = list(poly)
    for top in range(len(poly) - 1, n - 1, -1):
        c = poly[top]
        if c:
            shift = top - n
            for i in range(n):
                if cyc[i]:
                    poly[shift + i] -= c * cyc[i]
        poly[top] = ZERO
    poly = poly[:n]
    poly += [ZERO] * (n - len(poly))
    return poly


def _make(m: int, coeffs: list):
    if all(c == 0 for c in coeffs[1:]):
        return mpq(coeffs[0]) if coeffs else ZERO
    return CycScalar(m, coeffs, _trusted=True)


def _poly_trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list, b: list):
    a = list(a)
    quo = [ZERO] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] / lead
        quo[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    return _poly_trim(quo), _poly_trim(a[: len(b) - 1])


def _poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _poly_trim([(a[i] if i < len(a) else ZERO) - (b[i] if i < len(b) else ZERO) for i in range(n)])


class CycScalar:
    """An element of Q(zeta_m) that is not rational.

    ``coeffs`` are the coordinates in the power basis 1, zeta, ..., zeta^(phi(m)-1).
    Construct general elements with :func:`cyc`, which demotes rationals to mpq.
    """

    __slots__ = ("m", "coeffs", "_hash")

    def __init__(self, m: int, coeffs: Sequence, _trusted: bool = False):
        if not _trusted:
            coeffs = _reduce(m, [Q(c) for c in coeffs])
        self.m = m
        self.coeffs = tuple(coeffs)
        self._hash = None

    # -- coercion ---------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, CycScalar):
            if other.m != self.m:
                raise ValueError(f"cyclotomic fields differ: m={self.m} vs m={other.m}")
            return other.coeffs
        if isinstance(other, (int, type(ZERO), Fraction)):
            return (Q(other),) + (ZERO,) * (len(self.coeffs) - 1)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return _make(self.m, [a + b for a, b in zip(self.coeffs, o)])

    __radd__ = __add__

    def __neg__(self):
        return CycScalar(self.m, [-c for c in self.coeffs], _trusted=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return _make(self.m, [a - b for a, b in zip(self.coeffs, o)])

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return _make(self.m, [b - a for a, b in zip(self.coeffs, o)])

    def __mul__(self, other):
        if isinstance(other, CycScalar):
            if other.m != self.m:
                raise ValueError(f"cyclotomic fields differ: m={self.m} vs m={other.m}")
            return _make(self.m, _reduce(self.m, _poly_mul(list(self.coeffs), list(other.coeffs))))
        if isinstance(other, (int, type(ZERO), Fraction)):
            c = Q(other)
            if c == 0:
                return ZERO
            return CycScalar(self.m, [a * c for a in self.coeffs], _trusted=True)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        """Inverse via the extended Euclidean algorithm in Q[t]."""
        m = self.m
        r0, r1 = list(cyclotomic_coeffs(m)), _poly_trim(list(self.coeffs))
        s0, s1 = [], [ONE]
        while len(r1) > 1:
            quo, rem = _poly_divmod(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quo, s1))
        if not r1:
            raise ZeroDivisionError("non-invertible cyclotomic element")
        return _make(m, _reduce(m, [c / r1[0] for c in s1]))

    def __truediv__(self, other):
        if isinstance(other, CycScalar):
            return self * other.inverse()
        if isinstance(other, (int, type(ZERO), Fraction)):
            return self * (ONE / Q(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, type(ZERO), Fraction)):
            return self.inverse() * Q(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, CycScalar):
            return self.m == other.m and self.coeffs == other.coeffs
        return False  # a CycScalar is never rational

    def __ne__(self, other):
        return not self.__eq__(other)

    def __bool__(self):
        return True

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.m, self.coeffs))
        return self._hash

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*z{self.m}^{k}")
        return " + ".join(terms)

    def conjugate(self):
        """Complex conjugation zeta -> zeta^-1."""
        return cyc_from_powers(self.m, {(-k) % self.m: c for k, c in enumerate(self.coeffs)})


def cyc(m: int, coeffs: Sequence):
    """Element of Q(zeta_m) from power-basis coefficients (any length)."""
    return _make(m, _reduce(m, [Q(c) for c in coeffs]))


def cyc_from_powers(m: int, terms: dict):
    """Element sum c_k zeta_m^k from a {k: c_k} dictionary (k taken mod m)."""
    poly = [ZERO] * max(m, 1)
    for k, c in terms.items():
        poly[k % m] += Q(c)
    return _make(m, _reduce(m, poly))


@lru_cache(maxsize=None)
def zeta_power(m: int, k: int):
    """zeta_m^k where zeta_m = exp(2 pi i / m) realizes the primitive character."""
    return cyc_from_powers(m, {k % m: 1})


def scalar_field_m(x) -> int | None:
    return x.m if isinstance(x, CycScalar) else None


def scalar_to_json(x):
    """Rationals serialize as "num/den", irrational cyclotomics as a coefficient list."""
    if isinstance(x, CycScalar):
        return {"m": x.m, "coeffs": [rational_to_str(c) for c in x.coeffs]}
    return rational_to_str(x)


def scalar_from_json(obj):
    if isinstance(obj, dict):
        return cyc(obj["m"], [Q(c) for c in obj["coeffs"]])
    if isinstance(obj, list):
        raise ValueError("bare coefficient lists need an explicit m")
    return Q(obj)


def rational_value(x):
    """Return x as mpq or raise ValueError if it is not rational."""
    if isinstance(x, CycScalar):
        raise ValueError(f"{x!r} is not rational")
    return mpq(x)


# ---------------------------------------------------------------------------
# group algebra of mu_m


class GroupAlgElem:
    """Element of C[mu_m] stored by its character values chi_0, ..., chi_{m-1}.

    chi_j(g^k) = zeta_m^(jk).  The character idempotent e_j has chi_i(e_j) = delta_ij,
    so multiplication, inversion and tau-shifts are all componentwise/cyclic.
    """

    __slots__ = ("m", "charvals")

    def __init__(self, m: int, charvals: Iterable):
        vals = tuple(Q(c) for c in charvals)
        if len(vals) != m:
            raise ValueError(f"expected {m} character values, got {len(vals)}")
        self.m = m
        self.charvals = vals

    # -- constructors ----------------------------------------------------
    @classmethod
    def scalar(cls, m: int, c) -> "GroupAlgElem":
        return cls(m, [c] * m)

    @classmethod
    def idempotent(cls, m: int, j: int) -> "GroupAlgElem":
        return cls(m, [ONE if i == j % m else ZERO for i in range(m)])

    @classmethod
    def from_group(cls, m: int, coeffs: Sequence) -> "GroupAlgElem":
        """From group-basis coefficients c_k of g^k (g the generator)."""
        if len(coeffs) != m:
            raise ValueError(f"expected {m} group coefficients")
        cs = [Q(c) for c in coeffs]
        vals = []
        for j in range(m):
            acc = ZERO
            for k, c in enumerate(cs):
                if c:
                    acc = acc + c * zeta_power(m, j * k)
            vals.append(acc)
        return cls(m, vals)

    def to_group(self) -> list:
        """Group-basis coefficients: c_k = (1/m) sum_j chi_j zeta^(-jk)."""
        m = self.m
        out = []
        for k in range(m):
            acc = ZERO
            for j, v in enumerate(self.charvals):
                if v:
                    acc = acc + v * zeta_power(m, -j * k)
            out.append(acc / m)
        return out

    # -- arithmetic -----------------------------------------------------
    def _check(self, other):
        if not isinstance(other, GroupAlgElem) or other.m != self.m:
            raise ValueError("group algebra elements for different m")

    def __add__(self, other):
        self._check(other)
        return GroupAlgElem(self.m, [a + b for a, b in zip(self.charvals, other.charvals)])

    def __sub__(self, other):
        self._check(other)
        return GroupAlgElem(self.m, [a - b for a, b in zip(self.charvals, other.charvals)])

    def __neg__(self):
        return GroupAlgElem(self.m, [-a for a in self.charvals])

    def __mul__(self, other):
        if isinstance(other, GroupAlgElem):
            self._check(other)
            return GroupAlgElem(self.m, [a * b for a, b in zip(self.charvals, other.charvals)])
        return GroupAlgElem(self.m, [a * other for a in self.charvals])

    __rmul__ = __mul__

    def __truediv__(self, c):
        return GroupAlgElem(self.m, [a / c for a in self.charvals])

    def __eq__(self, other):
        return isinstance(other, GroupAlgElem) and self.m == other.m and self.charvals == other.charvals

    def __hash__(self):
        return hash((self.m, self.charvals))

    def __repr__(self):
        return f"GroupAlgElem(m={self.m}, charvals={list(map(str, self.charvals))})"

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.charvals)

    def is_invertible(self) -> bool:
        return all(v != 0 for v in self.charvals)

    def inverse(self) -> "GroupAlgElem":
        if not self.is_invertible():
            raise ZeroDivisionError("group algebra element is not invertible")
        return GroupAlgElem(self.m, [ONE / v for v in self.charvals])

    def char_value(self, j: int):
        return self.charvals[j % self.m]

    def is_rational(self) -> bool:
        return all(is_rational(v) for v in self.charvals)

    # -- json ----------------------------------------------------------
    def to_json(self) -> dict:
        return {"m": self.m, "charvals": [scalar_to_json(v) for v in self.charvals]}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupAlgElem":
        m = int(obj["m"])
        if "charvals" in obj:
            return cls(m, [scalar_from_json(v) for v in obj["charvals"]])
        if "group" in obj:
            return cls.from_group(m, [scalar_from_json(v) for v in obj["group"]])
        raise ValueError("group algebra JSON needs 'charvals' or 'group'")


def char_value(t: GroupAlgElem, j: int):
    """chi_j(t) = sum_g c_g eps(g)^j."""
    return t.char_value(j)


def tau_shift(t: GroupAlgElem, k: int) -> GroupAlgElem:
    """tau^(k), defined by y^k tau = tau^(k) y^k; chi_j(tau^(k)) = chi_{j+k}(tau)."""
    m = t.m
    return GroupAlgElem(m, [t.charvals[(j + k) % m] for j in range(m)])


def window_value(t: GroupAlgElem, a: int, b: int, j: int):
    """chi_j(tau_[a,b]) without building the element."""
    m = t.m
    acc = ZERO
    for k in range(a, b + 1):
        acc = acc + t.charvals[(j + k) % m]
    return acc


def tau_window(t: GroupAlgElem, a: int, b: int) -> GroupAlgElem:
    """tau_[a,b] = sum_{k=a}^{b} tau^(k)."""
    if a > b:
        raise ValueError(f"empty window [{a},{b}]")
    return GroupAlgElem(t.m, [window_value(t, a, b, j) for j in range(t.m)])


def full_period_constant(t: GroupAlgElem):
    """|tau|: the common character value of any window of length m."""
    w = tau_window(t, 0, t.m - 1)
    value = w.charvals[0]
    assert all(v == value for v in w.charvals), "full-period window is not a scalar"
    return value


def is_invertible_in_group_algebra(t: GroupAlgElem) -> bool:
    return t.is_invertible()


def sum_of_windows(t: GroupAlgElem, a: int, b: int, m_mu: int) -> GroupAlgElem:
    """sum_{i=a}^{b} tau_[i, i+m_mu-1]."""
    if a > b:
        raise ValueError(f"empty range [{a},{b}]")
    acc = GroupAlgElem.scalar(t.m, 0)
    for i in range(a, b + 1):
        acc = acc + tau_window(t, i, i + m_mu - 1)
    return acc


def _nonneg_integer(x) -> int | None:
    if isinstance(x, CycScalar):
        return None
    x = mpq(x)
    if x.denominator == 1 and x >= 0:
        return int(x)
    return None


def is_generic(t: GroupAlgElem):
    """Decide whether every tau_[a,b] (a <= b) is invertible.

    A window of length q*m + s (0 <= s < m) starting at a has character values
    q*|tau| + chi_j(tau_[a, a+s-1]), and only a mod m matters, so finitely many
    (a mod m, s, j) triples decide the question.  Returns ``(flag, certificate)``
    where the certificate is a violating ``(a, b, j)`` or ``None``.
    """
    m = t.m
    norm = full_period_constant(t)
    for a in range(m):
        for s in range(m):
            for j in range(m):
                partial = window_value(t, a, a + s - 1, j) if s else ZERO
                q_min = 0 if s else 1
                if norm == 0:
                    if partial == 0:
                        q = q_min
                        return False, (a, a + q * m + s - 1, j)
                    continue
                q = _nonneg_integer(-partial / norm)
                if q is not None and q >= q_min:
                    return False, (a, a + q * m + s - 1, j)
    return True, None


def parse_tau(text: str, m: int) -> GroupAlgElem:
    """Parse a command-line tau descriptor.

    ``"c"`` is the scalar c (all character values c); ``"c0,c1,..."`` gives the
    character values; ``"g:c0,c1,..."`` gives group-basis coefficients.
    """
    text = text.strip()
    if text.startswith("g:"):
        return GroupAlgElem.from_group(m, [Q(p) for p in text[2:].split(",")])
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        return GroupAlgElem.scalar(m, Q(parts[0]))
    return GroupAlgElem(m, [Q(p) for p in parts])


def random_rational(rng, lo: int = -5, hi: int = 5, den: int = 3):
    return mpq(rng.randint(lo, hi), rng.randint(1, den))


def random_tau(rng, m: int, lo: int = -4, hi: int = 4, den: int = 2) -> GroupAlgElem:
    """Random tau with rational character values."""
    return GroupAlgElem(m, [random_rational(rng, lo, hi, den) for _ in range(m)])


def random_generic_tau(rng, m: int, attempts: int = 1000) -> GroupAlgElem:
    for _ in range(attempts):
        t = random_tau(rng, m, -6, 6, 3)
        if is_generic(t)[0]:
            return t
    raise RuntimeError("could not sample a generic tau")
