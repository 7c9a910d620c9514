"""Exact Gaussian rationals and the symbolic constant field.

Coefficient data lives in Q(i). The constants that appear in expansion
coefficients are polynomials in pi, zeta(k), logarithms of rational primes
and angles of Gaussian primes, with Q(i) coefficients. Tying the log/angle
atoms to primes (instead of one opaque atom per coefficient ratio) makes
multiplicative identities between ratios syntactic, so consistency residuals
that vanish on paper also vanish exactly here.
"""

import math
from fractions import Fraction

from .lattice import rational


class QQi:
    """A Gaussian rational re + im*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, QQi):
            assert im == 0
            self.re, self.im = re.re, re.im
            return
        self.re = rational(re)
        self.im = rational(im)

    def __add__(self, other):
        other = _as_qqi(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_qqi(other)
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _as_qqi(other) - self

    def __mul__(self, other):
        other = _as_qqi(other)
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_qqi(other)
        n = other.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QQi((self.re * other.re + self.im * other.im) / n,
                   (self.im * other.re - self.re * other.im) / n)

    def __rtruediv__(self, other):
        return _as_qqi(other) / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def conj(self):
        return QQi(self.re, -self.im)

    def norm2(self):
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        try:
            other = _as_qqi(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return "QQi(%s, %s)" % (self.re, self.im)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return "%s*i" % (self.im,)
        sign = "+" if self.im > 0 else "-"
        return "(%s%s%s*i)" % (self.re, sign, abs(self.im))


def _as_qqi(x):
    if isinstance(x, QQi):
        return x
    return QQi(rational(x))


# ------------------------------------------------------------ factorization

def factor_int(n):
    """Trial-division factorization of n >= 1 as {prime: exponent}."""
    n = int(n)
    assert n >= 1
    out = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def gaussian_prime_over(p):
    """Canonical first-quadrant Gaussian prime (a, b) over a split prime p.

    p = 2 gives (1, 1); p ≡ 1 (mod 4) gives the unique a > b > 0 with
    a*a + b*b = p. Inert primes (p ≡ 3 mod 4) return None.
    """
    if p == 2:
        return (1, 1)
    if p % 4 == 3:
        return None
    for b in range(1, math.isqrt(p // 2) + 1):
        a2 = p - b * b
        a = math.isqrt(a2)
        if a * a == a2:
            assert a > b
            return (a, b)
    raise AssertionError("no two-square splitting found for prime %d" % p)


def _gauss_div(x, y, a, b):
    # exact division (x + yi) / (a + bi) over Gaussian integers, or None
    n = a * a + b * b
    re = x * a + y * b
    im = y * a - x * b
    if re % n or im % n:
        return None
    return re // n, im // n


def gaussian_factor(z):
    """Factor a nonzero Gaussian rational z over canonical Gaussian primes.

    Returns (u, rational_exps, gauss_exps) with

        z = i^u * prod_p p^rational_exps[p] * prod_(a,b) (a+bi)^gauss_exps[(a,b)]

    where p runs over rational primes (integer exponents, possibly negative)
    and (a, b) over canonical first-quadrant Gaussian primes. Conjugate primes
    are rewritten via conj(pi) = p / pi, so angles always reference canonical
    primes only.
    """
    z = _as_qqi(z)
    if not z:
        raise ZeroDivisionError("zero has no factorization")
    den = math.lcm(z.re.denominator, z.im.denominator)
    x = int(z.re * den)
    y = int(z.im * den)
    rational_exps = {}
    for p, e in factor_int(den).items():
        rational_exps[p] = rational_exps.get(p, 0) - e
    gauss_exps = {}
    norm = x * x + y * y
    for p, e in sorted(factor_int(norm).items()):
        g = gaussian_prime_over(p)
        if g is None:
            # inert: contributes the real factor p^(e/2)
            assert e % 2 == 0
            half = e // 2
            for _ in range(half):
                assert x % p == 0 and y % p == 0
                x //= p
                y //= p
            rational_exps[p] = rational_exps.get(p, 0) + half
            continue
        a, b = g
        first = 0
        while True:
            q = _gauss_div(x, y, a, b)
            if q is None:
                break
            x, y = q
            first += 1
        second = 0
        while True:
            q = _gauss_div(x, y, a, -b)
            if q is None:
                break
            x, y = q
            second += 1
        if p == 2:
            # ramified: conj(1+i) = -i (1+i), fold into the unit at the end
            assert second == 0 and first == e
            gauss_exps[g] = gauss_exps.get(g, 0) + first
        else:
            assert first + second == e
            # conj(pi)^s = p^s * pi^(-s)
            net = first - second
            if net:
                gauss_exps[g] = gauss_exps.get(g, 0) + net
            if second:
                rational_exps[p] = rational_exps.get(p, 0) + second
    unit = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}.get((x, y))
    assert unit is not None, "nonunit remainder (%d, %d)" % (x, y)
    rational_exps = {p: e for p, e in sorted(rational_exps.items()) if e}
    gauss_exps = {g: e for g, e in sorted(gauss_exps.items()) if e}
    return unit, rational_exps, gauss_exps


# -------------------------------------------------------- symbolic constants

PI = ("pi",)


def ZETA(k):
    assert k >= 2
    return ("zeta", k)


def LOG(p):
    return ("log", p)


def ARG(a, b):
    return ("arg", a, b)


_ATOM_CACHE = {}


def atom_value(atom):
    """Float value of one atom; the only place numerics are produced."""
    if atom in _ATOM_CACHE:
        return _ATOM_CACHE[atom]
    kind = atom[0]
    if kind == "pi":
        v = math.pi
    elif kind == "zeta":
        import mpmath
        v = float(mpmath.zeta(atom[1]))
    elif kind == "log":
        v = math.log(atom[1])
    elif kind == "arg":
        v = math.atan2(atom[2], atom[1])
    else:
        raise ValueError("unknown atom %r" % (atom,))
    _ATOM_CACHE[atom] = v
    return v


_ZERO = QQi(0)


class SymbolicConstant:
    """Exact element of the constant field.

    Stored as a dict from monomials (sorted tuples of (atom, power)) to QQi
    coefficients. Addition and multiplication are exact; numeric() evaluates
    to a complex double and is a ring homomorphism.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = _as_qqi(coeff)
                if coeff:
                    clean[mono] = coeff
        self.terms = clean

    @classmethod
    def scalar(cls, value):
        value = _as_qqi(value)
        if not value:
            return cls()
        return cls({(): value})

    @classmethod
    def atom(cls, atom, coeff=1):
        return cls({((atom, 1),): _as_qqi(coeff)})

    def __add__(self, other):
        other = _as_symbolic(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            s = out.get(mono, _ZERO) + coeff
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return SymbolicConstant(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_symbolic(other))

    def __rsub__(self, other):
        return _as_symbolic(other) + (-self)

    def __neg__(self):
        return SymbolicConstant({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        other = _as_symbolic(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _merge_monomials(m1, m2)
                s = out.get(mono, _ZERO) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return SymbolicConstant(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        assert int(k) == k and k >= 0
        out = SymbolicConstant.scalar(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = _as_symbolic(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return not self.terms or set(self.terms) <= {()}

    def rational_part(self):
        return self.terms.get((), _ZERO)

    def numeric(self):
        total = 0j
        for mono, coeff in self.terms.items():
            v = 1.0
            for atom, power in mono:
                v *= atom_value(atom) ** power
            total += complex(coeff) * v
        return total

    def conj_if_real_atoms(self):
        # all atoms are real numbers, so conjugation just conjugates coefficients
        return SymbolicConstant({m: c.conj() for m, c in self.terms.items()})

    def __repr__(self):
        return "SymbolicConstant(%s)" % (str(self),)

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for mono, coeff in sorted(self.terms.items()):
            factors = []
            for atom, power in mono:
                name = _atom_name(atom)
                factors.append(name if power == 1 else "%s^%d" % (name, power))
            body = "*".join(factors)
            cs = str(coeff)
            if body:
                bits.append(body if cs == "1" else "%s*%s" % (cs, body))
            else:
                bits.append(cs)
        return " + ".join(bits)


def _atom_name(atom):
    kind = atom[0]
    if kind == "pi":
        return "pi"
    if kind == "zeta":
        return "zeta(%d)" % atom[1]
    if kind == "log":
        return "log(%d)" % atom[1]
    if kind == "arg":
        return "arg(%d+%di)" % (atom[1], atom[2])
    raise ValueError(atom)


def _merge_monomials(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for atom, p in m2:
        powers[atom] = powers.get(atom, 0) + p
    return tuple(sorted(powers.items()))


def _as_symbolic(x):
    if isinstance(x, SymbolicConstant):
        return x
    return SymbolicConstant.scalar(x)


ZERO = SymbolicConstant()
ONE = SymbolicConstant.scalar(1)
I_UNIT = SymbolicConstant.scalar(QQi(0, 1))


# ------------------------------------------------- logs and angle branches

def log_abs(z):
    """log |z| as an exact combination of log-prime atoms, for z in Q(i)*."""
    unit, rational_exps, gauss_exps = gaussian_factor(z)
    out = SymbolicConstant()
    acc = {}
    for p, e in rational_exps.items():
        acc[p] = acc.get(p, Fraction(0)) + e
    for (a, b), e in gauss_exps.items():
        # |a+bi| = sqrt(p)
        p = a * a + b * b
        acc[p] = acc.get(p, Fraction(0)) + Fraction(e, 2)
    for p, e in sorted(acc.items()):
        if e:
            out = out + SymbolicConstant.atom(LOG(p), e)
    return out


def arg_exact(z):
    """Some exact angle of z (congruent to arg z mod 2*pi).

    Combination of pi and Gaussian-prime angle atoms; not necessarily the
    principal value.
    """
    unit, rational_exps, gauss_exps = gaussian_factor(z)
    out = SymbolicConstant()
    if unit:
        out = out + SymbolicConstant.atom(PI, Fraction(unit, 2))
    for (a, b), e in gauss_exps.items():
        out = out + SymbolicConstant.atom(ARG(a, b), e)
    return out


def principal_arg(z):
    """The principal angle of z in (-pi, pi], exactly.

    The 2*pi*k correction on top of arg_exact is chosen numerically, which is
    safe: the only way the target can sit on the +-pi boundary is z being a
    negative real, which is handled exactly first.
    """
    z = _as_qqi(z)
    if not z:
        raise ZeroDivisionError("zero has no angle")
    if z.im == 0:
        if z.re > 0:
            return SymbolicConstant()
        return SymbolicConstant.atom(PI, 1)
    raw = arg_exact(z)
    target = math.atan2(float(z.im), float(z.re))
    nu = raw.numeric().real
    k = round((target - nu) / (2 * math.pi))
    out = raw + SymbolicConstant.atom(PI, 2 * k) if k else raw
    check = out.numeric().real
    assert abs(check - target) < 1e-9, "angle normalization drifted"
    assert -math.pi + 1e-9 < check < math.pi + 1e-9
    return out


# ------------------------------------------------------------ "p/q" strings

def rational_str(x):
    x = rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def parse_rational(s):
    """Parse an exact rational from an int or a "p/q" string.

    Decimal literals are refused on purpose: "1.5" is ambiguous about
    exactness and the file format requires explicit fractions.
    """
    if isinstance(s, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        raise ValueError("float %r not allowed; write \"p/q\"" % (s,))
    if isinstance(s, str):
        if "." in s or "e" in s.lower():
            raise ValueError("decimal literal %r not allowed; write \"p/q\"" % (s,))
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError("bad rational literal %r: %s" % (s, exc)) from exc
    raise ValueError("bad rational value %r" % (s,))
