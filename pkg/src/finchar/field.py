"""Finite fields F_q, q = p^k, with elements encoded as integer codes.

An element of F_{p^k} is a polynomial c_0 + c_1 t + ... + c_{k-1} t^{k-1}
over F_p reduced modulo a fixed irreducible polynomial; its code is the
base-p number ``sum(c_i * p**i)``.  For k = 1 the code is the residue itself.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

FieldElement = int

MAX_Q = 1 << 16
TABLE_Q = 256


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p**k, or raise FieldError."""
    if q < 2:
        raise FieldError(f"q={q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    if r != 1:
        raise FieldError(f"q={q} is not a prime power")
    return p, k


# -- polynomials over F_p as coefficient lists, lowest degree first ---------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        f = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - f * c) % p
        _trim(a)
    return a


def is_irreducible(modulus_low_first: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..k//2."""
    m = _trim(list(modulus_low_first))
    k = len(m) - 1
    if k < 1:
        return False
    for d in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            if not _polymod(m, list(tail) + [1], p):
                return False
    return True


def default_modulus(p: int, k: int) -> tuple[int, ...]:
    """Lowest-lexicographic monic irreducible of degree k, high-to-low."""
    for tail in itertools.product(range(p), repeat=k):
        cand = (1,) + tail
        if is_irreducible(cand[::-1], p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


class FieldSpec:
    """The field F_q.  Immutable after construction.

    Arithmetic is exposed as bound callables ``add, sub, neg, mul, inv, pow``
    acting on integer codes; for q <= 256 they are backed by full tables.
    """

    def __init__(self, p: int, k: int = 1, modulus: Iterable[int] | None = None,
                 max_q: int = MAX_Q):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if k < 1:
            raise FieldError("extension degree must be >= 1")
        q = p ** k
        if q > max_q:
            raise FieldError(f"q={q} exceeds the cap {max_q}")
        self.p = p
        self.k = k
        self.q = q
        if k == 1:
            self.modulus: tuple[int, ...] = ()
        else:
            if modulus is None:
                mod = default_modulus(p, k)
            else:
                mod = tuple(int(c) % p for c in modulus)
                if len(mod) != k + 1 or mod[0] == 0:
                    raise FieldError(f"modulus must have degree exactly {k}")
                lead_inv = pow(mod[0], p - 2, p)
                mod = tuple(c * lead_inv % p for c in mod)
            if not is_irreducible(mod[::-1], p):
                raise FieldError(f"modulus {mod} is reducible over F_{p}")
            self.modulus = mod
        self._build()

    # -- construction -----------------------------------------------------

    def _digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.k):
            out.append(a % p)
            a //= p
        return out

    def _code(self, digits: Sequence[int]) -> int:
        c = 0
        for d in reversed(digits):
            c = c * self.p + d
        return c

    def _slow_mul(self, a: int, b: int) -> int:
        p = self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        r = _polymod(prod, self.modulus[::-1], p)
        return self._code(r + [0] * (self.k - len(r)))

    def _slow_add(self, a: int, b: int) -> int:
        p = self.p
        return self._code([(x + y) % p for x, y in zip(self._digits(a), self._digits(b))])

    def _build(self) -> None:
        p, q = self.p, self.q
        if self.k == 1:
            def add(a, b):
                return (a + b) % p

            def mul(a, b):
                return a * b % p

            def neg(a):
                return -a % p

            exp_table = log_table = None
        else:
            exp_table, log_table = self._log_tables()
            if p == 2:
                def add(a, b):
                    return a ^ b

                def neg(a):
                    return a
            else:
                slow_add = self._slow_add
                digits = [self._digits(a) for a in range(q)]
                negs = [self._code([-d % p for d in ds]) for ds in digits]

                def add(a, b):
                    return slow_add(a, b)

                def neg(a):
                    return negs[a]

            qm1 = q - 1

            def mul(a, b):
                if a == 0 or b == 0:
                    return 0
                return exp_table[(log_table[a] + log_table[b]) % qm1]

        if q <= TABLE_Q:
            at = [[add(a, b) for b in range(q)] for a in range(q)]
            mt = [[mul(a, b) for b in range(q)] for a in range(q)]
            nt = [neg(a) for a in range(q)]

            def add(a, b):
                return at[a][b]

            def mul(a, b):
                return mt[a][b]

            def neg(a):
                return nt[a]

            self.add_table, self.mul_table, self.neg_table = at, mt, nt
        else:
            self.add_table = self.mul_table = self.neg_table = None

        self.add = add
        self.mul = mul
        self.neg = neg
        self._exp, self._log = exp_table, log_table

    def _log_tables(self) -> tuple[list[int], list[int]]:
        q = self.q
        for g in range(2, q):
            exp = [1]
            x = 1
            for _ in range(q - 2):
                x = self._slow_mul(x, g)
                if x == 1:
                    break
                exp.append(x)
            if len(exp) == q - 1:
                log = [0] * q
                for i, v in enumerate(exp):
                    log[v] = i
                return exp, log
        raise FieldError("no primitive element found")  # unreachable for a field

    # -- arithmetic -------------------------------------------------------

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def from_int(self, c: int) -> int:
        """Image of an integer in the prime subfield."""
        return c % self.p

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"code {a} out of range for F_{self.q}")
        return a

    def elements(self) -> range:
        return range(self.q)

    # -- identity / text --------------------------------------------------

    def _key(self):
        return (self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.k == 1:
            return f"FieldSpec(p={self.p})"
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={self.modulus})"

    def header_lines(self) -> list[str]:
        if self.k == 1:
            return [f"q {self.p}"]
        return [f"q {self.p}^{self.k}", "modulus " + " ".join(map(str, self.modulus))]

    def format_element(self, a: int) -> str:
        return str(a) if self.k == 1 or a < self.p else f"g{a}"

    def __reduce__(self):
        # the bound arithmetic closures do not pickle; rebuild from parameters
        return (FieldSpec, (self.p, self.k, self.modulus))

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, d: dict) -> "FieldSpec":
        return cls(d["p"], d.get("k", 1), d.get("modulus") or None)


def parse_q(text: str) -> tuple[int, int]:
    """Parse ``'3'``, ``'9'`` or ``'3^2'`` into (p, k)."""
    text = text.strip()
    if "^" in text:
        p_s, k_s = text.split("^", 1)
        p, k = int(p_s), int(k_s)
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        return p, k
    return prime_power(int(text))


def field_add(a: int, b: int, spec: FieldSpec) -> int:
    return spec.add(a, b)


def field_mul(a: int, b: int, spec: FieldSpec) -> int:
    return spec.mul(a, b)


def field_inv(a: int, spec: FieldSpec) -> int:
    return spec.inv(a)


def field_pow(a: int, e: int, spec: FieldSpec) -> int:
    return spec.pow(a, e)


_CACHE: dict = {}


def GF(q: int, modulus: Iterable[int] | None = None) -> FieldSpec:
    """Cached constructor: ``GF(9)`` builds F_9 with the default modulus."""
    p, k = prime_power(q)
    key = (q, tuple(modulus) if modulus is not None else None)
    if key not in _CACHE:
        _CACHE[key] = FieldSpec(p, k, modulus)
    return _CACHE[key]
