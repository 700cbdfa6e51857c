"""Exact scalars and dense linear algebra.

Two kinds of field are supported: the prime field GF(p), whose elements are
plain ints in ``range(p)``, and the rational function field GF(p)(x), whose
elements are :class:`RatFunc` values kept in lowest terms with a monic
denominator.  The discrete valuation ring k[t]_(t) is modelled inside
GF(p)(t) by :class:`DVR`.

All matrix routines take the field as their first argument and work on
lists of lists.  Vectors are plain lists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


# ---------------------------------------------------------------------------
# polynomials over GF(p): tuples of coefficients, lowest degree first,
# no trailing zeros (the zero polynomial is the empty tuple)

def _trim(c):
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


def poly_add(a, b, p):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = (out[i] + x) % p
    return _trim(out)


def poly_neg(a, p):
    return tuple((-x) % p for x in a)


def poly_sub(a, b, p):
    return poly_add(a, poly_neg(b, p), p)


def poly_scale(a, c, p):
    c %= p
    if c == 0:
        return ()
    return tuple((x * c) % p for x in a)


def poly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([x % p for x in out])


def poly_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], p - 2, p)
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        return (), _trim(rem)
    quot = [0] * (len(rem) - db)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k] % p
        if c == 0:
            continue
        q = (c * inv_lead) % p
        quot[k - db] = q
        for j, y in enumerate(b):
            rem[k - db + j] = (rem[k - db + j] - q * y) % p
    return _trim(quot), _trim(rem[:db])


def poly_monic(a, p):
    if not a:
        return a
    return poly_scale(a, pow(a[-1], p - 2, p), p)


def poly_gcd(a, b, p):
    while b:
        a, b = b, poly_divmod(a, b, p)[1]
    return poly_monic(a, p)


def poly_eval(a, x, p):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def poly_order(a):
    """Order of vanishing at 0 (index of the lowest nonzero coefficient)."""
    for i, c in enumerate(a):
        if c:
            return i
    raise ValueError("order of the zero polynomial")


# ---------------------------------------------------------------------------
# fields

class PrimeField:
    """GF(p) with elements stored as ints in range(p)."""

    is_prime = True

    def __init__(self, p: int):
        if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def div(self, a, b):
        return (a * self.inv(b)) % self.p

    def pow(self, a, n):
        return pow(a, n, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def in_prime_field(self, a):
        return True

    def prime_value(self, a):
        return a % self.p

    def to_str(self, a):
        return str(a)

    def parse(self, text):
        return int(text) % self.p


@dataclass(frozen=True)
class RatFunc:
    """Reduced fraction num/den of polynomials over GF(p); den is monic."""

    num: tuple
    den: tuple


class RationalFunctionField:
    """GF(p)(x): fractions of polynomials in one variable, in lowest terms."""

    is_prime = False

    def __init__(self, p: int, var: str = "s"):
        self.base = PrimeField(p)
        self.p = p
        self.var = var
        self.zero = RatFunc((), (1,))
        self.one = RatFunc((1,), (1,))

    def __repr__(self):
        return f"GF({self.p})({self.var})"

    def __eq__(self, other):
        return (isinstance(other, RationalFunctionField)
                and other.p == self.p and other.var == self.var)

    def __hash__(self):
        return hash(("GFx", self.p, self.var))

    def make(self, num, den=(1,)):
        p = self.p
        num = _trim([c % p for c in num])
        den = _trim([c % p for c in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return self.zero
        if len(den) > 1:
            g = poly_gcd(num, den, p)
            if len(g) > 1:
                num = poly_divmod(num, g, p)[0]
                den = poly_divmod(den, g, p)[0]
        lead = den[-1]
        if lead != 1:
            il = pow(lead, p - 2, p)
            num = poly_scale(num, il, p)
            den = poly_scale(den, il, p)
        return RatFunc(num, den)

    def gen(self):
        """The indeterminate itself."""
        return RatFunc((0, 1), (1,))

    def from_int(self, n):
        n %= self.p
        return RatFunc((n,), (1,)) if n else self.zero

    def add(self, a, b):
        p = self.p
        if a.den == b.den:
            if a.den == (1,):
                num = poly_add(a.num, b.num, p)
                return RatFunc(num, (1,)) if num else self.zero
            return self.make(poly_add(a.num, b.num, p), a.den)
        return self.make(poly_add(poly_mul(a.num, b.den, p), poly_mul(b.num, a.den, p), p),
                         poly_mul(a.den, b.den, p))

    def neg(self, a):
        return RatFunc(poly_neg(a.num, self.p), a.den) if a.num else a

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a.num or not b.num:
            return self.zero
        p = self.p
        if a.den == (1,) and b.den == (1,):
            return RatFunc(poly_mul(a.num, b.num, p), (1,))
        return self.make(poly_mul(a.num, b.num, p), poly_mul(a.den, b.den, p))

    def inv(self, a):
        if not a.num:
            raise ZeroDivisionError("inverse of zero")
        return self.make(a.den, a.num)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, n):
        if n < 0:
            return self.pow(self.inv(a), -n)
        out = self.one
        while n:
            if n & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            n >>= 1
        return out

    def is_zero(self, a):
        return not a.num

    def in_prime_field(self, a):
        return len(a.num) <= 1 and a.den == (1,)

    def prime_value(self, a):
        if not self.in_prime_field(a):
            raise ValueError(f"{self.to_str(a)} is not in GF({self.p})")
        return a.num[0] if a.num else 0

    def valuation(self, a):
        """Order of a at x = 0; None for zero."""
        if not a.num:
            return None
        return poly_order(a.num) - poly_order(a.den)

    def evaluate(self, a, x):
        d = poly_eval(a.den, x, self.p)
        if d == 0:
            raise ZeroDivisionError("pole at evaluation point")
        return poly_eval(a.num, x, self.p) * pow(d, self.p - 2, self.p) % self.p

    def _poly_str(self, c):
        terms = []
        for i, x in enumerate(c):
            if not x:
                continue
            if i == 0:
                terms.append(str(x))
            else:
                mono = self.var if i == 1 else f"{self.var}^{i}"
                terms.append(mono if x == 1 else f"{x}*{mono}")
        return "+".join(terms) if terms else "0"

    def to_str(self, a):
        if a.den == (1,):
            return self._poly_str(a.num)
        return f"({self._poly_str(a.num)})/({self._poly_str(a.den)})"


def make_field(p: int, var: Optional[str] = None):
    return PrimeField(p) if var is None else RationalFunctionField(p, var)


class DVR:
    """The local ring k[t]_(t) inside its fraction field GF(p)(t)."""

    def __init__(self, p: int, var: str = "t"):
        self.K = RationalFunctionField(p, var)
        self.k = PrimeField(p)
        self.p = p
        self.t = self.K.gen()

    def __repr__(self):
        return f"GF({self.p})[{self.K.var}]_({self.K.var})"

    def element(self, num, den=(1,)):
        x = self.K.make(num, den)
        if not self.contains(x):
            raise ValueError(f"{self.K.to_str(x)} is not in the local ring")
        return x

    def contains(self, x):
        return not x.num or x.den[0] != 0

    def valuation(self, x):
        return self.K.valuation(x)

    def is_unit(self, x):
        return bool(x.num) and self.K.valuation(x) == 0

    def t_power(self, k):
        return self.K.pow(self.t, k)

    def residue(self, x):
        if not self.contains(x):
            raise ValueError("residue of an element outside the ring")
        return self.K.evaluate(x, 0) if x.num else 0


# ---------------------------------------------------------------------------
# dense matrices

def zeros(F, rows, cols):
    return [[F.zero] * cols for _ in range(rows)]


def identity(F, n):
    out = zeros(F, n, n)
    for i in range(n):
        out[i][i] = F.one
    return out


def transpose(M, cols=None):
    if not M:
        return [[] for _ in range(cols or 0)]
    return [list(r) for r in zip(*M)]


def mat_mul(F, A, B):
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    if F.is_prime:
        p = F.p
        Bt = list(zip(*B)) if B else [()] * cols
        return [[sum(a * b for a, b in zip(row, col)) % p for col in Bt] for row in A]
    out = zeros(F, len(A), cols)
    for i, row in enumerate(A):
        orow = out[i]
        for k in range(inner):
            a = row[k]
            if F.is_zero(a):
                continue
            brow = B[k]
            for j in range(cols):
                b = brow[j]
                if not F.is_zero(b):
                    orow[j] = F.add(orow[j], F.mul(a, b))
    return out


def mat_vec(F, A, v):
    if F.is_prime:
        p = F.p
        return [sum(a * b for a, b in zip(row, v)) % p for row in A]
    out = []
    for row in A:
        acc = F.zero
        for a, b in zip(row, v):
            if not F.is_zero(a) and not F.is_zero(b):
                acc = F.add(acc, F.mul(a, b))
        out.append(acc)
    return out


def mat_add(F, A, B):
    return [[F.add(a, b) for a, b in zip(r, s)] for r, s in zip(A, B)]


def mat_sub(F, A, B):
    return [[F.sub(a, b) for a, b in zip(r, s)] for r, s in zip(A, B)]


def mat_scale(F, c, A):
    return [[F.mul(c, a) for a in r] for r in A]


def is_zero_matrix(F, A):
    return all(F.is_zero(a) for r in A for a in r)


def rref(F, M):
    """Row-reduced echelon form.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows, so the
    rank is ``len(pivots)``.
    """
    rows = [list(r) for r in M]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    if F.is_prime:
        p = F.p
        for c in range(ncols):
            piv = None
            for i in range(r, len(rows)):
                if rows[i][c] % p:
                    piv = i
                    break
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            prow = rows[r]
            inv = pow(prow[c], p - 2, p)
            if inv != 1:
                prow = [(x * inv) % p for x in prow]
                rows[r] = prow
            for i in range(len(rows)):
                if i != r:
                    f = rows[i][c] % p
                    if f:
                        row = rows[i]
                        rows[i] = [(a - f * b) % p for a, b in zip(row, prow)]
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
        return rows[:r], pivots
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if not F.is_zero(rows[i][c]):
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        inv = F.inv(prow[c])
        prow = [F.mul(x, inv) if not F.is_zero(x) else F.zero for x in prow]
        rows[r] = prow
        nz = [j for j in range(c, ncols) if not F.is_zero(prow[j])]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][c]
                if not F.is_zero(f):
                    row = list(rows[i])
                    for j in nz:
                        row[j] = F.sub(row[j], F.mul(f, prow[j]))
                    rows[i] = row
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(F, M):
    return len(rref(F, M)[1])


def kernel(F, M, ncols=None):
    """Basis (list of vectors) of the right null space of M."""
    if ncols is None:
        ncols = len(M[0]) if M else 0
    R, pivots = rref(F, M)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [F.zero] * ncols
        v[free] = F.one
        for row, pc in zip(R, pivots):
            x = row[free]
            if not F.is_zero(x):
                v[pc] = F.neg(x)
        basis.append(v)
    return basis


def solve(F, M, b):
    """A solution x of M x = b, or None when the system is inconsistent."""
    if len(M) != len(b):
        raise ValueError("dimension mismatch")
    ncols = len(M[0]) if M else 0
    aug = [list(r) + [bi] for r, bi in zip(M, b)]
    R, pivots = rref(F, aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [F.zero] * ncols
    for row, pc in zip(R, pivots):
        x[pc] = row[ncols]
    return x


def row_space(F, vectors):
    """Echelon basis of the span of the given vectors."""
    return rref(F, vectors)[0] if vectors else []


def in_span(F, echelon, pivots, v):
    """Membership test against an echelon basis with known pivots."""
    return is_zero_vector(F, reduce_vector(F, echelon, pivots, v))


def reduce_vector(F, echelon, pivots, v):
    v = list(v)
    for row, pc in zip(echelon, pivots):
        c = v[pc]
        if not F.is_zero(c):
            if F.is_prime:
                p = F.p
                v = [(a - c * b) % p for a, b in zip(v, row)]
            else:
                v = [F.sub(a, F.mul(c, b)) if not F.is_zero(b) else a for a, b in zip(v, row)]
    return v


def is_zero_vector(F, v):
    return all(F.is_zero(x) for x in v)


def subspace_intersection(F, U, V, n):
    """Basis of span(U) ∩ span(V) in an ambient space of dimension n."""
    if not U or not V:
        return []
    # solve sum a_i u_i = sum b_j v_j
    cols = [list(u) for u in U] + [[F.neg(x) for x in v] for v in V]
    M = transpose(cols)
    ker = kernel(F, M, len(cols))
    out = []
    for k in ker:
        w = [F.zero] * n
        for a, u in zip(k[:len(U)], U):
            if not F.is_zero(a):
                w = [F.add(x, F.mul(a, y)) for x, y in zip(w, u)]
        out.append(w)
    return row_space(F, out)


def largest_invariant_subspace(F, W, generators):
    """Largest subspace K of span(W) with g K ⊆ K for every generator g.

    Iterates K <- {v in K : g v in K for all g} until it stabilises.
    """
    if not W:
        return []
    n = len(W[0])
    K = row_space(F, W)
    while K:
        # functionals vanishing on K
        ann = kernel(F, K, n)
        if not ann:
            return K
        # coefficient vectors c with sum_i c_i (g K_i) in K for all g
        rows = []
        Kt = transpose(K)
        for g in generators:
            gK = mat_mul(F, g, Kt)          # n x dim K
            rows.extend(mat_mul(F, ann, gK))
        if not rows:
            return K
        coeffs = kernel(F, rows, len(K))
        if len(coeffs) == len(K):
            return K
        newK = []
        for c in coeffs:
            w = [F.zero] * n
            for a, u in zip(c, K):
                if not F.is_zero(a):
                    w = [F.add(x, F.mul(a, y)) for x, y in zip(w, u)]
            newK.append(w)
        K = row_space(F, newK)
    return K


# ---------------------------------------------------------------------------
# linear algebra over the DVR

@dataclass
class DVRSolution:
    """Outcome of :func:`dvr_solve`.

    status is "ok" (integral solution in ``x``), "non_integral" (solvable
    over the fraction field only; ``x`` is a field solution) or
    "inconsistent".
    """

    status: str
    x: Optional[list] = None

    @property
    def ok(self):
        return self.status == "ok"


def dvr_smith(R: DVR, M):
    """Smith form over the local ring.

    Every entry of M must lie in the ring.  Returns ``(U, D, V, r)`` with
    ``U M V = D``, U and V invertible over the ring, D diagonal whose first
    r entries are powers of t and the rest zero.
    """
    K = R.K
    m = len(M)
    n = len(M[0]) if M else 0
    for row in M:
        for x in row:
            if not R.contains(x):
                raise ValueError("matrix entry outside the local ring")
    D = [list(r) for r in M]
    U = identity(K, m)
    V = identity(K, n)
    r = 0
    while r < min(m, n):
        best = None
        for i in range(r, m):
            for j in range(r, n):
                x = D[i][j]
                if x.num:
                    v = K.valuation(x)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        D[r], D[i] = D[i], D[r]
        U[r], U[i] = U[i], U[r]
        for row in D:
            row[r], row[j] = row[j], row[r]
        for row in V:
            row[r], row[j] = row[j], row[r]
        # scale pivot to t^v
        unit = K.div(D[r][r], R.t_power(v))
        uinv = K.inv(unit)
        D[r] = [K.mul(uinv, x) for x in D[r]]
        U[r] = [K.mul(uinv, x) for x in U[r]]
        piv = D[r][r]
        for i2 in range(m):
            if i2 != r and D[i2][r].num:
                f = K.div(D[i2][r], piv)
                D[i2] = [K.sub(a, K.mul(f, b)) for a, b in zip(D[i2], D[r])]
                U[i2] = [K.sub(a, K.mul(f, b)) for a, b in zip(U[i2], U[r])]
        for j2 in range(n):
            if j2 != r and D[r][j2].num:
                f = K.div(D[r][j2], piv)
                for row in D:
                    row[j2] = K.sub(row[j2], K.mul(f, row[r]))
                for row in V:
                    row[j2] = K.sub(row[j2], K.mul(f, row[r]))
        r += 1
    return U, D, V, r


def dvr_solve(R: DVR, M, b):
    """Solve M x = b with x in the local ring when possible.

    Entries of M and b must lie in the ring.
    """
    K = R.K
    if len(M) != len(b):
        raise ValueError("dimension mismatch")
    n = len(M[0]) if M else 0
    if n == 0:
        if all(not x.num for x in b):
            return DVRSolution("ok", [])
        return DVRSolution("inconsistent")
    U, D, V, r = dvr_smith(R, M)
    c = mat_vec(K, U, b)
    if any(c[i].num for i in range(r, len(c))):
        return DVRSolution("inconsistent")
    y = [K.zero] * n
    integral = True
    for i in range(r):
        y[i] = K.div(c[i], D[i][i])
        if not R.contains(y[i]):
            integral = False
    x = mat_vec(K, V, y)
    return DVRSolution("ok" if integral else "non_integral", x)


def scale_into_ring(R: DVR, M):
    """Smallest k >= 0 with t^k M integral, together with t^k M."""
    K = R.K
    worst = 0
    for row in M:
        for x in row:
            if x.num:
                worst = min(worst, K.valuation(x))
    k = -worst
    if k == 0:
        return 0, [list(r) for r in M]
    tk = R.t_power(k)
    return k, [[K.mul(tk, x) for x in r] for r in M]


def lattice_basis(R: DVR, gens: Sequence[Sequence]):
    """Basis of the ring-span of the given vectors in K^n (a list of vectors)."""
    K = R.K
    gens = [list(g) for g in gens]
    if not gens:
        return []
    k, G = scale_into_ring(R, transpose(gens))      # columns are generators
    U, D, V, r = dvr_smith(R, G)
    # span(G) = U^{-1} D (V^{-1} A^m) = U^{-1} D A^m
    Uinv = inverse(K, U)
    tinv = R.t_power(-k)
    out = []
    for i in range(r):
        col = [K.mul(Uinv[row][i], D[i][i]) for row in range(len(Uinv))]
        out.append([K.mul(tinv, x) for x in col])
    return out


def lattice_contains(R: DVR, basis, v):
    if not basis:
        return all(not x.num for x in v)
    # columns: basis vectors then v; a common power of t keeps membership
    M = transpose([list(b) for b in basis] + [list(v)])
    _, Ms = scale_into_ring(R, M)
    A = [row[:-1] for row in Ms]
    bb = [row[-1] for row in Ms]
    return dvr_solve(R, A, bb).ok


def inverse(F, M):
    n = len(M)
    aug = [list(r) + e for r, e in zip(M, identity(F, n))]
    R_, pivots = rref(F, aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R_[:n]]
