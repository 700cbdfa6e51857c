"""Chevalley bases, p-characters, graded modules and the PBW straightening
engine that builds (twisted) baby Verma modules.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from sympy import Matrix

from . import scalars as S
from .lattice import LeviDatum, RootDatum, WeylElement, add, scale, sub

Key = Tuple[tuple, tuple]  # (grade representative, residues of the h-weight mod p)


# ---------------------------------------------------------------------------
# Chevalley basis

def _E(n, i, j):
    m = [[Fraction(0)] * n for _ in range(n)]
    m[i][j] = Fraction(1)
    return m


def _mplus(A, B, c=1):
    return [[a + c * b for a, b in zip(r, s)] for r, s in zip(A, B)]


def _mmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _mbracket(A, B):
    return _mplus(_mmul(A, B), _mmul(B, A), -1)


def _mscale(c, A):
    return [[c * a for a in r] for r in A]


def _is_zero(A):
    return all(a == 0 for r in A for a in r)


def _simple_matrices(type_label):
    """Defining-representation matrices for e_i and f_i."""
    if type_label == "A1":
        return [_E(2, 0, 1)], [_E(2, 1, 0)]
    if type_label == "A2":
        return [_E(3, 0, 1), _E(3, 1, 2)], [_E(3, 1, 0), _E(3, 2, 1)]
    if type_label == "B2":
        # sp4, first simple root long (2 eps2), second short (eps1 - eps2)
        e1 = _E(4, 1, 3)
        f1 = _E(4, 3, 1)
        e2 = _mplus(_E(4, 0, 1), _E(4, 3, 2), -1)
        f2 = _mplus(_E(4, 1, 0), _E(4, 2, 3), -1)
        return [e1, e2], [f1, f2]
    raise ValueError(type_label)


class ChevalleyBasis:
    """Basis {x_a : a in R} ∪ {h_i} with integral-up-to-2 structure constants.

    Labels are ("x", root) and ("h", i).  Non-simple x_b is [e_i, x_{b-a_i}]
    for the smallest admissible i; x_{-b} is normalised so [x_b, x_{-b}] is
    the coroot h_b.
    """

    def __init__(self, datum: RootDatum, verify=True):
        self.datum = datum
        d = datum
        n = d.rank
        es, fs = _simple_matrices(d.type_label)
        mats = {}
        # recipe[root] = (simple label, other root, scalar): x_root = scalar [x_simple, x_other]
        self.recipe = {}
        for i in range(n):
            mats[("x", d.simple_roots[i])] = es[i]
            mats[("x", scale(-1, d.simple_roots[i]))] = fs[i]
            mats[("h", i)] = _mbracket(es[i], fs[i])
        for b in d.positive_roots:
            if ("x", b) in mats:
                continue
            for i in range(n):
                rest = sub(b, d.simple_roots[i])
                if rest in d.positive_roots:
                    break
            else:
                raise RuntimeError(f"no decomposition for {b}")
            xb = _mbracket(es[i], mats[("x", rest)])
            xmb = _mbracket(fs[i], mats[("x", scale(-1, rest))])
            hb = self._h_matrix(mats, d.coroot(b))
            c = _mbracket(xb, xmb)
            ratio = self._ratio(c, hb)
            # split |ratio| = k^2 evenly so both x_b and x_-b stay integral
            k = _rational_sqrt(abs(ratio)) or Fraction(1)
            sign = 1 if ratio > 0 else -1
            cb_, cmb = 1 / k, sign * k / abs(ratio)
            mats[("x", b)] = _mscale(cb_, xb)
            mats[("x", scale(-1, b))] = _mscale(cmb, xmb)
            self.recipe[b] = (("x", d.simple_roots[i]), rest, cb_)
            self.recipe[scale(-1, b)] = (("x", scale(-1, d.simple_roots[i])), scale(-1, rest), cmb)
        self.mats = mats
        self.labels = [("x", r) for r in d.roots] + [("h", i) for i in range(n)]
        self.bracket_table = {}
        for a in self.labels:
            for b in self.labels:
                self.bracket_table[(a, b)] = self._decompose(_mbracket(mats[a], mats[b]))
        if verify:
            self._verify()

    @staticmethod
    def _h_matrix(mats, coeffs):
        m = None
        for i, c in enumerate(coeffs):
            t = _mscale(Fraction(c), mats[("h", i)])
            m = t if m is None else _mplus(m, t)
        return m

    @staticmethod
    def _ratio(A, B):
        r = None
        for ra, rb in zip(A, B):
            for a, b in zip(ra, rb):
                if b != 0:
                    q = a / b
                    if r is None:
                        r = q
                    elif r != q:
                        raise RuntimeError("matrices are not proportional")
                elif a != 0:
                    raise RuntimeError("matrices are not proportional")
        return r

    def _decompose(self, A):
        """Coefficients of a matrix in the Chevalley basis."""
        out = {}
        n = len(A)
        rest = [list(r) for r in A]
        for r in self.datum.roots:
            X = self.mats[("x", r)]
            # root vectors have disjoint off-diagonal supports in these realizations
            pos = next((i, j) for i in range(n) for j in range(n) if X[i][j] != 0)
            c = rest[pos[0]][pos[1]] / X[pos[0]][pos[1]]
            if c != 0:
                out[("x", r)] = c
                rest = _mplus(rest, X, -c)
        if not _is_zero(rest):
            hs = [self.mats[("h", i)] for i in range(self.datum.rank)]
            M = Matrix([[h[k][k] for h in hs] for k in range(n)])
            b = Matrix([rest[k][k] for k in range(n)])
            sol = (M.T * M).solve(M.T * b)
            chk = rest
            for i, c in enumerate(sol):
                c = Fraction(int(c.p), int(c.q))
                if c != 0:
                    out[("h", i)] = c
                    chk = _mplus(chk, hs[i], -c)
            if not _is_zero(chk):
                raise RuntimeError("matrix is not in the span of the basis")
        return out

    def bracket(self, a, b):
        return self.bracket_table[(a, b)]

    def structure_constant(self, a, b):
        """N_{a,b} with [x_a, x_b] = N_{a,b} x_{a+b} (0 if a+b is not a root)."""
        return self.bracket_table[(("x", a), ("x", b))].get(("x", add(a, b)), Fraction(0))

    def h_root(self, r):
        """h_r in the basis h_i, i.e. the simple-coroot coefficients."""
        return self.datum.coroot(r)

    def _verify(self):
        d = self.datum
        p = d.p
        labels = self.labels
        # Jacobi
        for a, b, c in itertools.product(labels, repeat=3):
            tot = {}
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                for l1, c1 in self.bracket(y, z).items():
                    for l2, c2 in self.bracket(x, l1).items():
                        tot[l2] = tot.get(l2, 0) + c1 * c2
            if any(v != 0 for v in tot.values()):
                raise RuntimeError(f"Jacobi fails on {a},{b},{c}")
        for r in d.roots:
            hb = self.bracket(("x", r), ("x", scale(-1, r)))
            want = {("h", i): Fraction(c) for i, c in enumerate(d.coroot(r)) if c}
            if hb != want:
                raise RuntimeError(f"[x_a, x_-a] != h_a for {r}")
            for i in range(d.rank):
                br = self.bracket(("h", i), ("x", r))
                k = d.root_pairing_simple(r, i)
                if br != ({("x", r): Fraction(k)} if k else {}):
                    raise RuntimeError("h does not act by the root")
        for a in d.roots:
            for b in d.roots:
                c = self.structure_constant(a, b)
                if c.denominator % p == 0:
                    raise RuntimeError("structure constant not p-integral")
        # restricted structure on the adjoint representation mod p
        ad = {l: self._ad_mod_p(l) for l in labels}
        for r in d.roots:
            if not _mat_is_zero_mod(_mat_pow_mod(ad[("x", r)], p, p), p):
                raise RuntimeError("ad(x_a)^p != 0")
        for i in range(d.rank):
            if _mat_pow_mod(ad[("h", i)], p, p) != ad[("h", i)]:
                raise RuntimeError("ad(h)^p != ad(h)")

    def _ad_mod_p(self, l):
        p = self.datum.p
        idx = {x: k for k, x in enumerate(self.labels)}
        n = len(self.labels)
        M = [[0] * n for _ in range(n)]
        for col, b in enumerate(self.labels):
            for lab, c in self.bracket(l, b).items():
                M[idx[lab]][col] = frac_mod(c, p)
        return M


def _rational_sqrt(q):
    q = Fraction(q)
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def frac_mod(c, p):
    c = Fraction(c)
    return (c.numerator * pow(c.denominator, p - 2, p)) % p


def frac_to_field(F, c):
    c = Fraction(c)
    return F.div(F.from_int(c.numerator), F.from_int(c.denominator))


def _mat_pow_mod(M, k, p):
    n = len(M)
    R = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(k):
        R = [[sum(R[i][t] * M[t][j] for t in range(n)) % p for j in range(n)] for i in range(n)]
    return R


def _mat_is_zero_mod(M, p):
    return all(x % p == 0 for r in M for x in r)


_CHEVALLEY_CACHE = {}


def build_chevalley(datum: RootDatum) -> ChevalleyBasis:
    key = (datum.type_label, datum.p)
    if key not in _CHEVALLEY_CACHE:
        _CHEVALLEY_CACHE[key] = ChevalleyBasis(datum)
    return _CHEVALLEY_CACHE[key]


# ---------------------------------------------------------------------------
# p-character and structural map

@dataclass(frozen=True)
class PCharacter:
    """Standard Levi form: chi(x_{-a}) = 1 for simple a in I, zero elsewhere."""

    levi: LeviDatum

    def value(self, r) -> int:
        d = self.levi.datum
        neg = scale(-1, tuple(r))
        for i in self.levi.I:
            if neg == d.simple_roots[i]:
                return 1
        return 0


class StructuralMap:
    """Values pi(h_i) in a scalar field; pi(h_b) by linearity in coroots."""

    def __init__(self, datum: RootDatum, F, values, name=None):
        if len(values) != datum.rank:
            raise ValueError("need one value per simple coroot")
        self.datum = datum
        self.F = F
        self.values = tuple(values)
        self.name = name

    def __repr__(self):
        return f"pi({', '.join(self.F.to_str(v) for v in self.values)})"

    def __eq__(self, other):
        return (isinstance(other, StructuralMap) and self.F == other.F
                and self.values == other.values and self.datum.type_label == other.datum.type_label)

    def __hash__(self):
        return hash((self.F, self.values))

    def h(self, r):
        F = self.F
        acc = F.zero
        for c, v in zip(self.datum.coroot(r), self.values):
            acc = F.add(acc, F.mul(F.from_int(c), v))
        return acc

    def xi_p(self, r):
        """pi(h_r)^p - pi(h_r), the value of the central element h_r^p - h_r."""
        F = self.F
        x = self.h(r)
        return F.sub(F.pow(x, self.datum.p), x)

    def transformed(self, w: WeylElement):
        """The map h -> pi(w h) for a Weyl group element w."""
        d = self.datum
        F = self.F
        vals = []
        for i in range(d.rank):
            r = d.act_root(w, d.simple_roots[i])
            vals.append(self.h(r))
        return StructuralMap(d, F, vals, name=None)

    def r_pi(self, ring=None):
        """Roots r with pi(h_r)^p - pi(h_r) not a unit (of ``ring`` if given, else of F)."""
        out = []
        for r in self.datum.roots:
            x = self.xi_p(r)
            if ring is not None:
                if self.F.is_zero(x) or ring.valuation(x) > 0:
                    out.append(r)
            elif self.F.is_zero(x):
                out.append(r)
        return tuple(out)

    def negated(self):
        F = self.F
        return StructuralMap(self.datum, F, [F.neg(v) for v in self.values])


def make_structural_map(datum: RootDatum, preset="zero"):
    """Presets: "zero" (pi = 0 over GF(p)), "generic" (pi(h_i) = s^(i+1)
    over GF(p)(s)), or an explicit list of values such as ["0", "s"]."""
    p = datum.p
    if preset == "zero":
        F = S.PrimeField(p)
        return StructuralMap(datum, F, [0] * datum.rank, name="zero")
    if preset == "generic":
        F = S.RationalFunctionField(p, "s")
        vals = [F.make(tuple([0] * (i + 1) + [1])) for i in range(datum.rank)]
        return StructuralMap(datum, F, vals, name="generic")
    if isinstance(preset, str):
        preset = [x.strip() for x in preset.split(",")]
    vals = list(preset)
    if len(vals) != datum.rank:
        raise ValueError("need one value per simple coroot")
    if all(_is_int_text(v) for v in vals):
        F = S.PrimeField(p)
        return StructuralMap(datum, F, [int(v) % p for v in vals], name=",".join(map(str, vals)))
    F = S.RationalFunctionField(p, "s")
    return StructuralMap(datum, F, [_parse_poly(F, str(v)) for v in vals], name=",".join(map(str, vals)))


def _is_int_text(v):
    try:
        int(v)
        return True
    except (TypeError, ValueError):
        return False


def _parse_poly(F, text):
    """Parse sums like "2+s^2" or "s" into an element of GF(p)(s)."""
    text = text.replace(" ", "").replace("-", "+-")
    acc = F.zero
    for term in filter(None, text.split("+")):
        sign = 1
        if term.startswith("-"):
            sign, term = -1, term[1:]
        if "s" in term:
            coef, _, power = term.partition("s")
            coef = coef.rstrip("*") or "1"
            power = int(power.lstrip("^") or "1")
            poly = tuple([0] * power + [int(coef) * sign % F.p])
            acc = F.add(acc, F.make(poly))
        else:
            acc = F.add(acc, F.from_int(sign * int(term)))
    return acc


# ---------------------------------------------------------------------------
# block operators: dict src_key -> (tgt_key, matrix)

def op_compose(F, A, B):
    """A after B."""
    out = {}
    for k, (k1, Mb) in B.items():
        if k1 in A:
            k2, Ma = A[k1]
            out[k] = (k2, S.mat_mul(F, Ma, Mb))
    return out


def op_lincomb(F, terms, dims):
    """sum c * op over (c, op) pairs; ops must agree on targets."""
    out = {}
    for c, A in terms:
        for k, (k1, M) in A.items():
            M = S.mat_scale(F, c, M) if c != F.one else M
            if k in out:
                t, N = out[k]
                if t != k1:
                    if S.is_zero_matrix(F, M):
                        continue
                    if S.is_zero_matrix(F, N):
                        out[k] = (k1, M)
                        continue
                    raise ValueError("inhomogeneous operator sum")
                out[k] = (t, S.mat_add(F, N, M))
            else:
                out[k] = (k1, [list(r) for r in M])
    return out


def op_is_zero(F, A):
    return all(S.is_zero_matrix(F, M) for _, M in A.values())


def op_scalar(F, dims, scalars):
    """Diagonal operator acting on block k by scalars[k]."""
    out = {}
    for k, n in dims.items():
        M = S.zeros(F, n, n)
        for i in range(n):
            M[i][i] = scalars[k]
        out[k] = (k, M)
    return out


def op_equal(F, A, B, dims):
    D = op_lincomb(F, [(F.one, A), (F.neg(F.one), B)], dims)
    return op_is_zero(F, D)


# ---------------------------------------------------------------------------
# graded modules

class GradedModule:
    """A finite-dimensional module, graded by X/ZI and by h-weights.

    The basis is split into blocks indexed by keys (grade representative,
    residues mod p).  h_i acts on block (g, r) by pi(h_i) + r_i.  Each
    generator ("e", i) / ("f", i) is stored as a block operator.
    """

    def __init__(self, F, levi: LeviDatum, pi: StructuralMap, dims: Dict[Key, int],
                 gens: Dict[tuple, dict], gen_indices=None, labels=None, ring=None, name=""):
        self.F = F
        self.levi = levi
        self.datum = levi.datum
        self.pi = pi
        self.dims = {k: n for k, n in dims.items() if n > 0}
        self.keys = sorted(self.dims)
        self.gens = gens
        self.gen_indices = tuple(range(self.datum.rank)) if gen_indices is None else tuple(gen_indices)
        self.labels = labels or {}
        self.ring = ring
        self.name = name
        self._root_ops = {}

    def __repr__(self):
        return f"GradedModule({self.name or '?'}, dim={self.dim})"

    @property
    def dim(self):
        return sum(self.dims.values())

    @property
    def is_levi(self):
        return set(self.gen_indices) != set(range(self.datum.rank))

    def grades(self):
        return sorted({k[0] for k in self.keys})

    def h_scalar(self, key, i):
        F = self.F
        return F.add(self.pi.values[i], F.from_int(key[1][i]))

    def shift_key(self, key, r):
        """Key reached from ``key`` by a vector of root weight r."""
        d = self.datum
        rw = d.root_weight(r)
        return (self.levi.grade(add(key[0], rw)).rep, tuple((a + b) % d.p for a, b in zip(key[1], rw)))

    def available_roots(self):
        if self.is_levi:
            return self.levi.roots
        return self.datum.roots

    def root_op(self, r):
        """Block operator of x_r, derived from the generators by brackets."""
        r = tuple(r)
        if r in self._root_ops:
            return self._root_ops[r]
        d = self.datum
        F = self.F
        cb = build_chevalley(d)
        for i in self.gen_indices:
            if r == d.simple_roots[i]:
                op = self.gens[("e", i)]
                break
            if r == scale(-1, d.simple_roots[i]):
                op = self.gens[("f", i)]
                break
        else:
            simple, other, c = cb.recipe[r]
            A = self.root_op(simple[1])
            B = self.root_op(other)
            c = frac_to_field(F, c)
            op = op_lincomb(F, [(c, op_compose(F, A, B)), (F.neg(c), op_compose(F, B, A))], self.dims)
        self._root_ops[r] = op
        return op

    def h_op(self, i):
        return op_scalar(self.F, self.dims, {k: self.h_scalar(k, i) for k in self.keys})

    def element_op(self, label):
        if label[0] == "h":
            return self.h_op(label[1])
        return self.root_op(label[1])

    def apply_root(self, r, key, vec):
        op = self.root_op(r)
        if key not in op:
            return None, None
        t, M = op[key]
        return t, S.mat_vec(self.F, M, vec)

    def generator_ops(self):
        """All stored generator operators, in a fixed order."""
        out = []
        for i in self.gen_indices:
            out.append((("e", i), self.gens[("e", i)]))
            out.append((("f", i), self.gens[("f", i)]))
        return out

    def to_json(self):
        F = self.F

        def mat(M):
            return [[F.to_str(x) for x in r] for r in M]

        return {
            "name": self.name,
            "type": self.datum.type_label,
            "p": self.datum.p,
            "levi": [i + 1 for i in self.levi.I],
            "field": repr(F),
            "pi": [F.to_str(v) for v in self.pi.values],
            "dim": self.dim,
            "blocks": [
                {"grade": list(k[0]), "residues": list(k[1]), "dim": self.dims[k],
                 "labels": [str(x) for x in self.labels.get(k, [])]}
                for k in self.keys
            ],
            "generators": {
                f"{g[0]}{g[1] + 1}": [
                    {"source": [list(k[0]), list(k[1])], "target": [list(t[0]), list(t[1])], "matrix": mat(M)}
                    for k, (t, M) in sorted(op.items())
                ]
                for g, op in self.generator_ops()
            },
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def check_module_axioms(M: GradedModule):
    """List of violated relations (empty when M is a valid module)."""
    F = M.F
    d = M.datum
    p = d.p
    chi = PCharacter(M.levi)
    bad = []
    for g, op in M.generator_ops():
        sign = 1 if g[0] == "e" else -1
        r = scale(sign, d.simple_roots[g[1]])
        for k, (t, A) in op.items():
            if k not in M.dims:
                bad.append(f"{g} defined on missing block {k}")
                continue
            if t != M.shift_key(k, r):
                if not S.is_zero_matrix(F, A):
                    bad.append(f"{g} moves block {k} to the wrong grade/weight {t}")
            elif len(A) != M.dims.get(t, 0) or any(len(row) != M.dims[k] for row in A):
                bad.append(f"{g} has wrong shape on block {k}")
    if bad:
        return bad
    idx = M.gen_indices
    for i in idx:
        for j in idx:
            E = M.gens[("e", i)]
            Fj = M.gens[("f", j)]
            comm = op_lincomb(F, [(F.one, op_compose(F, E, Fj)), (F.neg(F.one), op_compose(F, Fj, E))], M.dims)
            want = M.h_op(i) if i == j else {}
            if not op_equal(F, comm, want, M.dims):
                bad.append(f"[e{i + 1},f{j + 1}] relation")
    for i in idx:
        for j in idx:
            if i == j:
                continue
            n = 1 - d.cartan[i][j]
            for kind in ("e", "f"):
                X = M.gens[(kind, i)]
                Y = M.gens[(kind, j)]
                cur = Y
                for _ in range(n):
                    cur = op_lincomb(F, [(F.one, op_compose(F, X, cur)), (F.neg(F.one), op_compose(F, cur, X))], M.dims)
                if not op_is_zero(F, cur):
                    bad.append(f"Serre relation ad({kind}{i + 1})^{n}({kind}{j + 1})")
    ident = op_scalar(F, M.dims, {k: F.one for k in M.keys})
    for r in M.available_roots():
        X = M.root_op(r)
        P = X
        for _ in range(p - 1):
            P = op_compose(F, X, P)
        c = chi.value(r)
        want = op_scalar(F, M.dims, {k: F.from_int(c) for k in M.keys}) if c else {}
        if not op_equal(F, P, want, M.dims):
            bad.append(f"x^p = chi^p relation for root {r}")
    for i in idx:
        H = M.h_op(i)
        P = H
        for _ in range(p - 1):
            P = op_compose(F, H, P)
        diff = op_lincomb(F, [(F.one, P), (F.neg(F.one), H)], M.dims)
        want = M.pi.xi_p(d.simple_roots[i])
        if not op_equal(F, diff, op_scalar(F, M.dims, {k: want for k in M.keys}), M.dims):
            bad.append(f"h^p - h central value for h{i + 1}")
    return bad


# ---------------------------------------------------------------------------
# straightening

def _lin_add(F, acc, other, c):
    for m, v in other.items():
        x = F.mul(c, v)
        if m in acc:
            y = F.add(acc[m], x)
            if F.is_zero(y):
                del acc[m]
            else:
                acc[m] = y
        elif not F.is_zero(x):
            acc[m] = x


class _Straightener:
    """Action of the Chevalley basis on divided-power monomials times 1⊗1.

    The monomials are in the root vectors of w n^- (the roots listed in
    ``self.roots``); the generator is killed by w n and h acts on it by
    pi(h) + lam(h).
    """

    def __init__(self, F, cb: ChevalleyBasis, levi: LeviDatum, pi_values, lam, roots):
        self.F = F
        self.cb = cb
        self.d = cb.datum
        self.p = self.d.p
        self.pi_values = pi_values
        self.lam = tuple(lam)
        self.roots = list(roots)
        self.index = {r: k for k, r in enumerate(self.roots)}
        self.root_w = [self.d.root_weight(r) for r in self.roots]
        chi = PCharacter(levi)
        # x^(p-1) x = x^p / (p-1)! = -chi^p
        self.wrap = [F.neg(F.from_int(chi.value(r))) for r in self.roots]
        self.brk = {}
        for a, b in itertools.product(cb.labels, repeat=2):
            self.brk[(a, b)] = [(l, frac_to_field(F, c)) for l, c in cb.bracket(a, b).items()]
        self._neg_memo = {}
        self._memo = {}

    def weight(self, m):
        w = list(self.lam)
        for a, rw in zip(m, self.root_w):
            if a:
                for i in range(len(w)):
                    w[i] += a * rw[i]
        return tuple(w)

    @staticmethod
    def _first(m):
        for j, a in enumerate(m):
            if a:
                return j
        return None

    def neg(self, k, m):
        key = (k, m)
        if key in self._neg_memo:
            return self._neg_memo[key]
        F = self.F
        j = self._first(m)
        if j is None or k < j:
            mm = list(m)
            mm[k] = 1
            out = {tuple(mm): F.one}
        elif k == j:
            a = m[j]
            mm = list(m)
            if a + 1 < self.p:
                mm[j] = a + 1
                out = {tuple(mm): F.from_int(a + 1)}
            else:
                mm[j] = 0
                out = {} if F.is_zero(self.wrap[j]) else {tuple(mm): self.wrap[j]}
        else:
            a = m[j]
            m1 = list(m)
            m1[j] -= 1
            m1 = tuple(m1)
            out = {}
            for mono, c in self.neg(k, m1).items():
                _lin_add(F, out, self.neg(j, mono), c)
            for lab, c in self.brk[(("x", self.roots[k]), ("x", self.roots[j]))]:
                _lin_add(F, out, self.neg(self.index[lab[1]], m1), c)
            inv = F.inv(F.from_int(a))
            out = {mono: F.mul(inv, c) for mono, c in out.items()}
        self._neg_memo[key] = out
        return out

    def act(self, label, m):
        key = (label, m)
        if key in self._memo:
            return self._memo[key]
        F = self.F
        if label[0] == "h":
            i = label[1]
            c = F.add(self.pi_values[i], F.from_int(self.weight(m)[i]))
            out = {} if F.is_zero(c) else {m: c}
        elif label[1] in self.index:
            out = self.neg(self.index[label[1]], m)
        else:
            j = self._first(m)
            if j is None:
                out = {}
            else:
                a = m[j]
                m1 = list(m)
                m1[j] -= 1
                m1 = tuple(m1)
                out = {}
                for mono, c in self.act(label, m1).items():
                    _lin_add(F, out, self.neg(j, mono), c)
                for lab, c in self.brk[(label, ("x", self.roots[j]))]:
                    _lin_add(F, out, self.act(lab, m1), c)
                inv = F.inv(F.from_int(a))
                out = {mono: F.mul(inv, c) for mono, c in out.items()}
        self._memo[key] = out
        return out


def twisted_negative_roots(levi: LeviDatum, w: WeylElement):
    """Roots of w n^-, ordered by the height of -w^{-1} of the root, then lexicographically."""
    d = levi.datum
    out = []
    for b in d.positive_roots:
        out.append((d.height(b), b, d.act_root(w, scale(-1, b))))
    out.sort()
    return [g for _, _, g in out]


def _assemble(F, levi, pi, monos, weights, st: _Straightener, gen_indices, name, labeler, ring=None):
    d = levi.datum
    p = d.p
    keys = []
    for wt in weights:
        keys.append((levi.grade(wt).rep, tuple(x % p for x in wt)))
    blocks = {}
    pos = {}
    for m, k in zip(monos, keys):
        pos[m] = (k, len(blocks.setdefault(k, [])))
        blocks[k].append(m)
    dims = {k: len(v) for k, v in blocks.items()}
    gens = {}
    for i in gen_indices:
        for kind, sign in (("e", 1), ("f", -1)):
            r = scale(sign, d.simple_roots[i])
            op = {}
            for k, ms in blocks.items():
                cols = [st.act(("x", r), m) for m in ms]
                targets = {pos[mono][0] for col in cols for mono in col}
                if len(targets) > 1:
                    raise RuntimeError("inhomogeneous straightening result")
                if not targets:
                    continue
                t = targets.pop()
                Mt = S.zeros(F, dims[t], len(ms))
                for c, col in enumerate(cols):
                    for mono, v in col.items():
                        Mt[pos[mono][1]][c] = v
                op[k] = (t, Mt)
            gens[(kind, i)] = op
    labels = {k: [labeler(m) for m in ms] for k, ms in blocks.items()}
    mod = GradedModule(F, levi, pi, dims, gens, gen_indices=gen_indices, labels=labels, ring=ring, name=name)
    mod.monomials = blocks
    mod.position = pos
    mod.roots = st.roots
    mod.straightener = st
    return mod


def _mono_label(roots):
    def lab(m):
        parts = [f"x{list(r)}^({a})" for r, a in zip(roots, m) if a]
        return "*".join(parts) or "1"
    return lab


def build_verma(levi: LeviDatum, pi: StructuralMap, lam, w: Optional[WeylElement] = None, ring=None):
    """Z^w(lam): induced from the character lam + pi of h + w n.

    Basis: divided-power monomials in the root vectors of w n^-, exponents
    below p.
    """
    d = levi.datum
    F = pi.F
    if w is None:
        w = d.identity()
    if w not in levi.minimal_coset_reps:
        raise ValueError(f"{w} is not a minimal coset representative for I={levi.I}")
    cb = build_chevalley(d)
    roots = twisted_negative_roots(levi, w)
    st = _Straightener(F, cb, levi, pi.values, lam, roots)
    n = len(roots)
    monos = list(itertools.product(range(d.p), repeat=n))
    weights = [st.weight(m) for m in monos]
    mod = _assemble(F, levi, pi, monos, weights, st, tuple(range(d.rank)),
                    f"Z^{w}({','.join(map(str, lam))})", _mono_label(roots), ring=ring)
    mod.highest = tuple(lam)
    mod.twist = w
    mod.top_key = mod.position[tuple([0] * n)][0]
    return mod


def build_levi_verma(levi: LeviDatum, pi: StructuralMap, lam, ring=None):
    """Z_I(lam): the Verma module of the Levi subalgebra g_I."""
    d = levi.datum
    F = pi.F
    cb = build_chevalley(d)
    roots = [scale(-1, b) for b in sorted(levi.positive_roots, key=lambda r: (sum(r), r))]
    st = _Straightener(F, cb, levi, pi.values, lam, roots)
    monos = list(itertools.product(range(d.p), repeat=len(roots)))
    weights = [st.weight(m) for m in monos]
    mod = _assemble(F, levi, pi, monos, weights, st, levi.I,
                    f"Z_I({','.join(map(str, lam))})", _mono_label(roots), ring=ring)
    mod.highest = tuple(lam)
    mod.twist = d.identity()
    mod.top_key = mod.position[tuple([0] * len(roots))][0]
    return mod


def restrict_to_grade(M: GradedModule, grade) -> GradedModule:
    """The g_I-module M_{grade}: blocks of the given grade, Levi generators only."""
    dims = {k: n for k, n in M.dims.items() if k[0] == tuple(grade)}
    gens = {}
    for i in M.levi.I:
        for kind in ("e", "f"):
            gens[(kind, i)] = {k: v for k, v in M.gens[(kind, i)].items() if k in dims}
    return GradedModule(M.F, M.levi, M.pi, dims, gens, gen_indices=M.levi.I,
                        labels={k: M.labels.get(k, []) for k in dims}, ring=M.ring, name=f"{M.name}_{list(grade)}")


def map_scalars(M: GradedModule, F2, fn, pi2: Optional[StructuralMap] = None, ring=None):
    """Entrywise scalar change (e.g. specialisation t -> 0)."""
    gens = {}
    for g, op in M.gens.items():
        out = {}
        for k, (t, A) in op.items():
            B = [[fn(x) for x in r] for r in A]
            if any(not F2.is_zero(x) for r in B for x in r):     # zero blocks are not stored
                out[k] = (t, B)
        gens[g] = out
    if pi2 is None:
        pi2 = StructuralMap(M.datum, F2, [fn(v) for v in M.pi.values])
    out = GradedModule(F2, M.levi, pi2, dict(M.dims), gens, gen_indices=M.gen_indices,
                       labels=M.labels, ring=ring, name=M.name)
    for attr in ("highest", "twist", "top_key", "monomials", "position", "roots"):
        if hasattr(M, attr):
            setattr(out, attr, getattr(M, attr))
    return out
