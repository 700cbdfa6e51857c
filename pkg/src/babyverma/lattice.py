"""Weights, roots, Weyl groups and the grading lattice X/ZI.

Weights are integer tuples in the basis of fundamental weights, so the
pairing of a weight with the i-th simple coroot is its i-th coordinate.
Roots are integer tuples in the basis of simple roots.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

# a[i][j] = <alpha_i^vee, alpha_j>; for B2 the first simple root is long
CARTAN = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "B2": ((2, -1), (-2, 2)),
}
# half squared lengths of the simple roots
SYMMETRIZER = {"A1": (1,), "A2": (1, 1), "B2": (2, 1)}


def _is_prime(n):
    return n >= 2 and all(n % q for q in range(2, int(n ** 0.5) + 1))


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a):
    return tuple(c * x for x in a)


@dataclass(frozen=True)
class WeylElement:
    """An element of the finite Weyl group.

    ``mat`` acts on weight coordinates (column convention) and ``word`` is a
    reduced word, read left to right as s_word[0] s_word[1] ...
    """

    mat: tuple
    word: tuple

    def __len__(self):
        return len(self.word)

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.mat == other.mat

    def __hash__(self):
        return hash(self.mat)

    def __repr__(self):
        return "id" if not self.word else "s" + "s".join(str(i + 1) for i in self.word)


def _matmul(A, B):
    n = len(A)
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _matvec(A, v):
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


class RootDatum:
    """Cartan data of type A1, A2 or B2 together with an odd prime p."""

    def __init__(self, type_label: str, p: int):
        if type_label not in CARTAN:
            raise ValueError(f"unknown root system type {type_label!r}")
        if not _is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if p == 2:
            raise ValueError("p=2 is not supported")
        cartan = CARTAN[type_label]
        if any(x % p == 0 for row in cartan for x in row if x != 0):
            raise ValueError(f"p={p} divides a Cartan matrix entry")
        self.type_label = type_label
        self.p = p
        self.cartan = cartan
        self.rank = len(cartan)
        self.sym = SYMMETRIZER[type_label]
        n = self.rank
        for i in range(n):
            assert cartan[i][i] == 2
            for j in range(n):
                if i != j:
                    assert cartan[i][j] <= 0
                    assert self.sym[i] * cartan[i][j] == self.sym[j] * cartan[j][i]
        self.simple_roots = tuple(tuple(int(i == j) for i in range(n)) for j in range(n))
        self.roots = self._generate_roots()
        self.positive_roots = tuple(sorted((r for r in self.roots if all(c >= 0 for c in r)),
                                           key=lambda r: (sum(r), r)))
        self.negative_roots = tuple(scale(-1, r) for r in self.positive_roots)
        self.rho = tuple([1] * n)
        self._root_by_weight = {self.root_weight(r): r for r in self.roots}
        expected = {"A1": 1, "A2": 3, "B2": 4}[type_label]
        assert len(self.positive_roots) == expected

    def __repr__(self):
        return f"RootDatum({self.type_label}, p={self.p})"

    # roots -----------------------------------------------------------------
    def _generate_roots(self):
        seen = set(self.simple_roots)
        queue = deque(self.simple_roots)
        while queue:
            r = queue.popleft()
            for i in range(self.rank):
                s = self.reflect_root(i, r)
                if s not in seen:
                    seen.add(s)
                    queue.append(s)
        return tuple(sorted(seen))

    def root_pairing_simple(self, r, i):
        """<r, alpha_i^vee> for r in simple-root coordinates."""
        return sum(c * self.cartan[i][j] for j, c in enumerate(r))

    def reflect_root(self, i, r):
        k = self.root_pairing_simple(r, i)
        return tuple(c - k * (j == i) for j, c in enumerate(r))

    def root_weight(self, r):
        """Simple-root coordinates -> fundamental-weight coordinates."""
        return tuple(sum(self.cartan[i][j] * c for j, c in enumerate(r)) for i in range(self.rank))

    def weight_to_root(self, w):
        return self._root_by_weight.get(tuple(w))

    def is_root(self, r):
        return tuple(r) in self._root_by_weight.values()

    def is_positive(self, r):
        return all(c >= 0 for c in r)

    def height(self, r):
        return sum(r)

    def root_norm(self, r):
        """(r, r) for the form with (alpha_i, alpha_i) = 2 sym_i."""
        return sum(r[i] * r[j] * self.sym[i] * self.cartan[i][j]
                   for i in range(self.rank) for j in range(self.rank))

    def coroot(self, r):
        """Coefficients of r^vee in the basis of simple coroots."""
        nrm = self.root_norm(r)
        out = []
        for j, c in enumerate(r):
            num = 2 * c * self.sym[j]
            assert num % nrm == 0
            out.append(num // nrm)
        return tuple(out)

    def pairing(self, lam, r):
        """<lam, r^vee> for a weight lam and a root r."""
        if tuple(r) not in self._root_by_weight.values():
            raise ValueError(f"{r} is not a root")
        return sum(x * c for x, c in zip(lam, self.coroot(r)))

    # Weyl group --------------------------------------------------------------
    def simple_reflection_matrix(self, i):
        n = self.rank
        a = self.root_weight(self.simple_roots[i])
        return tuple(tuple(int(r == c) - a[r] * int(c == i) for c in range(n)) for r in range(n))

    @cached_property
    def weyl_group(self):
        """All elements, in breadth-first order from the identity."""
        n = self.rank
        ident = tuple(tuple(int(r == c) for c in range(n)) for r in range(n))
        start = WeylElement(ident, ())
        seen = {ident: start}
        queue = deque([start])
        gens = [self.simple_reflection_matrix(i) for i in range(n)]
        while queue:
            w = queue.popleft()
            for i, g in enumerate(gens):
                m = _matmul(w.mat, g)
                if m not in seen:
                    e = WeylElement(m, w.word + (i,))
                    seen[m] = e
                    queue.append(e)
        return tuple(seen.values())

    def identity(self):
        return self.weyl_group[0]

    def element(self, word: Sequence[int]) -> WeylElement:
        m = self.identity().mat
        for i in word:
            m = _matmul(m, self.simple_reflection_matrix(i))
        return self._by_mat[m]

    @cached_property
    def _by_mat(self):
        return {w.mat: w for w in self.weyl_group}

    def compose(self, v, w):
        return self._by_mat[_matmul(v.mat, w.mat)]

    def inverse(self, w):
        return self.element(tuple(reversed(w.word)))

    @cached_property
    def longest(self):
        return max(self.weyl_group, key=len)

    def act(self, w, lam):
        return _matvec(w.mat, lam)

    def act_root(self, w, r):
        return self.weight_to_root(self.act(w, self.root_weight(r)))

    def dot(self, w, lam):
        return sub(self.act(w, add(lam, self.rho)), self.rho)

    def reflection(self, r):
        """The reflection s_r as a Weyl group element."""
        rw = self.root_weight(r)
        cor = self.coroot(r)
        n = self.rank
        m = tuple(tuple(int(i == j) - rw[i] * cor[j] for j in range(n)) for i in range(n))
        return self._by_mat[m]

    # affine reflections ------------------------------------------------------
    def affine_reflect(self, r, m, lam):
        """s_{r, mp}(lam) = lam - (<lam, r^vee> - m p) r."""
        k = self.pairing(lam, r) - m * self.p
        return sub(tuple(lam), scale(k, self.root_weight(r)))

    def affine_dot(self, r, m, lam):
        return sub(self.affine_reflect(r, m, add(lam, self.rho)), self.rho)

    def dot_word(self, word, lam):
        """Dot action of a word of affine reflections [(root, m), ...].

        The word is read as a product s_1 s_2 ... s_k, so the last letter acts
        first.
        """
        out = tuple(lam)
        for r, m in reversed(list(word)):
            out = self.affine_dot(r, m, out)
        return out


def build_root_datum(type_label: str, p: int) -> RootDatum:
    return RootDatum(type_label, p)


# ---------------------------------------------------------------------------
# integer lattices spanned by simple roots

class _SublatticeReducer:
    """Canonical forms modulo the lattice spanned by the given columns."""

    def __init__(self, rank, columns):
        self.rank = rank
        self.columns = [tuple(c) for c in columns]
        if not self.columns:
            self.U = tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank))
            self.Uinv = self.U
            self.divisors = ()
            return
        B = Matrix([[c[i] for c in self.columns] for i in range(rank)])
        S, U, V = smith_normal_decomp(B, domain=ZZ)
        # columns may be dependent; a zero divisor leaves that coordinate free
        self.divisors = tuple(int(abs(S[k, k])) for k in range(min(rank, len(self.columns))))
        self.U = tuple(tuple(int(x) for x in U.row(i)) for i in range(rank))
        Ui = U.inv()
        self.Uinv = tuple(tuple(int(x) for x in Ui.row(i)) for i in range(rank))

    def key(self, lam, scale_by=1):
        y = _matvec(self.U, lam)
        out = list(y)
        for k, d in enumerate(self.divisors):
            if d:
                out[k] = y[k] % (d * scale_by)
        return tuple(out)

    def representative(self, lam, scale_by=1):
        return _matvec(self.Uinv, self.key(lam, scale_by))

    def contains(self, v):
        return all(x == 0 for x in self.key(v))


@dataclass(frozen=True)
class GradeClass:
    """A coset lam + ZI, stored through a canonical representative."""

    rep: tuple

    def __repr__(self):
        return f"[{','.join(map(str, self.rep))}]+ZI"


class LeviDatum:
    """A subset I of the simple roots with its derived Weyl group data."""

    def __init__(self, datum: RootDatum, I: Iterable[int]):
        I = tuple(sorted(set(I)))
        if any(i < 0 or i >= datum.rank for i in I):
            raise ValueError(f"Levi index out of range: {I}")
        self.datum = datum
        self.I = I
        cols = [datum.root_weight(datum.simple_roots[i]) for i in I]
        self._zI = _SublatticeReducer(datum.rank, cols)
        self.roots = tuple(r for r in datum.roots if all(r[j] == 0 for j in range(datum.rank) if j not in I))
        self.positive_roots = tuple(r for r in datum.positive_roots if r in self.roots)
        self.outside_positive = tuple(r for r in datum.positive_roots if r not in self.roots)

    def __repr__(self):
        return f"Levi({self.datum.type_label}, I={[i + 1 for i in self.I]})"

    @cached_property
    def weyl_group(self):
        d = self.datum
        return tuple(w for w in d.weyl_group if all(i in self.I for i in w.word))

    @cached_property
    def longest(self):
        return max(self.weyl_group, key=len)

    @cached_property
    def minimal_coset_reps(self):
        """W^I = {w : w^{-1} alpha > 0 for all alpha in I}."""
        d = self.datum
        out = []
        for w in d.weyl_group:
            winv = d.inverse(w)
            if all(d.is_positive(d.act_root(winv, d.simple_roots[i])) for i in self.I):
                out.append(w)
        return tuple(out)

    @cached_property
    def longest_coset_rep(self):
        """w^I = w_I w_0."""
        d = self.datum
        w = d.compose(self.longest, d.longest)
        assert w in self.minimal_coset_reps
        assert len(w) == max(len(x) for x in self.minimal_coset_reps)
        return w

    def in_ZI(self, v):
        return self._zI.contains(v)

    def grade(self, lam) -> GradeClass:
        lam = tuple(lam)
        cache = self.__dict__.setdefault("_grade_cache", {})
        if lam not in cache:
            cache[lam] = GradeClass(self._zI.representative(lam))
        return cache[lam]

    def sort_grades_top_first(self, reps):
        """Order grade representatives so that larger classes come first."""
        reps = list(reps)
        below = {g: sum(self.grade_leq(GradeClass(h), GradeClass(g)) for h in reps) for g in reps}
        return sorted(reps, key=lambda g: (-below[g], g))

    def reduce_mod_pZI(self, lam):
        """Canonical representative of lam + pZI."""
        return self._zI.representative(lam, self.datum.p)

    def twist(self, w, lam):
        """lam^w = lam - (p-1)(rho - w rho) for w in W^I."""
        if w not in self.minimal_coset_reps:
            raise ValueError(f"{w} is not in W^I")
        d = self.datum
        return sub(tuple(lam), scale(d.p - 1, sub(d.rho, d.act(w, d.rho))))

    def simple_coords(self, v):
        """Rational simple-root coordinates of an element of the root lattice, or None."""
        d = self.datum
        n = d.rank
        M = Matrix([[d.cartan[i][j] for j in range(n)] for i in range(n)])
        c = M.solve(Matrix(v))
        if any(not x.is_integer for x in c):
            return None
        return tuple(int(x) for x in c)

    def grade_leq(self, c1: GradeClass, c2: GradeClass) -> bool:
        """lam + ZI <= mu + ZI iff mu - lam lies in N(R+ minus ZI) + ZI.

        Decided by enumerating non-negative coefficient vectors on the roots
        outside ZI, bounded by the total outside-I height of mu - lam.
        """
        key = (c1.rep, c2.rep)
        cache = self.__dict__.setdefault("_leq_cache", {})
        if key not in cache:
            cache[key] = self._grade_leq(c1, c2)
        return cache[key]

    def _grade_leq(self, c1, c2):
        d = self.datum
        diff = sub(c2.rep, c1.rep)
        coords = self.simple_coords(diff)
        if coords is None:
            return False
        outside = [j for j in range(d.rank) if j not in self.I]
        target = tuple(coords[j] for j in outside)
        if any(x < 0 for x in target):
            return False
        if not outside:
            return True
        bound = sum(target)
        roots = [tuple(r[j] for j in outside) for r in self.outside_positive]
        # depth-first search over multisets of roots, each root contributes >= 1
        def search(i, remaining):
            if all(x == 0 for x in remaining):
                return True
            if i == len(roots):
                return False
            r = roots[i]
            k = 0
            rem = remaining
            while all(x >= 0 for x in rem):
                if search(i + 1, rem):
                    return True
                k += 1
                if k > bound:
                    break
                rem = sub(rem, r)
            return False
        return search(0, target)

    def weight_in_class(self, grade: GradeClass, residues):
        """A weight in the class whose coordinates are congruent to residues mod p.

        The answer is unique up to ZI ∩ pX; the first hit in a fixed
        enumeration order is returned.
        """
        d = self.datum
        p = d.p
        base = grade.rep
        simple_w = [d.root_weight(d.simple_roots[i]) for i in self.I]
        for coeffs in itertools.product(range(p), repeat=len(self.I)):
            lam = base
            for c, a in zip(coeffs, simple_w):
                lam = add(lam, scale(c, a))
            if all((x - r) % p == 0 for x, r in zip(lam, residues)):
                return self.reduce_mod_pZI(lam)
        raise ValueError("no weight of this grade has the requested residues")


def grade_class(levi: LeviDatum, lam) -> GradeClass:
    return levi.grade(lam)


def grade_leq(levi: LeviDatum, c1: GradeClass, c2: GradeClass) -> bool:
    return levi.grade_leq(c1, c2)


def lambda_twist(levi: LeviDatum, w: WeylElement, lam):
    return levi.twist(w, lam)


# ---------------------------------------------------------------------------
# boxes and orbits

@dataclass(frozen=True)
class Box:
    """A product of closed integer intervals."""

    bounds: tuple

    def __post_init__(self):
        if not self.bounds or any(lo > hi for lo, hi in self.bounds):
            raise ValueError("empty box")

    def __contains__(self, lam):
        return all(lo <= x <= hi for x, (lo, hi) in zip(lam, self.bounds))

    def __iter__(self):
        return iter(itertools.product(*[range(lo, hi + 1) for lo, hi in self.bounds]))

    def __len__(self):
        n = 1
        for lo, hi in self.bounds:
            n *= hi - lo + 1
        return n

    def expanded(self, factor=2):
        """The box scaled about its centre by the given factor."""
        out = []
        for lo, hi in self.bounds:
            w = hi - lo
            extra = (factor - 1) * w
            out.append((lo - (extra + 1) // 2, hi + (extra + 1) // 2))
        return Box(tuple(out))


def default_box(datum: RootDatum) -> Box:
    """Coordinates in [-p, 2p)."""
    p = datum.p
    return Box(tuple((-p, 2 * p - 1) for _ in range(datum.rank)))


def fundamental_box(datum: RootDatum) -> Box:
    """Coordinates in [-1, p-2]: one weight per class of X/pX, containing -rho."""
    return Box(tuple((-1, datum.p - 2) for _ in range(datum.rank)))


def orbit_in_box(datum: RootDatum, roots, lam, box: Box, levi: LeviDatum | None = None):
    """(<s_{r, mp} : r in roots, m in Z> . lam + pZI) ∩ box.

    The affine group is W' x p Z roots, with W' generated by the s_r, so
    mu is in the orbit iff mu - w.lam lies in p(Z roots + ZI) for some w in W'.
    """
    roots = [r if datum.is_positive(r) else scale(-1, r) for r in roots]
    cols = [datum.root_weight(r) for r in roots]
    if levi is not None:
        cols += [datum.root_weight(datum.simple_roots[i]) for i in levi.I]
    red = _SublatticeReducer(datum.rank, cols)
    gens = [datum.reflection(r) for r in roots]
    group = {datum.identity()}
    queue = deque(group)
    while queue:
        w = queue.popleft()
        for s in gens:
            v = datum.compose(s, w)
            if v not in group:
                group.add(v)
                queue.append(v)
    targets = {red.key(datum.dot(w, lam), datum.p) for w in group}
    return {mu for mu in box if red.key(mu, datum.p) in targets}
