"""Field-level analysis of (twisted) baby Verma modules: submodule lattices,
composition factors, Hom spaces, intertwiners, simple modules and duality.

Subspaces are stored block by block (one echelon basis per grade/weight
key), which keeps every linear system small.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import scalars as S
from .lattice import GradeClass, LeviDatum, add, scale, sub
from .uchi import (GradedModule, StructuralMap, build_chevalley, build_verma, frac_to_field,
                   op_compose)


# ---------------------------------------------------------------------------
# block subspaces

class Subspace:
    """A graded subspace: per key, rows in reduced echelon form."""

    def __init__(self, F, dims):
        self.F = F
        self.dims = dims
        self.rows = {}
        self.piv = {}

    def copy(self):
        out = Subspace(self.F, self.dims)
        out.rows = {k: [list(r) for r in v] for k, v in self.rows.items()}
        out.piv = {k: list(v) for k, v in self.piv.items()}
        return out

    @classmethod
    def full(cls, M: GradedModule):
        out = cls(M.F, M.dims)
        for k, n in M.dims.items():
            out.set_block(k, S.identity(M.F, n))
        return out

    def set_block(self, k, vectors):
        R, piv = S.rref(self.F, vectors) if vectors else ([], [])
        if R:
            self.rows[k] = R
            self.piv[k] = piv
        else:
            self.rows.pop(k, None)
            self.piv.pop(k, None)

    def block(self, k):
        return self.rows.get(k, [])

    def block_dim(self, k):
        return len(self.rows.get(k, []))

    @property
    def dim(self):
        return sum(len(r) for r in self.rows.values())

    def keys(self):
        return [k for k in self.rows if self.rows[k]]

    def reduce(self, k, v):
        if k not in self.rows:
            return list(v)
        return S.reduce_vector(self.F, self.rows[k], self.piv[k], v)

    def contains(self, k, v):
        return S.is_zero_vector(self.F, self.reduce(k, v))

    def add(self, k, v):
        """Add v to block k; returns the reduced new row or None if already present."""
        F = self.F
        r = self.reduce(k, v)
        c = next((i for i, x in enumerate(r) if not F.is_zero(x)), None)
        if c is None:
            return None
        inv = F.inv(r[c])
        r = [F.mul(inv, x) for x in r]
        rows = self.rows.setdefault(k, [])
        piv = self.piv.setdefault(k, [])
        for i, row in enumerate(rows):
            f = row[c]
            if not F.is_zero(f):
                rows[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(row, r)]
        pos = 0
        while pos < len(piv) and piv[pos] < c:
            pos += 1
        rows.insert(pos, r)
        piv.insert(pos, c)
        return r

    def includes(self, other: "Subspace"):
        return all(self.contains(k, v) for k in other.keys() for v in other.block(k))

    def equals(self, other: "Subspace"):
        return self.dim == other.dim and self.includes(other)

    def sum(self, other: "Subspace"):
        out = self.copy()
        for k in other.keys():
            for v in other.block(k):
                out.add(k, v)
        return out

    def intersect(self, other: "Subspace"):
        out = Subspace(self.F, self.dims)
        for k in self.keys():
            if k in other.rows:
                out.set_block(k, S.subspace_intersection(self.F, self.rows[k], other.rows[k], self.dims[k]))
        return out


def spin(M: GradedModule, seeds, base: Optional[Subspace] = None) -> Subspace:
    """Submodule generated by ``base`` (assumed invariant) and the seed vectors."""
    F = M.F
    out = base.copy() if base is not None else Subspace(F, M.dims)
    ops = M.generator_ops()
    queue = deque()
    for k, v in seeds:
        r = out.add(k, v)
        if r is not None:
            queue.append((k, r))
    while queue:
        k, v = queue.popleft()
        for _, op in ops:
            if k not in op:
                continue
            t, A = op[k]
            r = out.add(t, S.mat_vec(F, A, v))
            if r is not None:
                queue.append((t, r))
    return out


def largest_invariant(M: GradedModule, W: Subspace) -> Subspace:
    """Largest submodule of M contained in the graded subspace W."""
    F = M.F
    K = W.copy()
    ops = [op for _, op in M.generator_ops()]
    changed = True
    while changed:
        changed = False
        ann = {}
        for k in sorted(K.keys()):
            B = K.block(k)
            if not B:
                continue
            Bt = S.transpose(B)
            cons = []
            for op in ops:
                if k not in op:
                    continue
                t, A = op[k]
                if t not in ann:
                    ann[t] = S.kernel(F, K.block(t), M.dims[t]) if K.block(t) else S.identity(F, M.dims[t])
                if not ann[t]:
                    continue
                cons.extend(S.mat_mul(F, S.mat_mul(F, ann[t], A), Bt))
            if not cons:
                continue
            coeffs = S.kernel(F, cons, len(B))
            if len(coeffs) < len(B):
                new = [_combine(F, c, B) for c in coeffs]
                K.set_block(k, new)
                changed = True
                ann = {}
    return K


def _combine(F, coeffs, rows):
    n = len(rows[0])
    out = [F.zero] * n
    for c, r in zip(coeffs, rows):
        if not F.is_zero(c):
            out = [F.add(x, F.mul(c, y)) for x, y in zip(out, r)]
    return out


def primitive_space(M: GradedModule, k, U: Optional[Subspace] = None, D: Optional[Subspace] = None,
                    raising=None):
    """Vectors v in U_k, independent modulo D_k, with e_i v in D for every raising generator."""
    F = M.F
    n = M.dims[k]
    B = U.block(k) if U is not None else S.identity(F, n)
    if not B:
        return []
    Bt = S.transpose(B)
    cons = []
    if raising is None:
        raising = [("e", i) for i in M.gen_indices]
    for g in raising:
        op = M.gens[g]
        if k not in op:
            continue
        t, A = op[k]
        Dt = D.block(t) if D is not None else []
        ann = S.kernel(F, Dt, M.dims[t]) if Dt else S.identity(F, M.dims[t])
        if ann:
            cons.extend(S.mat_mul(F, S.mat_mul(F, ann, A), Bt))
    coeffs = S.kernel(F, cons, len(B)) if cons else S.identity(F, len(B))
    cand = [_combine(F, c, B) for c in coeffs]
    base = Subspace(F, M.dims)
    if D is not None:
        for v in D.block(k):
            base.add(k, v)
    out = []
    for v in cand:
        if base.add(k, v) is not None:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# module maps and derived modules

@dataclass
class ModuleMap:
    """A grading-preserving linear map; blocks[k] has shape dim N_k x dim M_k."""

    source: GradedModule
    target: GradedModule
    blocks: Dict[tuple, list]

    def block(self, k):
        if k in self.blocks:
            return self.blocks[k]
        return S.zeros(self.source.F, self.target.dims.get(k, 0), self.source.dims.get(k, 0))

    def rank(self):
        return sum(S.rank(self.source.F, M) for M in self.blocks.values() if M and M[0])

    def is_zero(self):
        return all(S.is_zero_matrix(self.source.F, M) for M in self.blocks.values())

    def is_iso(self):
        if self.source.dims != self.target.dims:
            return False
        return all(S.rank(self.source.F, self.block(k)) == n for k, n in self.source.dims.items())

    def image(self) -> Subspace:
        out = Subspace(self.source.F, self.target.dims)
        for k, A in self.blocks.items():
            if A and A[0]:
                out.set_block(k, S.transpose(A))
        return out

    def kernel(self) -> Subspace:
        F = self.source.F
        out = Subspace(F, self.source.dims)
        for k, n in self.source.dims.items():
            A = self.blocks.get(k)
            if A is None or not A:
                out.set_block(k, S.identity(F, n))
            else:
                out.set_block(k, S.kernel(F, A, n))
        return out

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self after other."""
        F = self.source.F
        blocks = {}
        for k in other.source.dims:
            if k in self.blocks and k in other.blocks:
                blocks[k] = S.mat_mul(F, self.blocks[k], other.blocks[k])
        return ModuleMap(other.source, self.target, blocks)

    def check(self):
        """True when the map commutes with every generator."""
        M, N, F = self.source, self.target, self.source.F
        for g, opM in M.generator_ops():
            opN = N.gens[g]
            for k in M.dims:
                f = self.block(k)
                left = None
                if k in opN:
                    t, A = opN[k]
                    left = (t, S.mat_mul(F, A, f))
                right = None
                if k in opM:
                    t2, B = opM[k]
                    right = (t2, S.mat_mul(F, self.block(t2), B))
                zl = left is None or S.is_zero_matrix(F, left[1])
                zr = right is None or S.is_zero_matrix(F, right[1])
                if zl and zr:
                    continue
                if zl != zr or left[0] != right[0] or left[1] != right[1]:
                    return False
        return True


def quotient_module(M: GradedModule, R: Subspace, name=None) -> GradedModule:
    """M/R with basis the standard vectors off the pivots of R."""
    F = M.F
    comp = {}
    for k, n in M.dims.items():
        piv = set(R.piv.get(k, []))
        comp[k] = [i for i in range(n) if i not in piv]
    dims = {k: len(c) for k, c in comp.items() if c}
    gens = {}
    for g, op in M.generator_ops():
        new = {}
        for k, (t, A) in op.items():
            if k not in dims or t not in dims:
                continue
            cols = []
            for i in comp[k]:
                v = [A[r][i] for r in range(len(A))]
                v = R.reduce(t, v)
                cols.append([v[j] for j in comp[t]])
            new[k] = (t, S.transpose(cols, len(comp[t])) if cols else [])
        gens[g] = new
    Q = GradedModule(F, M.levi, M.pi, dims, gens, gen_indices=M.gen_indices,
                     name=name or f"{M.name}/R", ring=M.ring)
    Q.projection = (M, R, comp)
    return Q


def submodule_module(M: GradedModule, N: Subspace, name=None) -> GradedModule:
    """The submodule N as a module in its own echelon basis."""
    F = M.F
    dims = {k: N.block_dim(k) for k in N.keys()}
    gens = {}
    for g, op in M.generator_ops():
        new = {}
        for k in dims:
            if k not in op:
                continue
            t, A = op[k]
            if t not in dims:
                continue
            cols = []
            for v in N.block(k):
                w = S.mat_vec(F, A, v)
                cols.append([w[c] for c in N.piv[t]])
            new[k] = (t, S.transpose(cols, dims[t]))
        gens[g] = new
    return GradedModule(F, M.levi, M.pi, dims, gens, gen_indices=M.gen_indices,
                        name=name or f"sub({M.name})", ring=M.ring)


# ---------------------------------------------------------------------------
# labels of simple modules

@dataclass(frozen=True, order=True)
class SimpleLabel:
    """Isomorphism label of a simple module L(mu).

    ``grade`` and ``residues`` are the key of a primitive generating vector,
    canonicalised over the dot orbit of W_{I,pi} on residues.
    """

    grade: tuple
    residues: tuple
    dim: int = field(default=0, compare=False)

    def weight(self, levi: LeviDatum):
        return levi.weight_in_class(GradeClass(self.grade), self.residues)

    def to_json(self):
        return {"grade": list(self.grade), "residues": list(self.residues), "dim": self.dim}

    def __str__(self):
        return f"L[{','.join(map(str, self.grade))}|{','.join(map(str, self.residues))}]"


def w_I_pi(levi: LeviDatum, pi: StructuralMap):
    """W_{I,pi}: generated by s_a for simple a in I with a in R_pi."""
    d = levi.datum
    rpi = set(pi.r_pi())
    gens = [d.element((i,)) for i in levi.I if d.simple_roots[i] in rpi]
    group = {d.identity()}
    frontier = [d.identity()]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = d.compose(u, g)
                if v not in group:
                    group.add(v)
                    nxt.append(v)
        frontier = nxt
    return sorted(group, key=lambda w: (len(w), w.word))


def classification_hypothesis(levi: LeviDatum, pi: StructuralMap):
    """R_pi^+ ∩ R_I is empty, a single root, or all of R_I^+."""
    rpi = set(pi.r_pi())
    inter = [r for r in levi.positive_roots if r in rpi]
    return len(inter) <= 1 or len(inter) == len(levi.positive_roots)


def canonical_label(M: GradedModule, key, dim=0) -> SimpleLabel:
    levi, d = M.levi, M.datum
    p = d.p
    g, r = key
    best = tuple(r)
    if classification_hypothesis(levi, M.pi):
        for u in w_I_pi(levi, M.pi):
            s = sub(d.act(u, add(r, d.rho)), d.rho)
            s = tuple(x % p for x in s)
            best = min(best, s)
    return SimpleLabel(tuple(g), best, dim)


def label_of_weight(M_or_levi, pi, lam, dim=0):
    """Label of L(lam) computed from the weight alone."""
    levi = M_or_levi if isinstance(M_or_levi, LeviDatum) else M_or_levi.levi
    p = levi.datum.p
    dummy = GradedModule(pi.F, levi, pi, {}, {})
    return canonical_label(dummy, (levi.grade(lam).rep, tuple(x % p for x in lam)), dim)


# ---------------------------------------------------------------------------
# radical, composition factors, simplicity

def _max_grade(levi, grades):
    grades = list(grades)
    for g in grades:
        if not any(h != g and levi.grade_leq(GradeClass(g), GradeClass(h)) for h in grades):
            return g
    raise RuntimeError("no maximal grade")


def radical_cyclic(M: GradedModule, top_grade) -> Subspace:
    """Rad of a module generated in grade ``top_grade`` whose top part is simple over g_I."""
    W = Subspace(M.F, M.dims)
    for k, n in M.dims.items():
        if k[0] != top_grade:
            W.set_block(k, S.identity(M.F, n))
    return largest_invariant(M, W)


def levi_regular(levi: LeviDatum) -> bool:
    """p does not divide the determinant of the Cartan matrix of I.

    Then every Levi Verma module is simple and the top-grade shortcuts below
    are valid; otherwise (sl3 with p = 3, say) they are replaced by explicit
    simplicity checks.
    """
    d = levi.datum
    if not levi.I:
        return True
    from sympy import Matrix
    C = Matrix([[d.cartan[i][j] for j in levi.I] for i in levi.I])
    return C.det() % d.p != 0


def radical(M: GradedModule) -> Subspace:
    """Rad M.

    Vermas use the top-grade criterion when the Levi part is regular; other
    modules intersect the kernels of all maps onto their simple subquotients.
    """
    if (hasattr(M, "top_key") and getattr(M, "twist", None) is not None
            and M.twist == M.datum.identity() and levi_regular(M.levi)):
        return radical_cyclic(M, M.top_key[0])
    segs = []
    composition_factors(M, segments=segs)
    R = Subspace.full(M)
    seen = set()
    for lab, A, B in segs:
        if (lab, lab.dim) in seen:
            continue
        seen.add((lab, lab.dim))
        L = subquotient(M, A, B)
        for f in hom_space(M, L):
            R = R.intersect(f.kernel())
    return R


def subquotient(M: GradedModule, A: Subspace, B: Subspace, name=None) -> GradedModule:
    """A/B for submodules B ⊆ A of M."""
    F = M.F
    sub_mod = submodule_module(M, A)
    Bs = Subspace(F, sub_mod.dims)
    for k in B.keys():
        for b in B.block(k):
            Bs.add(k, [b[c] for c in A.piv[k]])
    return quotient_module(sub_mod, Bs, name=name or f"{M.name}[sub]")


def _lines(F, P, p, rng, max_lines=200):
    """Nonzero vectors of span(P), one per line when few enough, else a sample."""
    if not P:
        return
    if F.is_prime and (p ** len(P) - 1) // (p - 1) <= max_lines:
        for coeffs in itertools.product(range(p), repeat=len(P)):
            first = next((c for c in coeffs if c), None)
            if first == 1:
                yield _combine(F, list(coeffs), P)
        return
    for v in P:
        yield v
    for _ in range(10):
        v = _combine(F, [_random_scalar(F, rng, p) for _ in P], P)
        if not S.is_zero_vector(F, v):
            yield v


def split_witness(M: GradedModule, U: Subspace, D: Subspace, seed=0):
    """A submodule strictly between D and U, or None when U/D is simple."""
    rng = random.Random(seed)
    for k in sorted(U.keys()):
        if U.block_dim(k) == D.block_dim(k):
            continue
        for v in _lines(M.F, primitive_space(M, k, U, D), M.datum.p, rng):
            N = spin(M, [(k, v)], base=D)
            if N.dim < U.dim:
                return N
    return None


def _segment_label(M, U, D):
    grades = {k[0] for k in U.keys() if U.block_dim(k) > D.block_dim(k)}
    c = _max_grade(M.levi, sorted(grades))
    for k in sorted(k for k in U.keys() if k[0] == c and U.block_dim(k) > D.block_dim(k)):
        if primitive_space(M, k, U, D):
            return canonical_label(M, k, U.dim - D.dim)
    raise RuntimeError("no primitive vector in the top grade")


def _peel(M: GradedModule, U: Subspace, D: Subspace, rng, out, verify=False, segments=None):
    levi = M.levi
    stack = [(U, D)]
    while stack:
        U, D = stack.pop()
        if U.dim == D.dim:
            continue
        grades = {k[0] for k in U.keys() if U.block_dim(k) > D.block_dim(k)}
        c = _max_grade(levi, sorted(grades))
        keys = sorted(k for k in U.keys() if k[0] == c and U.block_dim(k) > D.block_dim(k))
        if rng is not None:
            rng.shuffle(keys)
        v = key = None
        for k in keys:
            P = primitive_space(M, k, U, D)
            if P:
                key = k
                if rng is not None and len(P) > 1:
                    v = _combine(M.F, [M.F.from_int(rng.randrange(1, M.datum.p)) for _ in P], P)
                    if D.contains(k, v):
                        v = P[0]
                else:
                    v = P[0]
                break
        if v is None:
            raise RuntimeError("no primitive vector in the top grade")
        N = spin(M, [(key, v)], base=D)
        W = Subspace(M.F, M.dims)
        for k in N.keys():
            W.set_block(k, D.block(k) if k[0] == c else N.block(k))
        R = largest_invariant(M, W)
        if verify:
            pending = [(N, R)]
            while pending:
                A, B = pending.pop()
                X = split_witness(M, A, B)
                if X is None:
                    lab = _segment_label(M, A, B)
                    out.append(lab)
                    if segments is not None:
                        segments.append((lab, A, B))
                else:
                    pending.extend([(A, X), (X, B)])
        else:
            lab = canonical_label(M, key, N.dim - R.dim)
            out.append(lab)
            if segments is not None:
                segments.append((lab, N, R))
        stack.append((R, D))
        stack.append((U, N))


def composition_factors(M: GradedModule, seed=None, verify=None, segments=None) -> Counter:
    """Multiset of simple labels, by peeling off simple subquotients.

    Each step takes a primitive vector v of a maximal grade in U/D, forms
    N = D + U(g)v and its unique maximal submodule R over D; N/R is simple
    because the top part of N/D is a quotient of a simple Levi Verma.
    When the Levi part is not regular (or ``verify`` is set) each N/R is
    checked and split further if a proper submodule turns up.
    """
    rng = random.Random(seed) if seed is not None else None
    if verify is None:
        verify = not levi_regular(M.levi)
    out = []
    _peel(M, Subspace.full(M), Subspace(M.F, M.dims), rng, out, verify=verify, segments=segments)
    return Counter(out)


def factor_dims(factors: Counter):
    return {lab: lab.dim for lab in factors}


def is_simple(M: GradedModule, max_lines=200, seed=0):
    """Every primitive vector generates M.

    Any nonzero submodule contains a primitive vector, so this decides
    simplicity.  Lines in a primitive space are enumerated when the space is
    small over a prime field, otherwise a basis plus random combinations is
    used.
    """
    F = M.F
    rng = random.Random(seed)
    for k in M.keys:
        for v in _lines(F, primitive_space(M, k), M.datum.p, rng, max_lines):
            if spin(M, [(k, v)]).dim != M.dim:
                return False
    return M.dim > 0


# ---------------------------------------------------------------------------
# Hom spaces

def _presentation(M: GradedModule):
    """Spin M from greedily chosen generators, recording each new vector as
    (generator index) or (operator, parent record)."""
    F = M.F
    grades = M.levi.sort_grades_top_first({k[0] for k in M.keys})
    order = {g: i for i, g in enumerate(grades)}
    keys = sorted(M.keys, key=lambda k: (order[k[0]], k))
    span = Subspace(F, M.dims)
    records = []  # (key, vector, origin)
    ops = M.generator_ops()
    gens = []
    for k in keys:
        for j in range(M.dims[k]):
            e = [F.zero] * M.dims[k]
            e[j] = F.one
            if span.contains(k, e):
                continue
            gens.append((k, e))
            span.add(k, e)
            records.append((k, e, ("gen", len(gens) - 1)))
            queue = deque([len(records) - 1])
            while queue:
                idx = queue.popleft()
                kk, v, _ = records[idx]
                for g, op in ops:
                    if kk not in op:
                        continue
                    t, A = op[kk]
                    w = S.mat_vec(F, A, v)
                    if span.add(t, w) is not None:
                        records.append((t, w, ("act", g, idx)))
                        queue.append(len(records) - 1)
    return gens, records


def hom_space(M: GradedModule, N: GradedModule) -> List[ModuleMap]:
    """Basis of Hom(M, N) in the graded category."""
    if M.F != N.F:
        raise ValueError("modules over different scalar fields")
    if M.pi != N.pi:
        raise ValueError("modules with different structural maps")
    if M.levi.I != N.levi.I or M.datum.type_label != N.datum.type_label:
        raise ValueError("modules over different Levi data")
    F = M.F
    gens, records = _presentation(M)
    offsets = []
    nvars = 0
    for k, _ in gens:
        offsets.append(nvars)
        nvars += N.dims.get(k, 0)
    if nvars == 0:
        return []
    # Phi[idx]: matrix (dim N_k x nvars) giving the image of record idx
    phi = []
    for k, v, origin in records:
        nk = N.dims.get(k, 0)
        if origin[0] == "gen":
            P = S.zeros(F, nk, nvars)
            o = offsets[origin[1]]
            for i in range(nk):
                P[i][o + i] = F.one
        else:
            _, g, parent = origin
            pk = records[parent][0]
            op = N.gens[g]
            if nk == 0 or pk not in op or not phi[parent]:
                P = S.zeros(F, nk, nvars)
            else:
                P = S.mat_mul(F, op[pk][1], phi[parent])
        phi.append(P)
    by_key = {}
    for idx, (k, v, _) in enumerate(records):
        by_key.setdefault(k, []).append(idx)
    binv = {}
    for k, idxs in by_key.items():
        B = S.transpose([records[i][1] for i in idxs])
        binv[k] = S.inverse(F, B)
    K = S.identity(F, nvars)  # columns span the current solution space
    for idx, (k, v, _) in enumerate(records):
        for g, opM in M.generator_ops():
            opN = N.gens[g]
            lhs = None
            t = None
            if k in opN and phi[idx]:
                t, A = opN[k]
                lhs = S.mat_mul(F, A, phi[idx])
            rhs = None
            if k in opM:
                t2, B = opM[k]
                w = S.mat_vec(F, B, v)
                if not S.is_zero_vector(F, w) and N.dims.get(t2, 0):
                    c = S.mat_vec(F, binv[t2], w)
                    rhs = S.zeros(F, N.dims[t2], nvars)
                    for ci, j in zip(c, by_key[t2]):
                        if not F.is_zero(ci):
                            rhs = S.mat_add(F, rhs, S.mat_scale(F, ci, phi[j]))
                    if lhs is not None and t != t2:
                        raise RuntimeError("grading mismatch between modules")
            if lhs is None and rhs is None:
                continue
            C = lhs if rhs is None else (S.mat_scale(F, F.neg(F.one), rhs) if lhs is None else S.mat_sub(F, lhs, rhs))
            CK = S.mat_mul(F, C, K)
            if S.is_zero_matrix(F, CK):
                continue
            ker = S.kernel(F, CK, len(K[0]))
            if not ker:
                return []
            K = S.mat_mul(F, K, S.transpose(ker))
    sols = S.transpose(K)
    maps = []
    for x in sols:
        blocks = {}
        for k, idxs in by_key.items():
            if not N.dims.get(k, 0):
                continue
            cols = [S.mat_vec(F, phi[i], x) for i in idxs]
            Im = S.transpose(cols)
            blocks[k] = S.mat_mul(F, Im, binv[k])
        maps.append(ModuleMap(M, N, blocks))
    return maps


def primitive_vectors(N: GradedModule, key):
    """Hom(Z(mu), N) for mu of the given key, as vectors of N_key."""
    return primitive_space(N, key)


def iso_test(M: GradedModule, N: GradedModule, simple=False, seed=0, tries=20, exhaustive_limit=4096):
    """Is some element of Hom(M, N) invertible?"""
    if M.dims != N.dims:
        return False
    if M.pi != N.pi or M.F != N.F:
        return False
    H = hom_space(M, N)
    if not H:
        return False
    if simple:
        return True
    for f in H:
        if f.is_iso():
            return True
    F = M.F
    p = M.datum.p
    rng = random.Random(seed)
    keys = list(M.dims)

    def combo(coeffs):
        blocks = {}
        for k in keys:
            acc = None
            for c, f in zip(coeffs, H):
                if F.is_zero(c):
                    continue
                t = S.mat_scale(F, c, f.block(k))
                acc = t if acc is None else S.mat_add(F, acc, t)
            blocks[k] = acc if acc is not None else f.block(k)
        return ModuleMap(M, N, blocks)

    for _ in range(tries):
        coeffs = [_random_scalar(F, rng, p) for _ in H]
        if combo(coeffs).is_iso():
            return True
    if F.is_prime and p ** len(H) <= exhaustive_limit:
        for coeffs in itertools.product(range(p), repeat=len(H)):
            if any(coeffs) and combo(list(coeffs)).is_iso():
                return True
    return False


def _random_scalar(F, rng, p):
    x = F.from_int(rng.randrange(p))
    if not F.is_prime:
        x = F.add(x, F.mul(F.from_int(rng.randrange(p)), F.gen()))
    return x


# ---------------------------------------------------------------------------
# maps out of Verma modules

def top_vector(Z: GradedModule):
    F = Z.F
    k = Z.top_key
    v = [F.zero] * Z.dims[k]
    zero = tuple([0] * len(Z.roots))
    v[Z.position[zero][1]] = F.one
    return k, v


def apply_root_power(N: GradedModule, r, key, vec, times, divided=False):
    F = N.F
    for _ in range(times):
        op = N.root_op(r)
        if key not in op:
            return None, None
        key, A = op[key][0], op[key][1]
        vec = S.mat_vec(F, A, vec)
    if divided and times > 1:
        vec = [F.mul(F.inv(F.from_int(math.factorial(times))), x) for x in vec]
    return key, vec


def verma_map(Z: GradedModule, N: GradedModule, key, vec) -> ModuleMap:
    """The map Z -> N sending the generator of the (twisted) Verma Z to vec in N_key."""
    F = Z.F
    if key != Z.top_key:
        raise ValueError("image of the generator must have the generator's grade and weight")
    blocks = {}
    for k, monos in Z.monomials.items():
        nk = N.dims.get(k, 0)
        cols = []
        for m in monos:
            kk, v = key, list(vec)
            for idx in range(len(m) - 1, -1, -1):
                a = m[idx]
                if a and kk is not None:
                    kk, v = apply_root_power(N, Z.roots[idx], kk, v, a, divided=True)
            if kk is None:
                cols.append([F.zero] * nk)
            else:
                if kk != k:
                    raise RuntimeError("monomial image landed in the wrong block")
                cols.append(v)
        if nk:
            blocks[k] = S.transpose(cols, nk)
    return ModuleMap(Z, N, blocks)


def _wall_data(levi, w, i):
    d = levi.datum
    if w not in levi.minimal_coset_reps:
        raise ValueError(f"{w} not in W^I")
    beta = d.act_root(w, d.simple_roots[i])
    if not d.is_positive(beta):
        raise ValueError("w alpha must be positive")
    ws = d.compose(w, d.element((i,)))
    if ws not in levi.minimal_coset_reps:
        raise ValueError("w s_alpha must lie in W^I")
    return beta, ws


def intertwiner_phi(levi, pi, w, i, lam) -> ModuleMap:
    """phi: Z^w(lam) -> Z^{w s}(lam - (p-1)b), generator -> x_b^{p-1} (b = w alpha_i)."""
    d = levi.datum
    beta, ws = _wall_data(levi, w, i)
    src = build_verma(levi, pi, lam, w)
    tgt = build_verma(levi, pi, sub(tuple(lam), scale(d.p - 1, d.root_weight(beta))), ws)
    k, v = top_vector(tgt)
    k, v = apply_root_power(tgt, beta, k, v, d.p - 1)
    return verma_map(src, tgt, k, v)


def intertwiner_phi_prime(levi, pi, w, i, lam) -> ModuleMap:
    """phi': Z^{w s}(lam - (p-1)b) -> Z^w(lam), generator -> x_{-b}^{p-1}."""
    d = levi.datum
    beta, ws = _wall_data(levi, w, i)
    src = build_verma(levi, pi, sub(tuple(lam), scale(d.p - 1, d.root_weight(beta))), ws)
    tgt = build_verma(levi, pi, lam, w)
    k, v = top_vector(tgt)
    k, v = apply_root_power(tgt, scale(-1, beta), k, v, d.p - 1)
    return verma_map(src, tgt, k, v)


def wall_d(levi, pi, w, i, lam):
    """d in [0,p) with pi(h_b) + <lam, b^vee> + 1 = d, or None if b is not in R_pi."""
    d = levi.datum
    beta, _ = _wall_data(levi, w, i)
    F = pi.F
    x = F.add(pi.h(beta), F.from_int(d.pairing(lam, beta) + 1))
    if not F.in_prime_field(x):
        return None
    return F.prime_value(x)


def intertwiner_psi(levi, pi, w, i, lam, dval) -> ModuleMap:
    """psi: Z^w(lam - d b) -> Z^w(lam), generator -> x_{-b}^{(d)}."""
    d = levi.datum
    beta, _ = _wall_data(levi, w, i)
    src = build_verma(levi, pi, sub(tuple(lam), scale(dval, d.root_weight(beta))), w)
    tgt = build_verma(levi, pi, lam, w)
    k, v = top_vector(tgt)
    k, v = apply_root_power(tgt, scale(-1, beta), k, v, dval, divided=True)
    return verma_map(src, tgt, k, v)


def long_intertwiner(levi, pi, lam, prime=False) -> ModuleMap:
    """Composite Z(lam) -> Z^{w^I}(lam^{w^I}) along a reduced word of w^I
    (or the reverse composite of the phi' maps when ``prime``)."""
    d = levi.datum
    word = levi.longest_coset_rep.word
    cur = d.identity()
    lam_cur = tuple(lam)
    total = None
    for i in word:
        beta = d.act_root(cur, d.simple_roots[i])
        if prime:
            f = intertwiner_phi_prime(levi, pi, cur, i, lam_cur)
            total = f if total is None else total.compose(f)
        else:
            f = intertwiner_phi(levi, pi, cur, i, lam_cur)
            total = f if total is None else f.compose(total)
        lam_cur = sub(lam_cur, scale(d.p - 1, d.root_weight(beta)))
        cur = d.compose(cur, d.element((i,)))
        assert lam_cur == levi.twist(cur, lam)
    if total is None:
        Z = build_verma(levi, pi, lam)
        total = ModuleMap(Z, Z, {k: S.identity(pi.F, n) for k, n in Z.dims.items()})
    return total


# ---------------------------------------------------------------------------
# simple modules and socles

_SIMPLE_CACHE: Dict[tuple, GradedModule] = {}


def simple_module(levi, pi, lam) -> GradedModule:
    """L(lam) = Z(lam) / Rad Z(lam)."""
    p = levi.datum.p
    key = (levi.datum.type_label, p, levi.I, pi.F, pi.values, levi.grade(lam).rep, tuple(x % p for x in lam))
    if key not in _SIMPLE_CACHE:
        Z = build_verma(levi, pi, lam)
        L = quotient_module(Z, radical(Z), name=f"L({','.join(map(str, lam))})")
        L.highest = tuple(lam)
        L.top_key = Z.top_key
        _SIMPLE_CACHE[key] = L
    return _SIMPLE_CACHE[key]


def simple_module_from_label(levi, pi, lab: SimpleLabel) -> GradedModule:
    return simple_module(levi, pi, lab.weight(levi))


def socle(M: GradedModule, factors: Optional[Counter] = None) -> Subspace:
    """Sum of the images of all maps from simple modules into M."""
    if factors is None:
        factors = composition_factors(M)
    out = Subspace(M.F, M.dims)
    for lab in sorted(set(factors)):
        L = simple_module_from_label(M.levi, M.pi, lab)
        for f in hom_space(L, M):
            out = out.sum(f.image())
    return out


def generated_by_grade(M: GradedModule, grade) -> Subspace:
    seeds = [(k, v) for k in M.keys if k[0] == tuple(grade) for v in S.identity(M.F, M.dims[k])]
    return spin(M, seeds)


def socle_check(M: GradedModule) -> bool:
    """Soc M equals the submodule generated by the predicted socle grade.

    For Z(lam) that grade is lam^{w^I} + ZI; for Z^{w^I}(mu) it is the
    grade of mu + (p-1)(rho - w^I rho).
    """
    levi, d = M.levi, M.datum
    wI = levi.longest_coset_rep
    lam = M.highest
    if M.twist == d.identity():
        target = levi.twist(wI, lam)
    elif M.twist == wI:
        target = add(lam, scale(d.p - 1, sub(d.rho, d.act(wI, d.rho))))
    else:
        raise ValueError("socle prediction only for w = id or w = w^I")
    grade = levi.grade(target).rep
    soc = socle(M)
    gen = generated_by_grade(M, grade)
    return soc.equals(gen)


# ---------------------------------------------------------------------------
# duality

def tau_coefficients(levi: LeviDatum):
    """c_b with tau(x_b) = c_b x_{-w_I b}, from tau(e_i) = -x_{-w_I a_i}, tau(f_i) = -x_{w_I a_i}."""
    d = levi.datum
    cb = build_chevalley(d)
    wI = levi.longest
    c = {}
    for i in range(d.rank):
        c[d.simple_roots[i]] = -1
        c[scale(-1, d.simple_roots[i])] = -1
    for r in sorted(cb.recipe, key=lambda r: abs(sum(r))):
        simple, other, s = cb.recipe[r]
        a, b = simple[1], other
        ta = scale(-1, d.act_root(wI, a))
        tb = scale(-1, d.act_root(wI, b))
        n = cb.structure_constant(ta, tb)
        c[r] = s * c[a] * c[b] * n
    from fractions import Fraction
    return {r: Fraction(v) for r, v in c.items()}


def tau_check(levi: LeviDatum):
    """tau preserves all root-vector brackets."""
    d = levi.datum
    cb = build_chevalley(d)
    wI = levi.longest
    c = tau_coefficients(levi)
    t = lambda r: scale(-1, d.act_root(wI, r))
    for a in d.roots:
        for b in d.roots:
            ab = add(a, b)
            if d.is_root(ab):
                lhs = cb.structure_constant(a, b) * c[ab]
                rhs = c[a] * c[b] * cb.structure_constant(t(a), t(b))
                if lhs != rhs:
                    return False
            elif a == scale(-1, b):
                # [tau x_a, tau x_-a] = c_a c_-a h_{t(a)} must equal tau(h_a) = h_{t(a)}
                if c[a] * c[b] != 1:
                    return False
    return True


def duality_D(M: GradedModule) -> GradedModule:
    """The dual M^* twisted by tau; the result lives over the structural map pi∘w_I."""
    F = M.F
    levi, d = M.levi, M.datum
    p = d.p
    wI = levi.longest
    c = tau_coefficients(levi)

    def dkey(k):
        g, r = k
        return (g, tuple(x % p for x in d.act(wI, r)))

    dims = {dkey(k): n for k, n in M.dims.items()}
    gens = {}
    for i in M.gen_indices:
        for kind, sign in (("e", 1), ("f", -1)):
            target_root = scale(sign, d.simple_roots[i])
            beta = scale(-1, d.act_root(wI, target_root))  # tau(x_beta) = c x_{target_root}
            coeff = F.neg(F.inv(frac_to_field(F, c[beta])))
            T = M.root_op(beta)
            op = {}
            for a, (b, A) in T.items():
                op[dkey(b)] = (dkey(a), S.mat_scale(F, coeff, S.transpose(A, len(A[0]) if A else M.dims[a])
                                                   if A else S.zeros(F, M.dims[a], 0)))
            gens[(kind, i)] = op
    pi2 = M.pi.transformed(wI)
    return GradedModule(F, levi, pi2, dims, gens, gen_indices=M.gen_indices, name=f"D({M.name})", ring=M.ring)


def decomposition_row(levi, pi, lam, seed=None):
    Z = build_verma(levi, pi, lam)
    return composition_factors(Z, seed=seed)
