"""Brute-force reference implementations used by the tests.

Everything here enumerates: all subspaces of GF(p)^n, all graded
subspaces of a small module, all bounded coefficient vectors.  Nothing
is imported from babyverma except plain data access on modules.
"""
import itertools
import math


def all_rref(p, n):
    """Every subspace of GF(p)^n, as a tuple of rows in reduced echelon form."""
    out = []
    for r in range(n + 1):
        for pivots in itertools.combinations(range(n), r):
            free = [(i, j) for i in range(r) for j in range(n)
                    if j > pivots[i] and j not in pivots]
            for vals in itertools.product(range(p), repeat=len(free)):
                rows = [[0] * n for _ in range(r)]
                for i, c in enumerate(pivots):
                    rows[i][c] = 1
                for (i, j), v in zip(free, vals):
                    rows[i][j] = v
                out.append(tuple(tuple(row) for row in rows))
    return out


def span(p, rows, n):
    """All vectors of span(rows) as a frozenset."""
    vecs = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        v = [0] * n
        for c, r in zip(coeffs, rows):
            for j in range(n):
                v[j] = (v[j] + c * r[j]) % p
        vecs.add(tuple(v))
    return frozenset(vecs)


def matvec(p, A, v):
    return tuple(sum(a * x for a, x in zip(row, v)) % p for row in A)


def invariant(p, vecs, gens):
    return all(matvec(p, g, v) in vecs for g in gens for v in vecs)


def largest_invariant_bruteforce(p, W, gens, n):
    """Largest g-stable subspace of span(W), by checking every subspace."""
    Wspan = span(p, W, n)
    best = frozenset([tuple([0] * n)])
    for rows in all_rref(p, n):
        vecs = span(p, rows, n)
        if vecs <= Wspan and invariant(p, vecs, gens) and len(vecs) > len(best):
            best = vecs
    return best


# ---------------------------------------------------------------------------
# graded modules

def module_data(M):
    """(keys, dims, ops) with ops = list of {key: (target, matrix over ints)}."""
    p = M.datum.p
    ops = []
    for _, op in M.generator_ops():
        ops.append({k: (t, [[int(x) % p for x in row] for row in A]) for k, (t, A) in op.items()})
    return list(M.keys), dict(M.dims), ops


def graded_submodules(M):
    """All graded submodules of M (over a prime field), as dicts key -> frozenset of vectors."""
    p = M.datum.p
    keys, dims, ops = module_data(M)
    per_key = {k: [span(p, rows, dims[k]) for rows in all_rref(p, dims[k])] for k in keys}
    out = []
    for choice in itertools.product(*(per_key[k] for k in keys)):
        sub = dict(zip(keys, choice))
        ok = True
        for op in ops:
            for k, (t, A) in op.items():
                for v in sub[k]:
                    if matvec(p, A, v) not in sub[t]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(sub)
    return out


def _dim(p, sub):
    return {k: round(math.log(len(v), p)) for k, v in sub.items()}


def _contains(a, b):
    return all(b[k] <= a[k] for k in a)


def composition_characters(M):
    """Characters (sorted (key, dim) tuples) of the factors of a maximal chain of submodules."""
    p = M.datum.p
    subs = graded_submodules(M)
    sizes = [sum(_dim(p, s).values()) for s in subs]
    cur = min(range(len(subs)), key=lambda i: sizes[i])
    total = max(sizes)
    chars = []
    while sizes[cur] < total:
        above = [i for i in range(len(subs)) if sizes[i] > sizes[cur] and _contains(subs[i], subs[cur])]
        nxt = min(above, key=lambda i: sizes[i])
        da, db = _dim(p, subs[nxt]), _dim(p, subs[cur])
        chars.append(tuple(sorted((k, da[k] - db[k]) for k in da if da[k] != db[k])))
        cur = nxt
    return sorted(chars)


def largest_graded_invariant(M, W):
    """Largest graded submodule inside the graded subspace W (dict key -> rows)."""
    p = M.datum.p
    keys, dims, _ = module_data(M)
    Wspan = {k: span(p, [[int(x) % p for x in r] for r in W.get(k, [])], dims[k]) for k in keys}
    best = None
    for sub in graded_submodules(M):
        if all(sub[k] <= Wspan[k] for k in keys):
            if best is None or sum(len(v) for v in sub.values()) > sum(len(v) for v in best.values()):
                best = sub
    return _dim(p, best)


# ---------------------------------------------------------------------------
# grades

def grade_leq_bruteforce(levi, lam, mu, bound=6):
    """mu - lam in sum_{r in R+ outside ZI} N r + ZI, coefficients at most ``bound``."""
    d = levi.datum
    roots = [r for r in d.positive_roots if r not in levi.roots]
    diff = tuple(b - a for a, b in zip(lam, mu))
    for coeffs in itertools.product(range(bound + 1), repeat=len(roots)):
        v = diff
        for c, r in zip(coeffs, roots):
            rw = d.root_weight(r)
            v = tuple(x - c * y for x, y in zip(v, rw))
        if levi.in_ZI(v):
            return True
    return False
