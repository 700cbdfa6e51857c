"""Regenerate tests/data/oracle_frozen.json from the brute-force oracles.

    python3 tests/make_frozen.py

Only the instance *constructors* come from babyverma; every recorded
answer is computed by tests/oracles.py.
"""
import json
import os
import random
import sys

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from babyverma import LeviDatum, RootDatum, build_verma, make_structural_map  # noqa: E402
from babyverma.deform import direct_sum  # noqa: E402
from babyverma.lattice import Box  # noqa: E402
from babyverma.uchi import build_levi_verma  # noqa: E402
from babyverma.verma import quotient_module, simple_module, Subspace  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data", "oracle_frozen.json")


def module_instances():
    """(name, constructor) pairs; every module has ambient dimension <= 4."""
    out = []
    d = RootDatum("A1", 3)
    pi = make_structural_map(d, "zero")
    s = d.element((0,))
    for I in [(), (0,)]:
        lv = LeviDatum(d, I)
        for lam in [(-1,), (0,), (1,)]:
            out.append((f"A1p3 I={list(I)} Z{list(lam)}", lambda lv=lv, lam=lam: build_verma(lv, pi, lam)))
    lv = LeviDatum(d, ())
    for lam in [(0,), (1,)]:
        out.append((f"A1p3 Z^s{list(lam)}", lambda lam=lam: build_verma(lv, pi, lam, s)))
    out.append(("A1p3 Z[1]+L[0]", lambda: direct_sum(build_verma(lv, pi, (1,)), simple_module(lv, pi, (0,)))))
    out.append(("A1p3 L[0]+L[1]", lambda: direct_sum(simple_module(lv, pi, (0,)), simple_module(lv, pi, (1,)))))
    out.append(("A1p3 L[1]+L[1]", lambda: direct_sum(simple_module(lv, pi, (1,)), simple_module(lv, pi, (1,)))))
    d2 = RootDatum("A2", 3)
    pi2 = make_structural_map(d2, "zero")
    lv2 = LeviDatum(d2, (0,))
    for lam in [(0, 0), (1, 0), (-1, 1)]:
        out.append((f"A2p3 I=[0] Z_I{list(lam)}", lambda lam=lam: build_levi_verma(lv2, pi2, lam)))
    return out


def below_top(M):
    """Graded subspace: every block except the top key."""
    W = {}
    for k, n in M.dims.items():
        if k != M.top_key:
            W[k] = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return W


def matrix_instances(seed=7):
    """(p, n, W, generators): random sparse matrices plus the nilpotent Jordan block."""
    rng = random.Random(seed)
    J = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    out = [(3, 3, [[1, 0, 0], [0, 1, 0]], [J]), (3, 3, [[0, 1, 0], [0, 0, 1]], [J])]
    for _ in range(12):
        p = rng.choice([2, 3, 5])
        n = rng.randint(2, 4 if p < 5 else 3)
        k = rng.randint(1, n)
        W = [[rng.randrange(p) for _ in range(n)] for _ in range(k)]
        gens = []
        for _ in range(rng.randint(1, 2)):
            g = [[rng.randrange(p) if rng.random() < 0.4 else 0 for _ in range(n)] for _ in range(n)]
            gens.append(g)
        out.append((p, n, W, gens))
    return out


def grade_instances():
    out = []
    for t in ["A2", "B2"]:
        d = RootDatum(t, 3)
        for I in [(), (0,), (1,), (0, 1)]:
            out.append((t, I))
    return out


def small_box(rank):
    return Box(tuple((-1, 1) for _ in range(rank)))


def build():
    data = {"composition": {}, "largest_invariant_module": {}, "largest_invariant_matrix": [], "grade_leq": {}}
    for name, make in module_instances():
        M = make()
        assert M.dim <= 4, name
        data["composition"][name] = [[[list(k[0]), list(k[1]), n] for k, n in ch]
                                     for ch in oracles.composition_characters(M)]
        if hasattr(M, "top_key"):
            inv = oracles.largest_graded_invariant(M, below_top(M))
            data["largest_invariant_module"][name] = sum(inv.values())
    for p, n, W, gens in matrix_instances():
        K = oracles.largest_invariant_bruteforce(p, W, gens, n)
        dim = 0
        while p ** dim < len(K):
            dim += 1
        data["largest_invariant_matrix"].append({"p": p, "n": n, "W": W, "gens": gens, "dim": dim,
                                                 "vectors": sorted(map(list, K))})
    for t, I in grade_instances():
        d = RootDatum(t, 3)
        lv = LeviDatum(d, I)
        box = list(small_box(d.rank))
        table = [[int(oracles.grade_leq_bruteforce(lv, a, b)) for b in box] for a in box]
        data["grade_leq"][f"{t} I={list(I)}"] = {"box": [list(x) for x in box], "table": table}
    return data


if __name__ == "__main__":
    os.makedirs(os.path.dirname(DATA), exist_ok=True)
    with open(DATA, "w") as fh:
        json.dump(build(), fh, sort_keys=True)
        fh.write("\n")
    print("wrote", DATA)
