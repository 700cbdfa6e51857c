"""Linkage combinatorics: R_pi, n_beta, the upward reflection alpha-up,
predicted block partitions and their comparison with computed
composition factors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import networkx as nx

from .lattice import Box, LeviDatum, add, orbit_in_box, scale
from .uchi import StructuralMap, build_verma
from .verma import composition_factors, label_of_weight, w_I_pi


@dataclass(frozen=True)
class PiProfile:
    pi: StructuralMap
    r_pi: tuple
    r_pi_plus: tuple


def compute_r_pi(pi: StructuralMap, ring=None) -> PiProfile:
    """R_pi = roots whose central value pi(h_a)^p - pi(h_a) is not a unit."""
    d = pi.datum
    r = pi.r_pi(ring)
    plus = tuple(x for x in d.positive_roots if x in r)
    assert set(r) == set(plus) | {scale(-1, x) for x in plus}
    return PiProfile(pi, r, plus)


def regime(levi: LeviDatum, pi: StructuralMap):
    """Which hypothesis sets the pair (I, pi) satisfies.

    "iso": R_pi^+ ∩ R_I is empty, one root, or R_I^+ (isomorphism classes are known);
    "block": R_pi ∩ R_I is empty, {±a}, or R_I (blocks are known).
    """
    rp = set(pi.r_pi())
    inter = [r for r in levi.positive_roots if r in rp]
    single = len(inter) == 1
    return {
        "R_pi_cap_R_I": [list(r) for r in inter],
        "iso": len(inter) == 0 or single or len(inter) == len(levi.positive_roots),
        "block": len(inter) == 0 or single or len(inter) == len(levi.positive_roots),
        "single_root_in_I": single and any(inter[0] == levi.datum.simple_roots[i] for i in levi.I),
    }


def n_beta(pi: StructuralMap, lam, beta) -> int:
    """n in [0,p) with <lam+rho, b^vee> + pi(h_b) = n mod p."""
    d = pi.datum
    F = pi.F
    x = F.add(pi.h(beta), F.from_int(d.pairing(add(tuple(lam), d.rho), beta)))
    if not F.in_prime_field(x):
        raise ValueError(f"{beta} is not in R_pi")
    return F.prime_value(x)


def alpha_up_n(datum, lam, alpha) -> int:
    return (-datum.pairing(add(tuple(lam), datum.rho), alpha)) % datum.p


def alpha_up(datum, lam, alpha):
    """lam + n alpha with <lam+rho, alpha^vee> = p - n mod p, 0 <= n < p."""
    n = alpha_up_n(datum, lam, alpha)
    return add(tuple(lam), scale(n, datum.root_weight(alpha)))


def linkage_roots(levi: LeviDatum, pi: StructuralMap):
    """Roots a whose affine reflections s_{a,mp} generate W_{pi,p}."""
    d = levi.datum
    rp = set(pi.r_pi())
    out = []
    for r in d.positive_roots:
        if r not in rp:
            continue
        simple_in_I = any(r == d.simple_roots[i] for i in levi.I)
        if simple_in_I or r not in levi.roots:
            out.append(r)
    return out


def predicted_blocks(pi: StructuralMap, levi: LeviDatum, box: Box):
    """Partition of the box into classes (W_{pi,p} . lam + pZI) ∩ box."""
    d = levi.datum
    roots = linkage_roots(levi, pi)
    seen = {}
    classes = []
    for lam in box:
        if lam in seen:
            continue
        orb = orbit_in_box(d, roots, lam, box, levi)
        cls = sorted(orb)
        for mu in cls:
            if mu in seen:
                raise RuntimeError("predicted classes overlap")
            seen[mu] = len(classes)
        classes.append(cls)
    return classes


def linkage_graph(pi: StructuralMap, levi: LeviDatum, box: Box):
    """Edges lam -- mu whenever [Z(lam) : L(mu)] != 0, for lam, mu in the box."""
    g = nx.Graph()
    by_label = {}
    weights = list(box)
    for mu in weights:
        by_label.setdefault(label_of_weight(levi, pi, mu), []).append(mu)
        g.add_node(mu)
    factors = {}
    for lam in weights:
        cf = composition_factors(build_verma(levi, pi, lam))
        factors[lam] = cf
        for lab in cf:
            for mu in by_label.get(lab, []):
                if mu != lam:
                    g.add_edge(lam, mu)
    return g, factors


def verify_linkage(pi: StructuralMap, levi: LeviDatum, box: Box):
    """Every connected component of the linkage graph lies in one predicted class."""
    classes = predicted_blocks(pi, levi, box)
    where = {mu: i for i, cls in enumerate(classes) for mu in cls}
    g, _ = linkage_graph(pi, levi, box)
    violations = []
    comps = [sorted(c) for c in nx.connected_components(g)]
    for comp in comps:
        ids = {where[mu] for mu in comp}
        if len(ids) > 1:
            violations.append(comp)
    return {
        "type": levi.datum.type_label,
        "p": levi.datum.p,
        "levi": [i + 1 for i in levi.I],
        "pi": [pi.F.to_str(v) for v in pi.values],
        "classes": [[list(m) for m in c] for c in classes],
        "components": [[list(m) for m in c] for c in sorted(comps)],
        "edges": sorted([sorted([list(a), list(b)]) for a, b in g.edges()]),
        "violations": [[list(m) for m in c] for c in violations],
        "ok": not violations,
    }


def irreducibility_prediction(pi: StructuralMap, levi: LeviDatum, lam) -> bool:
    """n_beta(lam) = 0 for every beta in R_pi^+ outside R_I."""
    rp = compute_r_pi(pi).r_pi_plus
    return all(n_beta(pi, lam, b) == 0 for b in rp if b not in levi.roots)


def related_by_w_I_pi(levi: LeviDatum, pi: StructuralMap, lam, mu) -> bool:
    """lam ∈ W_{I,pi} . mu + pZI."""
    d = levi.datum
    target = levi.reduce_mod_pZI(lam)
    return any(levi.reduce_mod_pZI(d.dot(u, mu)) == target for u in w_I_pi(levi, pi))


def related_by_root_reflections(levi: LeviDatum, pi: StructuralMap, lam, mu) -> bool:
    """lam ∈ <s_b : b ∈ R_pi ∩ R_I> . mu + pZI (all roots of I, not only simple ones)."""
    d = levi.datum
    rp = set(pi.r_pi())
    gens = [d.reflection(r) for r in levi.positive_roots if r in rp]
    group = {d.identity()}
    frontier = [d.identity()]
    while frontier:
        w = frontier.pop()
        for s in gens:
            v = d.compose(s, w)
            if v not in group:
                group.add(v)
                frontier.append(v)
    target = levi.reduce_mod_pZI(lam)
    return any(levi.reduce_mod_pZI(d.dot(u, mu)) == target for u in group)
