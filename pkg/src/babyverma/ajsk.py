"""The combinatorial category K(Omega, A) in rank one and the functor V.

V M(lam) is the k(t)-space of primitive vectors of weight lam in M ⊗ k(t);
V M(lam, alpha) is the A-lattice of pairs (phi(v0), phi(v1)) for
phi in Hom_A(Q(lam), M), inside V M(lam) ⊕ V M(up lam).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import scalars as S
from .deform import DeformedModule, base_change, build_deformed_verma, deformation_ring, projective_Q
from .lattice import LeviDatum, scale, add
from .linkage import alpha_up, alpha_up_n
from .uchi import GradedModule, StructuralMap, build_verma
from .verma import ModuleMap, composition_factors, hom_space, label_of_weight, primitive_space, Subspace, top_vector


def _key(levi: LeviDatum, lam):
    return (levi.grade(lam).rep, tuple(x % levi.datum.p for x in lam))


def _canon(levi, lam):
    return tuple(levi.reduce_mod_pZI(tuple(lam)))


def up_of(levi, lam):
    d = levi.datum
    return _canon(levi, alpha_up(d, lam, d.simple_roots[0]))


def down_of(levi, mu):
    """The lam with up(lam) = mu."""
    d = levi.datum
    n = d.pairing(add(tuple(mu), d.rho), d.simple_roots[0]) % d.p
    return _canon(levi, add(tuple(mu), scale(-n, d.root_weight(d.simple_roots[0]))))


def saturate(R: S.DVR, vectors):
    """Basis of span_K(vectors) ∩ A^N."""
    K = R.K
    vectors = [list(v) for v in vectors if any(x.num for x in v)]
    if not vectors:
        return []
    _, G = S.scale_into_ring(R, S.transpose(vectors))
    U, D, V, r = S.dvr_smith(R, G)
    Uinv = S.inverse(K, U)
    return [[Uinv[i][j] for i in range(len(Uinv))] for j in range(r)]


def coords(F, basis, v):
    x = S.solve(F, S.transpose(basis), v)
    if x is None:
        raise ValueError("vector outside the span")
    return x


def hom_lattice(M: GradedModule, N: GradedModule):
    """A-basis of Hom_A(M, N) = Hom_K ∩ integral maps, as ModuleMaps."""
    R = M.ring
    H = hom_space(M, N)
    if not H:
        return []
    keys = sorted(set(M.dims) & set(N.dims))

    def flat(f):
        return [x for k in keys for row in f.block(k) for x in row]

    basis = saturate(R, [flat(f) for f in H])
    out = []
    for v in basis:
        blocks, pos = {}, 0
        for k in keys:
            rows, cols = N.dims[k], M.dims[k]
            blocks[k] = [v[pos + i * cols: pos + (i + 1) * cols] for i in range(rows)]
            pos += rows * cols
        out.append(ModuleMap(M, N, blocks))
    return out


@dataclass
class KObject:
    """(M(lam))_{lam in Omega} with wall lattices M(lam, alpha)."""
    levi: LeviDatum
    R: S.DVR
    omega: List[tuple]
    spaces: Dict[tuple, list]                    # lam -> K-basis (vectors of the module block)
    walls: Dict[tuple, dict] = field(default_factory=dict)
    source: Optional[GradedModule] = None

    def rank(self, lam):
        return len(self.spaces.get(_canon(self.levi, lam), []))

    def ambient(self, lam):
        lam = _canon(self.levi, lam)
        return self.walls[lam]["ambient"]

    def to_json(self):
        K = self.R.K
        return {
            "omega": [list(x) for x in self.omega],
            "ranks": {str(list(x)): len(v) for x, v in sorted(self.spaces.items())},
            "walls": {str(list(x)): {"ambient": [list(a) for a in w["ambient"]],
                                     "generators": [[K.to_str(c) for c in g] for g in w["lattice"]]}
                      for x, w in sorted(self.walls.items())},
        }


def omega_for(levi, layers):
    """Layer weights together with their up and down neighbours."""
    out = set()
    for lam in layers:
        lam = _canon(levi, lam)
        out |= {lam, up_of(levi, lam), down_of(levi, lam)}
    return sorted(out)


def _v0_v1(Q: DeformedModule):
    """(key, vector) of v0 in Q ⊗ K and of v1, and the ambient weights."""
    ext = getattr(Q, "extension", None)
    M = Q.module
    K = M.F
    if ext is None:
        return [top_vector(M)], [Q.layers[0]]
    Y = ext.Y
    kq, v0q = top_vector(ext.quot)
    ks, v1s = top_vector(ext.sub)
    # v1 is the sub-part vector at the sub top key
    v1 = [K.zero] * Y.dims[ks]
    v1[:len(v1s)] = v1s
    # v0 = y_b - b f^(n) v1; y_b sits after the sub part, f^(n) v1 is a sub-part vector
    s = ext.split_sizes[kq]
    v0 = [K.zero] * Y.dims[kq]
    v0[s + v0q.index(K.one)] = K.one
    mono = (ext.n,)
    idx = ext.sub.position[mono][1]
    v0[idx] = K.sub(v0[idx], ext.b)
    return [(kq, v0), (ks, v1)], [ext.lam, ext.up]


def functor_V(M: DeformedModule, omega=None) -> KObject:
    levi = M.module.levi
    if levi.datum.rank != 1:
        raise ValueError("V is only implemented in rank 1")
    mod = M.module
    R = mod.ring
    if R is None or not M.flat:
        raise ValueError("V needs a free module over the local ring")
    K = R.K
    omega = omega_for(levi, M.layers) if omega is None else [_canon(levi, x) for x in omega]
    need = set(omega) | {up_of(levi, x) for x in omega}
    spaces = {}
    for lam in sorted(need):
        k = _key(levi, lam)
        spaces[lam] = primitive_space(mod, k) if k in mod.dims else []
    obj = KObject(levi, R, list(omega), spaces, source=mod)
    for lam in omega:
        obj.walls[lam] = _wall(obj, M, lam)
    return obj


def _wall(obj: KObject, M: DeformedModule, lam):
    levi = obj.levi
    mod = M.module
    K = obj.R.K
    up = up_of(levi, lam)
    ambient = [lam] if up == lam else [lam, up]
    if all(not obj.spaces[x] for x in ambient):
        return {"ambient": ambient, "lattice": []}
    Q = projective_Q(levi, lam)
    gens_q, _ = _v0_v1(Q)
    gens = []
    for phi in hom_lattice(Q.module, mod):
        col = []
        for (k, v), wt in zip(gens_q, ambient):
            img = S.mat_vec(K, phi.block(k), v) if k in mod.dims else []
            basis = obj.spaces[wt]
            col.extend(coords(K, basis, img) if basis else [])
        gens.append(col)
    return {"ambient": ambient, "lattice": S.lattice_basis(obj.R, gens) if gens else []}


# ---------------------------------------------------------------------------
# morphisms

def _var_layout(A: KObject, B: KObject):
    lams = sorted(set(A.spaces) | set(B.spaces))
    layout, pos = {}, 0
    for lam in lams:
        m, n = A.rank(lam), B.rank(lam)
        layout[lam] = (pos, n, m)
        pos += n * m
    return layout, pos


def _wall_image_rows(A: KObject, B: KObject, layout, q, lam, gen):
    """Linear map phi -> (phi_lam ⊕ phi_up)(gen) in coordinates of B's ambient."""
    K = A.R.K
    rows = []
    off = 0
    for wt in A.walls[lam]["ambient"]:
        m = A.rank(wt)
        g = gen[off: off + m]
        off += m
        pos, n, _ = layout[wt]
        for i in range(n):
            row = [K.zero] * q
            for j in range(m):
                row[pos + i * m + j] = g[j]
            rows.append(row)
    return rows


def k_hom(A: KObject, B: KObject):
    """Lattice basis of Hom_K(A, B) as flattened vectors, and its rank.

    Returns (rank, basis, layout); basis is None when the solution set is
    not a finitely generated lattice.
    """
    R = A.R
    K = R.K
    layout, q = _var_layout(A, B)
    if q == 0:
        return 0, [], layout
    span_rows, int_rows = [], []
    for lam in A.omega:
        wa, wb = A.walls.get(lam), B.walls.get(lam)
        if wa is None or wb is None:
            raise ValueError("objects over different Omega")
        Hb = wb["lattice"]
        dimb = sum(B.rank(x) for x in wb["ambient"])
        if dimb == 0:
            continue
        # complete Hb to a basis of B's ambient
        basis = [list(h) for h in Hb]
        echo = Subspace(K, {0: dimb})
        for h in basis:
            echo.add(0, h)
        comp = []
        for i in range(dimb):
            e = [K.one if j == i else K.zero for j in range(dimb)]
            if echo.add(0, e) is not None:
                comp.append(e)
        Pinv = S.inverse(K, S.transpose(basis + comp))
        for gen in wa["lattice"]:
            img = _wall_image_rows(A, B, layout, q, lam, gen)
            C = S.mat_mul(K, Pinv, img)
            int_rows.extend(C[:len(basis)])
            span_rows.extend(C[len(basis):])
    Nk = S.kernel(K, span_rows, q) if span_rows else S.identity(K, q)
    r = len(Nk)
    if r == 0:
        return 0, [], layout
    N = S.transpose(Nk)                          # q x r
    if not int_rows:
        return r, None, layout
    T = S.mat_mul(K, int_rows, N)                # m x r
    if S.rank(K, T) < r:
        return r, None, layout
    k, T2 = S.scale_into_ring(R, T)
    U, D, V, rk = S.dvr_smith(R, T2)
    zs = []
    for i in range(r):
        z = [K.zero] * r
        z[i] = R.t_power(k - R.valuation(D[i][i]))
        zs.append(z)
    basis = [S.mat_vec(K, N, S.mat_vec(K, V, z)) for z in zs]
    return r, basis, layout


def V_of_map(f: ModuleMap, A: KObject, B: KObject, layout, q):
    K = A.R.K
    levi = A.levi
    v = [K.zero] * q
    for lam, (pos, n, m) in layout.items():
        if not n or not m:
            continue
        k = _key(levi, lam)
        Fk = f.block(k)
        for j, b in enumerate(A.spaces[lam]):
            c = coords(K, B.spaces[lam], S.mat_vec(K, Fk, b))
            for i in range(n):
                v[pos + i * m + j] = c[i]
    return v


def v_full_faithful_check(M: DeformedModule, N: DeformedModule) -> dict:
    levi = M.module.levi
    omega = sorted(set(omega_for(levi, M.layers)) | set(omega_for(levi, N.layers)))
    A, B = functor_V(M, omega), functor_V(N, omega)
    rk, kbasis, layout = k_hom(A, B)
    q = sum(n * m for _, n, m in layout.values())
    H = hom_lattice(M.module, N.module)
    images = [V_of_map(f, A, B, layout, q) for f in H]
    R = A.R
    cbasis = S.lattice_basis(R, images) if images else []
    out = {"rank_C": len(H), "rank_K": rk, "rank_image": len(cbasis)}
    same = None
    if kbasis is not None:
        same = (all(S.lattice_contains(R, kbasis, v) for v in cbasis)
                and all(S.lattice_contains(R, cbasis, v) for v in kbasis))
    out["lattice_equal"] = same
    out["ok"] = len(H) == rk == len(cbasis) and same is not False
    return out


def rank_components(vec, layout, K):
    """Ranks of the nonzero components phi_lam of a flattened morphism."""
    out = {}
    for lam, (pos, n, m) in layout.items():
        if not n or not m:
            continue
        blk = [vec[pos + i * m: pos + (i + 1) * m] for i in range(n)]
        r = S.rank(K, blk)
        if r:
            out[lam] = r
    return out


def rank_well_defined(basis, layout, K) -> dict:
    """Do all nonzero components of each morphism (and of pairwise sums) have one rank?"""
    bad = []
    vecs = list(basis or [])
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            vecs.append([K.add(a, b) for a, b in zip(vecs[i], vecs[j])])
        if len(vecs) > 64:
            break
    for v in vecs:
        rc = rank_components(v, layout, K)
        if len(set(rc.values())) > 1:
            bad.append({str(list(k)): r for k, r in rc.items()})
    return {"tested": len(vecs), "counterexamples": bad, "ok": not bad}


def z_filtration_multiplicities(obj: KObject) -> dict:
    return {lam: len(v) for lam, v in sorted(obj.spaces.items()) if v}


def wall_decomposes(obj: KObject, lam) -> bool:
    """Is M(lam, alpha) the sum of its intersections with M(lam) and M(up)?"""
    R = obj.R
    K = R.K
    w = obj.walls[_canon(obj.levi, lam)]
    L = w["lattice"]
    if len(w["ambient"]) < 2 or not L:
        return True
    a = obj.rank(w["ambient"][0])
    dim = a + obj.rank(w["ambient"][1])
    parts = []
    for lo, hi in ((a, dim), (0, a)):
        # lattice vectors with zero coordinates in [lo, hi)
        G = S.transpose(L)
        rows = G[lo:hi]
        cs = S.kernel(K, rows, len(L)) if rows else S.identity(K, len(L))
        cs = saturate(R, cs)
        parts.extend(S.mat_vec(K, G, c) for c in cs)
    if len(parts) < len(L):
        return False
    return all(S.lattice_contains(R, parts, v) for v in L)


def main_theorem_check(levi: LeviDatum, lam, mu) -> dict:
    """[Z_k(mu) : L_k(lam)] = rank V Q(lam)(mu)."""
    d = levi.datum
    pi0 = StructuralMap(d, S.PrimeField(d.p), [0])
    lhs = composition_factors(build_verma(levi, pi0, tuple(mu))).get(label_of_weight(levi, pi0, lam), 0)
    Q = projective_Q(levi, lam)
    mu_c = _canon(levi, mu)
    k = _key(levi, mu_c)
    rhs = len(primitive_space(Q.module, k)) if k in Q.module.dims else 0
    return {"lam": list(lam), "mu": list(mu), "lhs": lhs, "rhs": rhs, "ok": lhs == rhs}


def main_theorem_sweep(levi: LeviDatum, box) -> dict:
    d = levi.datum
    pi0 = StructuralMap(d, S.PrimeField(d.p), [0])
    weights = list(box)
    factors = {mu: composition_factors(build_verma(levi, pi0, mu)) for mu in weights}
    Qs = {lam: projective_Q(levi, lam).module for lam in weights}
    bad = []
    for lam in weights:
        lab = label_of_weight(levi, pi0, lam)
        Q = Qs[lam]
        for mu in weights:
            k = _key(levi, _canon(levi, mu))
            rhs = len(primitive_space(Q, k)) if k in Q.dims else 0
            lhs = factors[mu].get(lab, 0)
            if lhs != rhs:
                bad.append((lam, mu, lhs, rhs))
    return {"pairs": len(weights) ** 2, "mismatches": bad, "ok": not bad}
