"""Finite-dimensional irreducible modules over the quantized enveloping
algebra, and derived modules (duals, tensor products), with invariant forms,
isotypic decompositions and projections.

Irreducibles are built as Verma quotients: F-monomial vectors are generated
level by level from the highest weight vector, the Shapovalov Gram matrix of
each weight space is computed through the commutation relations, and the
Gram null space is quotiented away.  Bases are never orthonormalized; the
invariant form is kept as an exact Gram matrix per weight block, rescaled so
that <E_i x, y> = <x, K_i F_i y> holds exactly (the star-structure
compatibility in Gram-covariant form).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .linalg import (RowSpanFilter, SpMat, dense_inverse, dense_kernel,
                     dense_solve, kron_list)
from .rootdata import RAT, RootDatum, Weight
from .scalars import Scalar, qbinom_gauss

_ZERO = Scalar.zero()
_ONE = Scalar.one()


class ModuleRep:
    """A finite-dimensional weight module with exact generator matrices and
    an invariant Gram form stored per weight block."""

    def __init__(self, rd: RootDatum, weights, E, F, gram_blocks=None,
                 gram_block_fn=None, provenance="module"):
        self.rd = rd
        self.weights = tuple(weights)
        self.dim = len(self.weights)
        self.E = tuple(E)
        self.F = tuple(F)
        self.provenance = provenance
        self.weight_blocks: dict = {}
        for idx, w in enumerate(self.weights):
            self.weight_blocks.setdefault(w, []).append(idx)
        self._gram_blocks = dict(gram_blocks) if gram_blocks else {}
        self._gram_block_fn = gram_block_fn
        self._gram_inv_blocks: dict = {}

    # -- Gram form ---------------------------------------------------------

    def gram_block(self, w: Weight):
        blk = self._gram_blocks.get(w)
        if blk is None:
            if self._gram_block_fn is None:
                raise KeyError(f"no Gram block for weight {w}")
            blk = self._gram_block_fn(w)
            self._gram_blocks[w] = blk
        return blk

    def gram_inv_block(self, w: Weight):
        blk = self._gram_inv_blocks.get(w)
        if blk is None:
            blk = dense_inverse(self.gram_block(w))
            self._gram_inv_blocks[w] = blk
        return blk

    def _block_pos(self, idx: int) -> tuple:
        w = self.weights[idx]
        return w, self.weight_blocks[w].index(idx)

    def gram_entry(self, a: int, b: int) -> Scalar:
        wa, pa = self._block_pos(a)
        wb, pb = self._block_pos(b)
        if wa != wb:
            return _ZERO
        return self.gram_block(wa)[pa][pb]

    def gram_spmat(self) -> SpMat:
        out = SpMat(self.dim, self.dim)
        for w, idxs in self.weight_blocks.items():
            blk = self.gram_block(w)
            for i, gi in enumerate(idxs):
                for j, gj in enumerate(idxs):
                    out.set(gi, gj, blk[i][j])
        return out

    def gram_inv_spmat(self) -> SpMat:
        out = SpMat(self.dim, self.dim)
        for w, idxs in self.weight_blocks.items():
            blk = self.gram_inv_block(w)
            for i, gi in enumerate(idxs):
                for j, gj in enumerate(idxs):
                    out.set(gi, gj, blk[i][j])
        return out

    def gram_apply(self, vec: dict) -> dict:
        """Multiply the Gram matrix into a sparse vector, blockwise."""
        out: dict = {}
        by_weight: dict = {}
        for idx, v in vec.items():
            by_weight.setdefault(self.weights[idx], {})[idx] = v
        for w, sub in by_weight.items():
            idxs = self.weight_blocks[w]
            blk = self.gram_block(w)
            pos = {g: p for p, g in enumerate(idxs)}
            for gidx, v in sub.items():
                p = pos[gidx]
                for r, gr in enumerate(idxs):
                    c = blk[r][p]
                    if not c.is_zero():
                        cur = out.get(gr, _ZERO) + c * v
                        if cur.is_zero():
                            out.pop(gr, None)
                        else:
                            out[gr] = cur
        return out

    # -- operators -----------------------------------------------------------

    def k_diag(self, lam: Weight) -> SpMat:
        rd = self.rd
        return SpMat.diagonal([rd.q_power(lam, w) for w in self.weights])

    def quantum_dimension(self) -> Scalar:
        rd = self.rd
        two_rho = tuple(2 * x for x in rd.rho)
        return Scalar.sum(rd.q_power(two_rho, w) for w in self.weights)

    def word_matvec(self, word, vec: dict) -> dict:
        """Apply a PBW word; tokens ('E', i), ('F', i), ('K', weight)."""
        for kind, arg in reversed(word):
            if kind == "E":
                vec = self.E[arg].matvec(vec)
            elif kind == "F":
                vec = self.F[arg].matvec(vec)
            elif kind == "K":
                vec = {idx: v * self.rd.q_power(arg, self.weights[idx])
                       for idx, v in vec.items()}
            else:
                raise ValueError(f"bad word token {kind!r}")
        return vec

    # -- sanity --------------------------------------------------------------

    def check_relations(self, check_serre=True, check_gram=True):
        """Assert the defining relations as exact matrix identities."""
        rd = self.rd
        n = rd.rank
        for i in range(n):
            for (r, c) in self.E[i].data:
                assert self.weights[r] == rd.weight_add(self.weights[c], rd.simple_roots[i]), \
                    "E does not raise by alpha_i"
            for (r, c) in self.F[i].data:
                assert self.weights[r] == rd.weight_sub(self.weights[c], rd.simple_roots[i]), \
                    "F does not lower by alpha_i"
        for i in range(n):
            for j in range(n):
                comm = self.E[i] @ self.F[j] - self.F[j] @ self.E[i]
                if i == j:
                    expected = SpMat.diagonal([rd.qint(w[i], i) for w in self.weights])
                else:
                    expected = SpMat(self.dim, self.dim)
                assert comm == expected, f"[E_{i}, F_{j}] relation fails"
        if check_serre:
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    m = 1 - rd.cartan[i][j]
                    step = rd.L * rd.d[i]
                    for mats, name in ((self.E, "E"), (self.F, "F")):
                        pow_i = [SpMat.identity(self.dim)]
                        for _ in range(m):
                            pow_i.append(pow_i[-1] @ mats[i])
                        total = SpMat(self.dim, self.dim)
                        for k in range(m + 1):
                            term = pow_i[k] @ mats[j] @ pow_i[m - k]
                            coef = qbinom_gauss(m, k, step)
                            if k % 2:
                                coef = -coef
                            total = total + term.scale(coef)
                        assert total.is_zero(), f"quantum Serre fails for {name}, ({i},{j})"
        if check_gram:
            G = self.gram_spmat()
            for i in range(n):
                lhs = self.E[i].transpose() @ G
                rhs = G @ (self.k_diag(rd.simple_roots[i]) @ self.F[i])
                assert lhs == rhs, f"Gram invariance fails for i={i}"

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        def mat_json(m: SpMat):
            return [[r, c, v.to_str()] for (r, c), v in sorted(m.data.items())]
        return {
            "kind": "module",
            "algebra": self.rd.label,
            "provenance": self.provenance,
            "dim": self.dim,
            "basis_weights": [list(w) for w in self.weights],
            "E": [mat_json(m) for m in self.E],
            "F": [mat_json(m) for m in self.F],
            "gram": {",".join(map(str, w)): [[x.to_str() for x in row]
                                             for row in self.gram_block(w)]
                     for w in sorted(self.weight_blocks)},
        }

    def dump(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def __repr__(self):
        return f"ModuleRep({self.provenance}, dim={self.dim})"


class IrrepModule(ModuleRep):
    """Irreducible module V(mu) built as the Verma quotient."""

    def __init__(self, rd, mu, weights, E, F, gram_blocks, words):
        super().__init__(rd, weights, E, F, gram_blocks,
                         provenance=f"V({','.join(map(str, mu))})")
        self.highest_weight = tuple(mu)
        self.hw_index = 0
        self.basis_words = tuple(words)


def build_irrep(rd: RootDatum, mu: Weight) -> IrrepModule:
    """Construct V(mu) from the relations.

    Level by level, candidate vectors F_i(kept basis vector) are paired via
    the Shapovalov contraction; per weight block, candidates independent
    modulo the form's radical (greedy, in lexicographic word order) become
    basis vectors, dependent ones get an exact projection onto the kept
    basis.  Action matrices and the invariant Gram form come out of the same
    bookkeeping."""
    mu = tuple(int(x) for x in mu)
    if not rd.is_dominant(mu):
        raise ValueError(f"highest weight {mu} is not dominant")
    n = rd.rank

    weight_of = {(): mu}
    kept_levels = [[()]]
    gram: dict = {((), ()): _ONE}
    # E_table[(i, word)] = sparse combination over kept words one level up
    E_table: dict = {(i, ()): {} for i in range(n)}
    # proj[word] for candidate words: combination over kept words (same level)
    proj: dict = {(): {(): _ONE}}
    # pairing rows for every candidate against kept words of its block
    cand_row: dict = {(): {(): _ONE}}

    hbound = rd.height(rd.weight_sub(mu, rd.longest_element().act(mu)))
    hbound = int(hbound)

    level = 0
    while kept_levels[level]:
        level += 1
        if level > hbound + 1:
            raise AssertionError("Verma quotient did not terminate")
        prev_kept = kept_levels[level - 1]
        blocks: dict = {}
        for w in prev_kept:
            for i in range(n):
                cand = (i,) + w
                cw = rd.weight_sub(weight_of[w], rd.simple_roots[i])
                weight_of[cand] = cw
                blocks.setdefault(cw, []).append(cand)

        kept_here = []
        for cw in sorted(blocks):
            cands = sorted(blocks[cw])
            m = len(cands)
            # Shapovalov pairings via <F_i w, F_j w'> = <w, F_j(E_i w')> + delta_ij [wt'_i] <w, w'>
            blk = [[_ZERO] * m for _ in range(m)]
            for a, ca in enumerate(cands):
                i, w = ca[0], ca[1:]
                for b, cb in enumerate(cands):
                    if b < a:
                        blk[a][b] = blk[b][a]
                        continue
                    j, wp = cb[0], cb[1:]
                    total = _ZERO
                    for x, cx in E_table[(i, wp)].items():
                        row = cand_row[(j,) + x]
                        coef = row.get(w)
                        if coef is not None:
                            total = total + cx * coef
                    if i == j:
                        g = gram.get((w, wp))
                        if g is not None and not g.is_zero():
                            total = total + rd.qint(weight_of[wp][i], i) * g
                    blk[a][b] = total
            for a in range(m):
                for b in range(a):
                    assert blk[a][b] == blk[b][a], "Shapovalov block not symmetric"

            # greedy rank filter in lex order
            kept_pos = []
            filt = RowSpanFilter(m)
            for a in range(m):
                if filt.offer(blk[a]):
                    kept_pos.append(a)
            kept_words = [cands[a] for a in kept_pos]
            kept_here.extend(kept_words)

            for a, pa in enumerate(kept_pos):
                for b, pb in enumerate(kept_pos):
                    gram[(cands[pa], cands[pb])] = blk[pa][pb]
            for a, ca in enumerate(cands):
                cand_row[ca] = {cands[p]: blk[p][a] for p in kept_pos
                                if not blk[p][a].is_zero()}
            if kept_pos:
                Gk = [[blk[p][q] for q in kept_pos] for p in kept_pos]
                others = [a for a in range(m) if a not in kept_pos]
                if others:
                    rhs = [[blk[p][a] for a in others] for p in kept_pos]
                    sol = dense_solve(Gk, rhs)
                    for col, a in enumerate(others):
                        proj[cands[a]] = {kept_words[r]: sol[r][col]
                                          for r in range(len(kept_pos))
                                          if not sol[r][col].is_zero()}
                for wpd in kept_words:
                    proj[wpd] = {wpd: _ONE}
            else:
                for ca in cands:
                    proj[ca] = {}

        kept_levels.append(sorted(kept_here))

        # E action on the new kept words
        for wk in kept_levels[level]:
            j, wp = wk[0], wk[1:]
            for i in range(n):
                out: dict = {}
                for x, cx in E_table[(i, wp)].items():
                    for y, cy in proj[(j,) + x].items():
                        s = out.get(y, _ZERO) + cx * cy
                        if s.is_zero():
                            out.pop(y, None)
                        else:
                            out[y] = s
                if i == j:
                    c = rd.qint(weight_of[wp][i], i)
                    if not c.is_zero():
                        s = out.get(wp, _ZERO) + c
                        if s.is_zero():
                            out.pop(wp, None)
                        else:
                            out[wp] = s
                E_table[(i, wk)] = out

    words = [w for lev in kept_levels for w in sorted(lev)]
    index = {w: k for k, w in enumerate(words)}
    dim = len(words)
    weights = [weight_of[w] for w in words]

    E = [SpMat(dim, dim) for _ in range(n)]
    F = [SpMat(dim, dim) for _ in range(n)]
    for w, c in index.items():
        for i in range(n):
            for y, cy in E_table[(i, w)].items():
                E[i].set(index[y], c, cy)
            for y, cy in proj[(i,) + w].items():
                F[i].set(index[y], c, cy)

    # Rescale the Shapovalov form blockwise to the star-invariant Gram form:
    # on the weight space mu - beta multiply by q^(-(mu,beta) + (beta,beta)/2 + (rho,beta)).
    weight_blocks: dict = {}
    for k, w in enumerate(weights):
        weight_blocks.setdefault(w, []).append(k)
    gram_blocks = {}
    for w, idxs in weight_blocks.items():
        beta = rd.weight_sub(mu, w)
        e = -rd.pairing(mu, beta) + rd.pairing(beta, beta) / 2 + rd.pairing(rd.rho, beta)
        scale = rd.q_pow(e)
        blk = [[gram.get((words[a], words[b]), _ZERO) * scale for b in idxs]
               for a in idxs]
        gram_blocks[w] = blk

    mod = IrrepModule(rd, mu, weights, E, F, gram_blocks, words)
    if mod.dim != rd.weyl_dim(mu):
        raise AssertionError(
            f"dim V({mu}) = {mod.dim} disagrees with Weyl dimension {rd.weyl_dim(mu)}")
    return mod


# ---------------------------------------------------------------------------
# Derived modules
# ---------------------------------------------------------------------------

def dual_module(M: ModuleRep, twist: str) -> ModuleRep:
    """Contragredient module on the dual basis, action through the antipode
    (twist 'S') or its inverse (twist 'Sinv')."""
    if twist not in ("S", "Sinv"):
        raise ValueError("twist must be 'S' or 'Sinv'")
    rd = M.rd
    n = rd.rank
    dual_weights = [rd.weight_neg(w) for w in M.weights]
    E, F = [], []
    for i in range(n):
        alpha = rd.simple_roots[i]
        k_pos = M.k_diag(alpha)
        k_neg = M.k_diag(rd.weight_neg(alpha))
        if twist == "S":
            tw_e = (M.E[i] @ k_neg).scale(Scalar.from_rat(-1))
            tw_f = (k_pos @ M.F[i]).scale(Scalar.from_rat(-1))
        else:
            tw_e = (k_neg @ M.E[i]).scale(Scalar.from_rat(-1))
            tw_f = (M.F[i] @ k_pos).scale(Scalar.from_rat(-1))
        E.append(tw_e.transpose())
        F.append(tw_f.transpose())

    two_rho = tuple(2 * x for x in rd.rho)
    sign = 1 if twist == "S" else -1

    def gram_fn(wd: Weight, _M=M, _sign=sign):
        w = _M.rd.weight_neg(wd)
        inv = _M.gram_inv_block(w)
        scale = _M.rd.q_pow(_sign * _M.rd.pairing(two_rho, w))
        return [[x * scale for x in row] for row in inv]

    return ModuleRep(rd, dual_weights, E, F, gram_block_fn=gram_fn,
                     provenance=f"dual[{twist}]({M.provenance})")


def tensor_module(factors) -> ModuleRep:
    """Tensor product along the coproduct: E acts as sum of terms
    1 x ... x E_i x K_i x ... x K_i, F with K_i^{-1} on the left legs."""
    rd = factors[0].rd
    for m in factors[1:]:
        if m.rd is not rd:
            raise ValueError("tensor factors over different root data")
    n = rd.rank
    dims = [m.dim for m in factors]
    weights = []
    import itertools
    for combo in itertools.product(*[m.weights for m in factors]):
        total = rd.zero_weight()
        for w in combo:
            total = rd.weight_add(total, w)
        weights.append(total)

    E, F = [], []
    for i in range(n):
        alpha = rd.simple_roots[i]
        terms_e = []
        terms_f = []
        for t in range(len(factors)):
            mats_e = []
            mats_f = []
            for s, m in enumerate(factors):
                if s < t:
                    mats_e.append(SpMat.identity(m.dim))
                    mats_f.append(m.k_diag(rd.weight_neg(alpha)))
                elif s == t:
                    mats_e.append(m.E[i])
                    mats_f.append(m.F[i])
                else:
                    mats_e.append(m.k_diag(alpha))
                    mats_f.append(SpMat.identity(m.dim))
            terms_e.append(kron_list(mats_e))
            terms_f.append(kron_list(mats_f))
        Ei = terms_e[0]
        Fi = terms_f[0]
        for term in terms_e[1:]:
            Ei = Ei + term
        for term in terms_f[1:]:
            Fi = Fi + term
        E.append(Ei)
        F.append(Fi)

    strides = [1] * len(factors)
    for t in range(len(factors) - 2, -1, -1):
        strides[t] = strides[t + 1] * dims[t + 1]

    def unflatten(idx):
        out = []
        for t in range(len(factors)):
            out.append(idx // strides[t])
            idx %= strides[t]
        return out

    def gram_fn(w: Weight):
        idxs = blocks[w]
        size = len(idxs)
        blk = [[_ZERO] * size for _ in range(size)]
        for a in range(size):
            ta = unflatten(idxs[a])
            for b in range(size):
                tb = unflatten(idxs[b])
                prod = _ONE
                ok = True
                for t, m in enumerate(factors):
                    if m.weights[ta[t]] != m.weights[tb[t]]:
                        ok = False
                        break
                    prod = prod * m.gram_entry(ta[t], tb[t])
                    if prod.is_zero():
                        ok = False
                        break
                if ok:
                    blk[a][b] = prod
        return blk

    mod = ModuleRep(rd, weights, E, F, gram_block_fn=gram_fn,
                    provenance="(" + " x ".join(m.provenance for m in factors) + ")")
    blocks = mod.weight_blocks
    return mod


# ---------------------------------------------------------------------------
# Invariants and decomposition
# ---------------------------------------------------------------------------

def invariant_vectors(M: ModuleRep):
    """Basis of {x : weight 0, E_i x = 0 for all i}, as sparse dict vectors.
    For integrable modules these span the trivial isotypic component; each
    result is asserted to be killed by the F_i as well."""
    rd = M.rd
    zero = rd.zero_weight()
    idxs = M.weight_blocks.get(zero, [])
    if not idxs:
        return []
    pos = {g: c for c, g in enumerate(idxs)}
    rows = []
    for i in range(rd.rank):
        target_rows = {}
        for (r, c), v in M.E[i].data.items():
            if c in pos:
                target_rows.setdefault(r, {})[pos[c]] = v
        for r, entries in sorted(target_rows.items()):
            rows.append([entries.get(c, _ZERO) for c in range(len(idxs))])
    basis_local = dense_kernel(rows, len(idxs)) if rows else \
        [{c: _ONE} for c in range(len(idxs))]
    out = []
    for vec in basis_local:
        gvec = {idxs[c]: v for c, v in vec.items()}
        for i in range(rd.rank):
            assert not M.F[i].matvec(gvec), "invariant vector not killed by F"
        out.append(gvec)
    return out


def trivial_projection(M: ModuleRep, invariants=None) -> SpMat:
    """Gram-orthogonal projection onto the trivial isotypic component."""
    if invariants is None:
        invariants = invariant_vectors(M)
    k = len(invariants)
    P = SpMat(M.dim, M.dim)
    if k == 0:
        return P
    gu = [M.gram_apply(u) for u in invariants]
    C = [[Scalar.sum(invariants[a].get(i, _ZERO) * gu[b].get(i, _ZERO)
                     for i in set(invariants[a]) & set(gu[b]))
          for b in range(k)] for a in range(k)]
    Cinv = dense_inverse(C)
    # P = U C^{-1} (G U)^T
    for a in range(k):
        for b in range(k):
            coef = Cinv[a][b]
            if coef.is_zero():
                continue
            for r, vr in invariants[a].items():
                for c, vc in gu[b].items():
                    P.add_to(r, c, vr * coef * vc)
    return P


def projection_pair(M: ModuleRep, vec: dict, invariants):
    """Inner products <u_s, vec> against an invariant basis (Gram pairing)."""
    gv = M.gram_apply(vec)
    out = []
    for u in invariants:
        out.append(Scalar.sum(u[i] * gv[i] for i in set(u) & set(gv)))
    return out


def apply_trivial_projection(M: ModuleRep, vec: dict, invariants) -> dict:
    if not invariants:
        return {}
    k = len(invariants)
    gu = [M.gram_apply(u) for u in invariants]
    C = [[Scalar.sum(invariants[a].get(i, _ZERO) * gu[b].get(i, _ZERO)
                     for i in set(invariants[a]) & set(gu[b]))
          for b in range(k)] for a in range(k)]
    gvec = M.gram_apply(vec)
    rhs = [[Scalar.sum(u[i] * gvec.get(i, _ZERO) for i in u)]
           for u in invariants]
    sol = dense_solve(C, rhs)
    out: dict = {}
    for a in range(k):
        c = sol[a][0]
        if c.is_zero():
            continue
        for i, v in invariants[a].items():
            s = out.get(i, _ZERO) + c * v
            if s.is_zero():
                out.pop(i, None)
            else:
                out[i] = s
    return out


@dataclass
class IsotypicDecomposition:
    """Change of basis aligning a module with a direct sum of irreducibles."""

    module: ModuleRep
    components: list  # (lam, mult, [column ranges per copy])
    basis: SpMat      # columns: embedded irrep bases
    basis_inv: SpMat
    irreps: dict      # lam -> IrrepModule

    def multiplicity(self, lam: Weight) -> int:
        for l, m, _ in self.components:
            if l == lam:
                return m
        return 0

    def component_projection(self, lam: Weight) -> SpMat:
        cols = []
        for l, m, ranges in self.components:
            if l == lam:
                for start, stop in ranges:
                    cols.extend(range(start, stop))
        sel = SpMat(self.basis.cols, self.basis.cols,
                    {(c, c): _ONE for c in cols})
        return self.basis @ sel @ self.basis_inv

    def copy_rows(self, lam: Weight, s: int) -> SpMat:
        """Rows of basis_inv giving coordinates in copy s of V(lam)."""
        for l, m, ranges in self.components:
            if l == lam:
                start, stop = ranges[s]
                out = SpMat(stop - start, self.module.dim)
                for (r, c), v in self.basis_inv.data.items():
                    if start <= r < stop:
                        out.set(r - start, c, v)
                return out
        raise KeyError(lam)

    def copy_embedding(self, lam: Weight, s: int) -> SpMat:
        for l, m, ranges in self.components:
            if l == lam:
                start, stop = ranges[s]
                out = SpMat(self.module.dim, stop - start)
                for (r, c), v in self.basis.data.items():
                    if start <= c < stop:
                        out.set(r, c - start, v)
                return out
        raise KeyError(lam)


def decompose(M: ModuleRep, irrep_cache=None) -> IsotypicDecomposition:
    """Full isotypic decomposition: highest weight vectors per dominant
    weight via exact kernels, embeddings by applying F-monomials."""
    rd = M.rd
    get_irrep = irrep_cache if irrep_cache is not None else (lambda mu: build_irrep(rd, mu))

    dominant = sorted({w for w in M.weight_blocks if rd.is_dominant(w)},
                      key=lambda w: (-rd.height(w), w))
    cols = []
    components = []
    irreps = {}
    for lam in dominant:
        idxs = M.weight_blocks[lam]
        pos = {g: c for c, g in enumerate(idxs)}
        rows = []
        for i in range(rd.rank):
            target_rows = {}
            for (r, c), v in M.E[i].data.items():
                if c in pos:
                    target_rows.setdefault(r, {})[pos[c]] = v
            for r, entries in sorted(target_rows.items()):
                rows.append([entries.get(c, _ZERO) for c in range(len(idxs))])
        kern = dense_kernel(rows, len(idxs)) if rows else \
            [{c: _ONE} for c in range(len(idxs))]
        if not kern:
            continue
        V = get_irrep(lam)
        irreps[lam] = V
        ranges = []
        for vec in kern:
            gvec = {idxs[c]: v for c, v in vec.items()}
            start = len(cols)
            for word in V.basis_words:
                col = dict(gvec)
                for letter in reversed(word):
                    col = M.F[letter].matvec(col)
                cols.append(col)
            ranges.append((start, len(cols)))
        components.append((lam, len(kern), ranges))

    if len(cols) != M.dim:
        raise AssertionError(
            f"decomposition incomplete: {len(cols)} columns for dim {M.dim}")

    B = SpMat(M.dim, M.dim)
    for c, col in enumerate(cols):
        for r, v in col.items():
            B.set(r, c, v)

    # invert blockwise by weight
    col_weight = []
    for lam, mult, ranges in components:
        V = irreps[lam]
        for start, stop in ranges:
            col_weight.extend(V.weights)
    Binv = SpMat(M.dim, M.dim)
    cols_by_weight: dict = {}
    for c, w in enumerate(col_weight):
        cols_by_weight.setdefault(w, []).append(c)
    for w, cidx in cols_by_weight.items():
        ridx = M.weight_blocks[w]
        if len(ridx) != len(cidx):
            raise AssertionError("weight block mismatch in decomposition")
        block = [[B.get(r, c) for c in cidx] for r in ridx]
        inv = dense_inverse(block)
        for a, c in enumerate(cidx):
            for b, r in enumerate(ridx):
                Binv.set(c, r, inv[a][b])

    return IsotypicDecomposition(M, components, B, Binv, irreps)


# ---------------------------------------------------------------------------
# Classical character oracles (independent of the construction above)
# ---------------------------------------------------------------------------

def freudenthal_multiplicities(rd: RootDatum, lam: Weight) -> dict:
    """Weight multiplicities of V(lam) by the Freudenthal recursion;
    quantum weight multiplicities agree with the classical ones."""
    lam = tuple(lam)
    rho = rd.rho
    lam_rho = rd.weight_add(lam, rho)
    c_top = rd.pairing(lam_rho, lam_rho)

    mults = {lam: 1}
    level_of = {lam: 0}
    frontier = [lam]
    dominant_order = [lam]
    seen = {lam}
    low = rd.longest_element().act(lam)
    while frontier:
        nxt = []
        for w in frontier:
            for i in range(rd.rank):
                w2 = rd.weight_sub(w, rd.simple_roots[i])
                if w2 in seen:
                    continue
                # keep only the box w0(lam) <= w2 <= lam in the root order
                if any(c < 0 for c in rd.root_coords(rd.weight_sub(lam, w2))):
                    continue
                if any(c < 0 for c in rd.root_coords(rd.weight_sub(w2, low))):
                    continue
                seen.add(w2)
                level_of[w2] = level_of[w] + 1
                nxt.append(w2)
                if rd.is_dominant(w2):
                    dominant_order.append(w2)
        frontier = nxt

    def dominate(w):
        w = tuple(w)
        while True:
            for i in range(rd.rank):
                if w[i] < 0:
                    w = rd.simple_reflection_act(i, w)
                    break
            else:
                return w

    dominant_order.sort(key=lambda w: (level_of[w], w))
    for mu in dominant_order[1:]:
        mu_rho = rd.weight_add(mu, rho)
        den = c_top - rd.pairing(mu_rho, mu_rho)
        total = RAT(0)
        for alpha in rd.pos_roots:
            k = 1
            while True:
                w = tuple(m + k * a for m, a in zip(mu, alpha))
                mdom = dominate(w)
                mv = mults.get(mdom, 0)
                if mv == 0:
                    break
                total += 2 * mv * rd.pairing(w, alpha)
                k += 1
        val = total / den
        if val.denominator != 1:
            raise AssertionError("Freudenthal recursion non-integral")
        if int(val):
            mults[mu] = int(val)

    out = {}
    for mu, m in mults.items():
        orbit = {mu}
        frontier = [mu]
        while frontier:
            nxt = []
            for w in frontier:
                for i in range(rd.rank):
                    w2 = rd.simple_reflection_act(i, w)
                    if w2 not in orbit:
                        orbit.add(w2)
                        nxt.append(w2)
            frontier = nxt
        for w in orbit:
            out[w] = m
    return out


def tensor_multiplicities(rd: RootDatum, lam1: Weight, lam2: Weight) -> dict:
    """Multiplicities of irreducibles in V(lam1) (x) V(lam2) by character
    arithmetic (convolution of weight multisets, top-down extraction)."""
    m1 = freudenthal_multiplicities(rd, lam1)
    m2 = freudenthal_multiplicities(rd, lam2)
    conv: dict = {}
    for w1, c1 in m1.items():
        for w2, c2 in m2.items():
            w = rd.weight_add(w1, w2)
            conv[w] = conv.get(w, 0) + c1 * c2
    out = {}
    while True:
        doms = [(rd.height(w), w) for w, c in conv.items() if c and rd.is_dominant(w)]
        if not doms:
            break
        _, top = max(doms)
        mult = conv[top]
        if mult < 0:
            raise AssertionError("negative multiplicity in character extraction")
        out[top] = mult
        for w, c in freudenthal_multiplicities(rd, top).items():
            conv[w] = conv.get(w, 0) - mult * c
            if conv[w] == 0:
                del conv[w]
    if conv:
        raise AssertionError("character extraction left a remainder")
    return out
