"""Finite tuples of invertible 2x2 matrices and their product semigroups.

Words are tuples of 1-based symbols. Products are accumulated with per-step
determinant normalization plus a separate log-scale, so norms of deep
products are recovered as exp(log_scale) * norm(normalized product) without
overflow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import planar
from .planar import MatrixKind, as_array, classify_matrix, op_norm_many
from .projective import act_direction, proj_distance

Word = tuple[int, ...]

WORD_CAP = 10_000_000
CLOSURE_CAP = 1000
F_DEDUP_TOL = 1e-8


class SingularMatrix(ValueError):
    """A tuple entry is singular (or too close to singular)."""


class CapExceeded(RuntimeError):
    def __init__(self, message, max_feasible_depth=None):
        super().__init__(message)
        self.max_feasible_depth = max_feasible_depth


def word_to_str(w: Word) -> str:
    return "".join(str(s) for s in w)


def parse_word(s: str) -> Word:
    return tuple(int(ch) for ch in s)


class MatrixTuple:
    """Validated tuple (A_1, ..., A_N) of invertible 2x2 matrices."""

    def __init__(self, matrices, det_tol=1e-12):
        mats = []
        for i, m in enumerate(matrices):
            a = as_array(m).astype(float).copy()
            scale = float(np.max(np.abs(a)))
            if scale == 0.0 or abs(planar.det2(a)) <= det_tol * scale * scale:
                raise SingularMatrix(f"matrix {i + 1} is singular within tolerance")
            a.setflags(write=False)
            mats.append(a)
        if not mats:
            raise ValueError("a tuple needs at least one matrix")
        self.mats = tuple(mats)
        self.dets = np.array([planar.det2(a) for a in mats])
        # half log |det A_i|: the per-symbol log-scale increment.
        self.half_logdets = 0.5 * np.log(np.abs(self.dets))
        self.normalized = np.array([a / math.sqrt(abs(d))
                                    for a, d in zip(mats, self.dets)])

    def __len__(self):
        return len(self.mats)

    def matrix(self, symbol: int) -> np.ndarray:
        """Generator for a 1-based symbol."""
        return self.mats[symbol - 1]

    def product(self, word: Word) -> np.ndarray:
        """Exact product A_{w_1} ... A_{w_n} (use scaled_product for depth)."""
        b, logs = self.scaled_product(word)
        return math.exp(logs) * b

    def scaled_product(self, word: Word) -> tuple[np.ndarray, float]:
        """Det-normalized product and its log-scale."""
        b = np.eye(2)
        logs = 0.0
        for s in word:
            b = b @ self.normalized[s - 1]
            logs += self.half_logdets[s - 1]
        return b, logs

    def log_norm(self, word: Word) -> float:
        b, logs = self.scaled_product(word)
        return logs + math.log(planar.op_norm(b))

    def subtuple(self, symbols) -> "MatrixTuple":
        """New tuple from the given 1-based symbols, in order."""
        return MatrixTuple([self.mats[s - 1] for s in symbols])

    def conjugate(self, g) -> "MatrixTuple":
        g = as_array(g)
        ginv = np.linalg.inv(g)
        return MatrixTuple([g @ a @ ginv for a in self.mats])

    def scale_entry(self, symbol: int, c: float) -> "MatrixTuple":
        mats = [c * a if i == symbol - 1 else a for i, a in enumerate(self.mats)]
        return MatrixTuple(mats)


def _check_cap(n_gens, depth, cap):
    if n_gens**depth > cap:
        feasible = int(math.floor(math.log(cap) / math.log(n_gens))) if n_gens > 1 else depth
        raise CapExceeded(
            f"{n_gens}^{depth} words exceed the cap {cap:g}",
            max_feasible_depth=feasible,
        )


def iter_levels(t: MatrixTuple, depth: int, cap=WORD_CAP):
    """Yield (n, prods, logs) per word length n = 1..depth.

    prods has shape (N^n, 2, 2) holding det-normalized products in
    lexicographic word order; logs holds the matching log-scales.
    """
    n_gens = len(t)
    _check_cap(n_gens, depth, cap)
    prods = t.normalized.copy()
    logs = t.half_logdets.copy()
    yield 1, prods, logs
    for n in range(2, depth + 1):
        prods = np.einsum("kab,ibc->kiac", prods, t.normalized).reshape(-1, 2, 2)
        logs = (logs[:, None] + t.half_logdets[None, :]).reshape(-1)
        yield n, prods, logs


def level_words(n_gens: int, n: int):
    """Words of length n in the same lexicographic order as iter_levels."""
    return itertools.product(range(1, n_gens + 1), repeat=n)


def enumerate_products(t: MatrixTuple, depth: int, normalize=False, cap=WORD_CAP):
    """Stream (word, matrix) for every word of length 1..depth.

    With normalize=True matrices are det-normalized, which keeps deep
    products representable; otherwise the true product is reconstructed.
    """
    for n, prods, logs in iter_levels(t, depth, cap):
        words = level_words(len(t), n)
        if normalize:
            for w, i in zip(words, range(prods.shape[0])):
                yield w, prods[i]
        else:
            scales = np.exp(logs)
            for w, i in zip(words, range(prods.shape[0])):
                yield w, scales[i] * prods[i]


def log_norms_of_level(prods, logs) -> np.ndarray:
    return logs + np.log(op_norm_many(prods))


@dataclass(frozen=True)
class KappaEstimate:
    """Almost-multiplicativity constant estimate at a given depth.

    kappa = min |A_u A_v| / (|A_u| |A_v|) over nonempty words u, v of
    length <= depth. Nonincreasing in depth; the pair realizing the minimum
    is kept as a witness.
    """

    depth: int
    kappa: float
    witness_u: Word
    witness_v: Word


def kappa_table(t: MatrixTuple, depth: int, cap=WORD_CAP, block=512) -> list[KappaEstimate]:
    """KappaEstimate for every depth 1..depth, computed incrementally."""
    n_gens = len(t)
    _check_cap(n_gens, 2 * depth, cap)
    mats, norms, words, lengths = [], [], [], []
    for n, prods, logs in iter_levels(t, depth, cap):
        mats.append(prods)
        norms.append(op_norm_many(prods))
        words.extend(level_words(n_gens, n))
        lengths.append(prods.shape[0])
    mats = np.concatenate(mats, axis=0)
    norms = np.concatenate(norms)

    def pair_min(rows, cols):
        """Min ratio over the index ranges rows x cols, with argmin."""
        best, arg = np.inf, None
        for lo in range(rows.start, rows.stop, block):
            hi = min(lo + block, rows.stop)
            prod = np.einsum("iab,jbc->ijac", mats[lo:hi], mats[cols])
            f2 = np.einsum("ijab,ijab->ij", prod, prod)
            det = prod[..., 0, 0] * prod[..., 1, 1] - prod[..., 0, 1] * prod[..., 1, 0]
            rad = np.clip(f2 * f2 - 4.0 * det * det, 0.0, None)
            sv1 = np.sqrt(0.5 * (f2 + np.sqrt(rad)))
            ratio = sv1 / (norms[lo:hi, None] * norms[None, cols])
            ij = np.unravel_index(np.argmin(ratio), ratio.shape)
            if ratio[ij] < best:
                best = float(ratio[ij])
                arg = (lo + ij[0], cols.start + ij[1])
        return best, arg

    out = []
    best, arg = np.inf, None
    offset = 0
    for n, count in enumerate(lengths, start=1):
        new = range(offset, offset + count)
        everything = range(0, offset + count)
        cand = [pair_min(new, everything)]
        if offset > 0:
            cand.append(pair_min(range(0, offset), new))
        for val, ij in cand:
            if val < best:
                best, arg = val, ij
        offset += count
        out.append(KappaEstimate(n, min(best, 1.0), words[arg[0]], words[arg[1]]))
    return out


def kappa_estimate(t: MatrixTuple, depth: int, cap=WORD_CAP) -> KappaEstimate:
    return kappa_table(t, depth, cap)[-1]


@dataclass(frozen=True)
class IrreducibilityResult:
    reducible: bool
    # All common invariant directions found (angles); first one is reported.
    directions: tuple[float, ...] = ()

    @property
    def invariant_direction(self):
        return self.directions[0] if self.directions else None


def irreducibility_check(t: MatrixTuple, angle_tol=1e-9) -> IrreducibilityResult:
    """Common invariant line search.

    Any common invariant line is an eigendirection of every member, so the
    candidates come from the first non-scalar generator.
    """
    candidates = None
    for a in t.mats:
        if planar.is_scalar(a):
            continue
        candidates = planar.real_eigendirections(a)
        break
    if candidates is None:
        # Every generator is scalar: every line is invariant.
        return IrreducibilityResult(True, (0.0,))
    good = []
    for theta in candidates:
        if all(proj_distance(act_direction(a, theta), theta) <= angle_tol
               for a in t.mats):
            good.append(theta)
    if good:
        return IrreducibilityResult(True, tuple(good))
    return IrreducibilityResult(False)


@dataclass(frozen=True)
class ConformalStructure:
    """SPD P with A_i^T P A_i = |det A_i| P, and conjugator M = P^(1/2)."""

    P: np.ndarray
    M: np.ndarray
    residual: float


@dataclass(frozen=True)
class StrongConformality:
    found: bool
    structure: ConformalStructure | None = None
    witness_word: Word | None = None
    witness_index: int | None = None


def _conformality_rows(a):
    """Rows of the linear system A^T P A = |det A| P in unknowns (p, q, r)."""
    aa, ab, ac, ad = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    det = abs(aa * ad - ab * ac)
    rows = np.array([
        [aa * aa - det, 2.0 * aa * ac, ac * ac],
        [aa * ab, aa * ad + ab * ac - det, ac * ad],
        [ab * ab, 2.0 * ab * ad, ad * ad - det],
    ])
    scale = planar.op_norm(a) ** 2
    return rows / scale


def _pd_from_nullspace(basis):
    """Search the nullspace for a positive definite symmetric matrix."""
    def to_mat(v):
        return np.array([[v[0], v[1]], [v[1], v[2]]])

    def quality(pmat):
        # smallest eigenvalue relative to the norm; positive iff PD
        tr, det = pmat[0, 0] + pmat[1, 1], np.linalg.det(pmat)
        lo = 0.5 * (tr - math.hypot(pmat[0, 0] - pmat[1, 1], 2.0 * pmat[0, 1]))
        return lo / max(np.max(np.abs(pmat)), 1e-300), det

    if basis.shape[0] == 0:
        return None
    if basis.shape[0] >= 3:
        return np.eye(2)
    best, best_q = None, 0.0
    if basis.shape[0] == 1:
        cands = [to_mat(basis[0]), to_mat(-basis[0])]
    else:
        cands = []
        for k in range(720):
            phi = math.pi * (2.0 * k / 720.0)
            v = math.cos(phi) * basis[0] + math.sin(phi) * basis[1]
            cands.append(to_mat(v))
    for pmat in cands:
        q, _ = quality(pmat)
        if q > best_q:
            best, best_q = pmat, q
    if best is None or best_q <= 1e-9:
        return None
    return best


def _sqrtm_spd(p):
    """Closed-form SPD square root of a 2x2 SPD matrix."""
    s = math.sqrt(np.linalg.det(p))
    t = math.sqrt(p[0, 0] + p[1, 1] + 2.0 * s)
    return (p + s * np.eye(2)) / t


def strong_conformality_check(t: MatrixTuple, tol=1e-8) -> StrongConformality:
    """Common conjugation of the whole tuple to scaled orthogonal matrices.

    Solves the SPD feasibility problem A_i^T P A_i = |det A_i| P for a
    symmetric P, then checks positive definiteness of some nullspace
    element. M = P^(1/2) conjugates every A_i / |det A_i|^(1/2) into O(2).
    """
    rows = np.concatenate([_conformality_rows(a) for a in t.mats], axis=0)
    _, svals, vt = np.linalg.svd(rows)
    smax = svals[0] if svals.size else 0.0
    null_mask = svals <= max(tol * smax, 1e-14)
    basis = vt[len(svals) - int(np.sum(null_mask)):] if smax > 0 else vt
    if smax == 0.0:
        basis = np.eye(3)
    p = _pd_from_nullspace(basis)
    if p is not None:
        p = p / math.sqrt(np.linalg.det(p))
        residual = 0.0
        for a in t.mats:
            lhs = a.T @ p @ a
            rhs = abs(planar.det2(a)) * p
            residual = max(residual, float(np.max(np.abs(lhs - rhs)))
                           / (planar.op_norm(a) ** 2 * float(np.max(np.abs(p)))))
        if residual <= max(tol, 1e-7):
            return StrongConformality(True, ConformalStructure(p, _sqrtm_spd(p), residual))
    # Not strongly conformal: witness a non-conformal product at depth <= 3
    # if one exists, else the first infeasible constraint prefix.
    for w, m in enumerate_products(t, min(3, 30), normalize=True):
        if classify_matrix(m).kind is not MatrixKind.CONFORMAL:
            return StrongConformality(False, witness_word=w)
    for i in range(1, len(t) + 1):
        rows_i = np.concatenate([_conformality_rows(a) for a in t.mats[:i]], axis=0)
        _, sv, vt_i = np.linalg.svd(rows_i)
        mask = sv <= max(tol * sv[0], 1e-14)
        basis_i = vt_i[len(sv) - int(np.sum(mask)):]
        if _pd_from_nullspace(basis_i) is None:
            return StrongConformality(False, witness_index=i)
    return StrongConformality(False, witness_index=len(t))


@dataclass
class ConformalSplit:
    """Split into conformal generators and the rest, with the product
    closure of the normalized conformal part (signed matrices)."""

    e_indices: tuple[int, ...]
    h_indices: tuple[int, ...]
    f_group: list[np.ndarray] | None
    closure_failed: bool = False
    reason: str | None = None

    @property
    def e_trivial(self) -> bool:
        """Do all conformal generators act projectively trivially?"""
        if self.f_group is None:
            return False
        eye = np.eye(2)
        return all(min(np.max(np.abs(f - eye)), np.max(np.abs(f + eye))) < F_DEDUP_TOL
                   for f in self.f_group)


def conformal_split(t: MatrixTuple, closure_cap=CLOSURE_CAP) -> ConformalSplit:
    """Indices of conformal vs non-conformal generators plus the closure
    F of the det-normalized conformal part under products.

    The closure stores signed elements: F and -F are the same projective
    map but both are kept when generated. With no conformal generators the
    closure is {I} by convention.
    """
    e_idx, h_idx = [], []
    for i, a in enumerate(t.mats, start=1):
        if classify_matrix(a).kind is MatrixKind.CONFORMAL:
            e_idx.append(i)
        else:
            h_idx.append(i)
    if not e_idx:
        return ConformalSplit(tuple(e_idx), tuple(h_idx), [np.eye(2)])
    gens = [t.normalized[i - 1] for i in e_idx]
    elems: list[np.ndarray] = []

    def seen(x):
        return any(np.max(np.abs(x - y)) < F_DEDUP_TOL for y in elems)

    queue = []
    for g in gens:
        if not seen(g):
            elems.append(g)
            queue.append(g)
    while queue:
        x = queue.pop(0)
        for g in gens:
            y = x @ g
            if not seen(y):
                if len(elems) >= closure_cap:
                    return ConformalSplit(tuple(e_idx), tuple(h_idx), None,
                                          closure_failed=True,
                                          reason=f"closure exceeded {closure_cap} elements")
                elems.append(y)
                queue.append(y)
    return ConformalSplit(tuple(e_idx), tuple(h_idx), elems)


@dataclass(frozen=True)
class EigenMultiplicativity:
    holds: bool
    not_applicable: bool = False
    witness: tuple[Word, Word] | None = None
    shared_direction: tuple[str, float] | None = None
    offending_word: Word | None = None


def eigen_multiplicativity_check(t: MatrixTuple, depth: int, rel_tol=1e-8,
                                 cap=WORD_CAP) -> EigenMultiplicativity:
    """Test |lambda_u(A_u A_v)| = |lambda_u(A_u)| |lambda_u(A_v)| on all
    pairs of words of length <= depth.

    Multiplicativity of the top eigenvalue modulus holds exactly when the
    tuple shares an unstable or stable eigendirection; a failing pair is a
    witness against that.
    """
    _check_cap(len(t), 2 * depth, cap)
    loglam: dict[Word, float] = {}
    for n, prods, logs in iter_levels(t, 2 * depth, cap):
        kinds_needed = n <= depth
        for w, i in zip(level_words(len(t), n), range(prods.shape[0])):
            sd = planar.eigen_data(prods[i])
            if kinds_needed and not sd.proximal:
                return EigenMultiplicativity(False, not_applicable=True,
                                             offending_word=w)
            if sd.lambda_u <= 0.0:
                return EigenMultiplicativity(False, not_applicable=True,
                                             offending_word=w)
            loglam[w] = logs[i] + math.log(sd.lambda_u)
    words = [w for w in loglam if len(w) <= depth]
    for u in words:
        for v in words:
            lhs = loglam[u + v]
            rhs = loglam[u] + loglam[v]
            if abs(lhs - rhs) > rel_tol * (1.0 + abs(rhs)):
                return EigenMultiplicativity(False, witness=(u, v))
    # Multiplicativity holds: identify the shared eigendirection.
    shared = None
    for which in ("u", "s"):
        dirs = []
        ok = True
        for a in t.mats:
            sd = planar.eigen_data(a)
            ang = sd.u_dir if which == "u" else sd.s_dir
            if ang is None:
                ok = False
                break
            dirs.append(ang)
        if ok and all(proj_distance(d, dirs[0]) <= 1e-7 for d in dirs):
            shared = (which, dirs[0])
            break
    return EigenMultiplicativity(True, shared_direction=shared)
