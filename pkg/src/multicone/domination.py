"""Domination of 2x2 tuples via constructed invariant multicones.

A tuple is dominated exactly when some multicone is mapped strictly inside
itself by every generator. The builder fattens the cloud of unstable
directions of finite products and saturates it with images until the union
stabilizes; the certifier then re-checks strict invariance with margins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import planar
from .planar import MatrixKind
from .projective import (Multicone, NotProper, ProjInterval, act_direction,
                         contained, proj_distance, strictly_inside)
from .semigroup import (CapExceeded, MatrixTuple, Word, WORD_CAP, iter_levels,
                        level_words)

# Numeric slack for certifying open conditions (radians).
OPEN_EPS = 1e-6


class EmptyCloud(RuntimeError):
    """No proximal products were found, so there is nothing to fatten."""


class NotStabilized(RuntimeError):
    """Saturation kept growing (or fragmented past the arc budget)."""


@dataclass(frozen=True)
class DirectionCloud:
    """Unstable and stable eigendirections of all products up to a depth."""

    depth: int
    u_dirs: np.ndarray
    s_dirs: np.ndarray
    skipped: int  # products without eigendirections (non-proximal)


def direction_clouds(t: MatrixTuple, depth: int, cap=WORD_CAP) -> DirectionCloud:
    u_all, s_all, skipped = [], [], 0
    for _n, prods, _logs in iter_levels(t, depth, cap):
        for i in range(prods.shape[0]):
            sd = planar.eigen_data(prods[i])
            if sd.proximal:
                u_all.append(sd.u_dir)
                s_all.append(sd.s_dir)
            else:
                skipped += 1
    return DirectionCloud(depth, np.array(u_all), np.array(s_all), skipped)


@dataclass(frozen=True)
class RatioSequence:
    """m_n = max over |w| = n of sv2/sv1(A_w), with maximizing words."""

    depths: tuple[int, ...]
    ratios: tuple[float, ...]
    words: tuple[Word, ...]

    @property
    def log_slopes(self) -> tuple[float, ...]:
        return tuple(math.log(r) / n for n, r in zip(self.depths, self.ratios))


def ratio_sequence(t: MatrixTuple, depth: int, cap=WORD_CAP) -> RatioSequence:
    depths, ratios, words = [], [], []
    for n, prods, _logs in iter_levels(t, depth, cap):
        sv1 = planar.op_norm_many(prods)
        dets = np.abs(planar.det_many(prods))
        r = dets / (sv1 * sv1)  # sv2/sv1 of a det-normalized product
        i = int(np.argmax(r))
        depths.append(n)
        ratios.append(float(r[i]))
        words.append(_word_at(len(t), n, i))
    return RatioSequence(tuple(depths), tuple(ratios), tuple(words))


def _word_at(n_gens: int, length: int, index: int) -> Word:
    digits = []
    for _ in range(length):
        digits.append(index % n_gens + 1)
        index //= n_gens
    return tuple(reversed(digits))


def build_unstable_multicone(t: MatrixTuple, cloud: DirectionCloud,
                             n_fatten: int, saturate_depth: int,
                             max_arcs=64, merge_eps=1e-12) -> Multicone:
    """Fatten the unstable cloud by 1/n_fatten and saturate with images.

    Returns the stabilized union, raising EmptyCloud / NotProper /
    NotStabilized when the construction cannot finish.
    """
    if cloud.u_dirs.size == 0:
        raise EmptyCloud("no unstable directions collected")
    cone = Multicone.neighborhood(cloud.u_dirs, 1.0 / n_fatten, merge_eps)
    for _round in range(saturate_depth):
        arcs = list(cone.arcs)
        for a in t.mats:
            arcs.extend(cone.apply(a, merge_eps).arcs)
        bigger = Multicone(arcs, merge_eps)  # may raise NotProper
        if bigger.num_arcs > max_arcs:
            raise NotStabilized(f"saturation fragmented into {bigger.num_arcs} arcs")
        if bigger.sym_diff_length(cone) <= max(merge_eps * max(bigger.num_arcs, 1), 1e-12):
            return bigger
        cone = bigger
    # One extra application of every generator must leave the union fixed.
    arcs = list(cone.arcs)
    for a in t.mats:
        arcs.extend(cone.apply(a, merge_eps).arcs)
    final = Multicone(arcs, merge_eps)
    if final.sym_diff_length(cone) <= max(merge_eps * max(final.num_arcs, 1), 1e-12):
        return final
    raise NotStabilized(f"union still moving after {saturate_depth} rounds")


class Verdict(enum.Enum):
    DOMINATED = "dominated"
    NOT_DOMINATED = "not_dominated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MulticoneCertificate:
    """A multicone together with re-checkable invariance margins."""

    cone: Multicone
    mode: str  # "strongly_invariant" or "invariant_unstable"
    margin: float
    per_generator: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "arcs": [[a.start, a.length] for a in self.cone.arcs],
            "margin": self.margin,
            "per_generator": [[s, m] for s, m in self.per_generator],
        }

    @classmethod
    def from_dict(cls, d) -> "MulticoneCertificate":
        cone = Multicone([ProjInterval(s, l) for s, l in d["arcs"]])
        return cls(cone, d["mode"], float(d["margin"]),
                   tuple((int(s), float(m)) for s, m in d["per_generator"]))


def certify_strong_invariance(t: MatrixTuple, cone: Multicone):
    """Margins of A_i(cone) strictly inside cone, or a failing generator."""
    per_gen = []
    for sym, a in enumerate(t.mats, start=1):
        ans = strictly_inside(cone.apply(a), cone)
        if not ans.strict:
            return None, sym, ans.witness
        per_gen.append((sym, ans.margin))
    margin = min(m for _s, m in per_gen)
    return MulticoneCertificate(cone, "strongly_invariant", margin, tuple(per_gen)), None, None


@dataclass(frozen=True)
class DominationBudget:
    scan_depth: int = 6
    ratio_depth: int = 10
    cloud_depth: int = 5
    fatten_grid: tuple[int, ...] = (4, 8, 16, 32, 64, 128, 256, 512, 1024)
    saturate_grid: tuple[int, ...] = (4, 6, 8, 10, 12, 14, 16, 18, 20)
    collar_grid: tuple[float, ...] = (1e-9, 1e-6, 1e-3)
    cap: int = WORD_CAP


@dataclass(frozen=True)
class DominationResult:
    verdict: Verdict
    certificate: MulticoneCertificate | None = None
    witness_kind: str | None = None
    witness_word: Word | None = None
    ratios: RatioSequence | None = None
    failures: tuple[str, ...] = ()

    @property
    def dominated(self):
        return self.verdict is Verdict.DOMINATED


def _scan_for_nonproximal_products(t: MatrixTuple, depth: int, cap):
    """First conformal or parabolic product up to the given depth."""
    for n, prods, _logs in iter_levels(t, depth, cap):
        tr = planar.trace_many(prods)
        det = planar.det_many(prods)
        disc = tr * tr - 4.0 * det
        tol = 1e-9 * (tr * tr + 4.0 * np.abs(det))
        suspicious = np.nonzero(~((disc > tol) & (tr * tr > tol)))[0]
        for i in suspicious:
            kind = planar.classify_matrix(prods[i]).kind
            if kind is not MatrixKind.PROXIMAL:
                return kind, _word_at(len(t), n, int(i))
    return None, None


def domination_decide(t: MatrixTuple, budget: DominationBudget | None = None) -> DominationResult:
    """Decide domination: witness scan, ratio test, then cone construction."""
    budget = budget or DominationBudget()
    kind, word = _scan_for_nonproximal_products(t, budget.scan_depth, budget.cap)
    ratios = ratio_sequence(t, budget.ratio_depth, budget.cap)
    if kind is not None:
        return DominationResult(Verdict.NOT_DOMINATED,
                                witness_kind=f"{kind.value}_product",
                                witness_word=word, ratios=ratios)
    for n, r, w in zip(ratios.depths, ratios.ratios, ratios.words):
        if r >= 1.0 - 1e-9:
            return DominationResult(Verdict.NOT_DOMINATED,
                                    witness_kind="ratio_ge_one",
                                    witness_word=w, ratios=ratios)
    cloud = direction_clouds(t, budget.cloud_depth, budget.cap)
    # Two candidate families per budget level. The unstable side saturates
    # the u-cloud forward; the stable side saturates the s-cloud under the
    # inverses and takes the complement. A saturated union maps onto itself,
    # so images can touch its boundary; a small collar restores strictness
    # where the touching map contracts, and whichever side has its tangency
    # on a contracting stretch certifies. The certificate check is the judge.
    inv_t = MatrixTuple([np.linalg.inv(a) for a in t.mats])
    mirror = DirectionCloud(cloud.depth, cloud.s_dirs, cloud.u_dirs, cloud.skipped)
    failures = []
    for n_fatten, sat in zip(budget.fatten_grid, budget.saturate_grid):
        for side, tup, cld in (("unstable", t, cloud), ("stable", inv_t, mirror)):
            try:
                cone = build_unstable_multicone(tup, cld, n_fatten, sat)
            except (EmptyCloud, NotProper, NotStabilized) as exc:
                failures.append(f"fatten=1/{n_fatten} {side}: {type(exc).__name__}: {exc}")
                continue
            bad_sym = None
            for collar in (0.0,) + budget.collar_grid:
                try:
                    fat = cone.fatten(collar) if collar > 0.0 else cone
                except NotProper:
                    break
                candidate = fat.complement() if side == "stable" else fat
                cert, bad_sym, _witness = certify_strong_invariance(t, candidate)
                if cert is not None:
                    return DominationResult(Verdict.DOMINATED, certificate=cert,
                                            ratios=ratios)
            failures.append(f"fatten=1/{n_fatten} {side}: "
                            f"generator {bad_sym} not strictly inside")
    return DominationResult(Verdict.INCONCLUSIVE, ratios=ratios,
                            failures=tuple(failures))


@dataclass(frozen=True)
class UnstableCheck:
    ok: bool
    reason: str | None = None
    margin: float | None = None


def invariant_unstable_multicone_check(t: MatrixTuple, cone: Multicone,
                                       cloud: DirectionCloud,
                                       eps=OPEN_EPS) -> UnstableCheck:
    """Verify the invariant-unstable-multicone conditions for a candidate.

    Needs invariance A_i(cone) within cone, no stable directions inside,
    unstable directions away from the boundary, and every component meeting
    the unstable cloud. Open conditions carry the numeric slack eps.
    """
    for sym, a in enumerate(t.mats, start=1):
        if not contained(cone.apply(a), cone, tol=1e-9):
            return UnstableCheck(False, f"generator {sym} image escapes the cone")
    if cloud.u_dirs.size == 0:
        return UnstableCheck(False, "empty unstable cloud")
    margin = math.pi
    for s_dir in cloud.s_dirs:
        d = cone.distance_to(s_dir)
        if d < eps:
            return UnstableCheck(False, f"stable direction {s_dir:.6f} inside or near the cone")
        margin = min(margin, d)
    boundary = cone.boundary_points()
    for u_dir in cloud.u_dirs:
        d = min(proj_distance(u_dir, b) for b in boundary)
        if cone.contains_direction(u_dir) and d < eps:
            return UnstableCheck(False, f"unstable direction {u_dir:.6f} sits on the boundary")
    for arc in cone.arcs:
        if not any(arc.contains(u) for u in cloud.u_dirs):
            return UnstableCheck(False, f"component at {arc.start:.6f} misses the unstable cloud")
    return UnstableCheck(True, margin=margin)


def find_unstable_multicone(t: MatrixTuple, budget: DominationBudget | None = None,
                            candidates=()):
    """Search for an invariant unstable multicone.

    Tries the supplied candidate cones first, then cones built from the
    direction clouds over the fattening schedule. Returns (certificate,
    cloud, reasons): a certificate in invariant_unstable mode when some
    candidate passes the check, else None with the failure reasons.
    """
    budget = budget or DominationBudget()
    reasons = []
    try:
        cloud = direction_clouds(t, budget.cloud_depth, budget.cap)
    except EmptyCloud as exc:
        return None, None, (f"cloud: {exc}",)
    cones = list(candidates)
    for n_fatten, sat in zip(budget.fatten_grid, budget.saturate_grid):
        try:
            cones.append(build_unstable_multicone(t, cloud, n_fatten, sat))
        except (EmptyCloud, NotProper, NotStabilized) as exc:
            reasons.append(f"build fatten=1/{n_fatten}: {exc}")
    for cone in cones:
        check = invariant_unstable_multicone_check(t, cone, cloud)
        if not check.ok:
            reasons.append(f"candidate {cone!r}: {check.reason}")
            continue
        per_gen = []
        for sym, a in enumerate(t.mats, start=1):
            ans = strictly_inside(cone.apply(a), cone)
            per_gen.append((sym, ans.margin if ans.strict else 0.0))
        cert = MulticoneCertificate(cone, "invariant_unstable",
                                    check.margin, tuple(per_gen))
        return cert, cloud, tuple(reasons)
    return None, cloud, tuple(reasons)


@dataclass(frozen=True)
class HyperbolicPartCertificate:
    """Certificate that the non-conformal part contracts a multicone that
    the conformal part permutes setwise."""

    cone: Multicone
    base_cone: Multicone
    margin: float
    h_margins: tuple[tuple[int, float], ...]
    e_mismatch: float

    def to_dict(self) -> dict:
        return {
            "arcs": [[a.start, a.length] for a in self.cone.arcs],
            "base_arcs": [[a.start, a.length] for a in self.base_cone.arcs],
            "margin": self.margin,
            "h_margins": [[s, m] for s, m in self.h_margins],
            "e_mismatch": self.e_mismatch,
        }


@dataclass(frozen=True)
class HyperbolicPartFailure:
    stage: str
    detail: str


def _dedup_projective(mats, tol=1e-10):
    out = []
    for m in mats:
        key = m.copy()
        flat = key.reshape(-1)
        for x in flat:
            if x != 0.0:
                if x < 0.0:
                    key = -key
                break
        if not any(np.max(np.abs(key - y)) < tol for y in out):
            out.append(key)
    return out


def hyperbolic_part_certificate(t: MatrixTuple, split, budget=None):
    """Build the symmetrized multicone of Example-1(2) type splits.

    B collects products (non-conformal generator) x (closure element); a
    strongly invariant multicone for B is symmetrized by the closure orbit,
    after which non-conformal generators map it strictly inside while
    conformal generators fix it setwise.
    """
    budget = budget or DominationBudget()
    if not split.h_indices:
        raise ValueError("the split has no non-conformal part")
    if split.f_group is None:
        return HyperbolicPartFailure("closure", split.reason or "closure unavailable")
    b_mats = _dedup_projective([t.mats[h - 1] @ f
                                for h in split.h_indices for f in split.f_group])
    try:
        bt = MatrixTuple(b_mats)
    except Exception as exc:  # singular product would be a precondition bug
        return HyperbolicPartFailure("closure", f"bad product set: {exc}")
    result = domination_decide(bt, budget)
    if not result.dominated:
        return HyperbolicPartFailure(
            "cone-build",
            f"no strongly invariant multicone for the product set ({result.verdict.value})")
    cone0 = result.certificate.cone
    arcs = []
    for f in split.f_group:
        arcs.extend(cone0.apply(f).arcs)
    try:
        cone = Multicone(arcs)
    except NotProper as exc:
        return HyperbolicPartFailure("symmetrize", str(exc))
    h_margins = []
    for sym in split.h_indices:
        ans = strictly_inside(cone.apply(t.mats[sym - 1]), cone)
        if not ans.strict:
            return HyperbolicPartFailure("strict-invariance",
                                         f"generator {sym} not strictly inside")
        h_margins.append((sym, ans.margin))
    e_mismatch = 0.0
    for sym in split.e_indices:
        img = cone.apply(t.mats[sym - 1])
        e_mismatch = max(e_mismatch, img.sym_diff_length(cone))
    if e_mismatch > 1e-8:
        return HyperbolicPartFailure("equality",
                                     f"conformal orbit moves the cone by {e_mismatch:.3e}")
    margin = min(m for _s, m in h_margins) if h_margins else 0.0
    return HyperbolicPartCertificate(cone, cone0, margin, tuple(h_margins), e_mismatch)


def contraction_depth_check(bt: MatrixTuple, cone: Multicone, cap=WORD_CAP):
    """Optional assertion: products of length (#boundary)^2 + 1 of a
    strongly invariant family map the cone strictly inside.

    Returns (ok, min margin over products of exactly that length).
    """
    depth = (2 * cone.num_arcs) ** 2 + 1
    if len(bt) ** depth > min(cap, 100_000):
        depth = max(1, int(math.log(min(cap, 100_000)) / math.log(max(len(bt), 2))))
    margin = math.pi
    for _n, prods, _logs in iter_levels(bt, depth, cap):
        pass
    for i in range(prods.shape[0]):
        ans = strictly_inside(cone.apply(prods[i]), cone)
        if not ans.strict:
            return False, 0.0
        margin = min(margin, ans.margin)
    return True, margin
