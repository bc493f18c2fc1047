"""Decision tree placing a tuple's equilibrium states in the nested classes.

The labels name the finest certified region: exact product measures
(Bernoulli variants), Gibbs states of Holder potentials, quasi-Bernoulli
states, plain Gibbs-type states, and the complement of the Gibbs-type
region. Every verdict carries the certificates or witnesses it rests on,
and budget-limited stages propagate as a flagged result.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import planar
from .planar import MatrixKind
from .projective import Multicone, NotProper, proj_distance
from .domination import (DominationBudget, DominationResult, DirectionCloud,
                         HyperbolicPartCertificate, HyperbolicPartFailure,
                         MulticoneCertificate, Verdict, domination_decide,
                         find_unstable_multicone, hyperbolic_part_certificate)
from .semigroup import (ConformalSplit, IrreducibilityResult, MatrixTuple,
                        StrongConformality, conformal_split,
                        irreducibility_check, iter_levels,
                        strong_conformality_check)
from .thermo import TriangularEquilibrium, bernoulli_equilibrium_triangular

EPS_GRID = (0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 1.0, 1.3)
PINCH_TOL = 1e-6


class EquilibriumClass(enum.Enum):
    BERNOULLI_REDUCIBLE_NO_CONE = "BernoulliReducibleNoCone"
    BERNOULLI_OTHER = "BernoulliOther"
    HOLDER_GIBBS = "HolderGibbs"
    QUASI_BERNOULLI = "QuasiBernoulli"
    GIBBS_TYPE_ONLY = "GibbsTypeOnly"
    NOT_GIBBS_TYPE = "NotGibbsType"


@dataclass(frozen=True)
class ClassificationEvidence:
    irreducibility: IrreducibilityResult
    conformality: StrongConformality
    domination: DominationResult | None = None
    split: ConformalSplit | None = None
    hyperbolic: object | None = None  # certificate or failure
    unstable_certificate: MulticoneCertificate | None = None
    unstable_reasons: tuple[str, ...] = ()
    triangular: TriangularEquilibrium | None = None
    bernoulli_probs: tuple[float, ...] | None = None
    invariant_lines: tuple[float, ...] = ()
    grid_eps: tuple[float, ...] = ()
    obstruction: str | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Classification:
    label: EquilibriumClass
    flagged: bool
    failed_stage: str | None
    evidence: ClassificationEvidence

    @property
    def name(self) -> str:
        return self.label.value


def _parabolic_product(t: MatrixTuple, depth: int, cap):
    """First parabolic product up to the depth, with its word."""
    from .domination import _word_at
    for n, prods, _logs in iter_levels(t, depth, cap):
        tr = planar.trace_many(prods)
        det = planar.det_many(prods)
        disc = tr * tr - 4.0 * det
        tol = 1e-9 * (tr * tr + 4.0 * np.abs(det))
        for i in np.nonzero(np.abs(disc) <= tol)[0]:
            if planar.classify_matrix(prods[i]).kind is MatrixKind.PARABOLIC:
                return _word_at(len(t), n, int(i))
    return None


def _line_neighborhood_candidates(lines, eps_grid):
    cands = []
    for theta in lines:
        for eps in eps_grid:
            try:
                inner = Multicone.neighborhood([theta], eps)
            except NotProper:
                continue
            cands.append(inner)
            try:
                cands.append(inner.complement())
            except NotProper:
                pass
    return cands


def equilibrium_classify(t: MatrixTuple, s: float = 1.0,
                         budget: DominationBudget | None = None,
                         measure_depth: int = 8) -> Classification:
    """Classify the equilibrium state(s) of the norm potential at exponent s.

    Strongly conformal tuples have Bernoulli states; reducible tuples have
    triangular Bernoulli states whose Gibbs-type status is decided by an
    invariant unstable multicone around the invariant line (searched over a
    fixed fattening grid); irreducible tuples are Gibbs-type with upgrades
    to quasi-Bernoulli (conformal split certificate) or Gibbs-for-Holder
    (domination certificate).
    """
    budget = budget or DominationBudget()
    conf = strong_conformality_check(t)
    irr = irreducibility_check(t)

    if conf.found:
        probs = np.array([abs(planar.det2(m)) ** (s / 2.0) for m in t.mats])
        probs /= probs.sum()
        ev = ClassificationEvidence(
            irr, conf, bernoulli_probs=tuple(float(p) for p in probs),
            notes=("equal-norm generators after conjugation: the Bernoulli "
                   "state is also a Gibbs state of a Holder potential",))
        return Classification(EquilibriumClass.BERNOULLI_OTHER, False, None, ev)

    if irr.reducible:
        tri = bernoulli_equilibrium_triangular(
            t, s, depth=measure_depth,
            invariant_direction=irr.invariant_direction)
        lines = irr.directions
        cands = _line_neighborhood_candidates(lines, EPS_GRID)
        cert, cloud, reasons = find_unstable_multicone(t, budget, cands)
        if cert is not None:
            ev = ClassificationEvidence(
                irr, conf, triangular=tri, unstable_certificate=cert,
                unstable_reasons=reasons, invariant_lines=lines,
                grid_eps=EPS_GRID)
            return Classification(EquilibriumClass.BERNOULLI_OTHER, False, None, ev)
        obstruction = _reducible_obstruction(t, lines, cloud, budget)
        if obstruction is not None:
            ev = ClassificationEvidence(
                irr, conf, triangular=tri, unstable_reasons=reasons,
                invariant_lines=lines, grid_eps=EPS_GRID,
                obstruction=obstruction)
            return Classification(EquilibriumClass.BERNOULLI_REDUCIBLE_NO_CONE,
                                  False, None, ev)
        ev = ClassificationEvidence(
            irr, conf, triangular=tri, unstable_reasons=reasons,
            invariant_lines=lines, grid_eps=EPS_GRID,
            notes=("no cone on the grid and no certified obstruction; "
                   "the Gibbs-type status is open at this budget",))
        return Classification(EquilibriumClass.NOT_GIBBS_TYPE, True,
                              "unstable-cone-grid", ev)

    # irreducible: Gibbs-type is automatic, try the two upgrades
    dom = domination_decide(t, budget)
    cert, _cloud, reasons = find_unstable_multicone(
        t, budget,
        [dom.certificate.cone] if dom.certificate is not None else [])
    if dom.dominated:
        ev = ClassificationEvidence(irr, conf, domination=dom,
                                    unstable_certificate=cert,
                                    unstable_reasons=reasons)
        return Classification(EquilibriumClass.HOLDER_GIBBS, False, None, ev)
    split = conformal_split(t)
    hyp = None
    if split.h_indices and split.e_indices and split.f_group is not None:
        hyp = hyperbolic_part_certificate(t, split, budget)
        if isinstance(hyp, HyperbolicPartCertificate):
            ev = ClassificationEvidence(irr, conf, domination=dom, split=split,
                                        hyperbolic=hyp,
                                        unstable_certificate=cert,
                                        unstable_reasons=reasons)
            return Classification(EquilibriumClass.QUASI_BERNOULLI, False, None, ev)
    flagged = dom.verdict is Verdict.INCONCLUSIVE
    failed = "domination" if flagged else None
    if isinstance(hyp, HyperbolicPartFailure) and "inconclusive" in hyp.detail:
        flagged, failed = True, f"hyperbolic-part/{hyp.stage}"
    notes = ()
    if not split.e_indices:
        notes = ("no conformal generators: the quasi-Bernoulli upgrade "
                 "route does not apply",)
    elif not split.h_indices:
        notes = ("all generators conformal but with no common conjugation; "
                 "no upgrade route applies",)
    ev = ClassificationEvidence(irr, conf, domination=dom, split=split,
                                hyperbolic=hyp, unstable_certificate=cert,
                                unstable_reasons=reasons, notes=notes)
    return Classification(EquilibriumClass.GIBBS_TYPE_ONLY, flagged, failed, ev)


def _reducible_obstruction(t: MatrixTuple, lines, cloud: DirectionCloud | None,
                           budget: DominationBudget) -> str | None:
    """A certificate that no invariant unstable multicone can exist.

    A parabolic product rules every candidate out (its norm growth is
    polynomially off the eigenvalue growth along the invariant line), and
    so does an invariant line pinched by both direction clouds: every
    neighborhood then meets the stable cloud while its complement leaks
    under the generators attracting to the line.
    """
    word = _parabolic_product(t, min(budget.scan_depth, 4), budget.cap)
    if word is not None:
        return f"parabolic product at word {word}"
    if cloud is None or not lines:
        return None
    pinched = []
    for theta in lines:
        if cloud.s_dirs.size == 0 or cloud.u_dirs.size == 0:
            return None
        ds = min(proj_distance(theta, x) for x in cloud.s_dirs)
        du = min(proj_distance(theta, x) for x in cloud.u_dirs)
        if ds < PINCH_TOL and du < PINCH_TOL:
            pinched.append(theta)
    if len(pinched) == len(lines):
        return ("every invariant line lies in both the stable and unstable "
                f"clouds (within {PINCH_TOL:g})")
    return None
