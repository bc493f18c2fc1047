"""Sub-additive pressure, cylinder measures and potential diagnostics.

The pressure of the norm potential is bracketed from finite levels:
subadditivity gives the upper bound a_n / n, and an almost-multiplicativity
constant kappa turns the same level into a certified lower bound
(a_n + s log kappa) / n. Without kappa the lower bound falls back to the
spectral-radius sum and is flagged as heuristic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import planar
from .projective import Multicone, act_direction, norm_direction
from .semigroup import (CapExceeded, MatrixTuple, Word, WORD_CAP, iter_levels,
                        level_words, log_norms_of_level, word_to_str, parse_word)


class PreconditionFailed(ValueError):
    """An operation's mathematical precondition does not hold."""


def _logsumexp(x):
    x = np.asarray(x, dtype=float)
    m = float(np.max(x))
    return m + math.log(float(np.sum(np.exp(x - m))))


@dataclass(frozen=True)
class PressureBounds:
    """Upper/lower pressure brackets per depth, final depth last."""

    s: float
    depth: int
    uppers: tuple[float, ...]
    lowers: tuple[float, ...]
    lower_certified: bool
    kappa: float | None = None

    @property
    def upper(self) -> float:
        return self.uppers[-1]

    @property
    def lower(self) -> float:
        return self.lowers[-1]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.upper + self.lower)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def partition_logs(t: MatrixTuple, s: float, depth: int, cap=WORD_CAP):
    """a_n = log sum over |w| = n of |A_w|^s, for n = 1..depth."""
    out = []
    for _n, prods, logs in iter_levels(t, depth, cap):
        out.append(_logsumexp(s * log_norms_of_level(prods, logs)))
    return out


def _spectral_log_sums(t: MatrixTuple, s: float, depth: int, cap=WORD_CAP):
    """log sum of spectral radii^s per level (heuristic pressure floor)."""
    out = []
    for _n, prods, logs in iter_levels(t, depth, cap):
        tr = planar.trace_many(prods)
        det = planar.det_many(prods)
        disc = tr * tr - 4.0 * det
        rho = np.where(disc >= 0.0,
                       0.5 * (np.abs(tr) + np.sqrt(np.clip(disc, 0.0, None))),
                       np.sqrt(np.abs(det)))
        rho = np.clip(rho, 1e-300, None)
        out.append(_logsumexp(s * (logs + np.log(rho))))
    return out


def pressure_bounds(t: MatrixTuple, s: float, depth: int, kappa=None,
                    cap=WORD_CAP) -> PressureBounds:
    """Bracket the pressure P(s) from levels 1..depth.

    With kappa the lower bound is certified by supermultiplicativity of
    a_n + s log kappa; otherwise the spectral-radius sum is used and the
    result is flagged heuristic.
    """
    if s <= 0.0:
        raise PreconditionFailed("the exponent s must be positive")
    a = partition_logs(t, s, depth, cap)
    uppers = tuple(a_n / n for n, a_n in enumerate(a, start=1))
    if kappa is not None:
        if not (0.0 < kappa <= 1.0):
            raise PreconditionFailed("kappa must lie in (0, 1]")
        lowers = tuple((a_n + s * math.log(kappa)) / n
                       for n, a_n in enumerate(a, start=1))
        return PressureBounds(s, depth, uppers, lowers, True, kappa)
    radii = _spectral_log_sums(t, s, depth, cap)
    lowers = tuple(v / n for n, v in enumerate(radii, start=1))
    return PressureBounds(s, depth, uppers, lowers, False)


class CylinderMeasure:
    """Masses on cylinder sets [w] for words of length <= depth.

    mass(()) = 1 and masses are consistent: summing over one-symbol
    extensions recovers the parent mass. The invariant flag records whether
    the construction is (approximately) shift invariant.
    """

    def __init__(self, n_gens: int, depth: int, masses: dict[Word, float],
                 invariant=False):
        self.n_gens = n_gens
        self.depth = depth
        self.masses = dict(masses)
        self.masses.setdefault((), 1.0)
        self.invariant = invariant

    def mass(self, w: Word) -> float:
        return self.masses.get(tuple(w), 0.0)

    def level(self, n: int):
        for w in itertools.product(range(1, self.n_gens + 1), repeat=n):
            yield w, self.masses.get(w, 0.0)

    def level_array(self, n: int) -> np.ndarray:
        return np.array([m for _w, m in self.level(n)])

    def consistency_defect(self) -> float:
        worst = 0.0
        for n in range(0, self.depth):
            for w, m in self.level(n):
                child_sum = sum(self.masses.get(w + (j,), 0.0)
                                for j in range(1, self.n_gens + 1))
                worst = max(worst, abs(child_sum - m))
        return worst

    def shift_defect(self) -> float:
        worst = 0.0
        for n in range(0, self.depth):
            for w, m in self.level(n):
                shift_sum = sum(self.masses.get((j,) + w, 0.0)
                                for j in range(1, self.n_gens + 1))
                worst = max(worst, abs(shift_sum - m))
        return worst

    def restricted(self, depth: int) -> "CylinderMeasure":
        sub = {w: m for w, m in self.masses.items() if len(w) <= depth}
        return CylinderMeasure(self.n_gens, depth, sub, self.invariant)

    def to_dict(self) -> dict:
        if self.n_gens > 9:
            raise ValueError("string serialization needs at most 9 symbols")
        return {
            "n_gens": self.n_gens,
            "depth": self.depth,
            "invariant": self.invariant,
            "masses": {word_to_str(w): m for w, m in sorted(self.masses.items())},
        }

    @classmethod
    def from_dict(cls, d) -> "CylinderMeasure":
        masses = {parse_word(k): float(v) for k, v in d["masses"].items()}
        return cls(int(d["n_gens"]), int(d["depth"]), masses, bool(d["invariant"]))

    @classmethod
    def bernoulli(cls, probs, depth: int) -> "CylinderMeasure":
        probs = np.asarray(probs, dtype=float)
        n = probs.size
        masses: dict[Word, float] = {(): 1.0}
        for length in range(1, depth + 1):
            for w in itertools.product(range(1, n + 1), repeat=length):
                masses[w] = float(np.prod(probs[[s - 1 for s in w]]))
        return cls(n, depth, masses, invariant=True)

    @classmethod
    def from_state_distribution(cls, pi, n_gens: int, depth: int,
                                invariant=True) -> "CylinderMeasure":
        """Marginalize a distribution on depth-k words down to all levels."""
        pi = np.asarray(pi, dtype=float)
        masses: dict[Word, float] = {(): float(np.sum(pi))}
        for m in range(1, depth + 1):
            level = pi.reshape(n_gens**m, -1).sum(axis=1)
            for w, val in zip(itertools.product(range(1, n_gens + 1), repeat=m), level):
                masses[w] = float(val)
        return cls(n_gens, depth, masses, invariant)


@dataclass(frozen=True)
class TriangularEquilibrium:
    """Closed-form equilibrium states of a reducible (triangular) tuple."""

    measures: tuple[CylinderMeasure, ...]
    probs: tuple[tuple[float, ...], ...]
    which: tuple[str, ...]  # "diagonal-a" / "diagonal-c" per measure
    sum_a: float
    sum_c: float
    pressure: float


def bernoulli_equilibrium_triangular(t: MatrixTuple, s: float, depth: int = 8,
                                     invariant_direction=None,
                                     rel_tol=1e-9) -> TriangularEquilibrium:
    """Equilibrium states of a tuple with a common invariant line.

    In a basis whose first vector spans the invariant line every member is
    upper triangular [[a_i, b_i], [0, c_i]]. The candidates are Bernoulli
    with weights |a_i|^s or |c_i|^s; the larger of the two weight sums wins
    and a tie returns both.
    """
    from .semigroup import irreducibility_check

    if invariant_direction is None:
        irr = irreducibility_check(t)
        if not irr.reducible:
            raise PreconditionFailed("the tuple has no common invariant line")
        invariant_direction = irr.invariant_direction
    theta = invariant_direction
    basis = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
    binv = np.linalg.inv(basis)
    a_entries, c_entries = [], []
    for mat in t.mats:
        tri = binv @ mat @ basis
        if abs(tri[1, 0]) > 1e-8 * planar.op_norm(mat):
            raise PreconditionFailed("the reported invariant line is not invariant")
        a_entries.append(abs(tri[0, 0]))
        c_entries.append(abs(tri[1, 1]))
    wa = np.array(a_entries) ** s
    wc = np.array(c_entries) ** s
    sum_a, sum_c = float(np.sum(wa)), float(np.sum(wc))
    tol = rel_tol * max(sum_a, sum_c)
    chosen = []
    if sum_a >= sum_c - tol:
        chosen.append(("diagonal-a", wa / sum_a))
    if sum_c >= sum_a - tol:
        chosen.append(("diagonal-c", wc / sum_c))
    measures = tuple(CylinderMeasure.bernoulli(p, depth) for _lbl, p in chosen)
    return TriangularEquilibrium(
        measures,
        tuple(tuple(float(x) for x in p) for _lbl, p in chosen),
        tuple(lbl for lbl, _p in chosen),
        sum_a, sum_c, math.log(max(sum_a, sum_c)),
    )


def entropy_and_lambda(mu: CylinderMeasure, t: MatrixTuple, s: float,
                       cap=WORD_CAP) -> tuple[float, float]:
    """Entropy and Lyapunov-potential estimates at the measure's depth.

    h = -(1/k) sum mass log mass and Lambda = (1/k) sum mass * s log|A_w|,
    both over depth-k cylinders. For an equilibrium state h + Lambda
    approaches the pressure.
    """
    k = mu.depth
    masses = mu.level_array(k)
    lognorm = None
    for _n, prods, logs in iter_levels(t, k, cap):
        lognorm = log_norms_of_level(prods, logs)
    pos = masses > 0.0
    h = -float(np.sum(masses[pos] * np.log(masses[pos]))) / k
    lam = float(np.sum(masses[pos] * s * lognorm[pos])) / k
    return h, lam


@dataclass(frozen=True)
class RatioBand:
    """Per-depth min/max of a cylinder-ratio statistic."""

    depths: tuple[int, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    witness_min: Word | None = None
    witness_max: Word | None = None

    @property
    def global_min(self) -> float:
        return min(self.mins)

    @property
    def global_max(self) -> float:
        return max(self.maxs)

    def spread(self, depth_index=-1) -> float:
        return self.maxs[depth_index] / self.mins[depth_index]

    def per_step_rates(self) -> tuple[float, ...]:
        """Geometric growth rate (max/min)^(1/n) of the band per depth."""
        return tuple((mx / mn) ** (1.0 / n)
                     for n, mn, mx in zip(self.depths, self.mins, self.maxs))


def gibbs_type_ratio_test(mu: CylinderMeasure, t: MatrixTuple, s: float,
                          pressure: float, cap=WORD_CAP) -> RatioBand:
    """Band of mass(w) / (|A_w|^s e^{-|w| P}) over words up to mu.depth.

    A stable band (bounded above and below away from zero, with max/min not
    growing along depth) is the numerical signature of a Gibbs-type state.
    """
    depths, mins, maxs = [], [], []
    wmin = wmax = None
    vmin, vmax = math.inf, -math.inf
    for n, prods, logs in iter_levels(t, mu.depth, cap):
        lognorm = log_norms_of_level(prods, logs)
        masses = mu.level_array(n)
        pos = masses > 0.0
        logratio = np.where(pos, np.log(np.clip(masses, 1e-300, None))
                            + n * pressure - s * lognorm, np.nan)
        level_vals = logratio[pos]
        if level_vals.size == 0:
            continue
        lo, hi = float(np.min(level_vals)), float(np.max(level_vals))
        depths.append(n)
        mins.append(math.exp(lo))
        maxs.append(math.exp(hi))
        if lo < vmin:
            vmin = lo
            wmin = _nth_word(len(t), n, int(np.nanargmin(logratio)))
        if hi > vmax:
            vmax = hi
            wmax = _nth_word(len(t), n, int(np.nanargmax(logratio)))
    return RatioBand(tuple(depths), tuple(mins), tuple(maxs), wmin, wmax)


def _nth_word(n_gens: int, length: int, index: int) -> Word:
    digits = []
    for _ in range(length):
        digits.append(index % n_gens + 1)
        index //= n_gens
    return tuple(reversed(digits))


def quasi_bernoulli_ratio_test(mu: CylinderMeasure) -> RatioBand:
    """Band of mass(uv) / (mass(u) mass(v)) over nonempty pairs.

    Bounds away from zero and infinity are the quasi-Bernoulli property;
    the band is reported per total length |u| + |v|.
    """
    per_depth: dict[int, list[float]] = {}
    wmin = wmax = None
    vmin, vmax = math.inf, -math.inf
    words_by_len: dict[int, list[Word]] = {}
    for (w, m) in mu.masses.items():
        if 0 < len(w) <= mu.depth:
            words_by_len.setdefault(len(w), []).append(w)
    for lu in sorted(words_by_len):
        for lv in sorted(words_by_len):
            if lu + lv > mu.depth:
                continue
            for u in words_by_len[lu]:
                mu_u = mu.masses[u]
                if mu_u <= 0.0:
                    continue
                for v in words_by_len[lv]:
                    mv = mu.masses[v]
                    if mv <= 0.0:
                        continue
                    joint = mu.masses.get(u + v, 0.0)
                    if joint <= 0.0:
                        continue
                    r = joint / (mu_u * mv)
                    per_depth.setdefault(lu + lv, []).append(r)
                    if r < vmin:
                        vmin, wmin = r, u + v
                    if r > vmax:
                        vmax, wmax = r, u + v
    depths = tuple(sorted(per_depth))
    mins = tuple(min(per_depth[d]) for d in depths)
    maxs = tuple(max(per_depth[d]) for d in depths)
    return RatioBand(depths, mins, maxs, wmin, wmax)


def equilibrium_proxy_measure(t: MatrixTuple, s: float, depth: int,
                              total_depth: int, cap=WORD_CAP) -> CylinderMeasure:
    """Finite-horizon equilibrium proxy from norm partition sums.

    mass(w) is the weight of all length-total_depth extensions of w,
    normalized; consistency holds exactly by construction. Shift invariance
    is only approximate, so the measure is not flagged invariant.
    """
    if depth > total_depth:
        raise PreconditionFailed("depth exceeds the partition horizon")
    weights = None
    for n, prods, logs in iter_levels(t, total_depth, cap):
        if n == total_depth:
            weights = s * log_norms_of_level(prods, logs)
    m = float(np.max(weights))
    w = np.exp(weights - m)
    w /= float(np.sum(w))
    return CylinderMeasure.from_state_distribution(w, len(t), depth, invariant=False)


@dataclass(frozen=True)
class EtaResult:
    measure: CylinderMeasure
    q: float
    base_pressure: float
    pressure: float  # log(1 + e^R)


def eta_measure(t: MatrixTuple, split, base_solution, depth: int) -> EtaResult:
    """The inserted-identity equilibrium of a conformal/non-conformal split.

    Symbols of the conformal part must act projectively trivially (their
    normalizations are +-identity). With R the base pressure of the
    non-conformal sub-tuple, an independent coin of weight q = 1/(1+e^R)
    decides conformal symbols, and the word with conformal symbols deleted
    is distributed by the base equilibrium.
    """
    if not split.e_trivial:
        raise PreconditionFailed(
            "conformal generators do not act projectively trivially")
    if not split.h_indices:
        raise PreconditionFailed("the split has no non-conformal part")
    base_mu = base_solution.measure
    if base_mu.depth < depth:
        raise PreconditionFailed(
            f"base measure depth {base_mu.depth} is below the requested {depth}")
    r_press = base_solution.pressure
    q = 1.0 / (1.0 + math.exp(r_press))
    h_pos = {sym: i + 1 for i, sym in enumerate(split.h_indices)}
    e_set = set(split.e_indices)
    n = len(t)
    masses: dict[Word, float] = {(): 1.0}
    for length in range(1, depth + 1):
        for w in itertools.product(range(1, n + 1), repeat=length):
            n_e = sum(1 for sym in w if sym in e_set)
            kappa_word = tuple(h_pos[sym] for sym in w if sym not in e_set)
            masses[w] = (q**n_e) * ((1.0 - q) ** (length - n_e)) * base_mu.mass(kappa_word)
    measure = CylinderMeasure(n, depth, masses, invariant=True)
    return EtaResult(measure, q, r_press, math.log(1.0 + math.exp(r_press)))


# ---------------------------------------------------------------------------
# Locally constant potentials and Birkhoff shadowing diagnostics.

@dataclass(frozen=True)
class PotentialModel:
    """Locally constant potential: one value per depth-k cylinder."""

    n_gens: int
    depth: int
    values: np.ndarray  # length n_gens^depth, lexicographic word order
    note: str = ""

    def value(self, window: Word) -> float:
        idx = 0
        for sym in window:
            idx = idx * self.n_gens + (sym - 1)
        return float(self.values[idx])


def potential_from_certificate(t: MatrixTuple, s: float, cone: Multicone,
                               depth: int, cap=WORD_CAP) -> PotentialModel:
    """Discretized norm potential steered by a certificate cone.

    The value on the cylinder [w] is s log |A_{w_1} restricted to the
    direction A_{w_2..w_k} c0|, with c0 the midpoint of the certificate
    cone's longest arc.
    """
    c0 = max(cone.arcs, key=lambda a: a.length).midpoint
    n = len(t)
    if depth < 1:
        raise PreconditionFailed("potential depth must be at least 1")
    angles = _suffix_angles(t, c0, depth - 1, cap)
    values = np.empty(n ** depth)
    block = n ** (depth - 1)
    for i in range(n):
        a = t.mats[i]
        img = np.stack([a[0, 0] * np.cos(angles) + a[0, 1] * np.sin(angles),
                        a[1, 0] * np.cos(angles) + a[1, 1] * np.sin(angles)])
        values[i * block:(i + 1) * block] = s * np.log(np.hypot(img[0], img[1]))
    return PotentialModel(n, depth, values, note="certificate-steered")


def _suffix_angles(t: MatrixTuple, c0: float, length: int, cap=WORD_CAP) -> np.ndarray:
    """Directions A_v c0 for all words v of a fixed length (lex order)."""
    if length == 0:
        return np.array([c0])
    prods = None
    for n, level, _logs in iter_levels(t, length, cap):
        if n == length:
            prods = level
    vec = np.array([math.cos(c0), math.sin(c0)])
    img = prods @ vec
    return np.arctan2(img[:, 1], img[:, 0]) % math.pi


@dataclass(frozen=True)
class ShadowingDeficit:
    """max over tested words of |Birkhoff sum of f - log |A_w||."""

    value: float
    horizon: int
    exact: bool  # exhaustive up to the horizon (no sampling)
    argmax: Word | None = None


def _digit_matrix(n_gens: int, length: int) -> np.ndarray:
    """All words of a length as a (count, length) int matrix, lex order."""
    count = n_gens**length
    idx = np.arange(count)
    cols = []
    for j in range(length):
        cols.append((idx // (n_gens ** (length - 1 - j))) % n_gens + 1)
    return np.stack(cols, axis=1)


def _window_indices(digits: np.ndarray, k: int, n_gens: int) -> np.ndarray:
    """State index of each length-k window after padding with 1s."""
    count, length = digits.shape
    padded = np.concatenate([digits, np.ones((count, k - 1), dtype=digits.dtype)],
                            axis=1) if k > 1 else digits
    idx = np.zeros((count, length), dtype=np.int64)
    for j in range(length):
        acc = np.zeros(count, dtype=np.int64)
        for tshift in range(k):
            acc = acc * n_gens + (padded[:, j + tshift] - 1)
        idx[:, j] = acc
    return idx


def _level_lognorms(t: MatrixTuple, depth: int, cap=WORD_CAP):
    out = {}
    for n, prods, logs in iter_levels(t, depth, cap):
        out[n] = log_norms_of_level(prods, logs)
    return out


POOL_LENGTH = 40


def shadowing_deficit(t: MatrixTuple, f: PotentialModel, horizon: int,
                      exhaustive_cap=60_000, pool=None, seed=0) -> ShadowingDeficit:
    """Deficit between Birkhoff sums of f and log norms over many words.

    Words beyond the exhaustive budget are covered by a seeded stress pool
    drawn once at a fixed length and evaluated at every prefix length up to
    the horizon, so the tested word set (and hence the maximum) is monotone
    in the horizon. The boundary rule extends each word by the smallest
    symbol.
    """
    n = len(t)
    exh_depth = horizon
    while n**exh_depth > exhaustive_cap:
        exh_depth -= 1
    best, arg = 0.0, None
    lognorms = _level_lognorms(t, min(exh_depth, horizon))
    for length in range(1, min(exh_depth, horizon) + 1):
        digits = _digit_matrix(n, length)
        widx = _window_indices(digits, f.depth, n)
        birkhoff = f.values[widx].sum(axis=1)
        deficit = np.abs(birkhoff - lognorms[length])
        i = int(np.argmax(deficit))
        if deficit[i] > best:
            best, arg = float(deficit[i]), tuple(int(x) for x in digits[i])
    exact = exh_depth >= horizon
    if not exact:
        if pool is None:
            pool = stress_pool(n, max(horizon, POOL_LENGTH), seed)
        val, word = _pool_deficit(t, f, pool, horizon)
        if val > best:
            best, arg = val, word
    return ShadowingDeficit(best, horizon, exact, arg)


def _pool_deficit(t: MatrixTuple, f: PotentialModel, pool, horizon: int):
    best, arg = 0.0, None
    k = f.depth
    n = len(t)
    for word in pool:
        word = tuple(word)[:horizon]
        length = len(word)
        # log norms of every prefix, sequentially with renormalization
        b = np.eye(2)
        logscale = 0.0
        lognorm = np.empty(length)
        for j, sym in enumerate(word):
            b = b @ t.normalized[sym - 1]
            logscale += t.half_logdets[sym - 1]
            nb = planar.op_norm(b)
            lognorm[j] = logscale + math.log(nb)
            if nb > 1e100 or nb < 1e-100:
                b = b / nb
                logscale += math.log(nb)
        digits = np.array(word, dtype=np.int64)[None, :]
        widx_full = _window_indices(digits, k, n)[0]
        # Birkhoff sums per prefix: interior windows are shared, the last
        # k-1 windows of each prefix see the padding and are recomputed.
        interior = np.concatenate([[0.0], np.cumsum(f.values[widx_full])])
        for ell in range(1, length + 1):
            start = max(ell - (k - 1), 0)
            total = interior[start]
            padded = word[:ell] + (1,) * (k - 1)
            for j in range(start, ell):
                idx = 0
                for sym in padded[j:j + k]:
                    idx = idx * n + (sym - 1)
                total += f.values[idx]
            d = abs(total - lognorm[ell - 1])
            if d > best:
                best, arg = float(d), word[:ell]
    return best, arg


def stress_pool(n_gens: int, length: int, seed=0, n_uniform=256,
                n_runs=128, run_symbols=None) -> list[tuple[int, ...]]:
    """Seeded stress words: uniform draws, run-structured words, and
    deterministic periodic block words.

    Block words repeat (pattern + run of a designated symbol). When the run
    symbol acts like a scaled isometry the Birkhoff sum of any potential
    constant on deep run windows is affine per block while the log norm
    grows at the pattern's eigenvalue rate, so any rate mismatch
    accumulates linearly. The run symbol defaults to the last one.
    """
    rng = np.random.default_rng(seed)
    run_syms = run_symbols if run_symbols is not None else [n_gens]
    others = [sym for sym in range(1, n_gens + 1) if sym not in run_syms]
    if not others:
        others = list(range(1, n_gens + 1))
    pool = []
    patterns = [(o,) for o in others]
    patterns += [(a, b) for a in others for b in others]
    patterns += [(a, b, c) for a in others for b in others for c in others][:16]
    for pat in patterns:
        for run in (4, 8):
            block = pat + tuple(run_syms[0] for _ in range(run))
            word = (block * (length // len(block) + 1))[:length]
            pool.append(word)
        pool.append((pat * (length // len(pat) + 1))[:length])
    for _ in range(n_uniform):
        pool.append(tuple(rng.integers(1, n_gens + 1, size=length).tolist()))
    for _ in range(n_runs):
        word = []
        while len(word) < length:
            word.append(int(rng.choice(others)))
            run = int(rng.geometric(0.25))
            word.extend([int(rng.choice(run_syms))] * run)
        pool.append(tuple(word[:length]))
    if n_gens > 1:
        for _ in range(n_runs):
            pool.append(tuple(int(rng.choice(others)) for _ in range(length)))
    return pool


def fit_locally_constant_potential(t: MatrixTuple, k: int, horizon: int,
                                   seed=0, exhaustive_cap=20_000,
                                   pool=None) -> PotentialModel:
    """Least-squares locally constant fit of log |A_w| Birkhoff sums.

    One equation per tested word, normalized by word length so every word
    contributes its per-symbol rate with equal weight (otherwise the
    longest words dominate the objective and the fitted rates drift with
    the horizon). Exhaustive short words are joined by the same stress
    pool that the deficit uses.
    """
    n = len(t)
    exh_depth = horizon
    while n**exh_depth > exhaustive_cap:
        exh_depth -= 1
    rows, cols, vals, rhs = [], [], [], []
    row = 0
    lognorms = _level_lognorms(t, min(exh_depth, horizon))
    for length in range(1, min(exh_depth, horizon) + 1):
        digits = _digit_matrix(n, length)
        widx = _window_indices(digits, k, n)
        for i in range(digits.shape[0]):
            counts: dict[int, int] = {}
            for idx in widx[i]:
                counts[int(idx)] = counts.get(int(idx), 0) + 1
            for cidx, cnt in counts.items():
                rows.append(row)
                cols.append(cidx)
                vals.append(cnt / length)
            rhs.append(float(lognorms[length][i]) / length)
            row += 1
    if horizon > exh_depth:
        if pool is None:
            pool = stress_pool(n, max(horizon, POOL_LENGTH), seed)
        for word in pool:
            word = tuple(word)[:horizon]
            b = np.eye(2)
            logscale = 0.0
            sub_lognorm = {}
            for j, sym in enumerate(word):
                b = b @ t.normalized[sym - 1]
                logscale += t.half_logdets[sym - 1]
                sub_lognorm[j + 1] = logscale + math.log(planar.op_norm(b))
            for ell in range(exh_depth + 1, len(word) + 1, 2):
                padded = word[:ell] + (1,) * (k - 1)
                counts = {}
                for j in range(ell):
                    idx = 0
                    for sym in padded[j:j + k]:
                        idx = idx * n + (sym - 1)
                    counts[idx] = counts.get(idx, 0) + 1
                for cidx, cnt in counts.items():
                    rows.append(row)
                    cols.append(cidx)
                    vals.append(cnt / ell)
                rhs.append(sub_lognorm[ell] / ell)
                row += 1
    mat = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(row, n**k))
    sol = scipy.sparse.linalg.lsqr(mat, np.array(rhs), damp=1e-8,
                                   atol=1e-12, btol=1e-12, iter_lim=5000)[0]
    return PotentialModel(n, k, sol, note=f"lsq fit, horizon {horizon}")
