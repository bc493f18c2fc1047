"""Pipeline orchestration and report rendering.

A report bundles the flags, tables, certificates and measures produced for
one matrix tuple. JSON and CSV renderings are byte-deterministic for a
fixed config and seed; wall-clock runtimes appear only in the text form.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

from .classify import Classification, equilibrium_classify
from .config import (DEMO_DIAGONAL_SWAP, DEMO_PAIR_WITH_IDENTITY,
                     DEMO_POSITIVE_PAIR, JobConfig, demo_config)
from .domination import (DominationBudget, DominationResult,
                         MulticoneCertificate, domination_decide,
                         find_unstable_multicone)
from .semigroup import MatrixTuple, kappa_table, word_to_str
from .thermo import (CylinderMeasure, PressureBounds, RatioBand,
                     entropy_and_lambda, equilibrium_proxy_measure,
                     eta_measure, gibbs_type_ratio_test, pressure_bounds,
                     quasi_bernoulli_ratio_test)
from .transfer import TransferSolution, transfer_equilibrium

EXPECTED_DEMO_CLASSES = ("HolderGibbs", "QuasiBernoulli", "GibbsTypeOnly")


def _kappa_depth(n: int, enum_depth: int) -> int:
    d = 1
    while n ** (d + 1) <= 500 and d + 1 <= enum_depth:
        d += 1
    return max(2, d) if n > 1 else min(enum_depth, 8)


def _proxy_total_depth(n: int, k: int) -> int:
    total = k + 4
    while n**total > 200_000 and total > k:
        total -= 1
    return total


@dataclass
class ReportBase:
    config: JobConfig
    runtimes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _band_dict(band: RatioBand) -> dict:
    return {
        "depths": list(band.depths),
        "mins": list(band.mins),
        "maxs": list(band.maxs),
        "witness_min": word_to_str(band.witness_min) if band.witness_min else None,
        "witness_max": word_to_str(band.witness_max) if band.witness_max else None,
    }


def _pressure_dict(pb: PressureBounds) -> dict:
    return {
        "s": pb.s,
        "depth": pb.depth,
        "uppers": list(pb.uppers),
        "lowers": list(pb.lowers),
        "lower_certified": pb.lower_certified,
        "kappa": pb.kappa,
    }


def _kappa_rows_dict(rows) -> list:
    return [{"depth": r.depth, "kappa": r.kappa,
             "witness_u": word_to_str(r.witness_u),
             "witness_v": word_to_str(r.witness_v)} for r in rows]


def _domination_dict(dom: DominationResult) -> dict:
    out = {"verdict": dom.verdict.value}
    if dom.certificate is not None:
        out["certificate"] = dom.certificate.to_dict()
    if dom.witness_kind is not None:
        out["witness_kind"] = dom.witness_kind
        out["witness_word"] = word_to_str(dom.witness_word)
    if dom.ratios is not None:
        out["sv_ratio"] = {"depths": list(dom.ratios.depths),
                           "ratios": list(dom.ratios.ratios)}
    if dom.failures:
        out["failures"] = list(dom.failures)
    return out


def _classification_dict(c: Classification) -> dict:
    ev = c.evidence
    out = {
        "class": c.name,
        "flagged": c.flagged,
        "failed_stage": c.failed_stage,
        "irreducible": not ev.irreducibility.reducible,
        "invariant_directions": list(ev.irreducibility.directions),
        "strongly_conformal": ev.conformality.found,
        "notes": list(ev.notes),
    }
    if ev.conformality.structure is not None:
        out["conformal_p"] = [list(r) for r in ev.conformality.structure.P]
    if ev.domination is not None:
        out["domination"] = _domination_dict(ev.domination)
    if ev.split is not None:
        out["conformal_split"] = {
            "e_indices": list(ev.split.e_indices),
            "h_indices": list(ev.split.h_indices),
            "closure_size": len(ev.split.f_group) if ev.split.f_group else None,
            "closure_failed": ev.split.closure_failed,
            "e_trivial": ev.split.e_trivial if ev.split.f_group else False,
        }
    if ev.hyperbolic is not None:
        if hasattr(ev.hyperbolic, "to_dict"):
            out["hyperbolic_certificate"] = ev.hyperbolic.to_dict()
        else:
            out["hyperbolic_failure"] = {"stage": ev.hyperbolic.stage,
                                         "detail": ev.hyperbolic.detail}
    out["invariant_unstable_multicone"] = (
        ev.unstable_certificate.to_dict()
        if ev.unstable_certificate is not None else None)
    if ev.triangular is not None:
        out["triangular"] = {
            "probs": [list(p) for p in ev.triangular.probs],
            "which": list(ev.triangular.which),
            "sum_a": ev.triangular.sum_a,
            "sum_c": ev.triangular.sum_c,
            "pressure": ev.triangular.pressure,
        }
    if ev.bernoulli_probs is not None:
        out["bernoulli_probs"] = list(ev.bernoulli_probs)
    if ev.obstruction is not None:
        out["obstruction"] = ev.obstruction
    if ev.grid_eps:
        out["grid_eps"] = list(ev.grid_eps)
    return out


def _measure_dict(mu: CylinderMeasure, source: str, max_depth=4) -> dict:
    d = mu.restricted(min(mu.depth, max_depth)).to_dict()
    d["source"] = source
    d["full_depth"] = mu.depth
    d["consistency_defect"] = mu.consistency_defect()
    d["shift_defect"] = mu.shift_defect() if mu.invariant else None
    return d


@dataclass
class PressureReport(ReportBase):
    kappa_rows: tuple = ()
    pressure: PressureBounds | None = None

    def to_json_dict(self) -> dict:
        return {
            "kind": "pressure",
            "config": self.config.to_dict(),
            "kappa": _kappa_rows_dict(self.kappa_rows),
            "pressure": _pressure_dict(self.pressure),
        }

    def csv_rows(self):
        rows = [("depth", "value", "bound_type")]
        lower_kind = ("lower_certified" if self.pressure.lower_certified
                      else "lower_heuristic")
        for i, d in enumerate(range(1, self.pressure.depth + 1)):
            rows.append((d, repr(self.pressure.uppers[i]), "upper"))
            rows.append((d, repr(self.pressure.lowers[i]), lower_kind))
        return rows

    def to_text(self) -> str:
        out = io.StringIO()
        _text_header(out, self.config, "pressure")
        _text_kappa(out, self.kappa_rows)
        _text_pressure(out, self.pressure)
        _text_runtimes(out, self.runtimes)
        return out.getvalue()


@dataclass
class MulticoneReport(ReportBase):
    domination: DominationResult | None = None
    unstable_certificate: MulticoneCertificate | None = None
    unstable_reasons: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "kind": "multicone",
            "config": self.config.to_dict(),
            "domination": _domination_dict(self.domination),
            "invariant_unstable_multicone": (
                self.unstable_certificate.to_dict()
                if self.unstable_certificate is not None else None),
            "unstable_search_reasons": list(self.unstable_reasons),
        }

    def csv_rows(self):
        rows = [("depth", "value", "bound_type")]
        if self.domination.ratios is not None:
            for d, r in zip(self.domination.ratios.depths,
                            self.domination.ratios.ratios):
                rows.append((d, repr(r), "sv_ratio_max"))
        return rows

    def to_text(self) -> str:
        out = io.StringIO()
        _text_header(out, self.config, "multicone")
        _text_domination(out, self.domination)
        cert = self.unstable_certificate
        if cert is not None:
            out.write("invariant unstable multicone: yes\n")
            _text_cone(out, cert)
        else:
            out.write("invariant unstable multicone: no\n")
            for r in self.unstable_reasons[:6]:
                out.write(f"  {r}\n")
        _text_runtimes(out, self.runtimes)
        return out.getvalue()


@dataclass
class EquilibriumReport(ReportBase):
    classification: Classification | None = None
    measure: CylinderMeasure | None = None
    measure_source: str = ""
    transfer: TransferSolution | None = None
    entropy: float = 0.0
    lyapunov: float = 0.0
    pressure: PressureBounds | None = None
    gibbs_band: RatioBand | None = None
    quasi_band: RatioBand | None = None
    eta: dict | None = None

    def to_json_dict(self) -> dict:
        out = {
            "kind": "equilibrium",
            "config": self.config.to_dict(),
            "class": self.classification.name,
            "measure": _measure_dict(self.measure, self.measure_source),
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "pressure": _pressure_dict(self.pressure),
            "gibbs_band": _band_dict(self.gibbs_band),
            "quasi_band": _band_dict(self.quasi_band),
        }
        if self.transfer is not None:
            out["transfer"] = {
                "eigenvalue": self.transfer.eigenvalue,
                "pressure": self.transfer.pressure,
                "residual": self.transfer.residual,
                "depth": self.transfer.depth,
                "relaxed": self.transfer.relaxed,
            }
        if self.eta is not None:
            out["eta"] = self.eta
        return out

    def csv_rows(self):
        rows = [("depth", "band_min", "band_max")]
        for d, mn, mx in zip(self.gibbs_band.depths, self.gibbs_band.mins,
                             self.gibbs_band.maxs):
            rows.append((d, repr(mn), repr(mx)))
        return rows

    def to_text(self) -> str:
        out = io.StringIO()
        _text_header(out, self.config, "equilibrium")
        out.write(f"class: {self.classification.name}"
                  f"{' (flagged)' if self.classification.flagged else ''}\n")
        out.write(f"measure: {self.measure_source}, depth {self.measure.depth}, "
                  f"consistency defect {self.measure.consistency_defect():.2e}\n")
        if self.transfer is not None:
            out.write(f"transfer: eigenvalue {self.transfer.eigenvalue:.9f} "
                      f"(pressure {self.transfer.pressure:.9f}), residual "
                      f"{self.transfer.residual:.2e}\n")
        out.write(f"entropy {self.entropy:.6f} + lyapunov {self.lyapunov:.6f} "
                  f"= {self.entropy + self.lyapunov:.6f} "
                  f"(pressure bracket [{self.pressure.lower:.6f}, "
                  f"{self.pressure.upper:.6f}])\n")
        _text_band(out, "gibbs-type band", self.gibbs_band)
        _text_band(out, "quasi-bernoulli band", self.quasi_band)
        if self.eta is not None:
            out.write(f"eta construction: q = {self.eta['q']:.6f}, pressure "
                      f"{self.eta['pressure']:.6f}, max ratio to transfer "
                      f"state {self.eta['max_ratio_to_transfer']:.4f}\n")
        _text_runtimes(out, self.runtimes)
        return out.getvalue()


@dataclass
class ClassificationReport(ReportBase):
    classification: Classification | None = None
    kappa_rows: tuple = ()
    pressure: PressureBounds | None = None
    measure: CylinderMeasure | None = None
    measure_source: str = ""
    transfer: TransferSolution | None = None
    entropy: float = 0.0
    lyapunov: float = 0.0
    gibbs_band: RatioBand | None = None
    quasi_band: RatioBand | None = None

    def to_json_dict(self) -> dict:
        return {
            "kind": "classify",
            "config": self.config.to_dict(),
            "classification": _classification_dict(self.classification),
            "kappa": _kappa_rows_dict(self.kappa_rows),
            "pressure": _pressure_dict(self.pressure),
            "measure": _measure_dict(self.measure, self.measure_source),
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "gibbs_band": _band_dict(self.gibbs_band),
            "quasi_band": _band_dict(self.quasi_band),
        }

    def csv_rows(self):
        rows = [("depth", "band_min", "band_max")]
        for d, mn, mx in zip(self.gibbs_band.depths, self.gibbs_band.mins,
                             self.gibbs_band.maxs):
            rows.append((d, repr(mn), repr(mx)))
        return rows

    def to_text(self) -> str:
        out = io.StringIO()
        _text_header(out, self.config, "classify")
        ev = self.classification.evidence
        out.write(f"irreducible: {not ev.irreducibility.reducible}\n")
        if ev.irreducibility.reducible:
            dirs = ", ".join(f"{d:.6f}" for d in ev.irreducibility.directions)
            out.write(f"  invariant direction(s): {dirs}\n")
        out.write(f"strongly conformal: {ev.conformality.found}\n")
        if ev.domination is not None:
            _text_domination(out, ev.domination)
        if ev.unstable_certificate is not None:
            out.write("invariant unstable multicone: yes\n")
            _text_cone(out, ev.unstable_certificate)
        elif not ev.irreducibility.reducible or ev.grid_eps:
            out.write("invariant unstable multicone: none found\n")
        if ev.split is not None:
            out.write(f"conformal split: e={list(ev.split.e_indices)} "
                      f"h={list(ev.split.h_indices)}"
                      f" closure={'failed' if ev.split.closure_failed else len(ev.split.f_group or [])}\n")
        if ev.obstruction:
            out.write(f"obstruction: {ev.obstruction}\n")
        _text_kappa(out, self.kappa_rows)
        _text_pressure(out, self.pressure)
        flag = " (flagged inconclusive: %s)" % self.classification.failed_stage \
            if self.classification.flagged else ""
        out.write(f"\nclass: {self.classification.name}{flag}\n")
        for note in ev.notes:
            out.write(f"  note: {note}\n")
        out.write(f"measure: {self.measure_source}\n")
        out.write(f"entropy {self.entropy:.6f} + lyapunov {self.lyapunov:.6f} "
                  f"= {self.entropy + self.lyapunov:.6f}\n")
        _text_band(out, "gibbs-type band", self.gibbs_band)
        _text_band(out, "quasi-bernoulli band", self.quasi_band)
        _text_runtimes(out, self.runtimes)
        return out.getvalue()


def _text_header(out, cfg: JobConfig, kind: str):
    label = f" [{cfg.label}]" if cfg.label else ""
    out.write(f"=== {kind}{label}: {cfg.n} matrices, s = {cfg.s:g} ===\n")
    for i, m in enumerate(cfg.matrices, start=1):
        out.write(f"  A{i} = [[{m[0][0]:g}, {m[0][1]:g}], "
                  f"[{m[1][0]:g}, {m[1][1]:g}]]\n")
    out.write(f"  depths: enum {cfg.enum_depth}, cylinder "
              f"{cfg.cylinder_depth}, horizon {cfg.horizon}; seed {cfg.seed}\n")


def _text_kappa(out, rows):
    out.write("almost-multiplicativity estimates:\n")
    for r in rows:
        out.write(f"  depth {r.depth:2d}: kappa = {r.kappa:.9f}  "
                  f"(witness {word_to_str(r.witness_u)} | {word_to_str(r.witness_v)})\n")


def _text_pressure(out, pb: PressureBounds):
    kind = "certified" if pb.lower_certified else "heuristic"
    out.write(f"pressure brackets (lower bound {kind}"
              + (f", kappa = {pb.kappa:.6f}" if pb.kappa else "") + "):\n")
    for i, d in enumerate(range(1, pb.depth + 1)):
        out.write(f"  depth {d:2d}: [{pb.lowers[i]:.9f}, {pb.uppers[i]:.9f}]\n")


def _text_domination(out, dom: DominationResult):
    out.write(f"domination: {dom.verdict.value}\n")
    if dom.witness_kind is not None:
        out.write(f"  witness: {dom.witness_kind} at word "
                  f"{word_to_str(dom.witness_word)}\n")
    if dom.certificate is not None:
        _text_cone(out, dom.certificate)
    if dom.ratios is not None and dom.ratios.depths:
        last = dom.ratios.depths[-1]
        out.write(f"  max sv2/sv1 at depth {last}: "
                  f"{dom.ratios.ratios[-1]:.3e}\n")


def _text_cone(out, cert: MulticoneCertificate):
    arcs = ", ".join(f"[{a.start:.6f}, {a.start + a.length:.6f}]"
                     for a in cert.cone.arcs)
    out.write(f"  cone ({cert.mode}): {arcs}\n")
    out.write(f"  margin: {cert.margin:.6f}\n")


def _text_band(out, name, band: RatioBand):
    out.write(f"{name}: global [{band.global_min:.6g}, {band.global_max:.6g}]\n")
    for d, mn, mx in zip(band.depths, band.mins, band.maxs):
        out.write(f"  depth {d:2d}: [{mn:.6g}, {mx:.6g}]\n")


def _text_runtimes(out, runtimes):
    if runtimes:
        out.write("runtimes (s): " +
                  ", ".join(f"{k} {v:.3f}" for k, v in runtimes.items()) + "\n")


def write_csv(path, rows):
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Pipeline runners.

def _budget(cfg: JobConfig) -> DominationBudget:
    return DominationBudget(scan_depth=cfg.scan_depth,
                            cloud_depth=cfg.cloud_depth)


def _kappa_and_pressure(t, cfg, clock):
    with clock("kappa"):
        rows = kappa_table(t, _kappa_depth(len(t), cfg.enum_depth))
    with clock("pressure"):
        pb = pressure_bounds(t, cfg.s, cfg.enum_depth, kappa=rows[-1].kappa)
    return tuple(rows), pb


class _Clock:
    def __init__(self):
        self.times = {}

    def __call__(self, name):
        return _ClockCtx(self, name)


class _ClockCtx:
    def __init__(self, clock, name):
        self.clock, self.name = clock, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.clock.times[self.name] = \
            self.clock.times.get(self.name, 0.0) + time.perf_counter() - self.t0
        return False


def construct_equilibrium(t: MatrixTuple, cfg: JobConfig, c: Classification):
    """The equilibrium cylinder measure matching the classified regime.

    Returns (measure, source string, TransferSolution or None).
    """
    k = cfg.cylinder_depth
    ev = c.evidence
    if ev.bernoulli_probs is not None:
        return (CylinderMeasure.bernoulli(ev.bernoulli_probs, k),
                "bernoulli (strongly conformal weights)", None)
    if ev.triangular is not None:
        mu = CylinderMeasure.bernoulli(ev.triangular.probs[0], k)
        src = f"bernoulli (triangular, {ev.triangular.which[0]})"
        if len(ev.triangular.probs) > 1:
            src += f"; {len(ev.triangular.probs)} states (equality case)"
        return mu, src, None
    if ev.domination is not None and ev.domination.dominated:
        sol = transfer_equilibrium(t, cfg.s, ev.domination.certificate.cone, k)
        return sol.measure, "transfer operator (strongly invariant cone)", sol
    if ev.unstable_certificate is not None:
        sol = transfer_equilibrium(t, cfg.s, ev.unstable_certificate.cone, k,
                                   relaxed=True)
        return sol.measure, "transfer operator (invariant unstable cone)", sol
    total = _proxy_total_depth(len(t), k)
    mu = equilibrium_proxy_measure(t, cfg.s, k, total)
    return mu, f"norm partition proxy (horizon {total})", None


def run_classify(cfg: JobConfig) -> ClassificationReport:
    t = cfg.tuple()
    clock = _Clock()
    with clock("classify"):
        c = equilibrium_classify(t, cfg.s, _budget(cfg),
                                 measure_depth=cfg.cylinder_depth)
    rows, pb = _kappa_and_pressure(t, cfg, clock)
    with clock("equilibrium"):
        mu, source, sol = construct_equilibrium(t, cfg, c)
        h, lam = entropy_and_lambda(mu, t, cfg.s)
    with clock("bands"):
        gibbs = gibbs_type_ratio_test(mu, t, cfg.s, pb.midpoint)
        quasi = quasi_bernoulli_ratio_test(mu)
    return ClassificationReport(cfg, clock.times, c, rows, pb, mu, source,
                                sol, h, lam, gibbs, quasi)


def run_pressure(cfg: JobConfig) -> PressureReport:
    t = cfg.tuple()
    clock = _Clock()
    rows, pb = _kappa_and_pressure(t, cfg, clock)
    return PressureReport(cfg, clock.times, rows, pb)


def run_multicone(cfg: JobConfig) -> MulticoneReport:
    t = cfg.tuple()
    clock = _Clock()
    with clock("domination"):
        dom = domination_decide(t, _budget(cfg))
    with clock("unstable"):
        cands = [dom.certificate.cone] if dom.certificate is not None else []
        cert, _cloud, reasons = find_unstable_multicone(t, _budget(cfg), cands)
    return MulticoneReport(cfg, clock.times, dom, cert, reasons)


def run_equilibrium(cfg: JobConfig) -> EquilibriumReport:
    t = cfg.tuple()
    clock = _Clock()
    with clock("classify"):
        c = equilibrium_classify(t, cfg.s, _budget(cfg),
                                 measure_depth=cfg.cylinder_depth)
    _rows, pb = _kappa_and_pressure(t, cfg, clock)
    with clock("equilibrium"):
        mu, source, sol = construct_equilibrium(t, cfg, c)
        h, lam = entropy_and_lambda(mu, t, cfg.s)
    with clock("bands"):
        gibbs = gibbs_type_ratio_test(mu, t, cfg.s, pb.midpoint)
        quasi = quasi_bernoulli_ratio_test(mu)
    eta_info = None
    ev = c.evidence
    if (sol is not None and ev.split is not None and ev.split.e_indices
            and ev.split.h_indices and ev.split.e_trivial):
        with clock("eta"):
            sub = t.subtuple(ev.split.h_indices)
            sub_dom = domination_decide(sub, _budget(cfg))
            if sub_dom.dominated:
                base = transfer_equilibrium(sub, cfg.s,
                                            sub_dom.certificate.cone,
                                            cfg.cylinder_depth)
                eta = eta_measure(t, ev.split, base, cfg.cylinder_depth)
                ratios = [eta.measure.mass(w) / m
                          for w, m in sol.measure.masses.items()
                          if m > 0 and len(w) > 0]
                eta_info = {
                    "q": eta.q,
                    "base_pressure": eta.base_pressure,
                    "pressure": eta.pressure,
                    "max_ratio_to_transfer": max(ratios),
                    "min_ratio_to_transfer": min(ratios),
                }
    return EquilibriumReport(cfg, clock.times, c, mu, source, sol, h, lam,
                             pb, gibbs, quasi, eta_info)


def demo_configs() -> tuple[JobConfig, ...]:
    mk = demo_config
    return (
        mk(DEMO_POSITIVE_PAIR, "case-1").override(enum_depth=12),
        mk(DEMO_PAIR_WITH_IDENTITY, "case-2").override(enum_depth=10),
        mk(DEMO_DIAGONAL_SWAP, "case-3").override(enum_depth=12),
    )


def run_example1():
    """The three demonstration tuples with their expected classes.

    Returns (reports, expected, ok).
    """
    reports = tuple(run_classify(cfg) for cfg in demo_configs())
    got = tuple(r.classification.name for r in reports)
    return reports, EXPECTED_DEMO_CLASSES, got == EXPECTED_DEMO_CLASSES
