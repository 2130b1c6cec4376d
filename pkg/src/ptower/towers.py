"""Tower runs and the executable growth criteria.

A run walks a presentation down a family of congruence subgroups
(principal, Borel, or the one-direction h / p families), records the
cohomology dimensions per level through the induction formula, fits a
growth exponent, and evaluates the finite certificates:

* analytic test: h1 at the first level small enough certifies flat
  (rational-homology-sphere) behaviour for the whole tower;
* saving test: h1 below (1/d! - 2d p^-(k-1)) |G : G_k| at some level
  certifies the power-saving growth class;
* coimage test: the quotient-propagation hypothesis for an operator
  matrix on a level-k0 module.

A finite run can certify the flat class and the saving class; the fitted
exponent is reported as a description, never as a proof, since the
trichotomy of growth types is asymptotic.  All verdict comparisons are
exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from ptower.cohomology import CohomologyResult, cohomology_dims
from ptower.congruence import (
    CongruenceMap,
    SubgroupSpec,
    coset_module,
    sl2_order,
)
from ptower.errors import ResourceCapError, ValidationError
from ptower.fp_linalg import FpMatrix
from ptower.group_core import GroupPresentation
from ptower.intervals import power_saving_delta_bounds

TOWER_KINDS = ("principal", "borel0", "h", "p_diag")


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds" | "fails" | "not-applicable"
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"status": self.status, "params": self.params}


@dataclass
class TowerLevel:
    k: int
    kind: str
    index: int
    result: CohomologyResult
    closure_order: int | None = None
    closure_full: bool | None = None

    def to_dict(self):
        d = {"k": self.k, "kind": self.kind, "index": self.index}
        d.update(self.result.to_dict())
        d["closure_order"] = self.closure_order
        d["closure_full"] = self.closure_full
        return d


@dataclass
class TowerReport:
    p: int
    label: str
    kind: str
    levels: list[TowerLevel]
    fitted_exponent: float | None
    verdicts: dict[str, Verdict]
    type_a_certified: bool = False
    notes: list[str] = field(default_factory=list)
    truncated: bool = False

    def to_dict(self):
        return {
            "label": self.label,
            "p": self.p,
            "kind": self.kind,
            "levels": [lv.to_dict() for lv in self.levels],
            "fitted_exponent": self.fitted_exponent,
            "type_a_certified": self.type_a_certified,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "notes": self.notes,
            "truncated": self.truncated,
            "delta_constant": delta_constant_check(),
            "provenance": {
                "levels": "computed",
                "fitted_exponent": "computed",
                "type_a_certified": "computed",
                "verdicts.analytic.threshold": "paper-cited",
                "verdicts.boston_ellenberg": "paper-cited",
                "delta_constant": "computed",
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def classify_type_a(levels: list[TowerLevel], analytic: Verdict | None, uniform_dim: int) -> bool:
    """Flat-tower label: claimed only when the first-level certificate holds
    AND every computed level has the minimal dimension (= the rank of the
    uniform group's abelianised quotient).  Anything else is reported as a
    fitted exponent with the asymptotic caveat, never as a growth class."""
    return bool(
        levels
        and analytic is not None
        and analytic.status == "holds"
        and all(lv.result.h1 == uniform_dim for lv in levels)
    )


def delta_constant_check() -> dict:
    """Enclosure of (2 - log2(1 + sqrt(3)))/4 and the check that it exceeds 1/8."""
    lo, hi = power_saving_delta_bounds()
    return {
        "lower": str(lo),
        "upper": str(hi),
        "width_below_1e-6": bool(hi - lo < Fraction(1, 10**6)),
        "exceeds_one_eighth": bool(lo > Fraction(1, 8)),
    }


def check_analytic(p: int, h1_at_level1: int, congruence: bool) -> Verdict:
    """Flat-tower certificate from the first-level dimension.

    Threshold p-5 for congruence lattices, p-9 otherwise; below the
    minimal possible value 3 the test cannot apply.  Also reports the
    equivalent minimal-quotient condition h1 == 3.
    """
    threshold = p - 5 if congruence else p - 9
    params = {
        "p": p,
        "h1": h1_at_level1,
        "congruence": congruence,
        "threshold": threshold,
        "boston_ellenberg_equivalent": h1_at_level1 == 3,
    }
    if threshold < 3:
        params["reason"] = "threshold below the minimal first-level dimension 3"
        return Verdict("not-applicable", params)
    return Verdict("holds" if h1_at_level1 <= threshold else "fails", params)


def saving_threshold(p: int, d: int, k: int) -> Fraction:
    """(1/d! - 2d p^-(k-1)) |G : G_k| with |G : G_k| = p^(d(k-1))."""
    return (Fraction(1, factorial(d)) - Fraction(2 * d, p ** (k - 1))) * p ** (d * (k - 1))


def check_saving(p: int, d: int, k: int, h1_at_k: int) -> Verdict:
    if k < 1:
        raise ValidationError("saving test needs k >= 1")
    thr = saving_threshold(p, d, k)
    params = {"p": p, "d": d, "k": k, "h1": h1_at_k, "threshold": str(thr)}
    if thr <= 0:
        params["reason"] = "threshold not positive at this level"
        return Verdict("not-applicable", params)
    return Verdict("holds" if Fraction(h1_at_k) < thr else "fails", params)


def check_coimage(t: FpMatrix, d: int, p: int, k0: int) -> Verdict:
    """Coimage-size hypothesis for a level-k0 operator matrix.

    holds iff (target dim - rank) < p^(d k0) / d!; the payload carries the
    bound implied for deeper levels, coim at level k <= d p^(k0-k) dim N_k.
    """
    coim = t.rows - t.rank()
    thr = Fraction(p ** (d * k0), factorial(d))
    params = {
        "coim": coim,
        "threshold": str(thr),
        "implied_bound": f"coim at level k <= {d} * {p}^({k0} - k) * dim N_k",
        "implied_coefficient": str(Fraction(d * p**k0)),
    }
    return Verdict("holds" if Fraction(coim) < thr else "fails", params)


def _log_base(x: float, p: int) -> float:
    from math import log

    return log(x) / log(p)


def fit_exponent(levels: list[TowerLevel], p: int) -> float | None:
    """OLS slope of log_p h1 against k over levels with h1 > 0 (>= 3 needed)."""
    pts = [(lv.k, _log_base(lv.result.h1, p)) for lv in levels if lv.result.h1 > 0]
    if len(pts) < 3:
        return None
    n = len(pts)
    sx = sum(k for k, _ in pts)
    sy = sum(y for _, y in pts)
    sxx = sum(k * k for k, _ in pts)
    sxy = sum(k * y for k, y in pts)
    denom = n * sxx - sx * sx
    if denom == 0:
        return None
    return (n * sxy - sx * sy) / denom


def _level_spec(kind: str, k: int) -> tuple[int, SubgroupSpec]:
    """(homomorphism level, subgroup) for tower step k of the given family."""
    if kind == "principal":
        return k, SubgroupSpec.principal(k)
    if kind == "borel0":
        return k, SubgroupSpec.borel0(k)
    if kind == "h":
        return k + 1, SubgroupSpec.h_family(k)
    if kind == "p_diag":
        return k + 1, SubgroupSpec.p_family(k, k)
    raise ValidationError(f"unknown tower kind {kind!r}")


def run_tower(
    pres: GroupPresentation,
    hom_at,
    kind: str,
    k_max: int,
    cap: int | None = None,
    congruence: bool = False,
    uniform_dim: int = 3,
    label: str = "",
) -> TowerReport:
    """Walk the tower, recording dimensions and criterion verdicts.

    hom_at: callable level -> CongruenceMap (levels are checked to reduce
    consistently).  Resource caps truncate the report, keeping the levels
    computed so far.
    """
    if kind not in TOWER_KINDS:
        raise ValidationError(f"kind must be one of {TOWER_KINDS}")
    levels: list[TowerLevel] = []
    notes: list[str] = []
    truncated = False
    p = None
    prev_hom = None
    for k in range(1, k_max + 1):
        hom_level, spec = _level_spec(kind, k)
        try:
            hom = hom_at(hom_level)
        except ResourceCapError as exc:
            notes.append(f"level {k}: {exc}")
            truncated = True
            break
        if p is None:
            p = hom.p
        if prev_hom is not None and hom_level > 1:
            lower = hom.reduce_to(min(prev_hom[0], hom_level - 1) or 1)
            ref = hom_at(lower.k)
            if lower.images != ref.images:
                raise ValidationError(f"homomorphism family inconsistent at level {hom_level}")
        prev_hom = (hom_level, hom)
        try:
            kwargs = {} if cap is None else {"cap": cap}
            mod = coset_module(hom, spec, **kwargs)
            res = cohomology_dims(pres, mod)
        except ResourceCapError as exc:
            notes.append(f"level {k}: {exc}")
            truncated = True
            break
        order = mod.meta.get("group_order")
        full = None
        if order is not None:
            full = order == sl2_order(hom.p, hom.k)
        levels.append(
            TowerLevel(k=k, kind=spec.describe(), index=mod.dim, result=res,
                       closure_order=order, closure_full=full)
        )
    if p is None:
        raise ValidationError("no tower level could be computed")

    verdicts: dict[str, Verdict] = {}
    if levels and kind == "principal":
        lv1 = levels[0]
        if lv1.closure_full:
            verdicts["analytic"] = check_analytic(p, lv1.result.h1, congruence)
        else:
            verdicts["analytic"] = Verdict(
                "not-applicable",
                {"reason": "closure at level 1 is not all of SL(2, Z/p)",
                 "closure_order": lv1.closure_order},
            )
        if p > 2:
            for lv in levels:
                verdicts[f"saving_k{lv.k}"] = check_saving(p, uniform_dim, lv.k, lv.result.h1)
        else:
            notes.append("saving test skipped: level-p principal subgroup not uniform at p=2")
    type_a = classify_type_a(levels, verdicts.get("analytic"), uniform_dim)
    if not type_a:
        notes.append(
            "growth beyond the certified flat case is asymptotic; "
            "the fitted exponent is descriptive, not a classification"
        )
    return TowerReport(
        p=p,
        label=label or pres.label,
        kind=kind,
        levels=levels,
        fitted_exponent=fit_exponent(levels, p),
        verdicts=verdicts,
        type_a_certified=type_a,
        notes=notes,
        truncated=truncated,
    )
