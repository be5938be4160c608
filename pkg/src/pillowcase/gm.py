"""Square-root extremal-length coordinate vectors and twist-limit
certificates.

A marked pillowcase is represented, up to common scale, by the vector of
square roots of extremal lengths over a finite witness set of curves.
The shear-family limits of these vectors under iterated multitwisting
are assembled here, compared projectively with full interval
propagation, and distilled into machine-checkable certificates that two
shears produce different limit points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .curves import (NormalCurve, WeightedMulticurve, apply_multitwist,
                     curve_from_name, twist_limit)
from .errors import AllEntriesZero, BudgetExceeded, WitnessMismatch
from .modulus import SolverOptions, SolverReport, extremal_length
from . import __version__

DEFAULT_WITNESS = ("alpha", "beta", "eta", "nu")


def _as_curve(c: Union[str, NormalCurve]) -> NormalCurve:
    return curve_from_name(c) if isinstance(c, str) else c


def _curve_key(c: Union[str, NormalCurve]):
    return c if isinstance(c, str) else tuple(c.weights)


@dataclass
class Interval:
    """A value with a symmetric error radius."""

    value: float
    error: float = 0.0

    @property
    def lo(self) -> float:
        return self.value - self.error

    @property
    def hi(self) -> float:
        return self.value + self.error

    def is_exact_zero(self) -> bool:
        return self.value == 0.0 and self.error == 0.0

    def sqrt(self) -> "Interval":
        lo = math.sqrt(max(self.lo, 0.0))
        hi = math.sqrt(max(self.hi, 0.0))
        return Interval(0.5 * (lo + hi), 0.5 * (hi - lo))

    def __mul__(self, c: float) -> "Interval":
        return Interval(self.value * c, abs(self.error * c))

    def to_dict(self) -> dict:
        return {"value": self.value, "error": self.error}


class ExtremalEvaluator:
    """Memoizing front end for the extremal-length solver."""

    def __init__(self, opts: Optional[SolverOptions] = None):
        self.opts = opts or SolverOptions()
        self._cache: Dict[tuple, SolverReport] = {}

    def report(self, s, target) -> SolverReport:
        s = Fraction(s)
        if isinstance(target, WeightedMulticurve):
            key = tuple(sorted((str(a), tuple(g.weights))
                               for a, g in target.terms))
        elif isinstance(target, (list, tuple)):
            key = tuple(sorted((str(Fraction(a)), _curve_key(g))
                               for a, g in target))
        else:
            key = _curve_key(target)
        full = (s, key, self.opts.levels, self.opts.radius)
        if full not in self._cache:
            opts = self.opts
            if opts.split is None and self._is_balanced_core_pair(target):
                # The isometry (x, y) -> (-x, -y) of every X_s exchanges
                # alpha and beta, so the optimal length split is exactly
                # one half; skipping the line search saves solver runs.
                opts = opts.replace(split=0.5)
            self._cache[full] = extremal_length(s, target, opts)
        return self._cache[full]

    @staticmethod
    def _is_balanced_core_pair(target) -> bool:
        if isinstance(target, WeightedMulticurve):
            terms = list(target.terms)
        elif isinstance(target, (list, tuple)):
            terms = [(Fraction(a), _as_curve(g)) for a, g in target]
        else:
            return False
        if len(terms) != 2 or terms[0][0] != terms[1][0]:
            return False
        core = {tuple(curve_from_name("alpha").weights),
                tuple(curve_from_name("beta").weights)}
        return {tuple(g.weights) for _, g in terms} == core

    def ext(self, s, target) -> Interval:
        rep = self.report(s, target)
        return Interval(rep.value, rep.error)


@dataclass
class ProjectiveVector:
    """Witness-indexed square-root extremal lengths up to scale."""

    entries: Dict[str, Interval]
    scale_entry: str

    def __post_init__(self):
        if not any(e.value > 0 for e in self.entries.values()):
            raise AllEntriesZero("projective vector has no positive entry")
        if self.entries[self.scale_entry].value <= 0:
            raise ValueError("scale entry must be strictly positive")

    @property
    def witness(self) -> Tuple[str, ...]:
        return tuple(sorted(self.entries))

    def zero_support(self) -> Tuple[str, ...]:
        return tuple(sorted(k for k, e in self.entries.items()
                            if e.is_exact_zero()))

    def normalized(self) -> "ProjectiveVector":
        s = self.entries[self.scale_entry].value
        return ProjectiveVector(
            {k: e * (1.0 / s) for k, e in self.entries.items()},
            self.scale_entry)

    def to_dict(self) -> dict:
        return {
            "entries": {k: e.to_dict() for k, e in self.entries.items()},
            "scale_entry": self.scale_entry,
        }


def _pick_scale(entries: Dict[str, Interval]) -> str:
    if "nu" in entries and entries["nu"].value > 0:
        return "nu"
    pos = [(e.value, k) for k, e in entries.items() if e.value > 0]
    if not pos:
        raise AllEntriesZero("all witness entries vanish")
    return max(pos)[1]


def gm_vector(s, witness: Sequence = DEFAULT_WITNESS,
              evaluator: Optional[ExtremalEvaluator] = None,
              ) -> ProjectiveVector:
    """Square-root extremal-length vector of the surface at shear s."""
    ev = evaluator or ExtremalEvaluator()
    entries: Dict[str, Interval] = {}
    for w in witness:
        name = w if isinstance(w, str) else repr(w)
        entries[name] = ev.ext(s, w).sqrt()
    return ProjectiveVector(entries, _pick_scale(entries))


def gm_limit_vector(s, witness: Sequence = DEFAULT_WITNESS,
                    evaluator: Optional[ExtremalEvaluator] = None,
                    ) -> ProjectiveVector:
    """Limit vector of the twisted surfaces at shear s.

    Each entry is sqrt(Ext(i(g,alpha) alpha + i(g,beta) beta, X_s));
    curves invariant under the multitwist contribute exact zeros.
    """
    ev = evaluator or ExtremalEvaluator()
    entries: Dict[str, Interval] = {}
    base: Dict[Tuple[Fraction, Fraction], Interval] = {}
    for w in witness:
        name = w if isinstance(w, str) else repr(w)
        lim = twist_limit(_as_curve(w))
        (a, _), (b, _) = lim.terms
        if a == 0 and b == 0:
            entries[name] = Interval(0.0, 0.0)
            continue
        # Degree-2 homogeneity: pull out the common factor so that
        # proportional limits share one solver run.
        g = a + b
        ca, cb = a / g, b / g
        if (ca, cb) not in base:
            alpha = curve_from_name("alpha")
            beta = curve_from_name("beta")
            terms = [(x, c) for x, c in ((ca, alpha), (cb, beta)) if x != 0]
            base[(ca, cb)] = ev.ext(s, terms)
        entries[name] = (base[(ca, cb)] * float(g * g)).sqrt()
    if not any(e.value > 0 for e in entries.values()):
        raise AllEntriesZero(
            "every witness curve is invariant under the multitwist")
    return ProjectiveVector(entries, _pick_scale(entries))


def projective_distance(v: ProjectiveVector, w: ProjectiveVector) -> float:
    """Sup-log distance between projective vectors on a shared witness.

    Infinite when the exact-zero supports differ; otherwise the largest
    |log| ratio of entries after normalizing both vectors by the same
    designated entry.
    """
    if v.witness != w.witness:
        raise WitnessMismatch(
            f"witness sets differ: {v.witness} vs {w.witness}")
    if v.zero_support() != w.zero_support():
        return math.inf
    key = v.scale_entry if w.entries[v.scale_entry].value > 0 \
        else w.scale_entry
    vn = {k: e.value / v.entries[key].value for k, e in v.entries.items()}
    wn = {k: e.value / w.entries[key].value for k, e in w.entries.items()}
    d = 0.0
    for k in vn:
        if vn[k] > 0 and wn[k] > 0:
            d = max(d, abs(math.log(vn[k] / wn[k])))
    return d


@dataclass
class Certificate:
    """Decision record comparing two shear limit vectors."""

    s_pair: Tuple[Fraction, Fraction]
    witness: Tuple[str, ...]
    vectors: Tuple[ProjectiveVector, ProjectiveVector]
    distance_lower_bound: float
    verdict: str                      # "distinct" | "indistinguishable"
    budget: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == "distinct" and not self.distance_lower_bound > 0:
            raise ValueError("distinct verdict needs a positive bound")

    def to_dict(self) -> dict:
        return {
            "s_pair": [str(s) for s in self.s_pair],
            "witness": list(self.witness),
            "vectors": [v.to_dict() for v in self.vectors],
            "distance_lower_bound": self.distance_lower_bound,
            "verdict": self.verdict,
            "budget": self.budget,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def divergence_certificate(s1, s2, witness: Sequence = ("eta", "nu"),
                           evaluator: Optional[ExtremalEvaluator] = None,
                           ) -> Certificate:
    """Compare the twist-limit vectors at two shears with full intervals.

    The verdict is ``distinct`` only when some normalized entry ratio
    has disjoint error intervals, which lower-bounds the projective
    distance away from zero; overlapping intervals everywhere yield
    ``indistinguishable`` at this budget.
    """
    ev = evaluator or ExtremalEvaluator()
    s1, s2 = Fraction(s1), Fraction(s2)
    v1 = gm_limit_vector(s1, witness, ev)
    v2 = gm_limit_vector(s2, witness, ev)
    if v1.zero_support() != v2.zero_support():
        verdict, bound = "distinct", math.inf
    else:
        key = _pick_scale({k: v1.entries[k]
                           for k in v1.entries
                           if v2.entries[k].value > 0})
        bound = 0.0
        for k in v1.entries:
            e1, e2 = v1.entries[k], v2.entries[k]
            b1, b2 = v1.entries[key], v2.entries[key]
            if e1.is_exact_zero():
                continue
            # Interval for log((e1/b1) / (e2/b2)).
            lo = math.log((e1.lo * b2.lo) / (b1.hi * e2.hi)) \
                if min(e1.lo, b2.lo, b1.hi, e2.hi) > 0 else -math.inf
            hi = math.log((e1.hi * b2.hi) / (b1.lo * e2.lo)) \
                if min(e1.hi, b2.hi, b1.lo, e2.lo) > 0 else math.inf
            if lo > 0:
                bound = max(bound, lo)
            elif hi < 0:
                bound = max(bound, -hi)
        verdict = "distinct" if bound > 0 else "indistinguishable"
    opts = ev.opts
    budget = {"levels": list(opts.levels), "oracle_tol": opts.oracle_tol,
              "radius": opts.radius, "version": __version__}
    return Certificate((s1, s2), tuple(sorted(
        w if isinstance(w, str) else repr(w) for w in witness)),
        (v1, v2), bound, verdict, budget)


def twist_convergence_table(gamma: Union[str, NormalCurve], s, n_max: int,
                            evaluator: Optional[ExtremalEvaluator] = None,
                            ) -> List[dict]:
    """Normalized extremal lengths of iterated twists against their limit.

    Row n carries Ext(phi^n gamma, X_s)/n^2, the limit value
    Ext(i(gamma,alpha) alpha + i(gamma,beta) beta, X_s), and, where the
    shifted shear is meshable, the directly computed Ext(gamma, X_{s+n})
    for the marking cross-check.  Solver failures yield partial rows.
    """
    if n_max > 8:
        raise ValueError("n_max is capped at 8")
    ev = evaluator or ExtremalEvaluator()
    s = Fraction(s)
    g = _as_curve(gamma)
    lim = twist_limit(g)
    if all(a == 0 for a, _ in lim.terms):
        limit = Interval(0.0, 0.0)
    else:
        terms = [(a, c) for a, c in lim.terms if a != 0]
        limit = ev.ext(s, terms)
    rows: List[dict] = []
    for n in range(1, n_max + 1):
        row = {"n": n, "limit": limit.to_dict()}
        try:
            tg = apply_multitwist(g, n)
            val = ev.ext(s, tg)
            row["scaled"] = (val * (1.0 / n ** 2)).to_dict()
            row["residual"] = abs(val.value / n ** 2 - limit.value)
        except Exception as exc:   # record partial table
            row["error"] = f"{type(exc).__name__}: {exc}"
        try:
            marked = ev.ext(s + n, g)
            row["marked"] = marked.to_dict()
        except Exception as exc:
            row["marked_error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def kerckhoff_lower_bound(s1, s2, witness: Sequence = DEFAULT_WITNESS,
                          evaluator: Optional[ExtremalEvaluator] = None,
                          ) -> float:
    """Finite-witness lower bound for the Teichmueller distance."""
    ev = evaluator or ExtremalEvaluator()
    best = 1.0
    for w in witness:
        e1 = ev.ext(s1, w).value
        e2 = ev.ext(s2, w).value
        if e1 > 0 and e2 > 0:
            best = max(best, e1 / e2, e2 / e1)
    return 0.5 * math.log(best)


def horosphere_check(s_values: Sequence, tolerance: float = 0.02,
                     evaluator: Optional[ExtremalEvaluator] = None) -> dict:
    """Constancy check of Ext(alpha+beta, X_s) = 2 along the shear family."""
    ev = evaluator or ExtremalEvaluator()
    alpha = curve_from_name("alpha")
    beta = curve_from_name("beta")
    values = {}
    worst = 0.0
    for s in s_values:
        iv = ev.ext(Fraction(s), [(1, alpha), (1, beta)])
        values[str(Fraction(s))] = iv.to_dict()
        worst = max(worst, abs(iv.value - 2.0))
    return {"values": values, "max_deviation": worst,
            "tolerance": tolerance, "passed": worst <= tolerance}
