"""Randomized verification batteries over the inequality machinery.

Each suite draws seeded random inputs, checks one family of guaranteed
relations, and reports violations with enough bookkeeping to replay any
single row from its (seed, trial) pair.  Trials may run on a thread
pool (ANISO_THREADS); aggregation is by trial index, so the report does
not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, PreconditionError, VerificationFailure
from .generators import random_function, random_norm, random_weight, trial_rng
from .polya import (band_refined_gap, band_sum_check, gamma_weights,
                    hardy_littlewood_check, min_inequality, polya_inequality,
                    refined_bound)
from .pwa import is_monotone
from .rayleigh import QuotientProblem, competitor_improves, rayleigh_quotient
from .rearrange import band_decomposition

# fraction of trials forced to an exactly monotone input, to exercise
# the equality side of the inequalities
FORCED_MONOTONE_EVERY = 10

CSV_HEADER = ("trial", "seed", "lhs", "rhs", "gap", "excess_measure",
              "monotone", "orientation", "ok")


@dataclass(frozen=True)
class BatteryRow:
    trial: int
    seed: int
    lhs: float
    rhs: float
    gap: float
    excess_measure: float
    monotone: str
    orientation: str
    ok: bool

    def csv(self) -> str:
        return (f"{self.trial},{self.seed},{self.lhs!r},{self.rhs!r},"
                f"{self.gap!r},{self.excess_measure!r},{self.monotone},"
                f"{self.orientation},{int(self.ok)}")


@dataclass(frozen=True)
class BatteryReport:
    suite: str
    trials: int
    seed: int
    violations: int
    worst_gap: float
    rows: tuple

    def to_dict(self) -> dict:
        return {"suite": self.suite, "trials": self.trials,
                "seed": self.seed, "violations": self.violations,
                "worst_gap": self.worst_gap}


def thread_count() -> int:
    raw = os.environ.get("ANISO_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise PreconditionError(
            f"ANISO_THREADS must be a positive integer, got {raw!r}")
    return n


def _forced_direction(trial: int, rng) -> str | None:
    if trial % FORCED_MONOTONE_EVERY == FORCED_MONOTONE_EVERY - 1:
        return "down" if rng.random() < 0.5 else "up"
    return None


def _row_from_report(trial, seed, rep, ok) -> BatteryRow:
    return BatteryRow(trial, seed, float(rep.lhs), float(rep.rhs),
                      float(rep.gap), float(rep.excess_measure),
                      rep.monotone_classification, rep.orientation, ok)


def _equality_matches_shape(rep) -> bool:
    want = ("decreasing", "constant") if rep.orientation == "down" \
        else ("increasing", "constant")
    return rep.equality == (rep.monotone_classification in want)


def _trial_refined(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    f = random_function(rng, monotone=_forced_direction(trial, rng))
    norm = random_norm(rng)
    try:
        rep = refined_bound(f, norm, seed=seed)
    except VerificationFailure:
        return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                          "?", "?", False)
    ok = _equality_matches_shape(rep)
    for band in band_decomposition(f):
        # single crossings carry an exactly-zero gap, which floats
        # render as +-1 ulp; strictness is only claimed for merges
        if band.count >= 2 and not band_refined_gap(band, norm) > 0.0:
            ok = False
    return _row_from_report(trial, seed, rep, ok)


def _trial_plain(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    f = random_function(rng, monotone=_forced_direction(trial, rng))
    norm = random_norm(rng)
    try:
        rep = polya_inequality(f, norm, seed=seed)
    except VerificationFailure:
        return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                          "?", "?", False)
    return _row_from_report(trial, seed, rep, _equality_matches_shape(rep))


def _trial_floor(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    f = random_function(rng, monotone=_forced_direction(trial, rng))
    norm = random_norm(rng)
    try:
        rep = min_inequality(f, norm, seed=seed)
    except VerificationFailure:
        return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                          "?", "?", False)
    # the floor uses the cheap rate, so equality certifies shape only
    # one way around
    ok = (not rep.equality) or rep.monotone_classification != "none"
    return _row_from_report(trial, seed, rep, ok)


def _trial_bands(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    f = random_function(rng, monotone=_forced_direction(trial, rng))
    norm = random_norm(rng)
    mono = is_monotone(f)
    worst = np.inf
    ok = True
    try:
        bands = band_decomposition(f)
        for band in bands:
            gamma_weights(band, norm)
            if not band_sum_check(band, norm, f):
                ok = False
            worst = min(worst, band_refined_gap(band, norm))
    except VerificationFailure:
        return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                          mono, "bands", False)
    if not np.isfinite(worst):
        worst = 0.0
    return BatteryRow(trial, seed, float(len(bands)), 0.0, float(worst), 0.0,
                      mono, "bands", ok)


def _trial_ordered_pairing(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    f = random_function(rng, monotone=_forced_direction(trial, rng))
    m = random_weight(rng)
    p = random_norm(rng).p
    try:
        rep = hardy_littlewood_check(f, m, p, seed=seed)
    except VerificationFailure:
        return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                          "?", "?", False)
    return _row_from_report(trial, seed, rep, True)


def _trial_competitor(seed: int, trial: int) -> BatteryRow:
    rng = trial_rng(seed, trial)
    # redraw until the original pairing carries positive mass; every
    # draw flows from the same per-trial stream, so rows stay replayable
    for _ in range(50):
        f = random_function(rng)
        norm = random_norm(rng)
        w = random_weight(rng)
        kappa = 0.0 if rng.random() < 0.5 else 10.0
        prob = QuotientProblem(norm, w, kappa, 16)
        try:
            rayleigh_quotient(f, prob)
        except InfeasibleError:
            continue
        mode = "monotone" if kappa == 0.0 and rng.random() < 0.5 \
            else "unimodal"
        rep = competitor_improves(f, prob, mode=mode)
        if not rep.admissible:
            continue
        ok = rep.gap >= -1e-9 * max(1.0, abs(rep.original))
        return BatteryRow(trial, seed, float(rep.original),
                          float(rep.competitor), float(rep.gap),
                          0.0, mode, "quotient", ok)
    return BatteryRow(trial, seed, np.nan, np.nan, np.nan, np.nan,
                      "?", "quotient", False)


SUITES = {
    "polya1": _trial_refined,
    "polya2": _trial_plain,
    "polya3": _trial_floor,
    "bands": _trial_bands,
    "hl": _trial_ordered_pairing,
    "rayleigh": _trial_competitor,
}


def run_battery(suite: str, trials: int, seed: int = 0) -> BatteryReport:
    """Run one suite and aggregate its rows in trial order."""
    if suite not in SUITES:
        raise PreconditionError(
            f"unknown suite {suite!r}: expected one of {sorted(SUITES)}")
    if trials < 1:
        raise PreconditionError("need at least one trial")
    fn = SUITES[suite]
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(lambda t: fn(seed, t), range(trials)))
    else:
        rows = tuple(fn(seed, t) for t in range(trials))
    violations = sum(1 for r in rows if not r.ok)
    gaps = [r.gap for r in rows if np.isfinite(r.gap)]
    worst = float(min(gaps)) if gaps else 0.0
    return BatteryReport(suite, trials, seed, violations, worst, rows)
