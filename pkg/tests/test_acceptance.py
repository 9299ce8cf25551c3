"""Top-level acceptance checks.

Each test exercises one end-to-end behaviour of the package at a stated
tolerance and runtime budget and prints a single PASS line (visible with
``pytest -s``; pytest -v reports the same verdicts by test name).  The checks
are deliberately heavier than the unit suites -- hundreds of random cases,
million-event reactor runs -- so this module is the slow part of the suite.

One check is a known, documented failure: the stationary-class sweep.  The
bundled reduced rule table genuinely contains rules that support traveling
localizations (a full enumeration of its 648-rule class found 27 such
members, each verified by replanting the tracked shape alone on an empty
torus).  The sweep here runs a fixed, pre-registered seed and reports what it
finds rather than a seed chosen to dodge the counterexamples.
"""

import math
import time

import numpy as np

import test_analysis as ta
import test_detector as td
from hexreact import analysis as an
from hexreact import detector as det
from hexreact import reactor as rx
from hexreact.detector import (
    GLIDER,
    OSCILLATOR,
    PUFFER_TRAIN,
    STILL_LIFE,
    FitnessConfig,
    fitness,
    track,
)
from hexreact.engine import Trajectory, run, step, step_reference
from hexreact.evolve import EAConfig, ea_run
from hexreact.hexgrid import Grid
from hexreact.rules import RuleMatrix, random_rule


def _passed(label: str, t0: float, budget: float) -> None:
    elapsed = time.time() - t0
    assert elapsed < budget, f"{label}: took {elapsed:.1f}s, budget {budget:.0f}s"
    print(f"PASS  {label}  ({elapsed:.1f}s / {budget:.0f}s budget)")


def _random_grid(rng, h, w) -> Grid:
    return Grid(rng.integers(0, 3, size=(h, w)))


# -- engine ----------------------------------------------------------------------


def test_fast_engine_matches_naive_reference():
    # 500 random (rule, 16x16 grid) pairs, 50 steps each, compared step by
    # step: the vectorised kernel must be bit-identical to the per-cell walk.
    t0 = time.time()
    rng = np.random.default_rng(11)
    for case in range(500):
        rule = random_rule(rng)
        g_fast = _random_grid(rng, 16, 16)
        g_ref = g_fast.copy()
        for t in range(50):
            g_fast = step(g_fast, rule)
            g_ref = step_reference(g_ref, rule)
            assert np.array_equal(g_fast.cells, g_ref.cells), (
                f"case {case}: kernels diverged at step {t + 1}"
            )
    _passed("engine: fast kernel == naive reference (500 cases x 50 steps)", t0, 30)


def test_count_semantics_and_translation_invariance():
    # The rule sees neighbour counts only, so a reference walk that shuffles
    # its neighbour visit order must agree exactly; and stepping commutes
    # with torus translation (even row shifts -- odd shifts shear the
    # hexagonal geometry).
    t0 = time.time()
    rng = np.random.default_rng(22)
    for _ in range(100):
        h = int(rng.integers(2, 8)) * 2
        w = int(rng.integers(4, 15))
        g = _random_grid(rng, h, w)
        rule = random_rule(rng)
        stepped = step(g, rule)
        assert step_reference(g, rule, rng) == stepped
        dr = int(rng.integers(-2, 3)) * 2
        dc = int(rng.integers(-4, 5))
        assert step(g.translate(dr, dc), rule) == stepped.translate(dr, dc)
    _passed("engine: count-only + translation invariance (100 cases)", t0, 30)


def test_all_substrate_grid_is_a_fixed_point():
    t0 = time.time()
    rng = np.random.default_rng(33)
    empty = Grid.filled(10, 12)
    for _ in range(1000):
        assert step(empty, random_rule(rng)) == empty
    _passed("engine: all-substrate grid is a fixed point (1000 rules)", t0, 30)


# -- detector --------------------------------------------------------------------


def test_detector_separates_the_synthetic_menagerie():
    t0 = time.time()

    # static triple -> still life
    frames = [td.grid_with(12, 16, td.TRIPLE) for _ in range(8)]
    locs = track(Trajectory(frames))
    assert [l.loc_class for l in locs] == [STILL_LIFE]
    assert locs[0].period == 1 and locs[0].displacement == (0, 0)

    # two-phase blinker in place -> oscillator
    frames = [
        td.grid_with(12, 16, {(5, 5): 1 + t % 2, (5, 6): 2 - t % 2})
        for t in range(8)
    ]
    locs = track(Trajectory(frames))
    assert [l.loc_class for l in locs] == [OSCILLATOR]
    assert locs[0].period == 2 and locs[0].displacement == (0, 0)

    # hand-translated pair marching east -> glider, one column per step,
    # shape recurs every 2 frames: period 2, displacement (0, 2) per period
    locs = track(Trajectory(td.east_glider_frames(12, 30, 5, 3, 10)))
    assert [l.loc_class for l in locs] == [GLIDER]
    assert locs[0].period == 2 and locs[0].displacement == (0, 2)

    # glider head + persistent growing debris line -> puffer train
    frames = []
    for t in range(10):
        cells = {(5, 6 + t): 1 if t % 2 == 0 else 2, (5, 7 + t): 2 if t % 2 == 0 else 1}
        for c in range(2, t + 3):
            cells[(5, c)] = 1
        frames.append(td.grid_with(12, 30, cells))
    by_class = {l.loc_class for l in track(Trajectory(frames))}
    assert PUFFER_TRAIN in by_class

    _passed("detector: still life / oscillator / glider / puffer classified exactly", t0, 30)


# -- likelihood tables -------------------------------------------------------------


def test_likelihood_fractions_and_bundled_tables():
    t0 = time.time()

    # hand corpus of four rules: fractions are exact quarters
    m = an.compute_likelihoods(ta.HAND_CORPUS)
    assert m.get("A", 1, 1) == 0.25 and m.get("B", 1, 1) == 0.25
    assert m.get("#", 1, 1) == 0.5
    assert m.get("S", 2, 0) == 0.25 and m.get("B", 2, 0) == 0.25
    assert m.get("S", 0, 0) == 1.0 and m.get("#", 5, 2) == 1.0
    assert np.all(m.fs + m.fa + m.fb + m.fhash == 1.0)

    # bundled tables carry 2-decimal entries: sums within 0.02 of 1
    ref = an.reference_likelihoods()
    total = ref.fs + ref.fa + ref.fb + ref.fhash
    assert np.all(np.abs(total - 1.0) <= 0.02)
    spot = (ref.get("S", 1, 1), ref.get("A", 1, 1), ref.get("B", 1, 1), ref.get("#", 1, 1))
    assert spot == (0.23, 0.43, 0.25, 0.09)

    _passed("likelihoods: hand-counted fractions exact; bundled tables partition to 1", t0, 30)


def test_reduction_recovers_the_bundled_class():
    t0 = time.time()
    ref = an.reference_reduced_set()
    assert ref.count() == 648
    assert len(list(an.enumerate_rules(ref))) == 648

    ours = an.reduce_likelihoods(an.reference_likelihoods())
    diff = an.diff_reduced_sets(ours, ref)
    matches = 36 - len(diff)
    for i, j, mine, theirs in diff:  # machine-readable remainder
        print(f"reduce-diff,{i},{j},{mine},{theirs}")
    assert matches >= 30, f"only {matches}/36 entries match; diff: {diff}"

    _passed(f"reduction: 648-rule class; bundled table matched on {matches}/36 entries", t0, 5)


def test_reduced_class_soups_stay_stationary():
    # Pre-registered protocol: seed 7, 20 sampled rules, 5 random 30x30
    # soups each, 300 steps, classification over the trailing 60 frames.
    # Expected to FAIL, and documented as such: 27 of the 648 class rules
    # support a verified traveling localization, so roughly half of all
    # 20-rule samples contain one.  This run reports what it finds instead
    # of hiding behind a luckier seed.
    t0 = time.time()
    cfg = FitnessConfig(
        width=30, height=30, patch_width=30, patch_height=30,
        steps=300, window=60, p_max=12, trials=5,
    )
    rep = an.stationarity_sweep(
        an.reference_reduced_set(), cfg, np.random.default_rng(7), n_rules=20
    )
    hist = rep.total_histogram()
    stationary_rules = sum(
        1 for e in rep.entries
        if e.histogram.get(STILL_LIFE, 0) + e.histogram.get(OSCILLATOR, 0) > 0
    )
    assert stationary_rules >= 1, "no sampled rule settled into a still life or oscillator"

    mobile = rep.mobile_count()
    if mobile:
        culprits = [
            e.rule.to_genome()
            for e in rep.entries
            if e.histogram.get(GLIDER, 0) + e.histogram.get(PUFFER_TRAIN, 0) > 0
        ]
        print(f"FAIL  class sweep: sampled reduced-class soups are stationary-only")
        print(f"      histogram: {hist}")
        print(f"      mobile-supporting rule(s) in sample: {culprits}")
        print(
            "      known limitation: enumerating all 648 class members found 27"
            " whose soups emit a verified traveling localization (each one"
            " replanted alone on an empty torus and tracked cleanly), so the"
            " stationary-only property holds for ~96% of the class, not all"
            " of it.  See tests/test_analysis.py for a verified example and"
            " the README for discussion."
        )
    assert mobile == 0, (
        f"{mobile} traveling localization(s) tracked among {sum(hist.values())}"
        f" in 20 rules x 5 soups; the class is not universally stationary"
        f" (histogram: {hist})"
    )
    _passed("class sweep: sampled reduced-class soups are stationary-only", t0, 120)


# -- stirred reactor ---------------------------------------------------------------


def test_reactor_conserves_matter_and_matches_decay_law():
    t0 = time.time()

    # every reaction in the standard system moves matter, never creates it:
    # totals are exactly invariant over a million events
    system = rx.standard_system()
    res = rx.ssa_run(
        system, {"A": 33333, "B": 33333, "S": 33334}, t_max=1e9,
        rng=np.random.default_rng(8), max_events=1_000_000,
    )
    assert res.reason == "max_events" and res.events == 1_000_000
    assert np.all(res.totals() == 100_000)

    # and per-sample on a densely sampled shorter run
    res = rx.ssa_run(
        system, {"A": 33333, "B": 33333, "S": 33333}, t_max=20.0,
        rng=np.random.default_rng(88), sample_dt=0.1,
    )
    assert res.reason == "t_max"
    assert np.all(res.totals() == 99_999)

    # lone unimolecular decay against the analytic law: the count at time t
    # is Binomial(n0, exp(-k t)); the 100-run mean must land within 3 sigma
    decay = rx.parse_system("A -> S @ 0.054")
    n0, k, t_max, runs = 10_000, 0.054, 10.0, 100
    finals = []
    for i in range(runs):
        r = rx.ssa_run(decay, {"A": n0}, t_max=t_max, rng=np.random.default_rng([8, i]))
        finals.append(r.series("A")[-1])
    p = math.exp(-k * t_max)
    mu = n0 * p
    sigma_mean = math.sqrt(n0 * p * (1 - p) / runs)
    err = abs(float(np.mean(finals)) - mu)
    assert err < 3 * sigma_mean, f"decay mean off by {err:.1f}, 3 sigma = {3 * sigma_mean:.1f}"

    _passed("reactor: totals exact over 1e6 events; decay mean within 3 sigma", t0, 60)


def test_reactor_profiles_correlate_and_substrate_dominates():
    # From equal thirds the reactant species decay together into substrate:
    # their sampled profiles correlate strongly, the substrate average
    # dominates both, and the run is long enough to cover >= 10 pulse peaks
    # (strict local maxima of the detrended A profile).
    t0 = time.time()
    res = rx.ssa_run(
        rx.standard_system(), {"A": 33333, "B": 33333, "S": 33333},
        t_max=40.0, rng=np.random.default_rng(0), sample_dt=0.25,
    )
    mask = res.times >= 5.0  # skip the initial transient
    a = res.series("A")[mask]
    b = res.series("B")[mask]
    s = res.series("S")[mask]

    corr = float(np.corrcoef(a, b)[0, 1])
    assert corr > 0.5, f"corr(A, B) = {corr:.3f}"
    assert s.mean() > a.mean() and s.mean() > b.mean()
    features = rx.count_oscillation_features(a, detrend=15)
    assert features >= 10, f"only {features} pulse peaks sampled"

    _passed(
        f"reactor: substrate dominates; corr(A,B) = {corr:.2f} > 0.5;"
        f" {features} pulse peaks >= 10",
        t0, 120,
    )


# -- evolutionary search ------------------------------------------------------------


def test_ea_improves_monotonically_and_bundled_rule_scores():
    t0 = time.time()

    # deterministic surrogate (count of A letters): best fitness never
    # decreases under elitism and the stall rule ends the run well before
    # the generation cap
    cfg = EAConfig(max_generations=300)
    run_out = ea_run(cfg, seed=10, fitness_fn=lambda genome: float(genome.count("A")))
    bests = [row[1] for row in run_out.history]
    assert all(x <= y for x, y in zip(bests, bests[1:])), "best fitness regressed"
    assert run_out.generations < cfg.max_generations, "stall rule never fired"
    assert len(bests) > cfg.stall_generations
    assert bests[-1] == bests[-1 - cfg.stall_generations], (
        "run ended while still improving"
    )

    # the bundled glider rule really does earn positive soup fitness under
    # the default census configuration
    score = fitness(an.bundled_glider_rule(), FitnessConfig(), np.random.default_rng(1))
    assert score > 0, f"bundled rule scored {score}"

    _passed(
        f"EA: surrogate best monotone to stall; bundled rule fitness {score:.5f} > 0",
        t0, 180,
    )
