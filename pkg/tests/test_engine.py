"""Stepping: fast kernel vs reference, invariances, trajectories, dumps."""

import numpy as np
import pytest

from hexreact.engine import (
    Trajectory,
    frames_to_text,
    grid_to_pgm,
    parse_frames,
    run,
    step,
    step_reference,
)
from hexreact.hexgrid import CellState, Grid
from hexreact.rules import RuleMatrix, random_rule


def random_grid(rng, h, w):
    return Grid(rng.integers(0, 3, size=(h, w)))


def test_quiescent_grid_is_a_fixed_point():
    rng = np.random.default_rng(0)
    g = Grid.filled(8, 8)
    for _ in range(50):
        rule = random_rule(rng)
        assert step(g, rule) == g


def test_lone_reactant_dies_under_the_all_s_rule():
    g = Grid.filled(6, 6)
    g[3, 3] = CellState.A
    rule = RuleMatrix.from_genome("S" * 36)
    assert step(g, rule) == Grid.filled(6, 6)


def test_fast_kernel_matches_reference_on_random_cases():
    rng = np.random.default_rng(101)
    for _ in range(25):
        h, w = (int(v) for v in rng.integers(3, 12, size=2))
        h += h & 1  # even heights: the geometry the package guarantees
        g = random_grid(rng, h, w)
        rule = random_rule(rng)
        assert step(g, rule) == step_reference(g, rule)


def test_neighbor_visit_order_cannot_matter():
    # The rule only sees counts, so a reference stepper that shuffles the
    # order in which it visits the six neighbours must agree exactly.
    rng = np.random.default_rng(55)
    for _ in range(10):
        g = random_grid(rng, 8, 8)
        rule = random_rule(rng)
        assert step(g, rule) == step_reference(g, rule, rng=rng)


def test_step_is_translation_equivariant():
    rng = np.random.default_rng(77)
    for _ in range(20):
        g = random_grid(rng, 8, 10)
        rule = random_rule(rng)
        dr = 2 * int(rng.integers(0, 4))
        dc = int(rng.integers(0, 10))
        assert step(g.translate(dr, dc), rule) == step(g, rule).translate(dr, dc)


def test_step_leaves_input_untouched():
    rng = np.random.default_rng(4)
    g = random_grid(rng, 6, 6)
    before = g.cells.copy()
    step(g, random_rule(rng))
    assert np.array_equal(g.cells, before)


# -- run/trajectory ------------------------------------------------------------


def test_run_zero_steps_returns_just_the_start():
    g = Grid.filled(4, 4)
    tr = run(g, RuleMatrix.from_genome("S" * 36), 0, keep_last=1)
    assert len(tr) == 1
    assert tr[0] == g
    assert tr.t0 == 0


def test_run_returns_all_frames_by_default():
    rng = np.random.default_rng(31)
    g = random_grid(rng, 6, 6)
    rule = random_rule(rng)
    tr = run(g, rule, 10)
    assert len(tr) == 11
    for t in range(10):
        assert tr[t + 1] == step(tr[t], rule)


def test_run_keep_last_matches_independent_composition():
    rng = np.random.default_rng(32)
    g = random_grid(rng, 6, 6)
    rule = random_rule(rng)
    tr = run(g, rule, 10, keep_last=1)
    assert len(tr) == 1
    assert tr.t0 == 10
    expected = g
    for _ in range(10):
        expected = step(expected, rule)
    assert tr[0] == expected

    window = run(g, rule, 10, keep_last=4)
    assert window.t0 == 7
    assert window[-1] == expected


def test_trajectory_needs_frames():
    with pytest.raises(ValueError):
        Trajectory([])


def test_some_rule_supports_a_small_oscillator():
    # Search seeded sparse rules (mostly-S entries keep dynamics local) for a
    # two-frame cycle reachable from a single reactant.  Uniformly random
    # rules almost always explode or die, so the draw is biased toward S.
    rng = np.random.default_rng(2024)
    found = None
    for _ in range(800):
        entries = np.where(rng.random(36) < 0.75, 0, rng.integers(1, 3, size=36))
        entries[0] = 0
        rule = RuleMatrix(entries)
        g = Grid.filled(10, 10)
        g[4, 4] = CellState.A
        tr = run(g, rule, 8)
        for t in range(5):
            if tr[t].population() and tr[t + 2] == tr[t] != tr[t + 1]:
                found = (rule, tr[t])
                break
        if found:
            break
    assert found is not None, "no period-2 seed found in the sample budget"
    rule, g = found
    tr = run(g, rule, 6)
    for t in range(0, 5, 2):
        assert tr[t] == g
        assert tr[t + 1] != g


# -- exports --------------------------------------------------------------------


def test_frame_dump_round_trip():
    rng = np.random.default_rng(9)
    g = random_grid(rng, 5, 4)
    rule = random_rule(rng)
    tr = run(g, rule, 3)
    text = frames_to_text(tr)
    frames = parse_frames(text)
    assert len(frames) == 4
    assert all(frames[t] == tr[t] for t in range(4))


def test_pgm_export_layout():
    g = Grid.filled(4, 5)
    g[0, 1] = CellState.A
    g[2, 3] = CellState.B
    raw = grid_to_pgm(g)
    assert raw.startswith(b"P5\n5 4\n255\n")
    pixels = raw.split(b"255\n", 1)[1]
    assert len(pixels) == 20
    assert pixels[1] == 128
    assert pixels[2 * 5 + 3] == 255
    assert pixels[0] == 0
