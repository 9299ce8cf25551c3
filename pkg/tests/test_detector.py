"""Localization tracking oracles: hand-built trajectories with known answers."""

import numpy as np
import pytest

from hexreact.detector import (
    GLIDER,
    OSCILLATOR,
    PUFFER_TRAIN,
    STILL_LIFE,
    UNRESOLVED,
    FitnessConfig,
    Localization,
    canonical_shape,
    classify,
    count_mobile,
    extract_components,
    fitness,
    random_patch_grid,
    report_rows,
    track,
)
from hexreact.engine import Trajectory
from hexreact.hexgrid import CellState, Grid, neighborhood
from hexreact.rules import RuleMatrix, random_rule


def grid_with(h, w, cells):
    """Build a grid from {(r, c): state}."""
    g = Grid.filled(h, w)
    for rc, state in cells.items():
        g[rc] = state
    return g


def place_axial(h, w, axial_cells, r0, q0):
    """Materialize axial-coordinate cells at an axial offset (geometric move)."""
    g = Grid.filled(h, w)
    for ar, aq, state in axial_cells:
        r = (ar + r0) % h
        c = (aq + q0 + ((ar + r0) - ((ar + r0) & 1)) // 2) % w
        g[r, c] = state
    return g


# three mutually adjacent cells (rows 4/5 around column 6)
TRIPLE = {(5, 5): 1, (5, 6): 1, (4, 6): 1}


# -- components ---------------------------------------------------------------


def test_empty_grid_has_no_components():
    assert extract_components(Grid.filled(6, 6)) == []


def test_adjacent_pair_is_one_component():
    g = grid_with(6, 6, {(2, 2): 1, (2, 3): 2})
    comps = extract_components(g)
    assert len(comps) == 1
    assert comps[0].size == 2
    assert sorted(comps[0].states) == [1, 2]


def test_components_partition_the_nonquiescent_cells():
    rng = np.random.default_rng(42)
    for _ in range(20):
        cells = np.where(rng.random((10, 12)) < 0.15, rng.integers(1, 3, (10, 12)), 0)
        g = Grid(cells)
        comps = extract_components(g)
        seen = np.concatenate([c.cells for c in comps]) if comps else np.array([])
        assert sorted(seen.tolist()) == np.flatnonzero(cells.ravel()).tolist()
        assert len(set(seen.tolist())) == len(seen)
        # internally connected: flood from one cell must reach the whole set
        for comp in comps:
            member = set(comp.cells.tolist())
            frontier = {int(comp.cells[0])}
            reached = set(frontier)
            while frontier:
                nxt = set()
                for cell in frontier:
                    for rc in neighborhood(g, divmod(cell, 12))[1:]:
                        flat = rc[0] * 12 + rc[1]
                        if flat in member and flat not in reached:
                            reached.add(flat)
                            nxt.add(flat)
                frontier = nxt
            assert reached == member


def test_distinct_components_are_never_adjacent():
    g = grid_with(8, 8, {(1, 1): 1, (1, 2): 1, (5, 5): 2})
    comps = extract_components(g)
    assert [c.size for c in comps] == [2, 1]


# -- canonical shapes ----------------------------------------------------------


def test_canonical_shape_ignores_placement_and_row_parity():
    axial = [(0, 0, 1), (0, 1, 2), (1, 0, 1)]
    shapes = set()
    for r0, q0 in [(2, 2), (3, 2), (4, 7), (5, 1), (0, 0)]:
        g = place_axial(12, 12, axial, r0, q0)
        comps = extract_components(g)
        assert len(comps) == 1
        shapes.add(canonical_shape(comps[0], 12, 12)[0])
    assert len(shapes) == 1


def test_canonical_shape_consistent_across_wrap_seam():
    axial = [(0, 0, 1), (0, 1, 1), (1, 1, 2)]
    reference = None
    for r0, q0 in [(5, 5), (11, 5), (5, 11), (11, 11)]:  # straddles both seams
        g = place_axial(12, 12, axial, r0, q0)
        comps = extract_components(g)
        assert len(comps) == 1
        shape = canonical_shape(comps[0], 12, 12)[0]
        reference = reference or shape
        assert shape == reference


def test_canonical_shape_distinguishes_states():
    a = extract_components(grid_with(6, 6, {(2, 2): 1, (2, 3): 1}))[0]
    b = extract_components(grid_with(6, 6, {(2, 2): 1, (2, 3): 2}))[0]
    assert canonical_shape(a, 6, 6)[0] != canonical_shape(b, 6, 6)[0]


# -- classification oracles ------------------------------------------------------


def make_trajectory(frames):
    return Trajectory(frames)


def east_glider_frames(h, w, row, col0, steps, state0=1, state1=2):
    """Two-cell pattern: states swap and the pair moves one column East per
    step, so the shape recurs every 2 frames with net displacement (0, 2)."""
    frames = []
    for t in range(steps):
        a, b = (state0, state1) if t % 2 == 0 else (state1, state0)
        frames.append(
            grid_with(h, w, {(row, (col0 + t) % w): a, (row, (col0 + t + 1) % w): b})
        )
    return frames


def test_static_triple_is_a_still_life():
    frames = [grid_with(12, 12, TRIPLE) for _ in range(8)]
    locs = track(make_trajectory(frames))
    assert len(locs) == 1
    loc = locs[0]
    assert loc.loc_class == STILL_LIFE
    assert loc.period == 1
    assert loc.displacement == (0, 0)
    assert loc.size == 3
    assert loc.frames == 8


def test_two_phase_blinker_is_an_oscillator():
    pair = {(5, 5): 1, (5, 6): 1}
    frames = []
    for t in range(10):
        frames.append(grid_with(12, 12, TRIPLE if t % 2 == 0 else pair))
    locs = track(make_trajectory(frames))
    assert len(locs) == 1
    assert locs[0].loc_class == OSCILLATOR
    assert locs[0].period == 2
    assert locs[0].displacement == (0, 0)


def test_translating_pattern_is_a_glider():
    frames = east_glider_frames(12, 24, row=5, col0=4, steps=10)
    locs = track(make_trajectory(frames))
    assert len(locs) == 1
    loc = locs[0]
    assert loc.loc_class == GLIDER
    assert loc.period == 2
    assert loc.displacement == (0, 2)


def test_glider_tracked_across_the_torus_seam():
    frames = east_glider_frames(12, 10, row=5, col0=7, steps=8)
    locs = track(make_trajectory(frames))
    assert len(locs) == 1
    assert locs[0].loc_class == GLIDER
    assert locs[0].period == 2
    assert locs[0].displacement == (0, 2)


def test_glider_moving_between_row_parities():
    # a single cell sliding one axial row South-East each frame: period 1,
    # displacement (1, 0); exercises the odd/even row bookkeeping
    frames = [place_axial(12, 12, [(0, 0, 1)], r0=2 + t, q0=4) for t in range(8)]
    locs = track(make_trajectory(frames))
    assert len(locs) == 1
    assert locs[0].loc_class == GLIDER
    assert locs[0].period == 1
    assert locs[0].displacement == (1, 0)


def test_classification_is_translation_invariant():
    frames = east_glider_frames(12, 24, row=5, col0=4, steps=10)
    moved = [g.translate(4, 9) for g in frames]
    a = track(make_trajectory(frames))[0]
    b = track(make_trajectory(moved))[0]
    assert (a.loc_class, a.period, a.displacement) == (
        b.loc_class,
        b.period,
        b.displacement,
    )


def test_puffer_train_head_with_persistent_trail():
    # glider head marching East; a static line of debris grows behind it,
    # always at least four columns back
    frames = []
    for t in range(10):
        cells = {(5, 6 + t): 1 if t % 2 == 0 else 2, (5, 7 + t): 2 if t % 2 == 0 else 1}
        for c in range(2, t + 3):
            cells[(5, c)] = 1
        frames.append(grid_with(12, 30, cells))
    locs = track(make_trajectory(frames))
    by_class = {loc.loc_class: loc for loc in locs}
    assert PUFFER_TRAIN in by_class
    head = by_class[PUFFER_TRAIN]
    assert head.period == 2
    assert head.displacement == (0, 2)
    assert head.has_trail and head.trail_size > 0
    # the growing trail itself never settles into a periodic shape
    assert UNRESOLVED in by_class


def test_merge_terminates_both_tracks():
    left = {(4, 3): 1, (4, 4): 1}
    right = {(4, 8): 1, (4, 9): 1}
    apart = {**left, **right}
    bridged = {**apart, **{(4, c): 1 for c in range(5, 8)}}
    frames = [grid_with(10, 14, apart)] * 3 + [grid_with(10, 14, bridged)] * 3
    locs = track(make_trajectory(frames))
    merged = [l for l in locs if l.terminated == "merge"]
    assert len(merged) == 2
    assert all(l.loc_class == UNRESOLVED for l in merged)
    # the fused blob then stands still long enough to classify on its own
    assert any(l.loc_class == STILL_LIFE and l.size == 7 for l in locs)


def test_split_terminates_the_parent():
    frames = [
        grid_with(10, 12, {(5, 5): 1, (5, 6): 1}),
        grid_with(10, 12, {(5, 4): 1, (5, 7): 1}),
        grid_with(10, 12, {(5, 4): 1, (5, 7): 1}),
    ]
    locs = track(make_trajectory(frames))
    assert sum(1 for l in locs if l.terminated == "split") == 1
    assert all(l.loc_class == UNRESOLVED for l in locs if l.terminated == "split")


def test_near_collision_terminates_by_proximity():
    # two cells closing to a one-cell gap: close enough to interact, so
    # identity becomes unreliable and both tracks must end
    frames = [
        grid_with(10, 14, {(5, 3): 1, (5, 10): 2}),
        grid_with(10, 14, {(5, 4): 1, (5, 9): 2}),
        grid_with(10, 14, {(5, 5): 1, (5, 8): 2}),
        grid_with(10, 14, {(5, 5): 1, (5, 7): 2}),
    ]
    locs = track(make_trajectory(frames))
    prox = [l for l in locs if l.terminated == "proximity"]
    assert len(prox) >= 2
    assert all(l.loc_class == UNRESOLVED for l in prox)


def test_track_rejects_odd_height():
    with pytest.raises(ValueError):
        track(make_trajectory([Grid.filled(5, 6)]))


def test_track_windows_the_trailing_frames():
    frames = [grid_with(12, 12, TRIPLE) for _ in range(9)]
    tr = Trajectory(frames, t0=100)
    locs = track(tr, window=4)
    assert len(locs) == 1
    assert locs[0].frames == 4
    assert locs[0].first_frame == 105


def test_classify_requires_two_full_periods():
    frames = east_glider_frames(12, 24, row=5, col0=4, steps=3)
    locs = track(make_trajectory(frames))
    # three frames cannot establish a period-2 recurrence twice over
    assert [l.loc_class for l in locs] == [UNRESOLVED]


def test_classify_is_idempotent_and_pure_on_caches():
    frames = [grid_with(12, 12, TRIPLE) for _ in range(6)]
    loc = track(make_trajectory(frames))[0]
    first = classify(loc)
    assert classify(loc) == first == loc.loc_class


# -- fitness --------------------------------------------------------------------


def test_fitness_of_the_extinction_rule_is_zero():
    rule = RuleMatrix.from_genome("S" * 36)
    cfg = FitnessConfig(width=32, height=32, steps=40, window=16, trials=2)
    assert fitness(rule, cfg, np.random.default_rng(0)) == 0.0


def test_fitness_is_deterministic_per_seed():
    rng = np.random.default_rng(3)
    rule = random_rule(rng)
    cfg = FitnessConfig(width=24, height=24, patch_width=8, patch_height=8,
                        steps=30, window=12, trials=2)
    a = fitness(rule, cfg, np.random.default_rng(11))
    b = fitness(rule, cfg, np.random.default_rng(11))
    assert a == b


def test_random_patch_grid_confines_seeding_to_the_patch():
    cfg = FitnessConfig(width=32, height=32, patch_width=8, patch_height=8)
    g = random_patch_grid(cfg, np.random.default_rng(5))
    assert g.shape == (32, 32)
    outside = g.cells.copy()
    outside[12:20, 12:20] = 0
    assert outside.sum() == 0


def test_count_mobile_respects_the_puffer_flag():
    a = Localization(first_frame=0)
    a.loc_class = GLIDER
    b = Localization(first_frame=0)
    b.loc_class = PUFFER_TRAIN
    c = Localization(first_frame=0)
    c.loc_class = STILL_LIFE
    assert count_mobile([a, b, c]) == 2
    assert count_mobile([a, b, c], count_puffers=False) == 1


def test_report_rows_format():
    frames = east_glider_frames(12, 24, row=5, col0=4, steps=10)
    locs = track(make_trajectory(frames))
    rows = report_rows(locs, trial=3)
    assert rows == ["3,Glider,2,0,2,2,0"]


def test_fitness_config_validation():
    with pytest.raises(ValueError):
        FitnessConfig(width=8, patch_width=16)
    with pytest.raises(ValueError):
        FitnessConfig(p_a=0.7, p_b=0.7)
    with pytest.raises(ValueError):
        FitnessConfig(steps=10, window=20)
