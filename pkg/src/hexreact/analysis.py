"""Rule-corpus statistics and the reduction to stationary-localization rules.

Given a corpus of rules that each support a glider, every rule contributes
the set of neighbourhood signatures (i, j) its glider actually exercises
while travelling alone through substrate -- its *necessary* transitions.
Aggregating the corpus yields four likelihood tables: for each signature, the
fraction of corpus entries whose rule outputs S, A or B there (among entries
that need the signature at all), plus the fraction that never exercise it.

Symmetrizing the A and B tables (the two reactants are interchangeable) and
keeping only states whose likelihood survives a dominance threshold reduces
the corpus to a small set-valued table; the rules drawn from it support only
stationary localizations, which the sweep helper verifies empirically.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .detector import (
    GLIDER,
    FitnessConfig,
    Localization,
    extract_components,
    random_patch_grid,
    track,
)
from .engine import Trajectory, _neighbour_sums, run
from .hexgrid import Grid
from .rules import PAIR_INDEX, PAIRS, RuleMatrix

_STATE_LETTERS = "SAB"


# -- likelihood tables ---------------------------------------------------------


@dataclass
class LikelihoodMatrices:
    """Four aligned 36-entry tables in genome order (see rules.PAIRS).

    ``fs[k] + fa[k] + fb[k] + fhash[k] == 1`` for every entry: each corpus
    member lands in exactly one bucket per signature -- one of the three
    output states if the signature is necessary for its glider, or the
    "redundant" bucket ``fhash`` if not.
    """

    fs: np.ndarray
    fa: np.ndarray
    fb: np.ndarray
    fhash: np.ndarray

    def table(self, which: str) -> np.ndarray:
        return {"S": self.fs, "A": self.fa, "B": self.fb, "#": self.fhash}[which]

    def get(self, which: str, i: int, j: int) -> float:
        return float(self.table(which)[PAIR_INDEX[(i, j)]])

    def as_grid(self, which: str) -> np.ndarray:
        """8x8 view of one table; entries with i+j > 7 are NaN."""
        out = np.full((8, 8), np.nan)
        for k, (i, j) in enumerate(PAIRS):
            out[i, j] = self.table(which)[k]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,j,FS,FA,FB,Fhash\n")
        for k, (i, j) in enumerate(PAIRS):
            buf.write(
                f"{i},{j},{float(self.fs[k])!r},{float(self.fa[k])!r},"
                f"{float(self.fb[k])!r},{float(self.fhash[k])!r}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LikelihoodMatrices":
        tables = [np.zeros(36) for _ in range(4)]
        seen = set()
        for line in text.splitlines()[1:]:
            if not line.strip():
                continue
            i, j, *values = line.split(",")
            k = PAIR_INDEX[(int(i), int(j))]
            seen.add(k)
            for table, v in zip(tables, values):
                table[k] = float(v)
        if len(seen) != 36:
            raise ValueError(f"likelihood CSV covers {len(seen)} of 36 entries")
        return cls(*tables)


def heatmap_pgm(matrices: LikelihoodMatrices, which: str) -> bytes:
    """One table as an 8x8 greyscale PGM (values 0..1 scaled to 0..255).

    Unreachable entries (i + j > 7) render as 0.
    """
    grid = matrices.as_grid(which)
    img = np.nan_to_num(grid, nan=0.0)
    img = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
    return b"P5\n8 8\n255\n" + img.tobytes()


def compute_likelihoods(corpus) -> LikelihoodMatrices:
    """Fold a corpus of (rule, necessary-signature-set) pairs into tables.

    For each signature (i, j): ``fhash`` is the fraction of entries whose set
    omits it; each state table holds the fraction of entries that need it
    *and* whose rule maps it to that state.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must be nonempty")
    counts = np.zeros((4, 36), dtype=np.int64)  # S, A, B, redundant
    for rule, needed in corpus:
        for k, pair in enumerate(PAIRS):
            if pair in needed:
                counts[rule.genome[k], k] += 1
            else:
                counts[3, k] += 1
    n = len(corpus)
    return LikelihoodMatrices(*(counts[z] / n for z in range(4)))


# -- necessary transitions -------------------------------------------------------


def necessary_transitions(
    rule: RuleMatrix, glider: Localization, tr: Trajectory
) -> set[tuple[int, int]]:
    """Signatures a lone glider exercises over one full period.

    ``tr`` must hold the glider travelling alone through substrate for at
    least ``glider.period`` frames.  Every cell of each of the first
    ``period`` frames contributes its (i, j) neighbourhood signature; the
    far field guarantees (0, 0).  Frames where the pattern touches the torus
    wrap seam are rejected: displacement bookkeeping there is ambiguous.
    """
    if glider.period is None:
        raise ValueError("localization has no established period")
    frames = tr.frames
    if len(frames) < glider.period:
        raise ValueError("trajectory shorter than one period")
    h, w = frames[0].shape
    seen: set[tuple[int, int]] = {(0, 0)}
    for t in range(glider.period):
        grid = frames[t]
        comps = extract_components(grid)
        if len(comps) != 1:
            raise ValueError(f"frame {t}: expected the glider alone, found {len(comps)} components")
        rows, cols = np.divmod(comps[0].cells, w)
        if rows.min() == 0 or rows.max() == h - 1 or cols.min() == 0 or cols.max() == w - 1:
            raise ValueError(f"frame {t}: pattern touches the wrap seam")
        ia, ib = _neighbour_sums(grid.cells)
        for key in np.unique(ia * 8 + ib):
            seen.add((int(key) // 8, int(key) % 8))
    return seen


@dataclass
class GliderTrace:
    """A verified lone-glider run: the evidence behind one corpus entry."""

    rule: RuleMatrix
    seed_grid: Grid
    trajectory: Trajectory
    loc: Localization

    def necessary(self) -> set[tuple[int, int]]:
        return necessary_transitions(self.rule, self.loc, self.trajectory)


def _materialize_shape(shape, size: int) -> Grid:
    """Place a canonical (axial) shape near the centre of an empty torus."""
    rows = [c[0] for c in shape]
    qs = [c[1] for c in shape]
    r0 = size // 2 - (max(rows) - min(rows)) // 2
    q0 = size // 2 - (max(qs) - min(qs)) // 2
    g = Grid.filled(size, size)
    for ar, aq, state in shape:
        r = (ar + r0) % size
        c = (aq + q0 + ((ar + r0) - ((ar + r0) & 1)) // 2) % size
        g[r, c] = state
    return g


def find_glider(
    rule: RuleMatrix,
    cfg: FitnessConfig,
    rng: np.random.Generator,
    max_trials: int = 20,
    lone_size: int = 48,
) -> GliderTrace | None:
    """Hunt a verified lone glider for ``rule``, or None.

    Random soups are run and tracked until some track classifies as a
    glider; its shape is then replanted alone on an empty torus and must
    reproduce a clean glider track from frame 0 with no debris.  That lone
    run is the returned trace.
    """
    seeds = rng.integers(0, 2**63, size=max_trials)
    steps = 4 * cfg.p_max + 4
    for seed in seeds:
        soup = random_patch_grid(cfg, np.random.default_rng(int(seed)))
        traj = run(soup, rule, cfg.steps, keep_last=cfg.window)
        for loc in track(traj, p_max=cfg.p_max):
            if loc.loc_class != GLIDER:
                continue
            shape = loc.shapes[-1]
            seed_grid = _materialize_shape(shape, lone_size)
            lone = run(seed_grid, rule, steps)
            locs = track(lone, p_max=cfg.p_max)
            if len(locs) != 1:
                continue
            cand = locs[0]
            if (
                cand.loc_class == GLIDER
                and cand.first_frame == 0
                and cand.frames == steps + 1
            ):
                return GliderTrace(rule, seed_grid, lone, cand)
    return None


def corpus_likelihoods(
    rules,
    cfg: FitnessConfig,
    rng: np.random.Generator,
    max_trials: int = 20,
) -> tuple[LikelihoodMatrices, list[RuleMatrix], list[RuleMatrix]]:
    """Build likelihood tables from rules by hunting each rule's glider.

    Returns (matrices, used, skipped): rules where no verified lone glider
    was found within the trial budget contribute nothing and are reported in
    ``skipped``.
    """
    entries = []
    used, skipped = [], []
    for rule in rules:
        trace = find_glider(rule, cfg, rng, max_trials=max_trials)
        if trace is None:
            skipped.append(rule)
            continue
        entries.append((rule, trace.necessary()))
        used.append(rule)
    if not entries:
        raise ValueError("no rule in the corpus produced a verifiable glider")
    return compute_likelihoods(entries), used, skipped


def guided_rule(
    matrices: LikelihoodMatrices,
    rng: np.random.Generator,
    background: tuple[float, float, float] = (0.9, 0.05, 0.05),
) -> RuleMatrix:
    """Draw a random rule biased by likelihood tables.

    Each entry samples a state with probability ``Fz + Fhash * background[z]``:
    where the corpus says a transition matters, follow its state statistics;
    where it is mostly redundant, fall back to the background mix (defaulting
    to quiescent, which keeps soups from exploding).  Entry (0, 0) stays S.
    """
    if abs(sum(background) - 1) > 1e-9:
        raise ValueError("background weights must sum to 1")
    entries = [0] * 36
    for k in range(1, 36):
        h = matrices.fhash[k]
        weights = np.array(
            [
                matrices.fs[k] + h * background[0],
                matrices.fa[k] + h * background[1],
                matrices.fb[k] + h * background[2],
            ]
        )
        weights = np.clip(weights, 0, None)
        entries[k] = int(rng.choice(3, p=weights / weights.sum()))
    return RuleMatrix(entries)


# -- symmetrization and reduction --------------------------------------------------


def symmetrize(
    f1: np.ndarray, f2: np.ndarray, eps: float, mode: str = "mean"
) -> tuple[np.ndarray, np.ndarray]:
    """Couple two tables across the A<->B exchange (i, j) <-> (j, i).

    Wherever ``|f1[i,j] - f2[j,i]| < eps`` the two entries are replaced by
    their arithmetic mean ("mean" mode) or by the floor of the mean ("floor"
    mode -- destructive on values below 1, kept for comparison runs).
    Entries further apart than eps are left alone.  Idempotent.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if mode not in ("mean", "floor"):
        raise ValueError(f"unknown mode {mode!r}")
    out1 = np.array(f1, dtype=float)
    out2 = np.array(f2, dtype=float)
    for (i, j), k in PAIR_INDEX.items():
        m = PAIR_INDEX[(j, i)]
        if abs(out1[k] - out2[m]) < eps:
            v = (out1[k] + out2[m]) / 2
            if mode == "floor":
                v = float(math.floor(v))
            out1[k] = v
            out2[m] = v
    return out1, out2


@dataclass(frozen=True)
class ReducedRuleSet:
    """Set-valued rule table: each signature maps to its allowed states.

    ``allowed`` maps every (i, j) pair to a nonempty frozenset of states;
    (0, 0) is always exactly {S}.
    """

    allowed: dict

    def __post_init__(self):
        fixed = {}
        for pair in PAIRS:
            states = frozenset(int(s) for s in self.allowed.get(pair, (0,)))
            if not states:
                raise ValueError(f"empty allowed set at {pair}")
            if not states <= {0, 1, 2}:
                raise ValueError(f"bad state in allowed set at {pair}")
            fixed[pair] = states
        if fixed[(0, 0)] != {0}:
            raise ValueError("(0, 0) must allow exactly S")
        object.__setattr__(self, "allowed", fixed)

    def get(self, i: int, j: int) -> frozenset:
        return self.allowed[(i, j)]

    def letters(self, i: int, j: int) -> str:
        return "".join(_STATE_LETTERS[s] for s in sorted(self.allowed[(i, j)]))

    def count(self) -> int:
        n = 1
        for pair in PAIRS:
            n *= len(self.allowed[pair])
        return n

    def nontrivial(self) -> dict:
        """Entries allowing anything besides plain {S}."""
        return {p: s for p, s in self.allowed.items() if s != frozenset({0})}

    def to_csv(self) -> str:
        lines = ["i,j,allowed"]
        for i, j in PAIRS:
            lines.append(f"{i},{j},{self.letters(i, j)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ReducedRuleSet":
        allowed = {}
        for line in text.splitlines()[1:]:
            if not line.strip():
                continue
            i, j, letters = line.split(",")
            allowed[(int(i), int(j))] = frozenset(
                _STATE_LETTERS.index(ch) for ch in letters.strip()
            )
        return cls(allowed)


def reduce_likelihoods(
    matrices: LikelihoodMatrices,
    theta: float = 0.2,
    eps: float = 0.1,
    mode: str = "mean",
    floor: float | None = None,
) -> ReducedRuleSet:
    """Distil likelihood tables into the set-valued stationary rule table.

    The A and B tables are first symmetrized (tolerance ``eps``).  A state
    then survives at signature (i, j) when its likelihood both clears the
    negligibility floor (default: ``eps``) and comes within ``theta`` of the
    strongest state there.  Signatures where nothing survives fall back to
    {S}, as do (0, 5) and (1, 4) on the B side, whose raw counts are noise.
    The subtraction is rounded to 9 decimals so that borderline likelihood
    gaps (stored as 2-decimal fractions) compare exactly against theta.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    floor = eps if floor is None else floor
    fa, fb = symmetrize(matrices.fa, matrices.fb, eps, mode)
    allowed = {}
    for (i, j), k in PAIR_INDEX.items():
        votes = {0: float(matrices.fs[k]), 1: float(fa[k]), 2: float(fb[k])}
        top = max(votes.values())
        states = {
            z
            for z, v in votes.items()
            if v >= floor and round(top - v, 9) < theta
        }
        if (i, j) in ((0, 5), (1, 4)):
            states.discard(2)
        allowed[(i, j)] = states or {0}
    allowed[(0, 0)] = {0}
    return ReducedRuleSet(allowed)


def diff_reduced_sets(a: ReducedRuleSet, b: ReducedRuleSet) -> list[tuple]:
    """Entries where two reduced sets disagree: (i, j, letters_a, letters_b)."""
    return [
        (i, j, a.letters(i, j), b.letters(i, j))
        for i, j in PAIRS
        if a.get(i, j) != b.get(i, j)
    ]


# -- the concrete rule class -----------------------------------------------------


def enumerate_rules(rset: ReducedRuleSet):
    """Yield every concrete rule in the class, in mixed-radix order."""
    choices = [sorted(rset.allowed[pair]) for pair in PAIRS]
    entries = [c[0] for c in choices]
    yield RuleMatrix(entries)
    digits = [0] * 36
    while True:
        k = 35
        while k >= 0 and digits[k] == len(choices[k]) - 1:
            digits[k] = 0
            entries[k] = choices[k][0]
            k -= 1
        if k < 0:
            return
        digits[k] += 1
        entries[k] = choices[k][digits[k]]
        yield RuleMatrix(entries)


def sample_rules(rset: ReducedRuleSet, n: int, rng: np.random.Generator) -> list[RuleMatrix]:
    """Draw n distinct rules uniformly from the class (per-entry choice)."""
    if n > rset.count():
        raise ValueError(f"class only holds {rset.count()} rules")
    choices = [sorted(rset.allowed[pair]) for pair in PAIRS]
    out: dict[str, RuleMatrix] = {}
    while len(out) < n:
        entries = [c[int(rng.integers(len(c)))] for c in choices]
        rule = RuleMatrix(entries)
        out.setdefault(rule.to_genome(), rule)
    return list(out.values())


# -- stationarity sweep ------------------------------------------------------------


@dataclass
class SweepEntry:
    rule: RuleMatrix
    histogram: dict


@dataclass
class SweepReport:
    """Class census over rules sampled from a reduced set."""

    entries: list

    def total_histogram(self) -> dict:
        total: dict[str, int] = {}
        for entry in self.entries:
            for cls, n in entry.histogram.items():
                total[cls] = total.get(cls, 0) + n
        return total

    def mobile_count(self) -> int:
        total = self.total_histogram()
        return total.get("Glider", 0) + total.get("PufferTrain", 0)

    def to_csv(self) -> str:
        classes = ["StillLife", "Oscillator", "Glider", "PufferTrain", "Unresolved"]
        lines = ["rule," + ",".join(classes)]
        for e in self.entries:
            lines.append(
                e.rule.to_genome() + "," + ",".join(str(e.histogram.get(c, 0)) for c in classes)
            )
        return "\n".join(lines) + "\n"


def stationarity_sweep(
    rset: ReducedRuleSet,
    cfg: FitnessConfig,
    rng: np.random.Generator,
    n_rules: int = 20,
) -> SweepReport:
    """Sample rules from the class and census what their soups settle into.

    Each sampled rule runs ``cfg.trials`` random initial configurations; all
    tracked localizations of the trailing window are classified and counted.
    """
    rules = sample_rules(rset, n_rules, rng)
    entries = []
    for rule in rules:
        hist: dict[str, int] = {}
        seeds = rng.integers(0, 2**63, size=cfg.trials)
        for seed in seeds:
            grid = random_patch_grid(cfg, np.random.default_rng(int(seed)))
            traj = run(grid, rule, cfg.steps, keep_last=cfg.window)
            for loc in track(traj, p_max=cfg.p_max):
                hist[loc.loc_class] = hist.get(loc.loc_class, 0) + 1
        entries.append(SweepEntry(rule, hist))
    return SweepReport(entries)


# -- bundled reference tables -------------------------------------------------------


def _fixture_text(name: str) -> str:
    from importlib.resources import files

    return files("hexreact").joinpath("fixtures", name).read_text()


def reference_likelihoods() -> LikelihoodMatrices:
    """The bundled reference likelihood tables (2-decimal precision)."""
    return LikelihoodMatrices.from_csv(_fixture_text("reference_likelihoods.csv"))


def reference_reduced_set() -> ReducedRuleSet:
    """The bundled reference reduced rule table."""
    return ReducedRuleSet.from_csv(_fixture_text("reference_reduced_set.csv"))


def bundled_glider_rule() -> RuleMatrix:
    """The bundled rule with a verified glider (found by guided search)."""
    from .rules import parse_rules

    rules = parse_rules(_fixture_text("glider_rule.txt"))
    if len(rules) != 1:
        raise ValueError("glider_rule.txt must hold exactly one rule")
    return rules[0]


def bundled_glider_seed() -> Grid:
    """A lone seed that travels as a clean glider under the bundled rule."""
    return Grid.from_text(_fixture_text("glider_seed.txt"))
