"""Sweep CZ round assignments for the 18-qubit production pin.

The seven-layer CZ schedule leaves real freedom: which rounds each of
the twelve polynomial terms occupies. The choice changes three things
that matter to the shipped configuration:

1. Commutation. Within a cycle every retained X/Z check pair must
   cross an even number of times or the extracted values are garbage;
   this is the hard feasibility filter (checked for the full 18-qubit
   code, which implies it for the distance-4 pruning).

2. Boundary shape. Ancilla faults between CZ rounds deposit errors on
   the data partners of the rounds still to come. Deposits landing
   after the last same-side catching round surface only in the final
   readout comparison, inflating it above the steady plateau, and the
   published detection series dips at both ends instead. Placing the
   final Z-side round at 7 while the X-side runs close earlier steers
   every Z-basis deposit into a mid-run cycle, and the X basis absorbs
   the remaining round-7 load inside its taller plateau. The exact
   per-detector series (expected_detection_series, no sampling error)
   scores each candidate: means inside the published windows and both
   boundary points below the plateau, in both memory bases, ranked by
   the worst clause margin in units of the 40,000-shot standard error.

3. Fault-signature collisions. For a poor term order two single faults
   can trip the same lone detector while flipping different logical
   observables, so no decoder can tell them apart. Candidates whose
   detector error models are collision free across cycle counts and
   bases are preferred over raw margin.

The published operation inventory (78 single-qubit gates per steady
cycle) is not reachable from this family: every shape-passing
assignment compiles to 84 or more because the basis-change runs
overlap less, and the few orders that do compile to 78 fail
commutation. The inventory arrangement stays available through
`count_hadamards_as_paper`, and the sweep reports each candidate's
compiled count for reference.

Takes a few minutes; prints the ranked survivors and the adopted pin.
Run: python3 scripts/scan_arrangements.py
"""

import itertools
import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/src")

from bbqec import circuit as circ_mod
from bbqec import noise
from bbqec.circuit import _block_shift_map, _schedule_from_rounds, build_syndrome_circuit
from bbqec.codes import build_named_code

FEASIBILITY_CODE = build_named_code("18-4-4")
PROBE = build_named_code("18-4-4-pruned")
NM = noise.NoiseModel.device_rates()

SERIES_T = 7
MEAN_TARGET = {"Z": 0.259, "X": 0.270}
MEAN_WINDOW = 0.02
# 40k-shot standard errors: one series point, and the 8-point mean
EDGE_SE = 0.0025
MEAN_SE = 0.0012
CENSUS_T = (1, 2, 3, 7)
KEEP = 40


def shape_ok(ra, rb, rbt, rat):
    left_covered = max(rbt) == 7 and max(rb) < max(rat)
    right_covered = max(rat) == 7 and max(ra) < max(rbt)
    return left_covered or right_covered


def round_set_combos():
    """Set-level walk in the scheduler's order, shape-filtered."""
    rounds = tuple(range(1, 8))
    for ra in itertools.combinations(rounds, 3):
        outside_a = tuple(r for r in rounds if r not in ra)
        for rb in itertools.combinations(outside_a, 3):
            for rbt in itertools.combinations(outside_a, 3):
                avail = tuple(r for r in rounds if r not in rb and r not in rbt)
                if len(avail) < 3:
                    continue
                for rat in itertools.combinations(avail, 3):
                    if shape_ok(ra, rb, rbt, rat):
                        yield ra, rb, rbt, rat


def make_commutes(code):
    spec = code.spec
    half = code.half
    a_maps = [_block_shift_map(spec.l, spec.m, ax, e) for ax, e in spec.a_terms]
    b_maps = [_block_shift_map(spec.l, spec.m, ax, e) for ax, e in spec.b_terms]
    comp_ab = [[b_maps[g][a_maps[a]] for g in range(3)] for a in range(3)]
    comp_ba = [[a_maps[d][b_maps[b]] for d in range(3)] for b in range(3)]
    sel = np.ix_(np.asarray(code.retained_x), np.asarray(code.retained_z))
    rows = np.arange(half)

    def commutes(ra, rb, rbt, rat):
        acc = np.zeros((half, half), dtype=np.uint8)
        for a in range(3):
            for g in range(3):
                if ra[a] < rbt[g]:
                    acc[rows, comp_ab[a][g]] ^= 1
        for b in range(3):
            for d in range(3):
                if rb[b] < rat[d]:
                    acc[rows, comp_ba[b][d]] ^= 1
        return not acc[sel].any()

    return commutes


def schedule_for(code, rounds):
    spec = code.spec
    a_maps = [_block_shift_map(spec.l, spec.m, ax, e) for ax, e in spec.a_terms]
    b_maps = [_block_shift_map(spec.l, spec.m, ax, e) for ax, e in spec.b_terms]
    inv_a = [np.argsort(p) for p in a_maps]
    inv_b = [np.argsort(p) for p in b_maps]
    return _schedule_from_rounds(code, a_maps, b_maps, inv_a, inv_b, *rounds)


def margins(rounds):
    """(worst, detail): min clause slack in MC standard-error units."""
    sched = schedule_for(PROBE, rounds)
    worst = np.inf
    detail = []
    for basis in ("Z", "X"):
        c = build_syndrome_circuit(PROBE, SERIES_T, basis=basis, schedule=sched)
        s = noise.expected_detection_series(c, NM, code=PROBE, basis=basis)
        mid = s[1:-1].mean()
        mean_slack = (MEAN_WINDOW - abs(s.mean() - MEAN_TARGET[basis])) / MEAN_SE
        first_slack = (mid - s[0]) / EDGE_SE
        last_slack = (mid - s[-1]) / EDGE_SE
        worst = min(worst, mean_slack, first_slack, last_slack)
        detail.append(
            f"{basis}: mean={s.mean():.4f} first-mid={s[0]-mid:+.4f} "
            f"last-mid={s[-1]-mid:+.4f}"
        )
    return worst, "  ".join(detail)


def collision_groups(rounds):
    sched = schedule_for(PROBE, rounds)
    total = 0
    for t in CENSUS_T:
        for basis in ("Z", "X"):
            c = build_syndrome_circuit(PROBE, t, basis=basis, schedule=sched)
            dem = noise.build_dem(c, NM, basis=basis, code=PROBE)
            total += len(dem.collisions())
    return total


def hadamards_per_cycle(rounds):
    sched = schedule_for(PROBE, rounds)
    c = build_syndrome_circuit(PROBE, 3, schedule=sched)
    lo, hi = c.cycle_layer_range(1)
    return sum(
        1
        for L in c.layers[lo:hi]
        if L.kind == circ_mod.SINGLE_QUBIT
        for g in L.gates
        if g[0] == "H"
    )


def main():
    commutes = make_commutes(FEASIBILITY_CODE)
    t0 = time.time()
    seen = 0
    ranked = []
    for set_combo in round_set_combos():
        for ra in itertools.permutations(set_combo[0]):
            for rb in itertools.permutations(set_combo[1]):
                for rbt in itertools.permutations(set_combo[2]):
                    for rat in itertools.permutations(set_combo[3]):
                        rounds = (ra, rb, rbt, rat)
                        if not commutes(*rounds):
                            continue
                        seen += 1
                        w, rep = margins(rounds)
                        ranked.append((w, rounds, rep))
                        if seen % 250 == 0:
                            ranked.sort(key=lambda x: -x[0])
                            del ranked[KEEP:]
                            print(
                                f"... {seen} commuting scored, "
                                f"{time.time()-t0:.0f}s",
                                flush=True,
                            )
    ranked.sort(key=lambda x: -x[0])
    del ranked[KEEP:]
    print(f"\n{seen} commuting candidates ({time.time()-t0:.0f}s); "
          f"top {KEEP} censused:")
    winner = None
    for w, rounds, rep in ranked:
        g = collision_groups(rounds)
        h = hadamards_per_cycle(rounds)
        mark = ""
        if g == 0 and winner is None:
            winner = rounds
            mark = "  <= pin"
        print(f"  {w:+.2f}se collisions={g:<3d} H/cycle={h}  {rounds}{mark}",
              flush=True)
    print(f"\npin: {winner}  ({time.time()-t0:.0f}s)")


if __name__ == "__main__":
    main()
