"""Circuit generation: scheduling, compilation, verification, text form."""

import numpy as np
import pytest

from bbqec import circuit, gf2
from bbqec.codes import CssCode, build_named_code


def _edge_set(code):
    edges = set()
    for r in code.retained_x:
        for d in np.flatnonzero(code.h_x.bits[r]):
            edges.add(("X", r, int(d)))
    for r in code.retained_z:
        for d in np.flatnonzero(code.h_z.bits[r]):
            edges.add(("Z", r, int(d)))
    return edges


# ---- scheduling ----


@pytest.mark.parametrize("cid", ["18-4-4-pruned", "18-6-3", "36-4-6"])
def test_schedule_covers_every_edge_exactly_once(cid):
    code = build_named_code(cid)
    sched = circuit.schedule_cz_layers(code)
    assert len(sched.layers) == 7
    seen = []
    for layer in sched.layers:
        used = set()
        for typ, row, d in layer:
            assert (typ, row) not in used, "ancilla used twice in a layer"
            assert ("data", d) not in used, "data qubit used twice in a layer"
            used.add((typ, row))
            used.add(("data", d))
        seen.extend(layer)
    assert len(seen) == len(set(seen))
    assert set(seen) == _edge_set(code)


@pytest.mark.parametrize("cid", ["18-4-4-pruned", "18-6-3", "36-4-6"])
def test_schedule_satisfies_even_crossing_rule(cid):
    # Re-derive the commutation requirement from the schedule's output
    # alone: every retained X/Z pair must cross an even number of times,
    # a crossing being a shared data qubit whose X-side CZ layer precedes
    # its Z-side CZ layer.
    code = build_named_code(cid)
    sched = circuit.schedule_cz_layers(code)
    round_of = {}
    for r, layer in enumerate(sched.layers, start=1):
        for edge in layer:
            round_of[edge] = r
    for x in code.retained_x:
        sup_x = set(np.flatnonzero(code.h_x.bits[x]))
        for z in code.retained_z:
            sup_z = set(np.flatnonzero(code.h_z.bits[z]))
            crossings = sum(
                1
                for d in sup_x & sup_z
                if round_of[("X", x, int(d))] < round_of[("Z", z, int(d))]
            )
            assert crossings % 2 == 0, (x, z)


def test_schedule_is_deterministic():
    code = build_named_code("18-4-4-pruned")
    assert circuit.schedule_cz_layers(code) == circuit.schedule_cz_layers(code)


@pytest.mark.parametrize("cid", ["18-4-4", "18-4-4-pruned"])
def test_18_qubit_codes_get_the_swept_assignment(cid):
    sched = circuit.schedule_cz_layers(build_named_code(cid))
    assert sched.term_rounds == (
        ("A", (5, 2, 1)),
        ("B", (3, 6, 4)),
        ("BT", (4, 3, 6)),
        ("AT", (1, 5, 7)),
    )


@pytest.mark.parametrize("cid", ["18-6-3", "36-4-6", "144-12-12"])
def test_unpinned_codes_fall_back_to_the_inventory_arrangement(cid):
    sched = circuit.schedule_cz_layers(build_named_code(cid))
    assert sched.term_rounds == (
        ("A", (6, 2, 7)),
        ("B", (3, 4, 5)),
        ("BT", (3, 4, 5)),
        ("AT", (1, 6, 2)),
    )


def test_explicit_arrangement_must_commute():
    code = build_named_code("18-4-4-pruned")
    bad = ((1, 2, 3), (4, 5, 6), (4, 5, 6), (1, 2, 3))
    with pytest.raises(circuit.ScheduleError):
        circuit.schedule_cz_layers(code, arrangement=bad)
    good = ((5, 2, 1), (3, 6, 4), (4, 3, 6), (1, 5, 7))
    assert (
        circuit.schedule_cz_layers(code, arrangement=good)
        == circuit.schedule_cz_layers(code)
    )


def test_single_weight6_check_schedules_sequentially():
    one = CssCode(
        name="one-z-check",
        n=6,
        h_x=gf2.zeros(0, 6),
        h_z=gf2.from_rows([[1, 1, 1, 1, 1, 1]]),
        retained_x=(),
        retained_z=(0,),
    )
    sched = circuit.schedule_cz_layers(one)
    assert [len(layer) for layer in sched.layers] == [1, 1, 1, 1, 1, 1, 0]
    circ = circuit.build_syndrome_circuit(one, 2)
    assert circuit.verify_circuit(circ, one, preparations=8).ok


def test_schedule_rejects_plain_matrices_with_both_types():
    h = gf2.from_rows([[1, 1, 1, 1, 1, 1]])
    code = CssCode(
        name="no-structure",
        n=6,
        h_x=h,
        h_z=h,
        retained_x=(0,),
        retained_z=(0,),
    )
    with pytest.raises(circuit.ScheduleError):
        circuit.schedule_cz_layers(code)


# ---- compiled circuit structure ----


def test_pruned_18_cycle_gate_counts():
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(code, 3, count_hadamards_as_paper=True)
    for c in range(3):
        assert circ.count_gates("CZ", cycle=c) == 84
        assert circ.count_gates("H", cycle=c) == 78
        assert circ.count_gates("M", cycle=c) == 14
        cz_layers = [L for L in circ.cycle_layers(c) if L.kind == circuit.CZ]
        assert len(cz_layers) == 7
    assert circ.count_gates("DD") == 18 * 2
    assert circ.count_gates("RD") == 18
    assert circ.layers[-1].kind == circuit.READOUT_DATA
    assert circ.cycles == 3


def test_pruned_18_default_build_gate_counts():
    # the swept production assignment trades the 78-gate inventory for
    # its fault-signature and boundary guarantees; CZ structure is fixed
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(code, 3)
    for c in range(3):
        assert circ.count_gates("CZ", cycle=c) == 84
        assert circ.count_gates("H", cycle=c) == 86
        cz_layers = [L for L in circ.cycle_layers(c) if L.kind == circuit.CZ]
        assert len(cz_layers) == 7


def test_18_6_3_cycle_gate_counts():
    code = build_named_code("18-6-3")
    sched = circuit.schedule_cz_layers(code)
    circ = circuit.build_syndrome_circuit(code, 2, schedule=sched)
    assert circ.count_gates("CZ", cycle=0) == 72
    assert circ.count_gates("M", cycle=0) == 12

    # Independent single-qubit count: two gates per check plus two per
    # maximal X-engagement run of each data qubit.
    x_rounds = [[] for _ in range(code.n)]
    z_rounds = [[] for _ in range(code.n)]
    for r, layer in enumerate(sched.layers, start=1):
        for typ, row, d in layer:
            (x_rounds if typ == "X" else z_rounds)[d].append(r)
    expected = 2 * (len(code.retained_x) + len(code.retained_z))
    for d in range(code.n):
        prev = None
        for r in sorted(x_rounds[d]):
            if prev is None or any(prev < z < r for z in z_rounds[d]):
                expected += 2
            prev = r
    assert circ.count_gates("H", cycle=0) == expected == 72


def test_hadamard_pin_rejects_other_codes():
    code = build_named_code("18-6-3")
    with pytest.raises(circuit.CircuitBuildError):
        circuit.build_syndrome_circuit(code, 2, count_hadamards_as_paper=True)


def test_x_basis_reuses_steady_cycle_and_merges_prep():
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(
        code, 4, basis="X", count_hadamards_as_paper=True
    )
    assert circ.count_gates("H", cycle=1) == 78
    assert circ.count_gates("H", cycle=2) == 78
    # prep and readout cycles merge extra Hadamards, never duplicate them
    for c in (0, 3):
        layer0 = circ.cycle_layers(c)[0]
        qs = [q for _, (q,) in layer0.gates]
        assert len(qs) == len(set(qs))


def test_no_qubit_repeats_in_any_layer():
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(code, 2, basis="X")
    for layer in circ.layers:
        flat = [q for _, qs in layer.gates for q in qs]
        assert len(flat) == len(set(flat))


def test_build_is_idempotent():
    code = build_named_code("18-6-3")
    a = circuit.serialize_circuit(circuit.build_syndrome_circuit(code, 3, basis="X"))
    b = circuit.serialize_circuit(circuit.build_syndrome_circuit(code, 3, basis="X"))
    assert a == b


# ---- functional verification ----


@pytest.mark.parametrize("cid", ["18-4-4-pruned", "18-6-3"])
@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("t", [1, 3])
def test_verify_passes_on_generated_circuits(cid, basis, t):
    code = build_named_code(cid)
    circ = circuit.build_syndrome_circuit(code, t, basis=basis)
    report = circuit.verify_circuit(circ, code, basis=basis, preparations=10)
    assert report.ok, str(report)


def test_verify_catches_swapped_cz_layers():
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(code, 2)
    lo, hi = circ.cycle_layer_range(0)
    cz_at = [i for i in range(lo, hi) if circ.layers[i].kind == circuit.CZ]
    layers = list(circ.layers)
    # swap a left-block X round with a left-block Z round
    layers[cz_at[1]], layers[cz_at[2]] = layers[cz_at[2]], layers[cz_at[1]]
    mutated = circuit.Circuit(circ.qubit_count, tuple(layers), circ.cycle_boundaries)
    report = circuit.verify_circuit(mutated, code, preparations=5)
    assert not report.ok
    assert any("layer" in f for f in report.failures)


def test_verify_reports_prepared_parity_for_all_zeros():
    code = build_named_code("18-4-4-pruned")
    circ = circuit.build_syndrome_circuit(code, 2)
    # all-zeros input is a +1 eigenstate of every Z stabilizer; a single
    # prepared flip must show up as the parity of the touched supports
    report = circuit.verify_circuit(circ, code, preparations=30)
    assert report.ok


# ---- text form ----


def test_serialize_round_trip_multicycle():
    code = build_named_code("18-4-4-pruned")
    for basis in ("Z", "X"):
        circ = circuit.build_syndrome_circuit(code, 6, basis=basis)
        assert circuit.parse_circuit(circuit.serialize_circuit(circ)) == circ


def test_serialize_round_trip_with_empty_cz_layer():
    one = CssCode(
        name="one-z-check",
        n=6,
        h_x=gf2.zeros(0, 6),
        h_z=gf2.from_rows([[1, 1, 1, 1, 1, 1]]),
        retained_x=(),
        retained_z=(0,),
    )
    circ = circuit.build_syndrome_circuit(one, 2)
    assert circuit.parse_circuit(circuit.serialize_circuit(circ)) == circ


def test_parse_single_gate_line():
    circ = circuit.parse_circuit("CZ 3 7")
    assert circ.qubit_count == 8
    assert circ.cycle_boundaries == ()
    assert circ.layers == (circuit.GateLayer(circuit.CZ, (("CZ", (3, 7)),)),)


@pytest.mark.parametrize(
    "text,line",
    [
        ("CZ 3\nTICK", 1),
        ("H 0\nCZ 0 1\nTICK", 2),
        ("H 0\nH 0\nTICK", 2),
        ("WOBBLE 1\nTICK", 1),
        ("H 0\nCYCLE\nTICK", 2),
        ("CYCLE", 1),
        ("H 0\nTICK extra", 2),
        ("CZ 1 one\nTICK", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(circuit.CircuitParseError) as err:
        circuit.parse_circuit(text)
    assert err.value.line == line
    assert f"line {line}:" in str(err.value)


def test_comments_and_blank_lines_are_ignored():
    circ = circuit.parse_circuit("# note\n\nH 2  # trailing\nTICK\n")
    assert circ.layers[0].gates == (("H", (2,)),)


# ---- layer and circuit invariants ----


def test_gate_layer_rejects_wrong_kind_and_reuse():
    with pytest.raises(ValueError):
        circuit.GateLayer(circuit.CZ, (("H", (0,)),))
    with pytest.raises(ValueError):
        circuit.GateLayer(circuit.SINGLE_QUBIT, (("H", (0,)), ("H", (0,))))
    with pytest.raises(ValueError):
        circuit.GateLayer(circuit.CZ, (("CZ", (1, 1)),))
    with pytest.raises(ValueError):
        circuit.GateLayer("MYSTERY", ())


def test_circuit_rejects_wrong_cz_layer_count_per_cycle():
    good = circuit.GateLayer(circuit.CZ, (("CZ", (0, 1)),))
    with pytest.raises(ValueError):
        circuit.Circuit(2, (good,) * 6, (0,))
    circuit.Circuit(2, (good,) * 7, (0,))  # exactly seven is fine


def test_circuit_rejects_out_of_range_qubits():
    layer = circuit.GateLayer(circuit.SINGLE_QUBIT, (("H", (5,)),))
    with pytest.raises(ValueError):
        circuit.Circuit(5, (layer,), ())
