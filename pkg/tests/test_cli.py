"""End-to-end command tests driving main() with real files."""

import json
import re

import numpy as np
import pytest

import dynwalk.cli as cli
from dynwalk.cli import main
from dynwalk.gate_compiler import all_loops_graph, matching_graph
from dynwalk.graph_model import (
    DynamicGraph,
    Graph,
    RationalAngle,
    TimedGraph,
    parse_dynamic_graph,
    serialize_dynamic_graph,
)

AMPLITUDE = re.compile(r"([+-]?[\d.]+(?:[eE][+-]?\d+)?)([+-][\d.]+(?:[eE][+-]?\d+)?)i")


def parse_amplitude(text):
    m = AMPLITUDE.fullmatch(text.strip())
    assert m, f"not an amplitude: {text!r}"
    return complex(float(m.group(1)), float(m.group(2)))


def write_walk(path, walk):
    path.write_text(serialize_dynamic_graph(walk))
    return str(path)


def bit_flip_walk(n_vertices=2):
    mask = 1
    return DynamicGraph(
        n_vertices,
        (
            TimedGraph(matching_graph(n_vertices, mask), RationalAngle(1, 2)),
            TimedGraph(all_loops_graph(n_vertices), RationalAngle(3, 2)),
        ),
    )


def double_flip_walk():
    return DynamicGraph(
        4,
        (
            TimedGraph(matching_graph(4, 2), RationalAngle(1, 2)),
            TimedGraph(all_loops_graph(4), RationalAngle(3, 2)),
            TimedGraph(matching_graph(4, 1), RationalAngle(1, 2)),
            TimedGraph(all_loops_graph(4), RationalAngle(3, 2)),
        ),
    )


def identity_walk(n_vertices=2):
    return DynamicGraph(n_vertices, ())


# -- simulate -------------------------------------------------------------------


def test_simulate_default_state(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "x.json", bit_flip_walk())
    assert main(["simulate", walk_file]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("|0>")
    assert lines[1].startswith("|1>")
    amp0 = parse_amplitude(lines[0].split(maxsplit=1)[1])
    amp1 = parse_amplitude(lines[1].split(maxsplit=1)[1])
    assert abs(amp0) < 1e-9
    assert abs(amp1 - 1.0) < 1e-9
    assert lines[2].startswith("norm 1 (deviation")


def test_simulate_bitstring_state(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(4))
    assert main(["simulate", walk_file, "--state", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2] == "|10>  1+0i"


def test_simulate_bra_ket_state(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(2))
    assert main(["simulate", walk_file, "--state", "|1>"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "|1>  1+0i"


def test_simulate_index_state(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(3))
    assert main(["simulate", walk_file, "--state", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[2] == "|2>  1+0i"


def test_simulate_amplitude_file(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(2))
    state_file = tmp_path / "state.json"
    state_file.write_text(json.dumps([[0.6, 0.0], [0.0, 0.8]]))
    assert main(["simulate", walk_file, "--state", str(state_file)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert parse_amplitude(lines[0].split(maxsplit=1)[1]) == pytest.approx(0.6)
    assert parse_amplitude(lines[1].split(maxsplit=1)[1]) == pytest.approx(0.8j)


@pytest.mark.parametrize(
    "state",
    ["nope", "9", "101",],
)
def test_simulate_bad_state_exits_2(tmp_path, capsys, state):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(2))
    assert main(["simulate", walk_file, "--state", state]) == 2
    assert "error:" in capsys.readouterr().err


def test_simulate_bad_amplitude_file(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "hold.json", identity_walk(2))
    state_file = tmp_path / "state.json"
    state_file.write_text(json.dumps([[0.6, 0.0]]))
    assert main(["simulate", walk_file, "--state", str(state_file)]) == 2
    assert "expected a list of 2" in capsys.readouterr().err


# -- unitary --------------------------------------------------------------------


CELL = re.compile(r"(-?\d+\.\d{12})([+-]\d+\.\d{12})i")


def parse_matrix(rows):
    out = []
    for row in rows:
        cells = []
        for cell in row.split(","):
            m = CELL.fullmatch(cell)
            assert m, f"bad cell {cell!r}"
            cells.append(complex(float(m.group(1)), float(m.group(2))))
        out.append(cells)
    return np.array(out)


def test_unitary_stdout(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "x.json", bit_flip_walk())
    assert main(["unitary", walk_file]) == 0
    rows = capsys.readouterr().out.splitlines()
    u = parse_matrix(rows)
    assert np.abs(u - np.array([[0, 1], [1, 0]])).max() < 1e-9


def test_unitary_csv(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "x.json", bit_flip_walk())
    csv_file = tmp_path / "u.csv"
    assert main(["unitary", walk_file, "--csv", str(csv_file)]) == 0
    out = capsys.readouterr().out
    assert f"wrote 2x2 unitary to {csv_file}" in out
    u = parse_matrix(csv_file.read_text().splitlines())
    assert np.abs(u - np.array([[0, 1], [1, 0]])).max() < 1e-9


# -- optimize -------------------------------------------------------------------


def test_optimize_writes_output_and_report(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "in.json", double_flip_walk())
    out_file = tmp_path / "out.json"
    report_file = tmp_path / "report.json"
    code = main(
        ["optimize", walk_file, "-o", str(out_file), "--report", str(report_file)]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "graphs 4 -> 2"
    assert lines[1].startswith("time 4π -> 2π")
    assert lines[2] == "rewrites applied: 1"
    assert lines[3].startswith("phase distance to input:")
    assert lines[4] == f"wrote {out_file}"

    simplified = parse_dynamic_graph(out_file.read_text())
    assert simplified.graph_count == 2
    assert simplified.total_time() == RationalAngle(2, 1)

    report = json.loads(report_file.read_text())
    assert report["verified"] is True
    assert report["rejected"] == []
    assert report["initial"]["graphs"] == 4
    assert report["final"]["graphs"] == 2
    assert report["input"] == walk_file
    assert report["output"] == str(out_file)
    assert report["phase_distance"] < 1e-9
    assert [r["rule"] for r in report["rewrites"]] == ["COMBINE_PST"]


def test_optimize_pass_subset(tmp_path, capsys):
    walk = DynamicGraph(
        4,
        (
            TimedGraph(matching_graph(4, 1), RationalAngle(1, 2)),
            TimedGraph(matching_graph(4, 1), RationalAngle(1, 2)),
        ),
    )
    walk_file = write_walk(tmp_path / "in.json", walk)
    out_file = tmp_path / "out.json"
    assert main(["optimize", walk_file, "-o", str(out_file), "--passes", "MERGE_IDENTICAL"]) == 0
    simplified = parse_dynamic_graph(out_file.read_text())
    assert simplified.graph_count == 1


def test_optimize_unknown_pass_exits_2(tmp_path, capsys):
    walk_file = write_walk(tmp_path / "in.json", bit_flip_walk())
    out_file = tmp_path / "out.json"
    assert main(["optimize", walk_file, "-o", str(out_file), "--passes", "BOGUS"]) == 2
    err = capsys.readouterr().err
    assert "unknown passes BOGUS" in err
    assert not out_file.exists()


def test_optimize_max_iter_caps_rewrites(tmp_path, capsys):
    steps = tuple(
        TimedGraph(Graph.make(2, loops=[0]), RationalAngle(1, 2)) for _ in range(4)
    )
    walk_file = write_walk(tmp_path / "in.json", DynamicGraph(2, steps))
    out_file = tmp_path / "out.json"
    assert main(["optimize", walk_file, "-o", str(out_file), "--max-iter", "1"]) == 0
    assert parse_dynamic_graph(out_file.read_text()).graph_count == 3


def test_optimize_verification_failure_exits_1(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "phase_distance", lambda u, v: 1.0)
    walk_file = write_walk(tmp_path / "in.json", double_flip_walk())
    out_file = tmp_path / "out.json"
    assert main(["optimize", walk_file, "-o", str(out_file)]) == 1
    out = capsys.readouterr().out
    assert "verification FAILED" in out


# -- compile --------------------------------------------------------------------


def write_circuit(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_compile_single_gate(tmp_path, capsys):
    circuit_file = write_circuit(
        tmp_path / "c.json", {"n_qubits": 1, "gates": [{"kind": "X", "target": 0}]}
    )
    out_file = tmp_path / "walk.json"
    assert main(["compile", circuit_file, "-o", str(out_file)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "1 gates -> 2 graphs, total time 2π (6.2832)"
    assert lines[1].startswith("phase distance to circuit unitary:")
    assert lines[2] == f"wrote {out_file}"
    walk = parse_dynamic_graph(out_file.read_text())
    assert walk.graph_count == 2


def test_compile_parallel_h_flag(tmp_path, capsys):
    payload = {
        "n_qubits": 2,
        "gates": [{"kind": "H", "target": 0}, {"kind": "H", "target": 1}],
    }
    circuit_file = write_circuit(tmp_path / "c.json", payload)
    plain_out = tmp_path / "plain.json"
    fused_out = tmp_path / "fused.json"
    assert main(["compile", circuit_file, "-o", str(plain_out)]) == 0
    assert main(["compile", circuit_file, "-o", str(fused_out), "--parallel-h"]) == 0
    capsys.readouterr()
    assert parse_dynamic_graph(plain_out.read_text()).graph_count == 6
    assert parse_dynamic_graph(fused_out.read_text()).graph_count == 5
    assert main(["equiv", str(plain_out), str(fused_out)]) == 0


def test_compile_bad_circuit_exits_2(tmp_path, capsys):
    circuit_file = tmp_path / "c.json"
    circuit_file.write_text('{"n_qubits": 1, "gates": [{"kind": "WAT", "target": 0}]}')
    out_file = tmp_path / "walk.json"
    assert main(["compile", str(circuit_file), "-o", str(out_file)]) == 2
    assert "gates[0].kind" in capsys.readouterr().err
    assert not out_file.exists()


def test_compile_verification_failure_writes_nothing(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "phase_distance", lambda u, v: 1.0)
    circuit_file = write_circuit(
        tmp_path / "c.json", {"n_qubits": 1, "gates": [{"kind": "X", "target": 0}]}
    )
    out_file = tmp_path / "walk.json"
    assert main(["compile", circuit_file, "-o", str(out_file)]) == 1
    assert "verification FAILED, not writing output" in capsys.readouterr().out
    assert not out_file.exists()


# -- equiv ----------------------------------------------------------------------


def test_equiv_same_program(tmp_path, capsys):
    a = write_walk(tmp_path / "a.json", bit_flip_walk())
    b = write_walk(tmp_path / "b.json", bit_flip_walk())
    assert main(["equiv", a, b]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("phase distance")
    assert lines[1] == "equivalent"


def test_equiv_up_to_global_phase(tmp_path, capsys):
    minus_identity = DynamicGraph(
        2, (TimedGraph(all_loops_graph(2), RationalAngle(1, 1)),)
    )
    a = write_walk(tmp_path / "a.json", minus_identity)
    b = write_walk(tmp_path / "b.json", identity_walk(2))
    assert main(["equiv", a, b]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "equivalent"


def test_equiv_different_programs(tmp_path, capsys):
    a = write_walk(tmp_path / "a.json", bit_flip_walk())
    b = write_walk(tmp_path / "b.json", identity_walk(2))
    assert main(["equiv", a, b]) == 1
    assert capsys.readouterr().out.splitlines()[1] == "NOT equivalent"


def test_equiv_vertex_mismatch_exits_2(tmp_path, capsys):
    a = write_walk(tmp_path / "a.json", identity_walk(2))
    b = write_walk(tmp_path / "b.json", identity_walk(3))
    assert main(["equiv", a, b]) == 2
    assert "vertex counts differ" in capsys.readouterr().err


# -- stats ----------------------------------------------------------------------


def test_stats_output(tmp_path, capsys):
    walk = DynamicGraph(
        3,
        (
            TimedGraph(Graph.make(3, edges=[(0, 1)]), RationalAngle(1, 2)),
            TimedGraph(Graph.make(3, loops=[0, 2]), RationalAngle(3, 2)),
        ),
    )
    walk_file = write_walk(tmp_path / "w.json", walk)
    assert main(["stats", walk_file]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "vertices: 3"
    assert lines[1] == "graphs: 2"
    assert lines[2] == "total time: 2π (6.2832)"
    assert lines[3] == "step 0: 1 edges, 0 loops, time π/2 (1.5708), norm 1.000000, period 2π"
    assert lines[4] == "step 1: 0 edges, 2 loops, time 3π/2 (4.7124), norm 1.000000, period 2π"


def test_stats_reports_infinite_period(tmp_path, capsys):
    walk = DynamicGraph(
        5,
        (TimedGraph(Graph.make(5, edges=[(0, 1), (2, 3), (3, 4)]), RationalAngle(1, 4)),),
    )
    walk_file = write_walk(tmp_path / "w.json", walk)
    assert main(["stats", walk_file]) == 0
    line = capsys.readouterr().out.splitlines()[3]
    assert "norm 1.414214" in line
    assert line.endswith("period infinite")


# -- shared error handling --------------------------------------------------------


def test_missing_walk_file_exits_2(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "absent.json")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_malformed_walk_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_vertices": 2, "sequence": [{"edges": [], "loops": [9]}]}')
    assert main(["simulate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "missing field" in err or "out of range" in err


def test_no_command_raises_system_exit():
    with pytest.raises(SystemExit):
        main([])


def test_unknown_command_raises_system_exit():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
