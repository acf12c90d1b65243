import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from itdm import __version__
from itdm.cli import main
from itdm.noisy import nitdm_fi_single, switched_fi


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return meta, list(csv.reader(io.StringIO("\n".join(body))))


SMALL = [
    ("fig2", "--grid", "3", "--N", "2", "--restarts", "2"),
    ("fig3", "--grid", "5"),
    ("fig4", "--n-max", "6", "--q", "0.9"),
    ("fig6", "--grid", "4"),
    ("fig7", "--n-max", "4", "--resolution", "64", "--q", "0.9"),
    ("table1", "--n-max", "8", "--resolution", "64", "--q", "0.95"),
    ("phase-opt", "--samples", "2", "--N", "2", "--restarts", "2"),
    ("axis-qfi", "--grid", "3"),
    ("spectrum", "--grid", "5"),
    ("small-theta", "--grid", "3", "--N", "2"),
    ("repetition-plan", "--n-total", "50", "--q", "0.9"),
]


@pytest.mark.parametrize("argv", SMALL, ids=[a[0] for a in SMALL])
def test_subcommands_emit_csv(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    meta, rows = parse_csv(out)
    assert meta[0] == f"# command: {argv[0]}"
    assert f"# version: {__version__}" in meta
    assert len(rows) >= 2
    assert all(len(r) == len(rows[0]) for r in rows)


def test_fig5_small(capsys):
    code, out, _ = run(capsys, "fig5", "--grid", "3", "--fit-points", "20")
    assert code == 0
    assert out.count("# table: ") == 3


def test_csv_values_round_trip(capsys):
    code, out, _ = run(capsys, "fig3", "--grid", "5", "--theta", "0.7")
    _, rows = parse_csv(out)
    assert rows[0][:3] == ["q", "flip", "switch"]
    for r in rows[1:]:
        q = float(r[0])
        # 17 significant digits reproduce the double exactly
        assert float(r[1]) == nitdm_fi_single(q, 0.7, 1.0)
        assert float(r[2]) == switched_fi(q, 0.7)


def test_degrees_flag(capsys):
    _, rad, _ = run(capsys, "fig3", "--grid", "4", "--theta", str(np.pi / 2))
    _, deg, _ = run(capsys, "fig3", "--grid", "4", "--theta", "90", "--degrees")
    assert parse_csv(rad)[1] == parse_csv(deg)[1]


def test_json_output(capsys):
    code, out, _ = run(capsys, "spectrum", "--grid", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["provenance"]["command"] == "spectrum" and doc["provenance"]["table"] == "spectrum"
    assert doc["columns"] == ["theta", "f_plus", "f_minus", "degenerate"]
    assert len(doc["records"]) == 4 and isinstance(doc["records"][0]["degenerate"], bool)


def test_out_directory(tmp_path, capsys):
    code, out, _ = run(capsys, "fig2", "--grid", "2", "--N", "1", "--restarts", "2", "--out", str(tmp_path))
    assert code == 0 and out == ""
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig2_all_states.csv", "fig2_difference.csv", "fig2_product.csv"]


def test_reruns_are_byte_identical(tmp_path, capsys):
    argv = ["phase-opt", "--samples", "2", "--N", "3", "--restarts", "3", "--seed", "5"]
    run(capsys, *argv, "--out", str(tmp_path / "a"))
    run(capsys, *argv, "--out", str(tmp_path / "b"))
    assert (tmp_path / "a" / "phase_opt.csv").read_bytes() == (tmp_path / "b" / "phase_opt.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ("fig4", "--q", "1.5"),
    ("fig3", "--axis", "0,0,0"),
    ("fig3", "--axis", "1,2"),
    ("fig4", "--n-max", "0"),
    ("table1", "--bogus"),
    ("fig3", "--format", "xml"),
    ("nonsense",),
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    assert exc.value.code == 2


def test_numerical_errors_exit_1(capsys):
    code, _, err = run(capsys, "fig5", "--grid", "2", "--fit-points", "5")
    assert code == 1 and err.startswith("itdm: error:")
    code, _, err = run(capsys, "fig4", "--probe", "1,1,1", "--n-max", "3")
    assert code == 1 and "norm above 1" in err


def test_acceptance_subcommand(tmp_path, capsys):
    code, _, err = run(capsys, "acceptance", "--criteria", "1", "--out", str(tmp_path))
    assert code == 0
    assert "[PASS] criterion 1" in err
    doc = json.loads((tmp_path / "acceptance.json").read_text())
    assert doc["all_passed"] and doc["criteria"][0]["number"] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "itdm", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
