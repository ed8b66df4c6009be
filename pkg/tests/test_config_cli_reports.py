import json
import pathlib
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from levyfpe.cli import main
from levyfpe.config import ConfigError, parse_config
from levyfpe.experiments import build_model, run
from levyfpe.reports import ReportRecord, ResultTable, emit, parse_report

FPE_CFG = """\
[experiment]
t = 1.0
max_residual = 1e-6

[triplet]
A = 0.5
atoms = 1.0:1.0

[model]
noise = constant
noise_coeffs = 1.0

[series]
K_max = 40
"""


def _write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# ------------------------------------------------------------------ parsing
def test_defaults_filled_in():
    cfg = parse_config("counterexample", "[series]\nK_max = 100\n")
    assert cfg["experiment"]["x"] == 2.0
    assert cfg["triplet"]["atoms"] == ((1.0, 1.0),)
    assert cfg["series"]["K_max"] == 100


@pytest.mark.parametrize("text,line,needle", [
    ("[series]\nK_max = 100\nbogus = 1\n", 3, "unknown key"),
    ("[series]\nK_max = 100\n\n[nope]\nx = 1\n", 4, "unknown section"),
    ("[triplet]\nA = -1\n", 2, "A"),
    ("[series]\nK_max = 171\n", 2, "K_max"),
    ("[sim]\nn_paths = many\n", 2, "n_paths"),
    ("[triplet]\natoms = 1.0:1.0, 1.0:2.0\n", 2, "distinct"),
    ("[triplet]\natoms = 0.5\n", 2, "z:w"),
    ("[grid]\nlo = 3\nhi = -3\n", 3, "lo < hi"),
    ("[sim]\ndt = 2\nt_end = 1\n", 2, "dt"),
])
def test_parse_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(ConfigError) as e:
        parse_config("simulate", text)
    msg = str(e.value)
    assert msg.startswith(f"line {line}:") and needle in msg


def test_empty_document_rejected():
    with pytest.raises(ConfigError, match="empty"):
        parse_config("simulate", "")
    with pytest.raises(ConfigError):
        parse_config("simulate", "# only a comment\n")


def test_key_outside_section_rejected():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("simulate", "x = 1\n")


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        parse_config("nonsense", "[series]\n")


@pytest.mark.parametrize("noise,coeffs", [("constant", "1, 2"), ("linear", "1, 2, 3")])
def test_noise_coefficient_length_checked(noise, coeffs):
    cfg = parse_config("simulate", f"[model]\nnoise = {noise}\nnoise_coeffs = {coeffs}\n")
    with pytest.raises(ConfigError):
        build_model(cfg)


def test_linear_noise_coefficients_are_ascending():
    cfg = parse_config("simulate", "[model]\nnoise = linear\nnoise_coeffs = 0.5, -2\n")
    m = build_model(cfg)
    assert m.noise_intensity(3.0, 0.0) == 0.5 - 6.0


# ------------------------------------------------------------------ reports
def _counterexample_report():
    return run(parse_config("counterexample", "[series]\nK_max = 100\n"))


def test_counterexample_table():
    rep = _counterexample_report()
    t = rep.table("counterexample_report")
    row = t.rows[t.column("x").index(2.0)]
    assert row[1] == pytest.approx(math.exp(-1), abs=1e-12)
    assert row[2] == 0.0 and row[4] == "converged"
    assert rep.verdicts["inequivalent_outside_support"] is True


def test_csv_header():
    out = emit(_counterexample_report(), "csv").decode()
    assert out.splitlines()[0] == "x,exact,series,gap,verdict"
    assert len(out.splitlines()) == 62


def test_json_fields_and_order():
    doc = json.loads(emit(_counterexample_report(), "json"))
    assert list(doc)[:4] == ["experiment", "version", "seed", "inputs"]
    assert {"experiment", "rows", "seed", "version"} <= set(doc)
    assert "wall_clock" not in doc
    assert all("op" in t for t in doc["rows"])


def test_json_round_trip_bit_exact():
    rep = _counterexample_report()
    back = parse_report(emit(rep, "json"))
    for a, b in zip(rep.tables, back.tables):
        assert a.op == b.op and a.columns == b.columns
        for ra, rb in zip(a.rows, b.rows):
            for va, vb in zip(ra, rb):
                if isinstance(va, float):
                    assert math.copysign(1, va) == math.copysign(1, vb) and (
                        va == vb or (math.isnan(va) and math.isnan(vb)))
                else:
                    assert va == vb
    assert emit(back, "json") == emit(rep, "json")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False), min_size=1, max_size=20))
def test_round_trip_arbitrary_floats(values):
    t = ResultTable("op", ["v"])
    for v in values:
        t.add(v)
    rep = ReportRecord("simulate", {}, [t], {}, 0, "0")
    back = parse_report(emit(rep, "json"))
    assert [r[0] for r in back.tables[0].rows] == values


def test_row_width_enforced():
    with pytest.raises(ValueError):
        ResultTable("op", ["a", "b"]).add(1.0)


def test_timing_only_on_request():
    doc = json.loads(emit(_counterexample_report(), "json", timing=True))
    assert doc["wall_clock"] >= 0


# ------------------------------------------------------------------ CLI
def test_cli_counterexample_csv(tmp_path, capsysbinary):
    cfg = _write(tmp_path, "[series]\nK_max = 100\n")
    assert main(["counterexample", "--config", cfg, "--format", "csv"]) == 0
    out = capsysbinary.readouterr().out.decode()
    assert out.startswith("x,exact,series,gap,verdict\n")
    assert "2.0,0.36787944117144233,0.0,0.36787944117144233,converged" in out


def test_cli_empty_config_is_usage_error(tmp_path):
    assert main(["simulate", "--config", _write(tmp_path, "")]) == 2


def test_cli_missing_config_flag_is_usage_error():
    assert main(["simulate"]) == 2


def test_cli_bad_key_reports_line(tmp_path, capsys):
    cfg = _write(tmp_path, "[sim]\nn_paths = 10\nwidth = 3\n")
    assert main(["simulate", "--config", cfg]) == 2
    assert "line 3" in capsys.readouterr().err


def test_cli_fpe_residual(tmp_path):
    out = tmp_path / "r.json"
    assert main(["fpe-residual", "--config", _write(tmp_path, FPE_CFG), "--out", str(out)]) == 0
    doc = json.loads(out.read_bytes())
    assert doc["verdicts"]["max_residual"] < 1e-6
    assert doc["rows"][0]["op"] == "fpe_residual"


def test_cli_experiment_failure_exit_status(tmp_path, capsys):
    text = FPE_CFG.replace("t = 1.0", "t = 0.05\nrequire_converged = true")
    assert main(["fpe-residual", "--config", _write(tmp_path, text), "--out",
                 str(tmp_path / "o.json")]) == 1
    assert "did not converge" in capsys.readouterr().err


def test_cli_surfaces_simulation_errors(tmp_path, capsys):
    text = ("[experiment]\nx = 10\n[model]\nnoise = polynomial\nnoise_coeffs = 0, 0, 1\n"
            "[triplet]\natoms = 1.0:50\n[sim]\nn_paths = 50\n")
    with pytest.warns(RuntimeWarning):
        assert main(["simulate", "--config", _write(tmp_path, text)]) == 1
    assert "SimulationOverflow" in capsys.readouterr().err


@pytest.mark.parametrize("experiment,text", [
    ("counterexample", "[series]\nK_max = 100\n"),
    ("simulate", "[sim]\nn_paths = 70000\nseed = 99\n[experiment]\nx = 0.5\n"),
    ("dynkin-check", "[sim]\nn_paths = 70000\n"),
    ("growth-fit", "[test_function]\nfamily = cosine\nomega = 2\n"),
])
def test_output_byte_identical_across_runs_and_threads(tmp_path, experiment, text):
    cfg = _write(tmp_path, text)
    outs = []
    for threads in ("1", "1", "3"):
        o = tmp_path / f"o{len(outs)}.json"
        assert main([experiment, "--config", cfg, "--threads", threads, "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_flag_overrides_config(tmp_path):
    cfg = _write(tmp_path, "[sim]\nn_paths = 1000\nseed = 1\n[experiment]\nx = 0.5\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["simulate", "--config", cfg, "--seed", "7", "--out", str(a)])
    main(["simulate", "--config", cfg, "--out", str(b)])
    da, db = json.loads(a.read_bytes()), json.loads(b.read_bytes())
    assert da["seed"] == 7 and db["seed"] == 1
    assert da["inputs"]["sim"]["seed"] == 7


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "[test_function]\nfamily = cosine\nomega = 0.5\n")
    r = subprocess.run([sys.executable, "-m", "levyfpe", "growth-fit", "--config", cfg],
                       capture_output=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["verdicts"]["bounded"] is True


SAMPLES = sorted((pathlib.Path(__file__).parents[1] / "configs").glob("*.ini"))


@pytest.mark.parametrize("path", SAMPLES, ids=lambda p: p.stem)
def test_shipped_sample_configs_run(path, tmp_path):
    out = tmp_path / "o.csv"
    assert main([path.stem, "--config", str(path), "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text().count("\n") > 1
