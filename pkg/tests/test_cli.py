import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shearsr import cli, image
from shearsr.cli import ReportRow, RunConfig, emit_report, parse_report, run_pipeline


def test_empty_report_is_header_only():
    text, table = emit_report([])
    assert text == "image,degradation,method,psnr_db\n"
    assert table.splitlines()[0].split() == ["image", "degradation", "method", "psnr_db"]


def test_one_row():
    text, _ = emit_report([ReportRow("plane", "ds", "bicubic", 26.52597651)])
    assert text.splitlines() == ["image,degradation,method,psnr_db", "plane,ds,bicubic,26.5260"]


def test_rows_sorted_lexicographically():
    rows = [
        ReportRow("plane", "ds", "sme-wavelet", 1.0),
        ReportRow("circle", "ds+noise:7", "bicubic", 2.0),
        ReportRow("circle", "ds", "sme-shearlet", 3.0),
        ReportRow("circle", "ds", "bicubic", 4.0),
    ]
    got = [(r.image, r.degradation, r.method) for r in parse_report(emit_report(rows)[0])]
    assert got == sorted(got)


def test_infinite_psnr_round_trips():
    rows = [ReportRow("constant", "ds", m, math.inf) for m in ("bicubic", "sme-wavelet")]
    text, table = emit_report(rows)
    assert "constant,ds,bicubic,inf" in text
    assert "inf" in table
    assert parse_report(text) == rows


names = st.text(st.characters(min_codepoint=33, max_codepoint=126), min_size=1, max_size=8)
psnrs = st.one_of(st.just(math.inf), st.floats(-50, 200).map(lambda v: round(v, 4)))


@given(st.lists(st.builds(ReportRow, names, names, names, psnrs), max_size=8))
def test_round_trip(rows):
    text, _ = emit_report(rows)
    back = parse_report(text)
    assert back == sorted(rows, key=ReportRow.key)
    for a, b in zip(back, sorted(rows, key=ReportRow.key)):
        assert float(cli.format_psnr(a.psnr_db)) == pytest.approx(b.psnr_db, abs=5e-5)


def test_parse_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_report("a,b,c\n")


def test_pipeline_writes_outputs(tmp_path):
    cfg = RunConfig(inputs=["circle"], methods=["bicubic", "sme-wavelet"], degradations=["ds", "ds+noise:3"],
                    out=tmp_path, size=80, crop=(4, 6, 10, 8))
    rows, errors = run_pipeline(cfg)
    assert not errors
    assert len(rows) == 4
    out = image.load_pgm(tmp_path / "circle__ds__sme-wavelet.pgm")
    assert out.shape == (80, 80)
    assert image.load_pgm(tmp_path / "circle__ds+noise-3__bicubic__crop.pgm").shape == (8, 10)
    assert image.load_pgm(tmp_path / "circle__ds__input.pgm").shape == (40, 40)


def test_failed_row_does_not_stop_others(tmp_path):
    odd = tmp_path / "odd.pgm"
    image.save_pgm(np.zeros((5, 5)), odd)
    rows, errors = run_pipeline(RunConfig(inputs=[str(odd), "missing.pgm", "constant"], methods=["bicubic"], size=32))
    assert len(errors) == 2
    assert [r.image for r in rows] == ["constant"]
    assert rows[0].psnr_db == math.inf


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        run_pipeline(RunConfig(inputs=["plane"], methods=["nearest"]))
    with pytest.raises(ValueError):
        run_pipeline(RunConfig(inputs=["plane"], degradations=["ds+noise"]))


def test_seed_shifts_noise():
    base = dict(inputs=["circle"], methods=["bicubic"], degradations=["ds+noise:5"], size=32)
    a, _ = run_pipeline(RunConfig(**base))
    b, _ = run_pipeline(RunConfig(**base, seed=0))
    c, _ = run_pipeline(RunConfig(**base, seed=1))
    assert a == b and a != c


def test_main_end_to_end(tmp_path, capsys):
    report = tmp_path / "r.csv"
    argv = ["--input", "constant", "--input", "circle", "--size", "48", "--methods", "bicubic,sme-shearlet",
            "--degrade", "ds", "--out", str(tmp_path / "o"), "--report", str(report), "--dump-bands"]
    assert cli.main(argv) == 0
    rows = parse_report(report.read_text())
    assert len(rows) == 4
    assert {r.psnr_db for r in rows if r.image == "constant"} == {math.inf}
    assert "sme-shearlet" in capsys.readouterr().out
    assert (tmp_path / "o" / "circle__ds__sme-shearlet__weights.txt").exists()
    assert any((tmp_path / "o" / "circle__ds__bands").glob("band_*.pgm"))


def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["--input", "nope.pgm", "--methods", "bicubic"]) == 1
    assert "row aborted" in capsys.readouterr().err
    assert cli.main(["--input", "plane", "--methods", "bogus"]) == 2
    with pytest.raises(SystemExit):
        cli.main(["--input", "plane", "--crop", "1,2,3"])


def test_runs_are_byte_identical(tmp_path):
    outs = []
    for run in ("a", "b"):
        d = tmp_path / run
        assert cli.main(["--input", "parabola", "--size", "80", "--degrade", "ds+blur+noise:11",
                         "--out", str(d), "--report", str(d / "r.csv")]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
