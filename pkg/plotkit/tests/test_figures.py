import pytest

from plotkit.cli import main as cli_main
from plotkit.figures import (FigureSpec, SchemaError, build_figure,
                             default_zooms, load_trace, render)

from conftest import HEADER, make_synthetic_trace


def test_load_trace_reads_columns(synthetic_pair):
    tr = load_trace(synthetic_pair["proposed"])
    assert tr["t"].shape == (400,)
    assert tr["rst"].sum() == 3
    assert tr["i_base"] == pytest.approx(21.2132034, rel=1e-6)


def test_schema_error_names_offending_column(tmp_path):
    bad = tmp_path / "bad.csv"
    make_synthetic_trace(bad, n=5,
                         header=HEADER.replace("i_inv_al", "current_a"))
    with pytest.raises(SchemaError, match="i_inv_al"):
        load_trace(str(bad))


def test_schema_error_on_extra_columns(tmp_path):
    bad = tmp_path / "extra.csv"
    bad.write_text(HEADER + ",surprise\n" + ("0," * 11) + "0\n")
    with pytest.raises(SchemaError, match="surprise"):
        load_trace(str(bad))


def test_figure_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        FigureSpec(traces={}, out_path="x.png")
    with pytest.raises(ValueError):
        FigureSpec(traces={"a": "1", "b": "2", "c": "3"}, out_path="x.png")
    with pytest.raises(ValueError):
        FigureSpec(traces={"proposed": "p"}, out_path="x.png",
                   zooms=[(0.2, 0.1)])


def test_both_mode_figure_has_four_rows(synthetic_pair, tmp_path):
    spec = FigureSpec(traces=synthetic_pair,
                      out_path=str(tmp_path / "fig.png"))
    fig = build_figure(spec)
    assert len(fig.axes) == 4


def test_single_mode_figure_has_two_rows(synthetic_pair, tmp_path):
    spec = FigureSpec(traces={"proposed": synthetic_pair["proposed"]},
                      out_path=str(tmp_path / "fig.png"))
    fig = build_figure(spec)
    assert len(fig.axes) == 2


def test_zoom_panels_add_rows(synthetic_pair, tmp_path):
    spec = FigureSpec(traces=synthetic_pair,
                      out_path=str(tmp_path / "fig.png"),
                      zooms=[(0.0005, 0.0015), (0.002, 0.003)])
    fig = build_figure(spec)
    # each zoom adds one panel plus its counter twin
    assert len(fig.axes) == 4 + 2 * 2


def test_zoom_outside_range_rejected(synthetic_pair, tmp_path):
    spec = FigureSpec(traces=synthetic_pair,
                      out_path=str(tmp_path / "fig.png"),
                      zooms=[(0.0, 10.0)])
    with pytest.raises(ValueError, match="zoom window"):
        build_figure(spec)


def test_render_writes_file_and_is_deterministic(synthetic_pair, tmp_path):
    out1 = tmp_path / "a.png"
    out2 = tmp_path / "b.png"
    render(FigureSpec(traces=synthetic_pair, out_path=str(out1),
                      zooms=[(0.001, 0.002)]))
    render(FigureSpec(traces=synthetic_pair, out_path=str(out2),
                      zooms=[(0.001, 0.002)]))
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 and b1 == b2


def test_default_zooms_center_on_disturbance_edges(tmp_path):
    dt = 1.0 / 105000.0
    path = make_synthetic_trace(tmp_path / "sagged.csv", n=3000,
                                sag_rows=(500, 2200))
    zooms = default_zooms(path, half_width=1e-3)
    assert len(zooms) == 2
    assert zooms[0][0] <= 500 * dt <= zooms[0][1]
    assert zooms[1][0] <= 2200 * dt <= zooms[1][1]
    flat = make_synthetic_trace(tmp_path / "flat.csv", n=500)
    assert default_zooms(flat) == []


def test_cli_with_spec_file(synthetic_pair, tmp_path, capsys):
    spec = tmp_path / "fig.ini"
    out = tmp_path / "figs" / "case.png"
    spec.write_text(
        f"[figure]\ntitle = demo\nout = {out}\n"
        f"[traces]\ndsdu = {synthetic_pair['dsdu']}\n"
        f"proposed = {synthetic_pair['proposed']}\n"
        "[zoom.1]\nt_start = 0.001\nt_end = 0.002\n")
    assert cli_main(["plot", "--spec", str(spec)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_cli_auto_mode(synthetic_pair, tmp_path, capsys):
    import shutil
    d = tmp_path / "runs"
    d.mkdir()
    shutil.copy(synthetic_pair["dsdu"], d / "case_dsdu.csv")
    shutil.copy(synthetic_pair["proposed"], d / "case_proposed.csv")
    assert cli_main(["plot", "--scenario-dir", str(d), "--auto"]) == 0
    assert (d / "case.png").exists()


def test_cli_usage_errors(tmp_path):
    assert cli_main(["plot"]) == 1
    assert cli_main(["plot", "--scenario-dir", str(tmp_path), "--auto"]) == 1
    assert cli_main(["bogus"]) == 1
    assert cli_main(["plot", "--spec", str(tmp_path / "missing.ini")]) == 1
