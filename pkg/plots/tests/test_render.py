import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import render_figures as rf

DATA = Path(__file__).parent / "data"

GOLDEN = {
    "scurve": "scurve.csv",
    "noise_curves": "noise_sweep.csv",
    "eta_curve": "noise_sweep.csv",
    "landscape_surface": "landscape.csv",
    "gain_profile": "frmg.csv",
}


@pytest.mark.parametrize("kind", sorted(GOLDEN))
def test_kind_renders_without_error(kind, tmp_path):
    out = tmp_path / f"{kind}.png"
    job = rf.FigureJob(inputs=[str(DATA / GOLDEN[kind])], kind=kind, output=str(out))
    rf.render(job)
    assert out.exists() and out.stat().st_size > 1000


@pytest.mark.parametrize("kind", ["scurve", "eta_curve", "noise_curves", "gain_profile"])
def test_log_y_axis_embedded(kind):
    job = rf.FigureJob(inputs=[str(DATA / GOLDEN[kind])], kind=kind, output="unused.png")
    fig = rf.build_figure(job)
    assert fig.axes[0].get_yscale() == "log"
    rf.plt.close(fig)


def test_eta_curve_linear_option():
    job = rf.FigureJob(
        inputs=[str(DATA / GOLDEN["eta_curve"])], kind="eta_curve",
        output="unused.png", log_y=False,
    )
    fig = rf.build_figure(job)
    assert fig.axes[0].get_yscale() == "linear"
    rf.plt.close(fig)


def test_landscape_has_surface_and_contours():
    job = rf.FigureJob(
        inputs=[str(DATA / "landscape.csv")], kind="landscape_surface", output="u.png"
    )
    fig = rf.build_figure(job)
    ax = fig.axes[0]
    assert ax.name == "3d"
    from mpl_toolkits.mplot3d.art3d import Poly3DCollection

    assert any(isinstance(c, Poly3DCollection) for c in ax.collections)  # surface
    assert len(ax.collections) > 1  # projected contour lines
    rf.plt.close(fig)


def test_eta_curve_plots_both_spectra():
    job = rf.FigureJob(
        inputs=[str(DATA / "filtered_compare.csv")], kind="eta_curve", output="u.png"
    )
    fig = rf.build_figure(job)
    assert len(fig.axes[0].lines) == 2
    labels = {line.get_label() for line in fig.axes[0].lines}
    assert labels == {"broadband", "perforated"}
    rf.plt.close(fig)


def test_rendering_is_deterministic(tmp_path):
    outs = []
    for name in ("a.png", "b.png"):
        out = tmp_path / name
        rf.render(rf.FigureJob(inputs=[str(DATA / "scurve.csv")], kind="scurve", output=str(out)))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_svg_output_deterministic(tmp_path):
    outs = []
    for name in ("a.svg", "b.svg"):
        out = tmp_path / name
        rf.render(rf.FigureJob(inputs=[str(DATA / "scurve.csv")], kind="scurve", output=str(out)))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_empty_table_errors_without_writing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# morsekick 0.1.0\n# x,y\n")
    out = tmp_path / "fig.png"
    job = rf.FigureJob(inputs=[str(empty)], kind="scurve", output=str(out))
    with pytest.raises(rf.TableError, match="no data rows"):
        rf.render(job)
    assert not out.exists()


def test_missing_column_names_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# morsekick 0.1.0\n# alpha,beta\n1.0,2.0\n")
    job = rf.FigureJob(inputs=[str(bad)], kind="scurve", output=str(tmp_path / "f.png"))
    with pytest.raises(rf.TableError, match="F0"):
        rf.render(job)


def test_unknown_kind_rejected():
    with pytest.raises(rf.TableError, match="kind"):
        rf.FigureJob(inputs=["x.csv"], kind="pie", output="f.png")


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "fig.png"
    code = rf.main([
        "--input", str(DATA / "scurve.csv"), "--kind", "scurve", "--output", str(out),
    ])
    assert code == 0
    assert out.exists()


def test_cli_error_exit(tmp_path, capsys):
    code = rf.main([
        "--input", str(tmp_path / "missing.csv"), "--kind", "scurve",
        "--output", str(tmp_path / "f.png"),
    ])
    assert code == 1
