import json
import warnings

import pytest
from matplotlib.patches import Circle

from slfv_figures import FigureSpec, SchemaError, render
from slfv_figures.cli import main
from slfv_figures.render import build_figure

# events.csv of the scripted 3-event run: the third event never intersects
# the occupied region, so exactly two events are accepted and logged
SCRIPTED_EVENTS = """id,time,cx,cy,radius
0,1.0,0.5,0.0,1.0
1,2.0,2.2,0.0,1.0
"""


@pytest.fixture
def data_dir(tmp_path):
    d = tmp_path / "data"
    d.mkdir()
    return d


@pytest.fixture
def out_dir(tmp_path):
    d = tmp_path / "figs"
    d.mkdir()
    return d


def test_interface_snapshot_draws_accepted_balls_only(data_dir, out_dir):
    (data_dir / "events.csv").write_text(SCRIPTED_EVENTS)
    spec = FigureSpec(str(data_dir), "interface-snapshot", str(out_dir / "iface.png"))
    fig = build_figure(spec)
    circles = [p for p in fig.axes[0].patches if isinstance(p, Circle)]
    assert len(circles) == 2
    assert render(spec) == str(out_dir / "iface.png")
    assert (out_dir / "iface.png").stat().st_size > 0


def test_snapshot_z_order_later_on_top(data_dir):
    (data_dir / "events.csv").write_text(SCRIPTED_EVENTS)
    spec = FigureSpec(str(data_dir), "interface-snapshot", "unused.png")
    fig = build_figure(spec)
    circles = [p for p in fig.axes[0].patches if isinstance(p, Circle)]
    assert circles[1].get_zorder() > circles[0].get_zorder()


def test_sector_snapshot_needs_type_column(data_dir, out_dir):
    (data_dir / "events.csv").write_text(SCRIPTED_EVENTS)
    with pytest.raises(SchemaError):
        build_figure(FigureSpec(str(data_dir), "sector-snapshot", str(out_dir / "s.png")))
    (data_dir / "events.csv").write_text(
        "id,time,cx,cy,radius,type\n0,1.0,0.5,0.0,1.0,0\n1,2.0,2.2,0.0,1.0,1\n")
    fig = build_figure(FigureSpec(str(data_dir), "sector-snapshot", str(out_dir / "s.png")))
    assert len([p for p in fig.axes[0].patches if isinstance(p, Circle)]) == 2


def test_exponent_annotation_matches_summary_verbatim(data_dir, out_dir):
    rows = ["x,replica,abs_y_end"]
    for x in (25.0, 50.0, 100.0):
        for i in range(5):
            rows.append(f"{x},{i},{(x ** 0.5) * (0.8 + 0.1 * i)}")
    (data_dir / "exponent.csv").write_text("\n".join(rows) + "\n")
    xi = 0.5123456789
    (data_dir / "exponent_summary.json").write_text(
        json.dumps({"fits": {"xi_hat": xi}}))
    spec = FigureSpec(str(data_dir), "loglog-exponent", str(out_dir / "e.png"))
    fig = build_figure(spec)
    labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    loaded = json.loads((data_dir / "exponent_summary.json").read_text())
    assert any(str(loaded["fits"]["xi_hat"]) in lab for lab in labels)
    assert any("1/2" in lab for lab in labels)
    render(spec)
    assert (out_dir / "e.png").exists()


def test_empty_csv_renders_axes_with_warning(data_dir, out_dir):
    (data_dir / "events.csv").write_text("id,time,cx,cy,radius\n")
    spec = FigureSpec(str(data_dir), "interface-snapshot", str(out_dir / "empty.png"))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        code = main(["--in", str(data_dir), "--fig", "interface-snapshot",
                     "--out", str(out_dir / "empty.png")])
    assert code == 0
    assert (out_dir / "empty.png").exists()
    assert any("no accepted events" in str(x.message) for x in w)


def test_schema_mismatch_exits_nonzero(data_dir, out_dir, capsys):
    (data_dir / "events.csv").write_text("id,time,cx\n0,1.0,0.5\n")
    code = main(["--in", str(data_dir), "--fig", "interface-snapshot",
                 "--out", str(out_dir / "bad.png")])
    assert code != 0
    assert "lacks required columns" in capsys.readouterr().err


def test_missing_file_exits_nonzero(data_dir, out_dir, capsys):
    code = main(["--in", str(data_dir), "--fig", "gap-scaling",
                 "--out", str(out_dir / "g.png")])
    assert code != 0
    assert "missing input file" in capsys.readouterr().err


def test_never_writes_into_data_dir(data_dir):
    (data_dir / "events.csv").write_text(SCRIPTED_EVENTS)
    spec = FigureSpec(str(data_dir), "interface-snapshot", str(data_dir / "fig.png"))
    with pytest.raises(ValueError):
        render(spec)
    assert not (data_dir / "fig.png").exists()


def test_speed_gap_shape_kinds_render(data_dir, out_dir):
    (data_dir / "nu.csv").write_text(
        "x,replica,tau_halfplane,tau_point\n"
        "10.0,0,1.2,1.4\n10.0,1,1.3,1.5\n20.0,0,2.4,2.6\n20.0,1,2.5,2.8\n")
    (data_dir / "gap.csv").write_text(
        "x,replica,gap\n10.0,0,0.5\n10.0,1,0.7\n40.0,0,1.1\n40.0,1,1.3\n")
    (data_dir / "shape.csv").write_text(
        "replica,t,theta,reach\n" + "".join(
            f"0,{t},{th},{8.0 * t}\n" for t in (5.0, 10.0)
            for th in (0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469)))
    (data_dir / "shape_summary.json").write_text(json.dumps({"fits": {"nu_hat": 0.125}}))
    for kind, name in (("speed-convergence", "nu.png"), ("gap-scaling", "gap.png"),
                       ("shape-polar", "shape.svg")):
        out = out_dir / name
        assert main(["--in", str(data_dir), "--fig", kind, "--out", str(out)]) == 0
        assert out.stat().st_size > 0


def test_rerender_byte_identical(data_dir, out_dir):
    (data_dir / "events.csv").write_text(SCRIPTED_EVENTS)
    a, b = out_dir / "a.png", out_dir / "b.png"
    render(FigureSpec(str(data_dir), "interface-snapshot", str(a)))
    render(FigureSpec(str(data_dir), "interface-snapshot", str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_unknown_kind_rejected(data_dir):
    with pytest.raises(SchemaError):
        FigureSpec(str(data_dir), "pie-chart", "x.png")
