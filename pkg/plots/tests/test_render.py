"""Figure rendering from synthetic experiment CSVs."""

import subprocess
import sys

import pytest

from onebit_plots.render import FigureSpec, SchemaError, render

SIMULATE_CSV = """\
snr_db,phi_analytic,phi_mc,phi_mc_stderr,phi_full_csi,phi_full_csi_stderr,rate_1,rate_2,frac_1,frac_2
0,1.1,1.099,0.002,1.2,0.002,0.6,0.5,0.56,0.44
10,3.83,3.835,0.003,3.93,0.003,1.99,1.57,0.56,0.44
20,6.9,6.905,0.004,7.1,0.004,3.6,3.0,0.57,0.43
"""

OPTIMIZE_CSV = """\
snr_db,r_1,r_2,phi_analytic,region,raw_polish_gap
0,0.9,0.5,1.1,1-2,0
10,3.4,2.2,3.83,1-2,0
20,6.2,4.6,6.9,1-2,0
"""

COMPARE_CSV = """\
snr_db,phi_bruteforce,phi_random,phi_heuristic,loss_random_percent,loss_heuristic_percent
0,1.1,1.095,1.099,0.45,0.09
10,3.84,3.82,3.83,0.52,0.26
20,6.9,6.87,6.89,0.43,0.14
"""


@pytest.mark.parametrize(
    "kind,text",
    [
        ("rate_vs_snr", SIMULATE_CSV),
        ("thresholds_vs_snr", OPTIMIZE_CSV),
        ("peak_comparison", COMPARE_CSV),
    ],
)
def test_render_each_kind(tmp_path, kind, text):
    src = tmp_path / "in.csv"
    src.write_text(text)
    out = tmp_path / f"{kind}.png"
    render(FigureSpec(input_csv=str(src), figure_kind=kind, output_image=str(out)))
    data = out.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 1000


def test_rendering_is_reproducible(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text(SIMULATE_CSV)
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    spec_a = FigureSpec(str(src), "rate_vs_snr", str(a))
    spec_b = FigureSpec(str(src), "rate_vs_snr", str(b))
    render(spec_a)
    render(spec_b)
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_is_named(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("snr_db,phi_mc\n0,1.0\n")
    with pytest.raises(SchemaError, match="phi_full_csi"):
        render(FigureSpec(str(src), "rate_vs_snr", str(tmp_path / "x.png")))
    assert not (tmp_path / "x.png").exists()


def test_threshold_columns_required(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("snr_db,phi_analytic\n0,1.0\n")
    with pytest.raises(SchemaError, match="r_1"):
        render(FigureSpec(str(src), "thresholds_vs_snr", str(tmp_path / "x.png")))


def test_empty_csv_is_rejected(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("snr_db,phi_mc,phi_full_csi\n")
    with pytest.raises(SchemaError, match="no data rows"):
        render(FigureSpec(str(src), "rate_vs_snr", str(tmp_path / "x.png")))
    src2 = tmp_path / "blank.csv"
    src2.write_text("")
    with pytest.raises(SchemaError, match="empty CSV"):
        render(FigureSpec(str(src2), "rate_vs_snr", str(tmp_path / "y.png")))


def test_unknown_kind_is_rejected(tmp_path):
    with pytest.raises(SchemaError, match="figure kind"):
        FigureSpec("x.csv", "pie_chart", "y.png")


def test_cli_exit_codes(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text(SIMULATE_CSV)
    out = tmp_path / "fig.png"
    ok = subprocess.run(
        [sys.executable, "-m", "onebit_plots.render", "rate_vs_snr", str(src), str(out)],
        capture_output=True,
        text=True,
    )
    assert ok.returncode == 0, ok.stderr
    assert out.exists()

    bad = subprocess.run(
        [sys.executable, "-m", "onebit_plots.render", "rate_vs_snr", str(tmp_path / "no.csv"), str(out)],
        capture_output=True,
        text=True,
    )
    assert bad.returncode != 0
    assert "error" in bad.stderr

    usage = subprocess.run(
        [sys.executable, "-m", "onebit_plots.render"], capture_output=True, text=True
    )
    assert usage.returncode == 2
