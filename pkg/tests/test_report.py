import xml.etree.ElementTree as ET

import numpy as np

from geotraj.report import heatmap_svg, line_plot_svg

NS = "{http://www.w3.org/2000/svg}"


def test_line_plot(tmp_path):
    x = np.linspace(-0.1, 0.1, 5)
    line_plot_svg(tmp_path / "a.svg", {"a & b": (x, x ** 2 + 1e-6), "c": (x, np.full(5, np.nan))},
                  title="t", xlabel="x", ylabel="y", logy=True)
    root = ET.parse(tmp_path / "a.svg").getroot()
    assert root.tag == NS + "svg"
    assert len(root.findall(f"{NS}polyline")) == 1
    assert any(t.text == "a & b" for t in root.iter(NS + "text"))


def test_heatmap_nan_cells_grey(tmp_path):
    z = np.array([[1e-3, np.nan], [1e-4, 1e-5]])
    heatmap_svg(tmp_path / "h.svg", [0.0, 0.1], [0.5, 0.6], z, log=True)
    root = ET.parse(tmp_path / "h.svg").getroot()
    fills = [r.get("fill") for r in root.iter(NS + "rect")]
    assert fills.count("#bbbbbb") == 1


def test_deterministic(tmp_path):
    z = np.random.default_rng(0).random((3, 4))
    heatmap_svg(tmp_path / "a.svg", np.arange(3), np.arange(4), z)
    heatmap_svg(tmp_path / "b.svg", np.arange(3), np.arange(4), z)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_constant_and_empty_inputs(tmp_path):
    line_plot_svg(tmp_path / "c.svg", {"flat": ([0, 1], [0.0, 0.0])})
    heatmap_svg(tmp_path / "d.svg", [0.0], [0.0], np.array([[np.nan]]))
    for name in ("c.svg", "d.svg"):
        ET.parse(tmp_path / name)
