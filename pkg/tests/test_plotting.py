import numpy as np
import pytest

from beltrami_dirichlet.grid import GridSpec
from beltrami_dirichlet.plotting import PGM_LEVELS, read_pgm, solution_heatmaps, write_pgm, write_png


def test_pgm_round_trip_levels(tmp_path):
    v = np.arange(12, dtype=float).reshape(3, 4)
    img = read_pgm(write_pgm(v, tmp_path / "a.pgm"))
    assert img.shape == (3, 4)
    # top row of the image is the last grid row
    assert img[0, -1] == PGM_LEVELS and img[-1, 0] == 1


def test_pgm_masked_and_nonfinite_are_black(tmp_path):
    v = np.ones((4, 4))
    v[0, 0] = np.nan
    mask = np.ones((4, 4), bool)
    mask[3, 3] = False
    img = read_pgm(write_pgm(v, tmp_path / "b.pgm", mask))[::-1]
    assert img[0, 0] == 0 and img[3, 3] == 0
    assert np.all(img[1:3, 1:3] == 1)


def test_read_pgm_rejects_other_formats(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_text("P5\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(p)


def test_png_is_deterministic(tmp_path):
    spec = GridSpec(0j, 1.0, 16)
    v = np.abs(spec.z)
    a = write_png(v, tmp_path / "a.png", spec, "|z|")
    b = write_png(v, tmp_path / "b.png", spec, "|z|")
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert a.read_bytes() == b.read_bytes()


def test_solution_heatmaps_writes_four_panels(tmp_path):
    spec = GridSpec(0j, 1.0, 16)
    z = spec.z
    written = solution_heatmaps(tmp_path, spec, z, np.ones(z.shape), np.zeros(z.shape),
                                np.abs(z) < 1)
    names = sorted(p.name for p in written)
    assert len(names) == 8
    assert {"abs_f.pgm", "abs_f.png", "dilatation.pgm", "residual.png"} <= set(names)
