"""Heatmaps of solution fields: plain PGM (P2) and matplotlib PNG."""
from __future__ import annotations

from pathlib import Path

import numpy as np

PGM_LEVELS = 255


def _scaled(values: np.ndarray, mask=None) -> np.ndarray:
    """Map finite masked values linearly onto 0..255; everything else is 0."""
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v)
    if mask is not None:
        ok &= np.asarray(mask, bool)
    out = np.zeros(v.shape, dtype=int)
    if not ok.any():
        return out
    lo, hi = float(v[ok].min()), float(v[ok].max())
    span = hi - lo if hi > lo else 1.0
    out[ok] = np.rint((v[ok] - lo) / span * (PGM_LEVELS - 1)).astype(int) + 1
    return np.minimum(out, PGM_LEVELS)


def write_pgm(values: np.ndarray, path, mask=None) -> Path:
    """Plain-text greymap, top row = largest y; masked-out nodes are black."""
    img = _scaled(values, mask)[::-1]
    rows = [" ".join(map(str, row)) for row in img]
    text = f"P2\n{img.shape[1]} {img.shape[0]}\n{PGM_LEVELS}\n" + "\n".join(rows) + "\n"
    path = Path(path)
    path.write_text(text)
    return path


def read_pgm(path) -> np.ndarray:
    tokens = [t for line in Path(path).read_text().splitlines()
              if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, _ = (int(t) for t in tokens[1:4])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)


def write_png(values: np.ndarray, path, spec, title: str, mask=None, cmap: str = "viridis") -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    v = np.array(values, dtype=float)
    if mask is not None:
        v = np.where(mask, v, np.nan)
    v[~np.isfinite(v)] = np.nan
    c, hw = spec.center, spec.half_width
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(v, origin="lower", cmap=cmap,
                   extent=(c.real - hw, c.real + hw, c.imag - hw, c.imag + hw))
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    path = Path(path)
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def solution_heatmaps(outdir, spec, f, K, residual, mask) -> list:
    """``|f|``, ``arg f``, ``K`` (log scale) and ``|residual|`` as PGM and PNG."""
    outdir = Path(outdir)
    with np.errstate(divide="ignore", invalid="ignore"):
        panels = {
            "abs_f": (np.abs(f), "|f|", "viridis"),
            "arg_f": (np.angle(f), "arg f", "twilight"),
            "dilatation": (np.log10(K), "log10 K", "magma"),
            "residual": (np.abs(residual), "|equation residual|", "inferno"),
        }
    written = []
    for name, (vals, title, cmap) in panels.items():
        written.append(write_pgm(vals, outdir / f"{name}.pgm", mask))
        written.append(write_png(vals, outdir / f"{name}.png", spec, title, mask, cmap))
    return written
