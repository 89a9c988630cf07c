"""CSV, JSON and figure emission for solver and sweep runs.

Every CSV cell goes through repr() so reruns and thread counts produce
byte-identical files; figures are rendered headless and are only a
convenience view of the same data.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

SCHEMA_VERSION = 1


def _cell(v) -> str:
    return repr(float(v))


def write_solution_csv(path: str, field) -> None:
    """Long-format nodal dump, one (x, t, u) row per grid point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "t", "u"])
        for i, xv in enumerate(field.x):
            for j, tv in enumerate(field.t):
                writer.writerow([_cell(xv), _cell(tv), _cell(field.values[i, j])])


def write_green_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "xi", "t", "g", "tail_bound", "modes"])
        for r in rows:
            writer.writerow([
                _cell(r["x"]), _cell(r["xi"]), _cell(r["t"]),
                _cell(r["g"]), _cell(r["tail_bound"]), str(int(r["modes"])),
            ])


def write_sweep_csv(path: str, report) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theorem", "eps", "t", "x", "xi", "lhs", "shape", "ratio", "regime"])
        for r in report.rows:
            writer.writerow([
                r.bound, _cell(r.eps), _cell(r.t), _cell(r.x), _cell(r.xi),
                _cell(r.lhs), _cell(r.shape), _cell(r.ratio), r.regime,
            ])


def _scrub(obj):
    """Make a payload strict-JSON safe: arrays to lists, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _scrub(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_scrub(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_scrub(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path: str, payload: dict) -> None:
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    with open(path, "w") as fh:
        json.dump(_scrub(body), fh, indent=2, sort_keys=True)
        fh.write("\n")


def solution_summary(field, residual_sup: float | None = None,
                     flux_error: float | None = None) -> dict:
    out = {
        "kind": field.meta.get("kind"),
        "provenance": field.provenance,
        "a": field.params.a,
        "eps": field.params.eps,
        "nx": int(field.x.size),
        "nt": int(field.t.size),
        "T": float(field.t[-1]),
        "sup_abs": float(np.max(np.abs(field.values))),
        "final_sup_abs": float(np.max(np.abs(field.values[:, -1]))),
        "meta": {k: v for k, v in field.meta.items() if k != "velocity"},
    }
    if residual_sup is not None:
        out["residual_sup"] = float(residual_sup)
    if flux_error is not None:
        out["boundary_flux_error"] = float(flux_error)
    return out


def sweep_summary(report) -> dict:
    consts = {
        k: getattr(report.constants, k)
        for k in ("A", "B", "C", "K", "K0", "K1", "K2", "K3", "H", "H1")
        if getattr(report.constants, k) is not None
    }
    return {
        "constants": consts,
        "provenance": report.constants.provenance,
        "rows": len(report.rows),
        "meta": report.meta,
    }


# ---------------------------------------------------------------------------
# Figures.  One chart per file, data exactly as written to the CSVs.

def plot_field(path: str, field, title: str = "u(x, t)") -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(field.t, field.x, field.values, shading="auto", cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label="u")
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_profiles(path: str, field, times: list[float] | None = None) -> None:
    """A few time slices of u on one axis frame."""
    if times is None:
        idx = np.unique(np.linspace(0, field.t.size - 1, 5).astype(int))
    else:
        idx = np.unique([int(np.argmin(np.abs(field.t - tv))) for tv in times])
    fig, ax = plt.subplots(figsize=(7, 4))
    for j in idx:
        ax.plot(field.x, field.values[:, j], label=f"t = {field.t[j]:.3g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_green_rows(path: str, rows: list[dict]) -> None:
    """G against t, one line per (x, xi) pair present in the rows."""
    groups: dict[tuple[float, float], list[tuple[float, float]]] = {}
    for r in rows:
        groups.setdefault((r["x"], r["xi"]), []).append((r["t"], r["g"]))
    fig, ax = plt.subplots(figsize=(7, 4))
    for (x, xi), pts in groups.items():
        pts = sorted(pts)
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o" if len(pts) < 4 else None,
                label=f"x={x:.3g}, xi={xi:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("G")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep_ratios(path: str, report) -> None:
    """ratio against t per eps; the uniformity claim is visible flatness."""
    per_eps: dict[float, dict[float, float]] = {}
    for r in report.rows:
        if math.isfinite(r.ratio):
            best = per_eps.setdefault(r.eps, {})
            best[r.t] = max(best.get(r.t, 0.0), r.ratio)
    fig, ax = plt.subplots(figsize=(7, 4))
    for eps in sorted(per_eps, reverse=True):
        ts = sorted(per_eps[eps])
        ax.loglog(ts, [max(per_eps[eps][t], 1e-300) for t in ts], label=f"eps = {eps:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("lhs / shape")
    ax.set_title(report.meta.get("bound", ""))
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_eps_maxima(path: str, report) -> None:
    per_eps = report.meta.get("per_eps_max_ratio", {})
    eps = sorted(float(k) for k in per_eps)
    vals = [per_eps[repr(e)] for e in eps]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, [max(v, 1e-300) for v in vals], marker="o")
    ax.set_xlabel("eps")
    ax.set_ylabel("max ratio over sweep")
    ax.set_title(report.meta.get("bound", ""))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_decay(path: str, field) -> None:
    """sup_x |u - mean_x u| on a log axis, the diffusion-rate view."""
    spread = np.max(np.abs(field.values - field.values.mean(axis=0)[None, :]), axis=0)
    fig, ax = plt.subplots(figsize=(7, 4))
    keep = spread > 0
    ax.semilogy(field.t[keep], spread[keep])
    ax.set_xlabel("t")
    ax.set_ylabel("sup_x |u - mean|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
