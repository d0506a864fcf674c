"""Artifact writers: delimited tables, JSON summaries, and figures.

Everything numeric is written in fixed-point decimal (no exponent
notation) so the files diff cleanly and load into anything.  Each table
carries provenance comment lines: artifact version, precision, and the
hash of the config that produced it.  Figures are rendered with the Agg
backend next to the tables they illustrate; matplotlib is imported lazily
so library users who never plot never pay for it.
"""

import json

from mpmath import mp, mpf

ARTIFACT_VERSION = "1"


def fmt(value, digits=None):
    """Fixed-point decimal rendering of one cell."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, bool)):
        return str(int(value))
    x = mpf(value)
    if digits is None:
        digits = mp.dps
    return mp.nstr(x, digits, min_fixed=-mp.inf, max_fixed=mp.inf)


def standard_meta(config_digest=None, **extra):
    meta = {"artifact_version": ARTIFACT_VERSION, "precision_bits": mp.prec}
    if config_digest:
        meta["config"] = config_digest
    meta.update(extra)
    return meta


def write_csv(path, columns, rows, meta=None, digits=None):
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(cell, digits) for cell in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, type(mpf(0))):
        return fmt(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def decay_figure(path, xs, series, title, ylabel, xlabel="level"):
    """Semilog plot of one or more positive decaying sequences."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    drawn = False
    for label, values in series.items():
        pts = [(float(x), float(v)) for x, v in zip(xs, values)
               if v and float(v) > 0]
        if not pts:
            continue
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", markersize=3, linewidth=1, label=label)
        drawn = True
    if not drawn:
        plt.close(fig)
        return None
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def lengths_figure(path, history, title):
    """Per-letter interval lengths across the renormalization history."""
    letters = history[0].pi.alphabet
    xs = [st.level for st in history]
    series = {}
    for a in letters:
        series[a] = [st.lengths()[a] for st in history]
    series["interval"] = [st.interval_length for st in history]
    return decay_figure(path, xs, series, title, "length")
