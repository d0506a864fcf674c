"""Run configuration: JSON map descriptions, precision, and hashing.

A config file is a JSON object.  Recognized top-level keys:

    map             description of the map to build (see below)
    pair            {"first": <map>, "second": <map>} for two-map commands
    precision_bits  working precision; the CLI flag wins over this, and the
                    GIET_PRECISION_BITS environment variable is the
                    fallback when neither is given
    depth           default renormalization depth for the run

Map descriptions by "kind":

    builtin            {"kind": "builtin", "name": "brisk-f"}
    iet                {"kind": "iet", "top": [...], "bottom": [...],
                        "lengths": {letter: "decimal string"}}
    affine             iet fields plus "slopes"; optional "rescale"
    giem               {"kind": "giem", top/bottom, "domain_lengths",
                        "image_lengths", "branches": {letter: spec}}
    conjugated-affine  {"kind": "conjugated-affine", "inner": <affine map>,
                        "outer": [[j, "amp", "phase"], ...]}

Numbers that feed the construction are decimal strings so that parsing
happens at the resolved precision, not at JSON's double precision.
"""

import hashlib
import json
import os

from mpmath import mp, mpf

from .affine import build_affine
from .builtin_maps import builtin
from .branches import CircleDiffeo
from .combinatorics import CombinatorialData
from .errors import GietError
from .giem import build_giem, conjugate

DEFAULT_PRECISION = 256
ENV_PRECISION = "GIET_PRECISION_BITS"


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise GietError("config root must be a JSON object")
    return cfg


def config_hash(cfg):
    """Stable digest of the run inputs, for provenance headers."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def resolve_precision(cfg, cli_bits=None):
    if cli_bits is not None:
        return int(cli_bits)
    if cfg and "precision_bits" in cfg:
        return int(cfg["precision_bits"])
    env = os.environ.get(ENV_PRECISION)
    if env:
        return int(env)
    return DEFAULT_PRECISION


def _permutation(spec):
    top = tuple(spec["top"])
    bottom = tuple(spec["bottom"])
    return CombinatorialData(tuple(sorted(top)), top, bottom)


def _decimal_map(obj):
    return {k: mpf(str(v)) for k, v in obj.items()}


def resolve_map(spec):
    """Build the map a description names.  Returns (map, label)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise GietError('map description needs a "kind" field')
    kind = spec["kind"]
    label = spec.get("label", kind)
    if kind == "builtin":
        f = builtin(spec["name"])
        return f, spec["name"]
    if kind == "iet":
        pi = _permutation(spec)
        lengths = _decimal_map(spec["lengths"])
        branches = {a: {"family": "affine"} for a in pi.alphabet}
        return build_giem(pi, lengths, dict(lengths), branches, label=label), label
    if kind == "affine":
        pi = _permutation(spec)
        m = build_affine(
            pi,
            _decimal_map(spec["lengths"]),
            _decimal_map(spec["slopes"]),
            rescale=bool(spec.get("rescale", False)),
        )
        return m.to_giem(), label
    if kind == "giem":
        pi = _permutation(spec)
        return build_giem(
            pi,
            _decimal_map(spec["domain_lengths"]),
            _decimal_map(spec["image_lengths"]),
            spec["branches"],
            label=label,
        ), label
    if kind == "conjugated-affine":
        inner, inner_label = resolve_map(dict(spec["inner"], kind="affine"))
        outer = CircleDiffeo([(int(j), a, p) for j, a, p in spec["outer"]])
        return conjugate(inner, outer, label=label), label
    raise GietError(f"unknown map kind {kind!r}")
