"""
Path helpers and output filename conventions for ssicert.

Naming convention for output files:
    [{prefix}_]{stem}_{kind}[_{qualifier}][_{suffix}].{ext}

Examples:
    certification_timeseries_n100000_s7.csv          # simulate, N=1e5, seed 7
    certification_model_nx2_m4.json                   # identify, order 2, depth 4
    bounds_certification_m4_n100000_c0.9518.json
    montecarlo_slow_pole_r200_s0.json
    certification_variance_n10000_s0_predicted.txt
"""

from pathlib import Path
from typing import Optional


def get_project_root() -> Path:
    """
    Return the repository root directory.

    Walks up from this file (ssicert/utils/paths.py) to find the root,
    identified by the presence of pyproject.toml.
    """
    candidate = Path(__file__).resolve().parent
    while candidate != candidate.parent:
        if (candidate / "pyproject.toml").exists():
            return candidate
        candidate = candidate.parent
    return Path(__file__).resolve().parent.parent.parent


def get_data_dir() -> Path:
    """Return the root-level data/ directory."""
    return get_project_root() / "data"


def get_models_dir() -> Path:
    """Return data/models/, where the reference system documents live."""
    return get_data_dir() / "models"


def get_output_dir(kind: str) -> Path:
    """
    Return {output_dir}/{kind}/, creating it if needed.

    The base is SSICERT_OUTPUT_DIR when set, otherwise data/output.

    Args:
        kind: One of 'timeseries', 'models', 'bounds', 'montecarlo', 'responses'.
    """
    from ssicert.utils.config import load_settings
    base = load_settings().output_dir or (get_data_dir() / "output")
    path = Path(base) / kind
    path.mkdir(parents=True, exist_ok=True)
    return path


def make_output_filename(
    stem: str,
    kind: str,
    ext: str,
    qualifier: Optional[str] = None,
    prefix: Optional[str] = None,
    suffix: Optional[str] = None,
) -> str:
    """
    Build a descriptive output filename.

    Args:
        stem:      Base name, typically the model or data file stem.
        kind:      Artifact kind ('timeseries', 'model', 'response', ...).
        ext:       File extension without leading dot.
        qualifier: Optional parameter tag (see the *_qualifier helpers).
        prefix:    Optional filename prefix (e.g. 'bounds', 'montecarlo').
        suffix:    Optional trailing tag (e.g. 'error').

    Returns:
        Filename string, e.g. 'certification_model_nx2_m4.json'
    """
    ext = ext.lstrip(".")
    parts = []
    if prefix:
        parts.append(prefix)
    parts.append(stem)
    if kind:
        parts.append(kind)
    if qualifier:
        parts.append(qualifier)
    if suffix:
        parts.append(suffix)
    return "_".join(parts) + f".{ext}"


def run_qualifier(n: int, seed: Optional[int] = None) -> str:
    """
    Sample count and seed tag.

    Examples:
        (100000, 7) -> 'n100000_s7'
        (2500, None) -> 'n2500'
    """
    tag = f"n{n}"
    return tag if seed is None else f"{tag}_s{seed}"


def order_qualifier(n_x: int, m: int) -> str:
    """Example: (2, 4) -> 'nx2_m4'"""
    return f"nx{n_x}_m{m}"


def confidence_qualifier(confidence: float) -> str:
    """Example: 0.9518 -> 'c0.9518'"""
    return f"c{confidence:.4g}"
