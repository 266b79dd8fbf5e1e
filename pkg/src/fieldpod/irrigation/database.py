"""Seeded crop and soil databases.

Values follow standard agronomy tables (FAO-56 style coefficients and
common volumetric soil limits).  They are replaceable data, not ground
truth: the JSON files under the device data directory win over the
packaged defaults, so a deployment can ship its own calibration.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..errors import ValidationError
from .models import CropProfile, SoilProfile

CROPS_FILENAME = "crops.json"
SOILS_FILENAME = "soils.json"


def _packaged(name: str) -> str:
    return resources.files("fieldpod.data").joinpath(name).read_text(encoding="utf-8")


def _crop_from_obj(obj: dict) -> CropProfile:
    try:
        return CropProfile(
            name=obj["name"],
            stage_len=tuple(int(n) for n in obj["stage_len"]),
            kc_ini=float(obj["kc_ini"]),
            kc_mid=float(obj["kc_mid"]),
            kc_end=float(obj["kc_end"]),
            root_depth_m=float(obj["root_depth_m"]),
            depletion_fraction_p=float(obj["depletion_fraction_p"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("crop", f"malformed crop entry {obj!r}: {exc}") from exc


def _soil_from_obj(obj: dict) -> SoilProfile:
    try:
        return SoilProfile(name=obj["name"], fc=float(obj["fc"]), wp=float(obj["wp"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("soil", f"malformed soil entry {obj!r}: {exc}") from exc


def load_crops(data_dir: str | Path | None = None) -> dict[str, CropProfile]:
    """Crop database keyed by name; data-dir file wins over packaged defaults."""
    text = None
    if data_dir is not None:
        path = Path(data_dir) / CROPS_FILENAME
        if path.exists():
            text = path.read_text(encoding="utf-8")
    if text is None:
        text = _packaged(CROPS_FILENAME)
    return {c.name: c for c in (_crop_from_obj(o) for o in json.loads(text))}


def load_soils(data_dir: str | Path | None = None) -> dict[str, SoilProfile]:
    text = None
    if data_dir is not None:
        path = Path(data_dir) / SOILS_FILENAME
        if path.exists():
            text = path.read_text(encoding="utf-8")
    if text is None:
        text = _packaged(SOILS_FILENAME)
    return {s.name: s for s in (_soil_from_obj(o) for o in json.loads(text))}


def seed_data_dir(data_dir: str | Path) -> None:
    """Materialize the packaged databases into the data directory if absent."""
    directory = Path(data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for name in (CROPS_FILENAME, SOILS_FILENAME):
        target = directory / name
        if not target.exists():
            target.write_text(_packaged(name), encoding="utf-8")
