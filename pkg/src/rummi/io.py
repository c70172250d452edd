"""JSON file formats: detections, confidences, tile-id sets.

All files carry ``schema_version: "1"``. Tile ids are strings on the wire
(integer ids are accepted and converted). Angles are in degrees on the
wire and radians in :class:`~rummi.clustering.DetectionBox`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .clustering import DetectionBox
from .core import N_NUMBERS, Color, ConfidenceMatrix, parse_identity

SCHEMA_VERSION = "1"
COLOR_NAMES = tuple(c.label for c in Color)


class ParseError(ValueError):
    """Malformed or schema-violating input file."""


class CrossReferenceError(ValueError):
    """Detection and confidence files disagree about tiles or images."""


def _number(value, what: str, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{what}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{what}: not finite")
    if positive and value <= 0:
        raise ParseError(f"{what}: must be positive")
    if nonneg and value < 0:
        raise ParseError(f"{what}: must be >= 0")
    return value


def _tile_id(value, what: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"{what}: tile id must be a string or integer")
    return str(value)


def _check_version(doc, what: str):
    if not isinstance(doc, dict):
        raise ParseError(f"{what}: top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"{what}: unsupported schema_version {version!r}")


def _images(doc, what: str) -> list:
    images = doc.get("images")
    if not isinstance(images, list):
        raise ParseError(f"{what}: 'images' must be a list")
    seen = set()
    for img in images:
        if not isinstance(img, dict) or "image_id" not in img:
            raise ParseError(f"{what}: every image needs an image_id")
        image_id = _tile_id(img["image_id"], f"{what} image id")
        if image_id in seen:
            raise ParseError(f"{what}: duplicate image id {image_id!r}")
        seen.add(image_id)
    return images


# ---------------------------------------------------------------------------
# detections

@dataclass(frozen=True)
class WireBox:
    id: str
    cx: float
    cy: float
    w: float
    h: float
    angle_deg: float = 0.0

    def to_box(self) -> DetectionBox:
        return DetectionBox(self.id, self.cx, self.cy, self.w, self.h, math.radians(self.angle_deg))

    @classmethod
    def from_box(cls, box: DetectionBox) -> "WireBox":
        return cls(str(box.id), box.cx, box.cy, box.width, box.height, math.degrees(box.angle))


@dataclass(frozen=True)
class DetectionImage:
    image_id: str
    boxes: tuple

    def detection_boxes(self) -> list:
        return [b.to_box() for b in self.boxes]


@dataclass(frozen=True)
class DetectionFile:
    images: tuple
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc) -> "DetectionFile":
        _check_version(doc, "detections")
        images = []
        for img in _images(doc, "detections"):
            image_id = str(img["image_id"])
            raw_boxes = img.get("boxes")
            if not isinstance(raw_boxes, list):
                raise ParseError(f"detections image {image_id!r}: 'boxes' must be a list")
            boxes, seen = [], set()
            for raw in raw_boxes:
                if not isinstance(raw, dict):
                    raise ParseError(f"detections image {image_id!r}: box must be an object")
                try:
                    box_id = _tile_id(raw["id"], f"image {image_id!r}")
                    where = f"image {image_id!r} box {box_id!r}"
                    box = WireBox(
                        id=box_id,
                        cx=_number(raw["cx"], f"{where} cx"),
                        cy=_number(raw["cy"], f"{where} cy"),
                        w=_number(raw["w"], f"{where} w", positive=True),
                        h=_number(raw["h"], f"{where} h", positive=True),
                        angle_deg=_number(raw.get("angle_deg", 0.0), f"{where} angle_deg"),
                    )
                except KeyError as exc:
                    raise ParseError(f"detections image {image_id!r}: box missing field {exc}") from None
                if box.id in seen:
                    raise ParseError(f"detections image {image_id!r}: duplicate tile id {box.id!r}")
                seen.add(box.id)
                boxes.append(box)
            images.append(DetectionImage(image_id, tuple(boxes)))
        return cls(images=tuple(images))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "images": [
                {
                    "image_id": img.image_id,
                    "boxes": [
                        {"id": b.id, "cx": b.cx, "cy": b.cy, "w": b.w, "h": b.h, "angle_deg": b.angle_deg}
                        for b in img.boxes
                    ],
                }
                for img in self.images
            ],
        }


# ---------------------------------------------------------------------------
# confidences

@dataclass(frozen=True)
class TileScores:
    color: tuple  # canonical color order
    number: tuple  # numbers 1..13
    joker: float = 0.0


def _parse_tile_scores(raw, where: str) -> TileScores:
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object")
    colors = raw.get("color")
    numbers = raw.get("number")
    if not isinstance(colors, dict) or not isinstance(numbers, dict):
        raise ParseError(f"{where}: needs 'color' and 'number' maps")
    color = [None] * len(Color)
    for name, value in colors.items():
        try:
            c = Color.parse(name)
        except ValueError:
            raise ParseError(f"{where}: unknown color {name!r}") from None
        if color[c] is not None:
            raise ParseError(f"{where}: color {c.label} given twice")
        color[c] = _number(value, f"{where} color {name}", nonneg=True)
    if any(v is None for v in color):
        missing = [Color(i).label for i, v in enumerate(color) if v is None]
        raise ParseError(f"{where}: missing color scores {missing}")
    keys = {str(n) for n in range(1, N_NUMBERS + 1)}
    if set(numbers) != keys:
        raise ParseError(f"{where}: number scores must be keyed '1'..'{N_NUMBERS}'")
    number = [_number(numbers[str(n)], f"{where} number {n}", nonneg=True) for n in range(1, N_NUMBERS + 1)]
    joker = _number(raw.get("joker", 0.0), f"{where} joker", nonneg=True)
    return TileScores(tuple(color), tuple(number), joker)


@dataclass(frozen=True)
class ConfidenceImage:
    image_id: str
    tiles: dict  # tile id -> TileScores

    def matrix(self, tile_ids) -> ConfidenceMatrix:
        """Confidence matrix for ``tile_ids`` in the given order."""
        rows = [self.tiles[str(i)] for i in tile_ids]
        return ConfidenceMatrix(
            np.array([r.color for r in rows], dtype=float).reshape(len(rows), len(Color)),
            np.array([r.number for r in rows], dtype=float).reshape(len(rows), N_NUMBERS),
            np.array([r.joker for r in rows], dtype=float),
        )


@dataclass(frozen=True)
class ConfidenceFile:
    images: tuple
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc) -> "ConfidenceFile":
        _check_version(doc, "confidences")
        images = []
        for img in _images(doc, "confidences"):
            image_id = str(img["image_id"])
            raw_tiles = img.get("tiles")
            if not isinstance(raw_tiles, dict):
                raise ParseError(f"confidences image {image_id!r}: 'tiles' must be an object")
            tiles = {
                str(tile_id): _parse_tile_scores(raw, f"image {image_id!r} tile {tile_id!r}")
                for tile_id, raw in raw_tiles.items()
            }
            images.append(ConfidenceImage(image_id, tiles))
        return cls(images=tuple(images))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "images": [
                {
                    "image_id": img.image_id,
                    "tiles": {
                        tile_id: {
                            "color": dict(zip(COLOR_NAMES, s.color)),
                            "number": {str(n): v for n, v in enumerate(s.number, start=1)},
                            "joker": s.joker,
                        }
                        for tile_id, s in img.tiles.items()
                    },
                }
                for img in self.images
            ],
        }

    @classmethod
    def from_matrices(cls, image_id: str, tile_ids, m: ConfidenceMatrix) -> "ConfidenceFile":
        tiles = {
            str(i): TileScores(tuple(map(float, m.color_conf[t])), tuple(map(float, m.number_conf[t])),
                               float(m.joker_conf[t]))
            for t, i in enumerate(tile_ids)
        }
        return cls(images=(ConfidenceImage(str(image_id), tiles),))


def cross_reference(detections: DetectionFile, confidences: ConfidenceFile) -> list:
    """Pair images by id; every detected tile must have a confidence entry."""
    by_id = {img.image_id: img for img in confidences.images}
    pairs = []
    for det in detections.images:
        conf = by_id.get(det.image_id)
        if conf is None:
            raise CrossReferenceError(f"no confidences for image {det.image_id!r}")
        missing = [b.id for b in det.boxes if b.id not in conf.tiles]
        if missing:
            raise CrossReferenceError(f"image {det.image_id!r}: no confidences for tiles {missing}")
        pairs.append((det, conf))
    return pairs


# ---------------------------------------------------------------------------
# tile-id sets (for validation)

def parse_sets(doc) -> list:
    """Sets of identities from ``{"schema_version": "1", "sets": [[...], ...]}`` or a bare list."""
    if isinstance(doc, dict):
        _check_version(doc, "sets")
        doc = doc.get("sets")
    if not isinstance(doc, list):
        raise ParseError("sets: expected a list of sets")
    out = []
    for s, tiles in enumerate(doc):
        if not isinstance(tiles, list):
            raise ParseError(f"set {s}: expected a list of tiles")
        try:
            out.append([parse_identity(t) for t in tiles])
        except (ValueError, TypeError, KeyError) as exc:
            raise ParseError(f"set {s}: {exc}") from None
    return out


# ---------------------------------------------------------------------------

def load_json(path: Union[str, Path]):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None


def load_detections(path) -> DetectionFile:
    return DetectionFile.from_dict(load_json(path))


def load_confidences(path) -> ConfidenceFile:
    return ConfidenceFile.from_dict(load_json(path))


def dump_json(doc, path=None) -> str:
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
