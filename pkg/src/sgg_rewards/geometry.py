"""Bounding-box arithmetic: IoU and (normalized) L1 distance."""

from __future__ import annotations

from typing import Optional

from .graph import BBox


class MissingImageDimsError(ValueError):
    """Normalized L1 distance was requested without image dimensions."""


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two positive-area boxes, in [0, 1].

    Boxes that share only an edge or a corner (zero-area intersection)
    score 0.
    """
    ix1 = max(a.x1, b.x1)
    iy1 = max(a.y1, b.y1)
    ix2 = min(a.x2, b.x2)
    iy2 = min(a.y2, b.y2)
    iw = ix2 - ix1
    ih = iy2 - iy1
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union


def l1_distance(
    a: BBox,
    b: BBox,
    image_dims: Optional[tuple[float, float]] = None,
    *,
    normalized: bool = True,
) -> float:
    """Sum of absolute corner-coordinate differences between two boxes.

    By default each x coordinate is divided by the image width and each y
    coordinate by the image height, so the result lies in [0, 4] for
    in-image boxes and the downstream cost weights stay image-size
    invariant. Pass ``normalized=False`` for the raw pixel metric.
    """
    dx = abs(a.x1 - b.x1) + abs(a.x2 - b.x2)
    dy = abs(a.y1 - b.y1) + abs(a.y2 - b.y2)
    if not normalized:
        return dx + dy
    if image_dims is None:
        raise MissingImageDimsError("normalized L1 distance requires image dimensions")
    width, height = image_dims
    if width <= 0 or height <= 0:
        raise MissingImageDimsError(f"image dimensions must be positive, got {image_dims}")
    return dx / width + dy / height
