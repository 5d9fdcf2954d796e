"""Raster primitives: flood fill from the frame and connected-component labeling."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

# 4-connectivity for foreground labeling avoids joining components across
# diagonal Julia filaments; the complement flood uses the dual 8-connectivity
# so that thin diagonal filaments do not spuriously enclose area.
_CROSS = ndimage.generate_binary_structure(2, 1)
_BOX = ndimage.generate_binary_structure(2, 2)


def fill_from_infinity(mask: np.ndarray) -> np.ndarray:
    """Raster filled closure: mask plus the complement pockets unreachable from the frame.

    The border cells of the raster are declared "unbounded"; any complement
    component touching them is reachable from infinity and stays unfilled.
    Idempotent and monotone in the mask.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be a 2-d boolean raster")
    comp = ~mask
    labels, n = ndimage.label(comp, structure=_BOX)
    if n == 0:
        return mask.copy()
    border = np.zeros_like(mask)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    reachable = np.unique(labels[border & comp])
    reachable = reachable[reachable > 0]
    keep = np.zeros(n + 1, dtype=bool)
    keep[reachable] = True
    return mask | ~keep[labels]


def label_by_class(classes: np.ndarray, labelable: np.ndarray) -> tuple[np.ndarray, dict[int, int]]:
    """4-connected labeling of `labelable` cells, split by the integer class field.

    Returns (labels, label_to_class); labels are 1-based and assigned in
    ascending class order then raster order, so reruns are stable. Cells with
    labelable == False get label 0.
    """
    classes = np.asarray(classes)
    labels = np.zeros(classes.shape, dtype=np.int32)
    table: dict[int, int] = {}
    next_label = 1
    for cls in np.unique(classes[labelable]):
        mask = labelable & (classes == cls)
        lab, n = ndimage.label(mask, structure=_CROSS)
        labels[mask] = lab[mask] + (next_label - 1)
        for i in range(n):
            table[next_label + i] = int(cls)
        next_label += n
    return labels, table
