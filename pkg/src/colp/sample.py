from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SampleError(ValueError):
    pass


@dataclass(frozen=True)
class PairedSample:
    """n paired observations of two categorical variables, coded 1..S and 1..L.

    ``x_labels``/``y_labels`` map original level names to codes.  ``S`` and
    ``L`` default to the largest code present but may be set larger so that
    unobserved levels are kept in the model.
    """

    x: np.ndarray
    y: np.ndarray
    S: int = 0
    L: int = 0
    x_labels: dict = field(default_factory=dict)
    y_labels: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64).ravel()
        y = np.asarray(self.y, dtype=np.int64).ravel()
        if x.shape != y.shape:
            raise SampleError(f"x and y differ in length ({x.size} vs {y.size})")
        if x.size == 0:
            raise SampleError("empty sample")
        S = int(self.S) or max(int(x.max()), len(self.x_labels))
        L = int(self.L) or max(int(y.max()), len(self.y_labels))
        if x.min() < 1 or x.max() > S:
            raise SampleError(f"x codes must lie in 1..{S}")
        if y.min() < 1 or y.max() > L:
            raise SampleError(f"y codes must lie in 1..{L}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "L", L)
        if not self.x_labels:
            object.__setattr__(self, "x_labels", {str(i): i for i in range(1, S + 1)})
        if not self.y_labels:
            object.__setattr__(self, "y_labels", {str(i): i for i in range(1, L + 1)})

    @property
    def n(self) -> int:
        return int(self.x.size)

    def table(self) -> np.ndarray:
        """S x L contingency table of counts."""
        t = np.zeros((self.S, self.L), dtype=np.int64)
        np.add.at(t, (self.x - 1, self.y - 1), 1)
        return t

    def swapped(self) -> "PairedSample":
        """The same data with the roles of x and y exchanged."""
        return PairedSample(self.y, self.x, self.L, self.S, self.y_labels, self.x_labels)

    def x_names(self) -> list[str]:
        return _names(self.x_labels, self.S)

    def y_names(self) -> list[str]:
        return _names(self.y_labels, self.L)


def _names(labels: dict, size: int) -> list[str]:
    names = [str(i) for i in range(1, size + 1)]
    for name, code in labels.items():
        names[code - 1] = str(name)
    return names
