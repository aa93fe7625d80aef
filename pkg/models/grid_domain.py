# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import itertools
import numpy as np
from utils.enums import NodeKind
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

_GRID_TOL = 1e-9


def _cell_count(length, h, label):
    count = length / h
    rounded = int(round(count))
    if rounded < 2 or abs(count - rounded) > _GRID_TOL * max(1.0, count):
        raise ValueError(_("{label}: extent {length} is not a multiple of h = {h}").format(
            label=label, length=length, h=h))
    return rounded


class GridDomain:
    """
    Uniform node grid on a union of grid cells in one or two dimensions.

    A node belongs to the closure of the domain when its mask entry is set;
    a cell belongs to the domain when all of its corners do. Node weights are
    the fraction of the node-centred control volume covered by domain cells,
    so interior nodes weigh 1 and lateral boundary nodes less than 1.
    """

    def __init__(self, n, h, T, dt, origin, mask, periodic=False):
        if n not in (1, 2):
            raise ValueError(_("grid: spatial dimension must be 1 or 2, got {n}").format(n=n))
        if not h > 0 or not dt > 0 or not T > 0:
            raise ValueError(_("grid: h, dt and T must be positive"))
        if periodic and n != 1:
            raise ValueError(_("grid.periodic is only available in one dimension"))
        self.n = int(n)
        self.h = float(h)
        self.T = float(T)
        self.dt = float(dt)
        self.origin = np.asarray(origin, dtype=float).reshape(self.n)
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.ndim != self.n:
            raise ValueError(_("grid: mask dimension does not match n"))
        self.periodic = bool(periodic)
        steps = self.T / self.dt
        self.steps = int(round(steps))
        if self.steps < 1 or abs(steps - self.steps) > _GRID_TOL * max(1.0, steps):
            raise ValueError(_("grid: T = {T} is not a multiple of dt = {dt}").format(T=T, dt=dt))
        self._build()

    @classmethod
    def interval(cls, x_min, x_max, h, T, dt, periodic=False):
        cells = _cell_count(x_max - x_min, h, "grid.domain.bounds")
        nodes = cells if periodic else cells + 1
        return cls(1, h, T, dt, [x_min], np.ones(nodes, dtype=bool), periodic=periodic)

    @classmethod
    def rectangle(cls, bounds, h, T, dt):
        (x0, x1), (y0, y1) = bounds
        nx = _cell_count(x1 - x0, h, "grid.domain.bounds[0]")
        ny = _cell_count(y1 - y0, h, "grid.domain.bounds[1]")
        return cls(2, h, T, dt, [x0, y0], np.ones((nx + 1, ny + 1), dtype=bool))

    @classmethod
    def from_mask(cls, mask, h, T, dt, origin=None):
        mask = np.asarray(mask, dtype=bool)
        if origin is None:
            origin = [0.0] * mask.ndim
        return cls(mask.ndim, h, T, dt, origin, mask)

    def _build(self):
        self.shape = self.mask.shape
        axes = [self.origin[d] + self.h * np.arange(self.shape[d]) for d in range(self.n)]
        self.coords = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
        self.times = self.dt * np.arange(self.steps + 1)
        if self.periodic:
            self.cell_mask = self.mask.copy()
            self.weights = self.mask.astype(float)
            self.interior = self.mask.copy()
        else:
            self.cell_mask = self._cells_inside()
            self.weights = self._node_weights()
            self.interior = self.mask & (self.weights >= 1.0)
        self.lateral = self.mask & ~self.interior
        self.node_count = int(np.prod(self.shape))

    def _cells_inside(self):
        m = self.mask
        if self.n == 1:
            return m[:-1] & m[1:]
        return m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]

    def _node_weights(self):
        padded = np.pad(self.cell_mask.astype(float), 1)
        total = np.zeros(self.shape)
        for offsets in itertools.product((0, 1), repeat=self.n):
            index = tuple(slice(o, o + self.shape[d]) for d, o in enumerate(offsets))
            total += padded[index]
        return np.where(self.mask, total / 2 ** self.n, 0.0)

    @property
    def cell_volume(self):
        return self.h ** self.n

    @property
    def measure_weights(self):
        return self.weights * self.cell_volume

    def classify_nodes(self):
        """Space-time classification of every (level, node) pair."""
        kinds = np.full((self.steps + 1,) + self.shape, int(NodeKind.EXTERIOR), dtype=np.int8)
        kinds[:, self.interior] = int(NodeKind.INTERIOR)
        kinds[0, self.interior] = int(NodeKind.INITIAL)
        kinds[:, self.lateral] = int(NodeKind.LATERAL)
        return kinds

    def parabolic_boundary(self):
        kinds = self.classify_nodes()
        return (kinds == int(NodeKind.LATERAL)) | (kinds == int(NodeKind.INITIAL))

    def ball(self, center, radius):
        center = np.asarray(center, dtype=float).reshape(self.n)
        dist = np.sqrt(np.sum((self.coords - center) ** 2, axis=-1))
        return dist <= radius + _GRID_TOL * self.h

    def time_window(self, lower, upper):
        return (self.times >= lower - _GRID_TOL * self.dt) & (self.times <= upper + _GRID_TOL * self.dt)

    def nearest_node(self, point):
        point = np.asarray(point, dtype=float).reshape(self.n)
        index = np.rint((point - self.origin) / self.h).astype(int)
        index = np.clip(index, 0, np.asarray(self.shape) - 1)
        return tuple(int(i) for i in index)

    def elements(self):
        """
        Simplices of the domain: intervals in 1D, two triangles per cell in 2D.

        Returns (vertices[E, n+1] flat node ids, basis gradients[E, n+1, n],
        volumes[E], centroids[E, n]).
        """
        if self.n == 1:
            count = self.shape[0]
            if self.periodic:
                left = np.arange(count)
                right = (left + 1) % count
            else:
                left = np.nonzero(self.cell_mask)[0]
                right = left + 1
            vertices = np.stack([left, right], axis=1)
            grads = np.tile(np.array([[[-1.0], [1.0]]]) / self.h, (len(left), 1, 1))
            volumes = np.full(len(left), self.h)
            centroids = (self.origin[0] + self.h * (left + 0.5))[:, None]
            return vertices, grads, volumes, centroids

        ny = self.shape[1]
        ci, cj = np.nonzero(self.cell_mask)
        sw = ci * ny + cj
        se = (ci + 1) * ny + cj
        nw = ci * ny + cj + 1
        ne = (ci + 1) * ny + cj + 1
        lower = np.stack([sw, se, ne], axis=1)
        upper = np.stack([sw, ne, nw], axis=1)
        vertices = np.concatenate([lower, upper], axis=0)
        h = self.h
        grad_lower = np.array([[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]]) / h
        grad_upper = np.array([[0.0, -1.0], [1.0, 0.0], [-1.0, 1.0]]) / h
        grads = np.concatenate([np.tile(grad_lower, (len(sw), 1, 1)),
                                np.tile(grad_upper, (len(sw), 1, 1))], axis=0)
        volumes = np.full(len(vertices), 0.5 * h * h)
        flat_coords = self.coords.reshape(-1, 2)
        centroids = flat_coords[vertices].mean(axis=1)
        return vertices, grads, volumes, centroids

    def lumped_mass(self):
        vertices, _grads, volumes, _centroids = self.elements()
        share = np.repeat(volumes / (self.n + 1), self.n + 1)
        return np.bincount(vertices.ravel(), weights=share, minlength=self.node_count)

    def to_dict(self):
        return {
            "n": self.n, "h": self.h, "T": self.T, "dt": self.dt,
            "shape": list(self.shape), "origin": self.origin.tolist(), "periodic": self.periodic,
        }
