"""Point-cloud samplers, rotations, and quantum feature encodings.

A point cloud is a small set of 3D vectors carried in both Cartesian and
spherical form. Two encoders turn points into qubits: a one-qubit Bloch
map using the spherical angles (the radius is deliberately ignored), and
a two-qubit entangling map driven by the Cartesian coordinates.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sim import Statevector, pauli_string_matrix

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)

TORUS_MAJOR_RADIUS = 1.0
TORUS_MINOR_RADIUS = 0.5


def cartesian_to_spherical(points: np.ndarray) -> np.ndarray:
    """Columns (r, theta, phi) with theta in [0, pi] and phi in [-pi, pi);
    the origin gets both angles zero."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    safe = np.where(r > 0.0, r, 1.0)
    theta = np.where(r > 0.0, np.arccos(np.clip(points[:, 2] / safe, -1.0, 1.0)), 0.0)
    phi = np.arctan2(points[:, 1], points[:, 0])
    phi = np.where(phi >= np.pi, -np.pi, phi)  # arctan2 may return +pi exactly
    return np.column_stack([r, theta, phi])


def spherical_to_cartesian(spherical: np.ndarray) -> np.ndarray:
    spherical = np.atleast_2d(np.asarray(spherical, dtype=float))
    r, theta, phi = spherical[:, 0], spherical[:, 1], spherical[:, 2]
    sin_theta = np.sin(theta)
    return np.column_stack([
        r * sin_theta * np.cos(phi),
        r * sin_theta * np.sin(phi),
        r * np.cos(theta),
    ])


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points held in both coordinate systems, kept consistent on
    construction; ``label`` is an optional class tag."""

    cartesian: np.ndarray
    spherical: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        cart = np.atleast_2d(np.asarray(self.cartesian, dtype=float))
        sph = np.atleast_2d(np.asarray(self.spherical, dtype=float))
        if cart.shape != sph.shape or cart.ndim != 2 or cart.shape[1] != 3 or cart.shape[0] < 1:
            raise ValueError("need matching (n, 3) coordinate arrays")
        if np.max(np.abs(cart - spherical_to_cartesian(sph))) > 1e-10:
            raise ValueError("cartesian and spherical coordinates disagree")
        if np.any(sph[:, 1] < 0.0) or np.any(sph[:, 1] > np.pi + 1e-12):
            raise ValueError("polar angle outside [0, pi]")
        if np.any(sph[:, 2] < -np.pi) or np.any(sph[:, 2] >= np.pi):
            raise ValueError("azimuthal angle outside [-pi, pi)")
        object.__setattr__(self, "cartesian", cart)
        object.__setattr__(self, "spherical", sph)

    @classmethod
    def from_cartesian(cls, points, label: Optional[int] = None) -> "PointCloud":
        cart = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(cart, cartesian_to_spherical(cart), label)

    @property
    def n_points(self) -> int:
        return self.cartesian.shape[0]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labelled clouds with a frozen 80/20 train/test split."""

    samples: tuple
    labels: np.ndarray
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        samples = tuple(self.samples)
        labels = np.asarray(self.labels, dtype=int)
        train = np.asarray(self.train_indices, dtype=int)
        test = np.asarray(self.test_indices, dtype=int)
        n = len(samples)
        if labels.shape != (n,) or n < 1:
            raise ValueError("labels must match the sample count")
        combined = np.sort(np.concatenate([train, test]))
        if not np.array_equal(combined, np.arange(n)):
            raise ValueError("split must partition the samples")
        if train.size != round(0.8 * n):
            raise ValueError("train split must hold 80% of the samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "train_indices", train)
        object.__setattr__(self, "test_indices", test)


def split_dataset(clouds, seed) -> Dataset:
    """Shuffle into the 80/20 split; labels come from each cloud's tag."""
    clouds = tuple(clouds)
    labels = []
    for cloud in clouds:
        assert cloud.label is not None
        labels.append(cloud.label)
    perm = np.random.default_rng(seed).permutation(len(clouds))
    n_train = round(0.8 * len(clouds))
    return Dataset(clouds, np.array(labels), perm[:n_train], perm[n_train:])


def bloch_encode(theta: float, phi: float) -> Statevector:
    """cos(theta/2)|0> + e^(i phi) sin(theta/2)|1>."""
    return Statevector([np.cos(theta / 2.0),
                        np.exp(1j * phi) * np.sin(theta / 2.0)])


def iqp_entangling_angle(x: float, y: float, z: float) -> float:
    return 2.0 / np.pi ** 2 * (np.pi - x) * (np.pi - y) * (np.pi - z)


def iqp_encode(x: float, y: float, z: float) -> Statevector:
    """Two repetitions of the entangling layer applied to |00>.

    One layer: Hadamard both qubits, phase x on qubit 0, phase y on
    qubit 1, then a controlled phase by the product angle; z enters only
    through that entangling angle.
    """
    phases = np.kron(_phase(x), _phase(y))
    entangle = np.diag([1.0, 1.0, 1.0, np.exp(1j * iqp_entangling_angle(x, y, z))])
    layer = entangle @ phases @ np.kron(_H, _H)
    state = np.zeros(4, dtype=complex)
    state[0] = 1.0
    return Statevector(layer @ layer @ state)


def _phase(angle: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * angle)]])


def bloch_product_state(cloud: PointCloud) -> Statevector:
    """One qubit per point from its angles; radii are ignored."""
    state = np.ones(1, dtype=complex)
    for _, theta, phi in cloud.spherical:
        state = np.kron(state, bloch_encode(theta, phi).amps)
    return Statevector(state)


def iqp_product_state(cloud: PointCloud) -> Statevector:
    state = np.ones(1, dtype=complex)
    for x, y, z in cloud.cartesian:
        state = np.kron(state, iqp_encode(x, y, z).amps)
    return Statevector(state)


def _torus_mean_distance(major: float, minor: float) -> float:
    # (1/2pi) integral of sqrt(major^2 + minor^2 + 2 major minor cos v) dv
    nodes, weights = np.polynomial.legendre.leggauss(200)
    v = np.pi * (nodes + 1.0)
    vals = np.sqrt(major ** 2 + minor ** 2 + 2.0 * major * minor * np.cos(v))
    return float(np.sum(weights * vals) / 2.0)


# uniform angle sampling on the (1, 0.5) torus has mean |p| != 1; this factor
# rescales it to match the unit sphere's mean point magnitude
TORUS_RESCALE = 1.0 / _torus_mean_distance(TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS)


def sample_shape_cloud(shape: str, n_points: int, seed,
                       label: Optional[int] = None) -> PointCloud:
    """Seeded surface sample: uniform on the unit sphere, or uniform in the
    two torus angles with the global magnitude rescaling."""
    assert n_points >= 1
    rng = np.random.default_rng(seed)
    if shape == "sphere":
        raw = rng.normal(size=(n_points, 3))
        points = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    elif shape == "torus":
        u = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
        v = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
        ring = TORUS_MAJOR_RADIUS + TORUS_MINOR_RADIUS * np.cos(v)
        points = np.column_stack([
            ring * np.cos(u),
            ring * np.sin(u),
            TORUS_MINOR_RADIUS * np.sin(v),
        ]) * TORUS_RESCALE
    else:
        raise ValueError(f"unknown shape {shape!r}")
    return PointCloud.from_cartesian(points, label)


def normalize_to_angle_range(dataset: Dataset) -> Dataset:
    """Affine map of each Cartesian coordinate onto [-pi/2, pi/2], fitted
    over every point in the dataset; a constant coordinate maps to zero."""
    stacked = np.vstack([cloud.cartesian for cloud in dataset.samples])
    lo = stacked.min(axis=0)
    span = stacked.max(axis=0) - lo

    def remap(points):
        out = np.zeros_like(points)
        for k in range(3):
            if span[k] > 0.0:
                out[:, k] = (points[:, k] - lo[k]) / span[k] * np.pi - np.pi / 2.0
        return out

    samples = tuple(PointCloud.from_cartesian(remap(cloud.cartesian), cloud.label)
                    for cloud in dataset.samples)
    return Dataset(samples, dataset.labels, dataset.train_indices, dataset.test_indices)


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about ``axis`` (Rodrigues form)."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    n = axis / norm
    cross = np.array([
        [0.0, -n[2], n[1]],
        [n[2], 0.0, -n[0]],
        [-n[1], n[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle) * cross + (1.0 - np.cos(angle)) * (cross @ cross)


def rotation_su2(axis, angle: float) -> np.ndarray:
    """Half-angle lift of the same rotation: encoding a rotated point equals
    applying this matrix to the encoded qubit, up to global phase."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    n = axis / norm
    generator = (n[0] * pauli_string_matrix("X")
                 + n[1] * pauli_string_matrix("Y")
                 + n[2] * pauli_string_matrix("Z"))
    return np.cos(angle / 2.0) * np.eye(2) - 1j * np.sin(angle / 2.0) * generator


def rotate_cloud(cloud: PointCloud, axis, angle: float) -> PointCloud:
    points = cloud.cartesian @ rotation_matrix(axis, angle).T
    return PointCloud.from_cartesian(points, cloud.label)


def export_clouds_csv(path, clouds) -> None:
    """One row per point (cloud_id, label, x, y, z); floats are written with
    repr so a round-trip is bit exact."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cloud_id", "label", "x", "y", "z"])
        for cloud_id, cloud in enumerate(clouds):
            label = "" if cloud.label is None else int(cloud.label)
            for x, y, z in cloud.cartesian:
                writer.writerow([cloud_id, label, repr(float(x)), repr(float(y)), repr(float(z))])


def import_clouds_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    by_cloud = {}
    labels = {}
    for row in rows:
        cloud_id = int(row["cloud_id"])
        by_cloud.setdefault(cloud_id, []).append(
            [float(row["x"]), float(row["y"]), float(row["z"])])
        labels[cloud_id] = int(row["label"]) if row["label"] else None
    return [PointCloud.from_cartesian(by_cloud[cid], labels[cid])
            for cid in sorted(by_cloud)]
