"""Heterogeneous network model: link costs, node compute, synthetic instances."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# 1 MB/s == 1e6 bytes / 1e3 ms
BYTES_PER_MS_PER_MBPS = 1000.0


def _check_square_positive(mat: np.ndarray, name: str) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {mat.shape}")
    n = mat.shape[0]
    for i in range(n):
        for j in range(n):
            if i != j and not mat[i, j] > 0:
                raise ValidationError(f"{name} must be strictly positive off-diagonal", row=i, col=j)
    if not np.all(np.isfinite(mat[~np.eye(n, dtype=bool)])):
        raise ValidationError(f"{name} contains non-finite off-diagonal entries")


def symmetrize(raw_latency: np.ndarray, raw_bandwidth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average each link's two directions so both matrices come out symmetric."""
    lat = np.asarray(raw_latency, dtype=float)
    bw = np.asarray(raw_bandwidth, dtype=float)
    _check_square_positive(lat, "latency")
    _check_square_positive(bw, "bandwidth")
    if lat.shape != bw.shape:
        raise ValidationError(f"latency {lat.shape} and bandwidth {bw.shape} shapes differ")
    return (lat + lat.T) / 2.0, (bw + bw.T) / 2.0


@dataclass(frozen=True)
class Topology:
    """A network of nodes with per-link latency/bandwidth and per-node compute cost.

    latency_ms / bandwidth_bytes_per_ms are stored symmetrized (direction-averaged);
    diagonal entries are meaningless. compute_fwd_ms is the forward time of one
    microbatch on each node; backward time is bwd_ratio times that.
    """

    n: int
    latency_ms: np.ndarray
    bandwidth_bytes_per_ms: np.ndarray
    compute_fwd_ms: np.ndarray
    bwd_ratio: float = 2.0
    mem_capacity: int = 2

    def __post_init__(self):
        lat, bw = symmetrize(self.latency_ms, self.bandwidth_bytes_per_ms)
        object.__setattr__(self, "latency_ms", lat)
        object.__setattr__(self, "bandwidth_bytes_per_ms", bw)
        compute = np.asarray(self.compute_fwd_ms, dtype=float)
        object.__setattr__(self, "compute_fwd_ms", compute)
        if lat.shape[0] != self.n:
            raise ValidationError(f"matrix size {lat.shape[0]} does not match n={self.n}")
        if compute.shape != (self.n,):
            raise ValidationError(f"compute_fwd_ms must have one entry per node, got {compute.shape}")
        if not np.all(compute > 0):
            bad = int(np.argmin(compute))
            raise ValidationError("compute_fwd_ms must be strictly positive", row=bad)
        if self.mem_capacity < 1:
            raise ValidationError(f"mem_capacity must be >= 1, got {self.mem_capacity}")
        if not self.bwd_ratio > 0:
            raise ValidationError(f"bwd_ratio must be positive, got {self.bwd_ratio}")

    def compute_bwd_ms(self, node: int) -> float:
        return float(self.compute_fwd_ms[node]) * self.bwd_ratio

    def restrict(self, nodes: list[int]) -> "Topology":
        """Sub-topology over the given nodes, re-indexed 0..len(nodes)-1."""
        idx = np.asarray(nodes, dtype=int)
        if len(set(nodes)) != len(nodes) or idx.min() < 0 or idx.max() >= self.n:
            raise ValidationError(f"invalid node subset {nodes}")
        return Topology(
            n=len(nodes),
            latency_ms=self.latency_ms[np.ix_(idx, idx)],
            bandwidth_bytes_per_ms=self.bandwidth_bytes_per_ms[np.ix_(idx, idx)],
            compute_fwd_ms=self.compute_fwd_ms[idx],
            bwd_ratio=self.bwd_ratio,
            mem_capacity=self.mem_capacity,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "latency_ms": self.latency_ms.tolist(),
            "bandwidth_bytes_per_ms": self.bandwidth_bytes_per_ms.tolist(),
            "compute_fwd_ms": self.compute_fwd_ms.tolist(),
            "bwd_ratio": self.bwd_ratio,
            "mem_capacity": self.mem_capacity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        if "bandwidth_bytes_per_ms" in data:
            bw = np.asarray(data["bandwidth_bytes_per_ms"], dtype=float)
        elif "bandwidth_mb_per_s" in data:
            bw = np.asarray(data["bandwidth_mb_per_s"], dtype=float) * BYTES_PER_MS_PER_MBPS
        else:
            raise ValidationError("topology needs bandwidth_bytes_per_ms or bandwidth_mb_per_s")
        return cls(
            n=int(data["n"]),
            latency_ms=np.asarray(data["latency_ms"], dtype=float),
            bandwidth_bytes_per_ms=bw,
            compute_fwd_ms=np.asarray(data["compute_fwd_ms"], dtype=float),
            bwd_ratio=float(data.get("bwd_ratio", 2.0)),
            mem_capacity=int(data.get("mem_capacity", 2)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Topology":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def comm_time(topology: Topology, i: int, j: int, msg_bytes: float) -> float:
    """Transfer time in ms of msg_bytes between nodes i and j: latency + size/bandwidth."""
    if not (0 <= i < topology.n) or not (0 <= j < topology.n):
        raise ValidationError(f"node id out of range: ({i}, {j}) with n={topology.n}")
    if i == j:
        raise ValidationError(f"self-transfer {i}->{j} has no communication cost")
    if not msg_bytes > 0:
        raise ValidationError(f"msg_bytes must be positive, got {msg_bytes}")
    return float(topology.latency_ms[i, j]) + msg_bytes / float(topology.bandwidth_bytes_per_ms[i, j])


def comm_matrix(topology: Topology, msg_bytes: float) -> np.ndarray:
    """All-pairs comm_time as an n x n array (diagonal zeroed, never used)."""
    if not msg_bytes > 0:
        raise ValidationError(f"msg_bytes must be positive, got {msg_bytes}")
    bw = topology.bandwidth_bytes_per_ms.copy()
    np.fill_diagonal(bw, 1.0)
    mat = topology.latency_ms + msg_bytes / bw
    np.fill_diagonal(mat, 0.0)
    return mat


@dataclass(frozen=True)
class ModelPreset:
    """Transformer shape used only to derive message sizes and layer counts."""

    name: str
    hidden_dim: int
    n_layers: int
    context: int
    bytes_per_element: int = 2

    def __post_init__(self):
        for fname in ("hidden_dim", "n_layers", "context", "bytes_per_element"):
            if getattr(self, fname) <= 0:
                raise ValidationError(f"{fname} must be positive")

    def layers_per_stage(self, s: int) -> int:
        if s <= 0 or self.n_layers % s != 0:
            raise ValidationError(f"{self.n_layers} layers not divisible into {s} stages")
        return self.n_layers // s


PRESETS = {
    p.name: p
    for p in [
        ModelPreset("llama-50m", hidden_dim=288, n_layers=12, context=256),
        ModelPreset("llama-500m", hidden_dim=1024, n_layers=24, context=1024),
        ModelPreset("llama-1.5b", hidden_dim=2048, n_layers=24, context=4096),
        ModelPreset("llama-7b", hidden_dim=4096, n_layers=32, context=4096),
        ModelPreset("llama-8b", hidden_dim=4096, n_layers=32, context=4096),
    ]
}


def get_preset(name: str) -> ModelPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def activation_bytes(preset: ModelPreset, samples_per_microbatch: int) -> int:
    """Size of one activation message handed between stages."""
    if samples_per_microbatch <= 0:
        raise ValidationError(f"samples_per_microbatch must be positive, got {samples_per_microbatch}")
    return preset.hidden_dim * preset.context * samples_per_microbatch * preset.bytes_per_element


def stage_param_bytes(preset: ModelPreset, s: int) -> int:
    """Rough per-stage parameter bytes (12*dim^2 per transformer block), for DP-sync sizing."""
    per_layer = 12 * preset.hidden_dim * preset.hidden_dim
    return per_layer * preset.layers_per_stage(s) * preset.bytes_per_element


@dataclass(frozen=True)
class TopologyProfile:
    """Generator settings for synthetic geo-distributed topologies.

    Nodes are grouped into regions with fast intra-region links and slow
    inter-region links; one shared compute value is drawn per topology.
    Ranges are (low, high) with low <= high. Bandwidth in bytes/ms.
    """

    regions: int
    nodes_per_region: int
    intra_latency_ms: tuple[float, float] = (1.0, 5.0)
    inter_latency_ms: tuple[float, float] = (40.0, 150.0)
    intra_bandwidth: tuple[float, float] = (2.0e5, 1.0e6)
    inter_bandwidth: tuple[float, float] = (2.0e4, 1.0e5)
    compute_ms: tuple[float, float] = (80.0, 160.0)
    bwd_ratio: float = 2.0
    mem_capacity: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.regions < 1 or self.nodes_per_region < 1:
            raise ValidationError("profile needs at least one region with at least one node")
        for fname in ("intra_latency_ms", "inter_latency_ms", "intra_bandwidth", "inter_bandwidth", "compute_ms"):
            lo, hi = getattr(self, fname)
            if not (0 < lo <= hi):
                raise ValidationError(f"{fname} range must satisfy 0 < low <= high, got ({lo}, {hi})")

    @property
    def n(self) -> int:
        return self.regions * self.nodes_per_region

    def to_dict(self) -> dict:
        return {
            "regions": self.regions,
            "nodes_per_region": self.nodes_per_region,
            "intra_latency_ms": list(self.intra_latency_ms),
            "inter_latency_ms": list(self.inter_latency_ms),
            "intra_bandwidth": list(self.intra_bandwidth),
            "inter_bandwidth": list(self.inter_bandwidth),
            "compute_ms": list(self.compute_ms),
            "bwd_ratio": self.bwd_ratio,
            "mem_capacity": self.mem_capacity,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TopologyProfile":
        kwargs = dict(data)
        for fname in ("intra_latency_ms", "inter_latency_ms", "intra_bandwidth", "inter_bandwidth", "compute_ms"):
            if fname in kwargs:
                kwargs[fname] = tuple(kwargs[fname])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "TopologyProfile":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def sample_topology(profile: TopologyProfile) -> Topology:
    """Draw a topology from a profile. Pure function of the profile (seed included)."""
    rng = np.random.default_rng(profile.seed)
    n = profile.n
    region_of = [i // profile.nodes_per_region for i in range(n)]
    lat = np.zeros((n, n))
    bw = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if region_of[i] == region_of[j]:
                lat_rng, bw_rng = profile.intra_latency_ms, profile.intra_bandwidth
            else:
                lat_rng, bw_rng = profile.inter_latency_ms, profile.inter_bandwidth
            lat[i, j] = lat[j, i] = rng.uniform(*lat_rng)
            bw[i, j] = bw[j, i] = rng.uniform(*bw_rng)
    compute = float(rng.uniform(*profile.compute_ms))
    return Topology(
        n=n,
        latency_ms=lat,
        bandwidth_bytes_per_ms=bw,
        compute_fwd_ms=np.full(n, compute),
        bwd_ratio=profile.bwd_ratio,
        mem_capacity=profile.mem_capacity,
    )
