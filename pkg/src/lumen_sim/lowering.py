"""Lower a :class:`NetworkSpec` onto photonic devices and count them.

Mapping (weight-stationary):

* multiplication -> one MRR per weight, or a push-pull pair of MZIs;
* addition -> one balanced photodetector pair per output neuron/channel;
* connection -> one waveguide per multiplier device;
* nonlinearity -> one EOM per neuron (dense) or per channel (conv).

Convolutions time-multiplex spatial positions over the same devices, so
device counts depend on parameter shapes only.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .devices import MZI, check_backend
from .network import Activation, Branch, Conv2D, Dense, NetworkSpec, layer_name, layer_output_shape

MULTIPLIER = "multiplier"
SUMMATION = "summation"
EOM = "eom"
WAVEGUIDE = "waveguide"
ELECTRICAL = "electrical"


@dataclass(frozen=True)
class DeviceCensus:
    n_multipliers: int = 0
    n_summation_units: int = 0
    n_eoms: int = 0
    n_waveguides: int = 0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"{k} must be >= 0, got {v}")

    def __add__(self, other: "DeviceCensus") -> "DeviceCensus":
        return DeviceCensus(
            self.n_multipliers + other.n_multipliers,
            self.n_summation_units + other.n_summation_units,
            self.n_eoms + other.n_eoms,
            self.n_waveguides + other.n_waveguides,
        )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    layer: str  # path label, "3" or "12/1/0" inside branches
    index: int  # weight index (multipliers) or unit index
    devices: int = 1


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    medium: str
    port: str = ""


@dataclass(frozen=True)
class LoweredGraph:
    backend: str
    network: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    layer_census: tuple[DeviceCensus, ...]  # one per top-level layer

    def to_netlist(self) -> dict:
        return {
            "format": "lumen-sim-netlist",
            "version": 1,
            "network": self.network,
            "backend": self.backend,
            "census": census(self).as_dict(),
            "layer_census": [c.as_dict() for c in self.layer_census],
            "nodes": [[n.id, n.kind, n.layer, n.index, n.devices] for n in self.nodes],
            "node_fields": ["id", "kind", "layer", "index", "devices"],
            "edges": [[e.src, e.dst, e.medium, e.port] for e in self.edges],
            "edge_fields": ["src", "dst", "medium", "port"],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_netlist(), separators=(",", ":"), sort_keys=True)


def devices_per_weight(backend: str) -> int:
    return 2 if check_backend(backend) == MZI else 1


def _channels(shape) -> int:
    return shape[-1]


class _Builder:
    def __init__(self, backend):
        self.backend = backend
        self.k = devices_per_weight(backend)
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []

    def node(self, kind, where, index, devices=1) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, kind, where, index, devices))
        return nid

    def weights(self, where, fan_in, n_units):
        """Multiplier bank of ``fan_in x n_units`` weights feeding ``n_units`` adders."""
        sums = [self.node(SUMMATION, where, j) for j in range(n_units)]
        ports = ("+", "-") if self.k == 2 else ("",)
        for f in range(fan_in * n_units):
            m = self.node(MULTIPLIER, where, f, self.k)
            for p in ports:
                self.edges.append(Edge(m, sums[f % n_units], WAVEGUIDE, p))
        return sums

    def lower_layer(self, layer, shape_in, where, last_sums):
        """Emit nodes for one layer; returns the adders feeding a following EOM."""
        if isinstance(layer, Dense):
            return self.weights(where, layer.n_in, layer.n_out)
        if isinstance(layer, Conv2D):
            return self.weights(where, layer.kh * layer.kw * layer.cin, layer.cout)
        if isinstance(layer, Activation):
            n = _channels(shape_in)
            eoms = [self.node(EOM, where, i) for i in range(n)]
            if last_sums is not None and len(last_sums) == n:
                self.edges.extend(Edge(s, e, ELECTRICAL) for s, e in zip(last_sums, eoms))
            return None
        if isinstance(layer, Branch):
            for p, path in enumerate(layer.paths):
                sums = None
                for j, (sub, s) in enumerate(zip(path, _path_shapes(path, shape_in))):
                    sums = self.lower_layer(sub, s, f"{where}/{p}/{j}", sums)
            return None
        return last_sums if layer_name(layer) in ("flatten", "output") else None


def _path_shapes(path, shape):
    shapes = [tuple(shape)]
    for sub in path:
        shapes.append(layer_output_shape(sub, shapes[-1]))
    return shapes


def _census_between(nodes, edges) -> DeviceCensus:
    n_mult = sum(n.devices for n in nodes if n.kind == MULTIPLIER)
    return DeviceCensus(
        n_mult,
        sum(1 for n in nodes if n.kind == SUMMATION),
        sum(1 for n in nodes if n.kind == EOM),
        sum(1 for e in edges if e.medium == WAVEGUIDE),
    )


def lower(spec: NetworkSpec, backend: str) -> LoweredGraph:
    """Materialize the device graph of ``spec``; one node per weight, adder and EOM."""
    backend = check_backend(backend)
    b = _Builder(backend)
    per_layer = []
    last_sums = None
    for i, layer in enumerate(spec.layers):
        n0, e0 = len(b.nodes), len(b.edges)
        last_sums = b.lower_layer(layer, spec.shapes[i], str(i), last_sums)
        per_layer.append(_census_between(b.nodes[n0:], b.edges[e0:]))
    return LoweredGraph(backend, spec.name, tuple(b.nodes), tuple(b.edges), tuple(per_layer))


def census(g: LoweredGraph) -> DeviceCensus:
    """Count devices by walking the nodes and edges of a lowered graph."""
    return _census_between(g.nodes, g.edges)


def _layer_census(layer, shape_in, k) -> DeviceCensus:
    if isinstance(layer, Dense):
        m = layer.n_in * layer.n_out * k
        return DeviceCensus(m, layer.n_out, 0, m)
    if isinstance(layer, Conv2D):
        m = layer.kh * layer.kw * layer.cin * layer.cout * k
        return DeviceCensus(m, layer.cout, 0, m)
    if isinstance(layer, Activation):
        return DeviceCensus(0, 0, _channels(shape_in), 0)
    if isinstance(layer, Branch):
        total = DeviceCensus()
        for path in layer.paths:
            shapes = _path_shapes(path, shape_in)
            for sub, s in zip(path, shapes):
                total = total + _layer_census(sub, s, k)
        return total
    return DeviceCensus()


def layer_census_from_shape(spec: NetworkSpec, backend: str) -> list[DeviceCensus]:
    k = devices_per_weight(backend)
    return [_layer_census(l, s, k) for l, s in zip(spec.layers, spec.shapes)]


def census_from_shape(spec: NetworkSpec, backend: str) -> DeviceCensus:
    """Device census computed from layer shapes, without building the graph."""
    total = DeviceCensus()
    for c in layer_census_from_shape(spec, backend):
        total = total + c
    return total


def n_encoded_inputs(spec: NetworkSpec) -> int:
    """Laser-encoded input lanes: fan-in of the first weighted layer."""
    for layer in spec.layers:
        if isinstance(layer, Dense):
            return layer.n_in
        if isinstance(layer, Conv2D):
            return layer.kh * layer.kw * layer.cin
    return 0


def describe(spec: NetworkSpec, backend: str) -> list[dict]:
    """Per-layer census rows, handy for reports."""
    return [
        {"layer": i, "type": layer_name(l), **c.as_dict()}
        for i, (l, c) in enumerate(zip(spec.layers, layer_census_from_shape(spec, backend)))
    ]
