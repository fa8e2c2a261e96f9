"""Static power of a lowered network from per-device power figures.

The default :class:`PowerParams` values are order-of-magnitude placeholders,
not measured foundry data.  Pass explicit values for any real comparison.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

from .devices import MRR, check_backend
from .lowering import DeviceCensus, census_from_shape, layer_census_from_shape, n_encoded_inputs
from .network import NetworkSpec, layer_name

CSV_COLUMNS = [
    "network", "backend", "n_multipliers", "n_summation", "n_eom",
    "p_total_mW", "p_mult_mW", "p_sum_mW", "p_eom_mW", "p_laser_mW",
]


@dataclass(frozen=True)
class PowerParams:
    """Per-device static power in watts (placeholder defaults)."""

    p_multiplier_mrr: float = 1e-3
    p_multiplier_mzi: float = 1e-3
    p_summation: float = 0.1e-3
    p_eom: float = 0.5e-3
    p_laser_per_input: float = 1e-3
    p_waveguide: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v >= 0:
                raise ValueError(f"{k} must be >= 0, got {v}")

    def multiplier(self, backend: str) -> float:
        return self.p_multiplier_mrr if check_backend(backend) == MRR else self.p_multiplier_mzi


@dataclass(frozen=True)
class PowerReport:
    network: str
    backend: str
    census: DeviceCensus
    n_inputs: int
    by_class: dict  # multiplier / summation / eom / laser / waveguide -> W
    by_layer: list = field(default_factory=list)  # (label, W); laser listed as "input"
    total: float = 0.0

    def row(self) -> dict:
        mw = lambda w: w * 1e3  # noqa: E731
        return {
            "network": self.network,
            "backend": self.backend,
            "n_multipliers": self.census.n_multipliers,
            "n_summation": self.census.n_summation_units,
            "n_eom": self.census.n_eoms,
            "p_total_mW": mw(self.total),
            "p_mult_mW": mw(self.by_class["multiplier"]),
            "p_sum_mW": mw(self.by_class["summation"]),
            "p_eom_mW": mw(self.by_class["eom"]),
            "p_laser_mW": mw(self.by_class["laser"]),
        }


def _census_power(c: DeviceCensus, backend: str, pp: PowerParams) -> dict:
    return {
        "multiplier": c.n_multipliers * pp.multiplier(backend),
        "summation": c.n_summation_units * pp.p_summation,
        "eom": c.n_eoms * pp.p_eom,
        "waveguide": c.n_waveguides * pp.p_waveguide,
    }


def estimate_power(c: DeviceCensus, backend: str, pp: PowerParams, n_inputs: int = 0,
                   per_layer=None, network: str = "") -> PowerReport:
    """Static power ``sum(count_i * p_i) + n_inputs * p_laser``.

    ``per_layer`` optionally supplies ``(label, DeviceCensus)`` pairs that add
    up to ``c``; the report then breaks power down by layer.
    """
    backend = check_backend(backend)
    by_class = _census_power(c, backend, pp)
    by_class["laser"] = n_inputs * pp.p_laser_per_input
    if per_layer is None:
        per_layer = [("network", c)]
    by_layer = [("input", by_class["laser"])]
    by_layer += [(label, sum(_census_power(lc, backend, pp).values())) for label, lc in per_layer]
    total = (by_class["multiplier"] + by_class["summation"] + by_class["eom"]
             + by_class["laser"] + by_class["waveguide"])
    return PowerReport(network, backend, c, n_inputs, by_class, by_layer, total)


def network_power(spec: NetworkSpec, backend: str, pp: PowerParams) -> PowerReport:
    layers = layer_census_from_shape(spec, backend)
    labels = [f"{i}:{layer_name(l)}" for i, l in enumerate(spec.layers)]
    return estimate_power(census_from_shape(spec, backend), backend, pp, n_encoded_inputs(spec),
                          per_layer=list(zip(labels, layers)), network=spec.name)


def power_sweep(specs, backends, pp: PowerParams) -> list[PowerReport]:
    """One report per ``(spec, backend)`` pair, specs outermost, input order kept."""
    return [network_power(s, b, pp) for s in specs for b in backends]


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def power_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.row()
        w.writerow([_fmt(row[k]) for k in CSV_COLUMNS])
    return buf.getvalue()
