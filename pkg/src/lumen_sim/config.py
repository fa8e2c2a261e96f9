"""Run configuration: a versioned JSON document plus ``--set`` overrides.

Every field has a default, so a config file only lists what it changes.
The file is validated against :data:`SCHEMA` before anything is computed;
problems are reported with the JSON path of the offending field.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import asdict, dataclass, field

import jsonschema

from .devices import BACKENDS, DeviceParams, EOMParams, MRRParams, MZIParams, PhotodiodeParams
from .engine import IDEAL, EncodingConfig, TrainConfig
from .network import NetworkSpec, builtin
from .noise import NoiseConfig
from .power import PowerParams

SCHEMA_VERSION = 1
CONFIG_DIR_ENV = "LUMEN_SIM_CONFIG_DIR"


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_path = {"type": ["string", "null"]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_network = {
    "oneOf": [
        {"type": "string"},
        _obj({"name": {"type": "string"}, "input_shape": {"type": "array", "items": {"type": "integer"}},
              "layers": {"type": "array", "items": {"type": "object"}}},
             required=("input_shape", "layers")),
    ]
}

SCHEMA = _obj({
    "schema_version": {"const": SCHEMA_VERSION},
    "network": _network,
    "networks": {"type": "array", "items": _network},
    "backend": {"enum": [*BACKENDS, IDEAL]},
    "backends": {"type": "array", "items": {"enum": [*BACKENDS, IDEAL]}, "minItems": 1},
    "devices": _obj({
        "mrr": _obj({"a": _num, "r1": _num, "r2": _num}),
        "mzi": _obj({"split_imbalance": _num, "insertion_loss": _num}),
        "photodiode": _obj({"lambda_": _num, "eta": _num, "I_D": _num, "R_SH": _num, "T_k": _num}),
        "eom": _obj({"v_pi": _num, "v_bias": {"type": ["number", "null"]}}),
        "calibrate_ideal": {"type": "boolean"},
    }),
    "noise": _obj({"enabled": {"type": "boolean"}, "delta_f": _nonneg, "noise_scale": _nonneg}),
    "encoding": _obj({
        "p_fullscale": _pos,
        "weight_scale_per_layer": {"oneOf": [{"type": "null"}, {"type": "array", "items": _pos}]},
    }),
    "power": _obj({k: _nonneg for k in PowerParams.__dataclass_fields__}),
    "train": _obj({"lr": _pos, "epochs": {"type": "integer", "minimum": 0},
                   "batch": {"type": "integer", "minimum": 1}, "seed": {"type": "integer", "minimum": 0},
                   "momentum": {"type": "number", "minimum": 0, "maximum": 1}}),
    "seed": {"type": "integer", "minimum": 0},
    "workers": {"type": "integer", "minimum": 1},
    "data": _obj({"train_images": _path, "train_labels": _path, "test_images": _path,
                  "test_labels": _path, "limit": {"type": ["integer", "null"], "minimum": 1}}),
    "weights": _path,
    "sweep": _obj({"param": {"type": "string"}, "values": {"type": "array", "items": _num, "minItems": 1},
                   "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}}),
    "output_dir": {"type": "string"},
}, required=("schema_version",))

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "network": "mlp:784,16,10",
    "networks": ["MLP3", "MLP5", "MLP9", "CNN3"],
    "backend": "mrr",
    "backends": ["mrr", "mzi"],
    "devices": {
        "mrr": asdict(MRRParams()),
        "mzi": asdict(MZIParams()),
        "photodiode": asdict(PhotodiodeParams()),
        "eom": {"v_pi": EOMParams().v_pi, "v_bias": None},
        "calibrate_ideal": False,
    },
    "noise": {"enabled": True, "delta_f": 1e9, "noise_scale": 1.0},
    "encoding": {"p_fullscale": 1e-4, "weight_scale_per_layer": None},
    "power": asdict(PowerParams()),
    "train": asdict(TrainConfig(lr=0.5, epochs=20, batch=64, seed=0)),
    "seed": 0,
    "workers": 1,
    "data": {"train_images": None, "train_labels": None, "test_images": None, "test_labels": None,
             "limit": None},
    "weights": None,
    "sweep": {"param": "noise.noise_scale", "values": [0, 1, 10, 100], "seeds": list(range(10))},
    "output_dir": "out",
}


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "network":
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(doc: dict, dotted: str, value) -> dict:
    """Set ``doc[a][b]...`` for ``dotted = "a.b..."``; returns a new dict."""
    doc = copy.deepcopy(doc)
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value
    return doc


def parse_overrides(items) -> list[tuple[str, object]]:
    out = []
    for item in items or ():
        if "=" not in item:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out.append((k.strip(), _parse_value(v)))
    return out


def validate(doc: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        raise ConfigError(e.json_path, e.message)


def _network_from(value, where) -> NetworkSpec:
    try:
        if isinstance(value, str):
            return builtin(value)
        return NetworkSpec.from_dict(value)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(where, str(exc).strip("'\"")) from None


@dataclass
class RunConfig:
    """Typed view of a validated config document."""

    doc: dict
    base_dir: str = "."
    network: NetworkSpec = field(init=False)
    networks: list = field(init=False)
    devices: DeviceParams = field(init=False)
    noise: NoiseConfig = field(init=False)
    encoding: EncodingConfig = field(init=False)
    power: PowerParams = field(init=False)
    train: TrainConfig = field(init=False)

    def __post_init__(self):
        d = self.doc
        validate(d)
        self.network = _network_from(d["network"], "$.network")
        self.networks = [_network_from(n, f"$.networks[{i}]") for i, n in enumerate(d["networks"])]
        dev = d["devices"]
        self.devices = self._build("$.devices", lambda: DeviceParams(
            MRRParams(**dev["mrr"]), MZIParams(**dev["mzi"]),
            PhotodiodeParams(**dev["photodiode"]), EOMParams(**dev["eom"])))
        self.noise = self._build("$.noise", lambda: NoiseConfig(photodiode=self.devices.photodiode, **d["noise"]))
        self.encoding = self._build("$.encoding", lambda: EncodingConfig(**d["encoding"]))
        self.power = self._build("$.power", lambda: PowerParams(**d["power"]))
        self.train = TrainConfig(**d["train"])

    @staticmethod
    def _build(where, make):
        try:
            return make()
        except (TypeError, ValueError) as exc:
            raise ConfigError(where, str(exc)) from None

    # convenience accessors
    def __getattr__(self, name):
        doc = self.__dict__.get("doc")
        if doc is not None and name in doc:
            return doc[name]
        raise AttributeError(name)

    @property
    def calibrate_with(self) -> DeviceParams | None:
        return DeviceParams() if self.doc["devices"]["calibrate_ideal"] else None

    def path(self, value: str | None) -> str | None:
        if value is None:
            return None
        return value if os.path.isabs(value) else os.path.normpath(os.path.join(self.base_dir, value))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.doc)

    def dumps(self) -> str:
        return json.dumps(self.doc, indent=2, sort_keys=True) + "\n"

    def with_override(self, dotted: str, value) -> "RunConfig":
        return RunConfig(apply_override(self.doc, dotted, value), self.base_dir)


def from_dict(doc: dict, base_dir: str = ".", overrides=()) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")
    if "schema_version" not in doc:
        raise ConfigError("$.schema_version", "required field missing")
    merged = deep_merge(DEFAULTS, doc)
    for k, v in overrides:
        merged = apply_override(merged, k, v)
    return RunConfig(merged, base_dir)


def locate(path: str) -> str:
    """Resolve a config path, falling back to ``$LUMEN_SIM_CONFIG_DIR`` for relative names."""
    if os.path.exists(path) or os.path.isabs(path):
        return path
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir and os.path.exists(os.path.join(env_dir, path)):
        return os.path.join(env_dir, path)
    return path


def load(path: str, overrides=()) -> RunConfig:
    path = locate(path)
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise ConfigError("$", f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON in {path}: {exc}") from None
    return from_dict(doc, os.path.dirname(os.path.abspath(path)), overrides)
