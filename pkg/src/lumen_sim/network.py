"""Layer-graph description of a network and shape inference.

A :class:`NetworkSpec` is an input shape plus an ordered tuple of layers.
Images are channels-last (``H x W x C``).  ``Branch`` lets census-only
models (Inception, ResNet) express parallel paths; the inference engine
handles the sequential subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .numerics import conv_output_size


@dataclass(frozen=True)
class Dense:
    n_in: int
    n_out: int


@dataclass(frozen=True)
class Conv2D:
    kh: int
    kw: int
    cin: int
    cout: int
    stride: int = 1
    padding: str = "same"


@dataclass(frozen=True)
class MaxPool:
    size: int = 2
    stride: int | None = None
    padding: str = "valid"


@dataclass(frozen=True)
class AvgPool:
    size: int = 2
    stride: int | None = None
    padding: str = "valid"


@dataclass(frozen=True)
class GlobalAvgPool:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Activation:
    """Electro-optic modulator nonlinearity."""


@dataclass(frozen=True)
class Output:
    dim: int


@dataclass(frozen=True)
class Branch:
    """Parallel paths from one input, merged by channel ``concat`` or ``add``.

    An empty path is the identity (a residual shortcut).
    """

    paths: tuple[tuple, ...]
    merge: str = "concat"


LAYER_TYPES = {
    "dense": Dense,
    "conv2d": Conv2D,
    "maxpool": MaxPool,
    "avgpool": AvgPool,
    "global_avgpool": GlobalAvgPool,
    "flatten": Flatten,
    "activation": Activation,
    "output": Output,
    "branch": Branch,
}
_TYPE_NAMES = {v: k for k, v in LAYER_TYPES.items()}
PARAMETRIC = (Dense, Conv2D)


class ShapeError(ValueError):
    """Adjacent layers disagree on tensor shape."""


def layer_name(layer) -> str:
    return _TYPE_NAMES[type(layer)]


def _pool_shape(shape, layer, where):
    if len(shape) != 3:
        raise ShapeError(f"layer {where}: pooling expects H x W x C input, got {shape}")
    stride = layer.size if layer.stride is None else layer.stride
    try:
        h = conv_output_size(shape[0], layer.size, stride, layer.padding)
        w = conv_output_size(shape[1], layer.size, stride, layer.padding)
    except ValueError as exc:
        raise ShapeError(f"layer {where}: {exc}") from None
    return (h, w, shape[2])


def layer_output_shape(layer, shape: tuple, where="?") -> tuple:
    """Output shape of ``layer`` applied to ``shape``; raises :class:`ShapeError`."""
    shape = tuple(shape)
    if isinstance(layer, Dense):
        if shape != (layer.n_in,):
            raise ShapeError(f"layer {where}: Dense expects input ({layer.n_in},), got {shape}")
        return (layer.n_out,)
    if isinstance(layer, Conv2D):
        if len(shape) != 3 or shape[2] != layer.cin:
            raise ShapeError(f"layer {where}: Conv2D expects H x W x {layer.cin} input, got {shape}")
        try:
            h = conv_output_size(shape[0], layer.kh, layer.stride, layer.padding)
            w = conv_output_size(shape[1], layer.kw, layer.stride, layer.padding)
        except ValueError as exc:
            raise ShapeError(f"layer {where}: {exc}") from None
        return (h, w, layer.cout)
    if isinstance(layer, (MaxPool, AvgPool)):
        return _pool_shape(shape, layer, where)
    if isinstance(layer, GlobalAvgPool):
        if len(shape) != 3:
            raise ShapeError(f"layer {where}: GlobalAvgPool expects H x W x C input, got {shape}")
        return (shape[2],)
    if isinstance(layer, Flatten):
        n = 1
        for s in shape:
            n *= s
        return (n,)
    if isinstance(layer, Activation):
        return shape
    if isinstance(layer, Output):
        if shape != (layer.dim,):
            raise ShapeError(f"layer {where}: Output expects ({layer.dim},) logits, got {shape}")
        return shape
    if isinstance(layer, Branch):
        outs = []
        for p, path in enumerate(layer.paths):
            s = shape
            for j, sub in enumerate(path):
                if isinstance(sub, Output):
                    raise ShapeError(f"layer {where}/{p}/{j}: Output not allowed inside a branch")
                s = layer_output_shape(sub, s, f"{where}/{p}/{j}")
            outs.append(s)
        if not outs:
            raise ShapeError(f"layer {where}: branch has no paths")
        if layer.merge == "add":
            if any(o != outs[0] for o in outs):
                raise ShapeError(f"layer {where}: add-merge of differing shapes {outs}")
            return outs[0]
        if layer.merge == "concat":
            if any(o[:-1] != outs[0][:-1] for o in outs):
                raise ShapeError(f"layer {where}: concat-merge of differing shapes {outs}")
            return outs[0][:-1] + (sum(o[-1] for o in outs),)
        raise ShapeError(f"layer {where}: unknown merge {layer.merge!r}")
    raise TypeError(f"layer {where}: unsupported layer {layer!r}")


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple
    layers: tuple
    name: str = ""
    shapes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(s) for s in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ShapeError("network has no layers")
        outputs = [i for i, l in enumerate(self.layers) if isinstance(l, Output)]
        if outputs != [len(self.layers) - 1]:
            raise ShapeError("network must contain exactly one Output layer, placed last")
        shapes = [self.input_shape]
        for i, layer in enumerate(self.layers):
            shapes.append(layer_output_shape(layer, shapes[-1], i))
        object.__setattr__(self, "shapes", tuple(shapes))

    @property
    def n_classes(self) -> int:
        return self.layers[-1].dim

    def parametric_layers(self):
        """``(index, layer)`` for every top-level Dense/Conv2D layer."""
        return [(i, l) for i, l in enumerate(self.layers) if isinstance(l, PARAMETRIC)]

    def is_sequential(self) -> bool:
        return not any(isinstance(l, (Branch, AvgPool, GlobalAvgPool)) for l in self.layers)

    def to_dict(self) -> dict:
        return {"name": self.name, "input_shape": list(self.input_shape),
                "layers": [layer_to_dict(l) for l in self.layers]}

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        return cls(tuple(d["input_shape"]), tuple(layer_from_dict(l) for l in d["layers"]),
                   d.get("name", ""))


def layer_to_dict(layer) -> dict:
    d = {"type": layer_name(layer)}
    if isinstance(layer, Branch):
        d["paths"] = [[layer_to_dict(s) for s in p] for p in layer.paths]
        d["merge"] = layer.merge
    else:
        d.update(layer.__dict__)
    return d


def layer_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("type")
    if kind not in LAYER_TYPES:
        raise ValueError(f"unknown layer type {kind!r}")
    if kind == "branch":
        paths = tuple(tuple(layer_from_dict(s) for s in p) for p in d["paths"])
        return Branch(paths, d.get("merge", "concat"))
    return LAYER_TYPES[kind](**d)


# -- model zoo ----------------------------------------------------------------

def mlp(widths, name: str = "", hidden_activation: bool = True) -> NetworkSpec:
    """Fully connected net ``widths[0] -> ... -> widths[-1]`` with EOM hidden units."""
    widths = [int(w) for w in widths]
    if len(widths) < 2:
        raise ValueError("an MLP needs at least input and output widths")
    layers = []
    for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        layers.append(Dense(a, b))
        if hidden_activation and i < len(widths) - 2:
            layers.append(Activation())
    layers.append(Output(widths[-1]))
    return NetworkSpec((widths[0],), tuple(layers), name or "mlp_" + "_".join(map(str, widths)))


def mlp_depth(depth: int, hidden: int = 64, n_in: int = 784, n_out: int = 10) -> NetworkSpec:
    """``depth`` dense layers of width ``hidden`` (MLP3, MLP5, MLP9)."""
    return mlp([n_in] + [hidden] * (depth - 1) + [n_out], name=f"MLP{depth}")


def cnn_depth(depth: int, kernels: int = 16, input_shape=(28, 28, 1), n_out: int = 10) -> NetworkSpec:
    """``depth`` 3x3 conv layers of ``kernels`` channels; pooling after the first two."""
    h, w, c = input_shape
    layers = []
    for i in range(depth):
        layers += [Conv2D(3, 3, c if i == 0 else kernels, kernels), Activation()]
        if i < 2:
            layers.append(MaxPool(2))
            h, w = h // 2, w // 2
    layers += [Flatten(), Dense(h * w * kernels, n_out), Output(n_out)]
    return NetworkSpec(tuple(input_shape), tuple(layers), f"CNN{depth}")


def _conv(kh, kw, cin, cout, stride=1, padding="same"):
    return (Conv2D(kh, kw, cin, cout, stride, padding), Activation())


def vgg16(n_out: int = 1000) -> NetworkSpec:
    cfg = [64, 64, "M", 128, 128, "M", 256, 256, 256, "M", 512, 512, 512, "M", 512, 512, 512, "M"]
    layers, c = [], 3
    for v in cfg:
        if v == "M":
            layers.append(MaxPool(2))
        else:
            layers += _conv(3, 3, c, v)
            c = v
    layers += [Flatten(), Dense(7 * 7 * 512, 4096), Activation(), Dense(4096, 4096), Activation(),
               Dense(4096, n_out), Output(n_out)]
    return NetworkSpec((224, 224, 3), tuple(layers), "VGG16")


def alexnet(n_out: int = 1000) -> NetworkSpec:
    layers = [*_conv(11, 11, 3, 64, 4), MaxPool(3, 2),
              *_conv(5, 5, 64, 192), MaxPool(3, 2),
              *_conv(3, 3, 192, 384), *_conv(3, 3, 384, 256), *_conv(3, 3, 256, 256), MaxPool(3, 2),
              Flatten(), Dense(6 * 6 * 256, 4096), Activation(), Dense(4096, 4096), Activation(),
              Dense(4096, n_out), Output(n_out)]
    return NetworkSpec((224, 224, 3), tuple(layers), "AlexNet")


def _basic_block(cin, cout, stride):
    main = (*_conv(3, 3, cin, cout, stride), Conv2D(3, 3, cout, cout))
    shortcut = () if stride == 1 and cin == cout else (Conv2D(1, 1, cin, cout, stride),)
    return (Branch((main, shortcut), "add"), Activation())


def resnet18(n_out: int = 1000) -> NetworkSpec:
    layers = [*_conv(7, 7, 3, 64, 2), MaxPool(3, 2, "same")]
    c = 64
    for cout, stride in [(64, 1), (128, 2), (256, 2), (512, 2)]:
        layers += _basic_block(c, cout, stride)
        layers += _basic_block(cout, cout, 1)
        c = cout
    layers += [GlobalAvgPool(), Dense(512, n_out), Output(n_out)]
    return NetworkSpec((224, 224, 3), tuple(layers), "ResNet18")


def _inception_a(cin, pool_features):
    return Branch((
        _conv(1, 1, cin, 64),
        (*_conv(1, 1, cin, 48), *_conv(5, 5, 48, 64)),
        (*_conv(1, 1, cin, 64), *_conv(3, 3, 64, 96), *_conv(3, 3, 96, 96)),
        (AvgPool(3, 1, "same"), *_conv(1, 1, cin, pool_features)),
    ))


def _inception_b(cin):
    return Branch((
        _conv(3, 3, cin, 384, 2, "valid"),
        (*_conv(1, 1, cin, 64), *_conv(3, 3, 64, 96), *_conv(3, 3, 96, 96, 2, "valid")),
        (MaxPool(3, 2),),
    ))


def _inception_c(cin, c7):
    return Branch((
        _conv(1, 1, cin, 192),
        (*_conv(1, 1, cin, c7), *_conv(1, 7, c7, c7), *_conv(7, 1, c7, 192)),
        (*_conv(1, 1, cin, c7), *_conv(7, 1, c7, c7), *_conv(1, 7, c7, c7),
         *_conv(7, 1, c7, c7), *_conv(1, 7, c7, 192)),
        (AvgPool(3, 1, "same"), *_conv(1, 1, cin, 192)),
    ))


def _inception_d(cin):
    return Branch((
        (*_conv(1, 1, cin, 192), *_conv(3, 3, 192, 320, 2, "valid")),
        (*_conv(1, 1, cin, 192), *_conv(1, 7, 192, 192), *_conv(7, 1, 192, 192),
         *_conv(3, 3, 192, 192, 2, "valid")),
        (MaxPool(3, 2),),
    ))


def _inception_e(cin):
    def split(c):
        return Branch((_conv(1, 3, c, 384), _conv(3, 1, c, 384)))

    return Branch((
        _conv(1, 1, cin, 320),
        (*_conv(1, 1, cin, 384), split(384)),
        (*_conv(1, 1, cin, 448), *_conv(3, 3, 448, 384), split(384)),
        (AvgPool(3, 1, "same"), *_conv(1, 1, cin, 192)),
    ))


def inception_v3(n_out: int = 1000) -> NetworkSpec:
    layers = [
        *_conv(3, 3, 3, 32, 2, "valid"), *_conv(3, 3, 32, 32, 1, "valid"), *_conv(3, 3, 32, 64),
        MaxPool(3, 2),
        *_conv(1, 1, 64, 80, 1, "valid"), *_conv(3, 3, 80, 192, 1, "valid"),
        MaxPool(3, 2),
        _inception_a(192, 32), _inception_a(256, 64), _inception_a(288, 64),
        _inception_b(288),
        _inception_c(768, 128), _inception_c(768, 160), _inception_c(768, 160), _inception_c(768, 192),
        _inception_d(768),
        _inception_e(1280), _inception_e(2048),
        GlobalAvgPool(), Dense(2048, n_out), Output(n_out),
    ]
    return NetworkSpec((299, 299, 3), tuple(layers), "InceptionV3")


BUILTINS = {
    "MLP3": lambda: mlp_depth(3),
    "MLP5": lambda: mlp_depth(5),
    "MLP9": lambda: mlp_depth(9),
    "CNN3": lambda: cnn_depth(3),
    "CNN5": lambda: cnn_depth(5),
    "CNN9": lambda: cnn_depth(9),
    "VGG16": vgg16,
    "AlexNet": alexnet,
    "InceptionV3": inception_v3,
    "ResNet18": resnet18,
}


def builtin(name: str) -> NetworkSpec:
    """Look up a named architecture, e.g. ``"MLP3"`` or ``"mlp:784,16,10"``."""
    if name.lower().startswith("mlp:"):
        return mlp([int(w) for w in name[4:].split(",")])
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown network {name!r}; known: {sorted(BUILTINS)}") from None
