"""Shapes and concrete values (nested lists of ints, tuples for bundles)."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .frontend import ast as A


@dataclass(frozen=True)
class Shape:
    """Nested vector dims, outermost first; ``()`` is a scalar.

    ``elem`` is set for vectors whose elements are tuples.
    """

    dims: tuple = ()
    width: int = 32
    elem: object = None

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise ShapeError(f"all dimensions must be >= 1: {self.dims}")

    @property
    def size(self):
        n = 1 if self.elem is None else self.elem.size
        for d in self.dims:
            n *= d
        return n

    def inner(self):
        if len(self.dims) == 1 and self.elem is not None:
            return self.elem
        return Shape(self.dims[1:], self.width, self.elem)

    def __str__(self):
        if self.elem is not None:
            return "x".join(map(str, self.dims)) + "x" + str(self.elem)
        return "x".join(map(str, self.dims)) if self.dims else "Int"


@dataclass(frozen=True)
class TupleShape:
    items: tuple

    @property
    def size(self):
        return sum(i.size for i in self.items)

    def __str__(self):
        return "(" + ", ".join(str(i) for i in self.items) + ")"


def parse_shape(text: str, width: int = 32) -> Shape:
    text = text.strip()
    if text in ("", "Int", "scalar"):
        return Shape((), width)
    try:
        dims = tuple(int(x) for x in text.lower().split("x"))
    except ValueError:
        raise ShapeError(f"malformed shape {text!r}; expected e.g. 6x8x4x4") from None
    return Shape(dims, width)


def shape_from_type(t, width=32):
    if isinstance(t, A.TypeInt):
        return Shape((), width)
    if isinstance(t, A.TypeVec):
        inner = shape_from_type(t.elem, width)
        if isinstance(inner, TupleShape):
            return Shape((t.size,), width, inner)
        return Shape((t.size,) + inner.dims, width, inner.elem)
    if isinstance(t, A.TypeTuple):
        return TupleShape(tuple(shape_from_type(i, width) for i in t.items))
    raise ShapeError(f"unknown type {t!r}")


def shape_of(v, width=32):
    if isinstance(v, tuple):
        return TupleShape(tuple(shape_of(i, width) for i in v))
    dims = []
    while isinstance(v, list):
        if not v:
            raise ShapeError("empty vector")
        dims.append(len(v))
        v = v[0]
    if isinstance(v, tuple):
        return Shape(tuple(dims), width, shape_of(v, width))
    return Shape(tuple(dims), width)


def conforms(v, shape) -> bool:
    if isinstance(shape, TupleShape):
        return isinstance(v, tuple) and len(v) == len(shape.items) and all(
            conforms(x, s) for x, s in zip(v, shape.items)
        )
    if not shape.dims:
        return isinstance(v, int) and not isinstance(v, bool)
    return isinstance(v, list) and len(v) == shape.dims[0] and all(conforms(x, shape.inner()) for x in v)


def fill(shape, leaf):
    """Structure of ``shape`` whose leaves are ``leaf()`` (called per position)."""
    if isinstance(shape, TupleShape):
        return tuple(fill(s, leaf) for s in shape.items)
    if not shape.dims:
        return leaf()
    return [fill(shape.inner(), leaf) for _ in range(shape.dims[0])]


def leaves(v):
    if isinstance(v, (list, tuple)):
        for x in v:
            yield from leaves(x)
    else:
        yield v


def map_leaves(v, fn):
    if isinstance(v, list):
        return [map_leaves(x, fn) for x in v]
    if isinstance(v, tuple):
        return tuple(map_leaves(x, fn) for x in v)
    return fn(v)


def random_value(shape, rng: np.random.Generator, low=1, high=255):
    if isinstance(shape, TupleShape):
        return tuple(random_value(s, rng, low, high) for s in shape.items)
    if not shape.dims:
        return int(rng.integers(low, high + 1))
    if shape.elem is not None:
        return [random_value(shape.inner(), rng, low, high) for _ in range(shape.dims[0])]
    arr = rng.integers(low, high + 1, size=shape.dims)
    return arr.tolist()


def to_json(v) -> str:
    return json.dumps(_jsonable(v), separators=(",", ":"))


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def from_json(obj, shape=None):
    """Decode nested JSON arrays; tuple positions are restored from ``shape``."""
    if shape is None:
        return obj
    if isinstance(shape, TupleShape):
        if not isinstance(obj, list) or len(obj) != len(shape.items):
            raise ShapeError(f"expected a {len(shape.items)}-tuple")
        return tuple(from_json(o, s) for o, s in zip(obj, shape.items))
    if shape.dims and shape.elem is not None:
        if not isinstance(obj, list):
            raise ShapeError(f"expected a vector of length {shape.dims[0]}")
        return [from_json(o, shape.inner()) for o in obj]
    return obj


def first_divergence(a, b, path=()):
    """Path to the first position where ``a`` and ``b`` differ, or None."""
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        if len(a) != len(b):
            return path
        for i, (x, y) in enumerate(zip(a, b)):
            p = first_divergence(x, y, path + (i,))
            if p is not None:
                return p
        return None
    return None if a == b else path
