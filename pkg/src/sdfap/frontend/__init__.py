"""Lexing, parsing, pattern detection and shape inference for the DSL."""

from .analysis import COMBINATIONAL, SDFAP, Classification, check_shapes, classify_definitions, entry_shapes
from .parser import parse_program
from .printer import print_program

__all__ = [
    "COMBINATIONAL",
    "SDFAP",
    "Classification",
    "check_shapes",
    "classify_definitions",
    "entry_shapes",
    "parse_program",
    "print_program",
]
