from .dag import DagNode, SdfapGraph, build_dag
from .expand import compile_graph, expand_hofs, propagate_patterns

__all__ = ["DagNode", "SdfapGraph", "build_dag", "compile_graph", "expand_hofs", "propagate_patterns"]
