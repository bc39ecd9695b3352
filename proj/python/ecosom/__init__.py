"""Driving-style SOM toolkit: map training, U-matrix clustering, eco-driving
advice and fixed-point accelerator emulation."""

from ._core import (  # noqa: F401
    AccelCore,
    ClusterMap,
    SomModel,
    TrainSchedule,
    advise,
    classify,
    cluster,
    co2_per_km,
    dequantize,
    expected_reduction,
    hex_positions,
    quantize,
    recursive_tree_compare,
    train,
    tree_adder_cycles,
    u_matrix,
)

__all__ = [
    "AccelCore",
    "ClusterMap",
    "SomModel",
    "TrainSchedule",
    "advise",
    "classify",
    "cluster",
    "co2_per_km",
    "dequantize",
    "expected_reduction",
    "hex_positions",
    "quantize",
    "recursive_tree_compare",
    "train",
    "tree_adder_cycles",
    "u_matrix",
]
