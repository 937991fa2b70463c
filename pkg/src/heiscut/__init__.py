"""Heisenberg group geometry, cut metrics, and finite L1 distortion."""

from .hgroup import (
    Box,
    HPoint,
    IDENTITY,
    Polyline2D,
    TangentVec,
    dilate,
    exp,
    exp_z,
    inv,
    lift_polyline,
    log,
    mul,
    pi,
    plane_height,
)
from .ccmetric import Geodesic, cc_distance, cc_geodesic, grid_oracle_distance

__version__ = "0.1.0"
