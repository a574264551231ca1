"""Agglomerative hierarchical clustering that keeps ties as multifurcations."""

from .descriptors import DescriptorSet, cophenetic_matrix, descriptor_set, summary
from .engine import cluster, linkage
from .linkage import METHODS, MethodSpec, generalized_mean
from .naive import naive_cluster
from .proximity import ProximityMatrix, parse_proximity, quantize, read_proximity
from .tree import ClusterNode, Dendrogram

__all__ = [
    "ClusterNode", "Dendrogram", "DescriptorSet", "METHODS", "MethodSpec",
    "ProximityMatrix", "cluster", "cophenetic_matrix", "descriptor_set",
    "generalized_mean", "linkage", "naive_cluster", "parse_proximity",
    "quantize", "read_proximity", "summary",
]
__version__ = "0.1.0"
