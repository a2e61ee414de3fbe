"""Neighbor Joining on five taxa as a union of polyhedral cones."""

from njcones.cones import (
    Cone,
    Halfspace,
    all_cones,
    build_C34_2,
    cone_for,
    containing_cones,
    distance_to_misclassification,
    membership,
    nearest_point,
)
from njcones.distvec import DistVector, ParseError, index_to_pair, pair_to_index, read_distance_matrix
from njcones.evolution import (
    ConfigError,
    ModelSpec,
    TreeModel,
    estimate_distances,
    preset_tree,
    simulate_alignment,
)
from njcones.nj import NJResult, PickOutcome, nj_run, pick_cherries, q_criterion, q_matrix, reduce
from njcones.rays import RayDescriptor, catalog, ray_vector, stability_decomposition
from njcones.symmetry import LeafPermutation, permute_vector, project_to_W, shift_vector, w_coordinates
from njcones.topology import ConeId, Topology, topology_from_newick

__version__ = "0.1.0"
