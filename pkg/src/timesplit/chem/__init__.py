from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto
from .network import WeightedGraph, all_pairs_shortest_paths, pmfg_construct
from .planarity import is_planar
from .smiles import Atom, Bond, BondOrder, Molecule, SmilesError, parse_smiles, to_smiles
from .space import (
    correlation_distance_matrix,
    group_pairwise,
    pca_embed,
    row_correlation,
    tanimoto_matrix,
    zscore_fill,
)
