"""
Chemical space of training and test compounds
=============================================

Are compounds marketed after the threshold structurally different from the
earlier ones? Three views: PCA of the feature matrix, Tanimoto similarity of
Morgan fingerprints, and hop distances on a planar maximally filtered graph
(PMFG) of compound correlations.
"""

# %%
import numpy as np

from timesplit.chem import morgan_fingerprint, parse_smiles, tanimoto, to_smiles
from timesplit.chem.network import all_pairs_shortest_paths, pmfg_construct
from timesplit.chem.space import group_pairwise, pca_embed, row_correlation, summarize, tanimoto_matrix, zscore_fill
from timesplit.data import MonthDate
from timesplit.evaluation import concatenate_datasets
from timesplit.rng import Xoshiro256
from timesplit.synthetic import SyntheticSpec, generate_synthetic

# %%
# SMILES in, molecular graph out. Fingerprints do not depend on atom order.
mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
rng = Xoshiro256(1)
variants = [to_smiles(mol, rng) for _ in range(3)]
print(variants)
print({morgan_fingerprint(parse_smiles(s)) == morgan_fingerprint(mol) for s in variants})
print("aspirin vs salicylic acid:",
      round(tanimoto(morgan_fingerprint(mol), morgan_fingerprint(parse_smiles("Oc1ccccc1C(=O)O"))), 3))

# %%
data = generate_synthetic(SyntheticSpec(n_compounds=100, seed=2))
bundle = data.bundle()
ids = bundle.compound_ids
cut = MonthDate.parse(data.spec.drift_point)
is_test = np.array([not bundle.market_date(c) < cut for c in ids])
Z = zscore_fill(concatenate_datasets(list(bundle.tables.values())).values)

# %%
pca = pca_embed(Z, 2)
print("explained:", np.round(pca.explained_fraction, 3))
print("test centroid:", np.round(pca.scores[is_test].mean(0), 2),
      "train centroid:", np.round(pca.scores[~is_test].mean(0), 2))

# %%
T = tanimoto_matrix([morgan_fingerprint(parse_smiles(bundle.records[c].smiles)) for c in ids])
for group, s in summarize(group_pairwise(T, is_test)).items():
    print(f"tanimoto {group:13s} median {s['median']:.3f} over {s['n_pairs']} pairs")

# %%
# PMFG keeps 3(n-2) edges; shortest paths count hops.
graph = pmfg_construct(row_correlation(Z))
print(len(graph.edges), "edges for", len(ids), "nodes")
D = all_pairs_shortest_paths(graph)
for group, s in summarize(group_pairwise(D, is_test)).items():
    print(f"hops {group:13s} mean {s['mean']:.2f}")
