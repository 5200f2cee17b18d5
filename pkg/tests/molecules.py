"""A fixed corpus of structures covering rings, aromatics, charges and brackets."""

SMILES = [
    "CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O", "CC(=O)Nc1ccc(O)cc1", "C1CCCCC1", "c1ccc2ccccc2c1",
    "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "O=C(O)C(N)Cc1ccccc1", "[Na+].[Cl-]",
    "C[N+](C)(C)C", "[O-][N+](=O)c1ccccc1", "ClC(Cl)(Cl)Cl", "BrCCBr", "FC(F)(F)c1ccccc1",
    "C#N", "CC#CC", "C=CC=C", "OC1CCCC1O", "C1CC2CCC1C2", "C12C3C4C1C5C2C3C45",
    "NC(=O)c1cccnc1", "CS(=O)(=O)Nc1ccccc1", "OP(=O)(O)O", "CCN(CC)CC", "CC(C)(C)OC(=O)N",
    "c1ccc(cc1)-c1ccccc1", "O=C1NC(=O)C(N1)(c1ccccc1)c1ccccc1", "CN1CCC[C@H]1c1cccnc1",
    "C[C@@H](O)[C@H](N)C(=O)O", "[13CH4]", "[2H]OC", "OCC(O)CO", "C1=CC=CN=C1",
    "c1cnc2[nH]ccc2c1", "CC1=CC(=O)C=CC1=O", "S=C(N)N", "N#CC#N", "O=S(=O)(O)O",
    "CCCCCCCCCCCCCCCC(=O)O", "Oc1ccc(Cl)cc1Cl", "COc1ccc2[nH]cc(CCN)c2c1", "C1COCCN1",
    "CC(=O)C", "[NH4+]", "Clc1ccc(cc1)C(c1ccc(Cl)cc1)C(Cl)(Cl)Cl",
]
