"""
The command-line workflow
=========================

Everything above is also reachable from the ``timesplit`` command with a
JSON config. ``synth`` writes a complete input set plus a ready config.
"""

# %%
import json
import os
import tempfile

from timesplit.cli import main

work = tempfile.mkdtemp()
data = os.path.join(work, "data")
main(["synth", "--out", data, "--seed", "0"])
print(sorted(os.listdir(data)))

# %%
# Shrink the grid for a quick run.
with open(os.path.join(data, "config.json")) as fh:
    cfg = json.load(fh)
cfg["split"]["repetitions"] = 5
cfg["chemspace"]["pmfg_max_nodes"] = 40
quick = os.path.join(data, "quick.json")
with open(quick, "w") as fh:
    json.dump(cfg, fh)

for cmd in ("evaluate", "importance", "leakage", "chemspace"):
    code = main([cmd, "--config", quick, "--out", os.path.join(work, cmd), "--jobs", "2"])
    print(cmd, "exit", code)

# %%
with open(os.path.join(work, "evaluate", "comparison.json")) as fh:
    comparison = json.load(fh)
for t in comparison["targets"]:
    print(t["target"], "median gap", round(t["median_difference"], 3), "p", f"{t['p_value']:.3g}")
with open(os.path.join(work, "leakage", "leakage.json")) as fh:
    print("leakage p", json.load(fh)["p_value"])
