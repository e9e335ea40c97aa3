# %% [markdown]
# # Command line
#
# The ``cuspdecay`` entry point writes CSV reports.  Spaces and eigenbases
# are cached under $CUSPDECAY_CACHE.

# %%
import json
import os
import tempfile

from cuspdecay.cli import main

os.environ["CUSPDECAY_CACHE"] = tempfile.mkdtemp()

main(["basis", "--weight", "36"])

# %%
main(["eigen", "--weight", "24"])

# %%
spec = os.path.join(tempfile.mkdtemp(), "delta_sq.json")
with open(spec, "w") as fh:
    json.dump({"a": [[1]], "weights": [12], "combos": [[[0, 1]]], "target_weight": 24}, fh)
main(["decompose", "--spec", spec, "--p", "1,2"])

# %%
main(["scan", "--weights", "24:72:12", "--p", "1", "--jobs", "1"])

# %%
main(["dist", "--weight", "120", "--x-exp", "0.5"])
