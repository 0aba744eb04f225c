"""
Running and certifying from the command line
============================================

The ``monoprox`` entry point writes a CSV trace, a JSON summary and
optionally the full vector state; ``certify`` later re-checks the stored
run and exits nonzero if anything was edited.
"""

import csv
import shutil
import tempfile
from pathlib import Path

from monoprox.cli import main

configs = Path(__file__).resolve().parents[1] / "configs"
tmp = Path(tempfile.mkdtemp())
cfg = tmp / "perturbed_spd.json"
shutil.copy(configs / "perturbed_spd.json", cfg)
trace = tmp / "runs" / "perturbed_spd.csv"

# %%
# Equivalent to ``monoprox run --config perturbed_spd.json --full-state``.

print("run:", main(["run", "--config", str(cfg), "--full-state"]))
print("certify:", main(["certify", "--trace", str(trace), "--config", str(cfg)]))

# %%
# Inflate one eps entry by a factor of a million. The step inequality for
# that row no longer holds and the trace disagrees with the stored state.

with open(trace, newline="") as fh:
    rows = list(csv.DictReader(fh))
rows[5]["eps"] = repr(float(rows[5]["eps"]) * 1e6 + 1e-3)
with open(trace, "w", newline="") as fh:
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
print("certify after edit:", main(["certify", "--trace", str(trace), "--config", str(cfg)]))

shutil.rmtree(tmp)
