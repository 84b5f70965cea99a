"""
Driving everything from the command line
========================================

"""

# Every capability is reachable without writing Python: subcommands
# build states, trace curves and boundaries, and run the verification
# suites.  Outputs land next to a manifest recording the exact command,
# configuration, and file digests.  This tour shells through the same
# entry point the `bottleneck-lab` console script uses.
import json
import pathlib
import tempfile

from bottleneck_lab.cli import run_command

workdir = pathlib.Path(tempfile.mkdtemp(prefix="bottleneck-tour-"))
lean = ["--restarts", "2", "--max-iters", "25", "--beta-grid", "0,1,4", "--seed", "3"]

# materialize a builtin state as a hand-editable JSON file
state_file = workdir / "rho3.json"
run_command(["state", "--state", "rho3:p=0.4", "--out", str(state_file)])

# trace its bottleneck curve straight from that file, with a plot
curve_csv = workdir / "curve.csv"
run_command(["ib", "--state", str(state_file), "--quantum", "--dw", "2",
             "--grid", "5", *lean,
             "--out", str(curve_csv), "--plot", str(workdir / "curve.svg")])

# the classical solver reads the same flag surface
run_command(["ib", "--state", "bsc:delta=0.1", "--classical", "--grid", "5",
             "--out", str(workdir / "bsc.csv")])

# rate-region boundaries export with strictly increasing Q_X
run_command(["rate-region", "--state", "rho3:p=0.4", "--dw", "2", "--dv", "4",
             "--grid", "0.2,0.5", *lean, "--out", str(workdir / "region.csv")])

# every output file carries a manifest with digests for auditability
manifest = json.loads((workdir / "curve.csv.manifest.json").read_text())
print("command:", " ".join(manifest["command"]))
print("outputs:")
for entry in manifest["outputs"]:
    print(f"  {entry['path']}  {entry['bytes']} bytes  sha256 {entry['sha256'][:16]}")

# the verification suites guard the library's own identities
code = run_command(["verify", "--suite", "states", "--seed", "7"])
print("verify exit code:", code)
