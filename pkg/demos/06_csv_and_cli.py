"""
From a CSV file to a report
===========================

Export a synthetic dataset to CSV, then run the command-line tool on it the
way one would on real measurements. The same calls work from a shell:

    ccr fit --input data.csv --x-cols x1,...,x16 --y-cols y1,...,y18 \\
        --group-col group --group-order 1,2 --s1 5 --s2 5
"""

import json
import tempfile
from pathlib import Path

from ccrmodel.cli import main, write_csv
from ccrmodel.simulation import PRESETS, sample_dataset

# Same shape as a small two-group study: 16 X variables, 18 Y variables,
# 10 and 11 subjects.
scenario = PRESETS["rank1_base"](p1=16, p2=18, group_sizes=(10, 11), c1=10.0)
workdir = Path(tempfile.mkdtemp())
csv_path = workdir / "data.csv"
write_csv(sample_dataset(scenario, 0), csv_path)

x_cols = ",".join(f"x{i}" for i in range(1, 17))
y_cols = ",".join(f"y{i}" for i in range(1, 19))
common = ["--input", str(csv_path), "--x-cols", x_cols, "--y-cols", y_cols, "--group-col", "group",
          "--group-order", "1,2"]

report_path = workdir / "ic.json"
main(["ic", *common, "--out", str(report_path)])
best = json.loads(report_path.read_text())["argmin"]
print("information criterion picks", best)

report_path = workdir / "fit.json"
code = main(["fit", *common, "--s1", str(best["s1"]), "--s2", str(best["s2"]), "--out", str(report_path)])
report = json.loads(report_path.read_text())
print("exit code", code)
print("selected X:", report["selected_x"])
print("selected Y:", report["selected_y"])
print(f"delta_1 = {report['deltas'][0]:.3f}, eta_1 = {report['etas'][0]:.3f}")

# Errors come back as a JSON object on stderr with a nonzero exit code.
code = main(["fit", *common, "--s1", "0", "--s2", "3"])
print("exit code for an invalid option:", code)
