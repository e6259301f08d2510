# # The command line runner
#
# Every experiment can also be driven from a JSON config.  This runs the
# configs in demos/configs through the same entry point as `equimeasure`.

import json
import pathlib
import tempfile

from equimeasure import cli

configs = pathlib.Path(__file__).parent / "configs"
runs = [("pullback", "square_pullback.json"), ("verify", "square_verify.json"),
        ("verify", "exceptional_seed_verify.json"), ("capacity", "two_point_capacity.json"),
        ("exceptional", "lattes_exceptional.json")]
with tempfile.TemporaryDirectory() as tmp:
    for command, name in runs:
        out = pathlib.Path(tmp) / "out.json"
        code = cli.main([command, "--config", str(configs / name), "--out", str(out)])
        doc = json.loads(out.read_text())
        summary = doc.get("status") or doc.get("atoms") or doc.get("weights") or doc.get("points")
        print(f"{command:12s} {name:30s} exit={code}  {summary}")
