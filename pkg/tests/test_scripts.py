import csv
import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.mark.parametrize("name, expected", [("position_sweep", 2), ("nc_optimization", 2)])
def test_script_runs(tmp_path, name, expected):
    cmd = [sys.executable, str(SCRIPTS / f"{name}.py"), "--trials", "20", "--out-dir", str(tmp_path)]
    subprocess.run(cmd, check=True, capture_output=True)
    outputs = sorted(tmp_path.glob("*.csv"))
    assert len(outputs) == expected
    for path in outputs:
        with open(path, newline="") as f:
            assert len(list(csv.reader(f))) > 1
        assert Path(str(path) + ".manifest.json").exists()
