import json

import numpy as np
import pandas as pd

from hetbounds_python import __version__
from hetbounds_python.config import RunConfig, load_run_config
from hetbounds_python.write_outputs import manifest, write_outputs


def test_manifest_carries_configuration():
    document = manifest(RunConfig(alpha=0.1))
    assert document["package"] == "hetbounds_python"
    assert document["version"] == __version__
    assert document["config"]["alpha"] == 0.1


def test_tables_documents_and_manifest(tmp_path):
    frame = pd.DataFrame({"z": [0.1, 0.2], "value": [1.0 / 3.0, np.float64(2.5)]})
    paths = write_outputs(
        tmp_path / "out", RunConfig(), frames={"curves": frame, "bands": None},
        documents={"diagnostics": {"k": np.int64(3), "beta": np.array([0.5, 1.5])}},
    )
    names = sorted(path.name for path in paths)
    assert names == ["curves.csv", "diagnostics.json", "manifest.json"]
    text = (tmp_path / "out" / "curves.csv").read_text()
    assert text.splitlines() == ["z,value", "0.1,0.3333333333", "0.2,2.5"]
    diagnostics = json.loads((tmp_path / "out" / "diagnostics.json").read_text())
    assert diagnostics == {"beta": [0.5, 1.5], "k": 3}


def test_repeated_writes_are_identical(tmp_path):
    frame = pd.DataFrame({"z": np.linspace(0, 1, 7), "theta": np.sin(np.linspace(0, 1, 7))})
    config = RunConfig(seed=4)
    first = write_outputs(tmp_path / "a", config, frames={"curves": frame})
    second = write_outputs(tmp_path / "b", config, frames={"curves": frame})
    for one, other in zip(first, second):
        assert one.read_bytes() == other.read_bytes()


def test_manifest_reloads_the_configuration(tmp_path):
    config = RunConfig(alpha=0.1, folds=3, seed=9)
    write_outputs(tmp_path, config)
    assert load_run_config(tmp_path / "manifest.json") == config
