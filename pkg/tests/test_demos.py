import json
import pathlib
import runpy

import pytest

from cph.cli import run

DEMOS = pathlib.Path(__file__).resolve().parents[1] / "demos"


@pytest.mark.parametrize("script", sorted(p.name for p in DEMOS.glob("*.py")))
def test_demo_runs(script, capsys):
    runpy.run_path(str(DEMOS / script), run_name="__main__")
    assert capsys.readouterr().out


@pytest.mark.parametrize("name,argv", [
    ("nilpotent_pair.json", ["analyze-cpmap"]),
    ("scaled_shift.json", ["similarity"]),
    ("leaky_chain.json", ["analyze-markov", "--verify-general"]),
    ("nilpotent_pair.json", ["dilate", "--levels", "3"]),
])
def test_sample_inputs(name, argv, capsys):
    code = run([argv[0], str(DEMOS / "inputs" / name), *argv[1:]])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["schema_version"] == "1"
