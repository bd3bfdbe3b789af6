import json

import numpy as np
import pytest

from wehrl.channels import amplifier, attenuator
from wehrl.errors import ShapeError
from wehrl.fock_core import FockCutoff, random_state, tensor
from wehrl.io import (
    fresh_path,
    read_channel,
    read_density,
    read_spectrum,
    write_channel,
    write_density,
    write_json,
    write_rows,
    write_spectrum,
    write_trace,
)
from wehrl.optimizer import minimize_wehrl_isospectral


def test_density_round_trip(tmp_path):
    rho = tensor(random_state(3, 1), random_state(3, 2))
    write_density(tmp_path / "s.txt", rho)
    back = read_density(tmp_path / "s.txt")
    assert back.modes == 2 and back.dim == 3
    assert np.array_equal(back.matrix, rho.matrix)


def test_density_rejects_garbage(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("hello\n1 2\n")
    with pytest.raises(ShapeError):
        read_density(p)


def test_spectrum_round_trip(tmp_path):
    write_spectrum(tmp_path / "p.txt", [0.2, 0.5, 0.3])
    assert np.allclose(read_spectrum(tmp_path / "p.txt").probs, [0.5, 0.3, 0.2])


@pytest.mark.parametrize("ch", [amplifier(2.0, FockCutoff(4)), attenuator(0.5, FockCutoff(3, 2))])
def test_channel_round_trip(tmp_path, ch):
    write_channel(tmp_path / "c.json", ch)
    assert "kraus" not in json.loads((tmp_path / "c.json").read_text())
    assert read_channel(tmp_path / "c.json").to_dict() == ch.to_dict()


def test_rows_nine_digits(tmp_path):
    write_rows(tmp_path / "t.csv", ["a", "b"], [(1, 1 / 3)])
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,0.333333333\n"


def test_fresh_path_never_overwrites(tmp_path):
    a = fresh_path(tmp_path, "r", ".json")
    a.write_text("x")
    b = fresh_path(tmp_path, "r", ".json")
    assert a != b and not b.exists()


def test_write_json_atomic(tmp_path):
    write_json(tmp_path / "x.json", {"b": 1, "a": 2})
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": 2, "b": 1}
    assert not (tmp_path / "x.json.tmp").exists()


def test_trace_export(tmp_path):
    tr = minimize_wehrl_isospectral([0.8, 0.2], FockCutoff(4), seed=0, budget=200)
    csv, state, summary = write_trace(tmp_path / "run", tr)
    lines = csv.read_text().splitlines()
    assert lines[0] == "iteration,objective" and len(lines) == len(tr.objective_history) + 1
    assert np.allclose(read_density(state).matrix, tr.best_state.matrix)
    assert json.loads(summary.read_text())["seed"] == 0
