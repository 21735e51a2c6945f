"""Wire formats: channel/code JSON schema round-trips and CSV number rendering."""

import json

import numpy as np
import pytest

from qcap import channels as qch
from qcap import linalg, serialize
from qcap.codes import CodeSubspace
from qcap.errors import FormatError, InvariantViolationError


def test_channel_round_trip_is_exact(rng):
    ch = qch.haar_random_channel(3, 2, 2, rng, name="probe")
    blob = serialize.canonical_json(serialize.channel_to_dict(ch))
    back = serialize.channel_from_dict(json.loads(blob))
    assert back.name == "probe"
    assert back.input_dim == 3 and back.output_dim == 2
    for a, b in zip(ch.kraus_ops, back.kraus_ops):
        assert np.array_equal(a, b)          # zero drift, not just allclose


def test_channel_file_round_trip(tmp_path, rng):
    ch = qch.phase_flip(0.25)
    path = tmp_path / "chan.json"
    serialize.save_channel(ch, path)
    back = serialize.load_channel(path)
    assert qch.channels_equal(ch, back)


def test_malformed_channel_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"input_dim": 2, "output_dim": 2}')
    with pytest.raises(FormatError):
        serialize.load_channel(path)
    path.write_text("not json at all")
    with pytest.raises(FormatError):
        serialize.load_channel(path)


def test_non_cp_channel_fails_invariant(tmp_path):
    ch = qch.identity_channel(2)
    data = serialize.channel_to_dict(ch)
    data["kraus"].append(data["kraus"][0])      # duplicate identity: defect 1
    path = tmp_path / "noncp.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InvariantViolationError):
        serialize.load_channel(path)


def test_matrix_pairs_schema_errors():
    with pytest.raises(FormatError):
        serialize.matrix_from_pairs([[1.0, 2.0]])
    with pytest.raises(FormatError):
        serialize.matrix_from_pairs([[[1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]])
    with pytest.raises(FormatError):
        serialize.matrix_from_pairs([])


def test_code_round_trip(rng):
    basis = linalg.haar_isometry(4, 2, rng)
    code = CodeSubspace(ambient_dim=4, code_dim=2, basis=basis)
    back = serialize.code_from_dict(serialize.code_to_dict(code))
    assert np.array_equal(code.basis, back.basis)


def test_csv_number_round_trip():
    values = [1 / 3, 0.1, 2**-52, 123456.789, 0.875]
    for v in values:
        assert float(serialize.csv_number(v)) == v
    assert serialize.csv_number(7) == "7"
    assert serialize.csv_number(True) == "true"


def test_canonical_json_is_deterministic():
    rec = {"b": 1.25, "a": [np.float64(0.1), np.int64(3)], "c": complex(1, -2)}
    assert serialize.canonical_json(rec) == serialize.canonical_json(rec)
    assert '"a"' in serialize.canonical_json(rec)
