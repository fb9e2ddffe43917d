import hashlib
import json
import jsonschema
import numpy as np
import pytest
from dotmap import DotMap

import src
from src.utils.manifest import RunManifest, load_schema, manifest_path


def test_record_validates_against_schema(tmp_path):
    artifact = tmp_path / 'bits.bin'
    artifact.write_bytes(b'\x00')
    manifest = RunManifest('gen', DotMap({'seed': 7, 'input': '1,1,0,0,0'}), seed=7)
    manifest.add_artifact(str(artifact))
    record = manifest.to_dict()
    jsonschema.validate(record, load_schema())
    assert record['command'] == 'gen'
    assert record['seed'] == 7
    assert record['tool_version'] == src.__version__
    assert record['config'] == {'seed': 7, 'input': '1,1,0,0,0'}
    assert record['artifacts'] == ['bits.bin']
    assert record['duration_s'] >= 0


def test_seedless_commands_record_null_seed():
    record = RunManifest('perm', {'matrix': 'ones_4.json'}).to_dict()
    assert record['seed'] is None
    jsonschema.validate(record, load_schema())


def test_input_hashes(tmp_path):
    path = tmp_path / 'matrix.json'
    path.write_bytes(b'{"rows": 1}')
    manifest = RunManifest('perm', {})
    manifest.add_input(str(path))
    manifest.add_input(str(tmp_path / 'missing.json'))
    manifest.add_input(None)
    assert manifest.to_dict()['input_hashes'] == {
        'matrix.json': hashlib.sha256(b'{"rows": 1}').hexdigest()}


def test_write_places_manifest_next_to_artifact(tmp_path):
    artifact = str(tmp_path / 'dist.csv')
    path = RunManifest('dist', {'postselect': False}).write(artifact)
    assert path == manifest_path(artifact) == artifact + '.manifest.json'
    with open(path) as f:
        record = json.load(f)
    assert set(record) == set(load_schema()['required'])


def test_numpy_values_become_plain_json():
    record = RunManifest('sweep', {'grid': np.int64(4), 'labels': ('1I', '2I'),
                                   'angles': np.array([0.0, 0.5])}).to_dict()
    assert record['config'] == {'grid': 4, 'labels': ['1I', '2I'], 'angles': [0.0, 0.5]}


def test_invalid_record_rejected(tmp_path):
    with pytest.raises(jsonschema.ValidationError):
        RunManifest('', {}).write(str(tmp_path / 'out.json'))
    record = RunManifest('gen', {}).to_dict()
    record['input_hashes'] = {'config.json': 'not-a-digest'}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(record, load_schema())
