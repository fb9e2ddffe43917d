import os
import time
import logging
import jsonschema
from dotmap import DotMap

import src
from src.utils.utils import load_json, save_json, sha256_file

logger = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), 'run_manifest.schema.json')
MANIFEST_SUFFIX = '.manifest.json'


def load_schema():
    return load_json(SCHEMA_PATH)


def manifest_path(artifact_path):
    return f'{artifact_path}{MANIFEST_SUFFIX}'


class RunManifest(object):
    """Collects provenance for one CLI run and writes it next to its artifact.

    Everything except ``duration_s`` is a pure function of the command, its
    resolved config, the seed and the input file contents.
    """

    def __init__(self, command, config, seed=None):
        self.command = command
        self.config = config.toDict() if isinstance(config, DotMap) else dict(config)
        self.seed = None if seed is None else int(seed)
        self.input_hashes = {}
        self.artifacts = []
        self._start = time.perf_counter()

    def add_input(self, path):
        if path and os.path.isfile(path):
            self.input_hashes[os.path.basename(path)] = sha256_file(path)

    def add_artifact(self, path):
        self.artifacts.append(os.path.basename(path))

    def to_dict(self):
        return {
            'command': self.command,
            'config': _jsonable(self.config),
            'seed': self.seed,
            'tool_version': src.__version__,
            'input_hashes': dict(sorted(self.input_hashes.items())),
            'artifacts': list(self.artifacts),
            'duration_s': round(time.perf_counter() - self._start, 6),
        }

    def write(self, artifact_path):
        record = self.to_dict()
        jsonschema.validate(record, load_schema())
        path = manifest_path(artifact_path)
        save_json(record, path)
        logger.info('Wrote manifest %s', path)
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, 'tolist'):
        return _jsonable(obj.tolist())
    return str(obj)
