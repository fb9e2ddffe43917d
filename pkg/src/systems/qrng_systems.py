import os
import json
import logging
from dotmap import DotMap

from src.analysis.entropy import (
    parameter_sweep, rank_labels_by_variance, save_curve_csv, PROTOTYPE_SWEEP_LABELS,
)
from src.linalg.matrices import haar_random_unitary, load_matrix, matrix_from_json, require_square
from src.linalg.permanent import permanent_naive, permanent_ryser
from src.optics.fock import (
    FockState, collision_trend, full_distribution, postselect_collision_free,
    save_distribution_csv,
)
from src.optics.interferometer import MeshParameters, build_unitary, load_mesh, paper_u5
from src.qrng.bitio import PACKED, read_bits, sidecar_path, write_bits
from src.qrng.pipeline import (
    CONSECUTIVE, PAIR_MAJOR, RANDOM_PAIR, GeneratorConfig, bias_report, generate_bits,
    rate_comparison, source_sweep,
)
from src.randomness.nist import (
    MIN_BATTERY_BITS, battery_frame, battery_passed, run_battery, save_battery_report,
)
from src.utils.errors import ConfigurationError, InsufficientDataError
from src.utils.manifest import RunManifest
from src.utils.setup import resolve_path
from src.utils.utils import makedirs, save_json

logger = logging.getLogger(__name__)

PAPER_U5 = 'paper_u5'


def _plain(value):
    return value.toDict() if isinstance(value, DotMap) else value


def _is_set(value):
    return value is not None and not (isinstance(value, DotMap) and not value)


def require_seed(config):
    if not _is_set(config.seed):
        raise ConfigurationError('A seed is required (config "seed" or --seed).')
    try:
        return int(config.seed)
    except (TypeError, ValueError) as err:
        raise ConfigurationError(f'Seed must be an integer, got {config.seed!r}.') from err


def load_optics(config):
    '''Resolves the ``unitary`` / ``mesh`` entries of a config.

    Returns:
        (matrix or MeshParameters, path of the file it came from or None)
    '''
    has_unitary, has_mesh = _is_set(config.unitary), _is_set(config.mesh)
    if has_unitary == has_mesh:
        raise ConfigurationError('Exactly one of "unitary" and "mesh" must be given.')
    if has_mesh:
        if isinstance(config.mesh, str):
            path = resolve_path(config, config.mesh)
            return load_mesh(path), path
        try:
            return MeshParameters.from_json(_plain(config.mesh)), None
        except AttributeError as err:
            raise ConfigurationError(f'Malformed inline mesh: {err}') from err
    if isinstance(config.unitary, str):
        if config.unitary == PAPER_U5:
            return paper_u5(), None
        path = resolve_path(config, config.unitary)
        return load_matrix(path), path
    if isinstance(config.unitary, (DotMap, dict)):
        return matrix_from_json(_plain(config.unitary)), None
    raise ConfigurationError(f'Cannot interpret unitary entry {config.unitary!r}.')


def parse_state(value, name='input'):
    if not _is_set(value):
        raise ConfigurationError(f'Missing "{name}" occupation string.')
    if isinstance(value, str):
        return FockState.parse(value)
    return FockState(value)


def parse_pairing(pairing):
    '''Accepts ``"consecutive"``, ``{"mode": "consecutive"}`` or ``{"mode": "random_pair", "T": 4}``.'''
    if not _is_set(pairing):
        return CONSECUTIVE, None
    if isinstance(pairing, str):
        return pairing, None
    mode = pairing.mode or CONSECUTIVE
    t = pairing.T if mode == RANDOM_PAIR else None
    return mode, (int(t) if _is_set(t) else None)


def generator_config(config, optics=None):
    if optics is None:
        optics, _ = load_optics(config)
    pairing, pairing_t = parse_pairing(config.pairing)
    alternate = config.alternate_input
    return GeneratorConfig(
        unitary=optics,
        input=parse_state(config.input),
        postselect_collision_free=bool(config.postselect or False),
        pairing=pairing,
        pairing_t=pairing_t,
        seed=require_seed(config),
        alternate_input=parse_state(alternate, 'alternate_input') if _is_set(alternate) else None,
        emission=config.emission or PAIR_MAJOR,
    )


class QRNGSystem(object):
    """One CLI command run from a resolved DotMap config.

    Subclasses implement ``run`` and return the path of their main artifact
    (or the computed value when nothing is written).
    """
    command = None

    def __init__(self, config):
        self.config = config
        # Snapshot the config before attribute lookups add empty DotMap keys.
        self.manifest = RunManifest(self.command, config)
        self.manifest.seed = self._manifest_seed()
        if isinstance(config.config_path, str):
            self.manifest.add_input(config.config_path)

    def _manifest_seed(self):
        return require_seed(self.config) if _is_set(self.config.seed) else None

    def _out_path(self, key='out'):
        path = self.config[key]
        if not isinstance(path, str) or not path:
            raise ConfigurationError(f'An output path (--{key}) is required.')
        makedirs([os.path.dirname(os.path.abspath(path))])
        return path

    def _write_manifest(self, *artifacts):
        for path in artifacts:
            self.manifest.add_artifact(path)
        return self.manifest.write(artifacts[0])

    def run(self):
        raise NotImplementedError


class GenerateBitsSystem(QRNGSystem):
    command = 'gen'

    def run(self):
        config = self.config
        if not _is_set(config.bits) or int(config.bits) < 1:
            raise ConfigurationError(f'--bits must be a positive integer, got {config.bits!r}.')
        fmt = config.format or PACKED
        out = self._out_path()
        optics, source_path = load_optics(config)
        self.manifest.add_input(source_path)
        cfg = generator_config(config, optics)

        stream = generate_bits(cfg, int(config.bits))
        report = bias_report(stream)
        logger.info('Ones fraction %.6f over %d bits (z = %+.2f%s).', report.p1, report.n,
                    report.z_score, ', FLAGGED' if report.flagged else '')
        write_bits(stream, out, fmt)
        artifacts = [out] + ([sidecar_path(out)] if fmt == PACKED else [])
        self._write_manifest(*artifacts)
        return out


class DistributionSystem(QRNGSystem):
    command = 'dist'

    def run(self):
        optics, source_path = load_optics(self.config)
        self.manifest.add_input(source_path)
        U = build_unitary(optics) if isinstance(optics, MeshParameters) else optics
        dist = full_distribution(U, parse_state(self.config.input))
        if self.config.postselect:
            dist = postselect_collision_free(dist)
        out = self._out_path()
        save_distribution_csv(dist, out, drop_zero=True)
        logger.info('Wrote %s (%s, %d states).', out, dist.input.ket(), len(dist))
        self._write_manifest(out)
        return out


class EntropySweepSystem(QRNGSystem):
    command = 'sweep'

    def run(self):
        config = self.config
        if not _is_set(config.mesh):
            raise ConfigurationError('The entropy sweep needs a mesh (--mesh).')
        base, source_path = load_optics(config)
        self.manifest.add_input(source_path)
        labels = list(config.labels) if _is_set(config.labels) else list(PROTOTYPE_SWEEP_LABELS)
        grid = int(config.grid) if _is_set(config.grid) else 128
        out_dir = config.out
        if not isinstance(out_dir, str) or not out_dir:
            raise ConfigurationError('An output directory (--out) is required.')
        makedirs([out_dir])

        curves = parameter_sweep(base, labels, parse_state(config.input), grid_points=grid)
        paths = []
        for curve in curves:
            path = os.path.join(out_dir, f'theta_{curve.parameter_label}.csv')
            save_curve_csv(curve, path)
            paths.append(path)
        ranking_path = os.path.join(out_dir, 'variance_ranking.json')
        save_json([{'label': label, 'shannon_variance': variance}
                   for label, variance in rank_labels_by_variance(curves)], ranking_path)
        for path in paths + [ranking_path]:
            self.manifest.add_artifact(path)
        for path in paths + [ranking_path]:
            self.manifest.write(path)
        return out_dir


class BatteryTestSystem(QRNGSystem):
    command = 'test'

    def run(self):
        config = self.config
        in_path = config['in']
        if not isinstance(in_path, str):
            raise ConfigurationError('An input bit file (--in) is required.')
        stream = read_bits(in_path, config.format or PACKED)
        self.manifest.add_input(in_path)
        if len(stream) < MIN_BATTERY_BITS:
            raise InsufficientDataError(
                f'{in_path} holds {len(stream)} bits; the battery needs at least {MIN_BATTERY_BITS}.')
        results = run_battery(stream)
        logger.info('\n%s', battery_frame(results).to_string(index=False))
        logger.info('Battery %s.', 'passed' if battery_passed(results) else 'FAILED')
        out = self._out_path()
        save_battery_report(results, out)
        self._write_manifest(out)
        return out


class RateComparisonSystem(QRNGSystem):
    command = 'rate'

    def run(self):
        config = self.config
        modes, photons, pairs = int(config.modes), int(config.photons), int(config.pairs)
        if not modes >= photons >= 1 or pairs < 1:
            raise ConfigurationError(
                f'rate needs M >= N >= 1 and K >= 1, got M = {modes}, N = {photons}, K = {pairs}.')
        result = rate_comparison(modes, photons, pairs, require_seed(config))
        result.update({'modes': modes, 'photons': photons, 'pairs': pairs,
                       'seed': int(config.seed)})
        logger.info('Boson sampling %.4f bits/pair, branching path %.4f bits/pair.',
                    result['boson_bits_per_pair'], result['branching_bits_per_pair'])
        if isinstance(config.out, str) and config.out:
            out = self._out_path()
            save_json(result, out)
            self._write_manifest(out)
        return result


class PermanentSystem(QRNGSystem):
    command = 'perm'

    def run(self):
        config = self.config
        path = config.matrix
        if not isinstance(path, str):
            raise ConfigurationError('A matrix file (--matrix) is required.')
        A = require_square(load_matrix(path))
        self.manifest.add_input(path)
        value = permanent_naive(A) if config.naive else permanent_ryser(A)
        logger.info('Permanent of %dx%d matrix (%s): %r', A.shape[0], A.shape[1],
                    'naive' if config.naive else 'ryser', value)
        if isinstance(config.out, str) and config.out:
            out = self._out_path()
            save_json({'re': value.real, 'im': value.imag,
                       'method': 'naive' if config.naive else 'ryser'}, out)
            self._write_manifest(out)
        return value


class SourceSweepSystem(QRNGSystem):
    command = 'sources'

    def run(self):
        config = self.config
        optics, source_path = load_optics(config)
        self.manifest.add_input(source_path)
        inputs = config.inputs
        if isinstance(inputs, str):
            inputs = [s for s in inputs.split(';') if s.strip()]
        if not _is_set(inputs) or len(inputs) < 1:
            raise ConfigurationError('--inputs needs at least one occupation string.')
        frame = source_sweep(
            optics, [parse_state(s) for s in inputs], int(config.bits), require_seed(config),
            alternating=bool(config.alternating), postselect=bool(config.postselect),
            emission=config.emission or PAIR_MAJOR,
        )
        logger.info('\n%s', frame.to_string(index=False))
        out = self._out_path()
        save_json(json.loads(frame.to_json(orient='records', double_precision=15)), out)
        self._write_manifest(out)
        return out


class CollisionTrendSystem(QRNGSystem):
    command = 'collisions'

    def run(self):
        config = self.config
        modes, max_photons = int(config.modes), int(config.max_photons)
        if modes < 1 or not 1 <= max_photons <= modes:
            raise ConfigurationError(
                f'collisions needs 1 <= max photons <= modes, got {max_photons} and {modes}.')
        U = haar_random_unitary(modes, require_seed(config))
        frame = collision_trend(U, range(1, max_photons + 1))
        logger.info('\n%s', frame.to_string(index=False))
        out = self._out_path()
        frame.to_csv(out, index=False, float_format='%.17g')
        self._write_manifest(out)
        return out
