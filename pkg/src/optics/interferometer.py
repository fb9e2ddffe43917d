"""Reck-style meshes of Mach-Zehnder interferometers and the fixed U5 fixture.

MZI convention: a cell acting on modes (k, k+1) applies

    B(ti, te) = i e^{i ti/2} [[e^{i te} sin(ti/2),  cos(ti/2)],
                              [e^{i te} cos(ti/2), -sin(ti/2)]]

so ti = pi is the fully transmissive (bar) point and te is a phase on the
cell's first input port.

Cells are numbered column by column starting from mode pair (1, 2): column c
holds the pairs (c, c+1), (c-1, c), ..., (1, 2). The mesh matrix is
U = D B_1 B_2 ... B_N, i.e. cell N is the first device the light meets and
cell 1 the last one before the detectors.
"""

import re
import math
from collections import namedtuple
import numpy as np

from src.linalg.matrices import as_matrix
from src.utils.errors import ConfigurationError, MeshLabelError
from src.utils.utils import load_json, save_json, derive_rng

TWO_PI = 2 * np.pi

INTERNAL = 'internal'
EXTERNAL = 'external'

CellRef = namedtuple('CellRef', ['cell', 'angle'])

_LABEL = re.compile(r'^\s*(\d+)\s*([IiEe])\s*$')


def wrap_angle(theta):
    '''Maps an angle into [0, 2pi).'''
    wrapped = float(np.mod(float(theta), TWO_PI))
    # np.mod can round up to exactly 2pi for tiny negative inputs.
    return 0.0 if wrapped >= TWO_PI else wrapped


class MziCell(namedtuple('MziCell', ['target_pair', 'theta_internal', 'theta_external'])):
    """One MZI on the adjacent, 1-based mode pair ``target_pair``."""
    __slots__ = ()


class MeshParameters(object):
    """Angles of a full Reck triangle on ``modes`` modes.

    Angles are wrapped into [0, 2pi) on construction, so two parameter sets
    that differ by multiples of 2pi compare (and build) identically.
    """

    def __init__(self, modes, cells, output_phases=None):
        modes = int(modes)
        if modes < 1:
            raise ConfigurationError(f'A mesh needs at least one mode, got {modes}.')
        layout = reck_layout(modes)
        cells = list(cells)
        if len(cells) != len(layout):
            raise ConfigurationError(
                f'A {modes}-mode Reck mesh has {len(layout)} cells, got {len(cells)}.')
        checked = []
        for index, (cell, pair) in enumerate(zip(cells, layout), start=1):
            cell = _as_cell(cell)
            if tuple(cell.target_pair) != pair:
                raise ConfigurationError(
                    f'Cell {index} must act on modes {pair}, got {tuple(cell.target_pair)}.')
            checked.append(MziCell(pair, wrap_angle(cell.theta_internal),
                                   wrap_angle(cell.theta_external)))
        if output_phases is None:
            output_phases = [0.0] * modes
        output_phases = [wrap_angle(p) for p in output_phases]
        if len(output_phases) != modes:
            raise ConfigurationError(
                f'Expected {modes} output phases, got {len(output_phases)}.')
        self.modes = modes
        self.cells = tuple(checked)
        self.output_phases = tuple(output_phases)

    @property
    def num_cells(self):
        return len(self.cells)

    def __eq__(self, other):
        return (isinstance(other, MeshParameters) and self.modes == other.modes
                and self.cells == other.cells and self.output_phases == other.output_phases)

    def __repr__(self):
        return f'MeshParameters(modes={self.modes}, cells={self.num_cells})'

    def to_json(self):
        return {
            'modes': self.modes,
            'cells': [
                {'pair': list(c.target_pair), 'theta_internal': c.theta_internal,
                 'theta_external': c.theta_external}
                for c in self.cells
            ],
            'output_phases': list(self.output_phases),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            cells = [
                MziCell(tuple(c['pair']), float(c['theta_internal']), float(c['theta_external']))
                for c in obj['cells']
            ]
            return cls(obj['modes'], cells, obj.get('output_phases'))
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, ConfigurationError):
                raise
            raise ConfigurationError(f'Malformed mesh description: {err}') from err


def _as_cell(cell):
    if isinstance(cell, MziCell):
        return cell
    if isinstance(cell, dict):
        return MziCell(tuple(cell.get('pair', cell.get('target_pair', ()))),
                       cell['theta_internal'], cell['theta_external'])
    try:
        pair, theta_internal, theta_external = cell
    except (TypeError, ValueError) as err:
        raise ConfigurationError(f'Cannot interpret {cell!r} as an MZI cell.') from err
    return MziCell(tuple(pair), theta_internal, theta_external)


def reck_layout(modes):
    '''1-based mode pairs of cells 1..m(m-1)/2 in numbering order.'''
    return [(k, k + 1) for column in range(1, modes) for k in range(column, 0, -1)]


def mzi_block(theta_internal, theta_external):
    s = math.sin(theta_internal / 2)
    c = math.cos(theta_internal / 2)
    e = np.exp(1j * theta_external)
    return 1j * np.exp(1j * theta_internal / 2) * np.array([[e * s, c],
                                                            [e * c, -s]])


def build_unitary(params):
    if not isinstance(params, MeshParameters):
        raise ConfigurationError(f'Expected MeshParameters, got {type(params).__name__}.')
    U = np.diag(np.exp(1j * np.asarray(params.output_phases)))
    for cell in params.cells:
        k = cell.target_pair[0] - 1
        # Right-multiplying embeds the block on columns k, k+1.
        U[:, k:k + 2] = U[:, k:k + 2] @ mzi_block(cell.theta_internal, cell.theta_external)
    return as_matrix(U)


def mzi_cell_index(label, modes):
    match = _LABEL.match(str(label))
    num_cells = modes * (modes - 1) // 2
    if match is None:
        raise MeshLabelError(f'Unknown MZI label {label!r}; expected "<k>I" or "<k>E".')
    cell = int(match.group(1))
    if not 1 <= cell <= num_cells:
        raise MeshLabelError(
            f'MZI label {label!r} addresses cell {cell}, but a {modes}-mode mesh has cells 1..{num_cells}.')
    angle = INTERNAL if match.group(2).upper() == 'I' else EXTERNAL
    return CellRef(cell, angle)


def with_angle(params, label, value):
    '''Returns a copy of ``params`` with the angle addressed by ``label`` set to ``value``.'''
    ref = mzi_cell_index(label, params.modes)
    cells = list(params.cells)
    old = cells[ref.cell - 1]
    if ref.angle == INTERNAL:
        cells[ref.cell - 1] = old._replace(theta_internal=value)
    else:
        cells[ref.cell - 1] = old._replace(theta_external=value)
    return MeshParameters(params.modes, cells, params.output_phases)


def get_angle(params, label):
    ref = mzi_cell_index(label, params.modes)
    cell = params.cells[ref.cell - 1]
    return cell.theta_internal if ref.angle == INTERNAL else cell.theta_external


def identity_mesh(modes):
    '''All cells at the bar point; builds the identity up to per-mode phases.'''
    cells = [MziCell(pair, np.pi, 0.0) for pair in reck_layout(modes)]
    return MeshParameters(modes, cells)


def random_mesh(modes, seed):
    rng = derive_rng(seed)
    layout = reck_layout(modes)
    angles = rng.uniform(0.0, TWO_PI, size=(len(layout), 2))
    cells = [MziCell(pair, a[0], a[1]) for pair, a in zip(layout, angles)]
    return MeshParameters(modes, cells, rng.uniform(0.0, TWO_PI, size=modes))


def load_mesh(f_path):
    try:
        obj = load_json(f_path)
    except (OSError, ValueError) as err:
        raise ConfigurationError(f'Cannot read mesh file {f_path}: {err}') from err
    return MeshParameters.from_json(obj)


def save_mesh(params, f_path):
    save_json(params.to_json(), f_path)


# Haar-random five-mode unitary of the silicon-photonic prototype, five
# decimals per entry as printed. Unitary only to ~1e-5.
_PAPER_U5 = (
    (0.01311 + 0.33011j, 0.65648 + 0.18793j, 0.05465 + 0.16879j, 0.49720 + 0.04980j, 0.18845 + 0.32849j),
    (0.14759 + 0.47792j, -0.24696 - 0.23840j, 0.34173 + 0.03745j, 0.25733 + 0.55151j, -0.05311 - 0.37496j),
    (0.32357 + 0.04518j, -0.10722 + 0.56648j, 0.50920 + 0.17247j, -0.29096 - 0.15241j, 0.39168 - 0.10264j),
    (0.35818 - 0.46781j, -0.13350 - 0.15289j, -0.09973 + 0.00157j, 0.07696 + 0.51280j, 0.42931 + 0.38538j),
    (-0.31110 + 0.30001j, -0.20562 + 0.00389j, 0.13427 - 0.73030j, -0.01605 - 0.05381j, 0.35379 + 0.30204j),
)


def paper_u5():
    return as_matrix(_PAPER_U5)
