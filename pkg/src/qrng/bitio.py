"""Bit stream files.

packed: bits MSB-first within each byte, last byte zero-padded; the exact bit
        length lives in the sidecar ``<path>.meta.json``.
ascii:  one '0' or '1' character per bit, no separators.
"""

import os
import numpy as np

from src.qrng.pipeline import BitStream
from src.utils.errors import ConfigurationError, DomainError, InsufficientDataError
from src.utils.utils import load_json, save_json

PACKED = 'packed'
ASCII = 'ascii'
FORMATS = (PACKED, ASCII)
SIDECAR_SUFFIX = '.meta.json'


def sidecar_path(f_path):
    return f'{f_path}{SIDECAR_SUFFIX}'


def _check_format(fmt):
    if fmt not in FORMATS:
        raise ConfigurationError(f'Unknown bit file format {fmt!r}; expected one of {FORMATS}.')


def write_bits(stream, f_path, fmt=PACKED):
    _check_format(fmt)
    bits = np.asarray(getattr(stream, 'bits', stream), dtype=np.uint8)
    if fmt == PACKED:
        with open(f_path, 'wb') as f:
            f.write(np.packbits(bits, bitorder='big').tobytes())
        sidecar = {'format': PACKED, 'n_bits': int(bits.size)}
        meta = getattr(stream, 'meta', None)
        if meta is not None:
            sidecar['meta'] = meta.to_dict()
        save_json(sidecar, sidecar_path(f_path))
    else:
        with open(f_path, 'wb') as f:
            f.write((bits + ord('0')).tobytes())
    return f_path


def read_bits(f_path, fmt=PACKED, n_bits=None):
    _check_format(fmt)
    if not os.path.isfile(f_path):
        raise InsufficientDataError(f'Bit file {f_path} does not exist.')
    with open(f_path, 'rb') as f:
        raw = f.read()
    if fmt == PACKED:
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder='big')
        if n_bits is None and os.path.isfile(sidecar_path(f_path)):
            n_bits = int(load_json(sidecar_path(f_path))['n_bits'])
        if n_bits is not None:
            if n_bits > bits.size:
                raise InsufficientDataError(
                    f'{f_path} holds {bits.size} bits, sidecar declares {n_bits}.')
            bits = bits[:n_bits]
    else:
        text = b''.join(raw.split())
        bits = np.frombuffer(text, dtype=np.uint8) - ord('0')
        if bits.size and bits.max() > 1:
            raise DomainError(f'{f_path} contains characters other than 0 and 1.')
    return BitStream(bits)
