import os
import json
import hashlib
import numpy as np


def load_json(f_path):
    with open(f_path, 'r') as f:
        return json.load(f)


def save_json(obj, f_path, indent=2):
    with open(f_path, 'w') as f:
        json.dump(obj, f, ensure_ascii=False, indent=indent, sort_keys=True)
        f.write('\n')


def makedirs(dir_list):
    for dir in dir_list:
        if dir and not os.path.exists(dir):
            os.makedirs(dir)


def sha256_file(f_path, chunk_size=1 << 20):
    digest = hashlib.sha256()
    with open(f_path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()


# Fixed stream keys for the counter-based seed split. A consumer always asks
# for the same key, so adding a new consumer never shifts existing streams.
STREAM_SAMPLES_A = 0
STREAM_SAMPLES_B = 1
STREAM_PAIR_SELECTION = 2
STREAM_HAAR = 3
STREAM_BRANCHING = 4


def derive_rng(seed, *stream):
    '''Returns a numpy Generator for sub-stream ``stream`` of ``seed``.

    ``SeedSequence(seed, spawn_key=stream)`` hashes the user seed together
    with the stream key, so sub-generators are independent of each other and
    fully determined by (seed, stream).
    '''
    if seed is None:
        raise ValueError('A seed is required; clock-based seeding is not supported.')
    # Negative 64-bit seeds map onto their two's-complement value.
    sequence = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(sequence))


def as_rng(seed_or_rng, *stream):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return derive_rng(seed_or_rng, *stream)
