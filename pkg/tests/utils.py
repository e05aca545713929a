import os
import shutil
import tempfile

import numpy as np

from treepruning.channels import BAWGN, BEC, ChannelSpec, transmit
from treepruning.codes import ParityCheckMatrix, gf2_rank_and_nullspace, make_random, sample_codeword
from treepruning.gmrf import GeneralizedMRF

#: Hamming (7,4) parity checks
HAMMING_ROWS = ((0, 1, 2, 4), (0, 1, 3, 5), (0, 2, 3, 6))

SWEEP_CONFIG = """
[code]
family = repetition
n = 6

[channel]
kind = bec

[decoders]
list =
    none
    bp:inf
    tp:bec:2
    map-gauss

[sweep]
grid = 0.0, 0.3
trials = 20
batch = 7
seed = 11
"""


def hamming():
    return ParityCheckMatrix(7, HAMMING_ROWS, name='hamming7')


def random_code(rng, n_range=(4, 9), m_range=(2, 6)):
    return make_random(int(rng.integers(*n_range)), int(rng.integers(*m_range)), rng)


def received(H, ch, rng):
    """
    (transmitted codeword, channel outputs)
    """
    _, basis = gf2_rank_and_nullspace(H)
    word = sample_codeword(basis, rng)
    return word, transmit(word, ch, rng)


def channels(rng):
    return [ChannelSpec(BEC, rng.uniform(0.2, 0.6)), ChannelSpec(BAWGN, rng.uniform(0.4, 1.2))]


def triangle(weights=None):
    """
    Positive model on the 3-cycle 0-1-2.
    """
    if weights is None:
        weights = [(0.3, 0.7), (0.6, 0.4), (0.5, 0.5)]
    tables = [((1.0, 0.4), (0.4, 1.0)), ((0.8, 0.3), (0.2, 0.9)), ((0.5, 1.0), (1.0, 0.7))]
    return GeneralizedMRF(weights, [(0, 1), (1, 2), (0, 2)], tables)


def normalized(pair):
    pair = np.asarray(pair, dtype=float)
    return pair / pair.sum(axis=-1, keepdims=True)


class TempDir(object):
    """
    Scratch directory removed on exit.
    """

    def __enter__(self):
        self.path = tempfile.mkdtemp(prefix='treepruning-')
        return self

    def __exit__(self, *exc_info):
        shutil.rmtree(self.path, ignore_errors=True)

    def write(self, name, content):
        path = os.path.join(self.path, name)
        with open(path, 'w') as handle:
            handle.write(content)
        return path

    def join(self, name):
        return os.path.join(self.path, name)
