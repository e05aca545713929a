import collections
import logging
import math

import numpy as np
from scipy import stats

from .exceptions import InvalidChannel


logger = logging.getLogger(__name__)

BEC = 'bec'
BAWGN = 'bawgn'

#: Symbol written for an erased position in BEC outputs
ERASED = -1

#: Received file token for an erasure
ERASURE_TOKEN = '?'

LikelihoodPair = collections.namedtuple('LikelihoodPair', ['q0', 'q1'])


class ChannelSpec(object):
    """
    A channel kind with its parameter: erasure probability for BEC,
    noise variance for BAWGN (bit 0 is sent as +1, bit 1 as -1).
    """

    __slots__ = ('kind', 'param')

    def __init__(self, kind, param):
        kind = kind.lower()
        try:
            param = float(param)
        except (TypeError, ValueError):
            raise InvalidChannel('channel parameter must be a number, got %r' % (param,))

        if kind == BEC:
            if not 0.0 <= param <= 1.0:
                raise InvalidChannel('erasure probability must lie in [0, 1], got %s' % param)
        elif kind == BAWGN:
            if not param > 0.0 or math.isinf(param):
                raise InvalidChannel('noise variance must be positive and finite, got %s' % param)
        else:
            raise InvalidChannel('unknown channel kind %r' % kind)

        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'param', param)

    def __setattr__(self, name, value):
        raise AttributeError('ChannelSpec is immutable')

    def __reduce__(self):
        return self.__class__, (self.kind, self.param)

    @property
    def is_erasure(self):
        return self.kind == BEC

    @property
    def esn0_db(self):
        if self.is_erasure:
            return None
        return 10.0 * math.log10(1.0 / (2.0 * self.param))

    @property
    def label(self):
        return '%s:%s' % (self.kind, repr(self.param))

    def __eq__(self, other):
        return isinstance(other, ChannelSpec) and (self.kind, self.param) == (other.kind, other.param)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.kind, self.param))

    def __repr__(self):
        return '<ChannelSpec %s>' % self.label


def parse_channel(text):
    """
    Parse ``bec:EPS`` or ``bawgn:SIGMA2``.
    """
    kind, sep, param = text.strip().partition(':')
    if not sep:
        raise InvalidChannel('channel must look like bec:EPS or bawgn:SIGMA2, got %r' % text)
    return ChannelSpec(kind, param)


def sigma2_from_esn0_db(esn0_db):
    return 1.0 / (2.0 * 10.0 ** (float(esn0_db) / 10.0))


def transmit(word, ch, rng):
    """
    Send a word through the channel.

    :param word: 0/1 array
    :param ch: A ChannelSpec
    :param rng: A numpy Generator
    :returns: int8 array with ERASED marks for BEC, float array for BAWGN
    """
    word = np.asarray(word, dtype=np.int8)
    if ch.is_erasure:
        erased = rng.random(word.size) < ch.param
        return np.where(erased, np.int8(ERASED), word).astype(np.int8)
    signal = 1.0 - 2.0 * word
    return signal + rng.normal(0.0, math.sqrt(ch.param), size=word.size)


def likelihood(y, ch):
    """
    Transition probabilities (BEC) or densities (BAWGN) of one symbol.

    :param y: 0, 1 or ERASED for BEC; a real number for BAWGN
    :param ch: A ChannelSpec
    :returns: A LikelihoodPair (Q(y|0), Q(y|1))
    """
    if ch.is_erasure:
        if y == ERASED:
            pair = LikelihoodPair(ch.param, ch.param)
        elif y == 0:
            pair = LikelihoodPair(1.0 - ch.param, 0.0)
        elif y == 1:
            pair = LikelihoodPair(0.0, 1.0 - ch.param)
        else:
            raise InvalidChannel('%r is not a BEC symbol' % (y,))
        if pair.q0 + pair.q1 <= 0.0:
            raise InvalidChannel('symbol %r has probability zero on %s' % (y, ch.label))
        return pair

    try:
        y = float(y)
    except (TypeError, ValueError):
        raise InvalidChannel('%r is not a BAWGN output' % (y,))
    if not math.isfinite(y):
        raise InvalidChannel('%r is not a BAWGN output' % (y,))
    scale = math.sqrt(ch.param)
    return LikelihoodPair(float(stats.norm.pdf(y, loc=1.0, scale=scale)),
                          float(stats.norm.pdf(y, loc=-1.0, scale=scale)))


def likelihoods(outputs, ch):
    """
    Per-bit likelihood pairs of a received word, each rescaled so that its
    larger entry is 1. Decisions and normalized marginals do not depend on
    the per-bit scale.

    :param outputs: Channel output array
    :param ch: A ChannelSpec
    :returns: float array of shape (n, 2)
    """
    outputs = np.asarray(outputs)
    if ch.is_erasure:
        if not np.isin(outputs, (0, 1, ERASED)).all():
            raise InvalidChannel('BEC outputs must be 0, 1 or ERASED')
        if ch.param == 0.0 and (outputs == ERASED).any():
            raise InvalidChannel('erasure received on %s' % ch.label)
        if ch.param == 1.0 and (outputs != ERASED).any():
            raise InvalidChannel('unerased symbol received on %s' % ch.label)
        pairs = np.ones((outputs.size, 2))
        pairs[outputs == 0, 1] = 0.0
        pairs[outputs == 1, 0] = 0.0
        return pairs

    outputs = outputs.astype(float)
    if not np.isfinite(outputs).all():
        raise InvalidChannel('BAWGN outputs must be finite')
    logs = np.stack([-(outputs - 1.0) ** 2, -(outputs + 1.0) ** 2], axis=1) / (2.0 * ch.param)
    return np.exp(logs - logs.max(axis=1, keepdims=True))


def parse_received(lines, ch):
    """
    Read a received word, one symbol per line: 0, 1 or ? for BEC, a decimal
    number for BAWGN. Blank lines and ``#`` comments are skipped.
    """
    symbols = []
    for number, line in enumerate(lines, 1):
        token = line.split('#', 1)[0].strip()
        if not token:
            continue
        if ch.is_erasure:
            if token == ERASURE_TOKEN:
                symbols.append(ERASED)
            elif token in ('0', '1'):
                symbols.append(int(token))
            else:
                raise InvalidChannel('line %d: %r is not a BEC symbol' % (number, token))
        else:
            try:
                symbols.append(float(token))
            except ValueError:
                raise InvalidChannel('line %d: %r is not a number' % (number, token))
    dtype = np.int8 if ch.is_erasure else float
    return np.array(symbols, dtype=dtype)
