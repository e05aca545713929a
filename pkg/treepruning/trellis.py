"""
Section t carries info bit u_t from state (u_{t-1}, u_{t-2}) and emits
u_t+u_{t-1}+u_{t-2} at position 2t and u_t+u_{t-2} at position 2t+1, which
is the bit placement matching the circulant parity checks of
codes.make_tailbiting_conv.
"""
import logging

import numpy as np
from scipy.special import logsumexp

from .exceptions import DecodingError, InvalidCode


logger = logging.getLogger(__name__)

MEMORY = 2
STATES = 1 << MEMORY


def next_state(state, bit):
    return (bit << 1) | (state >> 1)


def branch_output(state, bit):
    """
    Coded pair of one trellis branch; state encodes 2*u_{t-1} + u_{t-2}.
    """
    previous, older = state >> 1, state & 1
    return bit ^ previous ^ older, bit ^ older


#: NEXT[s, u] and OUTPUT[s, u, position] tables
NEXT = np.array([[next_state(s, u) for u in (0, 1)] for s in range(STATES)])
OUTPUT = np.array([[branch_output(s, u) for u in (0, 1)] for s in range(STATES)])


def encode(info_bits):
    """
    Tailbiting encoder: the initial state is loaded with the last two info
    bits so the trellis path starts and ends in the same state.

    :param info_bits: 0/1 sequence of length L >= 3
    :returns: uint8 codeword of length 2L
    """
    info = [int(bit) for bit in info_bits]
    if len(info) < 3:
        raise InvalidCode('tailbiting encoder needs at least 3 info bits')
    word = np.zeros(2 * len(info), dtype=np.uint8)
    for t, bit in enumerate(info):
        state = (info[t - 1] << 1) | info[t - 2]
        word[2 * t], word[2 * t + 1] = branch_output(state, bit)
    return word


def _branch_logs(log_lik):
    sections = log_lik.shape[0] // 2
    even = log_lik[0::2]
    odd = log_lik[1::2]
    gamma = np.empty((sections, STATES, 2))
    for s in range(STATES):
        for u in (0, 1):
            gamma[:, s, u] = even[:, OUTPUT[s, u, 0]] + odd[:, OUTPUT[s, u, 1]]
    return gamma


def _start_pass(gamma, start):
    """
    Forward-backward with start and end state pinned to ``start``.

    :returns: joint log metrics per section and branch, shape (L, 4, 2)
    """
    sections = gamma.shape[0]
    alpha = np.full((sections + 1, STATES), -np.inf)
    beta = np.full((sections + 1, STATES), -np.inf)
    alpha[0, start] = 0.0
    beta[sections, start] = 0.0

    for t in range(sections):
        metrics = alpha[t][:, None] + gamma[t]
        for target in range(STATES):
            alpha[t + 1, target] = logsumexp(metrics[NEXT == target])

    for t in range(sections - 1, -1, -1):
        beta[t] = logsumexp(gamma[t] + beta[t + 1][NEXT], axis=1)

    return alpha[:-1][:, :, None] + gamma + beta[1:][:, NEXT]


def bcjr_marginals(lik):
    """
    Exact per-bit posteriors of the tailbiting code, summing the four
    pinned-state passes through a shared maximum shift.

    :param lik: Likelihood pairs, shape (n, 2)
    :returns: float array of shape (n, 2), rows summing to 1
    """
    lik = np.asarray(lik, dtype=float)
    n = lik.shape[0]
    if n % 2 or n < 6:
        raise InvalidCode('tailbiting trellis needs an even blocklength >= 6, got %d' % n)

    with np.errstate(divide='ignore', invalid='ignore'):
        gamma = _branch_logs(np.log(lik))
        sections = n // 2
        logs = np.full((n, 2, STATES), -np.inf)
        for start in range(STATES):
            joint = _start_pass(gamma, start)
            for position in (0, 1):
                for value in (0, 1):
                    selected = OUTPUT[:, :, position] == value
                    logs[position::2, value, start] = logsumexp(joint[:, selected], axis=1)

        shift = logs.reshape(n, -1).max(axis=1)
        if not np.isfinite(shift).all():
            raise DecodingError('received word has zero probability on the tailbiting trellis')
        probabilities = np.exp(logs - shift[:, None, None]).sum(axis=2)

    logger.debug('BCJR over %d sections', sections)
    return probabilities / probabilities.sum(axis=1, keepdims=True)
