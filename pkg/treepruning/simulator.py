"""
Trial k of grid point p draws from a stream keyed by (seed, p, k), so results
do not depend on the number of worker processes.
"""
import collections
import csv
import logging
import math
import multiprocessing

import numpy as np
from scipy import stats
from tqdm import tqdm

from .channels import BAWGN, BEC, ChannelSpec, likelihoods, transmit
from .codes import build_tanner, gf2_rank_and_nullspace, make_random, make_tailbiting_conv, sample_codeword
from .config import WILSON
from .decoders import (erasure_known, map_decode_bec_gauss, map_decode_enumeration,
                       map_decode_tailbiting_bcjr, tp_decode)
from .exceptions import InvalidScheme, TreePruningException, TrialError
from .gmrf import dualize, exact_marginals_bruteforce, posterior_marginal_enumeration
from .sawtree import BEC_ADAPTIVE, DEFAULT_NODE_BUDGET, FULL, TruncationScheme, build_saw_tree
from .utils import format_number, trial_rng


logger = logging.getLogger(__name__)

#: Header of the result file, in column order
CSV_HEADER = ('code', 'channel', 'noise', 'decoder', 'scheme', 't', 'ell',
              'trials', 'bits', 'bit_errors', 'ber', 'ci95', 'seed')

#: Header of the tree statistics output
TREE_STATS_HEADER = ('root', 'scheme', 't', 'nodes', 'max_depth', 'terminated', 'truncated')

#: Largest deviation an oracle suite tolerates
ORACLE_TOLERANCE = 1e-9

#: Two-sided 95% normal quantile
Z95 = stats.norm.ppf(0.975)


def confidence_halfwidth(errors, bits, interval='normal'):
    """
    Half-width of the 95% confidence interval of a bit error rate.

    :param errors: Accumulated (possibly fractional) bit errors
    :param bits: Simulated bits
    :param interval: ``normal`` or ``wilson``
    """
    if bits <= 0:
        return 0.0
    p = min(max(errors / bits, 0.0), 1.0)
    if interval == WILSON:
        z2 = Z95 ** 2
        return Z95 / (1.0 + z2 / bits) * math.sqrt(p * (1.0 - p) / bits + z2 / (4.0 * bits ** 2))
    return Z95 * math.sqrt(p * (1.0 - p) / bits)


class BerEstimate(collections.namedtuple('BerEstimate', ['code', 'channel', 'noise', 'decoder',
                                                          'trials', 'bits', 'bit_errors', 'ci95',
                                                          'seed'])):
    """
    Aggregated bit error statistics of one decoder at one noise point.
    """

    __slots__ = ()

    @property
    def ber(self):
        return self.bit_errors / self.bits if self.bits else 0.0

    def csv_row(self):
        decoder, scheme, t, ell = self.decoder.csv_fields()
        values = (self.code, self.channel, self.noise, decoder, scheme, t, ell, self.trials,
                  self.bits, self.bit_errors, self.ber, self.ci95, self.seed)
        return [value if isinstance(value, str) else format_number(value) for value in values]


def _run_batch(task):
    """
    Run trials [start, stop) of one point. Module level so worker processes
    can unpickle it.

    :returns: (trials, bit errors per decoder)
    """
    H, basis, ch, decoders, seed, point, start, stop, node_budget, noise = task
    errors = np.zeros(len(decoders))
    for trial in range(start, stop):
        rng = trial_rng(seed, point, trial)
        word = sample_codeword(basis, rng)
        outputs = transmit(word, ch, rng)
        for index, decoder in enumerate(decoders):
            try:
                result = decoder.decode(H, outputs, ch, node_budget=node_budget)
            except TreePruningException as error:
                raise TrialError(noise, trial, decoder.label, error)
            errors[index] += result.bit_errors(word, ch.is_erasure)
    return stop - start, errors


def _batches(cfg, H, basis, ch, point, noise):
    for start in range(0, cfg.trials, cfg.batch):
        stop = min(start + cfg.batch, cfg.trials)
        yield (H, basis, ch, cfg.decoders, cfg.seed, point, start, stop, cfg.node_budget, noise)


def run_point(cfg, noise, point=0, H=None, pool=None):
    """
    Estimate the bit error rate of every configured decoder at one noise
    value. Batches are consumed in order; with ``target_errors`` set the
    point stops after the first batch at which every decoder has reached
    the target.

    :param cfg: A SimConfig
    :param noise: Grid value (erasure probability, Es/N0 in dB or sigma2)
    :param point: Index of the point in the grid, part of the trial streams
    :param H: Prebuilt parity-check matrix, built from cfg.code if None
    :param pool: Optional multiprocessing pool running the batches
    :returns: A list of BerEstimate, one per decoder in configured order
    """
    H = cfg.code.build() if H is None else H
    ch = cfg.channel_at(noise)
    _, basis = gf2_rank_and_nullspace(H)

    tasks = _batches(cfg, H, basis, ch, point, noise)
    results = pool.imap(_run_batch, tasks) if pool is not None else map(_run_batch, tasks)

    trials = 0
    errors = np.zeros(len(cfg.decoders))
    for done, batch_errors in results:
        trials += done
        errors += batch_errors
        if cfg.target_errors is not None and (errors >= cfg.target_errors).all():
            logger.debug('point %s reached %d errors after %d trials', noise, cfg.target_errors, trials)
            break

    bits = trials * H.n
    estimates = []
    for decoder, count in zip(cfg.decoders, errors):
        count = float(count)
        estimates.append(BerEstimate(code=cfg.code.label, channel=cfg.channel_kind, noise=noise,
                                     decoder=decoder, trials=trials, bits=bits, bit_errors=count,
                                     ci95=confidence_halfwidth(count, bits, cfg.interval),
                                     seed=cfg.seed))
    return estimates


def write_header(handle):
    csv.writer(handle, lineterminator='\n').writerow(CSV_HEADER)


def write_estimates(handle, estimates):
    writer = csv.writer(handle, lineterminator='\n')
    for estimate in estimates:
        writer.writerow(estimate.csv_row())
    handle.flush()


def run_sweep(cfg, threads=1, progress=False, handle=None):
    """
    Run every grid point and write the result rows as each point finishes.

    :param cfg: A SimConfig
    :param threads: Worker processes; 1 runs in process
    :param progress: Show a progress bar over the grid
    :param handle: Text stream for the CSV; cfg.output is opened when None
                   and an output path is configured
    :returns: A list of BerEstimate in grid order, decoders in configured order
    """
    H = cfg.code.build()
    logger.info('sweep %s on %s: %d points, %d decoders, up to %d trials each',
                cfg.code.label, cfg.channel_kind, len(cfg.grid), len(cfg.decoders), cfg.trials)

    owned = handle is None and cfg.output is not None
    if owned:
        handle = open(cfg.output, 'w', newline='')
    pool = multiprocessing.Pool(threads) if threads > 1 else None
    estimates = []
    try:
        if handle is not None:
            write_header(handle)
        grid = tqdm(list(enumerate(cfg.grid)), disable=not progress, desc=cfg.code.label, unit='point')
        for point, noise in grid:
            found = run_point(cfg, noise, point=point, H=H, pool=pool)
            for estimate in found:
                logger.info('%s %s=%s: ber %s +- %s over %d trials', estimate.decoder.label,
                            cfg.channel_kind, noise, format_number(estimate.ber),
                            format_number(estimate.ci95), estimate.trials)
            if handle is not None:
                write_estimates(handle, found)
            estimates.extend(found)
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
        if owned:
            handle.close()

    if owned:
        logger.info('wrote %d rows to %s', len(estimates), cfg.output)
    return estimates


TreeStatsRow = collections.namedtuple('TreeStatsRow', TREE_STATS_HEADER)


def tree_stats(H, scheme, outputs=None, ch=None, node_budget=DEFAULT_NODE_BUDGET):
    """
    Size and shape of the tree of every bit. Structure does not depend on
    the channel values except under the adaptive erasure scheme, which needs
    erasure channel outputs.

    :returns: A list of TreeStatsRow, one per bit
    """
    g = build_tanner(H)
    known = None
    if scheme.variant == BEC_ADAPTIVE:
        if outputs is None or ch is None or not ch.is_erasure:
            raise InvalidScheme('scheme %s needs received erasure channel outputs' % scheme.label)
        known = erasure_known(g, np.asarray(outputs))

    dual = dualize(g, np.ones((H.n, 2)))
    rows = []
    for i in range(H.n):
        found = build_saw_tree(dual, i, scheme, known=known, node_budget=node_budget).stats()
        rows.append(TreeStatsRow(root=i, scheme=scheme.variant, t=scheme.t, nodes=found.nodes,
                                 max_depth=found.max_depth, terminated=found.terminated,
                                 truncated=found.truncated))
    return rows


SuiteResult = collections.namedtuple('SuiteResult', ['name', 'cases', 'max_deviation'])


class OracleReport(object):
    """
    Largest deviation seen by each oracle suite.
    """

    def __init__(self, seed, suites, tolerance=ORACLE_TOLERANCE):
        self.seed = seed
        self.suites = suites
        self.tolerance = tolerance

    @property
    def passed(self):
        return all(suite.max_deviation <= self.tolerance for suite in self.suites)

    def rows(self):
        return [(suite.name, suite.cases, format_number(suite.max_deviation),
                 'pass' if suite.max_deviation <= self.tolerance else 'fail')
                for suite in self.suites]

    def __repr__(self):
        return '<OracleReport seed=%s %s>' % (self.seed, 'pass' if self.passed else 'fail')


def _random_instance(rng):
    n = int(rng.integers(4, 9))
    m = int(rng.integers(2, 6))
    return make_random(n, m, rng)


def _random_channel(rng, case, erasure=None):
    if erasure is None:
        erasure = case % 2 == 0
    if erasure:
        return ChannelSpec(BEC, rng.uniform(0.2, 0.7))
    return ChannelSpec(BAWGN, rng.uniform(0.3, 1.5))


def _received(H, ch, rng):
    _, basis = gf2_rank_and_nullspace(H)
    return transmit(sample_codeword(basis, rng), ch, rng)


def _tp_full_case(rng, case, corrupt):
    H = _random_instance(rng)
    ch = _random_channel(rng, case)
    outputs = _received(H, ch, rng)
    tree = tp_decode(H, outputs, ch, TruncationScheme(FULL)).marginals
    reference = map_decode_enumeration(H, outputs, ch).marginals
    return np.abs(tree - reference).max()


def _gauss_case(rng, case, corrupt):
    H = _random_instance(rng)
    ch = _random_channel(rng, case, erasure=True)
    outputs = _received(H, ch, rng)
    gauss = map_decode_bec_gauss(H, outputs).marginals
    reference = map_decode_enumeration(H, outputs, ch).marginals
    return np.abs(gauss - reference).max()


def _bcjr_case(rng, case, corrupt):
    H = make_tailbiting_conv(2 * int(rng.integers(3, 8)))
    ch = _random_channel(rng, case, erasure=False)
    outputs = _received(H, ch, rng)
    trellis = map_decode_tailbiting_bcjr(H, outputs, ch).marginals
    reference = map_decode_enumeration(H, outputs, ch).marginals
    return np.abs(trellis - reference).max()


def _duality_case(rng, case, corrupt):
    H = _random_instance(rng)
    ch = _random_channel(rng, case, erasure=False if corrupt else None)
    lik = likelihoods(_received(H, ch, rng), ch)
    dual_lik = lik.copy()
    if corrupt:
        dual_lik[0] = dual_lik[0, ::-1]
    dual = dualize(build_tanner(H), dual_lik)
    weights = exact_marginals_bruteforce(dual, range(H.n))
    weights = weights / weights.sum(axis=1, keepdims=True)
    return np.abs(weights - posterior_marginal_enumeration(H, lik)).max()


ORACLE_SUITES = (
    ('tp-full-vs-enumeration', _tp_full_case),
    ('gauss-vs-enumeration', _gauss_case),
    ('bcjr-vs-enumeration', _bcjr_case),
    ('duality', _duality_case),
)


def oracle_check(seed, count, corrupt=False):
    """
    Run the randomized equivalence suites between independent exact
    decoders on small random instances.

    :param seed: Seed of the instance streams
    :param count: Instances per suite; 0 gives an empty passing report
    :param corrupt: Perturb the dual weights of the duality suite, which
                    must then fail
    :returns: An OracleReport
    """
    suites = []
    for index, (name, case) in enumerate(ORACLE_SUITES):
        deviation = 0.0
        for trial in range(count):
            deviation = max(deviation, float(case(trial_rng(seed, index, trial), trial, corrupt)))
        logger.info('oracle suite %s: %d cases, max deviation %s', name, count, format_number(deviation))
        suites.append(SuiteResult(name, count, deviation))
    return OracleReport(seed, suites)
