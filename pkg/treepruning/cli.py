"""
Command line entry point: ``tree-pruning {decode,sweep,oracle-check,tree-stats}``.
"""
import argparse
import contextlib
import csv
import logging
import sys

from . import __version__
from .channels import parse_channel, parse_received
from .config import load_config, parse_code
from .decoders import BP, LOCAL_MAP, TP, DecoderSpec, parse_decoder
from .exceptions import ConfigError, TreePruningException
from .sawtree import DEFAULT_NODE_BUDGET, parse_scheme
from .simulator import TREE_STATS_HEADER, oracle_check, run_sweep, tree_stats
from .utils import configure_logging, format_number


logger = logging.getLogger(__name__)

#: Exit status of domain errors
ERROR_STATUS = 2

#: Exit status of a failed oracle check
FAILURE_STATUS = 1


def _decoder_from_args(args):
    """
    ``--decoder`` takes a full label (``tp:bec:4``) or a bare family
    completed by ``--scheme``, ``--iters`` or ``--radius``.
    """
    if ':' in args.decoder:
        return parse_decoder(args.decoder)
    family = args.decoder.lower()
    if family == TP:
        if not args.scheme:
            raise ConfigError('decoder tp needs --scheme')
        return DecoderSpec(TP, scheme=parse_scheme(args.scheme))
    if family == BP:
        return DecoderSpec(BP, iterations=args.iters)
    if family == LOCAL_MAP:
        if args.radius is None:
            raise ConfigError('decoder local-map needs --radius')
        return DecoderSpec(LOCAL_MAP, t=args.radius)
    return parse_decoder(family)


@contextlib.contextmanager
def _output(path):
    if path is None or path == '-':
        yield sys.stdout
    else:
        with open(path, 'w', newline='') as handle:
            yield handle


def _read_received(path, ch):
    try:
        if path == '-':
            return parse_received(sys.stdin, ch)
        with open(path) as handle:
            return parse_received(handle, ch)
    except (OSError, IOError) as error:
        raise ConfigError('cannot read received word %s: %s' % (path, error))


def cmd_decode(args):
    H = parse_code(args.code).build()
    ch = parse_channel(args.channel)
    decoder = _decoder_from_args(args)
    outputs = _read_received(args.received, ch)
    result = decoder.decode(H, outputs, ch, node_budget=args.node_budget)
    logger.info('%s decoded %d bits, %d ambiguous', decoder.label, result.n, int(result.ambiguous.sum()))

    with _output(args.out) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(('bit', 'p0', 'p1', 'decision', 'flag'))
        for bit, ((p0, p1), decision, flag) in enumerate(zip(result.marginals, result.decisions,
                                                             result.flags)):
            writer.writerow((bit, format_number(p0), format_number(p1), int(decision), flag))
    return 0


def cmd_sweep(args):
    cfg = load_config(args.config, seed=args.seed, output=args.out)
    if cfg.output is None:
        run_sweep(cfg, threads=args.threads, progress=args.progress, handle=sys.stdout)
    else:
        run_sweep(cfg, threads=args.threads, progress=args.progress)
    return 0


def cmd_oracle_check(args):
    report = oracle_check(args.seed or 0, args.count, corrupt=args.corrupt)
    with _output(args.out) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(('suite', 'cases', 'max_deviation', 'status'))
        writer.writerows(report.rows())
    if not report.passed:
        logger.error('oracle check failed for seed %s', report.seed)
        return FAILURE_STATUS
    return 0


def cmd_tree_stats(args):
    H = parse_code(args.code).build()
    scheme = parse_scheme(args.scheme)
    outputs = ch = None
    if args.received:
        ch = parse_channel(args.channel)
        outputs = _read_received(args.received, ch)
    rows = tree_stats(H, scheme, outputs=outputs, ch=ch, node_budget=args.node_budget)
    with _output(args.out) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(TREE_STATS_HEADER)
        for row in rows:
            writer.writerow([value if isinstance(value, str) else format_number(value) for value in row])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='tree-pruning',
                                     description='Tree-pruning decoding of binary linear codes.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('--seed', type=int, default=None, help='master seed (overrides config)')
    parser.add_argument('--threads', type=int, default=1, help='worker processes for sweeps')
    parser.add_argument('--out', default=None, help="output file, '-' for stdout")
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    decode = commands.add_parser('decode', help='decode one received word')
    decode.add_argument('--code', required=True,
                        help='golay | repetition:N | tailbiting:N | ldpc:N,DV,DC[,SEED] | '
                             'random:N,M[,SEED] | alist:PATH')
    decode.add_argument('--channel', required=True, help='bec:EPS or bawgn:SIGMA2')
    decode.add_argument('--decoder', required=True,
                        help='tp, bp, map-enum, map-gauss, bcjr, local-map, none or a full label')
    decode.add_argument('--scheme', help='full | fixed:T | bec:T | ball:T | ballbp:T,L')
    decode.add_argument('--iters', type=int, default=None, help='BP rounds, converged when omitted')
    decode.add_argument('--radius', type=int, default=None, help='local-map ball radius')
    decode.add_argument('--received', required=True, help="one symbol per line, '-' for stdin")
    decode.add_argument('--node-budget', type=int, default=DEFAULT_NODE_BUDGET)
    decode.set_defaults(handler=cmd_decode)

    sweep = commands.add_parser('sweep', help='Monte Carlo bit error rate sweep')
    sweep.add_argument('config', help='INI sweep configuration')
    sweep.add_argument('--progress', action='store_true', help='progress bar over the grid')
    sweep.set_defaults(handler=cmd_sweep)

    oracle = commands.add_parser('oracle-check', help='randomized exact-decoder agreement suites')
    oracle.add_argument('--count', type=int, default=100, help='instances per suite')
    oracle.add_argument('--corrupt', action='store_true', help='inject a weight error (must fail)')
    oracle.set_defaults(handler=cmd_oracle_check)

    stats = commands.add_parser('tree-stats', help='per-bit tree sizes of a truncation scheme')
    stats.add_argument('--code', required=True)
    stats.add_argument('--scheme', required=True)
    stats.add_argument('--channel', default='bec:0.5', help='channel of --received')
    stats.add_argument('--received', default=None, help='received word, needed by bec:T')
    stats.add_argument('--node-budget', type=int, default=DEFAULT_NODE_BUDGET)
    stats.set_defaults(handler=cmd_tree_stats)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.threads < 1:
        logger.error('--threads must be at least 1')
        return ERROR_STATUS
    try:
        return args.handler(args)
    except TreePruningException as error:
        logger.error('%s', error)
        return ERROR_STATUS
