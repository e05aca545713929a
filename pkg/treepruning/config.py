"""
Sweep configuration files. The sections and keys are listed in docs/index.md.
"""
import configparser
import dataclasses
import logging
import typing

import numpy as np

from . import codes
from .channels import BAWGN, BEC, ChannelSpec, sigma2_from_esn0_db
from .decoders import DecoderSpec, parse_decoder
from .exceptions import ConfigError, InvalidChannel, InvalidCode, InvalidScheme
from .sawtree import DEFAULT_NODE_BUDGET
from .utils import split_labels, split_list


logger = logging.getLogger(__name__)

FAMILIES = ('repetition', 'tailbiting', 'golay', 'ldpc', 'random', 'alist')

ESN0_DB = 'esn0_db'
SIGMA2 = 'sigma2'

NORMAL = 'normal'
WILSON = 'wilson'

#: Trials handed to a worker at a time
DEFAULT_BATCH = 100


@dataclasses.dataclass(frozen=True)
class CodeSpec:
    family: str
    n: typing.Optional[int] = None
    dv: typing.Optional[int] = None
    dc: typing.Optional[int] = None
    m: typing.Optional[int] = None
    seed: int = 0
    path: typing.Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError('unknown code family %r' % (self.family,))
        needs = {
            'repetition': ('n',),
            'tailbiting': ('n',),
            'ldpc': ('n', 'dv', 'dc'),
            'random': ('n', 'm'),
            'alist': ('path',),
        }.get(self.family, ())
        missing = [field for field in needs if getattr(self, field) is None]
        if missing:
            raise ConfigError('code family %s needs %s' % (self.family, ', '.join(missing)))

    def build(self):
        """
        :returns: The ParityCheckMatrix described by this spec
        """
        try:
            if self.family == 'repetition':
                return codes.make_repetition(self.n)
            if self.family == 'tailbiting':
                return codes.make_tailbiting_conv(self.n)
            if self.family == 'golay':
                return codes.make_golay()
            if self.family == 'ldpc':
                return codes.make_regular_ldpc(self.n, self.dv, self.dc, self.seed)
            if self.family == 'random':
                return codes.make_random(self.n, self.m, np.random.default_rng(self.seed))
            return codes.load_alist(self.path)
        except (OSError, IOError) as error:
            raise ConfigError('cannot read %s: %s' % (self.path, error))

    @property
    def label(self):
        if self.family == 'golay':
            return 'golay23'
        if self.family == 'ldpc':
            return 'ldpc%d-%d-%d-s%d' % (self.n, self.dv, self.dc, self.seed)
        if self.family == 'random':
            return 'random%d-%d-s%d' % (self.n, self.m, self.seed)
        if self.family == 'alist':
            return self.path
        return '%s%d' % (self.family, self.n)


def _int(value, what):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError('%s must be an integer, got %r' % (what, value))


def parse_code(text):
    """
    Parse a command line code spec: ``golay``, ``repetition:N``,
    ``tailbiting:N``, ``ldpc:N,DV,DC[,SEED]``, ``random:N,M[,SEED]`` or
    ``alist:PATH``.
    """
    family, _, args = text.strip().partition(':')
    family = family.lower()
    if family == 'alist':
        return CodeSpec('alist', path=args)
    values = [_int(item, 'code parameter') for item in split_list(args)]
    shapes = {
        'golay': ((), ()),
        'repetition': (('n',), ()),
        'tailbiting': (('n',), ()),
        'ldpc': (('n', 'dv', 'dc'), ('seed',)),
        'random': (('n', 'm'), ('seed',)),
    }
    if family not in shapes:
        raise ConfigError('unknown code family %r' % (family,))
    required, optional = shapes[family]
    if not len(required) <= len(values) <= len(required) + len(optional):
        raise ConfigError('code %s takes parameters %s' % (family, ','.join(required + optional)))
    return CodeSpec(family, **dict(zip(required + optional, values)))


@dataclasses.dataclass(frozen=True)
class SimConfig:
    code: CodeSpec
    channel_kind: str
    decoders: typing.Tuple[DecoderSpec, ...]
    grid: typing.Tuple[float, ...]
    trials: int
    seed: int
    output: typing.Optional[str] = None
    target_errors: typing.Optional[int] = None
    batch: int = DEFAULT_BATCH
    grid_unit: str = ESN0_DB
    interval: str = NORMAL
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.channel_kind not in (BEC, BAWGN):
            raise ConfigError('unknown channel kind %r' % (self.channel_kind,))
        if self.grid_unit not in (ESN0_DB, SIGMA2):
            raise ConfigError('unknown grid unit %r' % (self.grid_unit,))
        if self.interval not in (NORMAL, WILSON):
            raise ConfigError('unknown interval %r' % (self.interval,))
        if not self.grid:
            raise ConfigError('noise grid is empty')
        if not self.decoders:
            raise ConfigError('no decoders configured')
        if self.trials < 1:
            raise ConfigError('trials must be at least 1, got %d' % self.trials)
        if self.batch < 1:
            raise ConfigError('batch must be at least 1, got %d' % self.batch)
        if self.target_errors is not None and self.target_errors < 1:
            raise ConfigError('target_errors must be positive')
        for noise in self.grid:
            self.channel_at(noise)

    def channel_at(self, noise):
        """
        Channel of one grid point; BAWGN grid values are Es/N0 in dB unless
        the grid unit is sigma2.
        """
        try:
            if self.channel_kind == BAWGN and self.grid_unit == ESN0_DB:
                return ChannelSpec(BAWGN, sigma2_from_esn0_db(noise))
            return ChannelSpec(self.channel_kind, noise)
        except InvalidChannel as error:
            raise ConfigError('grid value %s: %s' % (noise, error))


def _get(parser, section, key, fallback=None, required=False):
    if not parser.has_section(section):
        if required:
            raise ConfigError('missing section [%s]' % section)
        return fallback
    value = parser.get(section, key, fallback=None)
    if value is None or not value.strip():
        if required:
            raise ConfigError('missing key %s in section [%s]' % (key, section))
        return fallback
    return value.strip()


def _optional_int(parser, section, key, fallback=None):
    value = _get(parser, section, key)
    if value is None:
        return fallback
    return _int(value, '[%s] %s' % (section, key))


def load_config(path, **overrides):
    """
    Read a sweep configuration file.

    :param path: Path of the INI file
    :param overrides: SimConfig fields that replace the file's values when
                      not None (seed, output, ...)
    :returns: A SimConfig
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(';', '#'))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except (OSError, IOError) as error:
        raise ConfigError('cannot read config %s: %s' % (path, error))
    except configparser.Error as error:
        raise ConfigError('malformed config %s: %s' % (path, error))

    code = CodeSpec(_get(parser, 'code', 'family', required=True).lower(),
                    n=_optional_int(parser, 'code', 'n'),
                    dv=_optional_int(parser, 'code', 'dv'),
                    dc=_optional_int(parser, 'code', 'dc'),
                    m=_optional_int(parser, 'code', 'm'),
                    seed=_optional_int(parser, 'code', 'seed', 0),
                    path=_get(parser, 'code', 'path'))

    try:
        decoders = tuple(parse_decoder(label)
                         for label in split_labels(_get(parser, 'decoders', 'list', required=True)))
    except InvalidScheme as error:
        raise ConfigError('[decoders] list: %s' % error)

    try:
        grid = tuple(float(item) for item in split_list(_get(parser, 'sweep', 'grid', required=True)))
    except ValueError:
        raise ConfigError('[sweep] grid must hold numbers')

    fields = dict(
        code=code,
        channel_kind=_get(parser, 'channel', 'kind', required=True).lower(),
        grid_unit=_get(parser, 'channel', 'grid_unit', ESN0_DB).lower(),
        decoders=decoders,
        grid=grid,
        trials=_optional_int(parser, 'sweep', 'trials', 1000),
        target_errors=_optional_int(parser, 'sweep', 'target_errors'),
        batch=_optional_int(parser, 'sweep', 'batch', DEFAULT_BATCH),
        seed=_optional_int(parser, 'sweep', 'seed', 0),
        output=_get(parser, 'sweep', 'output'),
        interval=_get(parser, 'sweep', 'interval', NORMAL).lower(),
        node_budget=_optional_int(parser, 'sweep', 'node_budget', DEFAULT_NODE_BUDGET),
    )
    fields.update((key, value) for key, value in overrides.items() if value is not None)

    config = SimConfig(**fields)
    try:
        config.code.build()
    except InvalidCode as error:
        raise ConfigError('[code]: %s' % error)
    logger.debug('loaded config %s: %s, %d decoders, %d points',
                 path, code.label, len(decoders), len(grid))
    return config
