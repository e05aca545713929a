import copy
import logging
import logging.config
import re

import numpy as np


logger = logging.getLogger(__name__)

#: Logging configuration installed by the command line entry point
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,

    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },

    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
            'stream': 'ext://sys.stderr',
        },
    },

    'loggers': {
        'treepruning': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}

#: Format used for every number written to result files
NUMBER_FORMAT = '{:.12g}'

#: Item separators for decoder label lists
_label_split_re = re.compile(r"[\n;]+|,(?=\s*[A-Za-z])")


def configure_logging(verbose=False):
    """
    Install the package logging configuration.

    :param verbose: Lower the package logger to DEBUG when True
    """
    config = copy.deepcopy(LOGGING)
    if verbose:
        config['loggers']['treepruning']['level'] = 'DEBUG'
    logging.config.dictConfig(config)


def format_number(value):
    """
    Deterministic text rendering of a number for CSV output.

    :param value: An int, float or None
    :returns: A string, empty for None
    """
    if value is None:
        return ''
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if np.isinf(value):
        return 'inf'
    return NUMBER_FORMAT.format(value)


def split_list(value):
    """
    Split a newline, semicolon or comma separated option into its items.

    :param value: The raw option string
    :returns: A list of stripped, non-empty strings
    """
    return [part.strip() for part in re.split(r'[\n;,]+', value) if part.strip()]


def split_labels(value):
    """
    Like split_list, but a comma only separates two labels when the next
    item starts with a letter, so ``bp:inf, tp:ballbp:2,1`` gives two labels.

    :param value: The raw option string
    :returns: A list of stripped, non-empty strings
    """
    return [part.strip() for part in _label_split_re.split(value) if part.strip()]


def trial_rng(seed, point, trial):
    """
    Counter based random stream for one Monte Carlo trial. Streams depend
    only on their coordinates, never on execution order.

    :param seed: Master seed of the experiment
    :param point: Index of the noise point in the sweep grid
    :param trial: Index of the trial within the point
    :returns: A numpy Generator
    """
    sequence = np.random.SeedSequence([int(seed), int(point), int(trial)])
    return np.random.Generator(np.random.Philox(sequence))
