from unittest import TestCase

import mock
import numpy as np

from treepruning import utils


class FormatNumberTest(TestCase):

    def test_integers(self):
        self.assertEqual(utils.format_number(120), '120')
        self.assertEqual(utils.format_number(np.int64(7)), '7')

    def test_floats(self):
        self.assertEqual(utils.format_number(0.0), '0')
        self.assertEqual(utils.format_number(0.15), '0.15')
        self.assertEqual(utils.format_number(1.0 / 3.0), '0.333333333333')
        self.assertEqual(utils.format_number(2.5e-7), '2.5e-07')
        self.assertEqual(utils.format_number(float('inf')), 'inf')

    def test_none(self):
        self.assertEqual(utils.format_number(None), '')


class SplitTest(TestCase):

    def test_split_list(self):
        self.assertEqual(utils.split_list('0.3, 0.4;0.5\n 0.6,'), ['0.3', '0.4', '0.5', '0.6'])
        self.assertEqual(utils.split_list(''), [])

    def test_split_labels(self):
        self.assertEqual(utils.split_labels('bp:inf, tp:ballbp:2,1, map-gauss'),
                         ['bp:inf', 'tp:ballbp:2,1', 'map-gauss'])
        self.assertEqual(utils.split_labels('\n  none\n  tp:bec:4;local-map:2'),
                         ['none', 'tp:bec:4', 'local-map:2'])


class TrialRngTest(TestCase):

    def test_streams(self):
        first = utils.trial_rng(1, 2, 3).random(4)
        np.testing.assert_array_equal(first, utils.trial_rng(1, 2, 3).random(4))
        self.assertFalse(np.array_equal(first, utils.trial_rng(1, 2, 4).random(4)))
        self.assertFalse(np.array_equal(first, utils.trial_rng(1, 3, 3).random(4)))
        self.assertFalse(np.array_equal(first, utils.trial_rng(2, 2, 3).random(4)))


class LoggingTest(TestCase):

    @mock.patch('treepruning.utils.logging.config.dictConfig')
    def test_levels(self, dict_config):
        utils.configure_logging()
        self.assertEqual(dict_config.call_args[0][0]['loggers']['treepruning']['level'], 'INFO')
        utils.configure_logging(verbose=True)
        self.assertEqual(dict_config.call_args[0][0]['loggers']['treepruning']['level'], 'DEBUG')
        self.assertEqual(utils.LOGGING['loggers']['treepruning']['level'], 'INFO')
