import io
import math
from unittest import TestCase

import mock

from treepruning import simulator
from treepruning.channels import BEC, ERASED, ChannelSpec
from treepruning.codes import make_repetition
from treepruning.config import WILSON, CodeSpec, SimConfig
from treepruning.decoders import DecoderSpec, parse_decoder
from treepruning.exceptions import DecodingError, InvalidScheme, TrialError
from treepruning.sawtree import BEC_ADAPTIVE, FULL, TruncationScheme
from treepruning.simulator import BerEstimate, confidence_halfwidth, oracle_check, run_point, run_sweep

from .utils import TempDir


def sim_config(labels=('none', 'map-gauss'), **fields):
    values = dict(code=CodeSpec('repetition', n=6), channel_kind=BEC,
                  decoders=tuple(parse_decoder(label) for label in labels),
                  grid=(0.0, 0.3), trials=20, seed=5, batch=7)
    values.update(fields)
    return SimConfig(**values)


class ConfidenceTest(TestCase):

    def test_no_bits(self):
        self.assertEqual(confidence_halfwidth(0, 0), 0.0)

    def test_normal(self):
        self.assertAlmostEqual(confidence_halfwidth(10, 100), simulator.Z95 * math.sqrt(0.1 * 0.9 / 100))
        self.assertEqual(confidence_halfwidth(0, 100), 0.0)

    def test_wilson_without_errors(self):
        self.assertGreater(confidence_halfwidth(0, 100, WILSON), 0.0)
        self.assertLess(confidence_halfwidth(0, 100, WILSON), 0.05)


class BerEstimateTest(TestCase):

    def test_csv_row(self):
        estimate = BerEstimate(code='repetition6', channel=BEC, noise=0.3, decoder=parse_decoder('bp:inf'),
                               trials=10, bits=60, bit_errors=3.0, ci95=0.05, seed=1)
        self.assertEqual(estimate.ber, 0.05)
        self.assertEqual(estimate.csv_row(),
                         ['repetition6', 'bec', '0.3', 'bp', '', 'inf', '', '10', '60', '3', '0.05', '0.05', '1'])

    def test_scheme_columns(self):
        estimate = BerEstimate(code='golay23', channel=BEC, noise=0.4,
                               decoder=parse_decoder('tp:ballbp:2,1'), trials=0, bits=0,
                               bit_errors=0.0, ci95=0.0, seed=0)
        self.assertEqual(estimate.ber, 0.0)
        self.assertEqual(estimate.csv_row()[3:7], ['tp', 'ballbp', '2', '1'])


class RunPointTest(TestCase):

    def test_noiseless(self):
        for estimate in run_point(sim_config(), 0.0):
            self.assertEqual(estimate.bit_errors, 0.0)
            self.assertEqual((estimate.trials, estimate.bits), (20, 120))

    def test_raw_erasure_rate(self):
        estimate, = run_point(sim_config(labels=('none',), trials=400, batch=100), 0.3)
        self.assertLess(abs(estimate.ber - 0.15), 4 * estimate.ci95)

    def test_decoders_share_channel_draws(self):
        single = run_point(sim_config(labels=('map-gauss',)), 0.4, point=1)
        paired = run_point(sim_config(labels=('none', 'map-gauss')), 0.4, point=1)
        self.assertEqual(single[0].bit_errors, paired[1].bit_errors)
        self.assertLessEqual(paired[1].bit_errors, paired[0].bit_errors)

    def test_early_stop(self):
        estimate, = run_point(sim_config(labels=('none',), target_errors=1), 0.5)
        self.assertEqual(estimate.trials, 7)

    def test_decoder_failure(self):
        with mock.patch.object(DecoderSpec, 'decode', side_effect=DecodingError('inconsistent')):
            with self.assertRaises(TrialError) as caught:
                run_point(sim_config(labels=('none',)), 0.3)
        self.assertEqual((caught.exception.trial, caught.exception.decoder), (0, 'none'))


class SweepTest(TestCase):

    def sweep(self, cfg, **kwargs):
        handle = io.StringIO()
        estimates = run_sweep(cfg, handle=handle, **kwargs)
        return handle.getvalue(), estimates

    def test_header_and_rows(self):
        text, estimates = self.sweep(sim_config())
        lines = text.splitlines()
        self.assertEqual(lines[0], 'code,channel,noise,decoder,scheme,t,ell,trials,bits,bit_errors,ber,ci95,seed')
        self.assertEqual(len(lines), 5)
        self.assertEqual(len(estimates), 4)
        self.assertTrue(lines[1].startswith('repetition6,bec,0,none,'))

    def test_deterministic(self):
        self.assertEqual(self.sweep(sim_config())[0], self.sweep(sim_config())[0])

    def test_worker_count_does_not_change_results(self):
        expected, _ = self.sweep(sim_config())
        with mock.patch('treepruning.simulator.multiprocessing.Pool') as pool_class:
            pool = pool_class.return_value
            pool.imap.side_effect = map
            found, _ = self.sweep(sim_config(), threads=3)
        pool_class.assert_called_once_with(3)
        self.assertTrue(pool.terminate.called)
        self.assertEqual(found, expected)

    def test_output_file(self):
        expected, _ = self.sweep(sim_config())
        with TempDir() as scratch:
            path = scratch.join('out.csv')
            run_sweep(sim_config(output=path))
            with open(path) as handle:
                self.assertEqual(handle.read(), expected)


class TreeStatsTest(TestCase):

    def test_full_trees(self):
        rows = simulator.tree_stats(make_repetition(5), TruncationScheme(FULL))
        self.assertEqual(len(rows), 5)
        self.assertEqual((rows[0].root, rows[0].nodes, rows[0].terminated), (0, 9, 0))
        self.assertEqual((rows[0].scheme, rows[0].t), ('full', None))

    def test_adaptive_needs_outputs(self):
        with self.assertRaises(InvalidScheme):
            simulator.tree_stats(make_repetition(3), TruncationScheme(BEC_ADAPTIVE, 2))

    def test_adaptive(self):
        rows = simulator.tree_stats(make_repetition(3), TruncationScheme(BEC_ADAPTIVE, 2),
                                    outputs=[ERASED, 1, ERASED], ch=ChannelSpec(BEC, 0.5))
        self.assertEqual(rows[0].nodes, 1)
        self.assertEqual(rows[0].truncated, 1)


class OracleCheckTest(TestCase):

    def test_passes(self):
        report = oracle_check(3, 3)
        self.assertTrue(report.passed)
        self.assertEqual([row[0] for row in report.rows()], [name for name, _ in simulator.ORACLE_SUITES])
        self.assertEqual(set(row[3] for row in report.rows()), set(['pass']))

    def test_empty(self):
        report = oracle_check(0, 0)
        self.assertTrue(report.passed)
        self.assertEqual(report.rows()[0], ('tp-full-vs-enumeration', 0, '0', 'pass'))

    def test_corrupted_duality_fails(self):
        report = oracle_check(4, 2, corrupt=True)
        self.assertFalse(report.passed)
        failing = [row[0] for row in report.rows() if row[3] == 'fail']
        self.assertEqual(failing, ['duality'])

    def test_deterministic(self):
        self.assertEqual(oracle_check(9, 2).rows(), oracle_check(9, 2).rows())
