import io
from unittest import TestCase

import mock

from treepruning.cli import ERROR_STATUS, FAILURE_STATUS, main

from .utils import SWEEP_CONFIG, TempDir


class CommandLineTest(TestCase):

    def setUp(self):
        patcher = mock.patch('treepruning.cli.configure_logging')
        self.configure_logging = patcher.start()
        self.addCleanup(patcher.stop)
        self.scratch = TempDir().__enter__()
        self.addCleanup(self.scratch.__exit__)

    def read(self, name):
        with open(self.scratch.join(name)) as handle:
            return handle.read().splitlines()

    def test_decode(self):
        received = self.scratch.write('word.txt', '1\n?\n# comment\n?\n')
        status = main(['--out', self.scratch.join('decoded.csv'), 'decode', '--code', 'repetition:3',
                       '--channel', 'bec:0.5', '--decoder', 'tp', '--scheme', 'full', '--received', received])
        self.assertEqual(status, 0)
        self.assertEqual(self.read('decoded.csv'),
                         ['bit,p0,p1,decision,flag', '0,0,1,1,ok', '1,0,1,1,ok', '2,0,1,1,ok'])
        self.configure_logging.assert_called_once_with(False)

    def test_decode_from_stdin(self):
        stdout = io.StringIO()
        with mock.patch('sys.stdin', io.StringIO('?\n?\n')), mock.patch('sys.stdout', stdout):
            status = main(['-v', 'decode', '--code', 'repetition:2', '--channel', 'bec:0.5',
                           '--decoder', 'map-gauss', '--received', '-'])
        self.assertEqual(status, 0)
        self.assertEqual(stdout.getvalue().splitlines()[1:], ['0,0.5,0.5,0,ambiguous', '1,0.5,0.5,0,ambiguous'])
        self.configure_logging.assert_called_once_with(True)

    def test_decode_errors(self):
        received = self.scratch.write('word.txt', '1\n?\n?\n')
        base = ['decode', '--code', 'repetition:3', '--received', received]
        for extra in (['--channel', 'bsc:0.1', '--decoder', 'bp'],
                      ['--channel', 'bec:0.5', '--decoder', 'tp'],
                      ['--channel', 'bec:0.5', '--decoder', 'local-map'],
                      ['--channel', 'bawgn:1.0', '--decoder', 'map-gauss']):
            self.assertEqual(main(base + extra), ERROR_STATUS)
        missing = ['decode', '--code', 'golay', '--channel', 'bec:0.5', '--decoder', 'bp',
                   '--received', self.scratch.join('missing.txt')]
        self.assertEqual(main(missing), ERROR_STATUS)

    def test_threads(self):
        self.assertEqual(main(['--threads', '0', 'oracle-check', '--count', '1']), ERROR_STATUS)

    def test_oracle_check(self):
        path = self.scratch.join('oracle.csv')
        self.assertEqual(main(['--seed', '5', '--out', path, 'oracle-check', '--count', '2']), 0)
        lines = self.read('oracle.csv')
        self.assertEqual(lines[0], 'suite,cases,max_deviation,status')
        self.assertEqual(len(lines), 5)
        self.assertTrue(all(line.endswith(',pass') for line in lines[1:]))

    def test_oracle_check_corrupt(self):
        path = self.scratch.join('oracle.csv')
        self.assertEqual(main(['--out', path, 'oracle-check', '--count', '2', '--corrupt']), FAILURE_STATUS)
        self.assertTrue(self.read('oracle.csv')[-1].startswith('duality,2,'))
        self.assertTrue(self.read('oracle.csv')[-1].endswith(',fail'))

    def test_tree_stats(self):
        path = self.scratch.join('stats.csv')
        self.assertEqual(main(['--out', path, 'tree-stats', '--code', 'repetition:5', '--scheme', 'full']), 0)
        lines = self.read('stats.csv')
        self.assertEqual(lines[0], 'root,scheme,t,nodes,max_depth,terminated,truncated')
        self.assertEqual(lines[1], '0,full,,9,8,0,0')
        self.assertEqual(len(lines), 6)

    def test_tree_stats_adaptive_needs_received(self):
        self.assertEqual(main(['tree-stats', '--code', 'golay', '--scheme', 'bec:2']), ERROR_STATUS)

    def test_sweep(self):
        config = self.scratch.write('sweep.ini', SWEEP_CONFIG)
        path = self.scratch.join('sweep.csv')
        self.assertEqual(main(['--seed', '3', '--out', path, 'sweep', config]), 0)
        lines = self.read('sweep.csv')
        self.assertEqual(lines[0], 'code,channel,noise,decoder,scheme,t,ell,trials,bits,bit_errors,ber,ci95,seed')
        self.assertEqual(len(lines), 9)
        self.assertTrue(all(line.endswith(',3') for line in lines[1:]))

    def test_sweep_bad_config(self):
        self.assertEqual(main(['sweep', self.scratch.join('missing.ini')]), ERROR_STATUS)
