from unittest import TestCase

from treepruning.channels import BAWGN, BEC, ChannelSpec
from treepruning.config import SIGMA2, WILSON, CodeSpec, SimConfig, load_config, parse_code
from treepruning.decoders import parse_decoder
from treepruning.exceptions import ConfigError

from .utils import SWEEP_CONFIG, TempDir


class CodeSpecTest(TestCase):

    def test_parse(self):
        self.assertEqual(parse_code('golay'), CodeSpec('golay'))
        self.assertEqual(parse_code('Repetition:5'), CodeSpec('repetition', n=5))
        self.assertEqual(parse_code('ldpc:20,3,6'), CodeSpec('ldpc', n=20, dv=3, dc=6))
        self.assertEqual(parse_code('random:8,4,3'), CodeSpec('random', n=8, m=4, seed=3))
        self.assertEqual(parse_code('alist:codes/x.alist').path, 'codes/x.alist')

    def test_parse_errors(self):
        for text in ('hamming', 'repetition', 'golay:23', 'ldpc:20,3', 'tailbiting:x', 'random:8,4,3,1'):
            with self.assertRaises(ConfigError):
                parse_code(text)

    def test_labels(self):
        self.assertEqual(CodeSpec('golay').label, 'golay23')
        self.assertEqual(CodeSpec('tailbiting', n=12).label, 'tailbiting12')
        self.assertEqual(CodeSpec('ldpc', n=20, dv=3, dc=6, seed=2).label, 'ldpc20-3-6-s2')
        self.assertEqual(CodeSpec('random', n=8, m=4).label, 'random8-4-s0')

    def test_build(self):
        self.assertEqual(CodeSpec('golay').build().n, 23)
        self.assertEqual(CodeSpec('tailbiting', n=12).build().m, 6)
        H = CodeSpec('random', n=8, m=4, seed=3).build()
        self.assertEqual(H, CodeSpec('random', n=8, m=4, seed=3).build())

    def test_missing_alist(self):
        with self.assertRaises(ConfigError):
            CodeSpec('alist', path='/nonexistent/code.alist').build()


class SimConfigTest(TestCase):

    def config(self, **fields):
        values = dict(code=CodeSpec('repetition', n=4), channel_kind=BEC,
                      decoders=(parse_decoder('none'),), grid=(0.1,), trials=10, seed=0)
        values.update(fields)
        return SimConfig(**values)

    def test_validation(self):
        for fields in (dict(channel_kind='bsc'), dict(grid=()), dict(decoders=()), dict(trials=0),
                       dict(batch=0), dict(target_errors=0), dict(interval='exact'),
                       dict(grid=(0.1, 1.5)), dict(grid_unit='ebn0')):
            with self.assertRaises(ConfigError):
                self.config(**fields)

    def test_bawgn_grid(self):
        cfg = self.config(channel_kind=BAWGN, grid=(0.0, 3.0))
        self.assertEqual(cfg.channel_at(0.0), ChannelSpec(BAWGN, 0.5))
        cfg = self.config(channel_kind=BAWGN, grid=(0.8,), grid_unit=SIGMA2)
        self.assertEqual(cfg.channel_at(0.8), ChannelSpec(BAWGN, 0.8))
        with self.assertRaises(ConfigError):
            self.config(channel_kind=BAWGN, grid=(0.0,), grid_unit=SIGMA2)


class LoadConfigTest(TestCase):

    def test_load(self):
        with TempDir() as scratch:
            cfg = load_config(scratch.write('sweep.ini', SWEEP_CONFIG))
        self.assertEqual(cfg.code, CodeSpec('repetition', n=6))
        self.assertEqual(cfg.channel_kind, BEC)
        self.assertEqual([decoder.label for decoder in cfg.decoders], ['none', 'bp:inf', 'tp:bec:2', 'map-gauss'])
        self.assertEqual(cfg.grid, (0.0, 0.3))
        self.assertEqual((cfg.trials, cfg.batch, cfg.seed), (20, 7, 11))
        self.assertIsNone(cfg.output)
        self.assertIsNone(cfg.target_errors)

    def test_overrides(self):
        with TempDir() as scratch:
            cfg = load_config(scratch.write('sweep.ini', SWEEP_CONFIG), seed=99, output='out.csv',
                              interval=None)
        self.assertEqual((cfg.seed, cfg.output), (99, 'out.csv'))
        self.assertEqual(cfg.interval, 'normal')

    def test_inline_comments_and_defaults(self):
        text = ('[code]\nfamily = golay  ; 23 bits\n[channel]\nkind = BEC\n'
                '[decoders]\nlist = bp:inf, tp:ballbp:2,1\n[sweep]\ngrid = 0.4\ninterval = Wilson\n')
        with TempDir() as scratch:
            cfg = load_config(scratch.write('golay.ini', text))
        self.assertEqual(cfg.code, CodeSpec('golay'))
        self.assertEqual([decoder.label for decoder in cfg.decoders], ['bp:inf', 'tp:ballbp:2,1'])
        self.assertEqual((cfg.trials, cfg.seed, cfg.interval), (1000, 0, WILSON))

    def test_errors(self):
        broken = (
            SWEEP_CONFIG.replace('[decoders]', '[other]'),
            SWEEP_CONFIG.replace('grid = 0.0, 0.3', 'grid = low, high'),
            SWEEP_CONFIG.replace('tp:bec:2', 'tp:bec'),
            SWEEP_CONFIG.replace('trials = 20', 'trials = many'),
            SWEEP_CONFIG.replace('n = 6', 'n = 1'),
            '[code\nfamily = golay\n',
        )
        with TempDir() as scratch:
            for index, text in enumerate(broken):
                with self.assertRaises(ConfigError):
                    load_config(scratch.write('broken%d.ini' % index, text))
            with self.assertRaises(ConfigError):
                load_config(scratch.join('missing.ini'))
