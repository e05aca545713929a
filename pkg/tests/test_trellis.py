from unittest import TestCase

import numpy as np

from treepruning import trellis
from treepruning.channels import BAWGN, BEC, ChannelSpec, likelihoods, transmit
from treepruning.codes import gf2_rank_and_nullspace, make_tailbiting_conv
from treepruning.exceptions import DecodingError, InvalidCode
from treepruning.gmrf import posterior_marginal_enumeration


class TrellisTest(TestCase):

    def test_tables(self):
        self.assertEqual(trellis.next_state(0b10, 1), 0b11)
        self.assertEqual(trellis.next_state(0b01, 0), 0b00)
        self.assertEqual(trellis.branch_output(0b11, 1), (1, 0))
        self.assertEqual(trellis.branch_output(0b10, 0), (1, 0))
        self.assertEqual(trellis.NEXT.shape, (4, 2))
        self.assertEqual(trellis.OUTPUT.shape, (4, 2, 2))

    def test_encoder_meets_parity_checks(self):
        rng = np.random.default_rng(6)
        for sections in range(3, 9):
            H = make_tailbiting_conv(2 * sections)
            for _ in range(4):
                word = trellis.encode(rng.integers(0, 2, size=sections))
                self.assertFalse(H.syndrome(word).any())

    def test_encoder_is_injective(self):
        words = set(bytes(trellis.encode([(index >> bit) & 1 for bit in range(5)])) for index in range(32))
        self.assertEqual(len(words), 32)

    def test_encoder_image_is_the_code(self):
        H = make_tailbiting_conv(14)
        encoded = set(bytes(trellis.encode([(index >> bit) & 1 for bit in range(7)])) for index in range(128))
        _, basis = gf2_rank_and_nullspace(H)
        self.assertEqual(set(map(bytes, np.vstack(list(basis.codewords())))), encoded)

    def test_short_input(self):
        with self.assertRaises(InvalidCode):
            trellis.encode([1, 0])


class BcjrTest(TestCase):

    def test_matches_enumeration(self):
        rng = np.random.default_rng(9)
        for n in (6, 10, 14):
            H = make_tailbiting_conv(n)
            for ch in (ChannelSpec(BAWGN, 0.7), ChannelSpec(BEC, 0.5)):
                word = trellis.encode(rng.integers(0, 2, size=n // 2))
                lik = likelihoods(transmit(word, ch, rng), ch)
                np.testing.assert_allclose(trellis.bcjr_marginals(lik),
                                           posterior_marginal_enumeration(H, lik), atol=1e-10)

    def test_noiseless(self):
        word = trellis.encode([1, 0, 1, 1])
        lik = np.stack([1 - word, word], axis=1).astype(float)
        np.testing.assert_allclose(trellis.bcjr_marginals(lik), lik)

    def test_inconsistent_word(self):
        lik = np.tile([1.0, 0.0], (8, 1))
        lik[0] = (0.0, 1.0)
        with self.assertRaises(DecodingError):
            trellis.bcjr_marginals(lik)

    def test_blocklength(self):
        with self.assertRaises(InvalidCode):
            trellis.bcjr_marginals(np.ones((7, 2)))
        with self.assertRaises(InvalidCode):
            trellis.bcjr_marginals(np.ones((4, 2)))
