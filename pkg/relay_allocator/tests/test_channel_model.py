import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy import stats

from relay_allocator.channel_model import (
    generate_channel,
    generate_channels,
    load_allocation,
    load_channel,
    realization_seed,
    save_allocation,
    save_channel,
)
from relay_allocator.dtos import PowerAllocation
from relay_allocator.exceptions import ChannelError, ChannelFileError


class TestGenerateChannel(unittest.TestCase):
    def test_same_seed_same_realization(self):
        self.assertEqual(generate_channel(32, 8, 7), generate_channel(32, 8, 7))

    def test_different_seed_different_realization(self):
        self.assertNotEqual(generate_channel(32, 8, 7), generate_channel(32, 8, 8))

    def test_shapes_and_sign(self):
        ch = generate_channel(32, 8, 3)
        self.assertEqual(32, ch.n_subcarriers)
        self.assertEqual(8, ch.n_taps)
        self.assertEqual(3, ch.seed)
        for gains in ch.gains().values():
            self.assertEqual((32,), gains.shape)
            self.assertGreaterEqual(gains.min(), 0.0)

    def test_links_are_independent_streams(self):
        ch = generate_channel(16, 4, 11)
        self.assertFalse(np.array_equal(ch.g1, ch.g2))
        self.assertFalse(np.array_equal(ch.gt1, ch.gt2))

    def test_gains_are_read_only(self):
        ch = generate_channel(4, 2, 0)
        with self.assertRaises(ValueError):
            ch.g1[0] = 5.0

    def test_rejects_more_taps_than_subcarriers(self):
        with self.assertRaises(ChannelError):
            generate_channel(4, 8, 0)

    def test_rejects_zero_sizes(self):
        with self.assertRaises(ChannelError):
            generate_channel(0, 1, 0)
        with self.assertRaises(ChannelError):
            generate_channel(4, 0, 0)

    def test_single_tap_gain_is_unit_exponential(self):
        samples = np.array([generate_channel(1, 1, seed).g1[0] for seed in range(10000)])
        self.assertAlmostEqual(1.0, samples.mean(), delta=0.05)
        self.assertGreater(stats.kstest(samples, "expon").pvalue, 0.01)

    def test_unit_average_gain(self):
        channels = generate_channels(1000, 32, 8, seed=5)
        mean_gain = np.mean([ch.g1.mean() for ch in channels])
        self.assertAlmostEqual(1.0, mean_gain, delta=0.05)

    def test_per_subcarrier_gain_is_exponential(self):
        channels = generate_channels(2000, 32, 8, seed=9)
        samples = np.array([ch.gt2[5] for ch in channels])
        self.assertGreater(stats.kstest(samples, "expon").pvalue, 0.01)


class TestRealizationSeed(unittest.TestCase):
    def test_deterministic(self):
        self.assertEqual(realization_seed(2012, 3, 4), realization_seed(2012, 3, 4))

    def test_index_changes_seed(self):
        seeds = {realization_seed(2012, 0, r) for r in range(100)}
        self.assertEqual(100, len(seeds))

    def test_batch_uses_sub_seeds(self):
        channels = generate_channels(3, 8, 2, seed=2012)
        self.assertEqual(
            [realization_seed(2012, index) for index in range(3)],
            [ch.seed for ch in channels],
        )


class TestChannelFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "channel.txt"

    def test_round_trip_is_exact(self):
        ch = generate_channel(32, 8, 12345)
        save_channel(ch, self.path)
        loaded = load_channel(self.path)
        self.assertEqual(ch, loaded)
        self.assertEqual(12345, loaded.seed)

    def test_header_format(self):
        save_channel(generate_channel(4, 2, 1), self.path)
        lines = self.path.read_text().splitlines()
        self.assertEqual("N=4 taps=2 seed=1", lines[0])
        self.assertEqual(["g1", "g2", "gt1", "gt2"], [line.split(":")[0] for line in lines[1:]])

    def test_truncated_file(self):
        save_channel(generate_channel(4, 2, 1), self.path)
        lines = self.path.read_text().splitlines()
        self.path.write_text("\n".join(lines[:3]) + "\n")
        with self.assertRaises(ChannelFileError) as raised:
            load_channel(self.path)
        self.assertEqual(4, raised.exception.line)
        self.assertIn("gt1", raised.exception.reason)

    def test_wrong_value_count(self):
        save_channel(generate_channel(4, 2, 1), self.path)
        lines = self.path.read_text().splitlines()
        lines[2] = "g2: 1.0 2.0"
        self.path.write_text("\n".join(lines) + "\n")
        with self.assertRaises(ChannelFileError) as raised:
            load_channel(self.path)
        self.assertEqual(3, raised.exception.line)

    def test_bad_number(self):
        self.path.write_text("N=1 taps=1 seed=0\ng1: x\ng2: 1\ngt1: 1\ngt2: 1\n")
        with self.assertRaises(ChannelFileError):
            load_channel(self.path)

    def test_missing_header_field(self):
        self.path.write_text("N=1 taps=1\ng1: 1\ng2: 1\ngt1: 1\ngt2: 1\n")
        with self.assertRaises(ChannelFileError) as raised:
            load_channel(self.path)
        self.assertEqual(1, raised.exception.line)

    def test_non_finite_gain(self):
        for token in ("nan", "inf", "-inf"):
            self.path.write_text(
                f"N=2 taps=1 seed=0\ng1: 1 2\ng2: 1 {token}\ngt1: 1 1\ngt2: 1 1\n"
            )
            with self.assertRaises(ChannelFileError) as raised:
                load_channel(self.path)
            self.assertEqual(3, raised.exception.line)

    def test_negative_gain(self):
        self.path.write_text("N=1 taps=1 seed=0\ng1: -1\ng2: 1\ngt1: 1\ngt2: 1\n")
        with self.assertRaises(ChannelFileError):
            load_channel(self.path)

    def test_empty_file(self):
        self.path.write_text("")
        with self.assertRaises(ChannelFileError):
            load_channel(self.path)

    def test_missing_file(self):
        with self.assertRaises(ChannelFileError):
            load_channel(Path(self.tmp.name) / "absent.txt")


class TestAllocationFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "channel.type1-opt.pa.txt"

    def test_round_trip(self):
        pa = PowerAllocation(p1=[0.1, 1.9], p2=[1.0, 1.0], pr=[2.0, 0.0])
        save_allocation(pa, self.path, "type1-opt")
        loaded, scheme = load_allocation(self.path)
        self.assertEqual(pa, loaded)
        self.assertEqual("type1-opt", scheme)
        self.assertEqual("N=2 scheme=type1-opt", self.path.read_text().splitlines()[0])

    def test_missing_line(self):
        self.path.write_text("N=1 scheme=type2-opt\np1: 1\np2: 1\n")
        with self.assertRaises(ChannelFileError) as raised:
            load_allocation(self.path)
        self.assertEqual(4, raised.exception.line)
