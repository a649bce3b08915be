"""
Unit tests for the quantum_walk_cli entry point.
"""

import logging
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from quantum_walk_cli import build_parser, main, overrides_from_args
from SweepOrchestrator import SUMMARY_FILE, load_summary


class TestParser(unittest.TestCase):

    def test_list_flags(self) -> None:
        args = build_parser().parse_args(
            ["--coin", "hadamard,grover", "--density", "0,0.1", "--snapshot-at", "50,100", "--emit-svg"]
        )
        overrides = overrides_from_args(args)
        self.assertEqual(overrides["coins"], ["hadamard", "grover"])
        self.assertEqual(overrides["densities"], [0.0, 0.1])
        self.assertEqual(overrides["snapshot_times"], [50, 100])
        self.assertTrue(overrides["emit_svg"])
        self.assertNotIn("save_masks", overrides)
        self.assertNotIn("steps", overrides)

    def test_bad_number_list(self) -> None:
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["--density", "0,lots"])


class TestMain(unittest.TestCase):

    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self._env = mock.patch.dict(os.environ, {"QUANTUM_WALK_LOG": str(self.tmp / "walk.log")})
        self._env.start()

    def tearDown(self) -> None:
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)
        self._env.stop()
        self._tmp.cleanup()

    def test_smoke_sweep(self) -> None:
        out = self.tmp / "results"
        code = main(["--preset", "smoke", "--coin", "grover", "--ensemble", "2", "--steps", "8",
                     "--snapshot-at", "8", "--out", str(out)])
        self.assertEqual(code, 0)
        summary = load_summary(out / SUMMARY_FILE)
        self.assertEqual([r.coin for r in summary.results], ["grover", "grover"])
        self.assertTrue((out / "sigma_table_grover.csv").exists())
        self.assertTrue((out / "heightmap_grover_p0.1_t8.csv").exists())
        self.assertTrue((self.tmp / "walk.log").exists())

    def test_config_file_with_override(self) -> None:
        config = self.tmp / "sweep.json"
        config.write_text('{"coins": ["fourier"], "densities": [0.2], "steps": 5, "ensemble": 3, "seed": 8}')
        out = self.tmp / "from-file"
        self.assertEqual(main(["--config", str(config), "--ensemble", "1", "--out", str(out)]), 0)
        self.assertEqual(load_summary(out / SUMMARY_FILE).results[0].ensemble, 1)

    def test_invalid_density_exit_code(self) -> None:
        self.assertEqual(main(["--preset", "smoke", "--density", "1.5", "--out", str(self.tmp / "x")]), 2)

    def test_missing_config_file(self) -> None:
        self.assertEqual(main(["--config", str(self.tmp / "missing.json")]), 2)

    def test_config_file_threads_beat_environment(self) -> None:
        config = self.tmp / "sweep.json"
        config.write_text('{"coins": ["grover"], "densities": [0.1], "steps": 4, "ensemble": 1, "threads": 1}')
        out = self.tmp / "env"
        with mock.patch.dict(os.environ, {"QUANTUM_WALK_THREADS": "3"}):
            self.assertEqual(main(["--config", str(config), "--out", str(out)]), 0)
        self.assertEqual(load_summary(out / SUMMARY_FILE).config["threads"], 1)

    def test_threads_from_environment(self) -> None:
        with mock.patch.dict(os.environ, {"QUANTUM_WALK_THREADS": "zero"}):
            self.assertEqual(main(["--preset", "smoke", "--out", str(self.tmp / "y")]), 2)


if __name__ == "__main__":
    unittest.main()
