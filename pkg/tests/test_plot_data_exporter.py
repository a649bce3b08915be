"""
Unit tests for the PlotDataExporter module.
"""

import csv
import tempfile
import unittest
from pathlib import Path

import numpy as np

from PlotDataExporter import emit_plot_data
from SweepConfigLoader import SweepConfig
from SweepOrchestrator import run_sweep


class TestEmitPlotData(unittest.TestCase):

    @classmethod
    def setUpClass(cls) -> None:
        cls._tmp = tempfile.TemporaryDirectory()
        cls.out = Path(cls._tmp.name)
        config = SweepConfig(
            coins=["hadamard"], densities=[0.0, 0.1], steps=10, ensemble=2, seed=4,
            snapshot_times=[10], output_dir=str(cls.out),
        ).validate()
        cls.summary = run_sweep(config)

    @classmethod
    def tearDownClass(cls) -> None:
        cls._tmp.cleanup()

    def test_sigma_table(self) -> None:
        emit_plot_data(self.summary, emit_svg=False)
        with open(self.out / "sigma_table_hadamard.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ["t", "p0", "p0.1", "classical"])
        self.assertEqual(len(rows), 11)
        classical = np.array([float(row[3]) for row in rows[1:]])
        np.testing.assert_allclose(classical, np.sqrt(2.0 * np.arange(1, 11)), atol=1e-12)

    def test_heightmaps(self) -> None:
        written = emit_plot_data(self.summary, emit_svg=False)
        names = {path.name for path in written}
        self.assertIn("heightmap_hadamard_p0_t10.csv", names)
        self.assertIn("heightmap_hadamard_p0.1_t10.csv", names)
        with open(self.out / "heightmap_hadamard_p0_t10.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(len(rows), 1 + 23)
        self.assertEqual(rows[0][1], "-11")
        total = sum(float(value) for row in rows[1:] for value in row[1:])
        self.assertAlmostEqual(total, 1.0, delta=1e-12)

    def test_svg_figures(self) -> None:
        written = emit_plot_data(self.summary, emit_svg=True)
        svgs = sorted(path.name for path in written if path.suffix == ".svg")
        self.assertEqual(svgs, [
            "distribution_hadamard_p0.1_t10.svg",
            "distribution_hadamard_p0_t10.svg",
            "sigma_hadamard.svg",
        ])
        self.assertIn("<svg", (self.out / "sigma_hadamard.svg").read_text())


if __name__ == "__main__":
    unittest.main()
