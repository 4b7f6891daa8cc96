"""
Tests for the simulation harness, energy reports and capacity sweeps.
"""

import pytest

from cosetkit.config import ExperimentConfig, load_construction_source
from cosetkit.errors import ParameterError
from cosetkit.harness import (
    CSV_COLUMNS,
    TrialResult,
    capacity_sweep,
    energy_report,
    run_experiment,
    write_csv,
)


def ldpc_config(**overrides):
    construction = overrides.pop("construction", {"ldpc": {"n": 96, "dv": 3, "dc": 6, "seed": 3}, "m": 2})
    values = {
        "construction": construction,
        "snr_db": [14.0],
        "decoder": "bp",
        "max_frames": 64,
        "batch_size": 8,
        "target_frame_errors": 10,
        "seed": 17,
    }
    values.update(overrides)
    return ExperimentConfig(**values)


class TestEnergyReport:
    """Test energy reports of the worked examples."""

    def test_example2(self):
        """Test the 8-PAM example: 9 against 21."""
        report = energy_report(ExperimentConfig(construction={"preset": "example2"}, snr_db=[0]))
        assert report.per_signal_energy == 9.0
        assert report.unshaped_energy == 21.0
        assert report.gain_db == pytest.approx(3.68, abs=0.01)
        assert report.rate_per_signal == 1.0
        assert report.code_rate_per_signal == 1.5
        assert report.sphere_energy == 9.0
        assert report.exact

    def test_example3(self):
        """Test the 4-PAM example: 3 against 5."""
        cfg = ExperimentConfig(construction={"preset": "example3"}, snr_db=[0])
        report = energy_report(loaded=load_construction_source(cfg.construction))
        assert report.per_signal_energy == 3.0
        assert report.unshaped_energy == 5.0
        assert report.rate_per_signal == pytest.approx(4 / 3)

    def test_no_shaping_no_gain(self):
        """Test k_sh = 0 with the full 4-PAM set has zero gain."""
        cfg = ExperimentConfig(construction={"generator": ["10", "01"], "m": 2}, snr_db=[0])
        report = energy_report(cfg)
        assert report.per_signal_energy == 5.0
        assert report.gain_db == 0.0

    def test_sampled_energy(self):
        """Test large message sets fall back to sampling."""
        report = energy_report(ldpc_config(energy_samples=200))
        assert not report.exact
        assert report.samples == 200
        assert report.sphere_energy is None
        assert report.per_signal_energy == pytest.approx(5.0, rel=0.1)

    def test_needs_input(self):
        """Test calling without a config or construction."""
        with pytest.raises(ParameterError):
            energy_report()


class TestRunExperiment:
    """Test end-to-end Monte Carlo runs."""

    def test_example3_high_snr(self):
        """Test ML decoding of the 4-PAM example at 30 dB is error free."""
        cfg = ExperimentConfig(
            construction={"preset": "example3"},
            snr_db=[30.0],
            max_frames=10_000,
            batch_size=500,
            seed=1,
        )
        (result,) = run_experiment(cfg)
        assert result.frames == 10_000
        assert result.bit_errors == 0
        assert result.ber == 0.0
        assert result.avg_energy == pytest.approx(3.0, abs=0.05)
        assert result.energy_reduction > 0
        assert result.sigma2 == pytest.approx(3.0 / 1000)

    def test_low_snr_stops_at_target(self):
        """Test a point stops after the batch that reaches the error target."""
        cfg = ExperimentConfig(
            construction={"preset": "example2"},
            snr_db=[-5.0],
            target_frame_errors=5,
            batch_size=4,
            max_frames=1000,
        )
        (result,) = run_experiment(cfg)
        assert result.frame_errors >= 5
        assert result.frames % 4 == 0
        assert result.frames < 1000
        assert result.ber == result.bit_errors / (result.frames * 2)

    def test_deterministic_across_workers(self, tmp_path):
        """Test results and CSV bytes do not depend on the worker count."""
        base = {
            "construction": {"preset": "example3"},
            "snr_db": [2.0, 6.0],
            "max_frames": 300,
            "batch_size": 25,
            "target_frame_errors": 40,
            "seed": 123,
        }
        single = run_experiment(ExperimentConfig(**base))
        threaded = run_experiment(ExperimentConfig(**base, workers=3))
        assert single == threaded
        a = write_csv(single, tmp_path / "a.csv").read_bytes()
        b = write_csv(threaded, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_seed_changes_results(self):
        """Test different seeds draw different frames."""
        base = {"construction": {"preset": "example2"}, "snr_db": [3.0], "max_frames": 200}
        a = run_experiment(ExperimentConfig(**base, seed=1))[0]
        b = run_experiment(ExperimentConfig(**base, seed=2))[0]
        assert (a.bit_errors, a.avg_energy) != (b.bit_errors, b.avg_energy)

    def test_unshaped_without_shaping_bits_is_identical(self):
        """Test shaped and unshaped runs agree when k_sh = 0."""
        shaped = run_experiment(ldpc_config(snr_db=[6.0], shaped=True))
        plain = run_experiment(ldpc_config(snr_db=[6.0], shaped=False))
        assert shaped == plain

    def test_shaping_lowers_energy(self):
        """Test coset shaping lowers the transmitted energy of an LDPC code."""
        construction = {
            "ldpc": {"n": 96, "dv": 3, "dc": 6, "seed": 3},
            "m": 2,
            "k_sh": 2,
            "shaping_seed": 9,
        }
        shaped = run_experiment(ldpc_config(construction=construction))[0]
        plain = run_experiment(ldpc_config(construction=construction, shaped=False))[0]
        assert shaped.avg_energy < plain.avg_energy
        assert shaped.energy_reduction > 0
        assert plain.energy_reduction == 0

    def test_ber_falls_with_snr(self):
        """Test BP errors drop between a noisy and a clean operating point."""
        noisy, clean = run_experiment(ldpc_config(snr_db=[0.0, 14.0]))
        assert noisy.ber > 0
        assert clean.ber <= noisy.ber
        assert clean.fer <= noisy.fer

    def test_ber_sweep_monotone(self):
        """Test BER never rises across an SNR sweep with at least 100 frame errors per point."""
        cfg = ExperimentConfig(
            construction={"preset": "example3"},
            snr_db=[0.0, 2.0, 4.0, 6.0],
            target_frame_errors=100,
            max_frames=20_000,
            batch_size=100,
            seed=5,
        )
        results = run_experiment(cfg)
        assert all(r.frame_errors >= 100 for r in results)
        bers = [r.ber for r in results]
        assert all(a >= b for a, b in zip(bers, bers[1:]))
        assert bers[0] > bers[-1]

    def test_maxlog_min_sum(self):
        """Test the approximate demapper and check rule decode a clean channel."""
        (result,) = run_experiment(ldpc_config(demap_mode="maxlog", bp_mode="min_sum", snr_db=[16.0]))
        assert result.fer <= 0.1


class TestOutput:
    """Test CSV output and result validation."""

    def test_csv_layout(self, tmp_path):
        """Test the header and a row."""
        result = TrialResult(
            snr_db=10.0,
            sigma2=0.3,
            frames=4,
            bit_errors=1,
            frame_errors=1,
            ber=0.125,
            fer=0.25,
            avg_energy=3.0,
            seed=7,
        )
        path = write_csv([result], tmp_path / "nested" / "out.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "10.0,4,1,1,0.125,0.25,3.0,7"

    def test_inconsistent_fer(self):
        """Test fer must match the counters."""
        with pytest.raises(ValueError):
            TrialResult(
                snr_db=0.0,
                sigma2=1.0,
                frames=4,
                bit_errors=1,
                frame_errors=1,
                ber=0.1,
                fer=0.5,
                avg_energy=1.0,
                seed=0,
            )


@pytest.fixture(scope="module")
def points():
    """Thresholds of 256-QAM at 16/3 bits per symbol, keyed by curve."""
    return {p.kind: p.snr_db for p in capacity_sweep(4, 16 / 3)}


class TestCapacitySweep:
    """Test capacity thresholds of 256-QAM."""

    def test_shannon(self, points):
        """Test the Shannon limit near 15.95 dB."""
        assert points["shannon"] == pytest.approx(15.97, abs=0.1)

    def test_shaped_qam(self, points):
        """Test Maxwell-Boltzmann 256-QAM lands close to the Shannon limit."""
        assert points["shaped_qam"] == pytest.approx(15.99, abs=0.15)

    def test_uniform_and_bicm(self, points):
        """Test uniform 256-QAM and Gray BICM need about 17 dB."""
        assert 16.6 <= points["cm_qam"] <= 17.1
        assert 16.8 <= points["bicm"] <= 17.3

    def test_ordering(self, points):
        """Test shannon ≤ shaped ≤ uniform ≤ BICM."""
        assert points["shannon"] <= points["shaped_qam"] + 1e-6
        assert points["shaped_qam"] <= points["cm_qam"] + 1e-6
        assert points["cm_qam"] <= points["bicm"] + 1e-6

    def test_floor_at_tiny_rate(self):
        """Test a vanishing rate reports the floor for every curve."""
        assert all(p.snr_db == -50.0 for p in capacity_sweep(2, 1e-6))

    def test_rate_too_high(self):
        """Test rates above 2m bits."""
        with pytest.raises(ParameterError):
            capacity_sweep(2, 4.5)
