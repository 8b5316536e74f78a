# -*- coding: utf-8 -*-

import json
import pytest
import phaserng as phr
import numpy as np
from phaserng import cli
from .fixture_data import *  # noqa

periodic_bits = np.tile(np.array([0, 1, 1, 0], dtype=np.uint8), 2500)


def run(capsys, *argv: str) -> tuple[int, object]:  # type: ignore
    capsys.readouterr()
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


@pytest.fixture(scope="module")
def raw_file(tmp_path_factory):  # type: ignore
    # 20_000 samples at the optimal power of the reference model
    filename = tmp_path_factory.mktemp("cli") / "raw.bin"
    cfg = phr.SimConfig(
        params=dict(REFERENCE_PARAMS),
        power=phr.optimal_power(REFERENCE_PARAMS)[0],
        n_samples=20_000,
    )
    phr.write_raw(phr.simulate_raw(cfg), filename)
    return filename


class Test_usage_errors:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["snr"],
            ["-v", "-q", "optimal-power"],
            ["extract", "--in", "raw.bin", "--out", "bits.bin"],
            ["bench", "--algo", "fourier"],
            ["test", "--in", "a.bin", "--raw", "b.bin"],
            ["snr", "--power", "high"],
        ],
    )
    def test_exit_code(self, argv: list[str]) -> None:
        with pytest.raises(SystemExit) as excinfo:
            cli.main(argv)
        assert excinfo.value.code == cli.EXIT_USAGE


class Test_noise_model_commands:
    def test_snr(self, capsys) -> None:  # type: ignore
        code, out = run(capsys, "snr", "--power", "0.949")
        assert code == cli.EXIT_OK
        assert out["gamma"] == pytest.approx(21.21, abs=0.01)

    def test_snr_overrides(self, capsys) -> None:  # type: ignore
        code, out = run(
            capsys, "snr", "--power", "1", "--aq", "10", "--ac", "1", "--f", "1"
        )
        assert code == cli.EXIT_OK
        assert out["gamma"] == 5.0

    @pytest.mark.parametrize(
        "argv",
        [
            ["--power", "1", "--ac", "0", "--f", "0"],
            ["--power", "-1"],
            ["--power", "1", "--aq", "-3"],
        ],
    )
    def test_snr_data_errors(self, capsys, argv: list[str]) -> None:  # type: ignore
        code, _ = run(capsys, "snr", *argv)
        assert code == cli.EXIT_DATA

    def test_optimal_power(self, capsys) -> None:  # type: ignore
        code, out = run(capsys, "optimal-power")
        assert code == cli.EXIT_OK
        assert out["power"] == pytest.approx(np.sqrt(0.9), abs=1e-4)
        assert out["gamma"] == pytest.approx(21.21, abs=0.01)

    def test_no_interior_maximum(self, capsys) -> None:  # type: ignore
        code, _ = run(capsys, "optimal-power", "--ac", "0")
        assert code == cli.EXIT_DATA

    def test_fit(self, capsys, noiseless_sweep, tmp_path) -> None:  # type: ignore
        sweep, params = noiseless_sweep
        sweep_file = tmp_path / "sweep.csv"
        fit_file = tmp_path / "fit.json"
        phr.write_sweep_csv(sweep, sweep_file)

        code, out = run(
            capsys, "fit", "--sweep", str(sweep_file), "--out", str(fit_file)
        )
        assert code == cli.EXIT_OK
        assert out["aq"] == pytest.approx(params["aq"], abs=1e-4)
        assert phr.load_fit(fit_file)["f"] == pytest.approx(params["f"])

        # The fit feeds the other commands.
        code, out = run(capsys, "snr", "--fit", str(fit_file), "--power", "1")
        assert code == cli.EXIT_OK
        assert out["gamma"] == pytest.approx(16.1 / 0.76, abs=1e-3)

    def test_fit_unbounded_ci(self, capsys, tmp_path) -> None:  # type: ignore
        sweep_file = tmp_path / "sweep.csv"
        sweep_file.write_text(
            "power_mw,variance_mv2\n0.3,5.0\n1.1,19.5\n2.4,42.0\n",
            encoding="utf-8",
        )
        capsys.readouterr()
        code = cli.main(["fit", "--sweep", str(sweep_file)])
        text = capsys.readouterr().out
        assert code == cli.EXIT_OK
        assert "Infinity" not in text
        out = json.loads(text)
        assert out["ci_aq"] is None
        assert out["dof"] == 0

    def test_missing_sweep(self, capsys, tmp_path) -> None:  # type: ignore
        code, _ = run(capsys, "fit", "--sweep", str(tmp_path / "nope.csv"))
        assert code == cli.EXIT_DATA


class Test_chain:
    def test_simulate_entropy_extract_test(self, capsys, tmp_path) -> None:  # type: ignore
        raw = tmp_path / "raw.bin"
        report = tmp_path / "entropy.json"
        seed = tmp_path / "seed.bin"
        bits = tmp_path / "bits.bin"

        code, out = run(
            capsys, "simulate", "--samples", "20000", "--out", str(raw)
        )
        assert code == cli.EXIT_OK
        assert out["prng"] == "PCG64"
        assert len(phr.read_raw(raw)) == 20_000

        code, out = run(
            capsys, "entropy", "--in", str(raw), "--report", str(report)
        )
        assert code == cli.EXIT_OK
        assert 6.2 <= out["h_min_per_sample"] <= 6.6

        extract_args = [
            "extract",
            "--entropy",
            str(report),
            "--n",
            "1024",
            "--epsilon",
            str(2.0**-20),
            "--in",
            str(raw),
        ]
        code, out = run(
            capsys,
            *extract_args,
            "--demo-seed",
            "3",
            "--seed-out",
            str(seed),
            "--out",
            str(bits),
        )
        assert code == cli.EXIT_OK
        assert out["blocks"] == 156
        m = out["params"]["m"]
        assert phr.read_bits(bits).size == 156 * m

        # The saved seed reproduces the bits.
        again = tmp_path / "again.bin"
        code, _ = run(
            capsys, *extract_args, "--seed-file", str(seed), "--out", str(again)
        )
        assert code == cli.EXIT_OK
        assert again.read_bytes() == bits.read_bytes()

        code, out = run(capsys, "test", "--in", str(bits))
        assert code in (cli.EXIT_OK, cli.EXIT_TESTS_FAILED)
        assert list(out["tests"].keys()) == phr.CORE_TESTS
        failed = out["verdict"] == "fail"
        assert (code == cli.EXIT_TESTS_FAILED) == failed

    def test_seed_file_mismatch(self, capsys, raw_file, tmp_path) -> None:  # type: ignore
        params = phr.output_length(512, 0.8, 2.0**-4)
        seed = tmp_path / "seed.bin"
        phr.write_seed(phr.demo_seed(params, 1), params, seed)
        code, _ = run(
            capsys,
            "extract",
            "--h-min-rate",
            "0.8",
            "--n",
            "1024",
            "--epsilon",
            "0.0625",
            "--seed-file",
            str(seed),
            "--in",
            str(raw_file),
            "--out",
            str(tmp_path / "bits.bin"),
        )
        assert code == cli.EXIT_DATA
        assert not (tmp_path / "bits.bin").exists()

    def test_extract_reference_rate(self, capsys, raw_file, tmp_path) -> None:  # type: ignore
        # Without a rate the reference source at its optimal power sizes
        # the extractor: about 6.39 bits per 8-bit sample.
        code, out = run(
            capsys,
            "extract",
            "--n",
            "1024",
            "--epsilon",
            str(2.0**-20),
            "--demo-seed",
            "1",
            "--in",
            str(raw_file),
            "--out",
            str(tmp_path / "bits.bin"),
        )
        assert code == cli.EXIT_OK
        assert 0.79 <= out["params"]["k"] / 1024 <= 0.81
        assert out["params"]["m"] == out["params"]["k"] - 40
        assert out["blocks"] == 156

    def test_trevisan(self, capsys, raw_file, tmp_path) -> None:  # type: ignore
        bits = tmp_path / "bits.bin"
        code, out = run(
            capsys,
            "extract",
            "--algo",
            "trevisan",
            "--h-min-rate",
            "0.8",
            "--n",
            "256",
            "--epsilon",
            "0.0625",
            "--demo-seed",
            "5",
            "--in",
            str(raw_file),
            "--out",
            str(bits),
        )
        assert code == cli.EXIT_OK
        assert out["params"]["algorithm"] == "trevisan"
        assert phr.read_bits(bits).size == out["blocks"] * out["params"]["m"]

    def test_entropy_too_few_samples(self, capsys, tmp_path) -> None:  # type: ignore
        raw = tmp_path / "raw.bin"
        code, _ = run(capsys, "simulate", "--samples", "5000", "--out", str(raw))
        assert code == cli.EXIT_OK
        code, _ = run(capsys, "entropy", "--in", str(raw))
        assert code == cli.EXIT_DATA

    def test_missing_raw_file(self, capsys, tmp_path) -> None:  # type: ignore
        code, _ = run(capsys, "entropy", "--in", str(tmp_path / "nope.bin"))
        assert code == cli.EXIT_DATA


class Test_test_command:
    def test_passing_bits(self, capsys, tmp_path) -> None:  # type: ignore
        filename = tmp_path / "bits.bin"
        report = tmp_path / "tests.json"
        phr.write_bits(periodic_bits, filename)
        code, out = run(
            capsys, "test", "--in", str(filename), "--report", str(report)
        )
        assert code == cli.EXIT_OK
        assert out["verdict"] == "pass"
        assert len(phr.load_reports(report)) == 3

    def test_failing_bits(self, capsys, tmp_path) -> None:  # type: ignore
        filename = tmp_path / "bits.bin"
        phr.write_bits(np.zeros(1000, dtype=np.uint8), filename)
        code, out = run(capsys, "test", "--in", str(filename))
        assert code == cli.EXIT_TESTS_FAILED
        assert out["verdict"] == "fail"

    def test_sequences(self, capsys, tmp_path) -> None:  # type: ignore
        filename = tmp_path / "bits.bin"
        phr.write_bits(periodic_bits, filename)
        code, out = run(
            capsys, "test", "--in", str(filename), "--sequence-length", "5000"
        )
        assert code == cli.EXIT_OK
        code, out = run(
            capsys, "test", "--in", str(filename), "--sequence-length", "1000"
        )
        assert code == cli.EXIT_TESTS_FAILED

    def test_raw_autocorrelation(self, capsys, raw_file) -> None:  # type: ignore
        code, out = run(
            capsys, "test", "--raw", str(raw_file), "--autocorr", "--max-lag", "10"
        )
        assert code == cli.EXIT_OK
        assert "tests" not in out
        result = out["autocorrelation"]
        assert result["expected_sd"] == pytest.approx(1 / np.sqrt(20_000), abs=1e-4)
        assert result["max_abs"] < 5 / np.sqrt(20_000)

    def test_raw_spectrum(self, capsys, raw_file) -> None:  # type: ignore
        code, out = run(
            capsys, "test", "--raw", str(raw_file), "--spectrum", "--segments", "64"
        )
        assert code == cli.EXIT_OK
        assert out["spectral_flatness"] > 0.95


class Test_bench_command:
    def test_bench(self, capsys) -> None:  # type: ignore
        code, out = run(
            capsys,
            "bench",
            "--algo",
            "toeplitz",
            "trevisan",
            "--n",
            "64",
            "--h-min-rate",
            "0.9",
            "--epsilon",
            "0.0625",
            "--blocks",
            "8",
        )
        assert code == cli.EXIT_OK
        assert [r["algorithm"] for r in out] == ["toeplitz", "trevisan"]
        assert all(r["repeats"] == 5 for r in out)
        assert all(r["m"] > 0 and not r["like_for_like"] for r in out)

    def test_too_few_repeats(self, capsys) -> None:  # type: ignore
        code, _ = run(
            capsys, "bench", "--n", "64", "--h-min-rate", "0.9", "--repeats", "2"
        )
        assert code == cli.EXIT_DATA


class Test_pipeline_command:
    def small_config(self, tmp_path, **kwargs) -> str:  # type: ignore
        cfg = phr.PipelineConfig(
            output_dir=str(tmp_path / "out"),
            n_samples=20_000,
            n=1024,
            epsilon=2.0**-20,
            autocorr_lags=20,
            **kwargs,
        )
        filename = tmp_path / "pipeline.toml"
        phr.save_config(cfg, filename)
        return str(filename)

    def test_pipeline(self, capsys, tmp_path) -> None:  # type: ignore
        config = self.small_config(tmp_path, demo_seed=7)
        code, out = run(capsys, "pipeline", "--config", config)
        assert code in (cli.EXIT_OK, cli.EXIT_TESTS_FAILED)
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert (code == cli.EXIT_OK) == (summary["verdict"] == "pass")
        assert out["bits_extracted"] == summary["bits_extracted"]
        assert "artifacts" not in out
        assert "timings" in out

    def test_overrides(self, capsys, tmp_path) -> None:  # type: ignore
        config = self.small_config(tmp_path)
        saved = tmp_path / "effective.toml"
        out_dir = tmp_path / "other"
        code, _ = run(
            capsys,
            "pipeline",
            "--config",
            config,
            "--demo-seed",
            "7",
            "--output-dir",
            str(out_dir),
            "--save-config",
            str(saved),
        )
        assert code in (cli.EXIT_OK, cli.EXIT_TESTS_FAILED)
        assert (out_dir / "bits.bin").exists()
        effective = phr.load_config(saved)
        assert effective.demo_seed == 7
        assert effective.output_dir == str(out_dir)

    def test_missing_seed(self, capsys, tmp_path) -> None:  # type: ignore
        code, _ = run(capsys, "pipeline", "--config", self.small_config(tmp_path))
        assert code == cli.EXIT_DATA
        assert (tmp_path / "out" / "entropy.json").exists()

    def test_bad_config(self, capsys, tmp_path) -> None:  # type: ignore
        filename = tmp_path / "pipeline.toml"
        filename.write_text("n_sample = 10\n", encoding="utf-8")
        code, _ = run(capsys, "pipeline", "--config", str(filename))
        assert code == cli.EXIT_DATA
        filename.write_text('algorithm = "fourier"\n', encoding="utf-8")
        code, _ = run(capsys, "pipeline", "--config", str(filename))
        assert code == cli.EXIT_DATA
