import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecg_rr.datagen import GenConfig, synth_record
from ecg_rr.errors import ConfigurationError
from ecg_rr.harness import (Method, Report, estimate_rr, evaluate, load_spectra,
                            metrics_from_errors, run_experiment, split_data)
from ecg_rr.training import Model, TrainConfig, gaussian_target, save_model, load_model, train


def peaked_model(arch, mu):
    """Constant-output model whose pseudo-spectrum peaks at ``mu``."""
    model = Model.init(arch, 0)
    for layer in model.ae.layers:
        layer.weight[:] = 0.0
        layer.bias[:] = 0.0
    p = gaussian_target(mu, 3) * 0.998 + 0.001
    model.ae.layers[-1].bias[:] = np.log(p / (1 - p))
    return model


@pytest.fixture
def record18():
    return synth_record(GenConfig(), 0, rate_hz=0.3, mod_depth_hz=0.0)


class TestMethod:
    def test_dft_even_record(self, record18):
        assert estimate_rr(Method("DFT"), record18) == 18

    def test_ae_dct_peak_13(self, record18):
        assert estimate_rr(Method("AE+DCT", peaked_model("ae-dct", 13)), record18) == 13

    def test_zero_ae_ties_to_index_zero(self, record18):
        model = Model("ae", Model.init("ae", 0).ae.zeros())
        assert estimate_rr(Method("AE", model), record18) == 0

    def test_cli_names(self):
        assert Method("dft").name == "DFT"
        assert Method("ae-dct", peaked_model("ae-dct", 13)).name == "AE+DCT"

    def test_missing_model(self):
        with pytest.raises(ConfigurationError):
            Method("AE")

    def test_wrong_architecture(self):
        with pytest.raises(ConfigurationError):
            Method("AE", peaked_model("ae-dct", 13))

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            Method("FFT")

    def test_dft_range_reaches_low_bins(self):
        spec = np.zeros(32)
        spec[3], spec[12] = 1.0, 0.5
        assert Method("DFT").estimate_spectra(spec)[0] == 12
        assert Method("DFT", dft_range=(1, 26)).estimate_spectra(spec)[0] == 3


class TestMetrics:
    def test_perfect(self):
        m = metrics_from_errors([0, 0, 0])
        assert (m.mse_bpm2, m.mae_bpm, m.n) == (0.0, 0.0, 3)

    def test_all_off_by_one(self):
        m = metrics_from_errors([1, -1, 1, 1])
        assert (m.mse_bpm2, m.mae_bpm) == (1.0, 1.0)

    def test_half_off_by_two(self):
        m = metrics_from_errors([2, 0, -2, 0])
        assert (m.mse_bpm2, m.mae_bpm) == (2.0, 1.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            metrics_from_errors([])
        with pytest.raises(ValueError):
            evaluate(Method("DFT"), [])

    def test_evaluate_records(self, record18):
        m = evaluate(Method("DFT"), [record18, record18])
        assert (m.mse_bpm2, m.mae_bpm, m.n) == (0.0, 0.0, 2)

    @settings(max_examples=200)
    @given(st.lists(st.integers(-31, 31), min_size=1, max_size=100))
    def test_jensen(self, errors):
        m = metrics_from_errors(errors)
        assert m.mse_bpm2 >= 0 and m.mae_bpm >= 0
        assert m.mae_bpm**2 <= m.mse_bpm2 * (1 + 1e-12)


class TestReport:
    def make(self):
        r = Report()
        r.add("1", "DFT", metrics_from_errors([1, 2]))
        r.add("1", "AE", metrics_from_errors([0, 1]))
        r.add("2", "DFT", metrics_from_errors([3, 0]))
        r.add("2", "AE", metrics_from_errors([0, 0]))
        r.add_average()
        return r

    def test_average_rows(self):
        r = self.make()
        assert r.get("average", "DFT").mse == pytest.approx((2.5 + 4.5) / 2)
        assert r.get("average", "AE").mae == pytest.approx(0.25)

    def test_csv_round_trip(self):
        r = self.make()
        assert Report.from_csv(r.to_csv()) == r
        assert r.to_csv().splitlines()[0] == "split,method,mse,mae"

    def test_table_layout(self):
        lines = self.make().to_table().splitlines()
        assert lines[0].split() == ["Split", "Metric", "DFT", "AE"]
        assert len(lines) == 1 + 3 * 2

    def test_missing_row(self):
        with pytest.raises(KeyError):
            self.make().get("3", "DFT")


def test_loaded_model_scores_like_in_memory(small_dataset, tmp_path):
    spectra, labels = load_spectra(small_dataset)
    data, _, _ = split_data(spectra, labels, 1, 20)
    model, _ = train(data, TrainConfig(arch="ae-dct", epochs=20))
    save_model(model, tmp_path / "m.json")
    a = Method("AE+DCT", model).estimate_spectra(data.test_x)
    b = Method("AE+DCT", load_model(tmp_path / "m.json")).estimate_spectra(data.test_x)
    np.testing.assert_array_equal(a, b)


def test_experiment_writes_report(small_dataset, tmp_path):
    report = run_experiment(small_dataset, [0, 5], TrainConfig(epochs=5), tmp_path / "r.csv", 20)
    assert [r.split for r in report.rows].count("average") == 3
    assert Report.from_csv((tmp_path / "r.csv").read_text()) == report


def test_experiment_failure_flushes_partial(small_dataset, tmp_path, monkeypatch):
    import ecg_rr.harness as harness
    from ecg_rr.errors import NumericFailure

    calls = []

    def flaky_train(data, cfg):
        calls.append(cfg.arch)
        if len(calls) == 3:
            raise NumericFailure("diverged", epoch=4)
        return train(data, cfg)

    monkeypatch.setattr(harness, "train", flaky_train)
    with pytest.raises(NumericFailure):
        run_experiment(small_dataset, [0, 1], TrainConfig(epochs=2), tmp_path / "r.csv", 20)
    assert not (tmp_path / "r.csv").exists()
    partial = Report.from_csv((tmp_path / "r.csv.partial").read_text())
    assert [(r.split, r.method) for r in partial.rows] == [
        ("1", "DFT"), ("1", "AE"), ("1", "AE+DCT"), ("2", "DFT")]
