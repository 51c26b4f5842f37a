import json
import xml.etree.ElementTree as ET

import pytest

from cetsim.errors import DomainError
from cetsim.outputs import (
    CSV_HEADER,
    default_plots,
    emit_outputs,
    write_csv,
    write_heatmap,
    write_json,
    write_line_plot,
)
from cetsim.sweep import NoiseOptions, SweepSpec, run_sweep


@pytest.fixture(scope="module")
def ideal_dataset():
    return run_sweep(SweepSpec(betas=(1.0, 2.0), fields=(-1.0, 0.0, 1.0)))


@pytest.fixture(scope="module")
def noisy_dataset():
    return run_sweep(
        SweepSpec(
            betas=(1.0, 2.0),
            fields=(-1.0, 0.0, 1.0),
            noise=NoiseOptions(eta=0.8, recover=0.8),
        )
    )


@pytest.fixture(scope="module")
def line_dataset():
    return run_sweep(SweepSpec(betas=(2.0,), fields=(-2.0, -1.0, 0.0, 1.0, 2.0)))


class TestCsv:
    def test_header_exact(self, ideal_dataset, tmp_path):
        path = tmp_path / "sweep.csv"
        write_csv(ideal_dataset, path)
        text = path.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "beta,h,J,M,C2,C3,S,logZ,provenance"
        assert CSV_HEADER == "beta,h,J,M,C2,C3,S,logZ,provenance"

    def test_one_line_per_stage(self, noisy_dataset, tmp_path):
        path = tmp_path / "sweep.csv"
        write_csv(noisy_dataset, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1 + 6 * 3  # header + grid points x stages
        provenances = {line.rsplit(",", 1)[1] for line in lines[1:]}
        assert provenances == {"ideal", "simulated-noisy", "recovered"}

    def test_floats_round_trip_exactly(self, ideal_dataset, tmp_path):
        path = tmp_path / "sweep.csv"
        write_csv(ideal_dataset, path)
        lines = path.read_text(encoding="utf-8").splitlines()[1:]
        for line, row in zip(lines, ideal_dataset.rows):
            cells = line.split(",")
            assert float(cells[0]) == row.beta
            assert float(cells[1]) == row.h
            assert float(cells[3]) == row.results[0].magnetization
            assert float(cells[7]) == row.log_partition

    def test_unix_newlines_and_trailing_newline(self, ideal_dataset, tmp_path):
        path = tmp_path / "sweep.csv"
        write_csv(ideal_dataset, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")


class TestJson:
    def test_loads_and_shape(self, noisy_dataset, tmp_path):
        path = tmp_path / "sweep.json"
        write_json(noisy_dataset, path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert set(payload) == {"spec", "rows"}
        assert len(payload["rows"]) == 6
        row = payload["rows"][0]
        assert set(row) == {"beta", "h", "J", "logZ", "results"}
        stages = [res["provenance"] for res in row["results"]]
        assert stages == ["ideal", "simulated-noisy", "recovered"]
        res = row["results"][0]
        assert len(res["populations"]) == 8
        assert set(res["observables"]) == {
            "Z1", "Z2", "Z3", "Z1Z2", "Z2Z3", "Z1Z3", "Z1Z2Z3",
        }
        assert set(res["observables"]["Z1"]) == {"real", "imag"}

    def test_spec_payload_is_data_only(self, noisy_dataset, tmp_path):
        path = tmp_path / "sweep.json"
        write_json(noisy_dataset, path)
        spec = json.loads(path.read_text(encoding="utf-8"))["spec"]
        assert set(spec) == {"betas", "fields", "J", "noise", "seed"}
        assert "parallelism" not in spec
        assert "out_dir" not in spec
        assert spec["noise"]["eta"] == 0.8
        assert spec["noise"]["recover"] == 0.8
        assert spec["noise"]["decay"] is None

    def test_noise_null_without_noise(self, ideal_dataset, tmp_path):
        path = tmp_path / "sweep.json"
        write_json(ideal_dataset, path)
        spec = json.loads(path.read_text(encoding="utf-8"))["spec"]
        assert spec["noise"] is None

    def test_keys_sorted(self, ideal_dataset, tmp_path):
        path = tmp_path / "sweep.json"
        write_json(ideal_dataset, path)
        text = path.read_text(encoding="utf-8")
        assert text.index('"rows"') < text.index('"spec"')


class TestSvg:
    def test_line_plot_well_formed(self, noisy_dataset, tmp_path):
        path = tmp_path / "line.svg"
        write_line_plot(noisy_dataset, "M", path)
        root = ET.fromstring(path.read_text(encoding="utf-8"))
        assert root.tag.endswith("svg")

    def test_line_plot_one_polyline_per_series(self, noisy_dataset, tmp_path):
        path = tmp_path / "line.svg"
        write_line_plot(noisy_dataset, "S", path)
        text = path.read_text(encoding="utf-8")
        assert text.count("<polyline") == 2 * 3  # betas x stages

    def test_noisy_stages_dashed(self, noisy_dataset, tmp_path):
        path = tmp_path / "line.svg"
        write_line_plot(noisy_dataset, "M", path)
        text = path.read_text(encoding="utf-8")
        assert 'stroke-dasharray="6,3"' in text
        assert 'stroke-dasharray="2,3"' in text

    def test_heatmap_well_formed(self, noisy_dataset, tmp_path):
        path = tmp_path / "heat.svg"
        write_heatmap(noisy_dataset, "M", "recovered", path)
        root = ET.fromstring(path.read_text(encoding="utf-8"))
        rects = [el for el in root.iter() if el.tag.endswith("rect")]
        # 6 grid cells + 24 colour-bar steps
        assert len(rects) == 6 + 24

    def test_unknown_quantity_rejected(self, ideal_dataset, tmp_path):
        with pytest.raises(DomainError):
            write_line_plot(ideal_dataset, "Q", tmp_path / "x.svg")
        with pytest.raises(DomainError):
            write_heatmap(ideal_dataset, "Q", "ideal", tmp_path / "x.svg")


class TestEmitOutputs:
    def test_default_plots_follow_grid_shape(self, ideal_dataset, line_dataset):
        assert default_plots(line_dataset) == ["M-vs-h", "S-vs-h"]
        assert default_plots(ideal_dataset) == [
            "M-vs-h", "S-vs-h", "M-heatmap", "S-heatmap",
        ]

    def test_emit_all_formats(self, noisy_dataset, tmp_path):
        written = emit_outputs(
            noisy_dataset, ["csv", "json", "svg"], str(tmp_path)
        )
        names = sorted(p.rsplit("/", 1)[1] for p in written)
        assert names == [
            "heatmap_M_ideal.svg",
            "heatmap_M_noisy.svg",
            "heatmap_M_recovered.svg",
            "heatmap_S_ideal.svg",
            "heatmap_S_noisy.svg",
            "heatmap_S_recovered.svg",
            "line_M_vs_h.svg",
            "line_S_vs_h.svg",
            "sweep.csv",
            "sweep.json",
        ]

    def test_unknown_format_rejected(self, ideal_dataset, tmp_path):
        with pytest.raises(DomainError):
            emit_outputs(ideal_dataset, ["yaml"], str(tmp_path))

    def test_unknown_plot_token_rejected(self, ideal_dataset, tmp_path):
        with pytest.raises(DomainError):
            emit_outputs(ideal_dataset, ["svg"], str(tmp_path), plots=["M-pie"])

    def test_repeated_emission_is_byte_identical(self, noisy_dataset, tmp_path):
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        paths_a = emit_outputs(noisy_dataset, ["csv", "json", "svg"], str(dir_a))
        paths_b = emit_outputs(noisy_dataset, ["csv", "json", "svg"], str(dir_b))
        assert len(paths_a) == len(paths_b)
        for pa, pb in zip(paths_a, paths_b):
            with open(pa, "rb") as fa, open(pb, "rb") as fb:
                assert fa.read() == fb.read()
