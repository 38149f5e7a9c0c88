"""Dispatch, emission, and reproducibility tests for the command line tool."""

import csv
import io
import json
import math

import numpy as np
import pytest

from kakeyalab.cli import (
    CliError,
    dispatch,
    emit_report,
    emit_svg,
    load_config,
    parse_deltas,
    read_field,
    sha256_file,
    write_field,
)
from kakeyalab.exactgeom.region import Region2
from kakeyalab.perron import PerronSpec, build_perron_tree, tree_from_json
from kakeyalab.spectral import GridField, MultiplierSpec, apply_multiplier


def run(tmp_path, *argv):
    return dispatch([str(a) for a in argv])


class TestDispatch:
    def test_perron_happy_path(self, tmp_path):
        out = tmp_path / "t.json"
        code = dispatch(["perron", "--m", "4",
                         "--schedule", "0.33,0.5,0.6,0.67",
                         "--out", str(out)])
        assert code == 0
        assert out.exists()
        manifest = json.loads((tmp_path / "t.json.manifest.json").read_text())
        assert manifest["subcommand"] == "perron"
        assert manifest["parameters"]["m"] == 4
        tree = tree_from_json(out.read_text())
        assert tree.spec.m == 4

    def test_unsupported_dim_is_validation_error(self, tmp_path):
        code = dispatch(["tubes", "gen", "--delta", "0.3", "--dim", "4",
                         "--out", str(tmp_path / "f.json")])
        assert code == 2

    def test_unknown_subcommand_usage_on_stderr(self, capsys):
        assert dispatch(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_required_flag(self, tmp_path):
        assert dispatch(["perron", "--out", str(tmp_path / "t.json")]) == 2

    def test_bad_flag_value(self, tmp_path):
        assert dispatch(["perron", "--m", "four",
                         "--out", str(tmp_path / "t.json")]) == 2

    def test_check_failure_is_exit_3(self, tmp_path):
        # a segment's neighborhood volume decays too fast for the
        # dimension-2 lower bound, so --check must reject it
        pts = np.stack([np.linspace(0.0, 1.0, 2001),
                        np.full(2001, 0.5)], axis=1)
        src = tmp_path / "seg.csv"
        np.savetxt(src, pts, delimiter=",")
        out = tmp_path / "dim.csv"
        code = dispatch(["dim", "--in", str(src), "--deltas", "2^-4..2^-8",
                         "--out", str(out), "--check"])
        assert code == 3
        assert out.exists()

    def test_check_success_is_exit_0(self, tmp_path):
        out = tmp_path / "t.json"
        code = dispatch(["perron", "--m", "3", "--out", str(out), "--check"])
        assert code == 0


class TestManifest:
    def test_digests_recomputable(self, tmp_path):
        out = tmp_path / "t.json"
        svg = tmp_path / "t.svg"
        assert dispatch(["perron", "--m", "3", "--out", str(out),
                         "--svg", str(svg)]) == 0
        manifest = json.loads((tmp_path / "t.json.manifest.json").read_text())
        assert set(manifest["outputs"]) == {str(out), str(svg)}
        for path, digest in manifest["outputs"].items():
            assert sha256_file(path) == digest
        assert manifest["wall_time_s"] > 0
        assert manifest["tool_version"]

    def test_seed_recorded(self, tmp_path):
        out = tmp_path / "h.csv"
        assert dispatch(["heisenberg", "--delta", "0.125", "--samples",
                         "20000", "--seed", "9", "--out", str(out)]) == 0
        manifest = json.loads((tmp_path / "h.csv.manifest.json").read_text())
        assert manifest["seeds"] == {"seed": 9}


class TestReproducibility:
    def test_heisenberg_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["heisenberg", "--delta", "0.0625", "--samples", "50000",
                "--seed", "7"]
        assert dispatch(args + ["--out", str(a)]) == 0
        assert dispatch(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_does_not_change_bytes(self, tmp_path, monkeypatch):
        args = ["tubes", "analyze", "--delta", "0.125", "--placement",
                "random", "--seed", "5", "--mc-samples", "100000"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert dispatch(args + ["--out", str(a)]) == 0
        monkeypatch.setenv("KAKEYA_LAB_THREADS", "4")
        assert dispatch(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_svg_rerun_identical(self, tmp_path):
        s1, s2 = tmp_path / "a.svg", tmp_path / "b.svg"
        for s in (s1, s2):
            assert dispatch(["perron", "--m", "4",
                             "--out", str(tmp_path / "t.json"),
                             "--svg", str(s)]) == 0
        assert s1.read_bytes() == s2.read_bytes()


class TestConfigFile:
    def test_config_supplies_values(self, tmp_path):
        out = tmp_path / "h.csv"
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment line\ndelta=0.125\nsamples=20000\n"
                       f"seed=3\nout={out}\n")
        assert dispatch(["heisenberg", "--config", str(cfg)]) == 0
        assert out.exists()

    def test_cli_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta=0.125\nsamples=20000\nseed=3\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert dispatch(["heisenberg", "--config", str(cfg),
                         "--out", str(a)]) == 0
        assert dispatch(["heisenberg", "--config", str(cfg), "--seed", "4",
                         "--out", str(b)]) == 0
        rows_a = a.read_text().splitlines()[1]
        rows_b = b.read_text().splitlines()[1]
        assert rows_a != rows_b

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta=0.125\nfrobs=7\n")
        assert dispatch(["heisenberg", "--config", str(cfg),
                         "--out", str(tmp_path / "h.csv")]) == 2

    def test_bad_value_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta=wide\n")
        assert dispatch(["heisenberg", "--config", str(cfg),
                         "--out", str(tmp_path / "h.csv")]) == 2

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta 0.125\n")
        assert dispatch(["heisenberg", "--config", str(cfg),
                         "--out", str(tmp_path / "h.csv")]) == 2

    def test_load_config_normalizes_dashes(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mc-samples=5\n")
        assert load_config(str(cfg), {"mc_samples"}) == {"mc_samples": "5"}


class TestEmitReport:
    def test_zero_rows_header_only(self):
        text, nans = emit_report([], ("a", "b"))
        assert text == "a,b\n"
        assert nans == 0

    def test_nan_printed_and_counted(self):
        text, nans = emit_report([(1, float("nan"))], ("k", "v"))
        assert "nan" in text.splitlines()[1]
        assert nans == 1

    def test_seventeen_significant_digits(self):
        value = 1.0 / 3.0
        text, _ = emit_report([(value,)], ("v",))
        cell = text.splitlines()[1]
        assert cell == "%.17g" % value
        assert float(cell) == value

    def test_round_trip_parse(self):
        rows = [(0.125, -3.5e-17, 42, "slab"), (math.pi, 2.0, 0, "x,y")]
        text, _ = emit_report(rows, ("a", "b", "c", "d"))
        back = list(csv.reader(io.StringIO(text)))
        assert back[0] == ["a", "b", "c", "d"]
        for row, parsed in zip(rows, back[1:]):
            assert float(parsed[0]) == row[0]
            assert float(parsed[1]) == row[1]
            assert int(parsed[2]) == row[2]
            assert parsed[3] == row[3]

    def test_rfc4180_quoting_and_line_endings(self):
        text, _ = emit_report([("a,b", 1)], ("name", "n"))
        assert '"a,b"' in text
        assert "\r" not in text
        assert text.endswith("\n")

    def test_schema_mismatch_raises(self):
        with pytest.raises(CliError, match="schema"):
            emit_report([(1, 2, 3)], ("a", "b"))


class TestEmitSvg:
    def test_empty_region_is_valid_svg(self):
        text = emit_svg(Region2([]))
        assert text.startswith("<svg")
        assert text.rstrip().endswith("</svg>")
        assert "<g" in text and "<path" not in text

    def test_one_path_per_polygon(self):
        region = build_perron_tree(PerronSpec.default(4)).region
        text = emit_svg(region)
        assert text.count("<path") == len(region.polygons)

    def test_deterministic(self):
        region = build_perron_tree(PerronSpec.default(3)).region
        assert emit_svg(region) == emit_svg(region)

    def test_heatmap_rects(self):
        arr = np.zeros((4, 4))
        arr[1, 2] = 2.0
        arr[3, 0] = 1.0
        text = emit_svg(arr)
        # background plus one rect per positive cell
        assert text.count("<rect") == 3
        assert 'fill-opacity="1.0000"' in text
        assert 'fill-opacity="0.5000"' in text

    def test_heatmap_rejects_wrong_rank(self):
        with pytest.raises(CliError, match="2d"):
            emit_svg(np.zeros(5))


class TestFieldFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        data = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
        field = GridField(2, 32, 4.0, data)
        path = tmp_path / "f.bin"
        write_field(str(path), field)
        back = read_field(str(path))
        assert back.dim == 2 and back.N == 32 and back.L == 4.0
        assert np.array_equal(back.data, field.data)

    def test_header_is_32_bytes(self, tmp_path):
        field = GridField(1, 8, 1.0, np.zeros(8, dtype=complex))
        path = tmp_path / "f.bin"
        write_field(str(path), field)
        assert path.stat().st_size == 32 + 16 * 8

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "f.bin"
        path.write_bytes(b"NOTAFILE" + bytes(24) + bytes(16 * 8))
        with pytest.raises(CliError, match="magic"):
            read_field(str(path))

    def test_truncated_header_rejected(self, tmp_path):
        path = tmp_path / "f.bin"
        path.write_bytes(b"short")
        with pytest.raises(CliError, match="truncated"):
            read_field(str(path))

    def test_wrong_payload_size_rejected(self, tmp_path):
        field = GridField(1, 8, 1.0, np.zeros(8, dtype=complex))
        path = tmp_path / "f.bin"
        write_field(str(path), field)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CliError, match="bytes"):
            read_field(str(path))

    def test_multiplier_subcommand_matches_library(self, tmp_path):
        rng = np.random.default_rng(8)
        data = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        field = GridField(2, 64, 8.0, data)
        src, dst = tmp_path / "f.bin", tmp_path / "g.bin"
        write_field(str(src), field)
        code = dispatch(["multiplier", "--kind", "ball", "--R", "2.5",
                         "--in", str(src), "--out", str(dst), "--check"])
        assert code == 0
        want = apply_multiplier(field, MultiplierSpec.ball(2.5))
        assert np.array_equal(read_field(str(dst)).data, want.data)


class TestParseDeltas:
    def test_dyadic_range(self):
        assert parse_deltas("2^-3..2^-5") == [0.125, 0.0625, 0.03125]

    def test_comma_floats(self):
        assert parse_deltas("0.5,0.25,0.125,0.0625") == [0.5, 0.25, 0.125, 0.0625]

    def test_rejects_garbage(self):
        for text in ("", "2^-5..2^-3", "3^-1..3^-4", "a,b"):
            with pytest.raises(CliError):
                parse_deltas(text)


class TestDimInputs:
    def test_reads_tree_json(self, tmp_path):
        tree_path = tmp_path / "t.json"
        assert dispatch(["perron", "--m", "4", "--out", str(tree_path)]) == 0
        out = tmp_path / "d.csv"
        code = dispatch(["dim", "--in", str(tree_path),
                         "--deltas", "2^-3..2^-6", "--out", str(out)])
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "delta,volume,ratio"
        assert len(rows) == 5

    def test_reads_family_json(self, tmp_path):
        fam_path = tmp_path / "fam.json"
        assert dispatch(["tubes", "gen", "--delta", "0.125", "--placement",
                         "bush", "--out", str(fam_path)]) == 0
        out = tmp_path / "d.csv"
        code = dispatch(["dim", "--in", str(fam_path),
                         "--deltas", "2^-2..2^-5", "--out", str(out)])
        assert code == 0

    def test_rejects_unknown_json(self, tmp_path):
        src = tmp_path / "x.json"
        src.write_text('{"what": 1}')
        assert dispatch(["dim", "--in", str(src), "--deltas", "2^-3..2^-6",
                         "--out", str(tmp_path / "d.csv")]) == 2


class TestTubesReport:
    def test_analyze_schema_and_verdicts(self, tmp_path):
        out = tmp_path / "r.csv"
        code = dispatch(["tubes", "analyze", "--delta", "0.03125",
                         "--placement", "parallel-lines",
                         "--checks", "wolff", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert set(rows[0]) == {"check", "scale", "statistic", "value",
                                "threshold", "verdict"}
        by_stat = {r["statistic"]: r for r in rows}
        # the slab packs delta^-2 tubes into a prism of volume ~ 2 delta
        assert by_stat["max_prism_ratio"]["verdict"] == "fail"
        assert float(by_stat["slab_ratio"]["value"]) > 10.0

    def test_unknown_check_name(self, tmp_path):
        assert dispatch(["tubes", "analyze", "--delta", "0.125",
                         "--checks", "bogus",
                         "--out", str(tmp_path / "r.csv")]) == 2

    def test_wolff_on_planar_family_rejected(self, tmp_path):
        assert dispatch(["tubes", "analyze", "--delta", "0.125",
                         "--placement", "bush", "--checks", "wolff",
                         "--out", str(tmp_path / "r.csv")]) == 2
