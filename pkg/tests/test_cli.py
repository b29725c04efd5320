import json

from conftest import field2d
from fieldtopo import (ContributionMap2D, builtin_weights, descriptor_curve,
                       gather_2d_serial, random_field, write_bmp,
                       write_raw_volume, write_sidecar)
from fieldtopo.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCurveCommand:
    def test_single_pixel_bmp(self, tmp_path, capsys):
        p = tmp_path / "one.bmp"
        write_bmp(p, field2d([[0]], 255))
        code, out, _ = run(capsys, "curve", "--input", str(p))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "level,ec"
        assert len(lines) == 257  # header + one row per level 0..255
        assert lines[1] == "0,1"
        assert lines[-1] == "255,1"

    def test_ring_field_crosses_zero(self, tmp_path, capsys):
        p = tmp_path / "ring.bmp"
        write_bmp(p, field2d([[1, 2, 3], [8, 9, 4], [7, 6, 5]], 255))
        code, out, _ = run(capsys, "curve", "--input", str(p))
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        ec = [row[1] for row in rows]
        assert ec[8] == "0" and ec[9] == "1" and ec[1] == "1"

    def test_workers_do_not_change_output(self, tmp_path, capsys):
        p = tmp_path / "r.bmp"
        write_bmp(p, random_field((40, 30), "uniform", seed=4, max_level=255))
        outs = []
        for workers in ("1", "8"):
            code, out, _ = run(capsys, "curve", "--input", str(p),
                               "--descriptor", "ec", "--descriptor", "perimeter",
                               "--workers", workers)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_low_memory_identical(self, tmp_path, capsys):
        p = tmp_path / "lm.bmp"
        write_bmp(p, random_field((25, 19), "uniform", seed=6, max_level=255))
        _, full, _ = run(capsys, "curve", "--input", str(p))
        code, low, _ = run(capsys, "curve", "--input", str(p), "--low-memory")
        assert code == 0 and low == full

    def test_generated_field_csv(self, capsys):
        code, out, _ = run(capsys, "curve", "--generate", "6x4", "--seed", "3",
                           "--max-level", "9", "--descriptor", "area")
        assert code == 0
        f = random_field((6, 4), "uniform", seed=3, max_level=9)
        expected = descriptor_curve(gather_2d_serial(f), builtin_weights("area", "8C"))
        last = out.strip().splitlines()[-1]
        assert last == "9," + expected.decimals()[9]
        assert expected.value_at(9) == 24  # full field area

    def test_raw_volume_with_sidecar(self, tmp_path, capsys):
        v = random_field((5, 4, 6), "uniform", seed=2, max_level=255)
        p = tmp_path / "v.raw"
        write_raw_volume(p, v, "u8")
        write_sidecar(p, (5, 4, 6), "u8", 255)
        code, out, _ = run(capsys, "curve", "--input", str(p),
                           "--descriptor", "volume")
        assert code == 0
        assert out.splitlines()[0] == "level,volume"
        assert out.strip().splitlines()[-1] == "255,120"

    def test_json_output(self, tmp_path, capsys):
        p = tmp_path / "out.json"
        code, _, _ = run(capsys, "curve", "--generate", "4x4", "--max-level", "7",
                         "--output", str(p))
        assert code == 0
        doc = json.loads(p.read_text())
        assert doc["max_level"] == 7 and len(doc["curves"]["ec"]) == 8

    def test_custom_weight_table_descriptor(self, tmp_path, capsys):
        table = {"dimension": 2, "connectivity": "8C",
                 "weights": {"q1": 2, "qd": -4, "q3": -2}}
        tp = tmp_path / "myec.json"
        tp.write_text(json.dumps(table))
        code, out, _ = run(capsys, "curve", "--generate", "8x8", "--seed", "1",
                           "--max-level", "15", "--descriptor", str(tp),
                           "--descriptor", "ec")
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        assert rows[0] == ["level", "myec", "ec"]
        assert all(row[1] == row[2] for row in rows[1:])


class TestErrors:
    def test_missing_input(self, capsys):
        code, _, err = run(capsys, "curve")
        assert code == 1 and "error" in err

    def test_nonexistent_file(self, capsys):
        code, _, err = run(capsys, "curve", "--input", "/does/not/exist.bmp")
        assert code == 1

    def test_bad_connectivity_for_dims(self, capsys):
        code, _, err = run(capsys, "curve", "--generate", "4x4",
                           "--connectivity", "26")
        assert code == 1 and "connectivity" in err

    def test_volume_in_2d_rejected(self, capsys):
        code, _, err = run(capsys, "curve", "--generate", "4x4",
                           "--descriptor", "volume")
        assert code == 1

    def test_low_memory_needs_file(self, capsys):
        code, _, err = run(capsys, "curve", "--generate", "4x4", "--low-memory")
        assert code == 1 and "low-memory" in err

    def test_unknown_flag_exits_one(self, capsys):
        code = main(["curve", "--frobnicate"])
        assert code == 1

    def test_raw_without_dims_or_sidecar(self, tmp_path, capsys):
        p = tmp_path / "v.raw"
        p.write_bytes(bytes(8))
        code, _, err = run(capsys, "curve", "--input", str(p))
        assert code == 1 and "sidecar" in err

    def test_unrecognized_suffix_needs_format(self, tmp_path, capsys):
        p = tmp_path / "img.dat"
        write_bmp(p, field2d([[0]], 255))
        code, _, err = run(capsys, "curve", "--input", str(p))
        assert code == 1 and "--format" in err
        code, out, _ = run(capsys, "curve", "--input", str(p), "--format", "bmp")
        assert code == 0 and out.splitlines()[1] == "0,1"

    def test_internal_consistency_failure_exits_two(self, tmp_path, capsys, monkeypatch):
        from fieldtopo import ClassificationError
        from fieldtopo import cli as cli_module

        def boom(source, workers):
            raise ClassificationError("q-table miss")

        monkeypatch.setattr(cli_module, "gather_2d_parallel", boom)
        p = tmp_path / "x.bmp"
        write_bmp(p, field2d([[0]], 255))
        code, _, err = run(capsys, "curve", "--input", str(p))
        assert code == 2 and "internal consistency" in err


class TestContribDump:
    def test_dump_single_pixel(self, tmp_path, capsys):
        p = tmp_path / "px.bmp"
        write_bmp(p, field2d([[7]], 255))
        code, out, _ = run(capsys, "contrib-dump", "--input", str(p))
        assert code == 0
        doc = json.loads(out)
        assert doc["dimension"] == 2
        assert doc["types"]["q1"]["in"][7] == 4  # four corner vertices born at 7

    def test_dump_reweights_to_curve_output(self, tmp_path, capsys):
        p = tmp_path / "r.bmp"
        write_bmp(p, random_field((12, 9), "uniform", seed=5, max_level=255))
        code, dump_out, _ = run(capsys, "contrib-dump", "--input", str(p))
        assert code == 0
        cmap = ContributionMap2D.from_dict(json.loads(dump_out))
        curve = descriptor_curve(cmap, builtin_weights("ec", "8C"))
        _, csv_out, _ = run(capsys, "curve", "--input", str(p))
        rows = [line.split(",") for line in csv_out.strip().splitlines()[1:]]
        assert [r[1] for r in rows] == curve.decimals()


class TestBench:
    def test_bench_2d_report(self, capsys):
        code, out, _ = run(capsys, "bench", "--generate", "64x48", "--seed", "1",
                           "--repeats", "2")
        assert code == 0
        assert "MP/s" in out and "workers=1" in out

    def test_bench_3d_unit(self, capsys):
        code, out, _ = run(capsys, "bench", "--generate", "16x16x16",
                           "--repeats", "2")
        assert code == 0 and "MV/s" in out

    def test_bench_sweep_reports_speedup(self, capsys):
        code, out, _ = run(capsys, "bench", "--generate", "64x64",
                           "--repeats", "2", "--sweep-workers", "2")
        assert code == 0
        assert "workers=1" in out and "workers=2" in out
        assert "speedup 1.00" in out

    def test_bench_include_io(self, tmp_path, capsys):
        p = tmp_path / "b.bmp"
        write_bmp(p, random_field((32, 32), "uniform", seed=0, max_level=255))
        code, out, _ = run(capsys, "bench", "--input", str(p), "--repeats", "2",
                           "--include-io")
        assert code == 0 and "io included" in out
