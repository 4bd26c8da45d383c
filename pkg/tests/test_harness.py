import json
import math

import pytest

from ddlink.errors import ConfigError
from ddlink.harness import (
    BerRow,
    BerTable,
    count_ops_report,
    default_scenario,
    emit_csv,
    parse_scenario,
    read_csv,
    run_ber_sweep,
    run_sensing_trials,
    splitmix64,
)
from ddlink.harness.cli import main
from ddlink.harness.config import with_overrides
from ddlink.harness.sweep import cells


class TestConfig:
    def test_defaults(self):
        s = default_scenario()
        assert s.waveform == "hybrid"
        assert s.speeds_kmh == (3.0, 10.0, 30.0, 200.0, 500.0)
        assert (s.link.M, s.link.N, s.link.cp_len) == (16, 8, 1)
        assert s.sensing.cp_len is None and s.min_bits == 10_000

    def test_empty_document_gives_defaults(self):
        assert parse_scenario("") == parse_scenario("{}")

    @pytest.mark.parametrize(
        "text, field, line",
        [
            ("waveform: ofdm\nmod_order: 8\n", "mod_order", 2),
            ("seed: 1\nspeeds_kmh: [3, -1]\n", "speeds_kmh.1", 2),
            ("link:\n  M: 16\n  cp_len: 16\n", "link.cp_len", 3),
            ("min_bits: 10\n", "min_bits", 1),
            ("frames: 2.5\n", "frames", 1),
            ("bogus: 1\n", "bogus", 1),
            ("channel:\n  profile: custom\n", "channel.taps", None),
            ("seed: -3\n", "seed", 1),
            ("noiseless: maybe\n", "noiseless", 1),
        ],
    )
    def test_errors_name_field_and_line(self, text, field, line):
        with pytest.raises(ConfigError) as info:
            parse_scenario(text)
        assert info.value.field == field
        if line is not None:
            assert info.value.line == line
            assert f"line {line}" in str(info.value)

    def test_invalid_yaml(self):
        with pytest.raises(ConfigError) as info:
            parse_scenario("speeds_kmh: [1, 2\n")
        assert info.value.line is not None

    def test_large_seed_is_exact(self):
        assert parse_scenario(f"seed: {2**64 - 1}\n").seed == 2**64 - 1

    def test_custom_cp_auto(self):
        s = parse_scenario("channel:\n  profile: custom\n  taps: [[0, 0], [8000, -6]]\n")
        assert s.link.cp_len == 2


class TestCsv:
    row = BerRow("otfs", 500.0, 4, 15.0, 10240, 17, 17 / 10240, 40, 2**64 - 5, 40, 123, 4)

    def test_empty_table_is_header_only(self):
        text = BerTable().to_csv()
        assert text.count("\r\n") == 1 and text.startswith("waveform,speed_kmh")

    def test_one_row(self):
        assert BerTable((self.row,)).to_csv().count("\r\n") == 2

    def test_round_trip(self, tmp_path):
        table = BerTable((self.row, BerRow("ofdm", 3.0, 16, math.inf, 10240, 0, 0.0, 40, 1)))
        path = emit_csv(table, tmp_path / "sub" / "out.csv")
        assert read_csv(path) == table

    def test_bad_header(self):
        with pytest.raises(ValueError):
            BerTable.from_csv("a,b\r\n")


def test_splitmix64_reference_values():
    # first outputs of the reference generator seeded with 0
    assert splitmix64(0, 0) == 0xE220A8397B1DCDAF
    assert splitmix64(0, 1) == 0x6E789E6AA1B965F4
    assert splitmix64(0, 2) == 0x06C45D188009454F


def test_cells_are_speed_major():
    s = with_overrides(default_scenario(), speeds_kmh=(1.0, 2.0), snr_db=(0.0, 5.0, 10.0))
    assert cells(s) == [(0, 1.0, 0.0), (1, 1.0, 5.0), (2, 1.0, 10.0), (3, 2.0, 0.0), (4, 2.0, 5.0), (5, 2.0, 10.0)]


class TestSweep:
    def test_noiseless_static_sweep_has_no_errors(self):
        s = parse_scenario("waveform: ofdm\nspeeds_kmh: [0]\nsnr_db: [0]\nnoiseless: true\n")
        (row,) = run_ber_sweep(s).rows
        assert row.bit_errors == 0 and row.bits >= 10_000 and row.snr_db == math.inf

    def test_deterministic(self):
        s = parse_scenario("waveform: hybrid\nspeeds_kmh: [30, 300]\nsnr_db: [5]\n")
        assert run_ber_sweep(s).to_csv() == run_ber_sweep(s).to_csv()

    def test_hybrid_counts_otfs_frames(self):
        s = parse_scenario("waveform: hybrid\nspeeds_kmh: [3, 500]\nsnr_db: [10]\n")
        slow, fast = run_ber_sweep(s).rows
        assert slow.otfs_frames == 0 and fast.otfs_frames == fast.frames
        assert fast.complex_mults > 0 and fast.fft_calls > 0

    def test_sensing_trials(self):
        report = run_sensing_trials(default_scenario(), trials=10)
        assert report["failures"] == 0 and report["mean_rel_error"] < 0.05


def test_complexity_report():
    report = count_ops_report()
    assert report.ok
    assert report.base.ofdm_frame == 2 * 8 * 8 * 4
    d = report.as_dict()
    assert {c["name"] for c in d["checks"]} == {"ofdm_frame", "otfs_frame", "mf_f"}


class TestCli:
    def test_run(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("waveform: otfs\nspeeds_kmh: [100]\nsnr_db: [10]\n")
        assert main(["run", str(cfg), "--out", str(tmp_path / "res"), "--seed", "3"]) == 0
        table = read_csv(tmp_path / "res" / "ber_otfs.csv")
        assert len(table.rows) == 1 and table.rows[0].bits >= 10_000
        assert "wrote" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("mod_order: 3\n")
        assert main(["run", str(cfg)]) == 2
        assert "mod_order" in capsys.readouterr().err

    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["sense", str(tmp_path / "nope.yaml")]) == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_runtime_error_exit_code(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("waveform: ofdm\nspeeds_kmh: [1]\nsnr_db: [1]\n")
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", str(cfg), "--out", str(blocker / "sub")]) == 1

    def test_complexity(self, capsys):
        assert main(["complexity"]) == 0
        assert json.loads(capsys.readouterr().out)["ok"] is True
