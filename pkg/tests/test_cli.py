import json

import pytest

from pimcrypt.cli import main
from pimcrypt.machine import default_profile
from pimcrypt.sha256 import sha256_digest

FIPS_KEY_HEX = "000102030405060708090a0b0c0d0e0f"
FIPS_PLAINTEXT = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_CIPHERTEXT = bytes.fromhex("69c4e0d86a7b0430d8cdb78070b4c55a")


def _summary(capsys):
    out = capsys.readouterr().out
    pairs = {}
    for line in out.splitlines():
        if "=" in line and not line.startswith("event "):
            key, _, value = line.partition("=")
            pairs[key] = value
    return pairs


class TestEncrypt:
    def test_published_vector_file(self, tmp_path, capsys):
        src = tmp_path / "plain.bin"
        dst = tmp_path / "cipher.bin"
        src.write_bytes(FIPS_PLAINTEXT)
        code = main([
            "encrypt", "--key", FIPS_KEY_HEX, "--in", str(src), "--out", str(dst),
        ])
        assert code == 0
        assert dst.read_bytes() == FIPS_CIPHERTEXT
        assert _summary(capsys)["bytes_out"] == "16"

    def test_single_rank_strategies_identical(self, tmp_path, capsys):
        src = tmp_path / "plain.bin"
        src.write_bytes(bytes(64 * 16))
        summaries = []
        for strategy in ("sync", "pim1", "pim2"):
            dst = tmp_path / f"out-{strategy}.bin"
            assert main([
                "encrypt", "--key", FIPS_KEY_HEX, "--in", str(src),
                "--out", str(dst), "--ranks", "1", "--strategy", strategy,
            ]) == 0
            pairs = _summary(capsys)
            summaries.append((pairs["makespan_s"], pairs["kernel_s"], dst.read_bytes()))
        assert summaries[0] == summaries[1] == summaries[2]

    def test_empty_input(self, tmp_path):
        src = tmp_path / "empty.bin"
        dst = tmp_path / "out.bin"
        src.write_bytes(b"")
        assert main(["encrypt", "--key", FIPS_KEY_HEX, "--in", str(src), "--out", str(dst)]) == 0
        assert dst.read_bytes() == b""

    def test_bad_key_hex_is_usage_error(self, tmp_path):
        src = tmp_path / "p.bin"
        src.write_bytes(bytes(16))
        assert main(["encrypt", "--key", "zz", "--in", str(src), "--out", str(tmp_path / "c")]) == 2

    def test_short_key_is_usage_error(self, tmp_path):
        src = tmp_path / "p.bin"
        src.write_bytes(bytes(16))
        assert main(["encrypt", "--key", "abcd", "--in", str(src), "--out", str(tmp_path / "c")]) == 2

    def test_misaligned_without_pad_is_data_error(self, tmp_path):
        src = tmp_path / "p.bin"
        src.write_bytes(bytes(15))
        assert main(["encrypt", "--key", FIPS_KEY_HEX, "--in", str(src), "--out", str(tmp_path / "c")]) == 3

    def test_pad_flag_zero_fills(self, tmp_path, capsys):
        src = tmp_path / "p.bin"
        dst = tmp_path / "c.bin"
        src.write_bytes(bytes(15))
        assert main([
            "encrypt", "--key", FIPS_KEY_HEX, "--in", str(src), "--out", str(dst), "--pad",
        ]) == 0
        assert len(dst.read_bytes()) == 16
        assert _summary(capsys)["padded_from"] == "15"

    def test_missing_input_is_io_error(self, tmp_path):
        assert main([
            "encrypt", "--key", FIPS_KEY_HEX,
            "--in", str(tmp_path / "absent.bin"), "--out", str(tmp_path / "c"),
        ]) == 4


class TestHash:
    def test_single_file_vector(self, tmp_path, capsys):
        src = tmp_path / "msg.txt"
        dst = tmp_path / "digests.txt"
        src.write_bytes(b"abc")
        assert main(["hash", "--in", str(src), "--out", str(dst)]) == 0
        assert dst.read_text().strip() == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )
        assert _summary(capsys)["messages"] == "1"

    def test_n_inputs_n_lines_order_preserved(self, tmp_path):
        paths = []
        for i in range(7):
            p = tmp_path / f"m{i}.bin"
            p.write_bytes(bytes([i]) * (i * 10))
            paths.append(str(p))
        dst = tmp_path / "digests.txt"
        assert main(["hash", "--in", *paths, "--out", str(dst), "--dpus-per-rank", "3"]) == 0
        lines = dst.read_text().splitlines()
        assert len(lines) == 7
        for i, line in enumerate(lines):
            assert line == sha256_digest(bytes([i]) * (i * 10)).hex()

    def test_directory_input_sorted(self, tmp_path):
        d = tmp_path / "msgs"
        d.mkdir()
        (d / "b.bin").write_bytes(b"second")
        (d / "a.bin").write_bytes(b"first")
        dst = tmp_path / "digests.txt"
        assert main(["hash", "--in", str(d), "--out", str(dst)]) == 0
        lines = dst.read_text().splitlines()
        assert lines[0] == sha256_digest(b"first").hex()
        assert lines[1] == sha256_digest(b"second").hex()

    def test_unreadable_input_is_io_error(self, tmp_path):
        assert main([
            "hash", "--in", str(tmp_path / "nope.bin"), "--out", str(tmp_path / "d"),
        ]) == 4


class TestBench:
    def test_tasklet_scaling_csv(self, tmp_path, capsys):
        assert main([
            "bench", "--experiment", "tasklet_scaling", "--out-dir", str(tmp_path),
        ]) == 0
        lines = (tmp_path / "tasklet_scaling.csv").read_text().splitlines()
        data_rows = [l for l in lines if l and not l.startswith("#")][1:]
        assert len(data_rows) == 24

    def test_unknown_experiment_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--experiment", "banana_scaling", "--out-dir", "."])
        assert exc.value.code == 2
        assert "tasklet_scaling" in capsys.readouterr().err

    def test_custom_config(self, tmp_path):
        config = {
            "machine": default_profile().to_json(),
            "experiments": {
                "weak_scaling": {"algorithm": "sha256", "sweep": [1, 4], "message_count": 4},
            },
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        assert main([
            "bench", "--experiment", "weak_scaling", "--config", str(cfg),
            "--out-dir", str(tmp_path),
        ]) == 0
        lines = (tmp_path / "weak_scaling.csv").read_text().splitlines()
        assert len([l for l in lines if l and not l.startswith("#")]) == 3

    def test_invalid_spec_is_usage_error(self, tmp_path):
        config = {
            "machine": default_profile().to_json(),
            "experiments": {"weak_scaling": {"sweep": [4, 1]}},
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        assert main([
            "bench", "--experiment", "weak_scaling", "--config", str(cfg),
            "--out-dir", str(tmp_path),
        ]) == 2

    def test_idempotent_given_identical_inputs(self, tmp_path):
        config = {
            "machine": default_profile().to_json(),
            "experiments": {"weak_scaling": {"sweep": [1, 4, 16]}},
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        outputs = []
        for d in ("run1", "run2"):
            out_dir = tmp_path / d
            assert main([
                "bench", "--experiment", "weak_scaling", "--config", str(cfg),
                "--out-dir", str(out_dir),
            ]) == 0
            outputs.append((out_dir / "weak_scaling.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_no_baseline_flag(self, tmp_path):
        config = {
            "machine": default_profile().to_json(),
            "experiments": {
                "rank_scaling": {"sweep": [1, 2], "strategies": ["pim1", "pim2"]},
            },
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        assert main([
            "bench", "--experiment", "rank_scaling", "--config", str(cfg),
            "--out-dir", str(tmp_path), "--no-baseline",
        ]) == 0
        body = (tmp_path / "rank_scaling.csv").read_text().splitlines()
        data = [l for l in body if l and not l.startswith("#")][1:]
        assert len(data) == 4
        assert all(line.endswith(",") for line in data)  # empty baseline cells


class TestValidate:
    def test_default_profile_ok(self, tmp_path, capsys):
        path = tmp_path / "profile.json"
        path.write_text(json.dumps(default_profile().to_json()))
        assert main(["validate", "--profile", str(path)]) == 0
        assert "profile=ok" in capsys.readouterr().out

    def test_usable_dpus_violation(self, tmp_path, capsys):
        doc = default_profile().to_json()
        doc["usable_dpus"] = 100000
        path = tmp_path / "profile.json"
        path.write_text(json.dumps(doc))
        assert main(["validate", "--profile", str(path)]) == 3
        assert "usable_dpus" in capsys.readouterr().out

    def test_missing_field(self, tmp_path, capsys):
        doc = default_profile().to_json()
        del doc["dpu_frequency"]
        path = tmp_path / "profile.json"
        path.write_text(json.dumps(doc))
        assert main(["validate", "--profile", str(path)]) == 3
        assert "dpu_frequency" in capsys.readouterr().out

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["validate", "--profile", str(tmp_path / "none.json")]) == 4

    def test_malformed_json_is_data_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", "--profile", str(path)]) == 3
