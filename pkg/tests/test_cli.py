"""
Tests for the moa-gemm command line.
"""

# mypy: ignore-errors

import csv
import json

import pytest

from moa_gemm import AccumStmt, LoopNest, build_gemm_nest, kernels
from moa_gemm.cli import build_parser, main, parse_block


class TestParsing:
    """Tests for argument parsing helpers."""

    def test_parse_block(self):
        """
        Scenario: Parse block shapes

        Expected:
        - "32x16" and "8X8" split on x; a bare "4" is square
        """
        assert parse_block("32x16") == (32, 16)
        assert parse_block("8X8") == (8, 8)
        assert parse_block("4") == (4, 4)

    def test_bad_block_exits(self):
        """
        Scenario: Pass a malformed block to bench

        Expected:
        - argparse exits with status 2
        """
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["bench", "--blocks", "axb"])
        assert info.value.code == 2


class TestRender:
    """Tests for the render command."""

    @pytest.mark.parametrize(
        "variant,golden_name",
        [("ip", "ip.c"), ("ip_rows", "ip_rows.c"), ("ip_cols", "ip_cols.c"), ("blocked", "blocked.c")],
    )
    def test_matches_golden(self, capsys, golden, variant, golden_name):
        """
        Scenario: Render each variant with default sizes

        Expected:
        - stdout is byte-identical to the pinned file
        """
        assert main(["render", variant]) == 0
        assert capsys.readouterr().out == golden(golden_name)

    def test_pragmas(self, capsys):
        """
        Scenario: Render the row-lifted nest with pragmas

        Expected:
        - The parallel pragma sits right above the k loop
        """
        assert main(["render", "ip_rows", "--pragmas"]) == 0
        lines = capsys.readouterr().out.splitlines()
        at = lines.index("  #pragma acc parallel loop")
        assert lines[at + 1] == "  for (k = 0; k < np; k++) {"

    def test_out_file(self, tmp_path, golden):
        """
        Scenario: Render into a file

        Expected:
        - File content equals the golden
        """
        path = tmp_path / "ip.c"
        assert main(["render", "ip", "--out", str(path)]) == 0
        assert path.read_text(encoding="utf-8") == golden("ip.c")

    def test_non_dividing_sizes(self, capsys):
        """
        Scenario: Row-lift 10 rows into 4 partitions

        Expected:
        - Exit status 2 with an error line on stderr
        """
        assert main(["render", "ip_rows", "--m", "10", "--np", "4"]) == 2
        assert capsys.readouterr().err.startswith("moa-gemm: error: np=4 does not divide 10")

    def test_unwritable_out(self, tmp_path, capsys):
        """
        Scenario: Render into a directory that does not exist

        Expected:
        - Exit status 2 with the path on stderr, no traceback
        """
        path = tmp_path / "missing" / "ip.c"
        assert main(["render", "ip", "--out", str(path)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("moa-gemm: error: ")
        assert str(path) in err


class TestPlan:
    """Tests for the plan command."""

    def test_default(self, capsys):
        """
        Scenario: Plan for the default preset

        Expected:
        - 32x32 block and the 9459 threshold
        """
        assert main(["plan"]) == 0
        out = capsys.readouterr().out
        assert "block: 32x32\n" in out
        assert "= 9459\n" in out

    def test_bigger_budget(self, capsys):
        """
        Scenario: Raise the working budget to 128 KiB

        Expected:
        - 64x64 block
        """
        assert main(["plan", "--l1-budget", "131072"]) == 0
        assert "block: 64x64\n" in capsys.readouterr().out

    def test_custom_file(self, tmp_path, capsys):
        """
        Scenario: Plan from a JSON file with an unknown key

        Expected:
        - Exit status 2 and the key named on stderr
        """
        path = tmp_path / "hw.json"
        path.write_text(json.dumps({"name": "x", "l1_bytes": 1}), encoding="utf-8")
        assert main(["plan", "--hw", str(path)]) == 2
        assert "l1_bytes" in capsys.readouterr().err

    def test_f32_and_preset(self, capsys):
        """
        Scenario: Plan f32 on the 32 GiB preset

        Expected:
        - Element size 4 and a threshold of isqrt(4 GiB // 12)
        """
        assert main(["plan", "--hw", "v100-32g", "--elem", "f32"]) == 0
        out = capsys.readouterr().out
        assert "element: 4 bytes\n" in out
        assert "(3 * 4)) = 18918\n" in out


class TestVerify:
    """Tests for the verify command."""

    def test_passes(self, capsys):
        """
        Scenario: Verify every size up to 2

        Expected:
        - Exit status 0 and a zero failure count
        """
        assert main(["verify", "--max-dim", "2"]) == 0
        assert capsys.readouterr().out.endswith(" passed, 0 failed\n")

    def test_fails_on_broken_builder(self, capsys, monkeypatch):
        """
        Scenario: Break the blocked builder by swapping its A and B offsets

        Expected:
        - Exit status 1 and the failing configurations listed
        """

        def broken(m, n, p, bi, bk, bj):
            nest = build_gemm_nest(m, n, p)
            body = AccumStmt(nest.body.out, nest.body.right, nest.body.left)
            return LoopNest(nest.loops, body, nest.params)

        monkeypatch.setattr("moa_gemm.verify.build_blocked", broken)
        assert main(["verify", "--max-dim", "2"]) == 1
        assert "blocked m=" in capsys.readouterr().out

    def test_max_dim_below_one(self, capsys):
        """
        Scenario: Verify with --max-dim 0

        Expected:
        - Exit status 2 and a one-line error
        """
        assert main(["verify", "--max-dim", "0"]) == 2
        assert capsys.readouterr().err == "moa-gemm: error: max_dim must be >= 1, got 0\n"


class TestBench:
    """Tests for the bench command."""

    def test_writes_csv(self, tmp_path, capsys):
        """
        Scenario: Bench N=4 with one block into a CSV file

        Expected:
        - One line per record on stdout, then the CSV path
        - CSV has the header plus three rows
        """
        path = tmp_path / "bench.csv"
        code = main(["bench", "--sizes", "4", "--blocks", "2x2", "--out", str(path)])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[-1] == str(path)
        assert out[0].startswith("naive N=4 block=- median=")
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 4
        assert rows[3][:6] == ["moa-blocked", "4", "4", "4", "2", "2"]

    def test_non_dividing_block(self, tmp_path, capsys):
        """
        Scenario: Bench N=4 with a 3x3 block

        Expected:
        - Exit status 2 and no CSV written
        """
        path = tmp_path / "bench.csv"
        assert main(["bench", "--sizes", "4", "--blocks", "3x3", "--out", str(path)]) == 2
        assert not path.exists()
        assert "does not divide" in capsys.readouterr().err

    def test_too_few_trials(self, tmp_path, capsys):
        """
        Scenario: Bench with --trials 2

        Expected:
        - Exit status 2 and no CSV written
        """
        path = tmp_path / "bench.csv"
        args = ["bench", "--sizes", "4", "--blocks", "2x2", "--trials", "2", "--out", str(path)]
        assert main(args) == 2
        assert not path.exists()
        assert "trials must be >= 3" in capsys.readouterr().err

    def test_unwritable_out_fails_before_timing(self, tmp_path, capsys, monkeypatch):
        """
        Scenario: Bench into a directory that does not exist

        Expected:
        - Exit status 2 with the path on stderr
        - No kernel is verified or timed
        """

        def never(*args, **kwargs):
            raise AssertionError("bench ran before the output was opened")

        monkeypatch.setattr("moa_gemm.cli.run_bench", never)
        path = tmp_path / "missing" / "bench.csv"
        assert main(["bench", "--sizes", "4", "--blocks", "2x2", "--out", str(path)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("moa-gemm: error: ")
        assert str(path) in err

    def test_failed_verification_removes_csv(self, tmp_path, capsys, monkeypatch):
        """
        Scenario: Bench with a blocked kernel that drops a block

        Expected:
        - Exit status 2 naming the kernel
        - The opened CSV file is removed again
        """

        def broken(a, b, out, block):
            kernels.gemm_contiguous(a, b, out)
            out[0, 0] += 1

        monkeypatch.setattr(kernels, "gemm_blocked", broken)
        path = tmp_path / "bench.csv"
        assert main(["bench", "--sizes", "4", "--blocks", "2x2", "--out", str(path)]) == 2
        assert "moa-blocked" in capsys.readouterr().err
        assert not path.exists()
