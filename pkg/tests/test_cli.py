import json
import subprocess
import sys
from pathlib import Path

import pytest

from quartic.cli import FormCache, form_hash, main
from quartic.errors import CacheCorrupt
from quartic.forms import parse_form


def run_cli(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, out


class TestDispatch:
    def test_count_both(self, capsys):
        rc, out = run_cli(
            ["count", "--form-text", "x1^4 - x2^4", "--P", "5", "--method", "both"],
            capsys,
        )
        rep = json.loads(out)
        assert rc == 0 and rep["agree"] and rep["count_brute"] == 21

    def test_series_exact_string(self, capsys, tmp_path):
        f = tmp_path / "form.json"
        f.write_text(parse_form("x1^4 + x2^4").to_json())
        rc, out = run_cli(["series", "--form", str(f), "--R", "2"], capsys)
        rep = json.loads(out)
        assert rc == 0 and rep["S_R"] == "1/1"

    def test_unknown_command_exit(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])

    def test_error_is_nonzero_exit(self, capsys):
        rc = main(["count", "--P", "5"])  # no form given
        assert rc == 1

    def test_verify_deterministic(self, capsys):
        rc1, out1 = run_cli(["verify", "davenport", "--trials", "8", "--seed", "7"], capsys)
        rc2, out2 = run_cli(["verify", "davenport", "--trials", "8", "--seed", "7"], capsys)
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_bound_failure_is_data_not_error(self, capsys, tmp_path):
        # a calibration file with tiny stored ratios: verdict false, exit 0
        calib = tmp_path / "calib.json"
        calib.write_text(json.dumps({"davenport": {"max_ratio": 1e-9}}))
        rc, out = run_cli(
            ["verify", "davenport", "--trials", "4", "--seed", "7", "--calibration", str(calib)],
            capsys,
        )
        rep = json.loads(out)
        assert rc == 0 and rep["calibration_ok"] is False

    def test_arcs_subcommand(self, capsys):
        rc, out = run_cli(["arcs", "--delta", "1.0", "--P", "16"], capsys)
        rep = json.loads(out)
        assert rep["arc_count"] == 80 and rep["disjoint"]

    def test_hasse_small(self, capsys):
        rc, out = run_cli(
            ["hasse", "--form-text", "x1^4 + x2^4 - 2*x3^4", "--p-max", "7"], capsys
        )
        rep = json.loads(out)
        assert rc == 0 and rep["real_soluble"] is True

    def test_poisson_subcommand(self, capsys):
        rc, out = run_cli(
            ["poisson", "--form-text", "x1^3", "--weight", "bump", "--center", "0",
             "--rho", "1.0", "--P", "30", "--a", "1", "--q", "3", "--z", "0"],
            capsys,
        )
        rep = json.loads(out)
        assert rc == 0 and rep["relative"] < 1e-3

    def test_expsum_matches_library(self, capsys):
        from quartic.expsums import complete_sum

        rc, out = run_cli(["expsum", "--form-text", "x1^4", "--a", "1", "--q", "5"], capsys)
        rep = json.loads(out)
        want = complete_sum(parse_form("x1^4"), 1, 5).value
        assert abs(complex(rep["re"], rep["im"]) - want) < 1e-12


class TestCache:
    def test_roundtrip(self, tmp_path):
        cache = FormCache(str(tmp_path))
        payload = {"form_hash": "abc", "kind": "Saq", "a": 1, "q": 5, "re": 2.0, "im": 3.5, "err": 1e-9}
        cache.store(payload)
        fresh = FormCache(str(tmp_path))
        assert fresh.load("abc", "Saq", 1, 5) == payload

    def test_tamper_detected(self, tmp_path):
        cache = FormCache(str(tmp_path))
        cache.store({"form_hash": "abc", "kind": "Aq", "a": None, "q": 3, "int": 7, "err": 0})
        path = tmp_path / "expsums.jsonl"
        text = path.read_text().replace('"int": 7', '"int": 8')
        path.write_text(text)
        with pytest.raises(CacheCorrupt):
            FormCache(str(tmp_path))

    def test_cache_hit_skips_recompute(self, capsys, tmp_path):
        argv = ["--cache-dir", str(tmp_path), "--timing", "expsum",
                "--form-text", "x1^4 + x2^4", "--q", "6", "--units"]
        rc, out1 = run_cli(argv, capsys)
        rep1 = json.loads(out1)
        rc, out2 = run_cli(argv, capsys)
        rep2 = json.loads(out2)
        assert rep1["cache_hit"] is False and rep2["cache_hit"] is True
        assert rep1["int"] == rep2["int"]

    def test_hash_invalidates_on_edit(self):
        assert form_hash(parse_form("x1^4")) != form_hash(parse_form("2*x1^4"))


class TestRunConfig:
    def test_invalid_budget(self):
        from quartic.cli import RunConfig
        from quartic.errors import ConfigInvalid

        with pytest.raises(ConfigInvalid):
            RunConfig(budget=0).validate()

    def test_table_output(self, capsys):
        rc, out = run_cli(
            ["count", "--form-text", "x1^4 - x2^4", "--P", "5", "--method", "brute",
             "--output", "table"],
            capsys,
        )
        assert rc == 0 and "count_brute" in out and "{" not in out

    def test_extended_verify_lemmas(self, capsys):
        for lemma in ("vdc", "filter", "kernel-average"):
            rc, out = run_cli(["verify", lemma, "--trials", "2", "--seed", "7"], capsys)
            rep = json.loads(out)
            assert rc == 0 and rep["lemma"] == lemma
            if "identities_ok" in rep:
                assert rep["identities_ok"]


class TestEntryPoint:
    def test_module_invocation(self):
        out = subprocess.run(
            [sys.executable, "-m", "quartic.cli", "arcs", "--delta", "1.0", "--P", "8"],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0
        assert json.loads(out.stdout)["disjoint"] is True
