"""Command-line surface: subcommands, output formats, cache round trips,
exit codes, and byte-level determinism."""
import json
import subprocess
import sys

import pytest
from mpmath import mp, mpf

from heulag import CacheMismatchError, ModelId, PrecisionContext, closed_form
from heulag.cli import CoefficientCacheFile, main

# positive real pole of the spin-0 [0/2] approximant (root of its quadratic
# denominator, frozen to 150 digits); used to exercise the per-cell error path
PADE_02_POLE = ("1.46727250340261317937875898739837966891219471425807372983879"
                "704204527912704331612136335315980170228449987201033074702867"
                "129725069204470656962491413371")


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# exact / series.
# ---------------------------------------------------------------------------

def test_exact_markdown(capsys):
    code, out, _ = run(["exact", "--model", "spin0", "--beta", "0.01",
                        "--digits", "60"], capsys)
    assert code == 0
    assert "| beta | exact |" in out
    assert "0.00000193238479692775524980520558841710582" in out


def test_exact_oracle_column(capsys):
    code, out, _ = run(["exact", "--model", "sd", "--beta", "0.1",
                        "--digits", "60", "--oracle"], capsys)
    assert code == 0
    assert "oracle" in out
    # both columns show the same value through the quadrature's accuracy
    assert out.count("0.00040736197107") == 2


def test_exact_rejects_negative_beta(capsys):
    code, _, err = run(["exact", "--model", "spin0", "--beta", "-1"], capsys)
    assert code == 2
    assert "out of scope" in err


def test_exact_empty_beta_list(capsys):
    code, out, _ = run(["exact", "--model", "spin0", "--beta", ""], capsys)
    assert code == 0
    assert "| beta | exact |" in out  # header only, no rows


def test_exact_csv_and_json(capsys):
    code, out, _ = run(["exact", "--beta", "0.01,0.1", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "beta,exact"
    assert len(out.splitlines()) == 3

    code, out, _ = run(["exact", "--beta", "0.01", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "exact"
    # numeric payloads are decimal strings, never JSON numbers
    assert isinstance(doc["rows"][0]["exact"], str)
    assert isinstance(doc["rows"][0]["beta"], str)


def test_series_requires_truncation(capsys):
    code, _, err = run(["series", "--model", "sd", "--beta", "0.01"], capsys)
    assert code == 2
    assert "truncation" in err


def test_series_row(capsys):
    code, out, _ = run(["series", "--model", "sd", "--beta", "0.01",
                        "--truncation", "20", "--format", "csv"], capsys)
    assert code == 0
    assert "0.00004156814549649017911120" in out


def test_invalid_beta_string(capsys):
    code, _, err = run(["exact", "--beta", "abc"], capsys)
    assert code == 2
    assert "invalid beta" in err


# ---------------------------------------------------------------------------
# reconstruct and the cache file.
# ---------------------------------------------------------------------------

def test_reconstruct_requires_cache(capsys):
    code, _, err = run(["reconstruct", "--model", "spin0", "--moments", "10"],
                       capsys)
    assert code == 2
    assert "--cache" in err


def test_reconstruct_writes_cache(tmp_path, capsys):
    cache = tmp_path / "spin0.cache"
    code, out, _ = run(["reconstruct", "--model", "spin0", "--moments", "50",
                        "--digits", "60", "--cache", str(cache)], capsys)
    assert code == 0
    assert "residual_norm:" in out
    reported = mpf(out.splitlines()[0].split(":")[1].strip())
    assert reported < mpf("1e-45")
    text = cache.read_text()
    header = [l for l in text.splitlines() if l.startswith("#")]
    assert any("model: spin0" in l for l in header)
    assert any("d: 49" in l for l in header)
    assert any("digits: 60" in l for l in header)
    assert any("generator: " in l for l in header)
    assert any("residual_norm: " in l for l in header)
    body = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert len(body) == 50
    # full-precision decimal strings
    assert all(len(l.replace(".", "").replace("-", "").lstrip("0")) >= 60 for l in body)
    # no stray temp files
    assert list(tmp_path.iterdir()) == [cache]


def test_reconstruct_deterministic_bytes(tmp_path, capsys):
    c1, c2 = tmp_path / "a.cache", tmp_path / "b.cache"
    run(["reconstruct", "--moments", "30", "--digits", "40", "--cache", str(c1)], capsys)
    run(["reconstruct", "--moments", "30", "--digits", "40", "--cache", str(c2)], capsys)
    assert c1.read_bytes() == c2.read_bytes()


def test_cache_file_image_round_trip(tmp_path, capsys):
    cache = tmp_path / "c.cache"
    run(["reconstruct", "--model", "sd", "--moments", "6", "--digits", "30",
         "--cache", str(cache)], capsys)
    text = cache.read_text()
    img = CoefficientCacheFile.parse(text)
    assert img.render() == text
    assert img.model is ModelId.SELF_DUAL
    assert (img.d, img.digits) == (5, 30)
    assert len(img.coefficients) == 6
    rec, stored = img.to_reconstruction()
    assert rec.d == 5 and len(rec.c) == 6
    # parse -> render -> parse is a fixed point
    assert CoefficientCacheFile.parse(img.render()) == img


def test_cache_file_image_rejects_missing_header(tmp_path, capsys):
    cache = tmp_path / "c.cache"
    run(["reconstruct", "--moments", "4", "--digits", "30", "--cache", str(cache)], capsys)
    lines = cache.read_text().splitlines()
    dropped = "\n".join(l for l in lines if not l.startswith("# digits")) + "\n"
    with pytest.raises(CacheMismatchError):
        CoefficientCacheFile.parse(dropped)


def test_reconstruct_refuses_digits_below_moments(tmp_path, capsys):
    cache = tmp_path / "x.cache"
    code, _, err = run(["reconstruct", "--moments", "80", "--digits", "60",
                        "--cache", str(cache)], capsys)
    assert code == 2
    assert "--force" in err
    assert not cache.exists()  # refusal leaves nothing behind


def test_reconstruct_force_overrides(tmp_path, capsys):
    cache = tmp_path / "x.cache"
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code, _, _ = run(["reconstruct", "--moments", "40", "--digits", "30",
                          "--cache", str(cache), "--force"], capsys)
    assert code == 0
    assert cache.exists()


def test_reconstruct_unwritable_path(capsys):
    code, _, err = run(["reconstruct", "--moments", "10", "--digits", "30",
                        "--cache", "/nonexistent-dir/x.cache"], capsys)
    assert code == 2


# ---------------------------------------------------------------------------
# extrapolate, including cache verification.
# ---------------------------------------------------------------------------

def test_extrapolate_computes_and_persists(tmp_path, capsys):
    cache = tmp_path / "sd.cache"
    code, out, _ = run(["extrapolate", "--model", "sd", "--moments", "50",
                        "--digits", "60", "--cache", str(cache),
                        "--beta", "1e7", "--format", "csv"], capsys)
    assert code == 0
    assert cache.exists()
    header = out.splitlines()[0]
    assert header == "beta,value,tail,delta,K,im_residual"
    # reload from the cache: identical output
    code2, out2, _ = run(["extrapolate", "--model", "sd", "--moments", "50",
                          "--digits", "60", "--cache", str(cache),
                          "--beta", "1e7", "--format", "csv"], capsys)
    assert code2 == 0
    assert out2 == out


def test_extrapolate_cache_model_mismatch_names_field(tmp_path, capsys):
    cache = tmp_path / "spin0.cache"
    run(["reconstruct", "--model", "spin0", "--moments", "20", "--digits", "40",
         "--cache", str(cache)], capsys)
    code, _, err = run(["extrapolate", "--model", "spin12", "--moments", "20",
                        "--digits", "40", "--cache", str(cache), "--beta", "1"],
                       capsys)
    assert code == 4
    assert "model" in err


def test_extrapolate_cache_generator_mismatch(tmp_path, capsys):
    cache = tmp_path / "spin0.cache"
    run(["reconstruct", "--model", "spin0", "--moments", "20", "--digits", "40",
         "--cache", str(cache)], capsys)
    text = cache.read_text().replace("# generator: ", "# generator: stale-")
    cache.write_text(text)
    code, _, err = run(["extrapolate", "--model", "spin0", "--moments", "20",
                        "--digits", "40", "--cache", str(cache), "--beta", "1"],
                       capsys)
    assert code == 4
    assert "generator" in err


def test_extrapolate_cache_residual_tamper(tmp_path, capsys):
    cache = tmp_path / "spin0.cache"
    run(["reconstruct", "--model", "spin0", "--moments", "20", "--digits", "40",
         "--cache", str(cache)], capsys)
    lines = cache.read_text().splitlines()
    lines = ["# residual_norm: 0.00001" if l.startswith("# residual_norm")
             else l for l in lines]
    cache.write_text("\n".join(lines) + "\n")
    code, _, err = run(["extrapolate", "--model", "spin0", "--moments", "20",
                        "--digits", "40", "--cache", str(cache), "--beta", "1"],
                       capsys)
    assert code == 4
    assert "residual_norm" in err


def test_extrapolate_in_memory_without_cache(capsys):
    code, out, _ = run(["extrapolate", "--model", "spin0", "--moments", "20",
                        "--digits", "40", "--beta", "0.1", "--format", "json"],
                       capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert set(row) == {"beta", "value", "tail", "delta", "K", "im_residual"}
    # value equals tail + delta as decimal strings recombined
    with mp.workdps(60):
        assert abs(mpf(row["value"]) - (mpf(row["tail"]) + mpf(row["delta"]))) \
            < mpf("1e-38") * max(1, abs(mpf(row["value"])))


# ---------------------------------------------------------------------------
# compare.
# ---------------------------------------------------------------------------

def test_compare_grid_with_agreement(capsys):
    code, out, _ = run(["compare", "--model", "spin0", "--beta", "0.01,0.1",
                        "--digits", "60", "--pade", "49,50", "--delta", "25",
                        "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    row = doc["rows"][0]
    assert "pade_49_50" in row and "delta_25" in row and "exact" in row
    # weak field: both methods nail many digits
    assert int(row["pade_49_50_agree"]) >= 18
    assert int(row["delta_25_agree"]) >= 18


def test_compare_markdown_brackets_agreeing_prefix(capsys):
    code, out, _ = run(["compare", "--model", "spin0", "--beta", "0.1",
                        "--digits", "60", "--delta", "25"], capsys)
    assert code == 0
    assert "[" in out and "]" in out


def test_compare_cell_error_annotated_run_continues(capsys):
    code, out, _ = run(["compare", "--model", "spin0",
                        "--beta", f"0.01,{PADE_02_POLE},1",
                        "--digits", "60", "--pade", "0,2", "--format", "csv"],
                       capsys)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4  # header + all three rows survive
    assert "ERR(PoleError)" in lines[2]
    assert "ERR" not in lines[1] and "ERR" not in lines[3]


def test_compare_empty_beta(capsys):
    code, out, _ = run(["compare", "--model", "spin0", "--beta", "",
                        "--delta", "5", "--format", "csv"], capsys)
    assert code == 0
    assert len(out.splitlines()) == 1


# ---------------------------------------------------------------------------
# table.
# ---------------------------------------------------------------------------

def test_table_1_partial_sum_grid(capsys):
    code, out, _ = run(["table", "1", "--digits", "60"], capsys)
    assert code == 0
    assert "beta=0.01" in out and "beta=0.2" in out
    assert "| exact |" in out or "exact" in out
    # the divergent tail of the asymptotic series is visible
    assert "33995.123482" in out


def test_table_rejects_unknown_number(capsys):
    code, _, err = run(["table", "9"], capsys)
    assert code == 2


# ---------------------------------------------------------------------------
# determinism across processes.
# ---------------------------------------------------------------------------

def test_cross_process_byte_determinism(tmp_path):
    argv = [sys.executable, "-m", "heulag.cli", "compare", "--model", "sd",
            "--beta", "0.01,1", "--digits", "40", "--delta", "10",
            "--format", "markdown"]
    r1 = subprocess.run(argv, capture_output=True, text=True)
    r2 = subprocess.run(argv, capture_output=True, text=True)
    assert r1.returncode == 0 and r2.returncode == 0
    assert r1.stdout == r2.stdout
