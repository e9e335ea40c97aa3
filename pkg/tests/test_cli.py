import csv
import io
import json
import logging

import pytest

from cuspdecay.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(out):
    lines = [ln for ln in out.splitlines() if not ln.startswith("#") and not ln.startswith("dim=")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_basis_weight_12(cache_env, capsys):
    code, out, _ = run(capsys, "basis", "--weight", "12")
    assert code == 0 and out.startswith("dim=1 ")
    assert "# generated " in out


def test_basis_cache_is_idempotent(cache_env, capsys):
    _, first, _ = run(capsys, "basis", "--weight", "48", "--trunc", "20")
    _, second, _ = run(capsys, "basis", "--weight", "48", "--trunc", "20")
    assert "source=computed" in first and "source=cache" in second
    ck = [line.split("checksum=")[1] for line in (first.splitlines()[0], second.splitlines()[0])]
    assert ck[0] == ck[1]


def test_corrupt_cache_recomputes(cache_env, capsys, caplog):
    run(capsys, "basis", "--weight", "36", "--trunc", "12")
    (entry,) = [p for p in cache_env.glob("*.json")]
    data = json.loads(entry.read_text())
    data["payload"]["rows"][0][1] = "7"
    entry.write_text(json.dumps(data))
    with caplog.at_level(logging.WARNING, logger="cuspdecay"):
        _, out, _ = run(capsys, "basis", "--weight", "36", "--trunc", "12")
    assert "source=computed" in out
    assert any("checksum" in r.getMessage() for r in caplog.records)


def test_odd_weight_is_usage_error(cache_env, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["basis", "--weight", "13"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--weights", "24,25"])
    assert exc.value.code == 2


def test_eigen_weight_24(cache_env, capsys):
    code, out, _ = run(capsys, "eigen", "--weight", "24")
    rows = table(out)
    assert code == 0 and len(rows) == 2
    a2 = [float(r["a2"]) for r in rows]
    assert a2[0] > a2[1]
    assert abs(a2[0] - (540 + 12 * 144169 ** 0.5)) < 1e-6


def test_eigen_weight_12_and_empty(cache_env, capsys):
    _, out, _ = run(capsys, "eigen", "--weight", "12")
    assert float(table(out)[0]["a2"]) == -24
    code, out, _ = run(capsys, "eigen", "--weight", "14")
    assert code == 0 and table(out) == []


def test_eigen_cache_round_trip(cache_env, capsys):
    _, a, _ = run(capsys, "eigen", "--weight", "36")
    _, b, _ = run(capsys, "eigen", "--weight", "36")
    assert table(a) == table(b)


def write_spec(tmp_path, d):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(d) if not isinstance(d, str) else d)
    return str(p)


def test_decompose_delta_squared(cache_env, capsys, tmp_path):
    spec = write_spec(tmp_path, {"a": [[1]], "weights": [12], "combos": [[[0, 1]]], "target_weight": 24})
    code, out, _ = run(capsys, "decompose", "--spec", spec)
    rows = table(out)
    assert code == 0
    c = [complex(float(r["real"]), float(r["imag"])) for r in rows if r["quantity"] == "c"]
    assert len(c) == 2 and abs(sum(c)) < 1e-10
    (a2,) = [r for r in rows if r["quantity"] == "second_coeff"]
    assert float(a2["real"]) == 1.0


def test_decompose_zero_form(cache_env, capsys, tmp_path):
    spec = write_spec(tmp_path, {"a": [[1, 0], [0, -1]], "weights": [12, 12],
                                 "combos": [[[0, 1]], [[0, 1]]], "target_weight": 24})
    code, out, _ = run(capsys, "decompose", "--spec", spec)
    assert code == 0
    assert all(float(r["real"]) == 0 for r in table(out) if r["quantity"] == "c")


def test_decompose_malformed(cache_env, capsys, tmp_path):
    spec = write_spec(tmp_path, '{"a": [[1]],\n "weights": [12,\n]}')
    code, _, err = run(capsys, "decompose", "--spec", spec)
    assert code == 2 and "line 3" in err
    spec = write_spec(tmp_path, {"a": [[1]], "weights": [12], "combos": [[[0, 1]]], "target_weight": 26})
    code, _, err = run(capsys, "decompose", "--spec", spec)
    assert code == 2 and "error:" in err


def test_scan_columns(cache_env, capsys):
    code, out, _ = run(capsys, "scan", "--weights", "24:36:12", "--p", "1,2", "--jobs", "1")
    rows = table(out)
    assert code == 0
    assert list(rows[0]) == ["k", "p", "mode", "value", "ref_log8", "ref_log4"]
    assert {(r["k"], r["p"]) for r in rows} == {("24", "1.0"), ("24", "2.0"), ("36", "1.0"), ("36", "2.0")}


def test_petersson_check(cache_env, capsys):
    code, out, _ = run(capsys, "petersson-check", "--weight", "200", "--max-mn", "2",
                       "--prime-cutoff", "2000", "--jobs", "1")
    rows = table(out)
    assert code == 0 and list(rows[0])[:4] == ["k", "m", "n", "value"]
    one = [r for r in rows if r["m"] == "1" and r["n"] == "1"][0]
    assert abs(float(one["value"]) - 1) < 0.05


def test_dist(cache_env, capsys):
    code, out, _ = run(capsys, "dist", "--weight", "120")
    rows = table(out)
    assert code == 0
    counts = [int(r["value"]) for r in rows if r["quantity"] == "A"]
    assert counts == sorted(counts, reverse=True)
    dim = [r for r in rows if r["quantity"] == "dim"][0]
    assert dim["value"] == "10"


def test_moments_command(cache_env, capsys):
    code, out, _ = run(capsys, "moments", "--weights", "24,36", "--P", "500")
    rows = table(out)
    assert code == 0 and [r["k"] for r in rows] == ["24", "36"]


def test_config_file_wins_with_warning(cache_env, capsys, caplog, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"precision_bits": 200}))
    with caplog.at_level(logging.WARNING, logger="cuspdecay"):
        _, out, _ = run(capsys, "eigen", "--weight", "24", "--precision-bits", "128", "--config", str(cfg))
    assert table(out)[0]["precision"] == "200"
    assert any("overrides" in r.getMessage() for r in caplog.records)


def test_bad_config_rejected(cache_env, capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["basis", "--weight", "12", "--residual-margin", "2"])
    assert exc.value.code == 2
