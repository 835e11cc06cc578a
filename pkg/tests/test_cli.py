import pathlib
import re
import subprocess
import sys

import pytest

from firstint.cli import main, result_section
from firstint.errors import NotJordanForm, SystemSyntaxError, ValuationError
from firstint.sysfile import ZetaToken, parse_system, serialize

SYSTEMS = pathlib.Path(__file__).resolve().parent.parent / "systems"

MINIMAL = """\
# x1' = x1 x2, x2' = -x2 + x1 x2
system
vars 2
lambda 0 -1
f1 = 1 x1^1 x2^1
f2 = 1 x1^1 x2^1
options backend=auto N=12
"""


def normalize(text):
    return "\n".join(" ".join(line.split()) for line in text.splitlines() if line.strip())


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def h_section(text):
    return [line for line in text.splitlines() if line.startswith("H[")]


def test_parse_minimal():
    sf = parse_system(MINIMAL)
    assert sf.nvars == 2 and sf.eigenvalues() == (0, -1)
    assert sf.N == 12 and sf.backend == "exact"
    assert sf.vector_field().straightened


@pytest.mark.parametrize("path", sorted(SYSTEMS.glob("*.sys")), ids=lambda p: p.name)
def test_shipped_files_round_trip(path):
    text = path.read_text()
    assert normalize(serialize(parse_system(text))) == normalize(text)


def test_round_trip_with_messy_whitespace():
    messy = MINIMAL.replace("lambda 0 -1", "lambda   0    -1").replace("f2 = ", "f2   =   ")
    assert normalize(serialize(parse_system(messy))) == normalize(MINIMAL)


def test_linear_term_rejected():
    with pytest.raises(ValuationError):
        parse_system(MINIMAL.replace("f1 = 1 x1^1 x2^1", "f1 = 1 x2^1 + 1 x1^1 x2^1"))


def test_syntax_error_location():
    bad = MINIMAL.replace("f2 = 1 x1^1 x2^1", "f2 = 1 x1^1 y2^1")
    with pytest.raises(SystemSyntaxError) as err:
        parse_system(bad)
    assert err.value.line == 6
    assert err.value.column == bad.splitlines()[5].index("y2") + 1
    with pytest.raises(SystemSyntaxError) as err:
        parse_system("vars 2\n")
    assert (err.value.line, err.value.column) == (1, 1)


def test_jordan_checks():
    ok = "system\nvars 3\nlambda 0 -1 -1\njordan 0 | -1:1 -1\nf1 = 0\nf2 = 0\nf3 = 0\n"
    assert parse_system(ok).sup == (0, 1)
    with pytest.raises(NotJordanForm):
        parse_system(ok.replace("lambda 0 -1 -1", "lambda 0 -1 -2").replace("-1:1 -1", "-1:1 -2"))
    with pytest.raises(NotJordanForm):
        parse_system(ok.replace("jordan 0 | -1:1 -1", "jordan 0 | -1 | -2"))
    with pytest.raises(SystemSyntaxError):
        parse_system(ok.replace("jordan 0 | -1:1 -1", "jordan 0 | -1 -1"))


def test_counterexample_file_selects_certified_backend():
    sf = parse_system((SYSTEMS / "counterexample.sys").read_text())
    assert sf.eigen[2] == ZetaToken(-1, 3)
    assert sf.backend == "certified"


def test_integral_degree_3(capsys):
    code, out, _ = cli(capsys, "integral", SYSTEMS / "planar.sys", "--degree", 3)
    assert code == 0
    assert h_section(out) == [
        "H[1]: (1,0) -> 1",
        "H[2]: (1,1) -> 1",
        "H[3]: (2,1) -> 1",
        "H[3]: (1,2) -> 1/2",
    ]
    assert "residual_valuation_exceeds_degree = true" in out


def test_resonance_cap_3(capsys):
    code, out, _ = cli(capsys, "resonance", SYSTEMS / "lattice012.sys", "--cap", 3)
    assert code == 0
    assert re.findall(r"point = (\S+)", out) == ["(1,0,0)", "(2,0,0)", "(3,0,0)"]


def test_certify_divergence_table(capsys):
    code, out, _ = cli(capsys, "certify-divergence", "--kmax", 3)
    assert code == 0
    vals = [float(v) for v in re.findall(r"log2_root_norm = .*\(~([-\d.e+]+)\)", out)]
    assert [round(v, 2) for v in vals] == [0.15, 1.76, 2.61]
    assert "increasing = true" in out


def test_isolated_point_exit_code(capsys):
    code, out, err = cli(capsys, "check-nonisolated", SYSTEMS / "isolated.sys")
    assert code == 2
    assert "witness_degree = 2" in out and "obstruction" in err
    code, out, _ = cli(capsys, "integral", SYSTEMS / "isolated.sys")
    assert code == 2 and "IsolatedSingularPoint" in out


def test_usage_errors_exit_1(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    code, _, err = cli(capsys, "integral", tmp_path / "missing.sys")
    assert code == 1 and "error" in err
    bad = tmp_path / "bad.sys"
    bad.write_text(MINIMAL.replace("f1 = 1 x1^1 x2^1", "f1 = 1 x1^1"))
    code, _, err = cli(capsys, "integral", bad)
    assert code == 1 and "ValuationError" not in err


def test_straighten_then_integral_matches_fused(capsys, tmp_path):
    code, straight, _ = cli(capsys, "straighten", SYSTEMS / "curve.sys", "--degree", 8)
    assert code == 0
    out = tmp_path / "straight.sys"
    out.write_text(straight)
    assert parse_system(straight).vector_field().straightened
    code, fused, _ = cli(capsys, "integral", SYSTEMS / "curve.sys", "--degree", 8)
    assert code == 0
    code, staged, _ = cli(capsys, "integral", out, "--degree", 8)
    assert code == 0
    assert h_section(fused) == h_section(staged) and h_section(fused)


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "rep.txt"
    code, out, _ = cli(capsys, "nonint", SYSTEMS / "spectrum12.sys", "--out", target)
    assert code == 0 and out == ""
    assert "[result]" in target.read_text()


def test_counterexample_report(capsys):
    code, out, _ = cli(capsys, "counterexample", SYSTEMS / "counterexample.sys", "--degree", 8)
    assert code == 0
    assert "residual_encloses_zero_through_degree = true" in out
    bound = re.search(r"crosscheck_log2_deviation_bound = (\S+)", out).group(1)
    assert bound == "exact" or int(bound) < -100


def test_result_section_drops_timing(capsys):
    _, a, _ = cli(capsys, "nonint", SYSTEMS / "spectrum237.sys")
    assert "[timing]" in a and "[timing]" not in result_section(a)


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "firstint.cli", "resonance", str(SYSTEMS / "lattice012.sys"), "--cap", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "lattice_size = 2" in proc.stdout
