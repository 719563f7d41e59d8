import math
from pathlib import Path

import pytest

import hypbound

DATA = Path(__file__).resolve().parents[2] / "data"
PHI = {"n": 2, "depth": 1, "entries": [{"prefix": "a", "value": "1"}]}


def test_growth_of_free_group():
    assert hypbound.growth(3) == [1, 5, 17, 53]


def test_genus2_small_cancellation():
    report = hypbound.check_c16((DATA / "genus2.grp").read_text())
    assert report["passes_c16"]
    assert report["euler_char"] == -2
    assert report["max_piece_len"] == 1
    assert report["kappa"] == pytest.approx(15 * math.log(7) * 8)


def test_free_ball_is_a_tree():
    assert hypbound.hyperbolicity_delta(4) == "0"


def test_deviation_table_and_lp():
    csv = hypbound.deviation_table(PHI, 8)
    lines = csv.splitlines()
    assert lines[0] == "word,E_re,E_im,sigma_sq,sigma"
    assert lines[1].startswith("e,1/4,0,3/16,")
    verdict, ratio, _ = hypbound.lp_verdict(csv, 3.0)
    assert verdict == "converges-geometric"
    assert ratio <= 3 ** (1 - 1.5) + 0.01
    assert hypbound.lp_verdict(csv, 2.0)[0] == "diverges"


def test_kcycle_norm():
    values = hypbound.kcycle_values(PHI, 2, 3)
    assert values["norm"] == pytest.approx(math.sqrt(3) / 4)


def test_twisted_decay():
    report = hypbound.twisted(PHI, {"n": 2, "word": "a"})
    assert report["relative_change"] < 0.05


def test_double_integral_calibrated():
    value, stderr, _ = hypbound.double_integral("ab", 10, 0.5, samples=20000, seed=3)
    exact = hypbound.double_integral_exact("ab", 0.5)
    assert abs(value - exact) <= 3 * stderr


def test_cli_passthrough():
    code, report = hypbound.run("growth", "--n", "2", "--radius", "2")
    assert code == 0
    assert report["result"]["counts"]["value"] == [1, 5, 17]
    code, text = hypbound.run("growth", "--bogus")
    assert code == 1


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        hypbound.check_c16("generators: a\n")
