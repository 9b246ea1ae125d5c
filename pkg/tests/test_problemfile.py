from fractions import Fraction

import pytest

from morsepolar.problemfile import ProblemFileError, load_problem, parse_problem

from conftest import PROBLEMS


@pytest.mark.parametrize("path", sorted(p for p in PROBLEMS.glob("*.prob") if p.stem != "bad"))
def test_checked_in_problems_are_valid(path):
    pf, diags = parse_problem(path.read_text())
    assert diags == []


def test_bad_file_diagnostics():
    pf, diags = parse_problem((PROBLEMS / "bad.prob").read_text())
    assert len(diags) == 2
    assert diags[0].startswith("line 2:") and "unknown variable 'z'" in diags[0]
    assert "dim V < dim S" in diags[1]


def test_fields():
    text = """
    # comment
    variables: x, y
    variety: y - x^2      # trailing comment
    data_point: 3/5, -2/9
    linear_form: 1, 2
    point: 0, 0
    point: 1, 1
    seed: 4
    t0: 0.05+0.03j
    schedule_steps: 30
    escape_radius: 1e6
    """
    pf, diags = parse_problem(text)
    assert diags == []
    assert pf.variables == ("x", "y")
    assert pf.data_point == (Fraction(3, 5), Fraction(-2, 9))
    assert pf.linear_form.coefficients == (1, 2)
    assert pf.points == [(0, 0), (1, 1)]
    assert (pf.seed, pf.t0, pf.schedule_steps, pf.escape_radius) == (4, 0.05 + 0.03j, 30, 1e6)


@pytest.mark.parametrize("text, needle", [
    ("function: x", "variables"),
    ("variables: x\nvariables: y", "given twice"),
    ("variables: x\nfrobnicate: 1", "unknown key"),
    ("variables: x\ndata_point: 1, 2", "coordinate"),
    ("variables: x\nseed: one", "seed"),
    ("variables: x\nno colon here", "key: value"),
])
def test_errors_carry_line_numbers(text, needle):
    _, diags = parse_problem(text)
    assert diags and any(needle in d for d in diags)
    assert all(d.startswith("line ") for d in diags)


def test_stratification_block():
    pf, diags = parse_problem((PROBLEMS / "cardioid_strata.prob").read_text())
    assert diags == []
    assert set(pf.poset.strata) == {"O", "P", "S"}
    assert pf.strat_data.mu == {"O": 2, "P": 1}


def test_load_problem_raises(tmp_path):
    bad = tmp_path / "x.prob"
    bad.write_text("variables: x\nfunction: y\n")
    with pytest.raises(ProblemFileError):
        load_problem(bad)
