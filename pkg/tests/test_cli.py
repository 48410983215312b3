"""End-to-end tests of the command-line entry point."""

import json

import numpy as np
import pytest

from estimate.records import write_tensor
from grid.spec import GridSpec
from run_covext import EXIT_FORMAT, EXIT_INPUT, EXIT_NO_SOLUTION, EXIT_OK, EXIT_USAGE, main
from solve.serialization import load_solution
from trigcore.formats import read_weight, write_coefficients
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from wiener.images import read_pnm, write_pbm
from wiener.model import model_from_rational, synthesize_texture

LAM1 = IndexSet.box(1)


@pytest.fixture
def example_files(tmp_path):
    cov = write_coefficients(HermitianSeq.from_values(LAM1, [0.5, 1.0, 0.5]), tmp_path / "c.txt")
    prior = write_coefficients(HermitianSeq.from_values(LAM1, [-0.5, 1.0, -0.5]), tmp_path / "p.txt")
    return cov, prior


def test_soft_solve_reports_the_atom(tmp_path, capsys, example_files):
    cov, prior = example_files
    out = tmp_path / "solution.json"
    code = main([
        "solve", "--cov", str(cov), "--prior", str(prior), "--mode", "soft",
        "--weight", "scalar:0.5", "--grid", "1024", "-o", str(out),
    ])
    text = capsys.readouterr().out
    assert code == EXIT_OK
    assert "[Config]" in text and "grid=1024" in text
    atom_lines = [line for line in text.splitlines() if line.startswith("[Atom]")]
    assert len(atom_lines) == 1
    mass = float(atom_lines[0].split("mass=")[1])
    assert mass == pytest.approx(0.211325, abs=1e-4)
    assert load_solution(out).mode == "soft"
    assert out.with_suffix(".spectrum.csv").is_file()


def test_estimate_then_exact_solve(tmp_path, capsys):
    rng = np.random.default_rng(0)
    record = write_tensor(rng.standard_normal(300), tmp_path / "y.txt")
    cov = tmp_path / "cov.txt"
    assert main(["estimate", "--data", str(record), "--lambda-box", "2", "-o", str(cov)]) == EXIT_OK
    assert main(["solve", "--cov", str(cov), "-o", str(tmp_path / "s.json")]) == EXIT_OK
    assert "[Done] Solution" in capsys.readouterr().out


def test_flags_override_the_config_file(tmp_path, capsys, example_files):
    cov, _ = example_files
    config = tmp_path / "covext.conf"
    config.write_text("max_newton_iters=70\nkkt_tol=1e-5\n", encoding="utf-8")
    args = ["--config", str(config), "solve", "--cov", str(cov), "-o", str(tmp_path / "s.json")]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    assert "max_newton_iters=70" in first and "kkt_tol=1e-05" in first
    assert main(args + ["--max-newton-iters", "90"]) == EXIT_OK
    assert "max_newton_iters=90" in capsys.readouterr().out


def test_missing_config_file_is_invalid_input(tmp_path, example_files):
    cov, _ = example_files
    assert main(["--config", str(tmp_path / "none.conf"), "solve", "--cov", str(cov)]) == EXIT_INPUT


def test_malformed_covariance_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("one two\n", encoding="utf-8")
    assert main(["solve", "--cov", str(bad)]) == EXIT_FORMAT


def test_prior_on_another_index_set(tmp_path, example_files):
    cov, _ = example_files
    prior = write_coefficients(HermitianSeq.unit(IndexSet.box(2)), tmp_path / "p2.txt")
    assert main(["solve", "--cov", str(cov), "--prior", str(prior), "-o", str(tmp_path / "s.json")]) == EXIT_INPUT


def test_soft_mode_needs_a_weight(tmp_path, example_files):
    cov, _ = example_files
    assert main(["solve", "--cov", str(cov), "--mode", "soft", "-o", str(tmp_path / "s.json")]) == EXIT_INPUT


def test_hard_problem_without_solution(tmp_path, capsys):
    cov = write_coefficients(HermitianSeq.from_values(LAM1, [1.5, 1.0, 1.5]), tmp_path / "c.txt")
    code = main([
        "solve", "--cov", str(cov), "--mode", "hard", "--weight", "scalar:0.05",
        "--grid", "256", "-o", str(tmp_path / "s.json"),
    ])
    assert code == EXIT_NO_SOLUTION
    assert "[Hint]" in capsys.readouterr().out


def test_unknown_command_is_a_usage_error():
    assert main(["extend"]) == EXIT_USAGE


def test_convert_weight_from_a_soft_solution(tmp_path, capsys, example_files):
    cov, prior = example_files
    sol = tmp_path / "s.json"
    main(["solve", "--cov", str(cov), "--prior", str(prior), "--mode", "soft", "--weight", "scalar:0.5",
          "--grid", "1024", "-o", str(sol)])
    out = tmp_path / "w_hard.txt"
    code = main(["convert-weight", "--solution", str(sol), "--direction", "soft2hard",
                 "--weight", "scalar:0.5", "-o", str(out)])
    assert code == EXIT_OK
    assert "[Info] converted weight" in capsys.readouterr().out
    W = read_weight(out, LAM1)
    q_hat = load_solution(sol).q_hat
    d = q_hat - HermitianSeq.unit(LAM1)
    assert W.scalar_value() == pytest.approx(0.25 * d.norm() ** 2, rel=1e-10)


def test_analyze_prints_cone_and_bound_lines(tmp_path, capsys):
    cov = write_coefficients(HermitianSeq.from_values(LAM1, [1.5, 1.0, 1.5]), tmp_path / "c.txt")
    assert main(["analyze", "--cov", str(cov), "--weight", "scalar:2.0"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "[Cone] toeplitz_1d: outside" in text
    assert text.count("[Bound]") == 2


def test_small_simulation_writes_json_lines(tmp_path):
    out = tmp_path / "study.jsonl"
    code = main(["--seed", "3", "simulate", "--N", "40", "--window", "9", "--replicates", "1",
                 "--max-newton-iters", "60", "-o", str(out)])
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert sum(r["type"] == "record" for r in rows) == 3
    assert {r["procedure"] for r in rows if r["type"] == "summary"} == {"biased_exact", "biased_approx", "unbiased_approx"}


def test_texture_analyze_then_synthesize(tmp_path):
    lam = IndexSet.box(1, 1)
    q = np.zeros(len(lam))
    q[lam.zero_position] = 1.0
    q[lam.position((1, 0))] = q[lam.position((-1, 0))] = -0.2
    truth = model_from_rational(0.3, HermitianSeq.unit(lam), HermitianSeq(lam, q), GridSpec.uniform(2, 32))
    image = write_pbm(synthesize_texture(truth, 128, seed=2), tmp_path / "in.pbm")
    model = tmp_path / "model.json"
    assert main(["texture", "analyze", "--image", str(image), "--lambda-box", "1,1", "--grid", "32",
                 "-o", str(model)]) == EXIT_OK
    texture = tmp_path / "out.pbm"
    assert main(["--seed", "1", "texture", "synth", "--model", str(model), "--size", "64",
                 "-o", str(texture)]) == EXIT_OK
    bits = read_pnm(texture)
    assert bits.shape == (64, 64)
    assert 0.0 < bits.mean() < 1.0


def test_texture_analyze_with_hard_matching(tmp_path, capsys):
    lam = IndexSet.box(1, 1)
    q = np.zeros(len(lam))
    q[lam.zero_position] = 1.0
    q[lam.position((0, 1))] = q[lam.position((0, -1))] = -0.25
    truth = model_from_rational(0.0, HermitianSeq.unit(lam), HermitianSeq(lam, q), GridSpec.uniform(2, 32))
    image = write_pbm(synthesize_texture(truth, 128, seed=4), tmp_path / "in.pbm")
    model = tmp_path / "model.json"
    code = main(["texture", "analyze", "--image", str(image), "--lambda-box", "1,1", "--grid", "32",
                 "--weight-mode", "hard", "-o", str(model)])
    assert code == EXIT_OK
    assert "(hard matching)" in capsys.readouterr().out
    assert model.is_file()
