import csv
import io
import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from app.cli.main import run_command
from app.core.config import settings
from app.core.errors import InvalidInputError
from app.core.symplectic import (
    build_symplectic_form,
    check_complex_structure,
    is_symplectic,
    symplectic_spectrum,
)
from app.main import main
from app.models import RunConfig

SQUEEZED = [1.0, 0.0, 0.0, 0.25]
SWEEP_HEADER = "energy,e_min,threshold_ok,capacity_nats,capacity_bits,logdet_out,logdet_min,status"
SIMULATE_HEADER = "n,seed,mi_estimate_nats,mi_stderr_nats,capacity_nats,abs_gap_nats"


def report(text: str) -> dict[str, str]:
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


def test_capacity_command(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--config", str(write_config()), "--command", "capacity"]) == 0
    fields = report(capsys.readouterr().out)
    value, unit = fields["capacity"].split()
    assert unit == "bits"
    assert float(value) == pytest.approx(1.0, abs=1e-9)
    assert fields["status"] == "exact"
    assert fields["optimizer"] == "water_filling"
    np.testing.assert_allclose(json.loads(fields["alpha_opt"]), 1.5 * np.eye(2))
    np.testing.assert_allclose(json.loads(fields["ensemble_mean_covariance"]), np.eye(2))


def test_capacity_command_in_nats(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--config", str(write_config(log_base="e")), "--command", "capacity"]) == 0
    value, unit = report(capsys.readouterr().out)["capacity"].split()
    assert unit == "nats"
    assert float(value) == pytest.approx(np.log(2.0), abs=1e-11)


def test_capacity_strict_threshold_violation(
    write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]
) -> None:
    path = write_config(beta=SQUEEZED, energy=1.0)
    assert main(["--config", str(path), "--command", "capacity", "--strict"]) == 4
    captured = capsys.readouterr()
    assert "1.375" in captured.err
    assert report(captured.out)["status"] == "upper_bound_only"


def test_capacity_threshold_violation_without_strict(
    write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]
) -> None:
    path = write_config(beta=SQUEEZED, energy=1.0)
    assert main(["--config", str(path), "--command", "capacity"]) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert report(captured.out)["ensemble"] == "none"


def test_capacity_at_minimal_energy_with_mismatched_noise(
    write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]
) -> None:
    path = write_config(beta=SQUEEZED, energy=0.5)
    assert main(["--config", str(path), "--command", "capacity", "--strict"]) == 0
    captured = capsys.readouterr()
    fields = report(captured.out)
    assert fields["optimizer"] == "ground_state"
    assert fields["threshold_ok"] == "false"
    assert fields["status"] == "exact"
    assert float(fields["capacity_bits"]) == 0.0
    assert "threshold condition fails" not in captured.err


def test_capacity_infeasible_energy(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--config", str(write_config(energy=0.25)), "--command", "capacity"]) == 3
    assert "minimal energy" in capsys.readouterr().err


def test_capacity_optimizer_failure(
    write_config: Callable[..., Path],
    capsys: pytest.CaptureFixture[str],
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    monkeypatch.setattr(settings, "BARRIER_MAX_ITER", 1)
    path = write_config(beta=[4.0, 0.0, 0.0, 0.25], energy=1.0)
    assert main(["--config", str(path), "--command", "capacity"]) == 5
    assert "did not converge" in capsys.readouterr().err


def test_validate_command(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(epsilon=[1.0, 0.0, 0.0, 0.25], beta=SQUEEZED)
    assert main(["--config", str(path), "--command", "validate"]) == 0
    fields = report(capsys.readouterr().out)
    assert fields["beta valid"] == "true"
    assert fields["beta pure"] == "true"
    assert float(fields["e_min"]) == pytest.approx(0.5)
    np.testing.assert_allclose(json.loads(fields["epsilon ground state"]), np.diag([0.25, 1.0]), atol=1e-12)


def test_validate_rejects_sub_uncertainty_noise(
    write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]
) -> None:
    path = write_config(beta=[0.25, 0.0, 0.0, 0.25])
    assert main(["--config", str(path), "--command", "validate"]) == 2
    captured = capsys.readouterr()
    assert "uncertainty" in captured.err
    assert report(captured.out)["beta valid"] == "false"


def test_structure_round_trip(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    beta = np.array([[2.0, 0.3, 0.0, 0.1], [0.3, 1.0, 0.2, 0.0], [0.0, 0.2, 1.5, 0.0], [0.1, 0.0, 0.0, 0.8]])
    path = write_config(modes=2, epsilon=list((0.5 * np.eye(4)).ravel()), beta=list(beta.ravel()))
    assert main(["--config", str(path), "--command", "structure"]) == 0
    fields = report(capsys.readouterr().out)
    space = build_symplectic_form(2)
    j = np.array(json.loads(fields["complex_structure"]))
    check_complex_structure(j, space)
    vacuum = np.array(json.loads(fields["vacuum_covariance"]))
    assert symplectic_spectrum(vacuum, space).pure
    e = np.array(json.loads(fields["e_vectors"]))
    h = np.array(json.loads(fields["h_vectors"]))
    basis = np.vstack([e[0], h[0], e[1], h[1]]).T
    assert is_symplectic(basis.T, space)
    np.testing.assert_allclose(
        sorted(json.loads(fields["symplectic_eigenvalues"]), reverse=True),
        symplectic_spectrum(beta, space).values,
        rtol=1e-10,
    )


def test_sweep_command(write_config: Callable[..., Path], tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(beta=SQUEEZED, energy=None, energy_sweep={"start": 1.0, "stop": 5.0, "steps": 9})
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(["--config", str(path), "--command", "sweep", "--output", str(first)]) == 0
    assert main(["--config", str(path), "--command", "sweep", "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    text = first.read_text()
    assert text.splitlines()[0] == SWEEP_HEADER
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [float(r["energy"]) for r in rows] == pytest.approx(list(np.linspace(1.0, 5.0, 9)))
    assert rows[0]["threshold_ok"] == "false"
    assert rows[0]["status"] == "upper_bound_only"
    exact = [float(r["capacity_nats"]) for r in rows if r["status"] == "exact"]
    assert len(exact) == 8
    assert all(b >= a for a, b in zip(exact, exact[1:], strict=False))
    assert "warning" in capsys.readouterr().err


def test_sweep_strict(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(beta=SQUEEZED, energy=None, energy_sweep={"start": 1.0, "stop": 5.0, "steps": 9})
    assert main(["--config", str(path), "--command", "sweep", "--strict"]) == 4
    captured = capsys.readouterr()
    assert captured.out.startswith(SWEEP_HEADER)
    assert "1.375" in captured.err


def test_sweep_needs_energy_grid(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--config", str(write_config()), "--command", "sweep"]) == 2
    assert "energy_sweep" in capsys.readouterr().err


def test_simulate_command(write_config: Callable[..., Path], tmp_path: Path) -> None:
    path = write_config(samples=20_000, seed=7)
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(["--config", str(path), "--command", "simulate", "--output", str(first)]) == 0
    assert main(["--config", str(path), "--command", "simulate", "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == SIMULATE_HEADER
    (row,) = list(csv.DictReader(io.StringIO(first.read_text())))
    assert row["n"] == "20000"
    assert row["seed"] == "7"
    assert float(row["capacity_nats"]) == pytest.approx(np.log(2.0), abs=1e-11)
    assert float(row["abs_gap_nats"]) <= 5 * float(row["mi_stderr_nats"]) + 1e-3


def test_simulate_seed_override(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(samples=5_000, seed=7)
    assert main(["--config", str(path), "--command", "simulate", "--seed", "99"]) == 0
    (row,) = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert row["seed"] == "99"


def test_simulate_requires_threshold(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(beta=SQUEEZED, energy=1.0, samples=1_000)
    assert main(["--config", str(path), "--command", "simulate"]) == 4
    assert "1.375" in capsys.readouterr().err


def test_invalid_config(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(beta=[0.5, 0.0, 0.5])
    assert main(["--config", str(path), "--command", "capacity"]) == 2
    assert "beta" in capsys.readouterr().err


def test_singular_k_matrix(write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]) -> None:
    path = write_config(k_matrix=[1.0, 2.0, 2.0, 4.0])
    assert main(["--config", str(path), "--command", "capacity"]) == 2
    assert "singular" in capsys.readouterr().err


def test_missing_config_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--config", str(tmp_path / "absent.json"), "--command", "validate"]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_run_command_rejects_unknown_command() -> None:
    config = RunConfig(modes=1, epsilon=[0.5, 0.0, 0.0, 0.5], beta=[0.5, 0.0, 0.0, 0.5], energy=1.5)
    with pytest.raises(InvalidInputError, match="unknown command"):
        run_command("plot", config)
