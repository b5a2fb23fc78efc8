import pathlib

import pytest

PKG_ROOT = pathlib.Path(__file__).resolve().parent.parent
SCENARIO_DIR = PKG_ROOT / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> pathlib.Path:
    return SCENARIO_DIR


@pytest.fixture()
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    from spurline.cli import main

    def run(*argv: str):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
