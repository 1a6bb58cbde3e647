from __future__ import annotations

from pathlib import Path

import pytest

from mixedflow.frontend import gen_constraints, parse
from mixedflow.lattice import render

CORPUS = Path(__file__).resolve().parents[1] / "corpus"



def corpus_file(name: str) -> str:
    return str(CORPUS / name)


def load_program(name: str):
    return parse((CORPUS / name).read_text(encoding="utf-8"))


def load_system(name: str, mode: str = "none"):
    return gen_constraints(load_program(name), mode, name=name)


def rho_prefix(result, local, glob) -> list:
    """Values of ``glob`` seen after each evaluation of ``local``, starting from 0."""
    return ["0"] + [render(gs[glob]) for x, gs in result.eval_log if x == local]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
