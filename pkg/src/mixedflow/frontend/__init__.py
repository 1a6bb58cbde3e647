"""Parser, CFG construction and constraint generation for the mini language."""

from __future__ import annotations

from .asserts import PROVEN, UNPROVEN, UNREACHABLE, AssertVerdict, check_asserts
from .cfg import Program, parse
from .gen import CONTEXT_MODES, ProgramSystem, gen_constraints
from .parser import KindError, ParseError

__all__ = [
    "parse", "Program", "gen_constraints", "ProgramSystem", "CONTEXT_MODES", "check_asserts",
    "AssertVerdict", "PROVEN", "UNPROVEN", "UNREACHABLE", "ParseError", "KindError",
]
