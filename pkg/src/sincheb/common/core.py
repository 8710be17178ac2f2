#!/usr/bin/env python3
#
#  core.py
#  sincheb
#
#  Shared helpers for every sincheb area: logging, exit codes, errors, tolerances.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import logging
from typing import Dict, Optional

cRed = "\033[0;31m"
cReset = "\033[0m"

e_success = 0
e_validation = 1
e_convergence = 2

hermitian_tol = 1e-10
unitary_tol = 1e-10
log_unitary_tol = 1e-8
branch_guard = 1e-6
state_norm_tol = 1e-12
max_dim = 2 ** 10


class SinchebError(Exception):
    """Base class for every error raised by sincheb."""


class InvalidArgumentError(SinchebError, ValueError):
    """An argument violates the operation's precondition."""


class DomainError(SinchebError, ValueError):
    """An argument lies outside the domain where a formula or bound is valid."""


class BranchCutError(DomainError):
    """A unitary has an eigenvalue on or near the principal-log branch cut."""

    def __init__(self, phase: float, message: Optional[str] = None) -> None:
        self.phase = phase
        super().__init__(message or f"eigenphase {phase:.12g} is within {branch_guard:g} rad of the branch cut at +-pi")


class CapabilityError(SinchebError):
    """A request exceeds what the exact routine is allowed to enumerate."""


class ValidationError(SinchebError):
    """Problem data failed validation."""


class NormalizationError(ValidationError):
    """A decomposed Hamiltonian violates sum ||H_gamma|| <= 1."""


class ProblemParseError(ValidationError):
    """A problem file is malformed."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None) -> None:
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


def _setup_logging(name: str = "sincheb", level: int = logging.INFO) -> logging.Logger:
    """Sets up and returns a logger that writes to stderr."""
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers = []
    formatter = logging.Formatter("[%(levelname)s] %(message)s")
    sh = logging.StreamHandler()
    sh.setFormatter(formatter)
    logger.addHandler(sh)
    logger.propagate = False
    return logger


def _get_logger(area: str) -> logging.Logger:
    """Returns the child logger of an area; handlers come from the front end."""
    return logging.getLogger(f"sincheb.{area}")


def _log_event(logger: logging.Logger, level_char: str, message: str) -> None:
    """Maps level characters to logging levels and logs the message."""
    level_map: Dict[str, int] = {"-": logging.ERROR, "!": logging.WARNING, "*": logging.INFO, "+": logging.INFO, "#": logging.DEBUG}
    logger.log(level_map.get(level_char, logging.INFO), message)
