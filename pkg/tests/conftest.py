import pathlib

import pytest

PROGRAMS = pathlib.Path(__file__).resolve().parent.parent / "programs"

NEGATE_OK = (PROGRAMS / "negate_ok.l2").read_text()
NEGATE_ERR_C = (PROGRAMS / "negate_err_c.l2").read_text()
NEGATE_FULL = (PROGRAMS / "negate_full.l2").read_text()
NEGATE_INFER = (PROGRAMS / "negate_infer.l2").read_text()
DEAD_SEMANTICS = (PROGRAMS / "dead_semantics.l2").read_text()
UNION_OK = (PROGRAMS / "union_ok.l2").read_text()
UNION_ERR = (PROGRAMS / "union_err.l2").read_text()


@pytest.fixture
def programs_dir():
    return PROGRAMS
