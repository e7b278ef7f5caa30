import numpy as np
import pytest

from gl3moments.cli import vendored_corpus_path
from gl3moments.gl3 import eisenstein_coefficients, ingest_maass_data, sym2_delta
from gl3moments.special_fn import LanglandsParams


@pytest.fixture(scope="session")
def sym2():
    return sym2_delta()


@pytest.fixture(scope="session")
def eis_trivial():
    return eisenstein_coefficients(LanglandsParams())


@pytest.fixture(scope="session")
def eis_unitary():
    return eisenstein_coefficients(LanglandsParams.unitary(0.3, 0.5))


@pytest.fixture(scope="session")
def corpus():
    return ingest_maass_data(vendored_corpus_path())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def verdict(name, ok, detail=""):
    """Print a one-line PASS/FAIL record (visible with ``pytest -s`` or in -rA)."""
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok
