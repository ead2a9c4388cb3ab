import pytest

from twoopt import gen_euclidean, gen_uniform, random_tour

#: criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def uniform_case():
    def make(n, seed):
        return gen_uniform(n, [seed, 1]), random_tour(n, [seed, 2])
    return make


@pytest.fixture
def euclid_case():
    def make(n, seed):
        return gen_euclidean(n, [seed, 1]), random_tour(n, [seed, 2])
    return make
