import pytest

from fglfans.cli import corpus_names, load_fan
from fglfans.fgl import GradedRing
from fglfans.lazard import build_lazard

CORPUS = corpus_names()


@pytest.fixture(scope="session")
def lazard3():
    return build_lazard(3)


@pytest.fixture(scope="session")
def additive3():
    return GradedRing.additive(3)


@pytest.fixture(scope="session")
def mult3():
    return GradedRing.multiplicative(3)


@pytest.fixture(scope="session")
def corpus():
    return {name: load_fan(name) for name in CORPUS}


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok, detail = results[n]
        terminalreporter.write_line(f"[{n}] {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
