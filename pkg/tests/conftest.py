import sys
from pathlib import Path

import pytest

from solmorph.corpus import (
    SnippetKind,
    VulnType,
    bundled_hosts_dir,
    bundled_snippets_dir,
    load_corpus,
    parse_snippet_source,
)

sys.setrecursionlimit(10000)

FIXTURES = Path(__file__).parent / "fixtures"

# The Fig. 1-style one-branch-if snippet the loop rewrites are demonstrated
# on: an if guarding a state-variable subtraction.
FIG1_FRAGMENT = """\
uint8 balance;

function bug_intou7(uint8 p) public {
    if (balance > p) {
        balance = balance - p;
    }
}
"""


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(bundled_snippets_dir())


@pytest.fixture(scope="session")
def hosts():
    return sorted(bundled_hosts_dir().glob("*.sol"))


@pytest.fixture(scope="session")
def roundtrip_files():
    files = sorted((FIXTURES / "roundtrip").glob("*.sol"))
    assert len(files) >= 20
    return files


@pytest.fixture
def fig1_snippet():
    return parse_snippet_source(FIG1_FRAGMENT, "fig1", VulnType.OVERFLOW_UNDERFLOW,
                                SnippetKind.FUNCTION_LEVEL)


def function_members(members):
    return [m for m in members if hasattr(m, "body")]
