"""Syntax checks and the external-compiler adapter (exercised via stubs)."""

import os
import stat
import sys
import textwrap

import pytest

from solmorph.validate import (
    ENV_COMPILER,
    CompilerConfig,
    check_syntax,
    compile_check,
    compiler_from_env,
    validate_file,
    validate_many,
)


GOOD = """\
pragma solidity ^0.5.0;

contract Fine {
    uint a;

    function f() public {
        a = 1;
    }
}
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def _stub_compiler(tmp_path, name, body):
    """A tiny executable standing in for a real compiler."""
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return path


def test_check_syntax_ok(tmp_path, roundtrip_files):
    for fixture in roundtrip_files[:5]:
        outcome = check_syntax(fixture)
        assert outcome.syntax_ok, fixture.name


def test_check_syntax_truncated_file(tmp_path):
    path = _write(tmp_path, "broken.sol",
                  "contract C {\n    function f() public {\n        a = 1;\n")
    outcome = check_syntax(path)
    assert not outcome.syntax_ok
    assert outcome.diagnostics
    severity, message, line = outcome.diagnostics[0]
    assert severity == "error" and line >= 1


def test_check_syntax_guards_splice_span(tmp_path):
    # a span landing inside an opaque member is not structurally valid
    path = _write(tmp_path, "opaque.sol",
                  "contract C {\n    event E(uint x);\n}\n")
    assert check_syntax(path, splice_span=(2, 2)).syntax_ok is False
    assert check_syntax(path).syntax_ok is True


def test_compile_check_success(tmp_path):
    path = _write(tmp_path, "ok.sol", GOOD)
    stub = _stub_compiler(tmp_path, "okcc", "exit 0\n")
    outcome = compile_check(path, CompilerConfig(f"{stub} {{file}}"))
    assert outcome.compile_ok is True


def test_compile_check_failure_captures_stderr(tmp_path):
    path = _write(tmp_path, "dup.sol", GOOD)
    stub = _stub_compiler(tmp_path, "failcc",
                          'echo "Error: identifier already declared" >&2\nexit 1\n')
    outcome = compile_check(path, CompilerConfig(f"{stub} {{file}}"))
    assert outcome.compile_ok is False
    assert any("already declared" in msg for _, msg, _ in outcome.diagnostics)


def test_compile_check_timeout(tmp_path):
    path = _write(tmp_path, "slow.sol", GOOD)
    stub = _stub_compiler(tmp_path, "slowcc", "sleep 5\n")
    outcome = compile_check(path, CompilerConfig(f"{stub} {{file}}", timeout_secs=0.3))
    assert outcome.compile_ok is False
    assert any("timed out" in msg for _, msg, _ in outcome.diagnostics)


def test_compile_check_missing_binary(tmp_path):
    path = _write(tmp_path, "ok.sol", GOOD)
    outcome = compile_check(path, CompilerConfig("/no/such/compiler {file}"))
    assert outcome.compile_ok is False
    assert any("not found" in msg for _, msg, _ in outcome.diagnostics)


def test_validate_file_degraded_mode(tmp_path):
    path = _write(tmp_path, "ok.sol", GOOD)
    outcome = validate_file(path, compiler=None)
    assert outcome.syntax_ok and outcome.compile_ok is None


def test_validate_file_skips_compile_on_syntax_error(tmp_path):
    path = _write(tmp_path, "broken.sol", "contract C {")
    stub = _stub_compiler(tmp_path, "nevercc", "exit 0\n")
    outcome = validate_file(path, CompilerConfig(f"{stub} {{file}}"))
    assert not outcome.syntax_ok
    assert outcome.compile_ok is None


def test_validate_many_order_stable(tmp_path):
    paths = [_write(tmp_path, f"f{i}.sol", GOOD) for i in range(4)]
    stub = _stub_compiler(tmp_path, "okcc", "exit 0\n")
    outcomes = validate_many(list(reversed(paths)),
                             CompilerConfig(f"{stub} {{file}}"), jobs=3)
    assert [o.file for o in outcomes] == [str(p) for p in sorted(paths)]
    assert all(o.compile_ok for o in outcomes)


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_COMPILER, "mycc --fast {file}")
    config = compiler_from_env()
    assert config is not None
    assert config.argv(tmp_path / "x.sol")[:2] == ["mycc", "--fast"]
    monkeypatch.delenv(ENV_COMPILER)
    assert compiler_from_env() is None


def test_command_without_placeholder_appends_file(tmp_path):
    config = CompilerConfig("solc")
    argv = config.argv(tmp_path / "x.sol")
    assert argv == ["solc", str(tmp_path / "x.sol")]
