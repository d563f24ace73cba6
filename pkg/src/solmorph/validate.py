"""Validity checks for generated files.

Syntax checking is the package's own parser plus a structural guard that
the spliced region did not get swallowed into an opaque raw region. The
compile check shells out to an external compiler through a command template
(``{file}`` is substituted), so the compiler version can be pinned per
dataset and is never a build dependency. Without a configured compiler the
dataset is stamped "syntax-only".
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .ast_nodes import RawRegion, Span
from .parser import ParseError, parse

ENV_COMPILER = "SOLMORPH_COMPILER"
DEFAULT_TIMEOUT_SECS = 30.0


class CompilerNotFound(Exception):
    pass


@dataclass(frozen=True)
class CompilerConfig:
    command: str  # template, e.g. "solc --stop-after parsing {file}"
    timeout_secs: float = DEFAULT_TIMEOUT_SECS
    parallelism: int = 1

    def argv(self, file: Path) -> list[str]:
        parts = shlex.split(self.command)
        if not any("{file}" in p for p in parts):
            parts.append("{file}")
        return [p.replace("{file}", str(file)) for p in parts]


def compiler_from_env() -> Optional[CompilerConfig]:
    command = os.environ.get(ENV_COMPILER)
    if command:
        return CompilerConfig(command)
    return None


def default_compiler() -> Optional[CompilerConfig]:
    """Env override first, then a solc found on PATH, else None."""
    config = compiler_from_env()
    if config is not None:
        return config
    solc = shutil.which("solc")
    if solc:
        return CompilerConfig(f"{solc} {{file}}")
    return None


def compiler_version(config: Optional[CompilerConfig]) -> Optional[str]:
    if config is None:
        return None
    base = shlex.split(config.command)
    base = [p for p in base if "{file}" not in p]
    if not base:
        return None
    try:
        proc = subprocess.run(base + ["--version"], capture_output=True,
                              text=True, timeout=10)
    except (OSError, subprocess.TimeoutExpired):
        return None
    out = (proc.stdout or proc.stderr).strip()
    return out.splitlines()[-1] if out else None


@dataclass(frozen=True)
class ValidationOutcome:
    file: str
    syntax_ok: bool
    compile_ok: Optional[bool] = None  # absent when no compiler configured
    diagnostics: tuple[tuple[str, str, int], ...] = ()  # (severity, message, line)


def check_syntax(file: Path, splice_span: Optional[tuple[int, int]] = None,
                 ) -> ValidationOutcome:
    """Parse the file; optionally require the splice span to be structured."""
    file = Path(file)
    source = file.read_text()
    try:
        unit = parse(source)
    except ParseError as exc:
        return ValidationOutcome(str(file), False,
                                 diagnostics=(("error", str(exc), exc.line),))
    diagnostics: list[tuple[str, str, int]] = []
    if splice_span is not None:
        span = Span(*splice_span)
        for contract in unit.contracts:
            for member in contract.members:
                if isinstance(member, RawRegion) and member.span \
                        and member.span.overlaps(span) \
                        and not _trivia_only(member.text):
                    diagnostics.append((
                        "error",
                        "spliced region degraded to an opaque raw member",
                        member.span.start,
                    ))
                    return ValidationOutcome(str(file), False,
                                             diagnostics=tuple(diagnostics))
    return ValidationOutcome(str(file), True)


def _trivia_only(text: str) -> bool:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("//") and not stripped.startswith("/*"):
            return False
    return True


def compile_check(file: Path, compiler: CompilerConfig) -> ValidationOutcome:
    """Run the external compiler; compile_ok is exit status == 0."""
    file = Path(file)
    argv = compiler.argv(file)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=compiler.timeout_secs)
    except FileNotFoundError:
        return ValidationOutcome(str(file), True, False, (
            ("error", f"compiler not found: {argv[0]}", 0),))
    except subprocess.TimeoutExpired:
        return ValidationOutcome(str(file), True, False, (
            ("error", f"compiler timed out after {compiler.timeout_secs}s", 0),))
    diagnostics = tuple(
        ("error" if proc.returncode != 0 else "warning", line, 0)
        for line in proc.stderr.splitlines() if line.strip()
    )
    return ValidationOutcome(str(file), True, proc.returncode == 0, diagnostics)


def validate_file(file: Path, compiler: Optional[CompilerConfig] = None,
                  splice_span: Optional[tuple[int, int]] = None,
                  ) -> ValidationOutcome:
    outcome = check_syntax(file, splice_span)
    if not outcome.syntax_ok or compiler is None:
        return outcome
    compiled = compile_check(file, compiler)
    return ValidationOutcome(outcome.file, True, compiled.compile_ok,
                             outcome.diagnostics + compiled.diagnostics)


def validate_many(files: list[Path], compiler: Optional[CompilerConfig] = None,
                  jobs: int = 1) -> list[ValidationOutcome]:
    """Validate a batch; outcomes ordered by file name regardless of jobs."""
    ordered = sorted(Path(f) for f in files)
    if jobs <= 1 or compiler is None:
        return [validate_file(f, compiler) for f in ordered]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lambda f: validate_file(f, compiler), ordered))
    return results
