#!/usr/bin/env python3
"""Lint, test and smoke-run facetspace in the current environment."""

import argparse
import subprocess
import sys
from pathlib import Path

GREEN = "\033[92m"
RED = "\033[91m"
BLUE = "\033[94m"
BOLD = "\033[1m"
END = "\033[0m"

SMOKE_COMMANDS = {
    "witness": ["witness-nonconvex"],
    "probe": ["probe", "--radius", "0.12", "--steps", "240"],
    "build": ["build", "--x", "1", "--y", "2"],
}


def run_step(name: str, cmd: list[str]) -> bool:
    """Run one step, echo its output and report whether it exited with 0."""
    print(f"\n{BLUE}{'=' * 60}{END}\n{BOLD}{name}{END}\n{BLUE}{'=' * 60}{END}")
    try:
        result = subprocess.run(
            cmd, capture_output=True, text=True, check=False, cwd=Path(__file__).parent
        )
    except OSError as err:
        print(f"{RED}Cannot run {cmd[0]}: {err}{END}")
        return False
    print(result.stdout + result.stderr)
    success = result.returncode == 0
    print(f"{GREEN}✅ PASSED{END}" if success else f"{RED}❌ FAILED{END}")
    return success


def build_steps(args: argparse.Namespace) -> list[tuple[str, list[str]]]:
    """Return the (name, command) pairs selected by the flags."""
    steps: list[tuple[str, list[str]]] = []
    if not args.skip_ruff:
        if args.fix:
            steps.append(("Ruff fix", ["ruff", "check", "--fix", "."]))
            steps.append(("Ruff format", ["ruff", "format", "."]))
        else:
            steps.append(("Ruff lint", ["ruff", "check", "."]))
            steps.append(("Ruff format", ["ruff", "format", "--check", "."]))
    if not args.skip_pylint:
        steps.append(("Pylint", ["pylint", "facetspace", "tests"]))
    if not args.skip_tests:
        pytest_cmd = [sys.executable, "-m", "pytest", "tests/", "-v"]
        if args.fast:
            pytest_cmd += ["-m", "not slow"]
        if args.coverage:
            pytest_cmd += ["--cov=facetspace", "--cov-report=term-missing"]
        steps.append(("Unit tests", pytest_cmd))
    if not args.skip_smoke:
        steps.extend(
            (f"Smoke {name}", [sys.executable, "-m", "facetspace", *command])
            for name, command in SMOKE_COMMANDS.items()
        )
    return steps


def main() -> None:
    """Run the selected checks and exit with 1 if any failed."""
    parser = argparse.ArgumentParser(description="Run facetspace checks")
    parser.add_argument("--skip-ruff", action="store_true", help="Skip Ruff")
    parser.add_argument("--skip-pylint", action="store_true", help="Skip Pylint")
    parser.add_argument("--skip-tests", action="store_true", help="Skip pytest")
    parser.add_argument("--skip-smoke", action="store_true", help="Skip CLI runs")
    parser.add_argument("--fast", action="store_true", help="Deselect slow suites")
    parser.add_argument("--coverage", action="store_true", help="Include coverage")
    parser.add_argument("--fix", action="store_true", help="Let Ruff fix first")
    args = parser.parse_args()

    results = [(name, run_step(name, cmd)) for name, cmd in build_steps(args)]

    print(f"\n{BOLD}📊 SUMMARY{END}")
    for name, success in results:
        print(f"  {name:<20} {GREEN + '✅' if success else RED + '❌'}{END}")
    failed = sum(1 for _, success in results if not success)
    print(f"\n{BOLD}{len(results) - failed}/{len(results)} checks passed{END}")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
