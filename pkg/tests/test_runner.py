#!/usr/bin/env python3
"""
Test runner for the GPU cluster scheduling simulator

Runs the unit and integration suites with a summary report, optional
coverage, and the congested-trace acceptance comparison on its own on request.
"""

import argparse
import sys
import time
import unittest
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

TEST_DIR = Path(__file__).parent
ACCEPTANCE_CLASS = "test_integration.TestCongestedTrace"
DEPENDENCIES = (
    ("numpy", "workload generation, timers and percentiles"),
    ("jinja2", "HTML run report"),
)

OUTCOME_COLORS = {"OK": "32", "FAIL": "31", "ERROR": "31", "SKIPPED": "33"}
OUTCOME_MARKS = {"OK": ".", "FAIL": "F", "ERROR": "E", "SKIPPED": "S"}


class ColoredTestResult(unittest.TextTestResult):
    """Text result that colours each outcome when writing to a terminal"""

    def __init__(self, stream, descriptions, verbosity):
        super().__init__(stream, descriptions, verbosity)
        self.use_colors = hasattr(stream, "isatty") and stream.isatty()
        # the base class would print its own marks; ours replace them
        self.showAll = False
        self.dots = False
        self.level = verbosity

    def _report(self, outcome, detail=""):
        text = f"{outcome}: {detail}" if detail else outcome
        if self.level >= 2:
            self.stream.writeln(self._paint(outcome, text))
        elif self.level == 1:
            self.stream.write(self._paint(outcome, OUTCOME_MARKS[outcome]))
            self.stream.flush()

    def _paint(self, outcome, text):
        if not self.use_colors:
            return text
        return f"\033[{OUTCOME_COLORS[outcome]}m{text}\033[0m"

    def startTest(self, test):
        super().startTest(test)
        if self.level >= 2:
            self.stream.write(f"{test.id()} ... ")
            self.stream.flush()

    def addSuccess(self, test):
        super().addSuccess(test)
        self._report("OK")

    def addFailure(self, test, err):
        super().addFailure(test, err)
        self._report("FAIL")

    def addError(self, test, err):
        super().addError(test, err)
        self._report("ERROR")

    def addSkip(self, test, reason):
        super().addSkip(test, reason)
        self._report("SKIPPED", reason)


def make_runner(verbosity=2):
    return unittest.TextTestRunner(stream=sys.stdout, verbosity=verbosity,
                                   resultclass=ColoredTestResult, buffer=True)


def discover(pattern="test_*.py"):
    return unittest.TestLoader().discover(str(TEST_DIR), pattern=pattern, top_level_dir=str(TEST_DIR))


def load_named(name):
    """Load a module, class or method by dotted name relative to tests/"""
    try:
        return unittest.TestLoader().loadTestsFromName(name)
    except (ImportError, AttributeError) as e:
        print(f"Could not load {name}: {e}")
        return unittest.TestSuite()


def check_dependencies():
    print("Dependencies:")
    missing = []
    for module, purpose in DEPENDENCIES:
        try:
            __import__(module)
            print(f"  ✓ {module} ({purpose})")
        except ImportError:
            print(f"  ✗ {module} ({purpose})")
            missing.append(module)
    if missing:
        print(f"Install with: pip install {' '.join(missing)}")
    return not missing


def print_summary(result, duration):
    run = result.testsRun
    bad = len(result.failures) + len(result.errors)
    skipped = len(result.skipped)
    passed = run - bad - skipped

    print("\n" + "=" * 70)
    print(f"Ran {run} tests in {duration:.2f} s: {passed} passed, "
          f"{len(result.failures)} failed, {len(result.errors)} errors, {skipped} skipped")
    for title, entries in (("FAILURES", result.failures), ("ERRORS", result.errors)):
        if entries:
            print(f"\n{title}:")
            for test, trace in entries:
                print(f"\n{test.id()}\n{trace}")
    if skipped:
        print("\nSKIPPED:")
        for test, reason in result.skipped:
            print(f"  {test.id()}: {reason}")


def run_suite(suite, verbosity=2):
    start = time.time()
    result = make_runner(verbosity).run(suite)
    print_summary(result, time.time() - start)
    return result


def run_with_coverage(verbosity):
    try:
        import coverage
    except ImportError:
        print("coverage is not installed; running without it")
        return run_suite(discover(), verbosity)

    cov = coverage.Coverage(source=[str(project_root)], omit=[str(TEST_DIR / "*")])
    cov.start()
    result = run_suite(discover(), verbosity)
    cov.stop()
    cov.save()
    cov.report(show_missing=True)
    html_dir = TEST_DIR / "coverage_html"
    cov.html_report(directory=str(html_dir))
    print(f"\nHTML coverage report: {html_dir}")
    return result


def main():
    parser = argparse.ArgumentParser(description="Run the simulator test suite")
    parser.add_argument("--verbose", "-v", action="count", default=1,
                        help="Increase verbosity (-vv lists every test)")
    parser.add_argument("--coverage", action="store_true", help="Measure coverage")
    parser.add_argument("--integration", action="store_true", help="Run integration tests only")
    parser.add_argument("--acceptance", action="store_true",
                        help="Run the congested-trace acceptance comparison only")
    parser.add_argument("--module", help="Dotted module, e.g. test_core.test_engine")
    parser.add_argument("--class", dest="test_class",
                        help="Dotted class, e.g. test_scheduler.test_dally.TestOnResourceOffer")
    parser.add_argument("--pattern", default="test_*.py", help="Discovery pattern")
    args = parser.parse_args()

    print("=" * 70)
    print("GPU CLUSTER SCHEDULING SIMULATOR - TEST SUITE")
    print("=" * 70)
    check_dependencies()

    try:
        if args.acceptance:
            result = run_suite(load_named(ACCEPTANCE_CLASS), args.verbose)
        elif args.module or args.test_class:
            result = run_suite(load_named(args.module or args.test_class), args.verbose)
        elif args.integration:
            result = run_suite(discover("test_integration*.py"), args.verbose)
        elif args.coverage:
            result = run_with_coverage(args.verbose)
        else:
            result = run_suite(discover(args.pattern), args.verbose)
    except KeyboardInterrupt:
        print("\nInterrupted")
        return 1
    return 0 if result.wasSuccessful() else 1


if __name__ == "__main__":
    sys.exit(main())
