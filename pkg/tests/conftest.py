import sys
from pathlib import Path

# Make the shared oracle module importable from every test file.
sys.path.insert(0, str(Path(__file__).parent))

import acceptance_report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_report.LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in acceptance_report.LINES:
            terminalreporter.write_line(line)
