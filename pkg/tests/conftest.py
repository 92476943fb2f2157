import numpy as np
from hypothesis import strategies as st

import hdi.grouped as hg

# four-group example baseline rates, equal group sizes
EXAMPLE_RATES = (0.5, 0.4, 0.3, 0.1)

# frozen from tests/oracles/example_oracle.py (mpmath, 50 digits)
EXAMPLE_MLD = 0.15506885578612094601
EXAMPLE_TI = 0.12043760924715337682
EXAMPLE_STI = 0.13775323251663716142
EXAMPLE_ATKINSON_1 = 0.1436437896265413532
EXAMPLE_SSRI_1 = 0.12868632289767213269

positive = st.floats(min_value=0.01, max_value=50.0, allow_nan=False, allow_infinity=False)


@st.composite
def mass_pairs(draw, min_size=2, max_size=8):
    m = draw(st.integers(min_size, max_size))
    p = draw(st.lists(positive, min_size=m, max_size=m))
    q = draw(st.lists(positive, min_size=m, max_size=m))
    return np.array(p), np.array(q)


@st.composite
def grouped_summaries(draw, min_size=2, max_size=7):
    m = draw(st.integers(min_size, max_size))
    sizes = draw(st.lists(st.floats(0.5, 1e4), min_size=m, max_size=m))
    means = draw(st.lists(st.floats(0.01, 0.99), min_size=m, max_size=m))
    return hg.GroupedSummary(tuple(f"g{k}" for k in range(m)), sizes, means)


def random_summary(rng, m=None):
    m = m or int(rng.integers(2, 8))
    return hg.GroupedSummary(
        tuple(f"g{k}" for k in range(m)),
        rng.uniform(1.0, 1000.0, m),
        rng.uniform(0.02, 0.9, m),
    )


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def write_microdata(d, path, sep=","):
    """Write a SurveyDataset as a microdata file the CLI can read."""
    lines = [sep.join(("stratum", "psu", "weight", "group", "outcome"))]
    for row in zip(d.stratum, d.psu, d.weight, d.group, d.outcome):
        s, c, w, g, y = row
        lines.append(sep.join((s, c, repr(float(w)), g, repr(float(y)))))
    path.write_text("\n".join(lines) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = rep.nodeid.rpartition("::")[2]
            if rep.when == "call" and name.startswith("test_criterion_"):
                n = int(name.split("_")[2])
                lines.append((n, f"criterion {n:2d} {name[18:]}: {'PASS' if outcome == 'passed' else 'FAIL'}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
