"""Reading survey, grouped and scenario files; writing result tables.

Input files are UTF-8 CSV (or TSV, detected from a ``.tsv`` suffix or a tab
in the header line) with a header row.  Line numbers in error messages
count the header as line 1.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from collections import Counter
from io import StringIO

from .errors import ParseError, SchemaError, ValidationError
from .grouped import GroupedSummary
from .scenario import Scenario
from .survey import SurveyDataset

log = logging.getLogger(__name__)

MICRODATA_COLUMNS = ("stratum", "psu", "weight", "group", "outcome")
GROUPED_COLUMNS = ("group", "size", "mean")
SCENARIO_COLUMNS = ("scenario", "group", "size", "mean")

# fixed column order for emitted rows; unknown keys follow in insertion order
RESULT_FIELDS = (
    "scenario",
    "family",
    "scheme",
    "alpha",
    "reference",
    "estimate",
    "abs_change",
    "rel_change",
    "se",
    "method",
    "n_reps",
    "seed",
    "null_mean",
    "null_sd",
    "overlap",
    "replicates_path",
)
SIGNIFICANT_DIGITS = 12


def _rows(path, required):
    """Yield ``(line_number, row_dict)`` for a delimited file with the required columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise SchemaError("file is empty (no header row)", line=1)
        delimiter = "\t" if (str(path).endswith(".tsv") or "\t" in header_line) else ","
        header = [h.strip().lower() for h in next(csv.reader([header_line], delimiter=delimiter))]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"missing column(s): {', '.join(missing)}", line=1)
        reader = csv.reader(fh, delimiter=delimiter)
        for offset, fields in enumerate(reader):
            line = offset + 2
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(fields)}", line=line)
            row = {h: f.strip() for h, f in zip(header, fields)}
            for c in required:
                if row[c] == "":
                    raise ParseError(f"missing value for {c!r}", line=line)
            yield line, row


def _number(text, column, line):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{column} {text!r} is not a number", line=line)
    if not math.isfinite(value):
        raise ValidationError(f"{column} must be finite, got {text!r}", line=line)
    return value


def _proportion(text, column, line):
    if text.endswith("%"):
        return _number(text[:-1].strip(), column, line) / 100.0
    return _number(text, column, line)


def ingest_microdata(path):
    """Read individual survey records into a :class:`SurveyDataset`.

    Required columns are ``stratum, psu, weight, group, outcome``; extra
    columns are ignored.

    Raises
    ------
    SchemaError
        If the file is empty or a required column is absent.
    ParseError
        For ragged rows, empty fields or non-numeric weights/outcomes.
    ValidationError
        For a nonpositive weight or negative outcome, citing the line.
    """
    cols = {c: [] for c in MICRODATA_COLUMNS}
    for line, row in _rows(path, MICRODATA_COLUMNS):
        w = _number(row["weight"], "weight", line)
        y = _number(row["outcome"], "outcome", line)
        if w <= 0:
            raise ValidationError(f"weight must be positive, got {row['weight']}", line=line)
        if y < 0:
            raise ValidationError(f"outcome must be nonnegative, got {row['outcome']}", line=line)
        cols["stratum"].append(row["stratum"])
        cols["psu"].append(row["psu"])
        cols["weight"].append(w)
        cols["group"].append(row["group"])
        cols["outcome"].append(y)
    if not cols["weight"]:
        raise SchemaError("file has a header but no records")
    d = SurveyDataset(cols["stratum"], cols["psu"], cols["weight"], cols["group"], cols["outcome"])
    counts = Counter(cols["group"])
    log.info(
        "read %d records from %s; group counts: %s",
        len(d),
        path,
        ", ".join(f"{g}={counts[g]}" for g in d.groups),
    )
    return d


def ingest_grouped(path):
    """Read ``group, size, mean`` rows into a :class:`GroupedSummary`.

    Means may be proportions (``0.5``) or percents (``50%``).
    """
    labels, sizes, means, lines = [], [], [], {}
    for line, row in _rows(path, GROUPED_COLUMNS):
        g = row["group"]
        if g in lines:
            raise ValidationError(f"duplicate group label {g!r} (first on line {lines[g]})", line=line)
        lines[g] = line
        size = _number(row["size"], "size", line)
        mean = _proportion(row["mean"], "mean", line)
        if size <= 0:
            raise ValidationError(f"size must be positive, got {row['size']}", line=line)
        if mean < 0:
            raise ValidationError(f"mean must be nonnegative, got {row['mean']}", line=line)
        labels.append(g)
        sizes.append(size)
        means.append(mean)
    if not labels:
        raise SchemaError("file has a header but no groups")
    return GroupedSummary(tuple(labels), sizes, means)


def ingest_scenarios(path, baseline=None):
    """Read a long-format scenario file (``scenario, group, size, mean``).

    Returns ``(baseline, others)``.  The baseline is the scenario named
    ``baseline`` or, when that is None, the first scenario in the file.
    Every scenario must list the same groups as the first one.
    """
    order, rows = [], {}
    for line, row in _rows(path, SCENARIO_COLUMNS):
        name = row["scenario"]
        if name not in rows:
            order.append(name)
            rows[name] = {}
        g = row["group"]
        if g in rows[name]:
            raise ValidationError(f"group {g!r} listed twice for scenario {name!r}", line=line)
        size = _number(row["size"], "size", line)
        if size <= 0:
            raise ValidationError(f"size must be positive, got {row['size']}", line=line)
        mean = _proportion(row["mean"], "mean", line)
        if not (0.0 <= mean <= 1.0):
            raise ValidationError(f"rate must lie in [0, 1], got {row['mean']}", line=line)
        rows[name][g] = (size, mean)
    if not order:
        raise SchemaError("file has a header but no scenario rows")
    groups = tuple(rows[order[0]])
    scenarios = []
    for name in order:
        if set(rows[name]) != set(groups):
            raise ValidationError(f"scenario {name!r} does not list the same groups as {order[0]!r}")
        sizes = [rows[name][g][0] for g in groups]
        rates = [rows[name][g][1] for g in groups]
        scenarios.append(Scenario(name, sizes, rates, groups))
    base_name = order[0] if baseline is None else baseline
    if base_name not in rows:
        raise ValidationError(f"baseline scenario {base_name!r} not found in {path}")
    base = scenarios[order.index(base_name)]
    return base, [s for s in scenarios if s is not base]


def write_grouped(g, path):
    """Write a :class:`GroupedSummary` as ``group, size, mean`` CSV.

    Numbers are written with ``repr`` so re-reading gives the same floats.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GROUPED_COLUMNS)
        for label, n, y in zip(g.group_labels, g.sizes, g.means):
            w.writerow([label, repr(float(n)), repr(float(y))])


def _round(x):
    if isinstance(x, bool) or not isinstance(x, float):
        return x
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def _text(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{SIGNIFICANT_DIGITS}g}"
    return str(x)


def _columns(rows):
    seen = {k for r in rows for k in r}
    cols = [f for f in RESULT_FIELDS if f in seen]
    for r in rows:
        cols += [k for k in r if k not in cols]
    return cols


def format_results(rows, fmt):
    """Render result rows as JSON or CSV text.

    JSON is a list with one object per row, keys that are None omitted.
    Floats carry 12 significant digits in both formats.
    """
    if fmt == "json":
        cols = _columns(rows)
        objs = [{c: _round(r[c]) for c in cols if r.get(c) is not None} for r in rows]
        return json.dumps(objs, indent=2) + "\n"
    if fmt == "csv":
        buf = StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = _columns(rows)
        w.writerow(cols)
        for r in rows:
            w.writerow([_text(r.get(c)) for c in cols])
        return buf.getvalue()
    raise ValidationError(f"unknown output format {fmt!r} (expected json or csv)")


def emit_results(rows, fmt, path=None, stream=None):
    """Write result rows to ``path``, or to ``stream`` when no path is given."""
    text = format_results(rows, fmt)
    if path is None:
        stream.write(text)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def replicates_sidecar_path(out_path):
    root, _ = os.path.splitext(out_path)
    return root + ".replicates.csv"


def write_replicates(path, series):
    """Write replicate vectors in long form for box plots.

    ``series`` is a list of ``(key_dict, values)`` pairs; every key dict
    must have the same keys.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not series:
            w.writerow(["replicate", "value"])
            return
        keys = list(series[0][0])
        w.writerow(keys + ["replicate", "value"])
        for key, values in series:
            for r, v in enumerate(values):
                w.writerow([_text(key[k]) for k in keys] + [r, _text(float(v))])
