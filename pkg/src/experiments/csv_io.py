"""
CSV Output - Bit-stable result files.

Every file starts with ``#`` comment lines: a version stamp, the config
echo and the seeds. Floats are printed with CSV_SIGNIFICANT_DIGITS
significant digits, so identical runs give identical bytes. Files are
written to a temporary sibling and renamed into place; a failed write
leaves no partial file. Modes that write several files stage them in a
hidden directory first, so a failure leaves none of the set behind.
"""

import csv
import io
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

import numpy as np

from ..core.settings import CSV_COLUMNS, CSV_SIGNIFICANT_DIGITS, PROJECT_NAME, VERSION
from ..learning.analysis import max_abs_deviation
from ..learning.theory import Trajectory

logger = logging.getLogger(__name__)

_FLOAT_FORMAT = f"{{:.{CSV_SIGNIFICANT_DIGITS}g}}"


def format_value(value: Any) -> str:
    """Render one CSV field."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FORMAT.format(float(value))
    return str(value)


def header_lines(echo: Mapping[str, Any], seeds: Sequence[int] = ()) -> List[str]:
    """Comment lines opening every output file."""
    lines = [f"# {PROJECT_NAME} {VERSION}"]
    lines.extend(f"# {key} = {format_value(value)}" for key, value in echo.items())
    if seeds:
        lines.append("# seeds = " + ",".join(str(seed) for seed in seeds))
    return lines


def render(header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence[Any]],
           footer: Sequence[str] = ()) -> str:
    """Assemble a whole CSV document as text."""
    buffer = io.StringIO()
    for line in header:
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    for line in footer:
        buffer.write(line + "\n")
    return buffer.getvalue()


def atomic_write(path: Path, text: str) -> Path:
    """Write text to path through a temporary sibling and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    logger.info(f"wrote {path}")
    return path


@contextmanager
def staged_output(out_dir: Path) -> Iterator[Path]:
    """
    Yield a staging directory inside out_dir for a set of files.

    When the block completes every staged file is renamed into out_dir.
    If it raises, nothing is moved. The staging directory is removed
    either way.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        yield staging
        staged = sorted(staging.iterdir())
        for path in staged:
            os.replace(path, out_dir / path.name)
        logger.info(f"moved {len(staged)} files into {out_dir}")
    finally:
        shutil.rmtree(staging, ignore_errors=True)


# =============================================================================
# FILE KINDS
# =============================================================================

def write_trajectory(path: Path, trajectory: Trajectory, header: Sequence[str],
                     std: Optional[np.ndarray] = None) -> Path:
    """
    Trajectory CSV with columns t, R_B, R_J, R_BJ, l_B, l_J, eg_B, eg_J.

    With std given (one row per record, columns after t) the matching
    ``<column>_std`` columns are appended.
    """
    columns = list(CSV_COLUMNS)
    rows = [record.row() for record in trajectory.records]
    if std is not None:
        columns += [f"{name}_std" for name in CSV_COLUMNS[1:]]
        rows = [row + list(spread) for row, spread in zip(rows, std)]
    return atomic_write(path, render(header, columns, rows))


def compare_table(theory: Trajectory, simulation: Trajectory,
                  columns: Sequence[str]) -> List[List[float]]:
    """Rows t, then (theory, sim, |dev|) per column, over shared record times."""
    sim_times = simulation.times()
    rows = []
    for record in theory.records:
        matches = np.flatnonzero(np.abs(sim_times - record.t) <= 1e-9)
        if matches.size == 0:
            continue
        other = simulation.records[int(matches[0])]
        theory_row = dict(zip(CSV_COLUMNS, record.row()))
        sim_row = dict(zip(CSV_COLUMNS, other.row()))
        row = [record.t]
        for name in columns:
            row += [theory_row[name], sim_row[name], abs(theory_row[name] - sim_row[name])]
        rows.append(row)
    return rows


def write_compare(path: Path, theory: Trajectory, simulation: Trajectory,
                  header: Sequence[str]) -> Dict[str, float]:
    """
    Joined theory/simulation CSV with a ``# max_abs_dev`` footer.

    Returns:
        Maximum absolute deviation per column
    """
    names = list(CSV_COLUMNS[1:])
    columns = ["t"]
    for name in names:
        columns += [f"{name}_theory", f"{name}_sim", f"{name}_dev"]
    deviations = max_abs_deviation(theory, simulation, names)
    footer = ["# max_abs_dev " + " ".join(f"{name}={format_value(deviations[name])}"
                                          for name in names)]
    atomic_write(path, render(header, columns, compare_table(theory, simulation, names), footer))
    return deviations


AVERAGES_CHECK_COLUMNS = (
    "state", "R_B", "R_J", "R_BJ", "average",
    "closed_form", "oracle", "standard_error", "band", "deviation", "pass",
)


def write_averages_check(path: Path, rows: Iterable[Sequence[Any]],
                         header: Sequence[str]) -> Path:
    """Closed-form versus oracle table, nine rows per checked state."""
    return atomic_write(path, render(header, AVERAGES_CHECK_COLUMNS, rows))


def read_rows(path: Path) -> List[Dict[str, str]]:
    """Data rows of a CSV written here, comment lines skipped."""
    with open(path, encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))
