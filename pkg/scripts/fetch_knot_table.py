"""Rebuild ``app/fixtures/knots.json`` from knot-table braid words.

Usage::

    python scripts/fetch_knot_table.py                       # bundled braid words
    python scripts/fetch_knot_table.py --source knotinfo.csv # a knot-table CSV export
    python scripts/fetch_knot_table.py --out /tmp/knots.json

The CSV needs the columns ``name``, ``braid_notation`` (``{1,-2,1,-2}``),
``three_genus`` and ``four_genus``; ``four_genus`` may be an interval such as
``[1,2]``, in which case the upper end is kept.

Matrices come from the Seifert surface of the braid closure: one disk per
strand and one band per crossing. Every pair of consecutive crossings on the
same generator bounds a loop, and linking numbers between these loops are read
off the word.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.core.config import get_settings  # noqa: E402
from app.core.errors import InputError  # noqa: E402
from app.services.seifert import SeifertMatrix, alexander, mirror, signature, validate  # noqa: E402

logger = logging.getLogger("fetch_knot_table")


@dataclass(frozen=True)
class BraidEntry:
    name: str
    word: tuple[int, ...]
    genus3: int
    g4_upper: int
    mirror: bool = False


# Knot-table braid words; 9_42 is stored as its mirror so that 10_82 # -9_42 is the
# algebraically slice pair.
BUNDLED = [
    BraidEntry("6_2", (-1, 2, -1, 2, 2, 2), 2, 1),
    BraidEntry("8_18", (1, -2, 1, -2, 1, -2, 1, -2), 3, 1),
    BraidEntry("9_40", (1, -2, 3, 1, -2, 3, 1, -2, 3), 3, 1),
    BraidEntry("9_42", (1, 1, 1, -2, -1, -1, 3, -2, 3), 2, 1, mirror=True),
    BraidEntry("10_82", (1, 1, 1, 1, -2, 1, -2, 1, -2, -2), 4, 1),
]


def _letter(g: int) -> str:
    return f"s{abs(g)}" + ("^-1" if g < 0 else "")


def _next_same_generator(word: tuple[int, ...]) -> list[int | None]:
    """For each crossing, the index of the next crossing on the same generator."""
    result: list[int | None] = []
    for i, g in enumerate(word):
        result.append(next((j for j in range(i + 1, len(word)) if abs(word[j]) == abs(g)), None))
    return result


def braid_seifert_matrix(word: tuple[int, ...]) -> list[list[int]]:
    """Seifert matrix of the canonical surface of the closure of ``word``."""
    if not word or any(g == 0 for g in word):
        raise InputError(f"bad braid word {word}")
    nxt = _next_same_generator(word)
    loops = [i for i, j in enumerate(nxt) if j is not None]
    index = {i: k for k, i in enumerate(loops)}
    n = len(loops)
    m = [[0] * n for _ in range(n)]

    for i in loops:
        hi = nxt[i]
        assert hi is not None
        for j in loops:
            if j < i:
                continue
            hj = nxt[j]
            assert hj is not None
            a, b = index[i], index[j]
            if i == j:
                s = word[i] + word[hi]
                m[a][a] = -1 if s > 0 else (1 if s < 0 else 0)
            elif hi > hj or hi < j:
                continue
            elif hi == j:
                # consecutive loops on one generator share the band at j
                if word[j] > 0:
                    m[b][a] = 1
                else:
                    m[a][b] = -1
            elif abs(word[i]) - abs(word[j]) == 1:
                m[b][a] = -1
            elif abs(word[j]) - abs(word[i]) == 1:
                m[a][b] = 1
    return m


def _parse_braid(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in re.findall(r"-?\d+", text))


def _upper(text: str) -> int:
    values = [int(x) for x in re.findall(r"\d+", text)]
    if not values:
        raise InputError(f"no genus value in {text!r}")
    return max(values)


def read_csv(path: Path, names: set[str]) -> list[BraidEntry]:
    entries = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["name"] not in names:
                continue
            entries.append(
                BraidEntry(
                    row["name"],
                    _parse_braid(row["braid_notation"]),
                    _upper(row["three_genus"]),
                    _upper(row["four_genus"]),
                    mirror=row["name"] == "9_42",
                )
            )
    missing = names - {e.name for e in entries}
    if missing:
        raise InputError(f"{path}: missing knots {sorted(missing)}")
    return entries


def build_record(entry: BraidEntry) -> dict:
    v = validate(braid_seifert_matrix(entry.word))
    if entry.mirror:
        v = mirror(v)
    word = " ".join(_letter(g) for g in entry.word)
    notes = f"{'mirror of the ' if entry.mirror else ''}braid closure of {word}"
    logger.info("%s: %dx%d, Delta = %s, signature %d", entry.name, v.size, v.size, alexander(v), signature(v))
    return {
        "name": entry.name,
        "seifert_matrix": v.to_list(),
        "genus3": entry.genus3,
        "g4_upper": entry.g4_upper,
        "notes": notes,
    }


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--source", type=Path, help="knot-table CSV export")
    parser.add_argument("--out", type=Path, default=get_settings().knots_file)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    try:
        entries = read_csv(args.source, {e.name for e in BUNDLED}) if args.source else BUNDLED
        records = [build_record(e) for e in entries]
    except (InputError, OSError, KeyError) as exc:
        logger.error("%s", exc)
        return 1
    args.out.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %d records to %s", len(records), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
