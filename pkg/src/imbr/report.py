"""Results tables: one block per classifier, one row per oversampling setting."""

import csv
import io

from imbr.evaluate import METRIC_COLUMNS

SETTING_ORDER = ("Original dataset", "SMOTE", "Geometric-SMOTE", "ADASYN")


def _ordered(rows):
    """Group rows by block (first-seen order) and sort settings in the usual order."""
    blocks = {}
    for block, setting, values in rows:
        blocks.setdefault(block, []).append((setting, tuple(values)))
    rank = {s: i for i, s in enumerate(SETTING_ORDER)}
    for block, entries in blocks.items():
        entries.sort(key=lambda e: rank.get(e[0], len(rank)))
    return blocks


def render_text(rows, digits=2):
    """Aligned plain-text table.

    ``rows`` is an iterable of ``(block, setting, (accuracy, precision, recall, f1))``.
    """
    blocks = _ordered(rows)
    labels = [b for b in blocks] + [s for entries in blocks.values() for s, _ in entries]
    label_w = max(len(x) for x in labels) if labels else 0
    col_w = [max(len(c), digits + 2) for c in METRIC_COLUMNS]
    rule = "-" * (label_w + sum(w + 2 for w in col_w))
    out = []
    for block, entries in blocks.items():
        out.append(rule)
        out.append(block.ljust(label_w) + "".join("  " + c.rjust(w) for c, w in zip(METRIC_COLUMNS, col_w)))
        out.append(rule)
        for setting, values in entries:
            cells = [f"{v:.{digits}f}" for v in values]
            out.append(setting.ljust(label_w) + "".join("  " + c.rjust(w) for c, w in zip(cells, col_w)))
    if out:
        out.append(rule)
    return "\n".join(out) + "\n"


def render_csv(rows, digits=2):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["block", "setting", *METRIC_COLUMNS])
    for block, entries in _ordered(rows).items():
        for setting, values in entries:
            writer.writerow([block, setting, *(f"{v:.{digits}f}" for v in values)])
    return buf.getvalue()


def rows_from_report(doc):
    """Table rows from a report document (see ``imbr.io.report_document``)."""
    out = []
    for run in doc["runs"]:
        m = run["metrics"]
        out.append(
            (
                run["block"],
                run["setting"],
                (m["accuracy"], m["macro"]["precision"], m["macro"]["recall"], m["macro"]["f1"]),
            )
        )
    return out


def render_distribution(dist):
    """Instances / percentage table, largest class first, percentages to 2 decimals."""
    items = sorted(dist.items(), key=lambda kv: (-kv[1][0], kv[0]))
    name_w = max([len("Category")] + [len(k) for k, _ in items])
    total = sum(n for _, (n, _) in items)
    lines = [f"{'Category'.ljust(name_w)}  {'Instances':>9}  {'Percentage':>10}"]
    for name, (n, pct) in items:
        lines.append(f"{name.ljust(name_w)}  {n:>9,}  {pct:>9.2f}%")
    lines.append(f"{'Total'.ljust(name_w)}  {total:>9,}")
    return "\n".join(lines) + "\n"
