"""File formats: JSONL corpora, CSV feature matrices, JSON models/reports, provenance sidecars.

Every writer goes through :func:`atomic_write`, which writes a temporary
file next to the target and renames it into place.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from imbr.errors import FormatError
from imbr.knn import FeatureMatrix
from imbr.linear import NaiveBayesModel, SoftmaxModel
from imbr.text import Document, LabeledCorpus

MODEL_FORMAT = "imbr-model/1"
REPORT_FORMAT = "imbr-report/1"


def atomic_write(path, data):
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


# ---- corpus -----------------------------------------------------------------


def read_corpus(path):
    """Read a JSON Lines corpus; each object needs string ``text`` and ``label``."""
    docs = []
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise FormatError("invalid UTF-8", lineno) from None
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(obj, dict):
                raise FormatError("expected a JSON object", lineno)
            for key in ("text", "label"):
                if key not in obj:
                    raise FormatError(f"missing field {key!r}", lineno)
                if not isinstance(obj[key], str):
                    raise FormatError(f"field {key!r} must be a string", lineno)
            if not obj["label"]:
                raise FormatError("empty label", lineno)
            if not obj["text"]:
                raise FormatError("empty text", lineno)
            docs.append(Document(obj["text"], obj["label"]))
    return LabeledCorpus.from_pairs(docs)


def corpus_to_jsonl(corpus):
    lines = [json.dumps({"text": d.text, "label": d.label}, ensure_ascii=False) for d in corpus.documents]
    return "".join(line + "\n" for line in lines)


# ---- feature matrix CSV ----------------------------------------------------


def matrix_to_csv(matrix):
    """``label,f0,f1,...`` header; reals with 17 significant digits."""
    header = ",".join(["label"] + [f"f{j}" for j in range(matrix.dim)])
    lines = [header]
    for label, row in zip(matrix.labels.tolist(), matrix.rows):
        lines.append(",".join([str(label)] + ["%.17g" % v for v in row.tolist()]))
    return "\n".join(lines) + "\n"


def write_matrix(path, matrix):
    atomic_write(path, matrix_to_csv(matrix))


def read_matrix(path):
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\r\n").split(",")
        if len(header) < 2 or header[0] != "label" or header[1:] != [f"f{j}" for j in range(len(header) - 1)]:
            raise FormatError("header must be 'label,f0,f1,...'", 1)
        dim = len(header) - 1
        labels, rows = [], []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != dim + 1:
                raise FormatError(f"expected {dim + 1} fields, got {len(fields)}", lineno)
            try:
                labels.append(int(fields[0]))
                rows.append([float(v) for v in fields[1:]])
            except ValueError:
                raise FormatError("non-numeric field", lineno) from None
            if labels[-1] < 0:
                raise FormatError("class ids must be non-negative", lineno)
    rows = np.array(rows, dtype=float).reshape(len(labels), dim)
    if not np.all(np.isfinite(rows)):
        raise FormatError("non-finite feature value")
    return FeatureMatrix(rows, np.array(labels, dtype=np.int64))


# ---- provenance ------------------------------------------------------------


def provenance_to_jsonl(batches, n_original):
    """One record per synthetic row, in output row order."""
    out = []
    row = n_original
    for b in batches:
        for center, neighbor, draw in b.provenance:
            rec = {
                "row": row,
                "class_id": b.class_id,
                "algorithm": b.algorithm,
                "center": center,
                "neighbor": neighbor,
                "draw": draw,
            }
            out.append(json.dumps(rec, sort_keys=True))
            row += 1
    return "".join(line + "\n" for line in out)


def read_provenance(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


# ---- models ----------------------------------------------------------------


def _encode_floats(arr):
    # -inf log priors (classes absent from training) become null
    return [[None if np.isneginf(v) else float(v) for v in row] for row in np.atleast_2d(arr)]


def model_to_dict(model):
    if isinstance(model, SoftmaxModel):
        return {
            "format": MODEL_FORMAT,
            "kind": "softmax",
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
            "metadata": model.metadata,
        }
    if isinstance(model, NaiveBayesModel):
        return {
            "format": MODEL_FORMAT,
            "kind": "nb",
            "log_prior": _encode_floats(model.log_prior)[0],
            "log_likelihood": model.log_likelihood.tolist(),
            "alpha": model.alpha,
            "metadata": {},
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d):
    fmt = d.get("format") if isinstance(d, dict) else None
    if fmt != MODEL_FORMAT:
        raise FormatError(f"unknown model format {fmt!r}; expected {MODEL_FORMAT!r}")
    try:
        if d["kind"] == "softmax":
            return SoftmaxModel(np.array(d["weights"], dtype=float), np.array(d["bias"], dtype=float), d.get("metadata", {}))
        if d["kind"] == "nb":
            prior = np.array([-np.inf if v is None else v for v in d["log_prior"]], dtype=float)
            return NaiveBayesModel(prior, np.array(d["log_likelihood"], dtype=float), float(d["alpha"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model: {exc}") from None
    raise FormatError(f"unknown model kind {d.get('kind')!r}")


def save_model(path, model):
    atomic_write(path, dump_json(model_to_dict(model)))


def load_model(path):
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    return model_from_dict(d)


# ---- reports ---------------------------------------------------------------


def report_document(runs, **meta):
    """Wrap evaluated runs into the versioned report object.

    ``runs`` holds dicts with ``block`` (classifier display name),
    ``setting`` (resampler display name), ``classifier``, ``resampler`` and
    an ``EvalReport`` under ``report``.
    """
    doc = {"format": REPORT_FORMAT}
    doc.update(meta)
    doc["runs"] = [
        {
            "block": r["block"],
            "setting": r["setting"],
            "classifier": r["classifier"],
            "resampler": r["resampler"],
            "metrics": r["report"].to_dict(),
        }
        for r in runs
    ]
    return doc


def load_report(path):
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(d, dict) or d.get("format") != REPORT_FORMAT:
        raise FormatError(f"{path}: not an {REPORT_FORMAT} document")
    return d


def report_schema():
    from importlib import resources

    return json.loads(resources.files("imbr.data").joinpath("report.schema.json").read_text(encoding="utf-8"))
