"""Text-record serialization for every artifact the CLI reads or writes.

Evidence, specification reports, and classifications are line-oriented JSON
records (streamable from pipes); priors, partitions, and models are single
JSON documents.  Floats serialize via repr, which round-trips bit-exactly.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

from .core import BPA, Frame, make_bpa
from .metalevel import SpecificationReport
from .partition import Corpus, DomainPrior, Partition
from .prototypes import PrototypeModel, SubsetPrototypes

MODEL_FORMAT = "dsproto.model/1"


class ParseError(ValueError):
    def __init__(self, line: int | None, message: str):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


def _focal_labels(frame: Frame, focal, line: int) -> list[str]:
    if focal == "*":
        return list(frame.labels)
    if not isinstance(focal, list) or not all(isinstance(x, str) for x in focal):
        raise ParseError(line, "focal must be a list of labels or \"*\"")
    return focal


def _record_to_bpa(frame: Frame, rec: dict, line: int) -> BPA:
    if "id" not in rec or "masses" not in rec:
        raise ParseError(line, "evidence record needs 'id' and 'masses'")
    entries = []
    for item in rec["masses"]:
        if not isinstance(item, dict) or "focal" not in item or "mass" not in item:
            raise ParseError(line, "each mass entry needs 'focal' and 'mass'")
        entries.append((_focal_labels(frame, item["focal"], line), float(item["mass"])))
    try:
        return make_bpa(frame, entries, id=str(rec["id"]))
    except ValueError as exc:
        raise ParseError(line, str(exc)) from None


def iter_evidence(lines: Iterable[str], frame: Frame | None = None) -> Iterator[BPA]:
    """Yield BPAs from a line-oriented evidence stream.

    A leading {"frame": [...]} header declares the frame; without one the
    caller must supply a frame (e.g. the model's).
    """
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc}") from None
        if "frame" in rec and "id" not in rec:
            declared = Frame(tuple(rec["frame"]))
            if frame is not None and declared.labels != frame.labels:
                if not set(declared.labels) <= set(frame.labels):
                    raise ParseError(lineno, "declared frame not within expected frame")
            frame = declared
            continue
        if frame is None:
            raise ParseError(lineno, "no frame declared and none supplied")
        yield _record_to_bpa(frame, rec, lineno)


def load_corpus(lines: Iterable[str], frame: Frame | None = None) -> Corpus:
    bpas = list(iter_evidence(lines, frame))
    if not bpas:
        raise ParseError(None, "evidence file contains no records")
    return Corpus(bpas)


def write_evidence(fp: IO[str], corpus: Corpus) -> None:
    fp.write(json.dumps({"frame": list(corpus.frame.labels)}) + "\n")
    for m in corpus.bpas():
        fp.write(json.dumps(bpa_record(m), sort_keys=True) + "\n")


def bpa_record(m: BPA) -> dict:
    full = m.frame.full_mask
    masses = []
    for k, v in zip(m.keys, m.masses):
        k = int(k)
        focal = "*" if k == full else sorted(
            m.frame.labels_of(k), key=m.frame.labels.index
        )
        masses.append({"focal": focal, "mass": float(v)})
    rec = {"masses": masses}
    if m.id is not None:
        rec["id"] = m.id
    return rec


def load_prior(fp: IO[str]) -> DomainPrior:
    try:
        doc = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ParseError(None, f"invalid JSON in prior file: {exc}") from None
    if not isinstance(doc, dict) or "masses" not in doc:
        raise ParseError(None, "prior file needs a 'masses' list")
    try:
        return DomainPrior(tuple(doc["masses"]))
    except ValueError as exc:
        raise ParseError(None, str(exc)) from None


def write_prior(fp: IO[str], prior: DomainPrior) -> None:
    json.dump({"masses": list(prior.masses)}, fp)
    fp.write("\n")


def write_partition(fp: IO[str], partition: Partition, mcf: float) -> None:
    doc = {
        "mcf": mcf,
        "r": partition.r,
        "subsets": [
            {"ids": list(ids), "conflict": c}
            for ids, c in zip(partition.subsets, partition.conflicts)
        ],
    }
    json.dump(doc, fp, sort_keys=True)
    fp.write("\n")


def load_partition(fp: IO[str], corpus: Corpus) -> Partition:
    try:
        doc = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ParseError(None, f"invalid JSON in partition file: {exc}") from None
    try:
        subsets = [sub["ids"] for sub in doc["subsets"]]
        return Partition(corpus, subsets)
    except (KeyError, TypeError) as exc:
        raise ParseError(None, f"malformed partition file: {exc}") from None
    except ValueError as exc:
        raise ParseError(None, str(exc)) from None


def write_report(fp: IO[str], report: SpecificationReport) -> None:
    for row in report.rows:
        for j in range(report.n + 1):
            rec = {
                "id": row.evidence_id,
                "subset": j + 1,  # position n+1 is the fresh subset
                "bel": row.bel[j],
                "pls": row.pls[j],
                "alpha": row.alpha[j],
                "k_q": row.k_q,
            }
            fp.write(json.dumps(rec, sort_keys=True) + "\n")


def write_model(fp: IO[str], model: PrototypeModel) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "frame": list(model.frame.labels),
        "prior": list(model.prior.masses),
        "n": model.n,
        "N": model.budget,
        "subsets": [
            {
                "prototypes": list(sub.prototype_ids),
                "masses": bpa_record(sub.combined)["masses"],
                "conflict": sub.conflict,
            }
            for sub in model.subsets
        ],
    }
    json.dump(doc, fp, sort_keys=True)
    fp.write("\n")


def load_model(fp: IO[str]) -> PrototypeModel:
    try:
        doc = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ParseError(None, f"invalid JSON in model file: {exc}") from None
    if doc.get("format") != MODEL_FORMAT:
        raise ParseError(None, f"unknown model format {doc.get('format')!r}")
    frame = Frame(tuple(doc["frame"]))
    prior = DomainPrior(tuple(doc["prior"]))
    subsets = []
    for sub in doc["subsets"]:
        entries = [
            (_focal_labels(frame, item["focal"], 0), float(item["mass"]))
            for item in sub["masses"]
        ]
        combined = make_bpa(frame, entries)
        subsets.append(
            SubsetPrototypes(tuple(sub["prototypes"]), combined, float(sub["conflict"]))
        )
    return PrototypeModel(frame, prior, int(doc["n"]), int(doc["N"]), tuple(subsets))


def classification_record(result, timings: bool = False) -> dict:
    from .classifier import StreamItemError

    if isinstance(result, StreamItemError):
        return {"id": result.evidence_id, "error": result.message}
    rec = {
        "id": result.evidence_id,
        "outcome": result.outcome,
        "scores": list(result.scores),
        "threshold": result.threshold,
    }
    if result.subset is not None:
        rec["subset"] = result.subset + 1
    if timings:
        rec["micros"] = result.elapsed * 1e6
    return rec
