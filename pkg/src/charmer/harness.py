"""Batch evaluation: dataset ingestion, metrics, transcripts and reports.

Transcripts are JSON Lines, one object per record, written as produced so a
crash loses at most the record in flight. Reports keep all timing statistics
under a single ``timing`` key so seeded reruns can be compared byte-for-byte
on the remainder (see ``report_body``).

Attack success rate (ASR) uses as denominator only the samples the clean
oracle classifies correctly; initially misclassified samples are skipped.
Edit-distance and similarity statistics average over successful attacks only.
The similarity column is normalized edit similarity, labeled ``edit_sim``
everywhere to avoid confusion with embedding-based similarity scores.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .attack import (
    AttackConfig,
    AttackOutcome,
    TraceStep,
    charmer_attack,
    exhaustive_k1,
    random_position_baseline,
)
from .classifier import BuiltinOracle
from .oracle import Oracle, OracleError, PairedOracle, cw_loss
from .pga import GradientUnavailableError, PgaConfig, pga_attack
from .sentence import XI, Alphabet, L_MAX, levenshtein

log = logging.getLogger("charmer")

TRANSCRIPT_SCHEMA = 1
REPORT_SCHEMA = 1

ATTACK_NAMES = ("charmer", "charmer-fast", "random", "exhaustive-k1", "pga")


class DatasetError(ValueError):
    pass


@dataclass
class DatasetRecord:
    id: str
    text: str
    label: int
    paired_text: Optional[str] = None


def _clean_text(raw: str, l_max: int, where: str) -> tuple[str, bool]:
    if XI in raw:
        raise DatasetError(f"{where}: text contains the reserved character U+0000")
    if len(raw) > l_max:
        return raw[:l_max], True
    return raw, False


def load_dataset(
    path,
    format: str = "jsonl",
    cap: Optional[int] = 1000,
    l_max: int = L_MAX,
) -> list[DatasetRecord]:
    """Read records in file order; ids default to the row index.

    Texts longer than ``l_max`` are truncated (a warning totals them up) and
    at most ``cap`` records are retained.
    """
    if format not in ("jsonl", "csv"):
        raise DatasetError(f"unknown dataset format: {format!r}")
    records: list[DatasetRecord] = []
    truncated = 0

    def add(row_no: int, obj: dict) -> None:
        nonlocal truncated
        where = f"{path}:{row_no}"
        if "text" not in obj or obj.get("text") in (None, ""):
            raise DatasetError(f"{where}: missing required field 'text'")
        if "label" not in obj or obj.get("label") in (None, ""):
            raise DatasetError(f"{where}: missing required field 'label'")
        try:
            label = int(obj["label"])
        except (TypeError, ValueError):
            raise DatasetError(f"{where}: label {obj['label']!r} is not an integer")
        if label < 0:
            raise DatasetError(f"{where}: label must be a nonnegative class index")
        text, was_truncated = _clean_text(str(obj["text"]), l_max, where)
        truncated += was_truncated
        paired = obj.get("paired_text")
        if paired is not None and paired != "":
            paired, pt = _clean_text(str(paired), l_max, where)
            truncated += pt
        else:
            paired = None
        rid = str(obj.get("id")) if obj.get("id") not in (None, "") else str(len(records))
        records.append(DatasetRecord(id=rid, text=text, label=label, paired_text=paired))

    with open(path, encoding="utf-8") as fh:
        if format == "jsonl":
            for row_no, line in enumerate(fh, start=1):
                if cap is not None and len(records) >= cap:
                    break
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(f"{path}:{row_no}: malformed JSON ({exc})")
                if not isinstance(obj, dict):
                    raise DatasetError(f"{path}:{row_no}: expected a JSON object")
                add(row_no, obj)
        else:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "text" not in reader.fieldnames:
                raise DatasetError(f"{path}: missing required column 'text'")
            if "label" not in reader.fieldnames:
                raise DatasetError(f"{path}: missing required column 'label'")
            for row_no, row in enumerate(reader, start=2):
                if cap is not None and len(records) >= cap:
                    break
                add(row_no, row)
    if truncated:
        log.warning("%d text field(s) truncated to %d characters", truncated, l_max)
    return records


def extract_alphabet(records: Sequence[DatasetRecord], test_char: str = " ") -> Alphabet:
    """Every scalar value occurring in any attackable text, sorted for a
    stable fingerprint."""
    if not records:
        raise DatasetError("cannot extract an alphabet from an empty record set")
    return Alphabet.from_texts((r.text for r in records), test_char=test_char)


def similarity(a: str, b: str) -> float:
    """Normalized edit similarity in [0, 1]; reported as ``edit_sim``."""
    return 1.0 - levenshtein(a, b) / max(len(a), len(b), 1)


def config_fingerprint(attack: str, config: AttackConfig, pga_config: Optional[PgaConfig]) -> str:
    payload = {
        "attack": attack,
        "n": config.n,
        "k": config.k,
        "constraints": sorted(
            name for name in config.constraints.FLAG_NAMES if getattr(config.constraints, name)
        ),
        "segments": config.segment_preselect,
        "budget": config.budget,
        "seed": config.seed,
        "alphabet": config.alphabet.fingerprint(),
    }
    if pga_config is not None:
        payload["pga"] = {
            "step_size": pga_config.step_size,
            "iterations": pga_config.iterations,
            "k": pga_config.k,
            "candidate_cap": pga_config.candidate_cap,
            "seed": pga_config.seed,
        }
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _outcome_from_exhaustive(oracle: Oracle, s: str, y: int, alphabet: Alphabet) -> AttackOutcome:
    import time

    from .oracle import CountingOracle

    counting = CountingOracle(oracle)
    start = time.perf_counter()
    adversarial, loss = exhaustive_k1(counting, s, y, alphabet)
    return AttackOutcome(
        original=s,
        adversarial=adversarial,
        success=loss >= 0,
        edits_used=levenshtein(s, adversarial),
        final_loss=loss,
        queries=counting.queries,
        elapsed=time.perf_counter() - start,
        trace=[TraceStep(position=None, char=None, loss=loss)],
    )


def run_attack_suite(
    records: Sequence[DatasetRecord],
    oracle: Oracle,
    attack: str,
    config: AttackConfig,
    pga_config: Optional[PgaConfig] = None,
    transcript_path=None,
) -> dict:
    """Attack every correctly-classified record and aggregate a report.

    One transcript line per record is appended as soon as it is produced.
    Oracle failures on individual samples are recorded and the suite
    continues.
    """
    if attack not in ATTACK_NAMES:
        raise ValueError(f"unknown attack {attack!r}; expected one of {ATTACK_NAMES}")
    if attack == "pga":
        if pga_config is None:
            pga_config = PgaConfig(k=min(config.k, 2), seed=config.seed)
        if not isinstance(oracle, BuiltinOracle):
            raise GradientUnavailableError("the pga attack needs a builtin oracle")

    fingerprint = config_fingerprint(attack, config, pga_config if attack == "pga" else None)
    alpha_fp = config.alphabet.fingerprint()

    out_fh = open(transcript_path, "a", encoding="utf-8") if transcript_path else None
    per_sample = []
    elapsed_all: list[float] = []
    dlev_ok: list[int] = []
    sim_ok: list[float] = []
    queries_total = 0
    skipped = successes = errors = 0

    try:
        for record in records:
            scoring = (
                PairedOracle(oracle, record.paired_text)
                if record.paired_text is not None
                else oracle
            )
            entry = {
                "schema": TRANSCRIPT_SCHEMA,
                "id": record.id,
                "original": record.text,
                "paired_text": record.paired_text,
                "config_fingerprint": fingerprint,
                "alphabet_fingerprint": alpha_fp,
                "error": None,
            }
            try:
                clean_loss = cw_loss(scoring.score_batch([record.text])[0], record.label)
                queries_total += 1
                entry["clean_loss"] = clean_loss
                if clean_loss >= 0:
                    skipped += 1
                    entry.update(
                        skipped=True,
                        adversarial=record.text,
                        success=False,
                        edits_used=0,
                        d_lev=0,
                        final_loss=clean_loss,
                        queries=0,
                        elapsed=0.0,
                        trace=[],
                    )
                else:
                    if attack in ("charmer", "charmer-fast"):
                        run_cfg = config
                        if attack == "charmer-fast" and config.n != 1:
                            run_cfg = AttackConfig(
                                alphabet=config.alphabet,
                                n=1,
                                k=config.k,
                                constraints=config.constraints,
                                segment_preselect=config.segment_preselect,
                                budget=config.budget,
                                seed=config.seed,
                            )
                        outcome = charmer_attack(scoring, record.text, record.label, run_cfg)
                    elif attack == "random":
                        outcome = random_position_baseline(
                            scoring, record.text, record.label, config
                        )
                    elif attack == "exhaustive-k1":
                        outcome = _outcome_from_exhaustive(
                            scoring, record.text, record.label, config.alphabet
                        )
                    else:  # pga
                        outcome = pga_attack(
                            oracle.classifier,
                            record.text,
                            record.label,
                            pga_config,
                            config.alphabet,
                        )
                    d_lev = levenshtein(record.text, outcome.adversarial)
                    queries_total += outcome.queries
                    elapsed_all.append(outcome.elapsed)
                    if outcome.success:
                        successes += 1
                        dlev_ok.append(d_lev)
                        sim_ok.append(similarity(record.text, outcome.adversarial))
                    entry.update(
                        skipped=False,
                        adversarial=outcome.adversarial,
                        success=outcome.success,
                        edits_used=outcome.edits_used,
                        d_lev=d_lev,
                        final_loss=outcome.final_loss
                        if outcome.final_loss is not None
                        else clean_loss,
                        queries=outcome.queries,
                        elapsed=outcome.elapsed,
                        trace=[[t.position, t.char, t.loss] for t in outcome.trace],
                    )
            except OracleError as exc:
                errors += 1
                entry.update(
                    skipped=False,
                    adversarial=record.text,
                    success=False,
                    edits_used=0,
                    d_lev=0,
                    final_loss=None,
                    queries=0,
                    elapsed=0.0,
                    trace=[],
                    error=f"{type(exc).__name__}: {exc}",
                )
                log.warning("record %s failed: %s", record.id, exc)

            if out_fh is not None:
                out_fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
                out_fh.flush()
            per_sample.append(
                {
                    "id": entry["id"],
                    "skipped": entry["skipped"],
                    "success": entry["success"],
                    "d_lev": entry["d_lev"],
                    "edit_sim": similarity(record.text, entry["adversarial"]),
                    "queries": entry["queries"],
                    "final_loss": entry["final_loss"],
                    "error": entry["error"],
                }
            )
    finally:
        if out_fh is not None:
            out_fh.close()

    attackable = len(records) - skipped - errors
    report = {
        "schema": REPORT_SCHEMA,
        "attack": attack,
        "config_fingerprint": fingerprint,
        "alphabet_fingerprint": alpha_fp,
        "counts": {
            "total": len(records),
            "skipped": skipped,
            "attackable": attackable,
            "successes": successes,
            "errors": errors,
        },
        "asr_percent": (100.0 * successes / attackable) if attackable else None,
        "mean_dlev": statistics.fmean(dlev_ok) if dlev_ok else None,
        "std_dlev": statistics.pstdev(dlev_ok) if dlev_ok else None,
        "mean_edit_sim": statistics.fmean(sim_ok) if sim_ok else None,
        "queries_total": queries_total,
        "note": None if attackable else "no attackable samples",
        "per_sample": per_sample,
        "timing": {
            "mean_time": statistics.fmean(elapsed_all) if elapsed_all else None,
            "std_time": statistics.pstdev(elapsed_all) if elapsed_all else None,
            "total_time": math.fsum(elapsed_all),
        },
    }
    return report


def report_body(report: dict) -> bytes:
    """Canonical report bytes with volatile timing information stripped."""
    stable = {k: v for k, v in report.items() if k != "timing"}
    return json.dumps(stable, sort_keys=True, ensure_ascii=False).encode("utf-8")
