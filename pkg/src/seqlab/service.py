"""HTTP annotation service: the human-in-the-loop side of the active
learning loop.

The service wraps the same round state machine the simulator drives, so a
human annotator submitting the same labels as the simulated oracle yields
bit-identical ensembles.  Session state is persisted after every mutation;
a killed process resumes mid-round because round seeds are derived from the
round counter, not from streamed RNG state.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import replace
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .active import ActiveLearner, ALConfig, CurveRow, LearningCurve, Pool, make_pool
from .corpus import Corpus, Sentence
from .errors import ConfigError

STATE_VERSION = 1


class LabelSubmission(BaseModel):
    sentence_id: str
    labels: list[str]


class AnnotationSession:
    """Persistent annotation session over an ActiveLearner."""

    def __init__(self, source: Corpus, test: Corpus, config: ALConfig,
                 state_path: str):
        self.source = source
        self.test = test
        self.config = config
        self.state_path = state_path
        self.lock = threading.Lock()
        self.audit: list[dict] = []
        if os.path.exists(state_path):
            self._restore()
        else:
            pool = make_pool(source, config.initial_seed_count)
            self.learner = ActiveLearner(pool, config, test)
            self.persist()

    # -- persistence -------------------------------------------------------

    def persist(self) -> None:
        lr = self.learner
        state = {
            "version": STATE_VERSION,
            "round": lr.t,
            "labeled": [{"id": s.id, "labels": list(s.gold_labels)}
                        for s in lr.labeled],
            "weights": lr.weights,
            "unlabeled_ids": [s.id for s in lr.unlabeled],
            "pending": [{"id": s.id, "labels": labels}
                        for s, labels in lr._pending],
            "curve": [{"round": r.round, "labeled_count": r.labeled_count,
                       "decoder": r.decoder, "reweight": r.reweight,
                       "selection": r.selection, "micro_f1": r.micro_f1,
                       "per_type_f1": r.per_type_f1, "seconds": r.seconds}
                      for r in lr.curve.rows],
            "audit": self.audit,
            "last_f1": lr.last_f1,
        }
        tmp = self.state_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(state, f)
        os.replace(tmp, self.state_path)

    def _restore(self) -> None:
        with open(self.state_path, encoding="utf-8") as f:
            state = json.load(f)
        if state["version"] > STATE_VERSION:
            raise ConfigError(
                f"session state version {state['version']} is newer than "
                f"supported version {STATE_VERSION}")
        by_id = {s.id: s for s in self.source}
        labeled = []
        for entry in state["labeled"]:
            src = by_id[entry["id"]]
            tokens = tuple(replace(t, gold=lab)
                           for t, lab in zip(src.tokens, entry["labels"]))
            labeled.append(Sentence(tokens, src.id))
        unlabeled = [by_id[i].without_gold() for i in state["unlabeled_ids"]]
        pool = Pool(labeled, state["weights"], unlabeled)
        lr = ActiveLearner(pool, self.config, self.test)
        lr.weights = list(state["weights"])
        lr.t = state["round"]
        lr.last_f1 = state["last_f1"]
        lr.curve = LearningCurve([CurveRow(**row) for row in state["curve"]])
        un_by_id = {s.id: s for s in lr.unlabeled}
        lr._pending = [(un_by_id[p["id"]], p["labels"])
                       for p in state["pending"]]
        self.audit = state["audit"]
        self.learner = lr

    # -- protocol operations ----------------------------------------------

    def status(self) -> dict:
        lr = self.learner
        return {"round": lr.t, "labeled": len(lr.labeled),
                "unlabeled": len(lr.unlabeled), "last_f1": lr.last_f1}

    def next_query(self) -> Optional[dict]:
        with self.lock:
            query = self.learner.next_query()
            if query is None:
                self.persist()
                return None
            sentence, utility = query
            suggestions, marginals = self.learner.suggest(sentence)
            self.persist()  # training may have appended a curve row
            return {
                "sentence_id": sentence.id,
                "tokens": [{"surface": tok.surface, "suggestion": sug,
                            "marginals": marg}
                           for tok, sug, marg in zip(sentence.tokens,
                                                     suggestions, marginals)],
                "utility": utility,
                "labels": self.learner.label_set.names,
            }

    def submit(self, sentence_id: str, labels: list[str]) -> dict:
        with self.lock:
            lr = self.learner
            query = lr.next_query()
            outstanding = query[0].id if query is not None else None
            if sentence_id != outstanding:
                # idempotent replay of an already-accepted submission
                for entry in self.audit:
                    if (entry["id"] == sentence_id
                            and entry["labels"] == labels):
                        return {"accepted": True, "round": lr.t,
                                "duplicate": True}
                raise ConflictError(
                    f"no outstanding query for sentence {sentence_id!r}")
            self.audit.append({"id": sentence_id, "labels": list(labels),
                               "round": lr.t})
            try:
                lr.submit(sentence_id, labels)
            except Exception:
                self.audit.pop()
                raise
            self.persist()
            return {"accepted": True, "round": lr.t}

    def retrain(self) -> dict:
        with self.lock:
            self.learner.ensure_trained()
            self.persist()
            return {"round": self.learner.t}


class ConflictError(Exception):
    pass


def create_app(session: AnnotationSession) -> FastAPI:
    app = FastAPI(title="seqlab annotation service")

    @app.get("/session/status")
    def status():
        return session.status()

    @app.get("/session/next")
    def next_query():
        query = session.next_query()
        if query is None:
            return JSONResponse({"detail": "unlabeled pool exhausted"},
                                status_code=404)
        return query

    @app.post("/session/label")
    def label(sub: LabelSubmission):
        try:
            return session.submit(sub.sentence_id, sub.labels)
        except ConflictError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=409)
        except ConfigError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.post("/session/retrain")
    def retrain():
        return session.retrain()

    return app
