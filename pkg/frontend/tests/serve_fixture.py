"""Throwaway annotation service for the UI round-trip test.

Builds a small deterministic corpus (word identity decides the tag) and
serves it with the session state persisted at the given path, so killing
and restarting this process resumes the same session.

Usage: python3 serve_fixture.py STATE_FILE PORT
"""

import random
import sys

import uvicorn

from seqlab.active import ALConfig
from seqlab.corpus import Corpus, LabelSet, Sentence, Token
from seqlab.features import FeatureConfig, Template
from seqlab.perceptron import TrainerConfig
from seqlab.service import AnnotationSession, create_app

VOCAB = {
    "lake": "L", "river": "L", "coast": "L",
    "north": "G", "west": "G", "near": "G",
    "monday": "T", "noon": "T", "winter": "T",
    "the": "O", "a": "O", "walked": "O", "slowly": "O",
}


def build_corpus(n, seed, prefix=""):
    rng = random.Random(seed)
    words = list(VOCAB)
    sentences = []
    for i in range(n):
        surface = [rng.choice(words) for _ in range(rng.randint(4, 7))]
        tokens = tuple(Token(surface=w, gold=VOCAB[w]) for w in surface)
        sentences.append(Sentence(tokens, f"{prefix}{i}"))
    return Corpus(tuple(sentences), LabelSet(["O", "L", "G", "T"], "O"))


def main():
    state_path, port = sys.argv[1], int(sys.argv[2])
    source = build_corpus(30, 1)
    test = build_corpus(12, 2, prefix="t")
    config = ALConfig(
        features=FeatureConfig("est", (Template("word", None, None, 0),)),
        trainer=TrainerConfig(max_epochs=10),
        initial_seed_count=4, batch_size=1, ensemble_size=3, seed=0)
    session = AnnotationSession(source, test, config, state_path)
    uvicorn.run(create_app(session), host="127.0.0.1", port=port,
                log_level="warning")


if __name__ == "__main__":
    main()
