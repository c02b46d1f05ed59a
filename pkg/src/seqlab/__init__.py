"""Sequence labeling with featurized HMMs, bagged ensembles, and active
learning."""

from .corpus import (Corpus, EvalReport, Label, LabelSet, Sentence, Span,
                     Token, evaluate, extract_spans, parse_conll, split,
                     write_conll)
from .ensemble import (EnsembleModel, bag_train, decode_bps, decode_bvs,
                       load_ensemble, save_ensemble)
from .errors import (ConfigError, ContractError, EvaluationError, ParseError,
                     SeqlabError)
from .features import FeatureConfig, FeatureInterner, extract, intern_stats, make_config
from .model import FhmmModel, WeightTable, load_model, save_model
from .active import (ALConfig, ActiveLearner, LearningCurve, Pool,
                     make_pool, make_simulated_oracle, random_utility,
                     reweight, run_active_learning, sve_utility)
from .perceptron import TrainerConfig, TrainingStats, train, train_unaveraged

__version__ = "0.1.0"
