"""Knowledge-enhanced crisis recognition for social-network text.

The public surface mirrors scikit-learn conventions: estimators with
``fit``/``predict``/``get_params`` (:class:`CrisisRecognizer`,
:class:`BiLstmClassifier`, :class:`LexiconSentimentClassifier`) plus the
data tooling (synthetic corpus generation, JSON-lines I/O, splitting) and
the evaluation harness (metrics, detection/stability curves).
"""

from .autodiff import Tensor
from .baselines import (
    BiLstmClassifier,
    LexiconSentimentClassifier,
    polarity_table_from_lexicon,
)
from .curves import detection_curve, stability_curve
from .data import Sample, SplitSpec, load_corpus, load_provenance, save_corpus, split
from .embeddings import KnowledgeLexicon, Vocabulary, build_vocab
from .errors import (
    ConfigError,
    CrisisLensError,
    DataError,
    DimensionError,
    FormatError,
    NumericError,
    SchemaError,
    TrainingError,
)
from .generator import GenConfig, gen_corpus
from .gradcheck import GradReport, grad_check
from .gradsuite import run_gradient_suite
from .graph import RewardWeights, SocialGraph, compute_reward
from .losses import LossWeights, soft_reward
from .metrics import MetricsReport, Prediction, depth_distribution, evaluate
from .model import CrisisRecognizer, load_model, save_model
from .optim import ParamStore, adam_step

__version__ = "0.1.0"

__all__ = [
    "BiLstmClassifier",
    "ConfigError",
    "CrisisLensError",
    "CrisisRecognizer",
    "DataError",
    "DimensionError",
    "FormatError",
    "GenConfig",
    "GradReport",
    "KnowledgeLexicon",
    "LexiconSentimentClassifier",
    "LossWeights",
    "MetricsReport",
    "NumericError",
    "ParamStore",
    "Prediction",
    "RewardWeights",
    "Sample",
    "SchemaError",
    "SocialGraph",
    "SplitSpec",
    "Tensor",
    "TrainingError",
    "Vocabulary",
    "adam_step",
    "build_vocab",
    "compute_reward",
    "depth_distribution",
    "detection_curve",
    "evaluate",
    "gen_corpus",
    "grad_check",
    "load_corpus",
    "load_model",
    "load_provenance",
    "polarity_table_from_lexicon",
    "run_gradient_suite",
    "save_corpus",
    "save_model",
    "soft_reward",
    "split",
    "stability_curve",
]
