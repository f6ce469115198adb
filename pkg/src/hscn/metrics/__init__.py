from .bleu import corpus_bleu
from .editrate import edit_rate, word_edit_distance
from .overlap import corpus_novelty, jaccard, novelty
from .repetition import RRConfig, repetition_rate
from .stats import CorpusStats, type_distribution

__all__ = [
    "CorpusStats",
    "RRConfig",
    "corpus_bleu",
    "corpus_novelty",
    "edit_rate",
    "jaccard",
    "novelty",
    "repetition_rate",
    "type_distribution",
    "word_edit_distance",
]
