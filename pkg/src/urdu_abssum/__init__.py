"""Abstractive text summarization for Urdu.

Library surface: preprocessing (`preprocess`), corpus handling (`corpus`),
the seq2seq model (`model`), training (`training`), decoding (`decoding`),
evaluation metrics (`evaluation`), checkpointing (`checkpoint`), and the
CLI (`cli`).  LSTM inner loops run on a compiled Cython core when available,
with a pure numpy fallback (see `urdu_abssum.kernels`).
"""

__version__ = "0.1.0"

from .corpus import EOS_ID, PAD_ID, SOS_ID, UNK_ID, Vocabulary
from .decoding import DecodeConfig, beam_search, greedy_decode, summarize
from .evaluation import EvalReport, corpus_bleu, rouge_l, rouge_n
from .model import ModelConfig, Parameters
from .preprocess import Pipeline, PipelineConfig
from .training import TrainConfig, train

__all__ = [
    "EOS_ID", "PAD_ID", "SOS_ID", "UNK_ID",
    "Vocabulary", "DecodeConfig", "beam_search", "greedy_decode", "summarize",
    "EvalReport", "corpus_bleu", "rouge_l", "rouge_n",
    "ModelConfig", "Parameters", "Pipeline", "PipelineConfig",
    "TrainConfig", "train", "__version__",
]
