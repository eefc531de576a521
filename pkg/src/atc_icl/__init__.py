"""Argument type classification on persuasive essays with few-shot prompting.

The package splits into a corpus layer (brat standoff parsing, official
train/test split, statistics), a feature layer (structural and contextual
features rendered as text), an LLM gateway with deterministic offline
backends, demonstration selection, prompt construction, majority-vote
ensembling, evaluation metrics, and a fine-tuning data exporter. The ``cli``
module ties everything into reproducible experiment runs.
"""

__version__ = "0.1.0"
