"""Self-contained Turkish NLP toolkit.

Preprocessing (sentence splitting, normalization, stopwords), a trainable
unigram subword tokenizer, and GRU-based sequence models for NER, POS
tagging, morphological disambiguation, dependency parsing and sentiment,
all on plain numpy.
"""

__version__ = "0.1.0"
