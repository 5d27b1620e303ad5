"""Toolkit for aligning and interpolating cross-lingual lexical spaces.

Pipeline: load type-level embedding spaces, induce a static cross-lingual
space with closed-form Procrustes, mine hard negatives, contrastively
fine-tune a linear adapter over the encoder view, map the static space
into the encoder space, interpolate the two views, and evaluate via
bilingual lexicon induction and cross-lingual word similarity.
"""

__version__ = "0.1.0"
