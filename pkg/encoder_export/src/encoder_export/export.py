"""Extract one vector per word from a pretrained encoder.

Each word is encoded in isolation as [CLS] subwords [SEP] (or whatever
special-token framing the tokenizer applies) and its vector is the mean
of the last-layer hidden states over the subword positions only —
special tokens and padding are masked out of the pooling. Words are
processed in right-padded batches; the attention mask keeps the batched
result equal to encoding each word alone.
"""

from dataclasses import dataclass

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer


@dataclass
class ExportSpec:
    model: str
    words_path: str
    out_path: str
    batch_size: int = 64


def load_wordlist(path):
    """One word per line, frequency-ordered; blank lines dropped."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                words.append(word)
    return words


def _pool_batch(model, tokenizer, words):
    """Return per-word mean-over-subword vectors for one batch.

    Words whose tokenization contains no non-special tokens get None.
    """
    enc = tokenizer(words, padding=True, truncation=True,
                    return_special_tokens_mask=True, return_tensors="pt")
    special = enc.pop("special_tokens_mask")
    with torch.no_grad():
        hidden = model(**enc).last_hidden_state
    # pooling mask: real (attended) positions that are not special tokens
    mask = (enc["attention_mask"] * (1 - special)).unsqueeze(-1).to(hidden.dtype)
    counts = mask.sum(dim=1)
    sums = (hidden * mask).sum(dim=1)
    out = []
    for i in range(len(words)):
        n = counts[i].item()
        out.append((sums[i] / counts[i]).numpy() if n > 0 else None)
    return out


def embed_words(model, tokenizer, words, batch_size=64):
    """Encode a wordlist; returns (kept_words, matrix, skipped_words)."""
    model.eval()
    kept, rows, skipped = [], [], []
    for start in range(0, len(words), batch_size):
        batch = words[start:start + batch_size]
        for word, vec in zip(batch, _pool_batch(model, tokenizer, batch)):
            if vec is None:
                skipped.append(word)
            else:
                kept.append(word)
                rows.append(vec)
    matrix = (np.vstack(rows) if rows
              else np.zeros((0, model.config.hidden_size), dtype=np.float32))
    return kept, matrix.astype(np.float32), skipped


def write_vec(words, matrix, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {matrix.shape[1]}\n")
        for word, row in zip(words, matrix):
            fh.write(word + " " + " ".join("%.8g" % x for x in row) + "\n")


def export_word_embeddings(spec):
    """Run the export; returns (n_written, n_skipped)."""
    torch.manual_seed(0)  # irrelevant at eval time, pinned for hygiene
    tokenizer = AutoTokenizer.from_pretrained(spec.model)
    model = AutoModel.from_pretrained(spec.model)
    words = load_wordlist(spec.words_path)
    kept, matrix, skipped = embed_words(model, tokenizer, words,
                                        spec.batch_size)
    write_vec(kept, matrix, spec.out_path)
    return len(kept), len(skipped)
