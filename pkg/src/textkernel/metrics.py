"""Loss and score formulas: dice, combined loss, CTC, edit-distance rates.

Probability matrices are (T, C) rows summing to 1, class 0 is the CTC
blank.  Transcripts are plain symbol sequences (strings or lists of class
indices); CR/AR follow the usual handwriting-competition convention
CR = (N - S - D)/N, AR = (N - S - D - I)/N.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyReference, InfeasibleLength, ShapeMismatch

__all__ = [
    "dice_loss",
    "combined_loss",
    "ctc_forward_loss",
    "ctc_greedy_decode",
    "levenshtein_counts",
    "cr_ar",
    "normalize_symbols",
    "encode_transcript",
    "decode_labels",
    "DEFAULT_SYMBOL_TABLE",
    "ALPHA",
    "BLANK",
]

ALPHA = 0.1  # kernel-loss weight in the combined loss
BLANK = 0

ROW_SUM_TOL = 1e-6

# fullwidth punctuation folded to its ASCII look-alike
DEFAULT_SYMBOL_TABLE = {
    "，": ",",
    "。": ".",
    "、": ",",
    "；": ";",
    "：": ":",
    "！": "!",
    "？": "?",
    "（": "(",
    "）": ")",
    "“": '"',
    "”": '"',
    "‘": "'",
    "’": "'",
    "－": "-",
    "　": " ",
}


def dice_loss(pred, gt) -> float:
    """1 - 2*sum(P*G) / (sum(P^2) + sum(G^2)); two empty maps give 0."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise ShapeMismatch(f"pred {p.shape} vs gt {g.shape}")
    denom = float((p * p).sum() + (g * g).sum())
    if denom == 0.0:
        return 0.0
    return 1.0 - 2.0 * float((p * g).sum()) / denom


def combined_loss(l_text: float, l_kernel: float, alpha: float = ALPHA) -> float:
    """Total loss l_text + alpha * l_kernel."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not (np.isfinite(l_text) and np.isfinite(l_kernel)):
        raise ValueError("loss terms must be finite")
    return float(l_text) + alpha * float(l_kernel)


def _check_prob_matrix(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 2:
        raise ShapeMismatch(f"probability matrix must be (T, C>=2), got {p.shape}")
    if (p < 0).any() or (p > 1).any():
        raise ValueError("probabilities must lie in [0, 1]")
    if np.abs(p.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
        raise ValueError("probability rows must sum to 1")
    return p


def ctc_forward_loss(probs, labels, blank: int = BLANK) -> float:
    """Negative log-likelihood of `labels` under the CTC forward algorithm.

    Standard log-space DP over the blank-augmented label sequence with
    -inf sentinels.  Requires T >= len(labels) + (adjacent equal pairs).
    """
    p = _check_prob_matrix(probs)
    T, C = p.shape
    labels = [int(s) for s in labels]
    for s in labels:
        if s == blank or not 0 <= s < C:
            raise ValueError(f"label {s} out of range (blank={blank}, C={C})")
    repeats = sum(a == b for a, b in zip(labels, labels[1:]))
    if T < len(labels) + repeats:
        raise InfeasibleLength(
            f"T={T} cannot emit {len(labels)} labels with {repeats} repeats"
        )

    ext = [blank]
    for s in labels:
        ext.extend([s, blank])
    S = len(ext)
    with np.errstate(divide="ignore"):
        logp = np.log(p)

    alpha = np.full(S, -np.inf)
    alpha[0] = logp[0, ext[0]]
    if S > 1:
        alpha[1] = logp[0, ext[1]]
    for t in range(1, T):
        prev = alpha
        alpha = np.full(S, -np.inf)
        for s in range(S):
            acc = prev[s]
            if s >= 1:
                acc = np.logaddexp(acc, prev[s - 1])
            if s >= 2 and ext[s] != blank and ext[s] != ext[s - 2]:
                acc = np.logaddexp(acc, prev[s - 2])
            alpha[s] = acc + logp[t, ext[s]]

    total = alpha[-1] if S == 1 else np.logaddexp(alpha[-1], alpha[-2])
    return float(-total)


def ctc_greedy_decode(probs, blank: int = BLANK) -> list[int]:
    """Per-step argmax (ties to the lower class), collapse repeats, drop blanks."""
    p = _check_prob_matrix(probs)
    path = np.argmax(p, axis=1)
    out = []
    prev = None
    for c in path.tolist():
        if c != prev and c != blank:
            out.append(c)
        prev = c
    return out


def levenshtein_counts(reference, hypothesis) -> tuple[int, int, int]:
    """Unit-cost alignment counts (substitutions, deletions, insertions).

    Traceback tie order: substitution, then insertion, then deletion.
    """
    ref = list(reference)
    hyp = list(hypothesis)
    n, m = len(ref), len(hyp)
    dp = np.zeros((n + 1, m + 1), dtype=np.int64)
    dp[:, 0] = np.arange(n + 1)
    dp[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = dp[i - 1, j - 1] + (ri != hyp[j - 1])
            ins = dp[i, j - 1] + 1
            dele = dp[i - 1, j] + 1
            dp[i, j] = min(sub, ins, dele)

    subs = dels = inss = 0
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and dp[i, j] == dp[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
        ):
            subs += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif j > 0 and dp[i, j] == dp[i, j - 1] + 1:
            inss += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return int(subs), int(dels), int(inss)


def cr_ar(reference, hypothesis) -> tuple[float, float]:
    """Correct rate (N-S-D)/N and accurate rate (N-S-D-I)/N."""
    ref = list(reference)
    if len(ref) == 0:
        raise EmptyReference("reference must contain at least one symbol")
    s, d, i = levenshtein_counts(ref, hypothesis)
    n = len(ref)
    return (n - s - d) / n, (n - s - d - i) / n


def normalize_symbols(text: str, table: dict | None = None) -> str:
    """Optional pre-pass folding confusable symbols before scoring."""
    table = DEFAULT_SYMBOL_TABLE if table is None else table
    return "".join(table.get(ch, ch) for ch in text)


def encode_transcript(text, class_map: dict) -> list[int]:
    """Map symbols to class indices via a {symbol: index} table."""
    try:
        return [int(class_map[ch]) for ch in text]
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} missing from class map") from exc


def decode_labels(labels, class_map: dict) -> str:
    """Inverse of encode_transcript for a {symbol: index} table."""
    inverse = {int(v): k for k, v in class_map.items()}
    try:
        return "".join(inverse[int(s)] for s in labels)
    except KeyError as exc:
        raise ValueError(f"class index {exc.args[0]} missing from map") from exc
