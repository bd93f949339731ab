"""By-name references between speakers and agreement-link weights."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Debate, FilterPolicy, Vote, filter_segments
from .errors import LabelingError, TrainingError
from .features import Vocabulary, build_vocabulary, vectorize_presence, stack
from .linear_model import LinearModel, decision_values, train_matrix

WINDOW_BEFORE = 30
WINDOW_AFTER = 20


class ThetaMode(str, enum.Enum):
    ZERO = "zero"
    MEAN = "mean"


@dataclass(frozen=True)
class ReferenceInstance:
    debate_id: str
    source_segment_index: int
    source_speaker_id: str
    target_speaker_id: str
    window_tokens: tuple[str, ...]
    gold_same_vote: bool | None = None
    # position of the matched name inside the source segment's tokens
    name_start: int = 0
    name_end: int = 0


@dataclass(frozen=True)
class AgreementScore:
    reference: ReferenceInstance
    d_r: float
    sigma_r_debate: float
    mu_debate: float


def find_name_mentions(tokens: Sequence[str],
                       names: Mapping[str, Iterable[Sequence[str]]]) -> list[tuple[int, int, str]]:
    """Longest, leftmost, non-overlapping matches of any speaker's surface names.

    Returns ``(start, end, speaker_id)`` triples. A span whose longest match
    belongs to more than one speaker is consumed but not reported.
    """
    by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
    for spk, forms in names.items():
        for form in forms:
            form = tuple(t.lower() for t in form)
            if form:
                by_first.setdefault(form[0], []).append((form, spk))
    out = []
    i = 0
    n = len(tokens)
    while i < n:
        best_len = 0
        owners: set[str] = set()
        for form, spk in by_first.get(tokens[i], ()):
            L = len(form)
            if L >= best_len and tuple(tokens[i:i + L]) == form:
                if L > best_len:
                    best_len, owners = L, set()
                owners.add(spk)
        if best_len:
            if len(owners) == 1:
                out.append((i, i + best_len, next(iter(owners))))
            i += best_len
        else:
            i += 1
    return out


def label_reference(instance: ReferenceInstance, votes: Mapping[str, Vote]) -> bool:
    try:
        return votes[instance.source_speaker_id] == votes[instance.target_speaker_id]
    except KeyError as exc:
        raise LabelingError(f"no vote known for speaker {exc.args[0]!r} in {instance.debate_id}") from None


def extract_references(debate: Debate, policy: FilterPolicy = FilterPolicy.AGREEMENT_MINING
                       ) -> list[ReferenceInstance]:
    debate = filter_segments(debate, policy)
    spoke = set(debate.speakers())
    votes = debate.votes()
    refs = []
    for seg in debate.segments:
        toks = seg.tokens
        for start, end, target in find_name_mentions(toks, debate.speaker_names):
            if target == seg.speaker_id or target not in spoke:
                continue
            window = toks[max(0, start - WINDOW_BEFORE):end + WINDOW_AFTER]
            gold = None
            if seg.speaker_id in votes and target in votes:
                gold = votes[seg.speaker_id] == votes[target]
            refs.append(ReferenceInstance(debate.debate_id, seg.segment_index, seg.speaker_id,
                                          target, tuple(window), gold, start, end))
    return refs


def training_references(train_debates: Iterable[Debate]) -> list[ReferenceInstance]:
    refs = []
    for debate in train_debates:
        refs.extend(r for r in extract_references(debate, FilterPolicy.AGREEMENT_TRAINING_WITH_AMENDMENTS)
                    if r.gold_same_vote is not None)
    return refs


def build_reference_vocabulary(train_debates: Iterable[Debate]) -> Vocabulary:
    return build_vocabulary(r.window_tokens for r in training_references(train_debates))


def reference_matrix(refs: Sequence[ReferenceInstance], vocab: Vocabulary):
    return stack([vectorize_presence(r.window_tokens, vocab) for r in refs], vocab.size)


def train_agreement_classifier(train_debates: Sequence[Debate], vocab_ref: Vocabulary,
                               c: float = 1.0, seed: int = 0) -> LinearModel:
    """SVM over reference windows; the positive class is "voted alike"."""
    refs = training_references(train_debates)
    if not refs:
        raise TrainingError("no labelled references in the training debates")
    y = np.array([1.0 if r.gold_same_vote else -1.0 for r in refs])
    return train_matrix(reference_matrix(refs, vocab_ref), y, c=c, seed=seed)


def score_references(model: LinearModel, vocab_ref: Vocabulary,
                     refs: Sequence[ReferenceInstance]) -> list[AgreementScore]:
    """Decision values plus per-debate population mean and standard deviation."""
    if not refs:
        return []
    d = decision_values(model, reference_matrix(refs, vocab_ref))
    groups: dict[str, list[int]] = {}
    for k, r in enumerate(refs):
        groups.setdefault(r.debate_id, []).append(k)
    stats = {deb: (float(np.std(d[ks])), float(np.mean(d[ks]))) for deb, ks in groups.items()}
    return [AgreementScore(r, float(d[k]), *stats[r.debate_id]) for k, r in enumerate(refs)]


def resolve_theta(score: AgreementScore, theta_mode: ThetaMode) -> float:
    return 0.0 if ThetaMode(theta_mode) is ThetaMode.ZERO else score.mu_debate


def agr_strength(d: float, sigma: float, theta: float, alpha: float) -> float:
    """Link strength in [0, alpha]: zero below ``theta``, linear up to 4 sigma."""
    if d < theta:
        return 0.0
    four_sigma = 4.0 * sigma
    if sigma <= 0 or d > four_sigma:
        return alpha
    # never negative: a negative mean threshold does not create repulsion
    return max(0.0, alpha * (d / four_sigma))


def agr_weight(score: AgreementScore, alpha: float, theta_mode: ThetaMode = ThetaMode.ZERO) -> float:
    return agr_strength(score.d_r, score.sigma_r_debate, resolve_theta(score, theta_mode), alpha)


def write_reference_audit(path, scores: Sequence[AgreementScore], alpha: float,
                          theta_mode: ThetaMode) -> None:
    lines = ["debate_id\tsource_speaker\ttarget_speaker\td_r\ttheta\tweight\n"]
    for s in scores:
        r = s.reference
        lines.append(f"{r.debate_id}\t{r.source_speaker_id}\t{r.target_speaker_id}\t"
                     f"{s.d_r!r}\t{resolve_theta(s, theta_mode)!r}\t{agr_weight(s, alpha, theta_mode)!r}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")
