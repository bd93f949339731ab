"""End-to-end experiments: baselines, min-cut variants, alpha tuning, reports."""
from __future__ import annotations

import enum
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .agreement import (AgreementScore, ThetaMode, agr_weight, build_reference_vocabulary,
                        extract_references, score_references, train_agreement_classifier)
from .corpus import CorpusSplit, Debate, FilterPolicy, Vote, filter_segments
from .errors import ConfigurationError, EvaluationError
from .features import Vocabulary, build_vocabulary, stack, vectorize_presence
from .linear_model import LinearModel, decision_values, train_matrix
from .mincut import IndScores, argmax_ind, build_debate_graph, max_flow_min_cut, normalize_ind

ALPHA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
TUNE = "tune"
EVAL_SPLITS = ("dev", "test")


class Variant(str, enum.Enum):
    MAJORITY = "MAJORITY"
    LEXICAL = "LEXICAL"
    SVM_SEGMENT = "SVM_SEGMENT"
    SVM_SEGMENT_SAMESPEAKER = "SVM_SEGMENT_SAMESPEAKER"
    SVM_SEGMENT_SAMESPEAKER_AGR = "SVM_SEGMENT_SAMESPEAKER_AGR"
    SVM_SPEAKER = "SVM_SPEAKER"
    SVM_SPEAKER_AGR = "SVM_SPEAKER_AGR"
    HARD_AGR = "HARD_AGR"

    @property
    def uses_agreement(self) -> bool:
        return self in (Variant.SVM_SEGMENT_SAMESPEAKER_AGR, Variant.SVM_SPEAKER_AGR, Variant.HARD_AGR)

    @property
    def uses_svm(self) -> bool:
        return self not in (Variant.MAJORITY, Variant.LEXICAL)

    @property
    def speaker_level(self) -> bool:
        return self in (Variant.SVM_SPEAKER, Variant.SVM_SPEAKER_AGR)


def _theta(value) -> ThetaMode:
    if value is None:
        return ThetaMode.ZERO
    if isinstance(value, ThetaMode):
        return value
    return ThetaMode(str(value).lower())


@dataclass(frozen=True)
class ExperimentConfig:
    variant: Variant
    theta_mode: ThetaMode | None = None
    alpha: float | str | None = None
    c: float = 1.0
    seed: int = 0
    alpha_grid: tuple[float, ...] = ALPHA_GRID

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
        except ValueError:
            raise ConfigurationError(f"unknown variant {self.variant!r}") from None
        if self.variant.uses_agreement:
            try:
                theta = _theta(self.theta_mode)
            except ValueError:
                raise ConfigurationError(f"unknown theta_mode {self.theta_mode!r}") from None
            object.__setattr__(self, "theta_mode", theta)
            alpha = TUNE if self.alpha is None else self.alpha
            if isinstance(alpha, str):
                if alpha.lower() != TUNE:
                    raise ConfigurationError(f"alpha must be a positive number or 'tune', got {alpha!r}")
                alpha = TUNE
            elif not (isinstance(alpha, (int, float)) and alpha > 0):
                raise ConfigurationError(f"alpha must be positive, got {alpha!r}")
            else:
                alpha = float(alpha)
            object.__setattr__(self, "alpha", alpha)
        elif self.theta_mode is not None or self.alpha is not None:
            raise ConfigurationError(f"theta_mode/alpha are only meaningful for agreement variants, "
                                     f"not {self.variant.value}")
        if not self.c > 0:
            raise ConfigurationError(f"c must be positive, got {self.c!r}")
        grid = tuple(float(a) for a in self.alpha_grid)
        if not grid or any(a <= 0 for a in grid):
            raise ConfigurationError("alpha_grid must be a non-empty list of positive values")
        object.__setattr__(self, "alpha_grid", grid)

    @classmethod
    def from_mapping(cls, data) -> "ExperimentConfig":
        known = {"variant", "theta_mode", "alpha", "c", "seed", "alpha_grid"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown experiment key(s): {', '.join(unknown)}")
        if "variant" not in data:
            raise ConfigurationError("experiment needs a 'variant'")
        return cls(**data)


# -- metrics -----------------------------------------------------------------

def evaluate_accuracy(predictions: Sequence, gold: Sequence) -> float:
    if len(gold) == 0:
        raise EvaluationError("accuracy over an empty gold set is undefined")
    if len(predictions) != len(gold):
        raise EvaluationError(f"{len(predictions)} predictions for {len(gold)} gold labels")
    correct = sum(1 for p, g in zip(predictions, gold) if p == g)
    return 100.0 * correct / len(gold)


def agreement_precision(predicted_links: Sequence[bool], gold_same_vote: Sequence[bool]) -> float | None:
    """Percent of emitted links whose speakers voted alike; None when nothing was emitted."""
    emitted = [g for p, g in zip(predicted_links, gold_same_vote) if p]
    if not emitted:
        return None
    return 100.0 * sum(1 for g in emitted if g) / len(emitted)


# -- baselines ---------------------------------------------------------------

def majority_class(debates: Sequence[Debate]) -> Vote:
    votes = [s.vote for d in debates for s in d.segments if s.vote is not None]
    if not votes:
        raise EvaluationError("no labelled training segments")
    n_yea = sum(1 for v in votes if v is Vote.YEA)
    return Vote.YEA if 2 * n_yea >= len(votes) else Vote.NAY


def lexical_score(tokens: Sequence[str]) -> int:
    return sum(t.startswith("support") for t in tokens) - sum(t.startswith("oppos") for t in tokens)


def baseline_lexical(segment, majority: Vote) -> Vote:
    diff = lexical_score(segment.tokens)
    if diff == 0:
        return majority
    return Vote.YEA if diff > 0 else Vote.NAY


# -- reports -----------------------------------------------------------------

@dataclass
class SplitResult:
    accuracy_percent: float | None
    n_segments: int
    n_correct: int
    confusion: dict[str, int]
    per_debate: list[tuple[str, int, int]]
    agreement_accuracy: float | None = None
    agreement_precision: float | None = None
    n_links: int | None = None


@dataclass
class EvalReport:
    variant: Variant
    theta_mode: ThetaMode | None
    alpha: float | None
    seed: int
    splits: dict[str, SplitResult] = field(default_factory=dict)
    alpha_scores: dict[float, float] | None = None

    def records(self) -> list[dict]:
        out = []
        for name in EVAL_SPLITS:
            if name not in self.splits:
                continue
            res = self.splits[name]
            out.append({
                "variant": self.variant.value,
                "theta_mode": self.theta_mode.value if self.theta_mode is not None else None,
                "alpha": self.alpha,
                "split": name,
                "accuracy_percent": res.accuracy_percent,
                "n_segments": res.n_segments,
                "seed": self.seed,
            })
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r) + "\n" for r in self.records())

    def accuracy(self, split: str = "test") -> float | None:
        return self.splits[split].accuracy_percent


# -- trained state shared across variants ------------------------------------

def speaker_documents(debate: Debate) -> dict[str, list[str]]:
    docs: dict[str, list[str]] = {}
    for seg in debate.segments:
        docs.setdefault(seg.speaker_id, []).extend(seg.tokens)
    return docs


@dataclass
class PreparedDebate:
    debate: Debate                         # evaluation-filtered
    speakers: list[str]
    gold: list[Vote | None]
    d_segment: np.ndarray | None = None
    d_speaker: np.ndarray | None = None
    references: list[AgreementScore] = field(default_factory=list)


class TrainedModels:
    """Everything learned from the training split, built lazily and cached."""

    def __init__(self, split: CorpusSplit, c: float = 1.0, seed: int = 0):
        self.split = split
        self.c = c
        self.seed = seed
        self.train_eval = [filter_segments(d, FilterPolicy.EVALUATION) for d in split.train]
        self._cache: dict = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def majority(self) -> Vote:
        return self._get("majority", lambda: majority_class(self.train_eval))

    @property
    def vocabulary(self) -> Vocabulary:
        return self._get("vocab", lambda: build_vocabulary(
            s for d in self.train_eval for s in d.segments))

    @property
    def segment_model(self) -> LinearModel:
        def build():
            segs = [s for d in self.train_eval for s in d.segments if s.vote is not None]
            X = stack([vectorize_presence(s.tokens, self.vocabulary) for s in segs], self.vocabulary.size)
            y = np.array([s.vote.sign for s in segs], dtype=np.float64)
            return train_matrix(X, y, c=self.c, seed=self.seed)
        return self._get("segment_model", build)

    @property
    def speaker_model(self) -> LinearModel:
        def build():
            docs, labels = [], []
            for d in self.train_eval:
                votes = d.votes()
                for spk, toks in speaker_documents(d).items():
                    if spk in votes:
                        docs.append(vectorize_presence(toks, self.vocabulary))
                        labels.append(votes[spk].sign)
            return train_matrix(stack(docs, self.vocabulary.size), np.array(labels, dtype=np.float64),
                                c=self.c, seed=self.seed)
        return self._get("speaker_model", build)

    @property
    def reference_vocabulary(self) -> Vocabulary:
        return self._get("ref_vocab", lambda: build_reference_vocabulary(self.split.train))

    @property
    def agreement_model(self) -> LinearModel:
        return self._get("agreement_model", lambda: train_agreement_classifier(
            self.split.train, self.reference_vocabulary, c=self.c, seed=self.seed))

    def prepared(self, split_name: str, variant: Variant) -> list[PreparedDebate]:
        debates = self._get(("prepared", split_name), lambda: self._prepare(split_name))
        for p in debates:
            if not p.debate.segments:
                continue
            if variant.uses_svm and not variant.speaker_level and p.d_segment is None:
                self._score_segments(p)
            if variant.speaker_level and p.d_speaker is None:
                self._score_speakers(p)
        if variant.uses_agreement:
            self._attach_references(split_name, debates)
        return debates

    def _prepare(self, split_name):
        out = []
        for raw in self.split.parts()[split_name]:
            deb = filter_segments(raw, FilterPolicy.EVALUATION)
            out.append(PreparedDebate(deb, [s.speaker_id for s in deb.segments],
                                      [s.vote for s in deb.segments]))
        return out

    def _score_segments(self, p: PreparedDebate) -> None:
        vocab = self.vocabulary
        X = stack([vectorize_presence(s.tokens, vocab) for s in p.debate.segments], vocab.size)
        p.d_segment = decision_values(self.segment_model, X)

    def _score_speakers(self, p: PreparedDebate) -> None:
        # every segment inherits the score of its speaker's concatenated text
        vocab = self.vocabulary
        docs = speaker_documents(p.debate)
        spk_ids = list(docs)
        Xs = stack([vectorize_presence(docs[k], vocab) for k in spk_ids], vocab.size)
        d_spk = dict(zip(spk_ids, decision_values(self.speaker_model, Xs)))
        p.d_speaker = np.array([d_spk[s] for s in p.speakers])

    def _attach_references(self, split_name, debates):
        key = ("refs", split_name)
        if key in self._cache:
            return
        raws = {d.debate_id: d for d in self.split.parts()[split_name]}
        for p in debates:
            refs = extract_references(raws[p.debate.debate_id], FilterPolicy.AGREEMENT_MINING)
            p.references = score_references(self.agreement_model, self.reference_vocabulary, refs)
        self._cache[key] = True


def _threads() -> int:
    raw = os.environ.get("CONVOTE_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigurationError(f"CONVOTE_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigurationError("CONVOTE_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


# -- per-debate inference ----------------------------------------------------

def debate_weights(p: PreparedDebate, alpha: float, theta_mode: ThetaMode) -> list[tuple[str, str, float]]:
    return [(s.reference.source_speaker_id, s.reference.target_speaker_id, agr_weight(s, alpha, theta_mode))
            for s in p.references]


def debate_ind(p: PreparedDebate, variant: Variant) -> IndScores:
    d = p.d_speaker if variant.speaker_level else p.d_segment
    return normalize_ind(d)


def predict_debate(p: PreparedDebate, variant: Variant, alpha: float | None,
                   theta_mode: ThetaMode | None, majority: Vote) -> list[Vote]:
    if not p.debate.segments:
        return []
    if variant is Variant.MAJORITY:
        return [majority] * len(p.debate.segments)
    if variant is Variant.LEXICAL:
        return [baseline_lexical(s, majority) for s in p.debate.segments]
    ind = debate_ind(p, variant)
    same_speaker = variant is not Variant.SVM_SEGMENT
    weights = debate_weights(p, alpha, theta_mode) if variant.uses_agreement else ()
    graph = build_debate_graph(ind, p.speakers, weights, hard_agreement=variant is Variant.HARD_AGR,
                               same_speaker=same_speaker)
    return max_flow_min_cut(graph).classes


def _split_result(prepared: Sequence[PreparedDebate], predictions: Sequence[list[Vote]],
                  theta_mode: ThetaMode | None, with_agreement: bool) -> SplitResult:
    preds_all, gold_all, per_debate = [], [], []
    confusion = {"YY": 0, "YN": 0, "NY": 0, "NN": 0}  # gold then predicted
    for p, preds in zip(prepared, predictions):
        pairs = [(pr, g) for pr, g in zip(preds, p.gold) if g is not None]
        correct = sum(1 for pr, g in pairs if pr == g)
        per_debate.append((p.debate.debate_id, len(pairs), correct))
        for pr, g in pairs:
            confusion[g.value + pr.value] += 1
            preds_all.append(pr)
            gold_all.append(g)
    acc = evaluate_accuracy(preds_all, gold_all) if gold_all else None
    res = SplitResult(acc, len(gold_all), sum(c for _, _, c in per_debate), confusion, per_debate)
    if with_agreement:
        scores = [s for p in prepared for s in p.references if s.reference.gold_same_vote is not None]
        gold = [s.reference.gold_same_vote for s in scores]
        if gold:
            res.agreement_accuracy = evaluate_accuracy([s.d_r >= 0 for s in scores], gold)
        emitted = [agr_weight(s, 1.0, theta_mode) > 0 for s in scores]
        res.agreement_precision = agreement_precision(emitted, gold)
        res.n_links = sum(emitted)
    return res


def evaluate(config: ExperimentConfig, models: TrainedModels, alpha: float | None,
             splits: Sequence[str] = EVAL_SPLITS) -> EvalReport:
    variant = config.variant
    theta = config.theta_mode if variant.uses_agreement else None
    report = EvalReport(variant, theta, alpha, config.seed)
    majority = models.majority
    for name in splits:
        prepared = models.prepared(name, variant)
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            predictions = list(pool.map(
                lambda p: predict_debate(p, variant, alpha, theta, majority), prepared))
        report.splits[name] = _split_result(prepared, predictions, theta, variant.uses_agreement)
    return report


def baseline_majority(train: Sequence[Debate], eval_segments) -> EvalReport:
    """Predict the training-majority class for every evaluation segment."""
    majority = majority_class([filter_segments(d, FilterPolicy.EVALUATION) for d in train])
    gold = [s.vote for s in eval_segments if s.vote is not None]
    preds = [majority] * len(gold)
    n_yea = sum(1 for g in gold if g is Vote.YEA)
    confusion = {"YY": n_yea if majority is Vote.YEA else 0, "YN": n_yea if majority is Vote.NAY else 0,
                 "NY": len(gold) - n_yea if majority is Vote.YEA else 0,
                 "NN": len(gold) - n_yea if majority is Vote.NAY else 0}
    acc = evaluate_accuracy(preds, gold)
    report = EvalReport(Variant.MAJORITY, None, None, 0)
    report.splits["test"] = SplitResult(acc, len(gold), sum(p == g for p, g in zip(preds, gold)),
                                        confusion, [])
    return report


def _check_models(config: ExperimentConfig, models: TrainedModels | None, split: CorpusSplit) -> TrainedModels:
    if models is None:
        return TrainedModels(split, c=config.c, seed=config.seed)
    if models.split is not split or models.c != config.c or models.seed != config.seed:
        raise ConfigurationError("cached models were trained with a different split, c or seed")
    return models


def tune_alpha(config: ExperimentConfig, split: CorpusSplit,
               models: TrainedModels | None = None) -> tuple[float, EvalReport]:
    """Pick alpha by development accuracy (ties go to the smaller value)."""
    if not config.variant.uses_agreement:
        raise ConfigurationError(f"{config.variant.value} has no alpha to tune")
    if not split.dev:
        raise ConfigurationError("alpha tuning needs a non-empty development split")
    models = _check_models(config, models, split)
    scores: dict[float, float] = {}
    best, best_acc = None, -1.0
    for a in sorted(config.alpha_grid):
        acc = evaluate(config, models, a, splits=("dev",)).accuracy("dev")
        acc = -1.0 if acc is None else acc
        scores[a] = acc
        if acc > best_acc:
            best, best_acc = a, acc
    report = evaluate(config, models, best)
    report.alpha_scores = scores
    return best, report


def run_pipeline(config: ExperimentConfig, split: CorpusSplit,
                 models: TrainedModels | None = None) -> EvalReport:
    models = _check_models(config, models, split)
    if config.variant.uses_agreement and config.alpha == TUNE:
        return tune_alpha(config, split, models)[1]
    alpha = config.alpha if config.variant.uses_agreement else None
    return evaluate(config, models, alpha)


# -- corpus statistics -------------------------------------------------------

def corpus_statistics(debates: Sequence[Debate]) -> dict:
    """Segment/debate counts after evaluation filtering."""
    filtered = [filter_segments(d, FilterPolicy.EVALUATION) for d in debates]
    n_seg = sum(len(d) for d in filtered)
    n_deb = len(filtered)
    return {
        "speech_segments": n_seg,
        "debates": n_deb,
        "avg_segments_per_debate": n_seg / n_deb if n_deb else 0.0,
        "avg_speakers_per_debate": (sum(len(d.speakers()) for d in filtered) / n_deb) if n_deb else 0.0,
    }
