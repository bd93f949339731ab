"""Debate transcripts: parsing, filtering, splitting and synthetic generation."""
from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, IntegrityError, ParseError
from .features import tokenize


class Vote(str, enum.Enum):
    YEA = "Y"
    NAY = "N"

    @property
    def sign(self) -> int:
        return 1 if self is Vote.YEA else -1


class FilterPolicy(enum.Enum):
    EVALUATION = "evaluation"
    AGREEMENT_MINING = "agreement_mining"
    AGREEMENT_TRAINING_WITH_AMENDMENTS = "agreement_training_with_amendments"


@dataclass(frozen=True)
class SpeechSegment:
    debate_id: str
    segment_index: int
    speaker_id: str
    tokens: tuple[str, ...]
    raw_text: str
    vote: Vote | None = None
    # index in the unfiltered debate
    source_index: int | None = None

    @classmethod
    def from_text(cls, debate_id, segment_index, speaker_id, text, vote=None):
        return cls(debate_id, segment_index, speaker_id, tuple(tokenize(text)), text,
                   vote, segment_index)

    @property
    def provenance(self) -> int:
        return self.segment_index if self.source_index is None else self.source_index


@dataclass(frozen=True)
class Debate:
    debate_id: str
    segments: tuple[SpeechSegment, ...]
    speaker_names: Mapping[str, tuple[tuple[str, ...], ...]] = field(default_factory=dict)

    def __post_init__(self):
        for seg in self.segments:
            if seg.debate_id != self.debate_id:
                raise IntegrityError(
                    f"segment {seg.segment_index} belongs to {seg.debate_id!r}, not {self.debate_id!r}")

    def speakers(self) -> list[str]:
        """Speaker ids in order of first appearance."""
        return list(dict.fromkeys(seg.speaker_id for seg in self.segments))

    def votes(self) -> dict[str, Vote]:
        out = {}
        for seg in self.segments:
            if seg.vote is not None:
                out.setdefault(seg.speaker_id, seg.vote)
        return out

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class CorpusSplit:
    train: list[Debate]
    test: list[Debate]
    dev: list[Debate]

    def __post_init__(self):
        seen = set()
        for part in (self.train, self.test, self.dev):
            for d in part:
                if d.debate_id in seen:
                    raise IntegrityError(f"debate {d.debate_id!r} appears in more than one split")
                seen.add(d.debate_id)

    def parts(self) -> dict[str, list[Debate]]:
        return {"train": self.train, "test": self.test, "dev": self.dev}


# -- native format -----------------------------------------------------------

_FIELDS = ("segment_index", "speaker_id", "speaker_names", "vote", "text")


def _parse_record(path, lineno, line):
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(path, lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise ParseError(path, lineno, "record is not an object")
    missing = [k for k in _FIELDS if k not in rec]
    if missing:
        raise ParseError(path, lineno, f"missing field(s) {', '.join(missing)}")
    idx = rec["segment_index"]
    if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
        raise ParseError(path, lineno, "segment_index must be a non-negative integer")
    if not isinstance(rec["speaker_id"], str):
        raise ParseError(path, lineno, "speaker_id must be a string")
    names = rec["speaker_names"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ParseError(path, lineno, "speaker_names must be an array of strings")
    if rec["vote"] not in ("Y", "N", None):
        raise ParseError(path, lineno, f"vote must be 'Y', 'N' or null, got {rec['vote']!r}")
    if not isinstance(rec["text"], str):
        raise ParseError(path, lineno, "text must be a string")
    return rec


def read_debate(path) -> Debate:
    path = Path(path)
    debate_id = path.name[: -len(".jsonl")] if path.name.endswith(".jsonl") else path.stem
    records = {}
    votes: dict[str, str] = {}
    names: dict[str, dict[tuple[str, ...], None]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = _parse_record(path, lineno, line)
            idx, spk = rec["segment_index"], rec["speaker_id"]
            if idx in records:
                raise IntegrityError(f"{path}:{lineno}: duplicate segment_index {idx} in debate {debate_id!r}")
            if rec["vote"] is not None:
                prev = votes.setdefault(spk, rec["vote"])
                if prev != rec["vote"]:
                    raise IntegrityError(
                        f"{path}:{lineno}: speaker {spk!r} has conflicting votes {prev} and {rec['vote']}")
            surface = names.setdefault(spk, {})
            for name in rec["speaker_names"]:
                toks = tuple(tokenize(name))
                if toks:
                    surface[toks] = None
            records[idx] = rec
    order = sorted(records)
    if order != list(range(len(order))):
        raise IntegrityError(f"{path}: segment indices are not contiguous from 0")
    segments = tuple(
        SpeechSegment.from_text(
            debate_id, i, records[i]["speaker_id"], records[i]["text"],
            Vote(votes[records[i]["speaker_id"]]) if records[i]["speaker_id"] in votes else None)
        for i in order)
    return Debate(debate_id, segments, {spk: tuple(v) for spk, v in names.items()})


def parse_corpus(root_path) -> list[Debate]:
    """Read every ``<debate_id>.jsonl`` file under ``root_path``, sorted by name."""
    root = Path(root_path)
    if not root.is_dir():
        raise ConfigurationError(f"{root} is not a directory")
    return [read_debate(p) for p in sorted(root.glob("*.jsonl"))]


def write_debate(debate: Debate, out_dir) -> Path:
    out = Path(out_dir) / f"{debate.debate_id}.jsonl"
    lines = []
    for seg in debate.segments:
        rec = {
            "segment_index": seg.segment_index,
            "speaker_id": seg.speaker_id,
            "speaker_names": [" ".join(n) for n in debate.speaker_names.get(seg.speaker_id, ())],
            "vote": seg.vote.value if seg.vote is not None else None,
            "text": seg.raw_text,
        }
        lines.append(json.dumps(rec, ensure_ascii=False) + "\n")
    out.write_text("".join(lines), encoding="utf-8")
    return out


def write_corpus(debates: Sequence[Debate], out_dir) -> list[Path]:
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    return [write_debate(d, out_dir) for d in debates]


# -- filtering ---------------------------------------------------------------

def is_yield_segment(tokens: Sequence[str]) -> bool:
    return any(t.startswith("yield") for t in tokens)


def is_amendment_segment(tokens: Sequence[str]) -> bool:
    return any(t.startswith("amendment") for t in tokens)


def filter_segments(debate: Debate, policy: FilterPolicy) -> Debate:
    """Drop yield and/or amendment segments and re-index the remainder.

    EVALUATION drops both kinds, AGREEMENT_MINING drops only amendment
    segments, AGREEMENT_TRAINING_WITH_AMENDMENTS keeps everything.
    """
    policy = FilterPolicy(policy)
    kept = []
    for seg in debate.segments:
        if policy is not FilterPolicy.AGREEMENT_TRAINING_WITH_AMENDMENTS and is_amendment_segment(seg.tokens):
            continue
        if policy is FilterPolicy.EVALUATION and is_yield_segment(seg.tokens):
            continue
        kept.append(seg)
    segments = tuple(
        replace(seg, segment_index=i, source_index=seg.provenance) for i, seg in enumerate(kept))
    return Debate(debate.debate_id, segments, debate.speaker_names)


# -- splitting ---------------------------------------------------------------

def _split_counts(n: int, ratios: Sequence[float]) -> list[int]:
    # test and dev are floored, train takes the remainder: 53 -> 38/10/5
    nonzero = [r > 0 for r in ratios]
    if n < sum(nonzero):
        raise ConfigurationError(
            f"{n} debate(s) cannot fill {sum(nonzero)} non-empty split bucket(s)")
    counts = [0, 0, 0]
    for k in (1, 2):
        if nonzero[k]:
            counts[k] = max(1, math.floor(n * ratios[k] + 1e-9))
    counts[0] = n - counts[1] - counts[2]
    while nonzero[0] and counts[0] < 1:
        k = 1 if counts[1] >= counts[2] else 2
        counts[k] -= 1
        counts[0] += 1
    return counts


def split_debates(debates: Sequence[Debate], ratios=(0.7, 0.2, 0.1), seed: int = 0) -> CorpusSplit:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigurationError(f"split ratios must be three non-negative fractions summing to 1, got {ratios}")
    n_train, n_test, _ = _split_counts(len(debates), ratios)
    order = list(debates)
    random.Random(seed).shuffle(order)
    return CorpusSplit(order[:n_train], order[n_train:n_train + n_test], order[n_train + n_test:])


# -- synthetic debates -------------------------------------------------------

_SYLLABLES = ("ba", "ke", "lo", "mi", "nu", "ra", "si", "to", "va", "ze",
              "dor", "fen", "gar", "hol", "jun", "pel", "quin", "tam", "wex", "yol")


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for generated debates.

    Each class draws ``class_signal`` of its tokens uniformly from its own
    ``class_words`` indicative words and the rest from a shared Zipfian
    vocabulary of ``neutral_vocab`` words. ``label_noise`` is the chance a
    segment's text comes from the opposite class. With probability
    ``cue_rate`` a segment names a same-vote speaker between agreement cues
    (with probability ``cue_noise`` that target is opposite-vote instead);
    with probability ``disagree_rate`` it names an opposite-vote speaker
    between disagreement cues.
    """

    n_speakers: int = 15
    min_segments: int = 1
    max_segments: int = 4
    min_tokens: int = 40
    max_tokens: int = 120
    yea_fraction: float = 0.5
    neutral_vocab: int = 2000
    class_words: int = 60
    class_signal: float = 0.04
    label_noise: float = 0.0
    cue_rate: float = 0.0
    cue_noise: float = 0.0
    disagree_rate: float = 0.0
    yield_rate: float = 0.0
    amendment_rate: float = 0.0
    agreement_cues: tuple[str, ...] = ("thank", "agree", "second", "commend", "colleague", "distinguished")
    disagreement_cues: tuple[str, ...] = ("disagree", "mistaken", "wrong", "regret", "misguided", "unfortunately")

    def __post_init__(self):
        if self.n_speakers < 2:
            raise ConfigurationError("synthetic debates need at least 2 speakers")
        if not 1 <= self.min_segments <= self.max_segments:
            raise ConfigurationError("need 1 <= min_segments <= max_segments")
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ConfigurationError("need 1 <= min_tokens <= max_tokens")
        for name in ("yea_fraction", "class_signal", "label_noise", "cue_rate", "cue_noise",
                     "disagree_rate", "yield_rate", "amendment_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        if self.neutral_vocab < 1 or self.class_words < 1:
            raise ConfigurationError("vocabulary sizes must be positive")
        if not self.agreement_cues or not self.disagreement_cues:
            raise ConfigurationError("cue lists must be non-empty")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SyntheticSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown synthetic spec key(s): {', '.join(unknown)}")
        kwargs = dict(data)
        for key in ("agreement_cues", "disagreement_cues"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


def _surname(rng: np.random.Generator, taken: set[str]) -> str:
    while True:
        name = "".join(_SYLLABLES[k] for k in rng.integers(0, len(_SYLLABLES), size=3))
        if name not in taken:
            taken.add(name)
            return name


def generate_synthetic_debate(spec: SyntheticSpec, seed: int, debate_id: str = "synth000") -> Debate:
    rng = np.random.default_rng(seed)
    n = spec.n_speakers
    n_yea = int(round(n * spec.yea_fraction))
    if 0.0 < spec.yea_fraction < 1.0 and n_yea in (0, n):
        raise ConfigurationError(
            f"yea_fraction {spec.yea_fraction} with {n} speakers leaves one class empty")
    votes = [Vote.YEA] * n_yea + [Vote.NAY] * (n - n_yea)
    votes = [votes[k] for k in rng.permutation(n)]
    speakers = [f"{debate_id}.s{k:02d}" for k in range(n)]
    taken: set[str] = set()
    surnames = [_surname(rng, taken) for _ in range(n)]
    speaker_names = {spk: (("mr", name), (name,)) for spk, name in zip(speakers, surnames)}

    neutral = [f"w{k}" for k in range(spec.neutral_vocab)]
    zipf = 1.0 / np.arange(1, spec.neutral_vocab + 1)
    zipf /= zipf.sum()
    class_vocab = {Vote.YEA: [f"pro{k}" for k in range(spec.class_words)],
                   Vote.NAY: [f"con{k}" for k in range(spec.class_words)]}
    other = {Vote.YEA: Vote.NAY, Vote.NAY: Vote.YEA}

    def body(vote: Vote) -> list[str]:
        length = int(rng.integers(spec.min_tokens, spec.max_tokens + 1))
        if rng.random() < spec.label_noise:
            vote = other[vote]
        from_class = rng.random(length) < spec.class_signal
        words = class_vocab[vote]
        neutral_draw = rng.choice(spec.neutral_vocab, size=length, p=zipf)
        class_draw = rng.integers(0, len(words), size=length)
        return [words[c] if fc else neutral[w] for fc, c, w in zip(from_class, class_draw, neutral_draw)]

    def pick(candidates: list[int]) -> int | None:
        return candidates[int(rng.integers(len(candidates)))] if candidates else None

    def mention(tokens: list[str], target: int, cues: Sequence[str]) -> None:
        pos = int(rng.integers(0, len(tokens) + 1))
        before = cues[int(rng.integers(len(cues)))]
        after = cues[int(rng.integers(len(cues)))]
        tokens[pos:pos] = [before, "mr", surnames[target], after]

    same = {k: [j for j in range(n) if j != k and votes[j] == votes[k]] for k in range(n)}
    opposite = {k: [j for j in range(n) if votes[j] != votes[k]] for k in range(n)}

    turns: list[tuple[int, list[str]]] = []
    for k in range(n):
        n_seg = int(rng.integers(spec.min_segments, spec.max_segments + 1))
        for _ in range(n_seg):
            tokens = body(votes[k])
            if rng.random() < spec.cue_rate:
                noisy = rng.random() < spec.cue_noise
                target = pick(opposite[k] if noisy else same[k])
                if target is not None:
                    mention(tokens, target, spec.agreement_cues)
            if rng.random() < spec.disagree_rate:
                target = pick(opposite[k])
                if target is not None:
                    mention(tokens, target, spec.disagreement_cues)
            turns.append((k, tokens))
        if rng.random() < spec.yield_rate:
            target = pick(same[k])
            if target is not None:
                minutes = int(rng.integers(1, 6))
                turns.append((k, ["madam", "speaker", "i", "yield", str(minutes), "minutes", "to",
                                  "mr", surnames[target]]))
        if rng.random() < spec.amendment_rate:
            tokens = body(votes[k] if rng.random() < 0.5 else other[votes[k]])
            tokens[int(rng.integers(0, len(tokens) + 1)):0] = ["the", "amendment"]
            turns.append((k, tokens))

    ordered = [turns[i] for i in rng.permutation(len(turns))]

    segments = tuple(
        SpeechSegment(debate_id, i, speakers[k], tuple(tokens), " ".join(tokens), votes[k], i)
        for i, (k, tokens) in enumerate(ordered))
    return Debate(debate_id, segments, speaker_names)


def generate_synthetic_corpus(spec: SyntheticSpec, n_debates: int, seed: int) -> list[Debate]:
    seeds = np.random.SeedSequence(seed).generate_state(n_debates)
    return [generate_synthetic_debate(spec, int(s), f"synth{k:03d}") for k, s in enumerate(seeds)]
