"""Corpus ingestion: frequency dictionaries, spectra, inverted-rank curves.

A frequency dictionary maps each word to its occurrence count; the
frequency spectrum counts how many distinct words share each occurrence
frequency.  The inverted-rank curve accumulates distinct-word counts
from the rare end upward, the "hole counting" direction: the point at
frequency w is the number of surviving distinct words with frequency at
most w.  Words occurring exactly once (hapax legomena) form the
condensate; their share of the dictionary is reported as a diagnostic.

Tokenization is deliberately minimal and explicit: Unicode letter runs,
lowercased, with optional internal hyphens and a minimum length.  Fits
downstream are sensitive to it, so the configuration is part of every
result's provenance.
"""

import re
from collections import Counter
from dataclasses import dataclass

from .errors import DomainError, ValidationError

_LETTER = r"[^\W\d_]"


@dataclass(frozen=True)
class TokenizerConfig:
    keep_hyphens: bool = False
    min_length: int = 1

    def __post_init__(self):
        if self.min_length < 1:
            raise ValidationError("min_length must be >= 1")

    @property
    def pattern(self) -> str:
        if self.keep_hyphens:
            return f"{_LETTER}+(?:-{_LETTER}+)*"
        return f"{_LETTER}+"


def tokenize(text: str, cfg: TokenizerConfig = TokenizerConfig()) -> list:
    """Lowercased words split on non-letter boundaries."""
    words = [m.group(0).lower() for m in re.finditer(cfg.pattern, text)]
    if cfg.min_length > 1:
        words = [w for w in words if len(w) >= cfg.min_length]
    return words


@dataclass(frozen=True, eq=False)
class FrequencyDictionary:
    """word -> occurrence count, all counts >= 1."""

    entries: dict

    def __post_init__(self):
        for word, count in self.entries.items():
            if not isinstance(word, str) or count != int(count) or count < 1:
                raise ValidationError(
                    f"dictionary entries must map words to positive counts, "
                    f"got {word!r}: {count!r}"
                )
        object.__setattr__(
            self, "entries", {w: int(c) for w, c in self.entries.items()}
        )

    @property
    def total_tokens(self) -> int:
        return sum(self.entries.values())

    @property
    def dict_size(self) -> int:
        return len(self.entries)

    def merge(self, other: "FrequencyDictionary") -> "FrequencyDictionary":
        merged = Counter(self.entries)
        merged.update(other.entries)
        return FrequencyDictionary(dict(merged))


def frequency_dictionary(tokens) -> FrequencyDictionary:
    return FrequencyDictionary(dict(Counter(tokens)))


@dataclass(frozen=True, eq=False)
class FrequencySpectrum:
    """occurrence frequency -> number of distinct words with it."""

    spectrum: dict

    def __post_init__(self):
        for freq, nwords in self.spectrum.items():
            if freq != int(freq) or freq < 1 or nwords != int(nwords) or nwords < 1:
                raise ValidationError(
                    f"spectrum entries must map positive frequencies to "
                    f"positive word counts, got {freq!r}: {nwords!r}"
                )
        object.__setattr__(
            self, "spectrum", {int(f): int(n) for f, n in self.spectrum.items()}
        )

    @property
    def dict_size(self) -> int:
        return sum(self.spectrum.values())

    @property
    def total_tokens(self) -> int:
        return sum(f * n for f, n in self.spectrum.items())

    def frequencies(self) -> list:
        return sorted(self.spectrum)


def frequency_spectrum(fdict: FrequencyDictionary) -> FrequencySpectrum:
    return FrequencySpectrum(dict(Counter(fdict.entries.values())))


@dataclass(frozen=True, eq=False)
class RankCurve:
    """Inverted-rank points (omega, cumulative distinct words), post cuts.

    Ranks are floats so that model-generated curves fit the same type;
    corpus-derived ranks are integers.
    """

    omegas: tuple
    ranks: tuple
    cut_low: int = 0
    cut_high: int = 0

    def __post_init__(self):
        if len(self.omegas) != len(self.ranks) or not self.omegas:
            raise ValidationError("curve needs matching non-empty omega/rank lists")
        object.__setattr__(self, "omegas", tuple(int(w) for w in self.omegas))
        object.__setattr__(self, "ranks", tuple(float(r) for r in self.ranks))
        if any(b <= a for a, b in zip(self.omegas, self.omegas[1:])):
            raise ValidationError("omegas must be strictly increasing")
        if any(b <= a for a, b in zip(self.ranks, self.ranks[1:])):
            raise ValidationError("inverted ranks must be strictly increasing")
        if any(w < 1 for w in self.omegas) or any(r <= 0 for r in self.ranks):
            raise ValidationError("omegas and ranks must be positive")

    @property
    def n_points(self) -> int:
        return len(self.omegas)

    def rank_at(self, omega: int) -> float:
        try:
            return self.ranks[self.omegas.index(int(omega))]
        except ValueError:
            raise DomainError(f"frequency {omega} is not on the curve") from None

    def points(self) -> list:
        return list(zip(self.omegas, self.ranks))


def inverted_rank_curve(spec: FrequencySpectrum, cut_low: int = 0,
                        cut_high: int = 0) -> RankCurve:
    """Cumulate the spectrum from the rare end after trimming cuts.

    `cut_low`/`cut_high` remove that many *distinct frequency values*
    from the low/high end; the survivors are re-cumulated from zero.
    """
    if cut_low < 0 or cut_high < 0:
        raise DomainError("cuts must be nonnegative")
    freqs = spec.frequencies()
    if cut_low + cut_high >= len(freqs):
        raise DomainError(
            f"cuts remove all {len(freqs)} distinct frequencies "
            f"(cut_low={cut_low}, cut_high={cut_high})"
        )
    survivors = freqs[cut_low: len(freqs) - cut_high]
    omegas, ranks = [], []
    running = 0
    for w in survivors:
        running += spec.spectrum[w]
        omegas.append(w)
        ranks.append(running)
    return RankCurve(tuple(omegas), tuple(ranks), cut_low=cut_low, cut_high=cut_high)


def condensate_fraction(spec: FrequencySpectrum) -> float:
    """Share of hapax legomena (frequency-1 words) in the dictionary."""
    size = spec.dict_size
    if size == 0:
        raise DomainError("empty spectrum has no condensate fraction")
    return spec.spectrum.get(1, 0) / size


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def dictionary_to_tsv(fdict: FrequencyDictionary) -> str:
    """TSV text: word<TAB>count, sorted by count desc then word asc."""
    lines = ["word\tcount"]
    for word, count in sorted(fdict.entries.items(), key=lambda kv: (-kv[1], kv[0])):
        lines.append(f"{word}\t{count}")
    return "\n".join(lines) + "\n"


def spectrum_to_csv(spec: FrequencySpectrum) -> str:
    lines = ["omega,count"]
    for freq in spec.frequencies():
        lines.append(f"{freq},{spec.spectrum[freq]}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> FrequencySpectrum:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "omega,count":
        raise DomainError("spectrum CSV must start with header 'omega,count'")
    spectrum = {}
    for ln in lines[1:]:
        freq_s, count_s = ln.split(",")
        spectrum[int(freq_s)] = int(count_s)
    return FrequencySpectrum(spectrum)


def curve_to_csv(curve: RankCurve) -> str:
    lines = ["omega,inverted_rank"]
    for w, r in curve.points():
        rendered = repr(int(r)) if float(r).is_integer() else repr(r)
        lines.append(f"{w},{rendered}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> RankCurve:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "omega,inverted_rank":
        raise DomainError("curve CSV must start with header 'omega,inverted_rank'")
    omegas, ranks = [], []
    for ln in lines[1:]:
        w_s, r_s = ln.split(",")
        omegas.append(int(w_s))
        ranks.append(float(r_s))
    return RankCurve(tuple(omegas), tuple(ranks))
