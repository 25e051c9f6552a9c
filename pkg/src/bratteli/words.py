"""Symbolic sequences: generation, factor complexity, ergodic-count bounds.

Factor counts p(n) come from a suffix automaton over the available prefix
(linear construction), so profiles over n <= 1000 on prefixes up to 10^6
stay interactive; a brute-force substring scan doubles as the test oracle.
All window-based quantities are lower bounds for the true complexity and
every asymptotic reading (slopes, growth constants) is tagged as evidence,
never proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (ArgumentError, NotProlongableError, RarityError,
                     WindowError)
from .verdict import Verdict


@dataclass(frozen=True)
class SubstitutionRule:
    """Letter-to-word map; apply() concatenates images."""

    mapping: dict

    @staticmethod
    def parse(text: str) -> "SubstitutionRule":
        mapping = {}
        for item in text.split(","):
            if ":" not in item:
                raise ArgumentError(f"bad substitution item {item!r}")
            letter, image = item.split(":", 1)
            letter, image = letter.strip(), image.strip()
            if len(letter) != 1 or not image:
                raise ArgumentError(f"bad substitution item {item!r}")
            mapping[letter] = image
        return SubstitutionRule(mapping)

    @property
    def alphabet(self) -> tuple:
        return tuple(sorted(self.mapping))

    def apply(self, word: str) -> str:
        try:
            return "".join(self.mapping[c] for c in word)
        except KeyError as exc:
            raise ArgumentError(f"letter {exc} has no image") from exc

    def incidence(self) -> tuple:
        """Count of letter a in the image of letter b, rows indexed by a."""
        letters = self.alphabet
        return tuple(tuple(self.mapping[b].count(a) for b in letters)
                     for a in letters)

    def is_primitive(self) -> bool:
        from .criteria import is_primitive

        return is_primitive(self.incidence())


@dataclass(frozen=True)
class Word:
    """Finite prefix of an infinite sequence plus how it was generated."""

    text: str
    generator: tuple = ("explicit",)

    @property
    def alphabet(self) -> tuple:
        return tuple(sorted(set(self.text)))

    def __len__(self):
        return len(self.text)


def generate(rule, length: int, start: str | None = None) -> Word:
    """Prefix of the substitution fixed point, or of an explicit/periodic
    word when ``rule`` is a plain string."""
    if isinstance(rule, str):
        if not rule:
            raise ArgumentError("empty explicit word")
        reps = -(-length // len(rule))
        return Word((rule * reps)[:length], ("periodic", rule))
    if start is None:
        start = next((a for a in rule.alphabet
                      if rule.mapping[a].startswith(a)
                      and len(rule.mapping[a]) > 1), None)
        if start is None:
            raise NotProlongableError(
                "no letter begins its own image with room to grow")
    image = rule.mapping.get(start, "")
    if not image.startswith(start) or len(image) < 2:
        raise NotProlongableError(
            f"substitution is not prolongable on {start!r}")
    word = start
    while len(word) < length:
        word = rule.apply(word)
    return Word(word[:length], ("substitution", tuple(sorted(
        rule.mapping.items())), start))


def fibonacci_word(length: int) -> Word:
    return generate(SubstitutionRule({"a": "ab", "b": "a"}), length)


def thue_morse_word(length: int) -> Word:
    return generate(SubstitutionRule({"a": "ab", "b": "ba"}), length)


class _SuffixAutomaton:
    """Standard online construction; counts distinct factors per length."""

    def __init__(self, text: str):
        self.trans = [{}]
        self.link = [-1]
        self.length = [0]
        last = 0
        for c in text:
            last = self._extend(c, last)

    def _extend(self, c, last):
        cur = len(self.trans)
        self.trans.append({})
        self.link.append(-1)
        self.length.append(self.length[last] + 1)
        p = last
        while p != -1 and c not in self.trans[p]:
            self.trans[p][c] = cur
            p = self.link[p]
        if p == -1:
            self.link[cur] = 0
            return cur
        q = self.trans[p][c]
        if self.length[p] + 1 == self.length[q]:
            self.link[cur] = q
            return cur
        clone = len(self.trans)
        self.trans.append(dict(self.trans[q]))
        self.link.append(self.link[q])
        self.length.append(self.length[p] + 1)
        while p != -1 and self.trans[p].get(c) == q:
            self.trans[p][c] = clone
            p = self.link[p]
        self.link[q] = clone
        self.link[cur] = clone
        return cur

    def factor_counts(self, max_len: int) -> list:
        """p(n) for n = 1..max_len: each state contributes one factor per
        length in (len(link), len]."""
        diff = [0] * (max_len + 2)
        for state in range(1, len(self.trans)):
            lo = self.length[self.link[state]] + 1
            hi = self.length[state]
            if lo > max_len:
                continue
            diff[lo] += 1
            diff[min(hi, max_len) + 1] -= 1
        counts, acc = [], 0
        for n in range(1, max_len + 1):
            acc += diff[n]
            counts.append(acc)
        return counts


def brute_force_complexity(text: str, max_len: int) -> list:
    """Oracle: distinct substrings per length by direct set construction."""
    return [len({text[i:i + n] for i in range(len(text) - n + 1)})
            for n in range(1, max_len + 1)]


@dataclass(frozen=True)
class ComplexityProfile:
    """Window-relative factor counts; true complexities are at least
    these."""

    values: tuple                       # p(1..N)
    window_length: int
    alphabet_size: int
    ultimately_periodic: bool = False
    sturmian_like: bool = False
    constant_growth: int | None = None  # stable top-half first difference
    constant_growth_from: int | None = None
    regular_bispecial: bool | None = None
    linear_recurrence_estimate: float | None = None

    @property
    def max_length(self) -> int:
        return len(self.values)

    @property
    def first_differences(self) -> tuple:
        return tuple(self.values[i] - self.values[i - 1]
                     for i in range(1, len(self.values)))

    @property
    def entropy_estimate(self) -> float:
        n = self.max_length
        return math.log(self.values[-1]) / n if n else 0.0

    def slope_estimate(self) -> float:
        """Least-squares slope of p(n) over the top half of the window."""
        lo = self.max_length // 2
        points = [(n + 1, p) for n, p in enumerate(self.values) if n >= lo]
        count = len(points)
        sx = sum(x for x, _ in points)
        sy = sum(y for _, y in points)
        sxx = sum(x * x for x, _ in points)
        sxy = sum(x * y for x, y in points)
        denom = count * sxx - sx * sx
        return (count * sxy - sx * sy) / denom if denom else 0.0

    def ratio_range(self) -> tuple:
        lo = self.max_length // 2
        ratios = [p / (n + 1) for n, p in enumerate(self.values) if n >= lo]
        return (min(ratios), max(ratios))


def complexity_profile(w: Word, max_len: int) -> ComplexityProfile:
    """Exact factor counts of the window with the classification flags."""
    if max_len >= len(w.text):
        raise WindowError(
            f"need a prefix longer than {max_len}, have {len(w.text)}")
    if max_len < 1:
        raise ArgumentError("max factor length must be positive")
    counts = _SuffixAutomaton(w.text).factor_counts(max_len)
    alphabet = len(w.alphabet)
    periodic = any(counts[i] == counts[i + 1] for i in range(max_len - 1))
    sturmian = alphabet == 2 and \
        all(p == n + 2 for n, p in enumerate(counts))
    growth, growth_from = _stable_growth(counts)
    return ComplexityProfile(tuple(counts), len(w.text), alphabet,
                             ultimately_periodic=periodic,
                             sturmian_like=sturmian and not periodic,
                             constant_growth=growth,
                             constant_growth_from=growth_from)


def _stable_growth(counts):
    """Constant first difference over at least the top half of the window."""
    if len(counts) < 4:
        return None, None
    diffs = [counts[i + 1] - counts[i] for i in range(len(counts) - 1)]
    k = diffs[-1]
    start = len(diffs)
    while start > 0 and diffs[start - 1] == k:
        start -= 1
    if start <= len(diffs) // 2:
        return k, start + 1
    return None, None


def special_factors(w: Word, max_len: int) -> dict:
    """Left/right special and bispecial factors per length, with the
    regular-bispecial verdict over the whole window."""
    if max_len >= len(w.text) - 1:
        raise WindowError("window too short for extension statistics")
    text = w.text
    left: dict = {}
    right: dict = {}
    for n in range(1, max_len + 2):
        for i in range(len(text) - n + 1):
            u = text[i:i + n]
            if i > 0:
                left.setdefault(u, set()).add(text[i - 1])
            if i + n < len(text):
                right.setdefault(u, set()).add(text[i + n])
    out = {}
    regular = True
    for n in range(1, max_len + 1):
        ls, rs, bs = [], [], []
        for u in sorted({text[i:i + n] for i in range(len(text) - n + 1)}):
            l_special = len(left.get(u, ())) >= 2
            r_special = len(right.get(u, ())) >= 2
            if l_special:
                ls.append(u)
            if r_special:
                rs.append(u)
            if l_special and r_special:
                bs.append(u)
                right_special_left_ext = sum(
                    1 for a in left[u]
                    if len(right.get(a + u, ())) >= 2)
                left_special_right_ext = sum(
                    1 for b in right[u]
                    if len(left.get(u + b, ())) >= 2)
                if right_special_left_ext != 1 or left_special_right_ext != 1:
                    regular = False
        out[n] = {"left": ls, "right": rs, "bispecial": bs}
    return {"lengths": out, "regular_bispecial": regular}


def return_words(w: Word, factor: str):
    """Words between consecutive occurrence starts of the factor, plus the
    recurrence ratio max |return| / |factor| seen in the window."""
    if not factor:
        raise ArgumentError("empty factor")
    starts = []
    pos = w.text.find(factor)
    while pos != -1:
        starts.append(pos)
        pos = w.text.find(factor, pos + 1)
    if len(starts) < 3:
        raise RarityError(
            f"factor {factor!r} occurs {len(starts)} time(s); need >= 3")
    returns = {w.text[a:b] for a, b in zip(starts, starts[1:])}
    ratio = max(len(r) for r in returns) / len(factor)
    return returns, ratio


def linear_recurrence_estimate(w: Word, max_len: int = 8) -> float:
    """Max return-word ratio over all factors of length <= max_len that
    recur in the window."""
    worst = 0.0
    for n in range(1, max_len + 1):
        seen = set()
        for i in range(len(w.text) - n + 1):
            u = w.text[i:i + n]
            if u in seen:
                continue
            seen.add(u)
            try:
                _, ratio = return_words(w, u)
            except RarityError:
                continue
            worst = max(worst, ratio)
    return worst


@dataclass(frozen=True)
class BoundsReport:
    """Every applicable cardinality bound with its hypothesis check."""

    entries: tuple
    unique_ergodicity: Verdict
    best_bound: int | None
    slope: float
    ratio_range: tuple
    non_ue_trace: tuple = ()


def measure_bounds(profile: ComplexityProfile, frequencies=None,
                   assume_minimal: bool = True) -> BoundsReport:
    """Ergodic-measure count bounds readable from a complexity profile.

    Slope estimates over the top half of the window stand in for the
    liminf/limsup of p(n)/n, so every verdict here is evidence; minimality
    of the subshift is an assumption recorded in the report, not checked.
    """
    slope = profile.slope_estimate()
    lo_ratio, hi_ratio = profile.ratio_range()
    entries = []

    def add(name, hypothesis, holds, bound, note=""):
        entries.append({"name": name, "hypothesis": hypothesis,
                        "holds": holds, "bound": bound, "note": note})

    ue_votes = []
    add("ue_low_limsup", "limsup p(n)/n < 3", hi_ratio < 3,
        1 if hi_ratio < 3 else None)
    ue_votes.append(hi_ratio < 3)
    add("ue_low_liminf", "liminf p(n)/n < 2", lo_ratio < 2,
        1 if lo_ratio < 2 else None)
    ue_votes.append(lo_ratio < 2)

    alpha = math.floor(lo_ratio + 1e-12)
    add("count_liminf", "liminf p(n)/n = alpha", True, max(alpha, 1),
        note=f"alpha estimate {lo_ratio:.6g}")
    if hi_ratio >= 2:
        add("count_limsup", "limsup p(n)/n = alpha >= 2", True,
            max(math.floor(hi_ratio + 1e-12) - 1, 1),
            note=f"alpha estimate {hi_ratio:.6g}")
    k_monteil = math.floor(hi_ratio) + 1
    if k_monteil >= 3:
        add("deconnectable", f"limsup p(n)/n < {k_monteil} (K >= 3)", True,
            k_monteil - 2)
    if profile.constant_growth is not None and profile.constant_growth >= 4:
        add("constant_growth", f"p(n+1) - p(n) = {profile.constant_growth} "
            "eventually (K >= 4)", True, profile.constant_growth - 2)
    if profile.constant_growth is not None and profile.regular_bispecial:
        k = profile.constant_growth
        add("regular_bispecial", f"regular bispecial with growth {k}",
            True, (k + 1) // 2)
    k_generic = math.floor(lo_ratio) + 1
    add("generic_liminf", f"liminf p(n)/n < {k_generic}", True,
        k_generic - 1, note="bound on distinct non-atomic generic measures")
    add("generic_limsup", f"limsup p(n)/n < {math.floor(hi_ratio) + 1} and "
        "a non-uniquely-ergodic generic orbit closure exists", None, None,
        note="second hypothesis not checkable from a window")
    add("interval_exchange", "d-interval exchange subshifts satisfy "
        "count <= floor(d / 2)", None, None,
        note="formula reported only; d is not derivable from a window")

    non_ue_trace = ()
    if frequencies:
        non_ue_trace = tuple(float(n) * float(eps) for n, eps in frequencies)
        vanishing = len(non_ue_trace) >= 3 and \
            non_ue_trace[-1] < 0.1 and \
            non_ue_trace[-1] <= min(non_ue_trace) + 1e-12
        add("non_ue_frequency", "n * min cylinder frequency tends to 0",
            vanishing, None,
            note="vanishing trace indicates more than one measure")
        if vanishing:
            ue_votes = [False]

    numeric = [e["bound"] for e in entries if e["bound"] is not None
               and e["holds"]]
    best = min(numeric) if numeric else None
    if any(ue_votes):
        ue = Verdict.evidence("uniquely ergodic", profile.max_length,
                              slope=slope, ratio_range=[lo_ratio, hi_ratio],
                              assume_minimal=assume_minimal)
    else:
        ue = Verdict.inconclusive("uniquely ergodic", profile.max_length,
                                  slope=slope,
                                  ratio_range=[lo_ratio, hi_ratio])
    return BoundsReport(tuple(entries), ue, best, slope,
                        (lo_ratio, hi_ratio), non_ue_trace)
