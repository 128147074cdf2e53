"""Two-group study statistics: descriptives, Levene's test, pooled/Welch t-tests.

A bundled fixture holds the quiz scores of a 50-participant study that
compared a scrollytelling tutorial against online articles (26 vs 24
participants, 7-question pre/post tests). The same analysis runs on any
CSV with columns `group,pid,pre,post`.

The sd/se columns of the summary are post-test statistics; sample
(n-1) variances are used throughout. Levene's test centers at the group
mean. p-values come from Student-t and F distributions evaluated through
the regularized incomplete beta function (continued-fraction form), no
external stats library involved.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence


@dataclass(frozen=True)
class StudySample:
    """Per-participant scores of one group on one 7-question test."""

    group_name: str
    scores: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(int(s) for s in self.scores))
        if not self.scores:
            raise ValueError("sample must be non-empty")
        for s in self.scores:
            if not 0 <= s <= 7:
                raise ValueError(f"score {s} outside [0, 7]")


@dataclass(frozen=True)
class StatsSummary:
    n: int
    mean: float
    sd: float
    se: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p_two_tailed: float
    mean_difference: float | None = None
    se_difference: float | None = None
    ci95: tuple[float, float] | None = None


class StudyGroup(NamedTuple):
    name: str
    pre: StudySample
    post: StudySample


def _values(sample) -> list[float]:
    scores = sample.scores if isinstance(sample, StudySample) else sample
    return [float(s) for s in scores]


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _sample_var(xs: Sequence[float], mean: float) -> float:
    return sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)


def describe(sample) -> StatsSummary:
    xs = _values(sample)
    if len(xs) < 2:
        raise ValueError("describe needs n >= 2")
    mean = _mean(xs)
    sd = math.sqrt(_sample_var(xs, mean))
    return StatsSummary(len(xs), mean, sd, sd / math.sqrt(len(xs)))


# --- distribution functions -------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter, eps, fpmin = 300, 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be > 0")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t >= 0 else tail


def f_cdf(x: float, df1: float, df2: float) -> float:
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be > 0")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return regularized_incomplete_beta(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2))


def student_t_ppf(q: float, df: float) -> float:
    """Inverse CDF by bisection; monotone, so plain bracketing suffices."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    lo, hi = -1.0, 1.0
    while student_t_cdf(lo, df) > q:
        lo *= 2.0
    while student_t_cdf(hi, df) < q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- hypothesis tests -------------------------------------------------------

def levene_test(g1, g2) -> TestResult:
    """Mean-centered Levene: one-way F on absolute deviations, df (1, n1+n2-2)."""
    x1, x2 = _values(g1), _values(g2)
    if len(x1) < 2 or len(x2) < 2:
        raise ValueError("levene_test needs n >= 2 in both groups")
    m1, m2 = _mean(x1), _mean(x2)
    z1 = [abs(x - m1) for x in x1]
    z2 = [abs(x - m2) for x in x2]
    zm1, zm2 = _mean(z1), _mean(z2)
    grand = (sum(z1) + sum(z2)) / (len(z1) + len(z2))
    ssb = len(z1) * (zm1 - grand) ** 2 + len(z2) * (zm2 - grand) ** 2
    ssw = sum((z - zm1) ** 2 for z in z1) + sum((z - zm2) ** 2 for z in z2)
    df2 = len(x1) + len(x2) - 2
    if ssw == 0.0:
        f_stat = 0.0 if ssb == 0.0 else math.inf
    else:
        f_stat = ssb / (ssw / df2)
    p = 1.0 - f_cdf(f_stat, 1.0, float(df2)) if math.isfinite(f_stat) else 0.0
    return TestResult(statistic=f_stat, df=float(df2), p_two_tailed=p)


def t_test(g1, g2, variant: str = "pooled") -> TestResult:
    """Independent-samples t-test.

    `pooled` assumes equal variances (df = n1 + n2 - 2); `welch` uses the
    Satterthwaite df. Degenerate zero-variance groups give t = 0, p = 1
    when the means agree and +/-inf, p = 0 when they do not.
    """
    if variant not in ("pooled", "welch"):
        raise ValueError(f"variant must be 'pooled' or 'welch', got {variant!r}")
    x1, x2 = _values(g1), _values(g2)
    n1, n2 = len(x1), len(x2)
    if n1 < 2 or n2 < 2:
        raise ValueError("t_test needs n >= 2 in both groups")
    m1, m2 = _mean(x1), _mean(x2)
    v1, v2 = _sample_var(x1, m1), _sample_var(x2, m2)
    md = m1 - m2

    if variant == "pooled":
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
        se = math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    else:
        se2 = v1 / n1 + v2 / n2
        se = math.sqrt(se2)
        if se2 == 0.0:
            df = float(n1 + n2 - 2)
        else:
            df = se2 * se2 / (
                (v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1)
            )

    if se == 0.0:
        if md == 0.0:
            return TestResult(0.0, df, 1.0, md, se, (md, md))
        stat = math.copysign(math.inf, md)
        return TestResult(stat, df, 0.0, md, se, (md, md))

    stat = md / se
    p = 2.0 * (1.0 - student_t_cdf(abs(stat), df))
    crit = student_t_ppf(0.975, df)
    ci = (md - crit * se, md + crit * se)
    return TestResult(stat, df, p, md, se, ci)


# --- bundled study fixture ---------------------------------------------------

_SCROLLYTELLING_PRE = (2, 1, 3, 3, 3, 4, 3, 2, 4, 3, 4, 1, 1, 5, 3, 3, 4, 4, 3, 4, 3, 5, 2, 2, 2, 2)
_SCROLLYTELLING_POST = (7, 5, 7, 7, 5, 3, 6, 7, 6, 2, 7, 7, 7, 7, 7, 5, 5, 5, 7, 5, 7, 7, 6, 7, 2, 6)
_ONLINE_PRE = (2, 4, 4, 4, 4, 2, 3, 3, 4, 3, 3, 3, 5, 3, 4, 2, 4, 4, 4, 1, 0, 3, 1, 3)
_ONLINE_POST = (3, 3, 5, 4, 3, 3, 4, 4, 3, 3, 3, 3, 3, 2, 4, 4, 3, 2, 6, 7, 6, 7, 6, 4)


def builtin_study_data() -> list[StudyGroup]:
    """The bundled two-group quiz scores, scrollytelling group first."""
    return [
        StudyGroup(
            "scrollytelling",
            StudySample("scrollytelling", _SCROLLYTELLING_PRE),
            StudySample("scrollytelling", _SCROLLYTELLING_POST),
        ),
        StudyGroup(
            "online_articles",
            StudySample("online_articles", _ONLINE_PRE),
            StudySample("online_articles", _ONLINE_POST),
        ),
    ]


def study_rows(groups: list[StudyGroup] | None = None) -> list[tuple[str, int, int, int]]:
    """(group, pid, pre, post) rows, participants numbered from 1."""
    groups = groups if groups is not None else builtin_study_data()
    rows = []
    for group in groups:
        for pid, (pre, post) in enumerate(zip(group.pre.scores, group.post.scores), start=1):
            rows.append((group.name, pid, pre, post))
    return rows


def write_csv(groups: list[StudyGroup] | None = None) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["group", "pid", "pre", "post"])
    writer.writerows(study_rows(groups))
    return out.getvalue()


def parse_csv(text: str) -> list[StudyGroup]:
    """Read `group,pid,pre,post` rows into exactly two study groups.

    Rows are sorted by participant id within each group; groups keep
    their first-appearance order.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV") from None
    if [h.strip().lower() for h in header] != ["group", "pid", "pre", "post"]:
        raise ValueError("CSV header must be exactly 'group,pid,pre,post'")
    by_group: dict[str, list[tuple[int, int, int]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 columns, got {len(row)}")
        group, pid, pre, post = (cell.strip() for cell in row)
        try:
            entry = (int(pid), int(pre), int(post))
        except ValueError:
            raise ValueError(f"line {lineno}: pid/pre/post must be integers") from None
        by_group.setdefault(group, []).append(entry)
    if len(by_group) != 2:
        raise ValueError(f"expected exactly 2 groups, found {len(by_group)}")
    groups = []
    for name, entries in by_group.items():
        entries.sort()
        groups.append(
            StudyGroup(
                name,
                StudySample(name, tuple(e[1] for e in entries)),
                StudySample(name, tuple(e[2] for e in entries)),
            )
        )
    return groups


def study_report(groups: list[StudyGroup] | None = None) -> dict:
    """Summary and post-test comparison of two groups as a JSON-ready document."""
    groups = groups if groups is not None else builtin_study_data()
    if len(groups) != 2:
        raise ValueError("study_report compares exactly 2 groups")
    g1, g2 = groups

    def summary(group: StudyGroup) -> dict:
        pre = describe(group.pre)
        post = describe(group.post)
        return {
            "n": post.n,
            "pre_mean": pre.mean,
            "post_mean": post.mean,
            "post_sd": post.sd,
            "post_se": post.se,
        }

    levene = levene_test(g1.post, g2.post)
    pooled = t_test(g1.post, g2.post, "pooled")
    welch = t_test(g1.post, g2.post, "welch")

    def test_doc(res: TestResult) -> dict:
        return {
            "t": res.statistic,
            "df": res.df,
            "p_two_tailed": res.p_two_tailed,
            "mean_difference": res.mean_difference,
            "se_difference": res.se_difference,
            "ci95": list(res.ci95) if res.ci95 is not None else None,
        }

    return {
        "format_version": 1,
        "groups": {g1.name: summary(g1), g2.name: summary(g2)},
        "levene": {
            "F": levene.statistic,
            "df": [1, int(levene.df)],
            "p": levene.p_two_tailed,
        },
        "t_test_pooled": test_doc(pooled),
        "t_test_welch": test_doc(welch),
    }
