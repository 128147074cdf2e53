"""Reproduce the bundled study's summary and significance tests."""

import json

from embedstory.stats import (
    builtin_study_data,
    describe,
    levene_test,
    study_report,
    t_test,
)

scrolly, online = builtin_study_data()

for group in (scrolly, online):
    pre, post = describe(group.pre), describe(group.post)
    print(f"{group.name}: n={post.n}  pre mean {pre.mean:.2f}  post mean {post.mean:.2f}"
          f"  sd {post.sd:.2f}  se {post.se:.2f}")

levene = levene_test(scrolly.post, online.post)
verdict = "equal variances assumed" if levene.p_two_tailed > 0.05 else "unequal variances"
print(f"\nLevene: F = {levene.statistic:.2f}, p = {levene.p_two_tailed:.3f} -> {verdict}")

for variant in ("pooled", "welch"):
    res = t_test(scrolly.post, online.post, variant)
    print(f"{variant}: t = {res.statistic:.2f}, df = {res.df:.2f}, "
          f"p = {res.p_two_tailed:.2g}, CI95 = [{res.ci95[0]:.2f}, {res.ci95[1]:.2f}]")

print("\nfull JSON report:")
print(json.dumps(study_report(), indent=2))
