"""
Time expressions and knowledge boundaries
=========================================

"last year" in a 2020 article means 2019 no matter when the query runs;
requests outside coverage either redirect (ranking) or reject with the
latest data as reference (metric).
"""

from datetime import date

from bizquery.metrics_store import YearCoverage
from bizquery.temporal import (
    ANCHOR_DOCUMENT,
    clamp_to_coverage,
    parse_temporal,
    resolve,
)

today = date(2025, 6, 15)

# document-anchored resolution
expr = parse_temporal("last year", today)
doc_anchor = date(2020, 3, 1)  # the article's publication date
print("doc says 'last year' ->", resolve(expr, doc_anchor, 2024, ANCHOR_DOCUMENT))

# query-anchored and defaulted resolution
print("'since 2014'  ->", resolve(parse_temporal("since 2014", today), today, 2024).years)
print("'last decade' ->", resolve(parse_temporal("last decade", today), today, 2024).years)
print("no time given ->", resolve(parse_temporal("revenue please", today), today, 2024))

cov = YearCoverage(years=tuple(range(2015, 2025)), cutoff_year=2024)

# metric policy: a single off-coverage year is rejected, latest year noted
print("metric 2031  ->", clamp_to_coverage(resolve(parse_temporal("in 2031", today), today, 2024), cov, "metric"))

# ranking policy: redirect to the nearest available list (ties go recent)
sparse = YearCoverage(years=(2015, 2020), cutoff_year=2020)
print("ranking 2018 ->", clamp_to_coverage(resolve(parse_temporal("in 2018", today), today, 2020), sparse, "ranking"))

# multi-year requests intersect with coverage instead of failing outright
wide = resolve(parse_temporal("from 2010 to 2019", today), today, 2024)
print("2010-2019    ->", clamp_to_coverage(wide, cov, "metric").effective_years)
