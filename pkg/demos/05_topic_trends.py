"""
Topic trends at four temporal scales
====================================

A topic is a term set; a document counts when it mentions any term.
Counts and shares are bucketed by month, quarter, year, or rolling
multi-year windows, and a year bucket always equals the sum of its
months and of its quarters.
"""

from datetime import date

from bizquery.fixtures import gen_corpus
from bizquery.reference_engine import index_corpus
from bizquery.trends import summarize_trend, topic_series

docs, _ = gen_corpus(seed=42)
index = index_corpus(docs)
window = (date(2017, 1, 1), date(2024, 12, 31))

yearly = topic_series(index, ["inflation"], "year", window)
print("inflation per year:")
for bucket in yearly.buckets:
    bar = "#" * bucket.count
    print(f"  {bucket.bucket_start.year}  {bucket.count:2d}  share={bucket.share:.2f}  {bar}")

summary = summarize_trend(yearly)
print("direction:", summary.direction, "| peak:", summary.peak_bucket,
      "| change:", f"{summary.pct_change_first_to_last:.0f}%")

# conservation: months and quarters sum to the year bucket
monthly = topic_series(index, ["inflation"], "month", window)
quarterly = topic_series(index, ["inflation"], "quarter", window)
for bucket in yearly.buckets:
    year = bucket.bucket_start.year
    assert bucket.count == sum(b.count for b in monthly.buckets if b.bucket_start.year == year)
    assert bucket.count == sum(b.count for b in quarterly.buckets if b.bucket_start.year == year)
print("conservation holds for every year bucket")

rolling = topic_series(index, ["ai", "automation"], "multi_year", window, window_years=5)
print("\nai OR automation, rolling 5-year windows:")
for bucket in rolling.buckets:
    print(f"  {bucket.bucket_start.year}-{bucket.bucket_start.year + 4}: {bucket.count}")
