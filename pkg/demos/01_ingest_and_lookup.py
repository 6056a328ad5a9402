"""
Ingesting ranking lists and looking up metrics
==============================================

Build the immutable dataset from the seeded CSV fixtures, then use the
three lookup primitives: exact metric lookup, company-name resolution,
and list coverage.
"""

from bizquery.fixtures import gen_ranking_csv
from bizquery.metrics_store import (
    coverage,
    ingest_files,
    lookup_metric,
    resolve_company,
    serialize_csv,
)

csvs = gen_ranking_csv(seed=42)
dataset = ingest_files([(name, text.encode()) for name, text in sorted(csvs.items())])
print(f"{len(dataset.records)} records across {len(dataset.catalog.lists)} lists")
print("fingerprint:", dataset.load_fingerprint[:16], "...")

# coverage defines the knowledge boundary per list
cov = coverage(dataset, "g500")
print("g500 years:", cov.years[0], "..", cov.cutoff_year)

# exact lookup: the stored cell, with its unit
some_company = sorted(dataset.catalog.companies)[0]
value = lookup_metric(dataset, some_company, "revenue", 2024)
print(f"{value.company} revenue {value.year}: {value.value} {value.unit}")

# missing years come back as a typed miss, never a guess
miss = lookup_metric(dataset, some_company, "revenue", 2031)
print("2031 lookup:", miss.reason, "| latest:", miss.latest_available)

# name resolution: case-insensitive, alias-aware, fuzzy within 0.2
print(resolve_company(dataset.catalog, some_company.upper()))
print(resolve_company(dataset.catalog, some_company[:-1] + "x"))
print(resolve_company(dataset.catalog, "Zzzz Industries"))

# round trip: serializing and re-ingesting reproduces the fingerprint
again = ingest_files([("canon.csv", serialize_csv(dataset).encode())])
assert again.load_fingerprint == dataset.load_fingerprint
print("round-trip fingerprint stable")
