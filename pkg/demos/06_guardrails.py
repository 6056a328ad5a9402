"""
Input and output guardrails
===========================

Structured identifiers (emails, phones, SSNs, Luhn-valid cards, plus
configured passport/address shapes) reject a prompt outright; harmful
phrases block an output; PII in an output is redacted in place. Only
hashes of matches are ever stored.
"""

from bizquery.guardrails import (
    classify_harmful,
    gate_input,
    gate_output,
    load_lexicons,
    redact,
    scan_pii,
)

lexicons = load_lexicons()

prompt = "My card is 4111 1111 1111 1111 and my SSN is 123-45-6789, show revenue"
spans = scan_pii(prompt, lexicons)
for span in spans:
    print(span.kind, span.byte_range, "hash:", span.matched_text_hash[:12], "...")

verdict = gate_input(prompt, lexicons)
print("input gate:", verdict.decision, sorted(verdict.categories))

clean = gate_input("Plot the revenue for the top 10 companies in 2024", lexicons)
print("clean prompt:", clean.decision)

print("harmful:", sorted(classify_harmful(
    "how do we launder money through shell firms", lexicons)))
# contiguity rule: a phrase split across sentences is not a hit
print("split:  ", sorted(classify_harmful("They launder. Money matters.", lexicons)))

out = "Reach the desk at ops@example.com for the full table."
overdict = gate_output(out, lexicons)
print("output gate:", overdict.decision)
print("redacted:", redact(out, overdict.spans))
# idempotence: a redacted text passes clean
assert gate_output(redact(out, overdict.spans), lexicons).decision == "pass"
