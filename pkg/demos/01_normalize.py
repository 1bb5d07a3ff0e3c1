"""Walk a few raw tweets through the rewrite pipeline.

Shows both casing modes, the n-gram statistics of the result, and the
rule file format that lets a ruleset be stored next to a model.
"""

from feedbackclf.normalize import RuleSet, default_ruleset
from feedbackclf.stats import compute_stats, format_table

RAW = [
    "@DB_Bahn Zug schon wieder 20 Min zu spät!!! 😡 http://t.co/abc #fail",
    "Ticket für 29,90 € am 24.12. um 10:30 ... danke :-)",
    "Heute mal pünktlich :D #bahn",
]

cased, lower = default_ruleset("cased"), default_ruleset("lowercased")
for text in RAW:
    print(f"raw        {text}")
    print(f"cased      {cased.apply(text)}")
    print(f"lowercased {lower.apply(text)}\n")

print(format_table([("demo", compute_stats(lower.apply(t) for t in RAW))]))

# a ruleset survives a dump/load round trip unchanged
assert RuleSet.loads(lower.dumps()).apply(RAW[0]) == lower.apply(RAW[0])
print(f"\nruleset id {lower.id}, {len(lower.dumps().splitlines())} lines when dumped")
