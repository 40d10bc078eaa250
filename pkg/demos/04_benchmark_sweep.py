"""A small Monte Carlo sweep comparing GNC with RANSAC and least squares.

The same sweep is available from the command line as ``gnc-bench bench``.
"""

# %%
import io

from gnc_robust.bench import BenchSpec, format_summary, read_csv, records_to_csv, run_benchmark, summarize

spec = BenchSpec(application="registration", outlier_rates=(0.2, 0.5, 0.8), runs_per_rate=5, seed=1)
records = run_benchmark(spec)
print(format_summary(summarize(records)))

# %% [markdown]
# GNC iteration counts stay flat as outliers grow, while RANSAC's adaptive
# sample count climbs steeply.

# %%
for rate in spec.outlier_rates:
    its = {m.value: [r.outer_iterations for r in records if r.method == m.value and r.outlier_rate == rate]
           for m in spec.methods}
    print(f"rate {rate}: " + ", ".join(f"{m} {sum(v) / len(v):.0f}" for m, v in its.items()))

# %% [markdown]
# The CSV output parses back into identical records.

# %%
text = records_to_csv(records)
assert read_csv(io.StringIO(text)) == records
print(text.splitlines()[0])
print(text.splitlines()[1])
