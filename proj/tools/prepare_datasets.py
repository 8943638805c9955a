#!/usr/bin/env python3
"""Convert the original Adult, German Credit and COMPAS files into the CSVs under data/.

Usage: prepare_datasets.py SOURCE_DIR OUT_DIR

SOURCE_DIR must contain:
  adult/adult.data, adult/adult.test          (UCI Adult)
  german/german.data                          (UCI Statlog German Credit, symbolic codes)
  compas/compas-scores-two-years.csv          (ProPublica COMPAS analysis)

Transformations:
  adult   - adult.data and adult.test concatenated, header added, whitespace and the
            trailing '.' on adult.test labels stripped; '?' kept as a category.
  german  - header added, attribute codes kept verbatim, label mapped 1 -> good, 2 -> bad.
  compas  - ProPublica's standard filter (|days_b_screening_arrest| <= 30, is_recid != -1,
            c_charge_degree != 'O', score_text != 'N/A'), restricted to African-American and
            Caucasian defendants, reduced to the columns listed in COMPAS_COLUMNS.
"""
import csv
import os
import sys

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
    "occupation", "relationship", "race", "sex", "capital_gain", "capital_loss",
    "hours_per_week", "native_country", "income",
]
GERMAN_COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment", "installment_rate", "personal_status", "other_debtors",
    "residence_since", "property", "age", "other_installment_plans", "housing",
    "existing_credits", "job", "num_dependents", "telephone", "foreign_worker", "credit",
]
COMPAS_COLUMNS = [
    "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
    "juv_other_count", "priors_count", "c_charge_degree", "two_year_recid",
]


def adult(src, out):
    rows = []
    for name in ("adult.data", "adult.test"):
        with open(os.path.join(src, "adult", name)) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("|"):
                    continue
                cells = [c.strip() for c in line.split(",")]
                cells[-1] = cells[-1].rstrip(".")
                rows.append(cells)
    write(out, "adult.csv", ADULT_COLUMNS, rows)


def german(src, out):
    rows = []
    with open(os.path.join(src, "german", "german.data")) as fh:
        for line in fh:
            cells = line.split()
            if not cells:
                continue
            cells[-1] = "good" if cells[-1] == "1" else "bad"
            rows.append(cells)
    write(out, "german.csv", GERMAN_COLUMNS, rows)


def compas(src, out):
    rows = []
    with open(os.path.join(src, "compas", "compas-scores-two-years.csv"), newline="") as fh:
        for rec in csv.DictReader(fh):
            try:
                days = int(rec["days_b_screening_arrest"])
            except ValueError:
                continue
            if not -30 <= days <= 30:
                continue
            if rec["is_recid"] == "-1" or rec["c_charge_degree"] == "O":
                continue
            if rec["score_text"] == "N/A":
                continue
            if rec["race"] not in ("African-American", "Caucasian"):
                continue
            rows.append([rec[c] for c in COMPAS_COLUMNS])
    write(out, "compas.csv", COMPAS_COLUMNS, rows)


def write(out, name, header, rows):
    with open(os.path.join(out, name), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{name}: {len(rows)} rows")


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    adult(src, out)
    german(src, out)
    compas(src, out)


if __name__ == "__main__":
    main()
