import pandas as pd

from pitchcast import ingest

F1_CSV = """\
Sea,Lge,Date,HT,AT,HS,AS,GD,WDL
20-21,ENG,2020-09-12,Alpha,Beta,2,0,2,W
20-21,ENG,2020-09-19,Beta,Gamma,1,1,0,D
20-21,ENG,2020-09-26,Gamma,Alpha,0,3,-3,L
"""


def make_store(rows):
    """Build a store from (season, league, date, ht, at, hs, as) tuples."""
    records = []
    for i, row in enumerate(rows):
        sea, lge, date, ht, at, hs, gs = row
        records.append(ingest.MatchRecord(
            i, sea, lge, pd.Timestamp(date).date(), ht, at, hs, gs))
    return ingest.MatchStore.build(records)


def random_frame(rng, n_rows, n_cols, prefix="f"):
    data = rng.normal(size=(n_rows, n_cols))
    return pd.DataFrame(data, columns=[f"{prefix}{i}" for i in range(n_cols)])
