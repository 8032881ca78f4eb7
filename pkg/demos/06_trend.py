"""
p(T=1 | x) as n grows
=====================

A small version of the trend experiment; the same run is available from the
command line as ``dpmix trend --config <file>``.
"""
import sys

from dpmix.experiments import ExperimentConfig, median_p1_by_n, rows_to_csv, trend_experiment
from dpmix.gibbs import ChainConfig

cfg = ExperimentConfig(n_grid=(5, 10, 50, 200), replicates=5, seed=11,
                       chain=ChainConfig(2000, 500, 2))
rows = trend_experiment(cfg)
rows_to_csv(rows, sys.stdout)
for n, med in median_p1_by_n(rows).items():
    print(f"n={n:>4}  median p(T=1|x) = {med:.4f}")
