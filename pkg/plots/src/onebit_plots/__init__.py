"""Chart rendering for the scheduler experiment CSV outputs.

The public surface lives in :mod:`onebit_plots.render`; it is not imported
eagerly here so that ``python -m onebit_plots.render`` runs cleanly.
"""
