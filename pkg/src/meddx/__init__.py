"""Fuzzy-temporal medical decision support engine.

Subsystems:

- :mod:`meddx.knowledge` -- ICD-10-coded knowledge packs (body map, symptoms,
  diseases, fuzzy severity bands, rules).
- :mod:`meddx.diagnosis` -- weighted band-distance scoring and ranking of
  candidate diseases against a patient severity vector.
- :mod:`meddx.store` -- bitemporal storage (valid-time intervals,
  transaction-time instants, history-preserving DML).
- :mod:`meddx.tsql` -- the TSQL dialect: SELECT with a temporal WHEN clause,
  instant operators, Allen interval relations, history-keeping DML.
- :mod:`meddx.analytics` -- least-squares trend fitting and k-means.
- :mod:`meddx.engine` -- forward-chaining candidate generation and the
  interactive triage session.
- :mod:`meddx.service` -- HTTP/JSON API.
- :mod:`meddx.cli` -- command-line front door.
"""

__version__ = "0.1.0"
