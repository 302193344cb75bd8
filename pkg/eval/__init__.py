"""Evaluation suites: golden cases, oracles, properties and the retention experiment."""
