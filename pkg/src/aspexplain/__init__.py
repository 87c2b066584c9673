"""Explanations for answer sets: minimal assumption sets, explaining derivations and DAGs."""
