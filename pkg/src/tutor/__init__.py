"""Provider-agnostic English-tutoring engine: hybrid proficiency scoring,
exercise-oriented conversations, improvement-area analysis, resource
recommendations, and per-learner progress tracking."""

__version__ = "0.1.0"
