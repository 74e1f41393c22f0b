from .context import START_NARRATIVE, Narrative, bootstrap_narrative, generate_context

__all__ = ["START_NARRATIVE", "Narrative", "bootstrap_narrative", "generate_context"]
