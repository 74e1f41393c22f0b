from .session import AnswerSet, ReasoningSession, SessionResult, StepOutcome, answer_question

__all__ = ["AnswerSet", "ReasoningSession", "SessionResult", "StepOutcome", "answer_question"]
