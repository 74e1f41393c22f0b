from .reranker import ScoredCandidates, expand, rank_candidates, retrieve_candidates

__all__ = ["ScoredCandidates", "expand", "rank_candidates", "retrieve_candidates"]
