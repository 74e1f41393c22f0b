# KGTrail - multi-hop question answering over knowledge graphs with LLM-guided path exploration
