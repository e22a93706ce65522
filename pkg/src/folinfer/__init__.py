"""First-order logic entailment toolkit.

Parses an ASCII FOL surface syntax, decides entailment with a resolution
prover, builds prompts for sampled natural-language-to-FOL translation,
aggregates samples by majority vote, and scores runs.
"""

__version__ = "0.1.0"

from .syntax import parse, format_formula, check_signature, FolSyntaxError
from .prover import decide, ProofLimits, Verdict
from .voting import majority_vote, VoteResult

__all__ = [
    "parse",
    "format_formula",
    "check_signature",
    "FolSyntaxError",
    "decide",
    "ProofLimits",
    "Verdict",
    "majority_vote",
    "VoteResult",
    "__version__",
]
